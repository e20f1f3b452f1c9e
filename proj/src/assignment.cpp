#include "a2x/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "a2x/error.hpp"

namespace a2x {

GroupDistanceMatrix GroupDistanceMatrix::from_values(std::uint32_t x,
                                                     std::uint32_t num_classes,
                                                     std::vector<double> values) {
  if (values.size() != std::size_t{x} * num_classes) {
    fail(ErrorKind::kValidation, "group distances: expected x*K entries");
  }
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0) {
      fail(ErrorKind::kValidation,
           "group distances: entries must be finite and non-negative");
    }
  }
  return GroupDistanceMatrix{x, num_classes, std::move(values), {}};
}

GroupDistanceMatrix group_distances(const Grouping& g, const DistanceMatrix& d) {
  if (g.num_classes != d.num_classes) {
    fail(ErrorKind::kParameter, "group_distances: grouping and distances disagree on K");
  }
  const std::size_t k = g.num_classes;
  GroupDistanceMatrix out{g.x, g.num_classes,
                          std::vector<double>(std::size_t{g.x} * k, 0.0),
                          std::vector<std::uint8_t>(std::size_t{g.x} * k, 0)};
  // Ascending class order, so every row sums its members in a fixed order.
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t gi = g.assign[j];
    out.member[gi * k + j] = 1;
    for (std::size_t c = 0; c < k; ++c) out.values[gi * k + c] += d(j, c);
  }
  return out;
}

double assignment_objective(const GroupDistanceMatrix& D,
                            const std::vector<ClassId>& targets) {
  double total = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) total += D(i, targets[i]);
  return total;
}

double tie_tolerance(const GroupDistanceMatrix& D) {
  double max_w = 0.0;
  for (double v : D.values) max_w = std::max(max_w, v);
  return 1e-12 * static_cast<double>(std::max<std::uint32_t>(D.x, 1)) * max_w;
}

// Shortest-augmenting-path Hungarian method (potentials form), O(n^3).
SquareSolution solve_min_cost_square(std::size_t n, const std::vector<double>& cost) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // 1-based internally; index 0 is the virtual root column.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> col_owner(n + 1, 0), way(n + 1, 0);
  std::vector<double> min_slack(n + 1);
  std::vector<char> used(n + 1);

  for (std::size_t row = 1; row <= n; ++row) {
    col_owner[0] = row;
    std::size_t col0 = 0;
    std::fill(min_slack.begin(), min_slack.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[col0] = 1;
      const std::size_t i0 = col_owner[col0];
      double delta = kInf;
      std::size_t col1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double slack = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (slack < min_slack[j]) {
          min_slack[j] = slack;
          way[j] = col0;
        }
        if (min_slack[j] < delta) {
          delta = min_slack[j];
          col1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[col_owner[j]] += delta;
          v[j] -= delta;
        } else {
          min_slack[j] -= delta;
        }
      }
      col0 = col1;
    } while (col_owner[col0] != 0);
    do {
      const std::size_t col1 = way[col0];
      col_owner[col0] = col_owner[col1];
      col0 = col1;
    } while (col0 != 0);
  }

  SquareSolution sol;
  sol.row_to_col.assign(n, 0);
  for (std::size_t j = 1; j <= n; ++j) {
    if (col_owner[j] != 0) sol.row_to_col[col_owner[j] - 1] = j - 1;
  }
  sol.row_potential.assign(u.begin() + 1, u.end());
  sol.col_potential.assign(v.begin() + 1, v.end());
  for (std::size_t i = 0; i < n; ++i) sol.cost += cost[i * n + sol.row_to_col[i]];
  return sol;
}

namespace {

void check_shape(const GroupDistanceMatrix& D) {
  if (D.x == 0 || D.x > D.num_classes) {
    fail(ErrorKind::kParameter, "assignment: need 1 <= x <= K (x=" +
                                    std::to_string(D.x) + ", K=" +
                                    std::to_string(D.num_classes) + ")");
  }
  if (D.values.size() != std::size_t{D.x} * D.num_classes) {
    fail(ErrorKind::kValidation, "assignment: weight table has the wrong size");
  }
}

// Max-weight solver for the rows not yet fixed, over the columns not yet
// taken. Rows are padded with zero-weight dummies up to a square problem.
class RestrictedSolver {
 public:
  RestrictedSolver(const GroupDistanceMatrix& D, const AssignConfig& cfg)
      : D_(D), forbid_(cfg.forbid_self_target) {
    double max_w = 0.0;
    for (double v : D.values) max_w = std::max(max_w, v);
    sentinel_ = 2.0 * (static_cast<double>(D.num_classes) * max_w + 1.0);
  }

  bool allowed(std::size_t row, std::size_t col) const {
    return !(forbid_ && D_.is_member(row, col));
  }

  struct Result {
    std::vector<ClassId> targets;  // full targets (fixed prefix + solved rest)
    bool feasible = true;
    // Reduced cost of (row, col) for rows >= fixed.size(), in original indexing.
    std::vector<double> reduced;  // x * K, NaN where not applicable
  };

  Result solve(const std::vector<ClassId>& fixed) const {
    const std::size_t k = D_.num_classes;
    const std::size_t first = fixed.size();
    std::vector<bool> taken(k, false);
    for (ClassId c : fixed) taken[c] = true;
    std::vector<std::size_t> cols;
    for (std::size_t c = 0; c < k; ++c) {
      if (!taken[c]) cols.push_back(c);
    }
    const std::size_t n = cols.size();
    const std::size_t real_rows = D_.x - first;

    std::vector<double> cost(n * n, 0.0);
    for (std::size_t r = 0; r < real_rows; ++r) {
      for (std::size_t b = 0; b < n; ++b) {
        const std::size_t row = first + r;
        cost[r * n + b] = allowed(row, cols[b]) ? -D_(row, cols[b]) : sentinel_;
      }
    }
    SquareSolution sq = solve_min_cost_square(n, cost);

    Result res;
    res.targets = fixed;
    res.reduced.assign(std::size_t{D_.x} * k, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t r = 0; r < real_rows; ++r) {
      const std::size_t col = cols[sq.row_to_col[r]];
      res.targets.push_back(static_cast<ClassId>(col));
      if (!allowed(first + r, col)) res.feasible = false;
      for (std::size_t b = 0; b < n; ++b) {
        res.reduced[(first + r) * k + cols[b]] =
            cost[r * n + b] - sq.row_potential[r] - sq.col_potential[b];
      }
    }
    return res;
  }

 private:
  const GroupDistanceMatrix& D_;
  bool forbid_;
  double sentinel_;
};

}  // namespace

Assignment hungarian_max(const GroupDistanceMatrix& D, const AssignConfig& cfg) {
  check_shape(D);
  for (double v : D.values) {
    if (!std::isfinite(v)) fail(ErrorKind::kValidation, "assignment: non-finite weight");
  }
  RestrictedSolver solver(D, cfg);
  auto current = solver.solve({});
  if (!current.feasible) {
    fail(ErrorKind::kInfeasible,
         "assignment: no target choice avoids every group's own classes");
  }
  const double best = assignment_objective(D, current.targets);
  const double tol = tie_tolerance(D);

  // Fix rows one at a time to the smallest class that still admits an
  // assignment within `tol` of the optimum.
  std::vector<ClassId> fixed;
  for (std::size_t row = 0; row < D.x; ++row) {
    const ClassId incumbent = current.targets[row];
    const double incumbent_value = assignment_objective(D, current.targets);
    std::vector<bool> taken(D.num_classes, false);
    for (ClassId c : fixed) taken[c] = true;
    for (ClassId col = 0; col < incumbent; ++col) {
      if (taken[col] || !solver.allowed(row, col)) continue;
      // Any completion through (row, col) loses at least its reduced cost.
      const double reduced = current.reduced[row * D.num_classes + col];
      if (incumbent_value - reduced < best - 2.0 * tol) continue;
      auto fixed_try = fixed;
      fixed_try.push_back(col);
      auto attempt = solver.solve(fixed_try);
      if (attempt.feasible && assignment_objective(D, attempt.targets) >= best - tol) {
        current = std::move(attempt);
        break;
      }
    }
    fixed.push_back(current.targets[row]);
  }
  return Assignment{D.x, std::move(current.targets)};
}

std::uint64_t injection_count(std::uint32_t num_classes, std::uint32_t x) {
  std::uint64_t count = 1;
  for (std::uint32_t i = 0; i < x; ++i) {
    const std::uint64_t factor = num_classes - i;
    if (count > std::numeric_limits<std::uint64_t>::max() / factor) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    count *= factor;
  }
  return count;
}

namespace {

class Enumerator {
 public:
  Enumerator(const GroupDistanceMatrix& D, const AssignConfig& cfg)
      : D_(D), forbid_(cfg.forbid_self_target), used_(D.num_classes, false),
        targets_(D.x, 0) {}

  // Visits every allowed injection in lexicographic order of targets.
  template <typename Visit>
  void run(Visit&& visit) {
    recurse(0, 0.0, visit);
  }

 private:
  template <typename Visit>
  void recurse(std::size_t row, double partial, Visit& visit) {
    if (row == D_.x) {
      visit(targets_, partial);
      return;
    }
    for (ClassId c = 0; c < D_.num_classes; ++c) {
      if (used_[c] || (forbid_ && D_.is_member(row, c))) continue;
      used_[c] = true;
      targets_[row] = c;
      recurse(row + 1, partial + D_(row, c), visit);
      used_[c] = false;
    }
  }

  const GroupDistanceMatrix& D_;
  bool forbid_;
  std::vector<bool> used_;
  std::vector<ClassId> targets_;
};

}  // namespace

Assignment brute_force_assign(const GroupDistanceMatrix& D, const AssignConfig& cfg) {
  check_shape(D);
  const std::uint64_t count = injection_count(D.num_classes, D.x);
  if (count > kBruteForceLimit) {
    fail(ErrorKind::kGuard, "brute force: " + std::to_string(D.num_classes) + "!/(" +
                                std::to_string(D.num_classes) + "-" +
                                std::to_string(D.x) + ")! injections exceed the " +
                                std::to_string(kBruteForceLimit) + " limit");
  }
  double best = -std::numeric_limits<double>::infinity();
  Enumerator(D, cfg).run([&](const std::vector<ClassId>&, double value) {
    best = std::max(best, value);
  });
  if (best == -std::numeric_limits<double>::infinity()) {
    fail(ErrorKind::kInfeasible,
         "brute force: no target choice avoids every group's own classes");
  }
  const double threshold = best - tie_tolerance(D);
  std::optional<std::vector<ClassId>> chosen;
  Enumerator(D, cfg).run([&](const std::vector<ClassId>& targets, double value) {
    if (!chosen && value >= threshold) chosen = targets;
  });
  return Assignment{D.x, std::move(*chosen)};
}

}  // namespace a2x
