#include "a2x/grouping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "a2x/error.hpp"
#include "a2x/rng.hpp"

namespace a2x {

Grouping Grouping::from_assign(std::uint32_t x, std::vector<std::uint32_t> assign) {
  if (x == 0 || x > assign.size()) {
    fail(ErrorKind::kParameter, "grouping: x must be in [1, num_classes]");
  }
  constexpr auto kUnset = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> relabel(x, kUnset);
  std::uint32_t next = 0;
  for (auto& gi : assign) {
    if (gi >= x) fail(ErrorKind::kValidation, "grouping: group index out of range");
    if (relabel[gi] == kUnset) relabel[gi] = next++;
    gi = relabel[gi];
  }
  if (next != x) fail(ErrorKind::kValidation, "grouping: empty group");
  return Grouping{static_cast<std::uint32_t>(assign.size()), x, std::move(assign)};
}

Grouping Grouping::from_groups(std::uint32_t num_classes,
                               const std::vector<std::vector<ClassId>>& groups) {
  constexpr auto kUnset = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> assign(num_classes, kUnset);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (ClassId c : groups[g]) {
      if (c >= num_classes || assign[c] != kUnset) {
        fail(ErrorKind::kValidation, "grouping: groups are not a partition");
      }
      assign[c] = static_cast<std::uint32_t>(g);
    }
  }
  if (std::find(assign.begin(), assign.end(), kUnset) != assign.end()) {
    fail(ErrorKind::kValidation, "grouping: groups do not cover every class");
  }
  return from_assign(static_cast<std::uint32_t>(groups.size()), std::move(assign));
}

std::vector<std::vector<ClassId>> Grouping::groups() const {
  std::vector<std::vector<ClassId>> out(x);
  for (ClassId c = 0; c < num_classes; ++c) out[assign[c]].push_back(c);
  return out;
}

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = a[k] - b[k];
    acc += diff * diff;
  }
  return acc;
}

class Lloyd {
 public:
  Lloyd(const PositionMatrix& p, std::uint32_t x)
      : p_(p), x_(x), centroids_(std::size_t{x} * p.dim, 0.0), assign_(p.num_classes, 0) {}

  std::span<double> centroid(std::size_t g) {
    return {centroids_.data() + g * p_.dim, p_.dim};
  }
  std::span<const double> centroid(std::size_t g) const {
    return {centroids_.data() + g * p_.dim, p_.dim};
  }

  // k-means++: first centre uniform, then proportional to squared distance
  // to the nearest chosen centre.
  void seed_plus_plus(Rng& rng) {
    const std::size_t k = p_.num_classes;
    std::vector<double> nearest(k, std::numeric_limits<double>::infinity());
    std::vector<bool> chosen(k, false);
    std::size_t pick = rng.below(k);
    for (std::uint32_t g = 0; g < x_; ++g) {
      if (g > 0) pick = sample_next(rng, nearest, chosen);
      chosen[pick] = true;
      std::ranges::copy(p_.row(pick), centroid(g).begin());
      for (std::size_t i = 0; i < k; ++i) {
        nearest[i] = std::min(nearest[i], squared_distance(p_.row(i), centroid(g)));
      }
    }
  }

  // Returns true when any class changed group.
  bool assign_step() {
    bool changed = false;
    for (std::size_t i = 0; i < p_.num_classes; ++i) {
      std::uint32_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::uint32_t g = 0; g < x_; ++g) {
        const double dist = squared_distance(p_.row(i), centroid(g));
        if (dist < best_d) {
          best_d = dist;
          best = g;
        }
      }
      changed |= assign_[i] != best;
      assign_[i] = best;
    }
    return changed;
  }

  // Moves the point farthest from its centroid into each empty cluster.
  void repair_empty() {
    for (std::uint32_t g = 0; g < x_; ++g) {
      auto sizes = cluster_sizes();
      if (sizes[g] != 0) continue;
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < p_.num_classes; ++i) {
        if (sizes[assign_[i]] < 2) continue;
        const double dist = squared_distance(p_.row(i), centroid(assign_[i]));
        if (dist > far_d) {
          far_d = dist;
          far = i;
        }
      }
      assign_[far] = g;
      std::ranges::copy(p_.row(far), centroid(g).begin());
    }
  }

  // Recomputes centroids; returns the largest squared centroid shift.
  double update_step() {
    std::vector<double> next(centroids_.size(), 0.0);
    auto sizes = cluster_sizes();
    for (std::size_t i = 0; i < p_.num_classes; ++i) {
      auto row = p_.row(i);
      double* acc = next.data() + std::size_t{assign_[i]} * p_.dim;
      for (std::size_t k = 0; k < p_.dim; ++k) acc[k] += row[k];
    }
    double shift = 0.0;
    for (std::uint32_t g = 0; g < x_; ++g) {
      double* acc = next.data() + std::size_t{g} * p_.dim;
      for (std::size_t k = 0; k < p_.dim; ++k) acc[k] /= static_cast<double>(sizes[g]);
      shift = std::max(shift, squared_distance({acc, p_.dim}, centroid(g)));
    }
    centroids_ = std::move(next);
    return shift;
  }

  double wcss() const {
    double total = 0.0;
    for (std::size_t i = 0; i < p_.num_classes; ++i) {
      total += squared_distance(p_.row(i), centroid(assign_[i]));
    }
    return total;
  }

  const std::vector<std::uint32_t>& assignment() const { return assign_; }

 private:
  std::vector<std::size_t> cluster_sizes() const {
    std::vector<std::size_t> sizes(x_, 0);
    for (auto gi : assign_) ++sizes[gi];
    return sizes;
  }

  static std::size_t sample_next(Rng& rng, const std::vector<double>& weights,
                                 const std::vector<bool>& chosen) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      std::size_t last_positive = 0;
      for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] <= 0.0) continue;
        acc += weights[i];
        last_positive = i;
        if (target < acc) return i;
      }
      return last_positive;
    }
    // Every remaining point coincides with a centre: pick an unused one.
    std::vector<std::size_t> free;
    for (std::size_t i = 0; i < chosen.size(); ++i) {
      if (!chosen[i]) free.push_back(i);
    }
    return free[rng.below(free.size())];
  }

  const PositionMatrix& p_;
  std::uint32_t x_;
  std::vector<double> centroids_;
  std::vector<std::uint32_t> assign_;
};

KMeansRun run_once(const PositionMatrix& p, const KMeansConfig& cfg,
                   std::uint64_t run_seed) {
  Rng rng(run_seed);
  Lloyd lloyd(p, cfg.x);
  lloyd.seed_plus_plus(rng);

  KMeansRun run;
  for (std::uint32_t it = 0; it < cfg.max_iters; ++it) {
    const bool changed = lloyd.assign_step();
    lloyd.repair_empty();
    const double shift = lloyd.update_step();
    run.wcss_history.push_back(lloyd.wcss());
    run.iterations = it + 1;
    if (it > 0 && !changed) break;
    if (shift <= cfg.tol * cfg.tol) break;
  }
  // The reported grouping is the final assignment against the final means.
  run.grouping = Grouping::from_assign(cfg.x, lloyd.assignment());
  run.wcss = within_cluster_ss(p, run.grouping);
  return run;
}

}  // namespace

double within_cluster_ss(const PositionMatrix& p, const Grouping& g) {
  std::vector<double> means(std::size_t{g.x} * p.dim, 0.0);
  std::vector<std::size_t> sizes(g.x, 0);
  for (std::size_t i = 0; i < p.num_classes; ++i) {
    ++sizes[g.assign[i]];
    auto row = p.row(i);
    for (std::size_t k = 0; k < p.dim; ++k) means[g.assign[i] * p.dim + k] += row[k];
  }
  for (std::size_t gi = 0; gi < g.x; ++gi) {
    for (std::size_t k = 0; k < p.dim; ++k) {
      means[gi * p.dim + k] /= static_cast<double>(sizes[gi]);
    }
  }
  double total = 0.0;
  for (std::size_t i = 0; i < p.num_classes; ++i) {
    total += squared_distance(p.row(i), {means.data() + g.assign[i] * p.dim, p.dim});
  }
  return total;
}

KMeansResult kmeans_detailed(const PositionMatrix& p, const KMeansConfig& cfg) {
  if (cfg.x == 0 || cfg.x > p.num_classes) {
    fail(ErrorKind::kParameter, "kmeans: x=" + std::to_string(cfg.x) +
                                    " outside [1, " +
                                    std::to_string(p.num_classes) + "]");
  }
  if (cfg.restarts == 0 || cfg.max_iters == 0 || !(cfg.tol >= 0.0)) {
    fail(ErrorKind::kParameter, "kmeans: restarts and max_iters must be positive, tol >= 0");
  }
  KMeansResult result;
  for (std::uint32_t r = 0; r < cfg.restarts; ++r) {
    result.runs.push_back(run_once(p, cfg, derive_seed(cfg.seed, r)));
    if (r == 0 || result.runs.back().wcss < result.wcss) {
      result.wcss = result.runs.back().wcss;
      result.best_restart = r;
    }
  }
  result.grouping = result.runs[result.best_restart].grouping;
  return result;
}

SilhouetteReport silhouette(const Grouping& g, const DistanceMatrix& d) {
  if (g.num_classes != d.num_classes) {
    fail(ErrorKind::kParameter, "silhouette: grouping and distances disagree on K");
  }
  if (g.x < 2) {
    fail(ErrorKind::kParameter, "silhouette: undefined for a single group");
  }
  const std::size_t k = g.num_classes;
  std::vector<std::size_t> sizes(g.x, 0);
  for (auto gi : g.assign) ++sizes[gi];

  SilhouetteReport rep;
  rep.per_class.resize(k);
  rep.a.resize(k);
  rep.b.resize(k);
  std::vector<double> sums(g.x);
  for (std::size_t i = 0; i < k; ++i) {
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j = 0; j < k; ++j) {
      if (j != i) sums[g.assign[j]] += d(i, j);
    }
    const auto own = g.assign[i];
    double b = std::numeric_limits<double>::infinity();
    for (std::uint32_t h = 0; h < g.x; ++h) {
      if (h != own) b = std::min(b, sums[h] / static_cast<double>(sizes[h]));
    }
    rep.b[i] = b;
    if (sizes[own] == 1) {
      rep.a[i] = 0.0;
      rep.per_class[i] = 0.0;
      continue;
    }
    const double a = sums[own] / static_cast<double>(sizes[own] - 1);
    rep.a[i] = a;
    const double denom = std::max(a, b);
    rep.per_class[i] = denom > 0.0 ? (b - a) / denom : 0.0;
  }
  double total = 0.0;
  for (double s : rep.per_class) total += s;
  rep.mean = total / static_cast<double>(k);
  return rep;
}

}  // namespace a2x
