#include "a2x/mapping.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "a2x/error.hpp"
#include "a2x/rng.hpp"

namespace a2x {

Mapping build_mapping(const Grouping& g, const Assignment& a) {
  if (g.x != a.x || a.targets.size() != g.x) {
    fail(ErrorKind::kParameter, "build_mapping: grouping has " + std::to_string(g.x) +
                                    " groups but assignment has " +
                                    std::to_string(a.targets.size()) + " targets");
  }
  return Mapping::from_groups(g.num_classes, g.groups(), a.targets);
}

Mapping cyclic_mapping(std::uint32_t num_classes) {
  if (num_classes < 2) fail(ErrorKind::kParameter, "cyclic mapping needs K >= 2");
  std::vector<std::vector<ClassId>> groups(num_classes);
  std::vector<ClassId> targets(num_classes);
  for (ClassId y = 0; y < num_classes; ++y) {
    groups[y] = {y};
    targets[y] = (y + 1) % num_classes;
  }
  return Mapping::from_groups(num_classes, std::move(groups), std::move(targets));
}

namespace {

double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// Uniform draw over surjections {0..K-1} -> {0..X-1}, returned in canonical
// form (groups numbered by first appearance). Classes are placed in order;
// the chance of opening a new group is the exact share of surjective
// completions, tabulated in log space.
std::vector<std::uint32_t> sample_surjection(std::uint32_t k, std::uint32_t x, Rng& rng) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  // ways[r][u]: log #assignments of r items covering all u uncovered groups.
  std::vector<std::vector<double>> ways(k + 1, std::vector<double>(x + 1, kNegInf));
  ways[0][0] = 0.0;
  for (std::uint32_t r = 1; r <= k; ++r) {
    for (std::uint32_t u = 0; u <= x; ++u) {
      double v = kNegInf;
      if (u < x) v = std::log(static_cast<double>(x - u)) + ways[r - 1][u];
      if (u > 0) v = log_add(v, std::log(static_cast<double>(u)) + ways[r - 1][u - 1]);
      ways[r][u] = v;
    }
  }
  std::vector<std::uint32_t> assign(k);
  std::uint32_t opened = 0;
  for (std::uint32_t i = 0; i < k; ++i) {
    const std::uint32_t remaining = k - i;
    const std::uint32_t uncovered = x - opened;
    double p_new = 0.0;
    if (uncovered > 0) {
      p_new = std::exp(std::log(static_cast<double>(uncovered)) +
                       ways[remaining - 1][uncovered - 1] - ways[remaining][uncovered]);
    }
    if (opened == 0 || uncovered >= remaining || rng.uniform() < p_new) {
      assign[i] = opened++;
    } else {
      assign[i] = static_cast<std::uint32_t>(rng.below(opened));
    }
  }
  return assign;
}

std::vector<ClassId> distinct_classes(std::uint32_t k, std::uint32_t count, Rng& rng) {
  std::vector<ClassId> pool(k);
  std::iota(pool.begin(), pool.end(), 0);
  for (std::uint32_t i = 0; i < count; ++i) {
    std::swap(pool[i], pool[i + rng.below(k - i)]);
  }
  pool.resize(count);
  return pool;
}

}  // namespace

Mapping random_mapping(std::uint32_t num_classes, std::uint32_t x, std::uint64_t seed) {
  if (x == 0 || x > num_classes) {
    fail(ErrorKind::kParameter, "random mapping: x=" + std::to_string(x) +
                                    " outside [1, " + std::to_string(num_classes) +
                                    "]");
  }
  Rng rng(seed);
  auto grouping = Grouping::from_assign(x, sample_surjection(num_classes, x, rng));
  auto targets = distinct_classes(num_classes, x, rng);
  return Mapping::from_groups(num_classes, grouping.groups(), std::move(targets));
}

Mapping random_targets(const Grouping& g, std::uint64_t seed) {
  Rng rng(seed);
  return Mapping::from_groups(g.num_classes, g.groups(),
                              distinct_classes(g.num_classes, g.x, rng));
}

MappingScore score_mapping(const Mapping& m, const DistanceMatrix& d) {
  if (m.num_classes != d.num_classes) {
    fail(ErrorKind::kParameter, "score: mapping has K=" + std::to_string(m.num_classes) +
                                    " but distances have K=" +
                                    std::to_string(d.num_classes));
  }
  MappingScore score;
  for (std::size_t g = 0; g < m.groups.size(); ++g) {
    const ClassId t = m.targets[g];
    for (ClassId j : m.groups[g]) {
      score.objective += d(j, t);
      if (j == t) ++score.self_target_count;
    }
  }
  if (m.x >= 2) {
    score.silhouette_mean =
        silhouette(Grouping::from_groups(m.num_classes, m.groups), d).mean;
  }
  return score;
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    fail(ErrorKind::kParameter, "pearson: need two equal-length sequences of >= 2 values");
  }
  const auto n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    fail(ErrorKind::kParameter, "pearson: undefined for a constant sequence");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<Finding> validate_mapping(const Mapping& m) {
  std::vector<Finding> findings;
  for (auto& msg : mapping_structure_errors(m)) {
    findings.push_back({Finding::Severity::kError, std::move(msg)});
  }
  const std::size_t groups = std::min(m.groups.size(), m.targets.size());
  for (std::size_t g = 0; g < groups; ++g) {
    const auto& members = m.groups[g];
    if (std::find(members.begin(), members.end(), m.targets[g]) != members.end()) {
      findings.push_back({Finding::Severity::kWarning,
                          "group " + std::to_string(g) + " targets its own class " +
                              std::to_string(m.targets[g])});
    }
  }
  return findings;
}

SweepReport sweep_random(std::uint32_t num_classes, std::uint32_t x, std::uint64_t n,
                         std::uint64_t seed, const DistanceMatrix& d) {
  if (n == 0) fail(ErrorKind::kParameter, "sweep: n must be positive");
  if (d.num_classes != num_classes) {
    fail(ErrorKind::kParameter, "sweep: K does not match the distance matrix");
  }
  SweepReport report;
  report.rows.reserve(n);
  std::vector<double> objectives, silhouettes;
  for (std::uint64_t i = 0; i < n; ++i) {
    SweepRow row;
    row.index = i;
    row.mapping = random_mapping(num_classes, x, derive_seed(seed, i));
    row.score = score_mapping(row.mapping, d);
    objectives.push_back(row.score.objective);
    if (row.score.silhouette_mean) silhouettes.push_back(*row.score.silhouette_mean);
    report.rows.push_back(std::move(row));
  }
  if (silhouettes.size() == objectives.size() && objectives.size() >= 2) {
    try {
      report.objective_silhouette_pearson = pearson(objectives, silhouettes);
    } catch (const Error&) {
      // constant column; leave absent
    }
  }
  return report;
}

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_quote(const std::string& field) {
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::string sweep_to_csv(const SweepReport& report) {
  std::ostringstream out;
  out << kSweepCsvHeader << '\n';
  for (const auto& row : report.rows) {
    out << row.index << ',' << format_double(row.score.objective) << ',';
    if (row.score.silhouette_mean) out << format_double(*row.score.silhouette_mean);
    out << ',' << row.score.self_target_count << ','
        << csv_quote(mapping_to_compact_json(row.mapping)) << '\n';
  }
  return out.str();
}

Plan plan_mapping(const PositionMatrix& p, const PlanConfig& cfg) {
  if (cfg.x == 0 || cfg.x > p.num_classes) {
    fail(ErrorKind::kParameter, "plan: x=" + std::to_string(cfg.x) + " outside [1, " +
                                    std::to_string(p.num_classes) + "]");
  }
  Plan plan;
  plan.distances = distance_matrix(p, cfg.norm);
  KMeansConfig km{cfg.x, cfg.seed, cfg.max_iters, cfg.tol, cfg.restarts};
  plan.grouping = kmeans(p, km);
  plan.group_distances = group_distances(plan.grouping, plan.distances);
  plan.assignment =
      hungarian_max(plan.group_distances, AssignConfig{cfg.forbid_self_target});
  plan.mapping = build_mapping(plan.grouping, plan.assignment);
  plan.score = score_mapping(plan.mapping, plan.distances);
  return plan;
}

}  // namespace a2x
