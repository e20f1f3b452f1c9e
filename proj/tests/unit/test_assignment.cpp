#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "a2x/assignment.hpp"
#include "a2x/error.hpp"
#include "a2x/features.hpp"
#include "a2x/grouping.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace a2x;

namespace {

std::vector<std::vector<double>> rows_of(const GroupDistanceMatrix& D) {
  std::vector<std::vector<double>> w(D.x, std::vector<double>(D.num_classes));
  for (std::size_t i = 0; i < D.x; ++i)
    for (std::size_t k = 0; k < D.num_classes; ++k) w[i][k] = D(i, k);
  return w;
}

GroupDistanceMatrix random_weights(std::mt19937_64& gen, std::uint32_t x, std::uint32_t k,
                                   bool integer) {
  std::vector<double> v(std::size_t{x} * k);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  for (auto& w : v) w = integer ? static_cast<double>(gen() % 101) : u(gen);
  return GroupDistanceMatrix::from_values(x, k, std::move(v));
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an a2x::Error");
  return ErrorKind::kIo;
}

}  // namespace

TEST_CASE("group distances of singletons are the class distances") {
  std::mt19937_64 gen(1);
  const auto d = distance_matrix(testing::random_points(gen, 6, 3));
  const auto D = group_distances(Grouping::from_assign(6, {0, 1, 2, 3, 4, 5}), d);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t k = 0; k < 6; ++k) CHECK(D(i, k) == d(i, k));
}

TEST_CASE("group distance is a sum over members") {
  std::vector<double> v(36, 0.0);
  auto set = [&](int i, int j, double x) { v[i * 6 + j] = v[j * 6 + i] = x; };
  set(0, 5, 2);
  set(1, 5, 3);
  set(0, 1, 1);
  const auto d = DistanceMatrix::from_values(6, v);
  const auto g = Grouping::from_groups(6, {{0, 1}, {2, 3, 4}, {5}});
  CHECK(group_distances(g, d)(0, 5) == 5.0);
}

TEST_CASE("group distances match a naive triple loop") {
  std::mt19937_64 gen(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto d = distance_matrix(testing::random_points(gen, 8, 4));
    std::vector<std::uint32_t> assign(8);
    for (int c = 0; c < 8; ++c) assign[c] = c < 3 ? c : static_cast<std::uint32_t>(gen() % 3);
    const auto g = Grouping::from_assign(3, assign);
    const auto D = group_distances(g, d);
    const auto ref = oracle::group_sums(g.groups(), testing::to_rows(d));
    CHECK(rows_of(D) == ref);
  }
}

TEST_CASE("two-by-two instance") {
  const auto D = GroupDistanceMatrix::from_values(2, 2, {1, 9, 8, 2});
  const auto a = hungarian_max(D);
  CHECK(a.targets == std::vector<ClassId>{1, 0});
  CHECK(assignment_objective(D, a.targets) == 17.0);
  CHECK(brute_force_assign(D) == a);
}

TEST_CASE("single group takes the row maximum") {
  const auto D = GroupDistanceMatrix::from_values(1, 3, {3, 7, 5});
  CHECK(hungarian_max(D).targets == std::vector<ClassId>{1});
}

TEST_CASE("dominant diagonal picks the identity") {
  const auto D = GroupDistanceMatrix::from_values(3, 3, {10, 1, 2, 3, 10, 1, 2, 3, 10});
  CHECK(hungarian_max(D).targets == std::vector<ClassId>{0, 1, 2});
  CHECK(brute_force_assign(D).targets == std::vector<ClassId>{0, 1, 2});
}

TEST_CASE("Hungarian agrees with exhaustive enumeration on random instances") {
  std::mt19937_64 gen(3);
  const auto start = std::chrono::steady_clock::now();
  for (int trial = 0; trial < 500; ++trial) {
    const std::uint32_t k = 1 + gen() % 8;
    const std::uint32_t x = 1 + gen() % k;
    const bool integer = trial % 2 == 0;
    const auto D = random_weights(gen, x, k, integer);
    const auto h = hungarian_max(D);
    const auto b = brute_force_assign(D);
    const double best = oracle::best_injection_value(rows_of(D));
    const double got = assignment_objective(D, h.targets);
    if (integer) {
      CHECK(got == best);
    } else {
      CHECK(std::fabs(got - best) <= 1e-9);
    }
    CHECK(h.targets == b.targets);
    CHECK(std::set<ClassId>(h.targets.begin(), h.targets.end()).size() == x);
  }
  CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(10));
}

TEST_CASE("heavy ties resolve to the lexicographically smallest optimum") {
  std::mt19937_64 gen(4);
  SUBCASE("all-equal weights") {
    for (std::uint32_t k = 1; k <= 7; ++k) {
      for (std::uint32_t x = 1; x <= k; ++x) {
        const auto D = GroupDistanceMatrix::from_values(x, k, std::vector<double>(x * k, 5.0));
        std::vector<ClassId> want(x);
        std::iota(want.begin(), want.end(), 0);
        CHECK(hungarian_max(D).targets == want);
        CHECK(brute_force_assign(D).targets == want);
      }
    }
  }
  SUBCASE("weights from a two-value set") {
    for (int trial = 0; trial < 300; ++trial) {
      const std::uint32_t k = 1 + gen() % 7;
      const std::uint32_t x = 1 + gen() % k;
      std::vector<double> v(x * k);
      for (auto& w : v) w = static_cast<double>(gen() % 2);
      const auto D = GroupDistanceMatrix::from_values(x, k, v);
      CHECK(hungarian_max(D).targets == brute_force_assign(D).targets);
    }
  }
}

TEST_CASE("optimum dominates random injections") {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 20; ++trial) {
    const std::uint32_t k = 2 + gen() % 30;
    const std::uint32_t x = 1 + gen() % k;
    const auto D = random_weights(gen, x, k, false);
    const double best = assignment_objective(D, hungarian_max(D).targets);
    std::vector<ClassId> cols(k);
    std::iota(cols.begin(), cols.end(), 0);
    for (int r = 0; r < 200; ++r) {
      std::shuffle(cols.begin(), cols.end(), gen);
      std::vector<ClassId> t(cols.begin(), cols.begin() + x);
      CHECK(best >= assignment_objective(D, t));
    }
  }
}

TEST_CASE("scaling the weights keeps the targets") {
  std::mt19937_64 gen(6);
  for (int trial = 0; trial < 100; ++trial) {
    const std::uint32_t k = 1 + gen() % 8;
    const std::uint32_t x = 1 + gen() % k;
    const bool integer = trial % 2 == 0;
    const auto D = random_weights(gen, x, k, integer);
    const auto base = hungarian_max(D).targets;
    for (double c : {1e-6, 0.3, 7.0, 1e6}) {
      auto v = D.values;
      for (auto& w : v) w *= c;
      CHECK(hungarian_max(GroupDistanceMatrix::from_values(x, k, v)).targets == base);
    }
  }
}

TEST_CASE("permuting rows permutes the answer when the optimum is unique") {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 100; ++trial) {
    const std::uint32_t k = 2 + gen() % 7;
    const std::uint32_t x = 1 + gen() % k;
    const auto D = random_weights(gen, x, k, false);
    const auto base = hungarian_max(D).targets;
    std::vector<std::size_t> perm(x);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), gen);
    std::vector<double> v(x * k);
    for (std::size_t i = 0; i < x; ++i)
      for (std::size_t c = 0; c < k; ++c) v[i * k + c] = D(perm[i], c);
    const auto moved = hungarian_max(GroupDistanceMatrix::from_values(x, k, v)).targets;
    for (std::size_t i = 0; i < x; ++i) CHECK(moved[i] == base[perm[i]]);
  }
}

TEST_CASE("forbidding self-targets") {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 200; ++trial) {
    const std::uint32_t k = 2 + gen() % 7;
    const std::uint32_t x = 1 + gen() % k;
    const auto d = distance_matrix(testing::random_points(gen, k, 3));
    std::vector<std::uint32_t> assign(k);
    for (std::uint32_t c = 0; c < k; ++c) assign[c] = c < x ? c : static_cast<std::uint32_t>(gen() % x);
    const auto g = Grouping::from_assign(x, assign);
    const auto D = group_distances(g, d);
    if (x == 1) {
      // The lone group owns every class.
      CHECK(kind_of([&] { hungarian_max(D, {.forbid_self_target = true}); }) ==
            ErrorKind::kInfeasible);
      continue;
    }
    const auto h = hungarian_max(D, {.forbid_self_target = true});
    const auto b = brute_force_assign(D, {.forbid_self_target = true});
    CHECK(h.targets == b.targets);
    std::vector<std::vector<bool>> mask(x, std::vector<bool>(k));
    for (std::size_t i = 0; i < x; ++i) {
      for (std::size_t c = 0; c < k; ++c) mask[i][c] = D.is_member(i, c);
      CHECK_FALSE(D.is_member(i, h.targets[i]));
    }
    CHECK(std::fabs(assignment_objective(D, h.targets) -
                    oracle::best_injection_value(rows_of(D), &mask)) <= 1e-9);
  }
}

TEST_CASE("bad shapes and guards") {
  CHECK(injection_count(10, 8) == 1'814'400);
  CHECK(injection_count(8, 8) == 40'320);
  CHECK(injection_count(12, 8) > kBruteForceLimit);

  const auto ok = GroupDistanceMatrix::from_values(8, 10, std::vector<double>(80, 1.0));
  CHECK_NOTHROW(brute_force_assign(ok));
  const auto big = GroupDistanceMatrix::from_values(8, 12, std::vector<double>(96, 1.0));
  CHECK(kind_of([&] { brute_force_assign(big); }) == ErrorKind::kGuard);
  CHECK_NOTHROW(hungarian_max(big));

  CHECK(kind_of([] { GroupDistanceMatrix::from_values(2, 3, {1, 2, 3}); }) ==
        ErrorKind::kValidation);
  CHECK(kind_of([] { hungarian_max(GroupDistanceMatrix::from_values(3, 2, {1, 2, 3, 4, 5, 6})); }) ==
        ErrorKind::kParameter);
}

TEST_CASE("square solver returns an optimal, dual-feasible answer") {
  std::mt19937_64 gen(9);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + gen() % 7;
    std::vector<double> cost(n * n);
    for (auto& c : cost) c = static_cast<double>(gen() % 50) - 10.0;
    const auto s = solve_min_cost_square(n, cost);

    std::vector<std::vector<double>> neg(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) neg[i][j] = -cost[i * n + j];
    CHECK(s.cost == -oracle::best_injection_value(neg));

    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      total += cost[i * n + s.row_to_col[i]];
      for (std::size_t j = 0; j < n; ++j) {
        CHECK(s.row_potential[i] + s.col_potential[j] <= cost[i * n + j] + 1e-9);
      }
      CHECK(s.row_potential[i] + s.col_potential[s.row_to_col[i]] ==
            doctest::Approx(cost[i * n + s.row_to_col[i]]));
    }
    CHECK(total == s.cost);
  }
}

TEST_CASE("large instance stays injective and beats a greedy answer") {
  std::mt19937_64 gen(10);
  const auto D = random_weights(gen, 150, 200, false);
  const auto h = hungarian_max(D);
  CHECK(std::set<ClassId>(h.targets.begin(), h.targets.end()).size() == 150);

  std::vector<bool> used(200, false);
  double greedy = 0.0;
  for (std::size_t i = 0; i < 150; ++i) {
    std::size_t best = 200;
    for (std::size_t c = 0; c < 200; ++c)
      if (!used[c] && (best == 200 || D(i, c) > D(i, best))) best = c;
    used[best] = true;
    greedy += D(i, best);
  }
  CHECK(assignment_objective(D, h.targets) >= greedy);
}
