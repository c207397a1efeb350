#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace evtspd;
using testkit::near;

TEST(Oracle, SingleCustomer) {
  auto P = testkit::prepare(generate_instance(11, 1, 1, {}));
  const OracleResult o = brute_force(P->inst, P->g, P->cat);
  ASSERT_TRUE(o.feasible);
  EXPECT_NEAR(o.cost, P->inst.c_T(0, 1) + P->inst.c_T(1, 0), 1e-9);
  EXPECT_TRUE(o.route.sorties.empty());
}

TEST(Oracle, TruckOnlyMatchesPermutationSearch) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Params p;
    p.truck_capacity = 1e6;
    p.incompatible = {1, 2, 3, 4};
    auto P = testkit::prepare(generate_instance(seed, 4, 1, p));
    std::vector<int> perm = P->inst.customers;
    double best = std::numeric_limits<double>::infinity();
    do {
      double t = P->inst.c_T(0, perm.front()) + P->inst.c_T(perm.back(), 0);
      for (std::size_t k = 0; k + 1 < perm.size(); ++k) t += P->inst.c_T(perm[k], perm[k + 1]);
      best = std::min(best, t);
    } while (std::next_permutation(perm.begin(), perm.end()));
    const OracleResult o = brute_force(P->inst, P->g, P->cat);
    EXPECT_NEAR(o.cost, best, 1e-6);
  }
}

TEST(Oracle, PruningDoesNotChangeOptimum) {
  const char* flags[] = {"", "L", "RS", "T", "MW"};
  for (int f = 0; f < 5; ++f)
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      auto P = testkit::prepare(testkit::random_instance(10 * f + seed, 4, 2, testkit::variant(flags[f])));
      OracleOptions off;
      off.prune = false;
      const OracleResult a = brute_force(P->inst, P->g, P->cat);
      const OracleResult b = brute_force(P->inst, P->g, P->cat, off);
      EXPECT_EQ(a.feasible, b.feasible);
      EXPECT_TRUE(near(a.cost, b.cost, 1e-9)) << flags[f] << seed;
      EXPECT_LE(a.candidates, b.candidates);
    }
}

TEST(Oracle, RouteReproducesCost) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto P = testkit::prepare(testkit::random_instance(seed, 4, 2, testkit::variant(seed % 2 ? "LR" : "")));
    const OracleResult o = brute_force(P->inst, P->g, P->cat);
    if (!o.feasible) continue;
    const RouteEval ev = evaluate_route(P->inst, o.route);
    EXPECT_TRUE(ev.feasible);
    EXPECT_TRUE(check_cover(P->inst, o.route));
    EXPECT_NEAR(ev.total_time, o.cost, 1e-9);
    EXPECT_GT(o.truck_paths, 0);
  }
}

TEST(Oracle, RefusesLargeInstances) {
  auto P = testkit::prepare(generate_instance(1, 7, 1, {}));
  EXPECT_THROW(brute_force(P->inst, P->g, P->cat), std::invalid_argument);
}
