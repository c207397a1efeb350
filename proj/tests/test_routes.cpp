#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace evtspd;
using testkit::near;

namespace {

// Event-by-event replay written without the evaluator's position arrays.
struct Replay {
  double total = 0;
  std::vector<double> q_after_launch;  // per sortie
  std::vector<double> waits;
};

Replay replay(const Instance& inst, const CoordinatedRoute& r) {
  Replay out;
  double clock = 0, q = inst.params.truck_capacity;
  double launched_at = 0;
  const Sortie* flying = nullptr;
  for (std::size_t pos = 0; pos <= r.arcs.size(); ++pos) {
    for (const auto& s : r.sorties)
      if (s.retrieve_pos == pos && flying) {
        const double truck = clock - launched_at;
        out.waits.push_back(std::max(0.0, flying->time - truck));
        clock = launched_at + std::max(truck, flying->time);
        flying = nullptr;
      }
    for (const auto& s : r.sorties)
      if (s.launch_pos == pos) {
        q -= s.sortie.energy;
        out.q_after_launch.push_back(q);
        launched_at = clock;
        flying = &s.sortie;
      }
    if (pos < r.arcs.size()) {
      const MultiArc& a = r.arcs[pos];
      q = a.e_rem ? *a.e_rem : q - a.e_req;
      clock += a.time;
    }
  }
  out.total = clock;
  return out;
}

}  // namespace

TEST(Evaluate, SharedEnergyExample) {
  auto P = testkit::prepare(testkit::shared_energy_example());
  CoordinatedRoute r = testkit::path_route(P->g, {0, 1, 3, 4, 0});
  const Sortie* s = P->cat.find(1, 2, 4);
  ASSERT_NE(s, nullptr);
  EXPECT_DOUBLE_EQ(s->energy, 20.0);
  r.sorties.push_back({1, 3, *s});
  const RouteEval ev = evaluate_route(P->inst, r);
  ASSERT_TRUE(ev.feasible) << ev.reason;
  EXPECT_EQ(ev.q_arrival[1], 100.0);
  EXPECT_EQ(ev.q_departure[1], 80.0);
  EXPECT_EQ(ev.q_arrival[2], 50.0);
  EXPECT_EQ(ev.q_arrival[3], 25.0);
  EXPECT_EQ(ev.q_arrival[4], 5.0);
  EXPECT_TRUE(check_cover(P->inst, r));
}

TEST(Evaluate, DepotOnlyRoute) {
  auto P = testkit::prepare(generate_instance(1, 2, 1, {}));
  const RouteEval ev = evaluate_route(P->inst, CoordinatedRoute{});
  EXPECT_TRUE(ev.feasible);
  EXPECT_EQ(ev.total_time, 0.0);
}

TEST(Evaluate, SlowDroneMakesTruckWait) {
  auto P = testkit::prepare(testkit::shared_energy_example(1000));
  CoordinatedRoute r = testkit::path_route(P->g, {0, 1, 3, 0});
  const Sortie* s = P->cat.find(1, 2, 3);
  ASSERT_NE(s, nullptr);
  r.sorties.push_back({1, 2, *s});
  // Truck 1->3 takes 30 s; drone 1~2~3 takes 10 + 20.
  const RouteEval ev = evaluate_route(P->inst, r);
  ASSERT_TRUE(ev.feasible);
  EXPECT_DOUBLE_EQ(ev.waits[0], 0.0);
  EXPECT_DOUBLE_EQ(ev.truck_waits[0], 0.0);
  Instance slow = testkit::shared_energy_example(1000);
  slow.c_D(2, 3) = 60;
  compute_matrices(slow);
  auto Q = testkit::prepare(slow);
  CoordinatedRoute r2 = testkit::path_route(Q->g, {0, 1, 3, 0});
  r2.sorties.push_back({1, 2, *Q->cat.find(1, 2, 3)});
  const RouteEval ev2 = evaluate_route(Q->inst, r2);
  ASSERT_TRUE(ev2.feasible) << ev2.reason;
  EXPECT_DOUBLE_EQ(ev2.waits[0], 70.0 - 30.0);
  const Replay rp = replay(Q->inst, r2);
  EXPECT_DOUBLE_EQ(rp.waits[0], ev2.waits[0]);
  EXPECT_DOUBLE_EQ(rp.total, ev2.total_time);
}

TEST(Evaluate, StructuralErrors) {
  auto P = testkit::prepare(testkit::shared_energy_example());
  CoordinatedRoute r = testkit::path_route(P->g, {0, 1, 3, 4, 0});
  CoordinatedRoute dangling = r;
  dangling.sorties.push_back({2, 7, *P->cat.find(3, 2, 4)});
  EXPECT_EQ(evaluate_route(P->inst, dangling).violation, Violation::Structure);
  CoordinatedRoute overlap = r;
  overlap.sorties.push_back({1, 3, *P->cat.find(1, 2, 4)});
  overlap.sorties.push_back({2, 4, *P->cat.find(3, 2, 0)});
  const RouteEval ev = evaluate_route(P->inst, overlap);
  EXPECT_FALSE(ev.feasible);
  EXPECT_EQ(ev.violation, Violation::Structure);
  CoordinatedRoute wrong_anchor = r;
  wrong_anchor.sorties.push_back({1, 3, *P->cat.find(3, 2, 4)});
  EXPECT_EQ(evaluate_route(P->inst, wrong_anchor).violation, Violation::Structure);
  CoordinatedRoute broken = r;
  broken.arcs.erase(broken.arcs.begin() + 1);
  EXPECT_EQ(evaluate_route(P->inst, broken).violation, Violation::Structure);
}

TEST(Evaluate, EnergyViolationIsNotStructural) {
  auto P = testkit::prepare(testkit::shared_energy_example());
  CoordinatedRoute r = testkit::path_route(P->g, {0, 1, 3, 4, 0});
  r.sorties.push_back({1, 2, *P->cat.find(1, 2, 3)});  // 30 instead of 20 leaves 15 for the last 20 s arc
  const RouteEval ev = evaluate_route(P->inst, r);
  EXPECT_FALSE(ev.feasible);
  EXPECT_EQ(ev.violation, Violation::Energy);
  EXPECT_EQ(ev.violation_index, 2u * 3 + 1);  // arc leaving position 3
}

TEST(Cover, Examples) {
  auto P = testkit::prepare(testkit::shared_energy_example(1000));
  CoordinatedRoute r = testkit::path_route(P->g, {0, 1, 3, 4, 0});
  r.sorties.push_back({1, 3, *P->cat.find(1, 2, 4)});
  EXPECT_TRUE(check_cover(P->inst, r));
  CoordinatedRoute dup = testkit::path_route(P->g, {0, 1, 3, 1, 2, 4, 0});
  EXPECT_FALSE(check_cover(P->inst, dup));
  CoordinatedRoute both = testkit::path_route(P->g, {0, 1, 2, 3, 4, 0});
  both.sorties.push_back({0, 1, *P->cat.find(0, 2, 1)});
  EXPECT_FALSE(check_cover(P->inst, both));
  EXPECT_EQ(visit_counts(P->inst, both), (std::vector<int>{1, 2, 1, 1}));
}

TEST(Catalog, MatchesExhaustiveTriples) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Params p = testkit::variant(seed % 2 ? "" : "LW");
    Instance inst = testkit::random_instance(seed, 3, 1, p);
    const SortieCatalog cat = feasible_sorties(inst);
    std::size_t expect = 0, loops = 0;
    std::vector<int> c0{0};
    for (int c : inst.customers) c0.push_back(c);
    for (int i : c0)
      for (int j : inst.customers)
        for (int k : c0) {
          if (j == i || j == k) continue;
          const bool ok = trip_energy(inst, i, j, k) <= p.drone_capacity;
          if (i == k) {
            if (ok && p.loops) ++loops;
            EXPECT_EQ(cat.find(i, j, k), nullptr);
            EXPECT_EQ(cat.find_loop(i, j) != nullptr, ok && p.loops);
            continue;
          }
          EXPECT_EQ(cat.find(i, j, k) != nullptr, ok);
          if (ok) {
            ++expect;
            EXPECT_DOUBLE_EQ(cat.find(i, j, k)->time, inst.c_D(i, j) + inst.c_D(j, k));
          }
        }
    EXPECT_EQ(cat.sorties.size(), expect);
    EXPECT_EQ(cat.loops.size(), loops);
  }
}

TEST(Catalog, EnergyBoundaryIsInclusive) {
  Instance inst = testkit::shared_energy_example();
  inst.params.drone_capacity = 20.0;  // trip 1~2~4 costs exactly 20
  const SortieCatalog cat = feasible_sorties(inst);
  EXPECT_NE(cat.find(1, 2, 4), nullptr);
  EXPECT_EQ(cat.find(1, 2, 3), nullptr);  // 10 + 20
}

TEST(Catalog, IncompatibleCustomersExcluded) {
  Params p = testkit::variant("I");
  const SortieCatalog cat = feasible_sorties(generate_instance(4, 4, 2, p));
  for (const Sortie& s : cat.sorties) {
    EXPECT_NE(s.drone, 1);
    EXPECT_NE(s.drone, 3);
  }
}

TEST(Catalog, WeightModelHalvesEmptyReturn) {
  Instance inst = testkit::shared_energy_example();
  inst.params.weight_range = true;
  inst.weight[2] = 0;
  EXPECT_DOUBLE_EQ(trip_energy(inst, 1, 2, 4), 10.0 / 2 + 10.0 / 2);
  inst.weight[2] = inst.params.payload_capacity;
  EXPECT_DOUBLE_EQ(trip_energy(inst, 1, 2, 4), 10.0 + 10.0 / 2);
}

TEST(Properties, RandomRoutesAgreeWithReplayAndConserveEnergy) {
  int with_sorties = 0;
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    auto P = testkit::prepare(testkit::random_instance(seed, 5, 2, {}));
    std::mt19937_64 rng(seed);
    for (int rep = 0; rep < 10; ++rep) {
      const CoordinatedRoute r = testkit::random_route(*P, rng);
      if (r.arcs.empty()) continue;
      const RouteEval ev = evaluate_route(P->inst, r);
      ASSERT_NE(ev.violation, Violation::Structure) << ev.reason;
      const Replay rp = replay(P->inst, r);
      EXPECT_NEAR(rp.total, ev.total_time, 1e-6);
      with_sorties += !r.sorties.empty();
      // total = arc times + waits
      double sum = 0;
      for (const auto& a : r.arcs) sum += a.time;
      for (double w : ev.waits) sum += w;
      EXPECT_NEAR(sum, ev.total_time, 1e-6);
      for (std::size_t s = 0; s < r.sorties.size(); ++s) EXPECT_NEAR(ev.q_departure[r.sorties[s].launch_pos], rp.q_after_launch[s], 1e-9);
      // Prefix energy: Q minus arcs and sorties since the last refuel arc.
      for (std::size_t pos = 1; pos <= r.arcs.size(); ++pos) {
        double q = P->inst.params.truck_capacity;
        for (std::size_t h = 0; h < pos; ++h) {
          for (const auto& s : r.sorties)
            if (s.launch_pos == h) q -= s.sortie.energy;
          q = r.arcs[h].e_rem ? *r.arcs[h].e_rem : q - r.arcs[h].e_req;
        }
        EXPECT_NEAR(ev.q_arrival[pos], q, 1e-9);
      }
    }
  }
  EXPECT_GT(with_sorties, 50);
}

TEST(Properties, PlainTruckRouteCostsItsTraceTimes) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto P = testkit::prepare(generate_instance(seed, 5, 2, {}));
    std::vector<int> seq{0};
    for (int c : P->inst.customers) seq.push_back(c);
    seq.push_back(0);
    const CoordinatedRoute r = testkit::path_route(P->g, seq);
    double sum = 0;
    for (std::size_t h = 0; h + 1 < seq.size(); ++h) sum += P->inst.c_T(seq[h], seq[h + 1]);
    EXPECT_NEAR(evaluate_route(P->inst, r).total_time, sum, 1e-9);
  }
}

TEST(Properties, AddingSortieOnlyLowersEnergy) {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    auto P = testkit::prepare(generate_instance(seed, 5, 2, {}));
    std::mt19937_64 rng(seed * 7);
    const CoordinatedRoute r = testkit::random_route(*P, rng, 0.5);
    if (r.sorties.empty()) continue;
    CoordinatedRoute fewer = r;
    fewer.sorties.pop_back();
    const RouteEval a = evaluate_route(P->inst, fewer), b = evaluate_route(P->inst, r);
    for (std::size_t pos = 0; pos < a.q_arrival.size(); ++pos) {
      EXPECT_LE(b.q_arrival[pos], a.q_arrival[pos] + 1e-9);
      EXPECT_LE(b.q_departure[pos], a.q_departure[pos] + 1e-9);
    }
  }
}

TEST(Properties, ZeroMagnitudeVariantsMatchBase) {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    Params base;
    Params zero = testkit::variant("LR");
    zero.launch_time = zero.retrieve_time = zero.service_time = 0;
    auto A = testkit::prepare(generate_instance(seed, 5, 2, base));
    auto B = testkit::prepare(generate_instance(seed, 5, 2, zero));
    std::mt19937_64 rng(seed);
    const CoordinatedRoute r = testkit::random_route(*A, rng);
    const RouteEval ea = evaluate_route(A->inst, r), eb = evaluate_route(B->inst, r);
    EXPECT_EQ(ea.feasible, eb.feasible);
    EXPECT_DOUBLE_EQ(ea.total_time, eb.total_time);
  }
}

TEST(Properties, SurchargesAndLoops) {
  Instance inst = testkit::shared_energy_example(1000);
  inst.params.launch_retrieve = true;
  inst.params.loops = true;
  auto P = testkit::prepare(inst);
  CoordinatedRoute base = testkit::path_route(P->g, {0, 1, 3, 4, 0});
  const double t0 = evaluate_route(P->inst, base).total_time;
  CoordinatedRoute r = base;
  r.sorties.push_back({1, 3, *P->cat.find(1, 2, 4)});
  // Launch at a customer pays both surcharges; the truck leg 1->3->4 (55 s) outlasts the drone (20 s).
  EXPECT_DOUBLE_EQ(evaluate_route(P->inst, r).total_time, t0 + 100 + 20);
  CoordinatedRoute from_depot = testkit::path_route(P->g, {0, 1, 3, 4, 0});
  from_depot.sorties.push_back({0, 1, *P->cat.find(0, 2, 1)});
  const Sortie& s02 = from_depot.sorties[0].sortie;
  EXPECT_DOUBLE_EQ(evaluate_route(P->inst, from_depot).total_time, t0 - 50 + std::max(50.0, s02.time) + 20);
  CoordinatedRoute looped = base;
  const Sortie* lp = P->cat.find_loop(3, 2);
  ASSERT_NE(lp, nullptr);
  looped.loops.push_back({2, *lp});
  const RouteEval el = evaluate_route(P->inst, looped);
  EXPECT_DOUBLE_EQ(el.total_time, t0 + lp->time + 100 + 20);
  EXPECT_DOUBLE_EQ(el.q_departure[2], el.q_arrival[2] - lp->energy);
}
