#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "helpers.hpp"

using namespace evtspd;
using K = NodeKind;

namespace {

MultiArc refuel(double req, double rem, double time) {
  MultiArc a;
  a.p = 1;
  a.e_req = req;
  a.e_rem = rem;
  a.time = time;
  a.trace = {0, 9, 1};
  return a;
}

std::vector<std::vector<double>> square(std::size_t n, double v) {
  std::vector<std::vector<double>> m(n, std::vector<double>(n, v));
  for (std::size_t i = 0; i < n; ++i) m[i][i] = 0;
  return m;
}

}  // namespace

TEST(Eliminate, ArcJustOverCapacityRemoved) {
  Params p;
  p.truck_capacity = 1000;
  auto ct = square(3, 300);
  ct[0][1] = 1001;
  ct[1][0] = 1000;
  Instance inst = testkit::matrix_instance(p, {K::Depot, K::Customer, K::Station}, ct, square(3, 10));
  const ArcMask keep = eliminate_arcs(inst);
  EXPECT_FALSE(keep[0][1]);
  EXPECT_TRUE(keep[1][0]);  // equality is retained
}

TEST(Eliminate, GenerousBatteryKeepsEverything) {
  Params p;
  p.truck_capacity = 1000;
  Instance inst = testkit::matrix_instance(p, {K::Depot, K::Customer, K::Customer, K::Station}, square(4, 250), square(4, 10));
  const ArcMask keep = eliminate_arcs(inst);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) EXPECT_EQ(static_cast<bool>(keep[i][j]), i != j);
}

TEST(Eliminate, CustomerPairWithoutAnchoredCoverRemoved) {
  // Line depot - station - c1 - c2 far out: every anchor->c1->c2->anchor triple exceeds the battery.
  Params p;
  p.truck_capacity = 1000;
  const std::vector<std::vector<double>> ct{{0, 700, 800, 300}, {700, 0, 100, 400}, {800, 100, 0, 550}, {300, 400, 550, 0}};
  Instance inst = testkit::matrix_instance(p, {K::Depot, K::Customer, K::Customer, K::Station}, ct, square(4, 10));
  const ArcMask keep = eliminate_arcs(inst);
  // Independent check of the rule over all anchor pairs.
  for (int i : inst.customers)
    for (int j : inst.customers) {
      if (i == j) continue;
      bool some = false;
      for (int s : {0, 3})
        for (int t : {0, 3}) some = some || inst.e_T(s, i) + inst.e_T(i, j) + inst.e_T(j, t) <= 1000;
      EXPECT_EQ(static_cast<bool>(keep[i][j]), some);
    }
  EXPECT_FALSE(keep[1][2]);
  EXPECT_TRUE(keep[0][1]);
}

TEST(StationPaths, SingleStationHasNoPairs) {
  Instance inst = generate_instance(3, 3, 1, {});
  const StationPaths sp = cs_shortest_paths(inst);
  const int k = inst.stations[0];
  EXPECT_EQ(sp.path(k, k), std::vector<int>{k});
  for (int c : inst.customers) EXPECT_FALSE(sp.reachable(k, c));
}

TEST(StationPaths, DirectAndTwoHop) {
  Params p;
  p.truck_capacity = 5000;
  auto ct = square(4, 100);
  ct[1][3] = 1000;  // station 1 -> station 3 is slow directly
  Instance inst = testkit::matrix_instance(p, {K::Depot, K::Station, K::Station, K::Station}, ct, square(4, 10));
  const StationPaths sp = cs_shortest_paths(inst);
  EXPECT_EQ(sp.path(1, 2), (std::vector<int>{1, 2}));
  EXPECT_EQ(sp.path(1, 3), (std::vector<int>{1, 2, 3}));
  EXPECT_DOUBLE_EQ(sp.dist[1][3], 100 + 120 + 100 + 120);
  // Enumerate every simple path on the three stations as the oracle.
  for (int k : inst.stations)
    for (int l : inst.stations) {
      if (k == l) continue;
      double best = inst.c_T(k, l) + inst.dwell(k);
      for (int m : inst.stations)
        if (m != k && m != l) best = std::min(best, inst.c_T(k, m) + inst.dwell(k) + inst.c_T(m, l) + inst.dwell(m));
      EXPECT_DOUBLE_EQ(sp.dist[k][l], best);
    }
}

TEST(Enumerate, NoStationInRangeGivesDirectOnly) {
  Params p;
  p.truck_capacity = 500;
  auto ct = square(3, 100);
  ct[0][2] = ct[2][0] = ct[1][2] = ct[2][1] = 900;
  Instance inst = testkit::matrix_instance(p, {K::Depot, K::Customer, K::Station}, ct, square(3, 10));
  const auto c = enumerate_refuel_paths(inst, eliminate_arcs(inst), cs_shortest_paths(inst), 0, 1);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].trace, (std::vector<int>{0, 1}));
}

TEST(Enumerate, OneStationGivesDirectAndDetour) {
  Params p;
  p.truck_capacity = 1000;
  Instance inst = testkit::matrix_instance(p, {K::Depot, K::Customer, K::Station}, square(3, 200), square(3, 10));
  const auto c = enumerate_refuel_paths(inst, eliminate_arcs(inst), cs_shortest_paths(inst), 0, 1);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[0].trace, (std::vector<int>{0, 1}));
  EXPECT_EQ(c[1].trace, (std::vector<int>{0, 2, 1}));
  EXPECT_DOUBLE_EQ(c[1].time, 200 + 120 + 200);
  EXPECT_DOUBLE_EQ(c[1].e_req, 200);
  EXPECT_DOUBLE_EQ(*c[1].e_rem, 800);
  EXPECT_FALSE(c[0].e_rem.has_value());
}

TEST(Enumerate, StationPairPathTime) {
  Params p;
  p.truck_capacity = 1000;
  auto ct = square(4, 300);
  ct[2][3] = 50;
  Instance inst = testkit::matrix_instance(p, {K::Depot, K::Customer, K::Station, K::Station}, ct, square(4, 10));
  const auto c = enumerate_refuel_paths(inst, eliminate_arcs(inst), cs_shortest_paths(inst), 0, 1);
  auto it = std::find_if(c.begin(), c.end(), [](const MultiArc& a) { return a.trace == std::vector<int>{0, 2, 3, 1}; });
  ASSERT_NE(it, c.end());
  EXPECT_DOUBLE_EQ(it->time, inst.c_T(0, 2) + inst.c_T(2, 3) + inst.c_T(3, 1) + 2 * 120.0);
}

TEST(Dominance, Examples) {
  EXPECT_FALSE(dominates(refuel(10, 90, 100), refuel(10, 90, 100)));
  EXPECT_TRUE(dominates(refuel(10, 90, 100), refuel(10, 90, 120)));
  EXPECT_FALSE(dominates(refuel(10, 80, 100), refuel(12, 90, 100)));
  MultiArc direct;
  EXPECT_THROW(dominates(direct, refuel(1, 1, 1)), std::logic_error);
}

TEST(Dominance, FilterKeepsTiesAndDirect) {
  MultiArc direct;
  direct.time = 1e9;
  direct.e_req = 1e9;
  direct.trace = {0, 1};
  const auto kept = pareto_filter({direct, refuel(10, 90, 120), refuel(10, 90, 100), refuel(10, 90, 100), refuel(5, 50, 300)});
  ASSERT_EQ(kept.size(), 4u);
  EXPECT_TRUE(kept[0].direct());
}

TEST(Build, NoStationsMeansDirectArcsOnly) {
  Params p;
  Instance inst = make_instance(p, {{0, K::Depot, 0, 0}, {1, K::Customer, 3, 4}, {2, K::Customer, -2, 1}});
  const MultiGraph g = build_multigraph(inst);
  const ArcMask keep = eliminate_arcs(inst);
  for (int i : g.nodes)
    for (int j : g.nodes) {
      if (i == j) continue;
      ASSERT_EQ(g.bucket(i, j).size(), keep[i][j] ? 1u : 0u);
      if (keep[i][j]) EXPECT_TRUE(g.bucket(i, j)[0].direct());
    }
  EXPECT_EQ(g.stats.refuel_kept, 0);
}

TEST(Build, DirectPlusOneRefuelArc) {
  Params p;
  p.truck_capacity = 1000;
  Instance inst = testkit::matrix_instance(p, {K::Depot, K::Customer, K::Station}, square(3, 400), square(3, 10));
  const MultiGraph g = build_multigraph(inst);
  const auto& b = g.bucket(0, 1);
  ASSERT_EQ(b.size(), 2u);
  EXPECT_EQ(b[0].p, 0);
  EXPECT_EQ(b[1].p, 1);
  EXPECT_EQ(b[1].trace, (std::vector<int>{0, 2, 1}));
  EXPECT_DOUBLE_EQ(b[1].e_req, 400);
  EXPECT_DOUBLE_EQ(*b[1].e_rem, 600);
  EXPECT_DOUBLE_EQ(b[1].time, 920);
  EXPECT_EQ(g.find(0, 1, 1), &b[1]);
  EXPECT_EQ(g.find(0, 1, 2), nullptr);
}

TEST(Build, DominatedPathAbsent) {
  // Two stations offering the same energies; station 3 is slower, so its detour is dominated.
  Params p;
  p.truck_capacity = 1000;
  p.charge_time = 0;
  auto ct = square(4, 400);
  ct[0][2] = 300;
  Instance inst = testkit::matrix_instance(p, {K::Depot, K::Customer, K::Station, K::Station}, ct, square(4, 10));
  const MultiGraph g = build_multigraph(inst);
  for (const MultiArc& a : g.bucket(0, 1)) EXPECT_NE(a.trace, (std::vector<int>{0, 3, 1}));
  const auto cands = enumerate_refuel_paths(inst, eliminate_arcs(inst), cs_shortest_paths(inst), 0, 1);
  EXPECT_EQ(testkit::traces(g.bucket(0, 1)), testkit::traces(testkit::brute_pareto(cands)));
}

TEST(Build, ParetoSoundnessTraceConsistencyAndBound) {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    Params p;
    p.truck_capacity = seed % 2 ? 4000 : 9000;
    const int s = 2 + static_cast<int>(seed % 3);
    Instance inst = generate_instance(seed, 4, s, p);
    const MultiGraph g = build_multigraph(inst);
    const ArcMask keep = eliminate_arcs(inst);
    const StationPaths sp = cs_shortest_paths(inst);
    for (int i : g.nodes)
      for (int j : g.nodes) {
        if (i == j) continue;
        const auto& b = g.bucket(i, j);
        EXPECT_EQ(testkit::traces(b), testkit::traces(testkit::brute_pareto(enumerate_refuel_paths(inst, keep, sp, i, j))));
        std::set<int> ps;
        for (const MultiArc& a : b) {
          EXPECT_TRUE(ps.insert(a.p).second);
          EXPECT_EQ(a.p == 0, a.trace.size() == 2);
          EXPECT_EQ(a.p == 0, !a.e_rem.has_value());
          const MultiArc re = arc_from_trace(inst, a.trace, a.p);
          EXPECT_NEAR(re.time, a.time, 1e-9);
          EXPECT_NEAR(re.e_req, a.e_req, 1e-9);
          EXPECT_DOUBLE_EQ(a.e_req, inst.e_T(a.trace[0], a.trace[1]));
          EXPECT_GT(a.e_req, 0.0);
          EXPECT_LE(a.e_req, p.truck_capacity);
          if (a.e_rem) {
            EXPECT_NEAR(*re.e_rem, *a.e_rem, 1e-9);
            EXPECT_GE(*a.e_rem, 0.0);
            EXPECT_LE(*a.e_rem, p.truck_capacity);
          }
          for (std::size_t t = 1; t + 1 < a.trace.size(); ++t) EXPECT_TRUE(inst.is_station(a.trace[t]));
        }
        for (const MultiArc& a : b)
          for (const MultiArc& c : b)
            if (&a != &c && !a.direct() && !c.direct()) EXPECT_FALSE(dominates(a, c));
      }
    const double n = static_cast<double>(inst.customers.size());
    EXPECT_LE(static_cast<double>(g.arc_count()), (n + 1) * (n + 1) * s * s * g.max_station_path);
  }
}

TEST(Build, StatsLine) {
  Instance inst = generate_instance(11, 5, 3, {});
  const MultiGraph g = build_multigraph(inst);
  const std::string line = format_stats(g.stats);
  EXPECT_EQ(line.rfind("pairs=30 direct=", 0), 0u);
  EXPECT_EQ(g.stats.direct + g.stats.refuel_kept, static_cast<long>(g.arc_count()));
  EXPECT_NE(line.find(" ratio="), std::string::npos);
}
