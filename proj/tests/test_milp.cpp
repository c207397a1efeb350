#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace evtspd;
using testkit::near;

namespace {

std::size_t count_prefix(const LinearModel& m, const std::string& pre) {
  std::size_t k = 0;
  for (const Variable& v : m.vars) k += v.name.rfind(pre, 0) == 0;
  return k;
}

}  // namespace

TEST(ArcModel, LoopVariablesOnlyWhenEnabled) {
  Instance inst = generate_instance(3, 4, 2, {});
  auto off = testkit::prepare(inst);
  inst.params.loops = true;
  auto on = testkit::prepare(inst);
  const LinearModel a = build_arc_model(off->inst, off->g, off->cat);
  ArcModelInfo info;
  const LinearModel b = build_arc_model(on->inst, on->g, on->cat, &info);
  EXPECT_EQ(count_prefix(a, "z_"), 0u);
  EXPECT_EQ(count_prefix(b, "z_"), on->cat.loops.size());
  EXPECT_GT(info.loops, 0u);
  EXPECT_EQ(info.loops, on->cat.loops.size());
}

TEST(ArcModel, VariableCounts) {
  for (const char* f : {"", "L", "R", "LRW"}) {
    auto P = testkit::prepare(testkit::random_instance(7, 4, 2, testkit::variant(f)));
    ArcModelInfo info;
    const LinearModel m = build_arc_model(P->inst, P->g, P->cat, &info);
    std::size_t arcs = 0;
    for (int i : P->g.nodes)
      for (int j : P->g.nodes)
        if (i != j) arcs += P->g.bucket(i, j).size();
    const std::size_t n = P->inst.customers.size();
    EXPECT_EQ(info.truck_arcs, arcs);
    EXPECT_EQ(count_prefix(m, "xT_"), arcs);
    EXPECT_EQ(count_prefix(m, "xD_"), info.drone_arcs);
    EXPECT_EQ(info.sorties, P->cat.sorties.size());
    EXPECT_EQ(count_prefix(m, "y_"), info.sorties);
    EXPECT_EQ(count_prefix(m, "l_"), P->inst.params.launch_retrieve ? n : 0u);
    std::size_t binaries = 0;
    for (const Variable& v : m.vars) binaries += v.kind == VarKind::Binary;
    EXPECT_EQ(binaries, info.truck_arcs + info.drone_arcs + info.sorties + info.loops + 3 * n + (P->inst.params.launch_retrieve ? n : 0));
    EXPECT_TRUE(m.warnings.empty()) << f;
    EXPECT_GE(m.big_m, 2 * P->inst.params.truck_capacity);
  }
}

TEST(ArcModel, OptimalRoutesSatisfyEveryRow) {
  const char* flags[] = {"", "L", "R", "S", "W", "LRS"};
  for (int f = 0; f < 6; ++f)
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      auto P = testkit::prepare(testkit::random_instance(50 * f + seed, 4, 2, testkit::variant(flags[f])));
      const OracleResult o = brute_force(P->inst, P->g, P->cat);
      if (!o.feasible) continue;
      const LinearModel m = build_arc_model(P->inst, P->g, P->cat);
      const std::vector<double> x = route_assignment(P->inst, m, o.route);
      std::string worst;
      EXPECT_LE(max_violation(m, x, &worst), 1e-6) << flags[f] << seed << " " << worst << "\n" << format_route(P->inst, o.route, evaluate_route(P->inst, o.route));
      EXPECT_NEAR(objective_value(m, x), o.cost, 1e-6) << flags[f] << seed;
    }
}

TEST(ArcModel, RandomFeasibleRoutesSatisfyEveryRow) {
  std::mt19937_64 rng(3);
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    auto P = testkit::prepare(testkit::random_instance(seed, 6, 2, testkit::variant(seed % 2 ? "RS" : "W")));
    const LinearModel m = build_arc_model(P->inst, P->g, P->cat);
    for (int t = 0; t < 30; ++t) {
      const CoordinatedRoute r = testkit::random_route(*P, rng);
      if (!check_cover(P->inst, r)) continue;
      const RouteEval ev = evaluate_route(P->inst, r);
      if (!ev.feasible) continue;
      const std::vector<double> x = route_assignment(P->inst, m, r);
      std::string worst;
      EXPECT_LE(max_violation(m, x, &worst), 1e-6) << worst;
      EXPECT_NEAR(objective_value(m, x), ev.total_time, 1e-6);
      ++checked;
    }
  }
  EXPECT_GT(checked, 30);
}

TEST(LpFormat, EmptyModel) {
  const std::string s = emit_lp(LinearModel{});
  EXPECT_NE(s.find("Minimize\n obj:\n"), std::string::npos);
  EXPECT_NE(s.find("Subject To\n"), std::string::npos);
  EXPECT_EQ(s.substr(s.size() - 4), "End\n");
}

TEST(LpFormat, CanonicalRow) {
  LinearModel m;
  const int x = m.add_var("x", VarKind::Binary, 0, 1);
  const int y = m.add_var("y", VarKind::Continuous, 0, 4);
  m.add_objective(x, 1);
  m.add_objective(y, -0.5);
  m.add_row("c1", {{x, 1}, {y, 2}}, RowSense::LE, 3);
  m.add_row("c2", {{x, 1}, {x, 1}, {y, -1}}, RowSense::EQ, 0);
  const std::string s = emit_lp(m);
  EXPECT_NE(s.find(" obj: x - 0.5 y\n"), std::string::npos) << s;
  EXPECT_NE(s.find(" c1: x + 2 y <= 3\n"), std::string::npos) << s;
  EXPECT_NE(s.find(" c2: 2 x - y = 0\n"), std::string::npos) << s;
  EXPECT_NE(s.find(" 0 <= y <= 4\n"), std::string::npos) << s;
  EXPECT_NE(s.find("Binaries\n x\n"), std::string::npos) << s;
  EXPECT_EQ(s, emit_lp(m));
}

TEST(LpFormat, Names) {
  EXPECT_EQ(sanitize_lp_name("ok_name"), "ok_name");
  EXPECT_EQ(sanitize_lp_name("a b"), "a_b");
  EXPECT_EQ(sanitize_lp_name("1abc"), "n_1abc");
  EXPECT_EQ(sanitize_lp_name("e1"), "n_e1");
  EXPECT_EQ(sanitize_lp_name(""), "n_");
  EXPECT_EQ(sanitize_lp_name(std::string(300, 'a')).size(), 255u);
  LinearModel m;
  m.add_var("a b", VarKind::Binary, 0, 1);
  m.add_var("a_b", VarKind::Binary, 0, 1);
  const std::string s = emit_lp(m);
  EXPECT_NE(s.find("\\ name a b -> a_b\n"), std::string::npos) << s;
  EXPECT_NE(s.find("\\ name a_b -> a_b_1\n"), std::string::npos) << s;
}

TEST(LpFormat, RoundTripOfArcModels) {
  for (const char* f : {"", "LR", "W"}) {
    auto P = testkit::prepare(testkit::random_instance(4, 4, 2, testkit::variant(f)));
    const LinearModel m = build_arc_model(P->inst, P->g, P->cat);
    const std::string text = emit_lp(m);
    EXPECT_EQ(text, emit_lp(build_arc_model(P->inst, P->g, P->cat)));
    const LinearModel back = reorder_like(parse_lp(text), m);
    EXPECT_TRUE(back.same_as(m)) << f;
  }
}
