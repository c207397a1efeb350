#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "core.hpp"
#include "multigraph.hpp"
#include "routes.hpp"

namespace evtspd {

enum class VarKind { Binary, Continuous };
enum class RowSense { LE, GE, EQ };

struct Variable {
  std::string name;
  VarKind kind = VarKind::Continuous;
  double lb = 0.0;
  double ub = 1.0;
  bool operator==(const Variable&) const = default;
};

struct Term {
  int var = 0;
  double coef = 0.0;
  bool operator==(const Term&) const = default;
};

struct Row {
  std::string name;
  std::vector<Term> terms;
  RowSense sense = RowSense::LE;
  double rhs = 0.0;
  bool operator==(const Row&) const = default;
};

class LinearModel {
 public:
  bool minimize = true;
  std::vector<Variable> vars;
  std::vector<Term> objective;
  std::vector<Row> rows;
  std::vector<std::string> warnings;
  double big_m = 0.0;

  int add_var(const std::string& name, VarKind kind, double lb, double ub) {
    if (index_.count(name)) throw std::logic_error("duplicate variable " + name);
    index_[name] = static_cast<int>(vars.size());
    vars.push_back({name, kind, lb, ub});
    return static_cast<int>(vars.size()) - 1;
  }
  int var(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? -1 : it->second;
  }
  bool has(const std::string& name) const { return index_.count(name) > 0; }
  // Merges repeated variables; drops zero coefficients.
  void add_row(const std::string& name, std::vector<Term> terms, RowSense sense, double rhs) {
    if (row_names_.count(name)) throw std::logic_error("duplicate row " + name);
    row_names_.insert(name);
    std::vector<Term> merged;
    for (const Term& t : terms) {
      if (t.var < 0 || t.var >= static_cast<int>(vars.size())) throw std::logic_error("row " + name + " references an undeclared variable");
      auto it = std::find_if(merged.begin(), merged.end(), [&](const Term& m) { return m.var == t.var; });
      if (it == merged.end()) merged.push_back(t);
      else it->coef += t.coef;
    }
    std::erase_if(merged, [](const Term& t) { return t.coef == 0.0; });
    rows.push_back({name, std::move(merged), sense, rhs});
  }
  void add_objective(int v, double c) {
    if (c == 0.0) return;
    for (Term& t : objective)
      if (t.var == v) {
        t.coef += c;
        return;
      }
    objective.push_back({v, c});
  }
  // Structural equality (names, bounds, kinds, rows, objective).
  bool same_as(const LinearModel& o) const {
    return minimize == o.minimize && vars == o.vars && objective == o.objective && rows == o.rows;
  }

 private:
  std::unordered_map<std::string, int> index_;
  std::set<std::string> row_names_;
};

namespace detail {

inline std::string lp_num(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

// Node label inside variable names; the depot splits into start "0" and end "E".
inline std::string node_tag(const Instance& inst, int v, bool end) {
  if (v == inst.depot) return end ? "E" : "0";
  return std::to_string(v);
}

}  // namespace detail

struct ArcModelInfo {
  std::size_t truck_arcs = 0;
  std::size_t drone_arcs = 0;
  std::size_t sorties = 0;
  std::size_t loops = 0;
};

// Arc-based formulation over the multigraph. Times exclude launch/retrieve surcharges and loop
// durations; those enter the objective because they shift everything after them uniformly.
inline LinearModel build_arc_model(const Instance& inst, const MultiGraph& g, const SortieCatalog& cat, ArcModelInfo* info = nullptr) {
  using detail::node_tag;
  const Params& P = inst.params;
  const int depot = inst.depot;
  const auto& C = inst.customers;
  LinearModel m;
  ArcModelInfo inf;

  double H = 0.0;
  for (int i : g.nodes)
    for (int j : g.nodes)
      if (i != j)
        for (const MultiArc& a : g.bucket(i, j)) H += a.time;
  std::vector<double> slowest(inst.size(), 0.0);
  for (int i : g.nodes)
    for (int j : C)
      if (i != j) slowest[j] = std::max(slowest[j], inst.dwell(i) + inst.c_D(i, j) + inst.dwell(j) + inst.c_D(j, depot));
  for (int j : C)
    for (int k : g.nodes)
      if (k != j) slowest[j] = std::max(slowest[j], inst.dwell(j) + inst.c_D(j, k));
  for (double v : slowest) H += v;
  for (const Sortie& s : cat.loops) H += s.time;
  H += static_cast<double>(C.size()) * (P.launch_time + P.retrieve_time);
  const double M = std::max(2.0 * H, 2.0 * P.truck_capacity);
  m.big_m = M;

  auto xt = [&](int i, int j, int p) { return "xT_" + node_tag(inst, i, false) + "_" + node_tag(inst, j, true) + "_" + std::to_string(p); };
  auto xd = [&](int i, int j, int p) { return "xD_" + node_tag(inst, i, false) + "_" + node_tag(inst, j, true) + "_" + std::to_string(p); };
  auto nm = [&](const char* pre, int v, bool end) { return std::string(pre) + node_tag(inst, v, end); };

  // Drone arc time: dwell at the tail plus flight, or the truck's time when riding a refuel path.
  struct DArc {
    int i, j, p, var;
    double time;
  };
  struct TArc {
    int i, j, p, var;
    const MultiArc* arc;
  };
  std::vector<TArc> tarcs;
  std::vector<DArc> darcs;
  for (int i : g.nodes)
    for (int j : g.nodes) {
      if (i == j) continue;
      for (const MultiArc& a : g.bucket(i, j)) tarcs.push_back({i, j, a.p, m.add_var(xt(i, j, a.p), VarKind::Binary, 0, 1), &a});
    }
  for (int i : g.nodes)
    for (int j : g.nodes) {
      if (i == j || (i == depot && j == depot)) continue;
      darcs.push_back({i, j, 0, m.add_var(xd(i, j, 0), VarKind::Binary, 0, 1), inst.dwell(i) + inst.c_D(i, j)});
      for (const MultiArc& a : g.bucket(i, j))
        if (!a.direct()) darcs.push_back({i, j, a.p, m.add_var(xd(i, j, a.p), VarKind::Binary, 0, 1), a.time});
    }
  struct YS {
    const Sortie* s;
    int var;
  };
  std::vector<YS> ys;
  for (const Sortie& s : cat.sorties)
    ys.push_back({&s, m.add_var("y_" + node_tag(inst, s.launch, false) + "_" + std::to_string(s.drone) + "_" + node_tag(inst, s.retrieve, true),
                                VarKind::Binary, 0, 1)});
  for (int i : C) {
    m.add_var(nm("yT_", i, false), VarKind::Binary, 0, 1);
    m.add_var(nm("yD_", i, false), VarKind::Binary, 0, 1);
    m.add_var(nm("yC_", i, false), VarKind::Binary, 0, 1);
  }
  m.add_var("t_0", VarKind::Continuous, 0, 0);
  for (int i : C) m.add_var(nm("t_", i, false), VarKind::Continuous, 0, M);
  m.add_var("t_E", VarKind::Continuous, 0, M);
  const double Q = P.truck_capacity;
  for (int i : g.nodes) {
    m.add_var(nm("ba1_", i, false), VarKind::Continuous, 0, Q);
    m.add_var(nm("ba2_", i, false), VarKind::Continuous, 0, Q);
    m.add_var(nm("bd_", i, false), VarKind::Continuous, 0, Q);
  }
  m.add_var("ba1_E", VarKind::Continuous, 0, Q);
  m.add_var("ba2_E", VarKind::Continuous, 0, Q);
  struct ZS {
    const Sortie* s;
    int var;
  };
  std::vector<ZS> zs;
  if (P.loops)
    for (const Sortie& s : cat.loops) zs.push_back({&s, m.add_var("z_" + node_tag(inst, s.launch, false) + "_" + std::to_string(s.drone), VarKind::Binary, 0, 1)});
  if (P.launch_retrieve)
    for (int i : C) m.add_var(nm("l_", i, false), VarKind::Binary, 0, 1);

  auto V = [&](const std::string& s) {
    const int k = m.var(s);
    if (k < 0) throw std::logic_error("missing variable " + s);
    return k;
  };
  auto in_tag = [&](int v) { return node_tag(inst, v, true); };

  // Truck flow and visit.
  for (int i : C) {
    std::vector<Term> bal, vis;
    for (const TArc& a : tarcs) {
      if (a.i == i) bal.push_back({a.var, 1}), vis.push_back({a.var, 1});
      if (a.j == i) bal.push_back({a.var, -1});
    }
    m.add_row("truck_flow_" + std::to_string(i), bal, RowSense::EQ, 0);
    vis.push_back({V(nm("yT_", i, false)), -1});
    vis.push_back({V(nm("yC_", i, false)), -1});
    m.add_row("truck_visit_" + std::to_string(i), vis, RowSense::EQ, 0);
  }
  {
    std::vector<Term> out, in;
    for (const TArc& a : tarcs) {
      if (a.i == depot) out.push_back({a.var, 1});
      if (a.j == depot) in.push_back({a.var, 1});
    }
    m.add_row("truck_start", out, RowSense::EQ, 1);
    m.add_row("truck_end", in, RowSense::EQ, 1);
  }
  // Drone flow and visit.
  for (int i : C) {
    std::vector<Term> bal, vis;
    for (const DArc& a : darcs) {
      if (a.i == i) bal.push_back({a.var, 1}), vis.push_back({a.var, 1});
      if (a.j == i) bal.push_back({a.var, -1});
    }
    m.add_row("drone_flow_" + std::to_string(i), bal, RowSense::EQ, 0);
    vis.push_back({V(nm("yD_", i, false)), -1});
    vis.push_back({V(nm("yC_", i, false)), -1});
    m.add_row("drone_visit_" + std::to_string(i), vis, RowSense::EQ, 0);
  }
  {
    std::vector<Term> out, in;
    for (const DArc& a : darcs) {
      if (a.i == depot) out.push_back({a.var, 1});
      if (a.j == depot) in.push_back({a.var, 1});
    }
    m.add_row("drone_start", out, RowSense::EQ, 1);
    m.add_row("drone_end", in, RowSense::EQ, 1);
  }
  for (int i : C) {
    std::vector<Term> t{{V(nm("yT_", i, false)), 1}, {V(nm("yD_", i, false)), 1}, {V(nm("yC_", i, false)), 1}};
    for (const ZS& z : zs)
      if (z.s->drone == i) t.push_back({z.var, 1});
    m.add_row("assign_" + std::to_string(i), t, RowSense::EQ, 1);
  }
  // Timing.
  for (const TArc& a : tarcs)
    m.add_row("tsync_" + std::to_string(a.i) + "_" + in_tag(a.j) + "_" + std::to_string(a.p),
              {{V(nm("t_", a.i, false)), 1}, {V(nm("t_", a.j, true)), -1}, {a.var, M}}, RowSense::LE, M - a.arc->time);
  for (const DArc& a : darcs)
    m.add_row("dsync_" + std::to_string(a.i) + "_" + in_tag(a.j) + "_" + std::to_string(a.p),
              {{V(nm("t_", a.i, false)), 1}, {V(nm("t_", a.j, true)), -1}, {a.var, M}}, RowSense::LE, M - a.time);
  // Drone arcs touch a combined node; rows with a depot endpoint are vacuous and skipped.
  for (const DArc& a : darcs) {
    if (a.i == depot || a.j == depot) continue;
    m.add_row("drone_arc_" + std::to_string(a.i) + "_" + std::to_string(a.j) + "_" + std::to_string(a.p),
              {{a.var, 1}, {V(nm("yC_", a.i, false)), -1}, {V(nm("yC_", a.j, false)), -1}}, RowSense::LE, 0);
  }
  // No sortie from the depot straight back to the depot; a combined customer may sit on both arcs.
  for (int i : C) {
    std::vector<Term> t;
    for (const DArc& a : darcs)
      if ((a.i == depot && a.j == i) || (a.i == i && a.j == depot)) t.push_back({a.var, 1});
    t.push_back({V(nm("yC_", i, false)), -1});
    m.add_row("no_depot_sortie_" + std::to_string(i), t, RowSense::LE, 1);
  }
  // Energy.
  for (const TArc& a : tarcs) {
    const std::string tag = std::to_string(a.i) + "_" + in_tag(a.j) + "_" + std::to_string(a.p);
    m.add_row("b_arc_" + tag, {{V(nm("ba1_", a.j, true)), 1}, {V(nm("bd_", a.i, false)), -1}, {a.var, M}}, RowSense::LE, M - a.arc->e_req);
    if (!a.arc->direct()) m.add_row("b_refuel_" + tag, {{V(nm("ba2_", a.j, true)), 1}, {a.var, M}}, RowSense::LE, M + *a.arc->e_rem);
    else m.add_row("b_direct_" + tag, {{V(nm("ba2_", a.j, true)), 1}, {V(nm("ba1_", a.j, true)), -1}, {a.var, M}}, RowSense::LE, M);
  }
  m.add_row("b_start_1", {{V("ba1_0"), 1}}, RowSense::EQ, Q);
  m.add_row("b_start_2", {{V("ba2_0"), 1}}, RowSense::EQ, Q);
  for (int i : g.nodes) {
    std::vector<Term> t{{V(nm("bd_", i, false)), 1}, {V(nm("ba2_", i, false)), -1}};
    for (const YS& y : ys)
      if (y.s->launch == i) t.push_back({y.var, y.s->energy});
    for (const ZS& z : zs)
      if (z.s->launch == i) t.push_back({z.var, z.s->energy});
    m.add_row("shared_" + node_tag(inst, i, false), t, RowSense::LE, 0);
  }
  // Sortie coordination.
  for (int i : g.nodes) {
    std::vector<Term> t;
    for (const YS& y : ys)
      if (y.s->launch == i) t.push_back({y.var, 1});
    if (i == depot) m.add_row("launch_once_0", t, RowSense::LE, 1);
    else {
      t.push_back({V(nm("yC_", i, false)), -1});
      m.add_row("launch_once_" + std::to_string(i), t, RowSense::LE, 0);
    }
  }
  for (int j : C) {
    std::vector<Term> t;
    for (const YS& y : ys)
      if (y.s->drone == j) t.push_back({y.var, 1});
    t.push_back({V(nm("yD_", j, false)), -1});
    m.add_row("drone_served_" + std::to_string(j), t, RowSense::EQ, 0);
  }
  for (int k : g.nodes) {
    std::vector<Term> t;
    for (const YS& y : ys)
      if (y.s->retrieve == k) t.push_back({y.var, 1});
    if (k == depot) m.add_row("retrieve_once_E", t, RowSense::LE, 1);
    else {
      t.push_back({V(nm("yC_", k, false)), -1});
      m.add_row("retrieve_once_" + std::to_string(k), t, RowSense::LE, 0);
    }
  }
  for (const YS& y : ys) {
    const Sortie& s = *y.s;
    m.add_row("legs_" + node_tag(inst, s.launch, false) + "_" + std::to_string(s.drone) + "_" + in_tag(s.retrieve),
              {{V(xd(s.launch, s.drone, 0)), 1}, {V(xd(s.drone, s.retrieve, 0)), 1}, {y.var, -2}}, RowSense::GE, 0);
  }
  for (const ZS& z : zs)
    if (z.s->launch != depot)
      m.add_row("loop_anchor_" + std::to_string(z.s->launch) + "_" + std::to_string(z.s->drone), {{z.var, 1}, {V(nm("yC_", z.s->launch, false)), -1}},
                RowSense::LE, 0);
  for (int i : P.incompatible)
    if (inst.customer_index(i) >= 0) m.add_row("incompatible_" + std::to_string(i), {{V(nm("yD_", i, false)), 1}}, RowSense::EQ, 0);
  if (P.launch_retrieve)
    for (int i : C)
      m.add_row("launch_cost_" + std::to_string(i), {{V(nm("l_", i, false)), 1}, {V(nm("yD_", i, false)), -1}, {V(xd(depot, i, 0)), 1}}, RowSense::GE, 0);

  // Objective.
  m.add_objective(V("t_E"), 1.0);
  for (const ZS& z : zs) {
    double c = z.s->time;
    if (P.launch_retrieve) c += P.retrieve_time + (z.s->launch == depot ? 0.0 : P.launch_time);
    m.add_objective(z.var, c);
  }
  if (P.launch_retrieve)
    for (int i : C) {
      m.add_objective(V(nm("l_", i, false)), P.launch_time);
      m.add_objective(V(nm("yD_", i, false)), P.retrieve_time);
    }

  for (int i : C) {
    bool in = false, out = false, fly = false;
    for (const TArc& a : tarcs) {
      if (a.j == i) in = true;
      if (a.i == i) out = true;
    }
    for (const YS& y : ys)
      if (y.s->drone == i) fly = true;
    for (const ZS& z : zs)
      if (z.s->drone == i) fly = true;
    if (!(in && out) && !fly) m.warnings.push_back("customer " + std::to_string(i) + " is unreachable; model is infeasible");
  }
  if (inst.params.max_leg > 0) m.warnings.push_back("max_leg is not modeled; the LP admits longer sorties");
  inf.truck_arcs = tarcs.size();
  inf.drone_arcs = darcs.size();
  inf.sorties = ys.size();
  inf.loops = zs.size();
  if (info) *info = inf;
  return m;
}

// Variable values realizing a feasible route in the arc model; unlisted variables are zero.
inline std::vector<double> route_assignment(const Instance& inst, const LinearModel& m, const CoordinatedRoute& r) {
  using detail::node_tag;
  const int depot = inst.depot;
  const std::size_t mpos = r.arcs.size();
  std::vector<double> x(m.vars.size(), 0.0);
  auto set = [&](const std::string& name, double v) {
    const int k = m.var(name);
    if (k < 0) throw std::invalid_argument("route uses an element missing from the model: " + name);
    x[k] = v;
  };
  auto tag = [&](int v, bool end) { return node_tag(inst, v, end); };
  std::vector<char> inside(mpos + 1, 0), arc_away(mpos, 0);
  for (const auto& s : r.sorties) {
    for (std::size_t h = s.launch_pos + 1; h < s.retrieve_pos; ++h) inside[h] = 1;
    for (std::size_t h = s.launch_pos; h < s.retrieve_pos; ++h) arc_away[h] = 1;
  }
  for (std::size_t h = 0; h < mpos; ++h) {
    const MultiArc& a = r.arcs[h];
    set("xT_" + tag(a.from, false) + "_" + tag(a.to, true) + "_" + std::to_string(a.p), 1);
    if (!arc_away[h]) set("xD_" + tag(a.from, false) + "_" + tag(a.to, true) + "_" + std::to_string(a.p), 1);
  }
  for (std::size_t h = 1; h < mpos; ++h) {
    const int v = r.node_at(h, depot);
    set((inside[h] ? "yT_" : "yC_") + std::to_string(v), 1);
  }
  for (const auto& s : r.sorties) {
    const Sortie& z = s.sortie;
    set("y_" + tag(z.launch, false) + "_" + std::to_string(z.drone) + "_" + tag(z.retrieve, true), 1);
    set("yD_" + std::to_string(z.drone), 1);
    set("xD_" + tag(z.launch, false) + "_" + std::to_string(z.drone) + "_0", 1);
    set("xD_" + std::to_string(z.drone) + "_" + tag(z.retrieve, true) + "_0", 1);
    if (inst.params.launch_retrieve && s.launch_pos != 0) set("l_" + std::to_string(z.drone), 1);
  }
  for (const auto& l : r.loops) set("z_" + tag(l.loop.launch, false) + "_" + std::to_string(l.loop.drone), 1);

  // Surcharge-free, loop-free clock.
  const RouteEval ev = evaluate_route(inst, r);
  std::vector<int> launch_at(mpos + 1, -1), retrieve_at(mpos + 1, -1);
  for (std::size_t s = 0; s < r.sorties.size(); ++s) {
    launch_at[r.sorties[s].launch_pos] = static_cast<int>(s);
    retrieve_at[r.sorties[s].retrieve_pos] = static_cast<int>(s);
  }
  double t = 0.0, t_launch = 0.0;
  for (std::size_t pos = 0; pos <= mpos; ++pos) {
    if (retrieve_at[pos] >= 0) t = std::max(t, t_launch + r.sorties[retrieve_at[pos]].sortie.time);
    const int v = r.node_at(pos, depot);
    const std::string tv = tag(v, pos == mpos);
    set("t_" + tv, t);
    if (launch_at[pos] >= 0) {
      const Sortie& s = r.sorties[launch_at[pos]].sortie;
      t_launch = t;
      set("t_" + std::to_string(s.drone), t + inst.dwell(s.launch) + inst.c_D(s.launch, s.drone));
    }
    for (const auto& l : r.loops)
      if (l.pos == pos) set("t_" + std::to_string(l.loop.drone), 0.0);
    if (pos == mpos) break;
    t += r.arcs[pos].time;
  }
  const double Q = inst.params.truck_capacity;
  set("ba1_0", Q);
  set("ba2_0", Q);
  set("bd_0", ev.q_departure[0]);
  for (std::size_t pos = 1; pos <= mpos; ++pos) {
    const MultiArc& a = r.arcs[pos - 1];
    const int v = r.node_at(pos, depot);
    const std::string tv = tag(v, pos == mpos);
    set("ba1_" + tv, ev.q_departure[pos - 1] - a.e_req);
    set("ba2_" + tv, ev.q_arrival[pos]);
    if (pos < mpos) set("bd_" + tv, ev.q_departure[pos]);
  }
  return x;
}

// Largest violation over rows and bounds (0 when satisfied).
inline double max_violation(const LinearModel& m, const std::vector<double>& x, std::string* worst = nullptr) {
  double w = 0.0;
  auto note = [&](double v, const std::string& name) {
    if (v > w) {
      w = v;
      if (worst) *worst = name;
    }
  };
  for (std::size_t k = 0; k < m.vars.size(); ++k) {
    note(m.vars[k].lb - x[k], "bound " + m.vars[k].name);
    note(x[k] - m.vars[k].ub, "bound " + m.vars[k].name);
  }
  for (const Row& r : m.rows) {
    double lhs = 0.0;
    for (const Term& t : r.terms) lhs += t.coef * x[t.var];
    const double scale = 1.0 + std::abs(r.rhs);
    double v = 0.0;
    if (r.sense == RowSense::LE) v = lhs - r.rhs;
    else if (r.sense == RowSense::GE) v = r.rhs - lhs;
    else v = std::abs(lhs - r.rhs);
    note(v / scale, r.name);
  }
  return w;
}

inline double objective_value(const LinearModel& m, const std::vector<double>& x) {
  double s = 0.0;
  for (const Term& t : m.objective) s += t.coef * x[t.var];
  return s;
}

// LP-format name: letters, digits and a few symbols; cannot start with a digit, a period or e/E.
inline std::string sanitize_lp_name(const std::string& s) {
  static const std::string extra = "!\"#$%&()/,.;?@_`'{}|~";
  std::string out;
  for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || extra.find(c) != std::string::npos) ? c : '_';
  if (out.empty() || std::isdigit(static_cast<unsigned char>(out[0])) || out[0] == '.' || out[0] == 'e' || out[0] == 'E') out = "n_" + out;
  if (out.size() > 255) out.resize(255);
  return out;
}

inline std::string emit_lp(const LinearModel& m) {
  // Stable renaming; collisions get a numeric suffix.
  std::set<std::string> used;
  std::vector<std::pair<std::string, std::string>> renamed;
  auto rename = [&](const std::string& n) {
    std::string s = sanitize_lp_name(n);
    if (used.count(s)) {
      const std::string base = s.substr(0, 240);
      for (int k = 1;; ++k) {
        s = base + "_" + std::to_string(k);
        if (!used.count(s)) break;
      }
    }
    used.insert(s);
    if (s != n) renamed.emplace_back(n, s);
    return s;
  };
  std::vector<std::string> vn, rn;
  for (const Variable& v : m.vars) vn.push_back(rename(v.name));
  for (const Row& r : m.rows) rn.push_back(rename(r.name));

  std::ostringstream os;
  os << "\\ arc model: " << m.vars.size() << " variables, " << m.rows.size() << " rows\n";
  for (const auto& [a, b] : renamed) os << "\\ name " << a << " -> " << b << "\n";
  auto line_terms = [&](std::string head, const std::vector<Term>& terms) {
    std::string line = std::move(head);
    std::string out;
    bool first = true;
    for (const Term& t : terms) {
      std::string piece;
      const double a = std::abs(t.coef);
      piece += t.coef < 0 ? "- " : (first ? "" : "+ ");
      if (a != 1.0) piece += detail::lp_num(a) + " ";
      piece += vn[t.var];
      if (line.size() + piece.size() + 1 > 200) {
        out += line + "\n";
        line = "   ";
      }
      line += " " + piece;
      first = false;
    }
    return std::pair<std::string, std::string>{out, line};
  };
  os << (m.minimize ? "Minimize\n" : "Maximize\n");
  {
    auto [done, last] = line_terms(" obj:", m.objective);
    os << done << last << "\n";
  }
  os << "Subject To\n";
  for (std::size_t k = 0; k < m.rows.size(); ++k) {
    const Row& r = m.rows[k];
    auto [done, last] = line_terms(" " + rn[k] + ":", r.terms);
    if (r.terms.empty()) last += " 0 " + vn.front();
    const char* op = r.sense == RowSense::LE ? "<=" : r.sense == RowSense::GE ? ">=" : "=";
    os << done << last << " " << op << " " << detail::lp_num(r.rhs) << "\n";
  }
  os << "Bounds\n";
  for (std::size_t k = 0; k < m.vars.size(); ++k) {
    const Variable& v = m.vars[k];
    if (v.kind == VarKind::Binary) continue;
    if (v.lb == v.ub) os << " " << vn[k] << " = " << detail::lp_num(v.lb) << "\n";
    else os << " " << detail::lp_num(v.lb) << " <= " << vn[k] << " <= " << detail::lp_num(v.ub) << "\n";
  }
  os << "Binaries\n";
  std::string line;
  for (std::size_t k = 0; k < m.vars.size(); ++k) {
    if (m.vars[k].kind != VarKind::Binary) continue;
    if (line.size() + vn[k].size() > 200) {
      os << line << "\n";
      line.clear();
    }
    line += " " + vn[k];
  }
  if (!line.empty()) os << line << "\n";
  os << "End\n";
  return os.str();
}

// Reads the subset of the LP format that emit_lp produces.
inline LinearModel parse_lp(const std::string& text) {
  LinearModel m;
  std::istringstream in(text);
  std::string raw;
  enum class Sec { None, Obj, Rows, Bounds, Bin, End } sec = Sec::None;
  std::vector<std::string> stmts;  // objective/rows joined across continuation lines
  std::vector<Sec> stmt_sec;
  struct Bound {
    std::string name;
    double lb, ub;
  };
  std::vector<Bound> bounds;
  std::vector<std::string> binaries;
  std::vector<std::string> order;  // first appearance
  std::set<std::string> seen;
  auto first_seen = [&](const std::string& n) {
    if (seen.insert(n).second) order.push_back(n);
  };
  auto tokens = [](const std::string& s) {
    std::istringstream ss(s);
    std::vector<std::string> t;
    std::string w;
    while (ss >> w) t.push_back(w);
    return t;
  };
  auto lower = [](std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
  };
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    if (!raw.empty() && raw[0] == '\\') continue;
    const std::string l = lower(raw);
    if (l == "minimize" || l == "maximize") {
      m.minimize = l == "minimize";
      sec = Sec::Obj;
      continue;
    }
    if (l == "subject to") {
      sec = Sec::Rows;
      continue;
    }
    if (l == "bounds") {
      sec = Sec::Bounds;
      continue;
    }
    if (l == "binaries") {
      sec = Sec::Bin;
      continue;
    }
    if (l == "end") {
      sec = Sec::End;
      continue;
    }
    if (raw.find_first_not_of(' ') == std::string::npos) continue;
    switch (sec) {
      case Sec::Obj:
      case Sec::Rows:
        if (raw.rfind("   ", 0) == 0 && !stmts.empty()) stmts.back() += " " + raw;
        else {
          stmts.push_back(raw);
          stmt_sec.push_back(sec);
        }
        break;
      case Sec::Bounds: {
        auto t = tokens(raw);
        if (t.size() == 3 && t[1] == "=") bounds.push_back({t[0], detail::parse_double(t[2], lineno), detail::parse_double(t[2], lineno)});
        else if (t.size() == 5 && t[1] == "<=" && t[3] == "<=") bounds.push_back({t[2], detail::parse_double(t[0], lineno), detail::parse_double(t[4], lineno)});
        else throw ParseError(lineno, "unsupported bound line");
        break;
      }
      case Sec::Bin:
        for (auto& w : tokens(raw)) binaries.push_back(w);
        break;
      default:
        throw ParseError(lineno, "text outside any section");
    }
  }
  // Linear expression: [label:] {sign} [coef] name ... [op rhs]
  struct Parsed {
    std::string label;
    std::vector<std::pair<std::string, double>> terms;
    RowSense sense = RowSense::LE;
    double rhs = 0.0;
  };
  auto parse_expr = [&](const std::string& s, bool row) {
    Parsed p;
    auto t = tokens(s);
    std::size_t k = 0;
    if (k < t.size() && t[k].back() == ':') {
      p.label = t[k].substr(0, t[k].size() - 1);
      ++k;
    }
    double sign = 1.0, coef = 1.0;
    bool have_coef = false;
    for (; k < t.size(); ++k) {
      const std::string& w = t[k];
      if (w == "+" || w == "-") {
        sign = w == "-" ? -1.0 : 1.0;
        continue;
      }
      if (row && (w == "<=" || w == ">=" || w == "=")) {
        p.sense = w == "<=" ? RowSense::LE : w == ">=" ? RowSense::GE : RowSense::EQ;
        if (k + 1 >= t.size()) throw ParseError(0, "missing right-hand side");
        p.rhs = detail::parse_double(t[k + 1], 0);
        break;
      }
      if (!have_coef && (std::isdigit(static_cast<unsigned char>(w[0])) || w[0] == '.')) {
        coef = detail::parse_double(w, 0);
        have_coef = true;
        continue;
      }
      p.terms.emplace_back(w, sign * coef);
      sign = 1.0;
      coef = 1.0;
      have_coef = false;
    }
    return p;
  };
  std::vector<Parsed> parsed;
  for (std::size_t s = 0; s < stmts.size(); ++s) {
    parsed.push_back(parse_expr(stmts[s], stmt_sec[s] == Sec::Rows));
    // A lone "0 name" placeholder keeps empty rows legal.
    auto& p = parsed.back();
    std::erase_if(p.terms, [](const auto& t) { return t.second == 0.0; });
  }
  // The format has no declaration block; variables are declared in order of first appearance.
  std::map<std::string, VarKind> kind;
  std::map<std::string, std::pair<double, double>> bnd;
  for (const auto& p : parsed)
    for (const auto& [n, c] : p.terms) first_seen(n);
  for (const auto& b : bounds) {
    first_seen(b.name);
    bnd[b.name] = {b.lb, b.ub};
    kind[b.name] = VarKind::Continuous;
  }
  for (const auto& b : binaries) {
    first_seen(b);
    kind[b] = VarKind::Binary;
    bnd[b] = {0.0, 1.0};
  }
  for (const auto& n : order) {
    auto it = kind.find(n);
    if (it == kind.end()) m.add_var(n, VarKind::Continuous, 0.0, std::numeric_limits<double>::infinity());
    else m.add_var(n, it->second, bnd[n].first, bnd[n].second);
  }
  for (std::size_t s = 0; s < parsed.size(); ++s) {
    std::vector<Term> terms;
    for (const auto& [n, c] : parsed[s].terms) terms.push_back({m.var(n), c});
    if (stmt_sec[s] == Sec::Obj)
      for (const Term& t : terms) m.add_objective(t.var, t.coef);
    else m.add_row(parsed[s].label, terms, parsed[s].sense, parsed[s].rhs);
  }
  return m;
}

// Reorders variables of `m` to follow `ref` so declaration-order-sensitive comparisons line up.
inline LinearModel reorder_like(const LinearModel& m, const LinearModel& ref) {
  LinearModel out;
  out.minimize = m.minimize;
  std::vector<int> map(m.vars.size(), -1);
  for (const Variable& v : ref.vars) {
    const int k = m.var(v.name);
    if (k < 0) continue;
    map[k] = out.add_var(v.name, m.vars[k].kind, m.vars[k].lb, m.vars[k].ub);
  }
  for (std::size_t k = 0; k < m.vars.size(); ++k)
    if (map[k] < 0) map[k] = out.add_var(m.vars[k].name, m.vars[k].kind, m.vars[k].lb, m.vars[k].ub);
  for (const Term& t : m.objective) out.add_objective(map[t.var], t.coef);
  for (const Row& r : m.rows) {
    std::vector<Term> terms;
    for (const Term& t : r.terms) terms.push_back({map[t.var], t.coef});
    out.add_row(r.name, terms, r.sense, r.rhs);
  }
  return out;
}

}  // namespace evtspd
