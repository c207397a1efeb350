#pragma once

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "core.hpp"
#include "multigraph.hpp"
#include "pricing.hpp"
#include "rmp.hpp"
#include "routes.hpp"
#include "vns.hpp"

namespace evtspd {

struct BpConfig {
  int ng = 5;
  double time_limit = 3600.0;  // seconds
  bool warm_start = true;
  VnsConfig vns;
  std::size_t columns_per_round = 50;
  std::size_t heuristic_cap = 0;  // >0: try a capped labeling pass before the exact one
  double eps = 1e-6;
  long max_nodes = 0;  // 0 = unlimited
  std::ostream* log = nullptr;
};

enum class BpStatus { Optimal, TimeLimit, Infeasible, Unresolved };

inline const char* status_name(BpStatus s) {
  switch (s) {
    case BpStatus::Optimal: return "optimal";
    case BpStatus::TimeLimit: return "time_limit";
    case BpStatus::Infeasible: return "infeasible";
    case BpStatus::Unresolved: return "unresolved";
  }
  return "?";
}

struct BpStats {
  long bb_nodes = 0;
  double root_bound = 0.0;
  double root_gap_pct = 0.0;
  long cg_iterations = 0;
  std::size_t columns = 0;
  double wall_time_s = 0.0;
  double warm_cost = std::numeric_limits<double>::infinity();
};

struct BpResult {
  BpStatus status = BpStatus::Infeasible;
  double cost = std::numeric_limits<double>::infinity();
  CoordinatedRoute route;
  BpStats stats;
  std::vector<std::string> trace;  // one line per processed node
  bool optimal() const { return status == BpStatus::Optimal; }
};

struct NodeOutcome {
  bool feasible = false;
  bool timed_out = false;
  double bound = std::numeric_limits<double>::infinity();
  MasterSolution master;
  std::vector<Column> columns;  // as seen by the node's master, artificial first
  ArcValues values;
  int cg_iterations = 0;
};

// "integral" is std::nullopt.
inline std::optional<BranchDecision> select_branch(const ArcValues& v, double eps = 1e-6) {
  using K = BranchDecision::Kind;
  auto frac = [&](double x) { return std::abs(x - std::round(x)) > eps; };
  std::optional<BranchDecision> pick;
  double dist = std::numeric_limits<double>::infinity();
  auto offer = [&](double x, BranchDecision d) {
    if (!frac(x)) return;
    const double e = std::abs(x - 0.5);
    if (e < dist - 1e-12) {
      dist = e;
      pick = d;
    }
  };
  for (const auto& [c, x] : v.y) offer(x, {K::DroneCustomer, c, -1, 0, 0});
  if (pick) return pick;
  for (const auto& [k, x] : v.xT) offer(x, {K::TruckArc, std::get<0>(k), std::get<1>(k), std::get<2>(k), 0});
  if (pick) return pick;
  for (const auto& [k, x] : v.w_in) offer(x, {K::DroneArcIn, k.first, k.second, 0, 0});
  for (const auto& [k, x] : v.w_out) offer(x, {K::DroneArcOut, k.first, k.second, 0, 0});
  if (pick) return pick;
  for (const auto& [k, x] : v.xC) offer(x, {K::CombinedArc, std::get<0>(k), std::get<1>(k), std::get<2>(k), 0});
  return pick;
}

class BranchAndPrice {
 public:
  BranchAndPrice(const Instance& inst, const MultiGraph& g, const SortieCatalog& cat, BpConfig cfg)
      : inst_(inst), g_(g), cat_(cat), cfg_(std::move(cfg)), ng_(build_ng_sets(inst, std::min<int>(cfg_.ng, std::max<int>(1, static_cast<int>(inst.customers.size()))))) {
    artificial_cost_ = 10.0 * std::max(1.0, horizon_bound(inst, g, cat));
  }

  const std::vector<Column>& pool() const { return pool_; }
  double incumbent() const { return best_cost_; }

  void add_column(const CoordinatedRoute& r) {
    Column c = make_column(inst_, r);
    for (const Column& o : pool_)
      if (o.route == c.route) return;
    consider_incumbent(c);
    pool_.push_back(std::move(c));
  }

  NodeOutcome solve_node(const std::vector<BranchDecision>& decisions) {
    NodeOutcome out;
    Restrictions R(inst_, g_);
    for (const auto& d : decisions) R.apply(inst_, g_, d);
    const std::size_t n = inst_.customers.size();
    RestrictedMaster rm(n, 1e-7);
    rm.push(artificial_column(n, artificial_cost_));
    for (const Column& c : pool_)
      if (R.allows(inst_, g_, c.route) && !rm.is_duplicate(c)) rm.push(c);
    PricingOptions opt;
    opt.limit = cfg_.columns_per_round;
    for (;;) {
      const MasterSolution& sol = rm.solve();
      ++out.cg_iterations;
      Duals d;
      d.u0 = sol.u0;
      d.u.assign(inst_.size(), 0.0);
      for (std::size_t i = 0; i < n; ++i) d.u[inst_.customers[i]] = sol.u[i];
      std::vector<PricedRoute> priced;
      if (cfg_.heuristic_cap > 0) {
        PricingOptions h = opt;
        h.bucket_cap = cfg_.heuristic_cap;
        priced = solve_pricing(inst_, g_, cat_, ng_, d, R, h);
      }
      if (priced.empty()) priced = solve_pricing(inst_, g_, cat_, ng_, d, R, opt);
      if (priced.empty()) break;
      std::vector<Column> cols;
      for (const PricedRoute& p : priced) {
        Column c = make_column(inst_, p.route);
        consider_incumbent(c);
        cols.push_back(c);
      }
      std::vector<Column> fresh = cols;
      if (rm.add_columns(std::move(cols)) == 0) {
        log("pricing returned columns the master rejected; stopping column generation");
        break;
      }
      for (Column& c : fresh) remember(std::move(c));
      if (out_of_time()) {
        out.timed_out = true;
        break;
      }
    }
    const MasterSolution& sol = rm.last();
    out.master = sol;
    out.columns = rm.columns();
    for (std::size_t j = 0; j < out.columns.size(); ++j)
      if (out.columns[j].artificial && sol.lambda[j] > cfg_.eps) return out;
    out.feasible = true;
    out.bound = sol.objective;
    out.values = extract_arc_values(out.columns, sol);
    return out;
  }

  BpResult solve() {
    start_ = std::chrono::steady_clock::now();
    BpResult res;
    if (cfg_.warm_start) {
      try {
        VnsResult v = vns_solve(inst_, g_, cat_, cfg_.vns);
        res.stats.warm_cost = v.cost;
        add_column(v.route);
      } catch (const std::runtime_error& e) {
        log(std::string("warm start failed: ") + e.what());
      }
    }
    struct BBNode {
      std::vector<BranchDecision> decisions;
      double parent_bound;
      int depth;
    };
    std::vector<BBNode> stack{{{}, -std::numeric_limits<double>::infinity(), 0}};
    bool complete = true;
    bool unresolved = false;
    bool root = true;
    while (!stack.empty()) {
      if (out_of_time() || (cfg_.max_nodes > 0 && res.stats.bb_nodes >= cfg_.max_nodes)) {
        complete = false;
        break;
      }
      BBNode node = std::move(stack.back());
      stack.pop_back();
      if (node.parent_bound >= best_cost_ - cfg_.eps) continue;
      ++res.stats.bb_nodes;
      NodeOutcome o = solve_node(node.decisions);
      res.stats.cg_iterations += o.cg_iterations;
      std::string line = "node=" + std::to_string(res.stats.bb_nodes) + " depth=" + std::to_string(node.depth);
      if (root) {
        res.stats.root_bound = o.feasible ? o.bound : std::numeric_limits<double>::infinity();
        root = false;
      }
      if (o.timed_out) {
        complete = false;
        res.trace.push_back(line + " timeout");
        break;
      }
      if (!o.feasible) {
        res.trace.push_back(line + " infeasible");
        continue;
      }
      line += " bound=" + fmt(o.bound);
      if (o.bound >= best_cost_ - cfg_.eps) {
        res.trace.push_back(line + " pruned");
        continue;
      }
      auto br = select_branch(o.values, cfg_.eps);
      if (!br) {
        // Arc-integral: a single column at value one is an integral route.
        bool single = false;
        for (std::size_t j = 0; j < o.columns.size(); ++j)
          if (o.master.lambda[j] > 1.0 - cfg_.eps && !o.columns[j].artificial && check_cover(inst_, o.columns[j].route)) {
            consider_incumbent(o.columns[j]);
            single = true;
          }
        if (!single) {
          unresolved = true;
          log("arc values integral but master solution fractional at node " + std::to_string(res.stats.bb_nodes));
        }
        res.trace.push_back(line + (single ? " integral" : " unresolved"));
        continue;
      }
      res.trace.push_back(line + " branch=" + describe(*br));
      BBNode zero{node.decisions, o.bound, node.depth + 1}, one{node.decisions, o.bound, node.depth + 1};
      zero.decisions.push_back(*br);
      BranchDecision b1 = *br;
      b1.value = 1;
      one.decisions.push_back(b1);
      stack.push_back(std::move(zero));
      stack.push_back(std::move(one));
    }
    res.stats.columns = pool_.size();
    res.stats.wall_time_s = elapsed();
    res.cost = best_cost_;
    if (best_) res.route = *best_;
    if (!complete) res.status = BpStatus::TimeLimit;
    else if (unresolved) res.status = BpStatus::Unresolved;
    else if (best_) res.status = BpStatus::Optimal;
    else res.status = BpStatus::Infeasible;
    if (best_ && std::isfinite(res.stats.root_bound) && best_cost_ > 0)
      res.stats.root_gap_pct = (best_cost_ - res.stats.root_bound) / best_cost_ * 100.0;
    return res;
  }

 private:
  static std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
  }
  static std::string describe(const BranchDecision& d) {
    using K = BranchDecision::Kind;
    switch (d.kind) {
      case K::DroneCustomer: return "y" + std::to_string(d.from);
      case K::TruckArc: return "xT" + std::to_string(d.from) + "," + std::to_string(d.to) + "," + std::to_string(d.p);
      case K::CombinedArc: return "xC" + std::to_string(d.from) + "," + std::to_string(d.to) + "," + std::to_string(d.p);
      case K::DroneArcIn: return "wIn" + std::to_string(d.from) + "," + std::to_string(d.to);
      case K::DroneArcOut: return "wOut" + std::to_string(d.from) + "," + std::to_string(d.to);
    }
    return "?";
  }
  void log(const std::string& s) {
    if (cfg_.log) *cfg_.log << s << "\n";
  }
  double elapsed() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }
  bool out_of_time() const { return cfg_.time_limit > 0 && elapsed() > cfg_.time_limit; }

  void consider_incumbent(const Column& c) {
    if (c.artificial || !check_cover(inst_, c.route)) return;
    const RouteEval ev = evaluate_route(inst_, c.route);
    if (ev.feasible && ev.total_time < best_cost_ - 1e-12) {
      best_cost_ = ev.total_time;
      best_ = c.route;
    }
  }
  void remember(Column c) {
    for (const Column& o : pool_)
      if (o.a == c.a && o.route == c.route) return;
    pool_.push_back(std::move(c));
  }

  const Instance& inst_;
  const MultiGraph& g_;
  const SortieCatalog& cat_;
  BpConfig cfg_;
  NgSets ng_;
  double artificial_cost_ = 0.0;
  std::vector<Column> pool_;
  double best_cost_ = std::numeric_limits<double>::infinity();
  std::optional<CoordinatedRoute> best_;
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline BpResult bp_solve(const Instance& inst, const MultiGraph& g, const SortieCatalog& cat, const BpConfig& cfg = {}) {
  return BranchAndPrice(inst, g, cat, cfg).solve();
}

}  // namespace evtspd
