#pragma once

#include <algorithm>
#include <functional>
#include <limits>
#include <vector>

#include "core.hpp"
#include "multigraph.hpp"
#include "routes.hpp"

namespace evtspd {

struct OracleOptions {
  bool prune = true;  // truck-energy and truck-time bounds on partial paths
  int max_customers = 6;
};

struct OracleResult {
  bool feasible = false;
  double cost = std::numeric_limits<double>::infinity();
  CoordinatedRoute route;
  long truck_paths = 0;
  long candidates = 0;
};

// Exhaustive search over drone subsets, truck orders, arc choices and drone anchors.
inline OracleResult brute_force(const Instance& inst, const MultiGraph& g, const SortieCatalog& cat, const OracleOptions& opt = {}) {
  const auto& C = inst.customers;
  const int n = static_cast<int>(C.size());
  if (n > opt.max_customers) throw std::invalid_argument("oracle limited to small instances");
  const int depot = inst.depot;
  const Params& P = inst.params;
  OracleResult best;

  std::vector<int> truck, drones;
  CoordinatedRoute cur;

  auto consider = [&]() {
    CoordinatedRoute r = cur;
    std::sort(r.sorties.begin(), r.sorties.end(), [](const auto& a, const auto& b) { return a.launch_pos < b.launch_pos; });
    std::stable_sort(r.loops.begin(), r.loops.end(), [](const auto& a, const auto& b) { return a.pos < b.pos; });
    ++best.candidates;
    RouteEval ev = evaluate_route(inst, r);
    if (!ev.feasible || !check_cover(inst, r)) return;
    if (ev.total_time < best.cost - 1e-12) {
      best.cost = ev.total_time;
      best.route = std::move(r);
      best.feasible = true;
    }
  };

  std::function<void(std::size_t)> assign = [&](std::size_t d) {
    if (d == drones.size()) {
      consider();
      return;
    }
    const int j = drones[d];
    const std::size_t m = cur.arcs.size();
    for (std::size_t l = 0; l < m; ++l) {
      for (std::size_t r = l + 1; r <= m; ++r) {
        if (l == 0 && r == m) continue;
        const Sortie* s = cat.find(cur.node_at(l, depot), j, cur.node_at(r, depot));
        if (!s) continue;
        if (opt.prune) {
          bool clash = false;
          for (const auto& o : cur.sorties)
            if (l < o.retrieve_pos && o.launch_pos < r) clash = true;
          for (const auto& o : cur.loops)
            if (l < o.pos && o.pos < r) clash = true;
          if (clash) continue;
        }
        cur.sorties.push_back({l, r, *s});
        assign(d + 1);
        cur.sorties.pop_back();
      }
    }
    if (P.loops) {
      for (std::size_t pos = 0; pos < m; ++pos) {
        const Sortie* s = cat.find_loop(cur.node_at(pos, depot), j);
        if (!s) continue;
        if (opt.prune) {
          bool clash = false;
          for (const auto& o : cur.sorties)
            if (o.launch_pos < pos && pos < o.retrieve_pos) clash = true;
          if (clash) continue;
        }
        cur.loops.push_back({pos, *s});
        assign(d + 1);
        cur.loops.pop_back();
      }
    }
  };

  std::function<void(std::size_t, double, double)> hops = [&](std::size_t h, double q, double time) {
    if (h == truck.size() + 1) {
      ++best.truck_paths;
      assign(0);
      return;
    }
    const int from = h == 0 ? depot : truck[h - 1];
    const int to = h == truck.size() ? depot : truck[h];
    for (const MultiArc& a : g.bucket(from, to)) {
      double q2 = q;
      if (opt.prune) {
        if (a.e_req > q + P.tol) continue;
        q2 = a.direct() ? q - a.e_req : *a.e_rem;
        if (time + a.time >= best.cost) continue;
      }
      cur.arcs.push_back(a);
      hops(h + 1, q2, time + a.time);
      cur.arcs.pop_back();
    }
  };

  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    truck.clear();
    drones.clear();
    bool ok = true;
    for (int c = 0; c < n; ++c) {
      if (mask >> c & 1u) {
        if (!P.drone_compatible(C[c])) ok = false;
        drones.push_back(C[c]);
      } else {
        truck.push_back(C[c]);
      }
    }
    if (!ok || (truck.empty() && n > 0)) continue;
    std::sort(truck.begin(), truck.end());
    do {
      hops(0, P.truck_capacity, 0.0);
    } while (std::next_permutation(truck.begin(), truck.end()));
  }
  return best;
}

}  // namespace evtspd
