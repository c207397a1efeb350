#pragma once

#include <optional>
#include <string>
#include <vector>

#include "core.hpp"

namespace evtspd {

struct MultiArc {
  int from = 0;
  int to = 0;
  int p = 0;  // 0 = direct
  double e_req = 0.0;
  std::optional<double> e_rem;
  double time = 0.0;
  std::vector<int> trace;

  bool direct() const { return !e_rem.has_value(); }
  bool operator==(const MultiArc&) const = default;
};

// Retained original arcs after the elimination rules; retained[i][j].
using ArcMask = std::vector<std::vector<char>>;

inline ArcMask eliminate_arcs(const Instance& inst) {
  const int n = inst.size();
  const double Q = inst.params.truck_capacity;
  ArcMask keep(n, std::vector<char>(n, 0));
  std::vector<int> anchors = inst.stations;
  anchors.push_back(inst.depot);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j || inst.e_T(i, j) > Q) continue;
      if (inst.is_customer(i) && inst.is_customer(j)) {
        bool some = false;
        for (int s : anchors) {
          for (int t : anchors) {
            if (inst.e_T(s, i) + inst.e_T(i, j) + inst.e_T(j, t) <= Q) {
              some = true;
              break;
            }
          }
          if (some) break;
        }
        if (!some) continue;
      }
      keep[i][j] = 1;
    }
  }
  return keep;
}

// Minimum-time paths inside the station subgraph. Indexed by node id; only station rows are meaningful.
struct StationPaths {
  std::vector<std::vector<double>> dist;
  std::vector<std::vector<int>> next;

  bool reachable(int k, int l) const { return next[k][l] >= 0; }
  std::vector<int> path(int k, int l) const {
    std::vector<int> out;
    if (!reachable(k, l)) return out;
    out.push_back(k);
    while (k != l) {
      k = next[k][l];
      out.push_back(k);
    }
    return out;
  }
};

// Hop weight is c_T plus the charge time at the hop's tail station.
inline StationPaths cs_shortest_paths(const Instance& inst) {
  const int n = inst.size();
  const double inf = std::numeric_limits<double>::infinity();
  StationPaths sp;
  sp.dist.assign(n, std::vector<double>(n, inf));
  sp.next.assign(n, std::vector<int>(n, -1));
  const auto& S = inst.stations;
  for (int k : S) {
    sp.dist[k][k] = 0.0;
    sp.next[k][k] = k;
    for (int l : S) {
      if (k == l || inst.e_T(k, l) > inst.params.truck_capacity) continue;
      sp.dist[k][l] = inst.c_T(k, l) + inst.dwell(k);
      sp.next[k][l] = l;
    }
  }
  for (int m : S)
    for (int k : S)
      for (int l : S) {
        if (sp.dist[k][m] + sp.dist[m][l] < sp.dist[k][l]) {
          sp.dist[k][l] = sp.dist[k][m] + sp.dist[m][l];
          sp.next[k][l] = sp.next[k][m];
        }
      }
  return sp;
}

inline MultiArc arc_from_trace(const Instance& inst, const std::vector<int>& trace, int p) {
  MultiArc a;
  a.from = trace.front();
  a.to = trace.back();
  a.p = p;
  a.trace = trace;
  a.e_req = inst.e_T(trace[0], trace[1]);
  for (std::size_t h = 0; h + 1 < trace.size(); ++h) a.time += inst.c_T(trace[h], trace[h + 1]) + inst.dwell(trace[h]);
  if (trace.size() > 2) a.e_rem = inst.params.truck_capacity - inst.e_T(trace[trace.size() - 2], trace.back());
  return a;
}

// Candidate list in generation order: direct, single stations, then station pairs. p is left at 0 for refuel
// candidates until numbering.
inline std::vector<MultiArc> enumerate_refuel_paths(const Instance& inst, const ArcMask& keep, const StationPaths& sp, int i, int j) {
  std::vector<MultiArc> out;
  const double Q = inst.params.truck_capacity;
  if (keep[i][j]) out.push_back(arc_from_trace(inst, {i, j}, 0));
  for (int k : inst.stations) {
    if (inst.e_T(i, k) <= Q && inst.e_T(k, j) <= Q) out.push_back(arc_from_trace(inst, {i, k, j}, 0));
  }
  for (int k : inst.stations) {
    if (inst.e_T(i, k) > Q) continue;
    for (int l : inst.stations) {
      if (k == l || !sp.reachable(k, l) || inst.e_T(l, j) > Q) continue;
      std::vector<int> tr{i};
      for (int v : sp.path(k, l)) tr.push_back(v);
      tr.push_back(j);
      out.push_back(arc_from_trace(inst, tr, 0));
    }
  }
  return out;
}

inline bool dominates(const MultiArc& a, const MultiArc& b, double eps = 1e-9) {
  if (!a.e_rem || !b.e_rem) throw std::logic_error("dominance is defined for refuel arcs only");
  const bool weak = a.e_req <= b.e_req + eps && *a.e_rem >= *b.e_rem - eps && a.time <= b.time + eps;
  const bool strict = a.e_req < b.e_req - eps || *a.e_rem > *b.e_rem + eps || a.time < b.time - eps;
  return weak && strict;
}

// Insertion filter: a candidate enters unless dominated and evicts what it dominates.
inline std::vector<MultiArc> pareto_filter(const std::vector<MultiArc>& candidates, double eps = 1e-9) {
  std::vector<MultiArc> kept;
  for (const MultiArc& c : candidates) {
    if (c.direct()) {
      kept.push_back(c);
      continue;
    }
    bool dominated = false;
    for (const MultiArc& k : kept)
      if (!k.direct() && dominates(k, c, eps)) {
        dominated = true;
        break;
      }
    if (dominated) continue;
    std::erase_if(kept, [&](const MultiArc& k) { return !k.direct() && dominates(c, k, eps); });
    kept.push_back(c);
  }
  return kept;
}

struct GraphStats {
  long pairs = 0;
  long direct = 0;
  long refuel_kept = 0;
  long refuel_pruned = 0;
  double ratio = 0.0;
};

inline std::string format_stats(const GraphStats& s) {
  std::ostringstream os;
  os << "pairs=" << s.pairs << " direct=" << s.direct << " refuel_kept=" << s.refuel_kept << " refuel_pruned=" << s.refuel_pruned
     << " ratio=" << s.ratio;
  return os.str();
}

class MultiGraph {
 public:
  MultiGraph() = default;
  explicit MultiGraph(int n) : n_(n), buckets_(static_cast<std::size_t>(n) * n) {}

  int node_count() const { return n_; }
  const std::vector<MultiArc>& bucket(int i, int j) const { return buckets_[static_cast<std::size_t>(i) * n_ + j]; }
  std::vector<MultiArc>& bucket(int i, int j) { return buckets_[static_cast<std::size_t>(i) * n_ + j]; }
  // Index of arc with path index p inside bucket (i,j), or -1.
  int position(int i, int j, int p) const {
    const auto& b = bucket(i, j);
    for (std::size_t k = 0; k < b.size(); ++k)
      if (b[k].p == p) return static_cast<int>(k);
    return -1;
  }
  const MultiArc* find(int i, int j, int p) const {
    int k = position(i, j, p);
    return k < 0 ? nullptr : &bucket(i, j)[k];
  }
  std::size_t arc_count() const {
    std::size_t c = 0;
    for (const auto& b : buckets_) c += b.size();
    return c;
  }
  std::vector<int> nodes;  // C0, depot first
  GraphStats stats;
  int max_station_path = 1;  // most nodes on any station shortest path

 private:
  int n_ = 0;
  std::vector<std::vector<MultiArc>> buckets_;
};

inline MultiGraph build_multigraph(const Instance& inst, double eps = 1e-9) {
  MultiGraph g(inst.size());
  g.nodes.push_back(inst.depot);
  for (int c : inst.customers) g.nodes.push_back(c);
  const ArcMask keep = eliminate_arcs(inst);
  const StationPaths sp = cs_shortest_paths(inst);
  for (int k : inst.stations)
    for (int l : inst.stations)
      if (sp.reachable(k, l)) g.max_station_path = std::max<int>(g.max_station_path, static_cast<int>(sp.path(k, l).size()));
  for (int i : g.nodes) {
    for (int j : g.nodes) {
      if (i == j) continue;
      ++g.stats.pairs;
      auto cands = enumerate_refuel_paths(inst, keep, sp, i, j);
      auto kept = pareto_filter(cands, eps);
      int p = 0;
      for (MultiArc& a : kept) {
        if (a.trace.size() == 2) {
          a.p = 0;
          ++g.stats.direct;
        } else {
          a.p = ++p;
          ++g.stats.refuel_kept;
        }
      }
      // Direct arc first, refuel arcs in candidate order.
      std::stable_sort(kept.begin(), kept.end(), [](const MultiArc& a, const MultiArc& b) { return a.p < b.p; });
      g.stats.refuel_pruned += static_cast<long>(cands.size() - kept.size());
      g.bucket(i, j) = std::move(kept);
    }
  }
  g.stats.ratio = g.stats.pairs ? static_cast<double>(g.arc_count()) / static_cast<double>(g.stats.pairs) : 0.0;
  return g;
}

}  // namespace evtspd
