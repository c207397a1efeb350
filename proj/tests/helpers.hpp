#pragma once

#include <cmath>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "evtspd/evtspd.hpp"

namespace testkit {

using namespace evtspd;

// Letters toggle variants: L loops, R launch/retrieve, W weight range, M max leg 2,
// S service time 30, I incompatible {1,3}, T tight truck battery.
inline Params variant(const std::string& flags) {
  Params p;
  auto has = [&](char c) { return flags.find(c) != std::string::npos; };
  if (has('L')) p.loops = true;
  if (has('R')) p.launch_retrieve = true;
  if (has('W')) p.weight_range = true;
  if (has('M')) p.max_leg = 2;
  if (has('S')) p.service_time = 30;
  if (has('I')) p.incompatible = {1, 3};
  if (has('T')) p.truck_capacity = 5500;
  return p;
}

inline Instance random_instance(std::uint64_t seed, int n, int s, const Params& p = {}) {
  Instance inst = generate_instance(seed, n, s, p);
  if (p.weight_range) {
    std::mt19937_64 rng(seed ^ 0xABCDEFULL);
    for (int c : inst.customers) inst.weight[c] = p.payload_capacity * uniform01(rng);
  }
  return inst;
}

// Instance plus its derived structures; heap-held so references stay valid.
struct Prepared {
  Instance inst;
  MultiGraph g;
  SortieCatalog cat;
};

inline std::unique_ptr<Prepared> prepare(Instance inst) {
  auto p = std::make_unique<Prepared>();
  p->inst = std::move(inst);
  p->g = build_multigraph(p->inst);
  p->cat = feasible_sorties(p->inst);
  return p;
}

// Explicit-matrix instance; coordinates are irrelevant once both matrices are given.
inline Instance matrix_instance(const Params& p, const std::vector<NodeKind>& kinds, const std::vector<std::vector<double>>& ct,
                                const std::vector<std::vector<double>>& cd) {
  std::vector<Node> nodes;
  for (std::size_t i = 0; i < kinds.size(); ++i) nodes.push_back({static_cast<int>(i), kinds[i], static_cast<double>(i), 0.0});
  Instance inst = make_instance(p, nodes);
  const std::size_t n = kinds.size();
  inst.c_T = Matrix(n);
  inst.c_D = Matrix(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      inst.c_T(i, j) = ct[i][j];
      inst.c_D(i, j) = cd[i][j];
    }
  inst.explicit_ct = inst.explicit_cd = true;
  compute_matrices(inst);
  return inst;
}

// The shared-energy example: truck 0-1-3-4-0, drone 1~2~4, battery 150, first arc 50, trip 20.
// Drone speed twice the truck's and energy ratio 0.5 make drone energy equal drone time.
inline Instance shared_energy_example(double battery = 150) {
  Params p;
  p.truck_capacity = battery;
  p.truck_speed = 40;
  p.drone_speed = 80;
  p.energy_ratio = 0.5;
  using K = NodeKind;
  const std::vector<std::vector<double>> ct{
      {0, 50, 60, 70, 20}, {50, 0, 40, 30, 60}, {60, 40, 0, 40, 40}, {70, 30, 40, 0, 25}, {20, 60, 40, 25, 0}};
  const std::vector<std::vector<double>> cd{
      {0, 40, 40, 40, 15}, {40, 0, 10, 20, 30}, {40, 10, 0, 20, 10}, {40, 20, 20, 0, 15}, {15, 30, 10, 15, 0}};
  return matrix_instance(p, {K::Depot, K::Customer, K::Customer, K::Customer, K::Customer}, ct, cd);
}

inline CoordinatedRoute path_route(const MultiGraph& g, const std::vector<int>& seq, const std::vector<int>& ps = {}) {
  CoordinatedRoute r;
  for (std::size_t h = 0; h + 1 < seq.size(); ++h) r.arcs.push_back(*g.find(seq[h], seq[h + 1], h < ps.size() ? ps[h] : 0));
  return r;
}

// Random structurally valid route: shuffled truck customers, random parallel arcs, random
// non-overlapping sorties for the rest. Customers that find no sortie slot are dropped.
inline CoordinatedRoute random_route(const Prepared& P, std::mt19937_64& rng, double drone_share = 0.4) {
  const Instance& inst = P.inst;
  std::vector<int> truck, drone;
  for (int c : inst.customers) (uniform01(rng) < drone_share ? drone : truck).push_back(c);
  for (std::size_t i = truck.size(); i > 1; --i) std::swap(truck[i - 1], truck[uniform_index(rng, i)]);
  std::vector<int> seq{inst.depot};
  seq.insert(seq.end(), truck.begin(), truck.end());
  seq.push_back(inst.depot);
  CoordinatedRoute r;
  if (truck.empty()) return r;
  for (std::size_t h = 0; h + 1 < seq.size(); ++h) {
    const auto& b = P.g.bucket(seq[h], seq[h + 1]);
    if (b.empty()) return {};
    r.arcs.push_back(b[uniform_index(rng, b.size())]);
  }
  const std::size_t m = r.arcs.size();
  for (int j : drone) {
    std::vector<AnchoredSortie> opts;
    for (std::size_t l = 0; l < m; ++l)
      for (std::size_t k = l + 1; k <= m; ++k) {
        if (l == 0 && k == m) continue;
        bool clash = false;
        for (const auto& s : r.sorties) clash = clash || (l < s.retrieve_pos && s.launch_pos < k);
        if (clash) continue;
        const Sortie* s = P.cat.find(seq[l], j, seq[k]);
        if (s) opts.push_back({l, k, *s});
      }
    if (opts.empty()) continue;
    r.sorties.push_back(opts[uniform_index(rng, opts.size())]);
    std::sort(r.sorties.begin(), r.sorties.end(), [](const auto& a, const auto& b) { return a.launch_pos < b.launch_pos; });
  }
  return r;
}

// Pairwise filter written independently of the insertion filter.
inline std::vector<MultiArc> brute_pareto(const std::vector<MultiArc>& c) {
  std::vector<MultiArc> out;
  for (std::size_t a = 0; a < c.size(); ++a) {
    bool dom = false;
    for (std::size_t b = 0; b < c.size() && !c[a].direct(); ++b) {
      if (a == b || c[b].direct()) continue;
      const bool le = c[b].e_req <= c[a].e_req + 1e-9 && *c[b].e_rem >= *c[a].e_rem - 1e-9 && c[b].time <= c[a].time + 1e-9;
      const bool lt = c[b].e_req < c[a].e_req - 1e-9 || *c[b].e_rem > *c[a].e_rem + 1e-9 || c[b].time < c[a].time - 1e-9;
      dom = dom || (le && lt);
    }
    if (!dom) out.push_back(c[a]);
  }
  return out;
}

inline std::multiset<std::vector<int>> traces(const std::vector<MultiArc>& v) {
  std::multiset<std::vector<int>> s;
  for (const auto& a : v) s.insert(a.trace);
  return s;
}

inline bool near(double a, double b, double tol = 1e-6) {
  if (std::isinf(a) || std::isinf(b)) return a == b;
  return std::abs(a - b) <= tol * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

}  // namespace testkit
