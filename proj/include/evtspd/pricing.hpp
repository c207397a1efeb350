#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <unordered_map>
#include <vector>

#include "core.hpp"
#include "multigraph.hpp"
#include "routes.hpp"

namespace evtspd {

struct NgSets {
  int delta = 0;
  std::vector<std::uint64_t> mask;  // by node id, bit = customer index
};

inline NgSets build_ng_sets(const Instance& inst, int delta) {
  if (delta < 1) throw std::invalid_argument("ng size must be at least 1");
  if (inst.customers.size() > 64) throw std::invalid_argument("ng-route pricing supports at most 64 customers");
  NgSets ng;
  ng.delta = delta;
  ng.mask.assign(inst.size(), 0);
  const auto& C = inst.customers;
  for (std::size_t a = 0; a < C.size(); ++a) {
    std::vector<std::size_t> others;
    for (std::size_t b = 0; b < C.size(); ++b)
      if (b != a) others.push_back(b);
    std::stable_sort(others.begin(), others.end(), [&](std::size_t x, std::size_t y) {
      double dx = inst.c_T(C[a], C[x]);
      double dy = inst.c_T(C[a], C[y]);
      if (dx != dy) return dx < dy;
      return C[x] < C[y];
    });
    std::uint64_t m = std::uint64_t{1} << a;
    for (std::size_t t = 0; t + 1 < static_cast<std::size_t>(delta) && t < others.size(); ++t) m |= std::uint64_t{1} << others[t];
    ng.mask[C[a]] = m;
  }
  return ng;
}

struct BranchDecision {
  enum class Kind { DroneCustomer, TruckArc, CombinedArc, DroneArcIn, DroneArcOut };
  Kind kind = Kind::DroneCustomer;
  int from = -1;  // customer for DroneCustomer
  int to = -1;
  int p = 0;
  int value = 0;
  bool operator==(const BranchDecision&) const = default;
};

// Pricing-side view of a set of branching decisions.
class Restrictions {
 public:
  Restrictions() = default;
  Restrictions(const Instance& inst, const MultiGraph& g) : n_(inst.size()), depot_(inst.depot) {
    no_truck_visit.assign(n_, 0);
    no_drone_visit.assign(n_, 0);
    req_launch.assign(n_, -1);
    req_retrieve.assign(n_, -1);
    no_in.assign(static_cast<std::size_t>(n_) * n_, 0);
    no_out.assign(static_cast<std::size_t>(n_) * n_, 0);
    truck_only_ok.resize(static_cast<std::size_t>(n_) * n_);
    combined_ok.resize(static_cast<std::size_t>(n_) * n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) {
        truck_only_ok[idx(i, j)].assign(g.bucket(i, j).size(), 1);
        combined_ok[idx(i, j)].assign(g.bucket(i, j).size(), 1);
      }
  }

  std::vector<char> no_truck_visit, no_drone_visit;
  std::vector<int> req_launch, req_retrieve;
  std::vector<char> no_in, no_out;  // forbidden launch->drone and drone->retrieve legs
  std::vector<std::vector<char>> truck_only_ok, combined_ok;  // per bucket, per position

  std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * n_ + j; }
  bool in_ok(int i, int j) const { return !no_in[idx(i, j)]; }
  bool out_ok(int i, int j) const { return !no_out[idx(i, j)]; }
  bool drone_ok(const Sortie& s) const {
    if (no_drone_visit[s.drone]) return false;
    if (!in_ok(s.launch, s.drone) || !out_ok(s.drone, s.retrieve)) return false;
    if (req_launch[s.drone] >= 0 && req_launch[s.drone] != s.launch) return false;
    if (req_retrieve[s.drone] >= 0 && req_retrieve[s.drone] != s.retrieve) return false;
    return true;
  }

  void apply(const Instance& inst, const MultiGraph& g, const BranchDecision& d) {
    using K = BranchDecision::Kind;
    switch (d.kind) {
      case K::DroneCustomer:
        if (d.value) no_truck_visit[d.from] = 1;
        else no_drone_visit[d.from] = 1;
        break;
      case K::TruckArc:
      case K::CombinedArc: {
        const bool truck = d.kind == K::TruckArc;
        const int pos = g.position(d.from, d.to, d.p);
        if (!d.value) {
          if (pos >= 0) (truck ? truck_only_ok : combined_ok)[idx(d.from, d.to)][pos] = 0;
          break;
        }
        for (int v = 0; v < n_; ++v) {
          for (std::size_t q = 0; q < g.bucket(d.from, v).size(); ++q) {
            const bool same = v == d.to && static_cast<int>(q) == pos;
            if (!(same && truck)) truck_only_ok[idx(d.from, v)][q] = 0;
            if (!(same && !truck)) combined_ok[idx(d.from, v)][q] = 0;
          }
          for (std::size_t q = 0; q < g.bucket(v, d.to).size(); ++q) {
            const bool same = v == d.from && static_cast<int>(q) == pos;
            if (!(same && truck)) truck_only_ok[idx(v, d.to)][q] = 0;
            if (!(same && !truck)) combined_ok[idx(v, d.to)][q] = 0;
          }
        }
        if (inst.is_customer(d.from)) no_drone_visit[d.from] = 1;
        if (inst.is_customer(d.to)) no_drone_visit[d.to] = 1;
        break;
      }
      case K::DroneArcIn:
      case K::DroneArcOut: {
        if (!d.value) {
          (d.kind == K::DroneArcIn ? no_in : no_out)[idx(d.from, d.to)] = 1;
          break;
        }
        if (d.kind == K::DroneArcIn) {
          req_launch[d.to] = d.from;
          no_truck_visit[d.to] = 1;
        } else {
          req_retrieve[d.from] = d.to;
          no_truck_visit[d.from] = 1;
        }
        break;
      }
    }
  }

  // Column mask used at branch-and-bound nodes.
  bool allows(const Instance& inst, const MultiGraph& g, const CoordinatedRoute& r) const {
    const std::size_t m = r.arcs.size();
    std::vector<char> inside(m, 0);
    for (const auto& s : r.sorties)
      for (std::size_t h = s.launch_pos; h < s.retrieve_pos; ++h) inside[h] = 1;
    for (std::size_t h = 0; h < m; ++h) {
      const MultiArc& a = r.arcs[h];
      const int pos = g.position(a.from, a.to, a.p);
      if (pos < 0) return false;
      const auto& ok = inside[h] ? truck_only_ok : combined_ok;
      if (!ok[idx(a.from, a.to)][pos]) return false;
      if (inst.is_customer(a.to) && no_truck_visit[a.to]) return false;
    }
    for (const auto& s : r.sorties)
      if (!drone_ok(s.sortie)) return false;
    for (const auto& l : r.loops)
      if (!drone_ok(l.loop)) return false;
    return true;
  }

 private:
  int n_ = 0;
  int depot_ = 0;
};

struct Duals {
  double u0 = 0.0;
  std::vector<double> u;  // by node id; zero for non-customers
};

struct PricingOptions {
  bool dominance = true;
  std::size_t limit = 50;
  std::size_t bucket_cap = 0;  // >0: keep only the cheapest labels per bucket (heuristic pass)
  double eps = 1e-7;
  std::ostream* trace = nullptr;
};

struct PricedRoute {
  double reduced_cost = 0.0;
  CoordinatedRoute route;
};

struct PricingStats {
  std::vector<std::size_t> labels;
  std::vector<std::size_t> pruned;
  std::size_t completed = 0;
};

class Labeler {
 public:
  enum class Action { Start, Truck, Combined, Drone, Loop, FinalCombined, FinalOpen };

  struct Label {
    std::uint64_t ng = 0;
    int k = 0;
    int iC = 0;
    int iT = 0;
    double tau = 0.0;
    double bC = 0.0;
    double bT = 0.0;
    bool fixed = false;
    int nT = 0;
    double value = 0.0;
    int parent = -1;
    Action action = Action::Start;
    const MultiArc* arc = nullptr;
    const Sortie* sortie = nullptr;
    bool alive = true;
  };

  Labeler(const Instance& inst, const MultiGraph& g, const SortieCatalog& cat, const NgSets& ng)
      : inst_(inst), g_(g), cat_(cat), ng_(ng) {
    cbit_.assign(inst.size(), 0);
    for (std::size_t c = 0; c < inst.customers.size(); ++c) cbit_[inst.customers[c]] = std::uint64_t{1} << c;
  }

  Label initial_label(const Duals& d) const {
    Label L;
    L.iC = L.iT = inst_.depot;
    L.bC = L.bT = inst_.params.truck_capacity;
    L.value = -d.u0;
    return L;
  }

  std::uint64_t visit(std::uint64_t ng, int v) const { return (ng & ng_.mask[v]) | cbit_[v]; }
  // Memory after the truck settles at anchor again.
  std::uint64_t settle(std::uint64_t ng, int anchor) const {
    return inst_.is_customer(anchor) ? (ng & ng_.mask[anchor]) | cbit_[anchor] : ng;
  }
  bool blocked(const Label& L, int j) const { return (L.ng & cbit_[j]) || j == L.iT || j == L.iC; }

  std::optional<Label> extend_truck_arc(const Label& L, const MultiArc& a, const Duals& d) const {
    const Params& P = inst_.params;
    if (a.from != L.iT || !inst_.is_customer(a.to) || blocked(L, a.to)) return std::nullopt;
    if (L.bT < a.e_req - P.tol) return std::nullopt;
    Label N = L;
    const bool opening = L.iC == L.iT;
    N.ng = visit(L.ng, a.to);
    N.k = L.k + 1;
    N.iT = a.to;
    N.tau = L.tau + a.time;
    N.bC = L.fixed ? L.bC : L.bC - a.e_req;
    N.bT = a.direct() ? L.bT - a.e_req : *a.e_rem;
    N.fixed = L.fixed || !a.direct();
    N.nT = opening ? 1 : L.nT + 1;
    if (P.max_leg > 0 && N.nT > P.max_leg) return std::nullopt;
    N.value = L.value - d.u[a.to];
    if (opening && P.launch_retrieve && L.iC != inst_.depot) N.value += P.launch_time;
    N.action = Action::Truck;
    N.arc = &a;
    return N;
  }

  std::optional<Label> extend_combined_arc(const Label& L, const MultiArc& a, const Duals& d) const {
    if (L.iC != L.iT || L.tau != 0.0) return std::nullopt;
    if (a.from != L.iT || !inst_.is_customer(a.to) || blocked(L, a.to)) return std::nullopt;
    if (L.bT < a.e_req - inst_.params.tol) return std::nullopt;
    Label N = L;
    N.ng = visit(L.ng, a.to);
    N.k = L.k + 1;
    N.iC = N.iT = a.to;
    N.bT = N.bC = a.direct() ? L.bT - a.e_req : *a.e_rem;
    N.fixed = false;
    N.nT = 0;
    N.value = L.value + a.time - d.u[a.to];
    N.action = Action::Combined;
    N.arc = &a;
    return N;
  }

  // The shared battery pays the sortie at launch, so without a recharge in between the
  // retrieve-node energy is b_T minus the trip energy.
  std::optional<Label> extend_drone_leg(const Label& L, const Sortie& s, const Duals& d) const {
    const Params& P = inst_.params;
    if (L.iC == L.iT || s.launch != L.iC || s.retrieve != L.iT || s.loop()) return std::nullopt;
    if (blocked(L, s.drone)) return std::nullopt;
    if (s.energy > P.drone_capacity + P.tol || s.energy > L.bC + P.tol) return std::nullopt;
    Label N = L;
    N.ng = settle(visit(L.ng, s.drone), L.iT);
    N.k = L.k + 1;
    N.iC = L.iT;
    N.tau = 0.0;
    N.bT = N.bC = L.fixed ? L.bT : L.bT - s.energy;
    N.fixed = false;
    N.nT = 0;
    N.value = L.value + std::max(L.tau, s.time) - d.u[s.drone];
    if (P.launch_retrieve) N.value += P.retrieve_time;
    N.action = Action::Drone;
    N.sortie = &s;
    return N;
  }

  std::optional<Label> extend_loop(const Label& L, const Sortie& s, const Duals& d) const {
    const Params& P = inst_.params;
    if (!P.loops || !s.loop()) return std::nullopt;
    if (L.iC != L.iT || L.tau != 0.0 || L.fixed || s.launch != L.iT) return std::nullopt;
    if (blocked(L, s.drone) || s.energy > L.bC + P.tol) return std::nullopt;
    Label N = L;
    N.ng = settle(visit(L.ng, s.drone), L.iT);
    N.k = L.k + 1;
    N.bT = N.bC = L.bT - s.energy;
    N.value = L.value + s.time - d.u[s.drone];
    if (P.launch_retrieve) N.value += P.retrieve_time + (L.iT == inst_.depot ? 0.0 : P.launch_time);
    N.action = Action::Loop;
    N.sortie = &s;
    return N;
  }

  // a dominates b (a already stored).
  bool dominated_by(const Label& b, const Label& a, double eps) const {
    if (a.value > b.value + eps) return false;
    if (a.ng & ~b.ng) return false;
    if (a.bC < b.bC - eps || a.bT < b.bT - eps) return false;
    if (inst_.params.max_leg > 0 && a.nT > b.nT) return false;
    if (a.iC != a.iT && a.value + a.tau > b.value + b.tau + eps) return false;
    return true;
  }

  // Runs the labeling; on_complete(value, completion id) is called for each finished route.
  PricingStats run(const Duals& d, const Restrictions& R, const PricingOptions& opt,
                   const std::function<void(double, int)>& on_complete) {
    labels_.clear();
    finals_.clear();
    const int n = static_cast<int>(inst_.customers.size());
    const int depot = inst_.depot;
    PricingStats st;
    st.labels.assign(n + 1, 0);
    st.pruned.assign(n + 1, 0);
    std::vector<int> level{push(initial_label(d))};
    st.labels[0] = 1;
    for (int k = 0; k <= n; ++k) {
      std::unordered_map<std::uint64_t, std::vector<int>> buckets;
      std::vector<int> next;
      auto insert = [&](Label&& N) {
        if (!opt.dominance) {
          next.push_back(push(std::move(N)));
          return;
        }
        const std::uint64_t key = (static_cast<std::uint64_t>(N.iC) * inst_.size() + N.iT) * 2 + (N.fixed ? 1 : 0);
        auto& b = buckets[key];
        for (int id : b)
          if (labels_[id].alive && dominated_by(N, labels_[id], opt.eps)) {
            ++st.pruned[k + 1];
            return;
          }
        for (int id : b)
          if (labels_[id].alive && dominated_by(labels_[id], N, opt.eps)) {
            labels_[id].alive = false;
            ++st.pruned[k + 1];
          }
        std::erase_if(b, [&](int id) { return !labels_[id].alive; });
        const int id = push(std::move(N));
        b.push_back(id);
        next.push_back(id);
      };
      for (int id : level) {
        if (!labels_[id].alive) continue;
        const Label L = labels_[id];
        const bool closed = L.iC == L.iT;
        if (k == n && closed && L.iT != depot) {
          const auto& bucket = g_.bucket(L.iT, depot);
          for (std::size_t q = 0; q < bucket.size(); ++q) {
            const MultiArc& a = bucket[q];
            if (!R.combined_ok[R.idx(L.iT, depot)][q] || L.bT < a.e_req - inst_.params.tol) continue;
            finish(id, L.value + a.time, Action::FinalCombined, &a, nullptr, on_complete, st);
          }
        }
        // Last drone customer, retrieved at the depot end; a closed label launches from its own node.
        if (k == n - 1 && L.iT != depot) {
          const auto& bucket = g_.bucket(L.iT, depot);
          for (std::size_t q = 0; q < bucket.size(); ++q) {
            const MultiArc& a = bucket[q];
            if (!R.truck_only_ok[R.idx(L.iT, depot)][q] || L.bT < a.e_req - inst_.params.tol) continue;
            const double bC = L.fixed ? L.bC : L.bC - a.e_req;
            for (int j : inst_.customers) {
              if (blocked(L, j)) continue;
              const Sortie* s = cat_.find(L.iC, j, depot);
              if (!s || !R.drone_ok(*s) || s->energy > bC + inst_.params.tol) continue;
              double v = L.value + std::max(L.tau + a.time, s->time) - d.u[j];
              if (inst_.params.launch_retrieve) v += inst_.params.retrieve_time + (closed ? inst_.params.launch_time : 0.0);
              finish(id, v, Action::FinalOpen, &a, s, on_complete, st);
            }
          }
        }
        if (k == n) continue;
        for (int j : inst_.customers) {
          if (blocked(L, j)) continue;
          if (!R.no_truck_visit[j]) {
            const auto& bucket = g_.bucket(L.iT, j);
            for (std::size_t q = 0; q < bucket.size(); ++q) {
              const MultiArc& a = bucket[q];
              if (R.truck_only_ok[R.idx(L.iT, j)][q])
                if (auto N = extend_truck_arc(L, a, d)) {
                  N->parent = id;
                  insert(std::move(*N));
                }
              if (closed && R.combined_ok[R.idx(L.iT, j)][q])
                if (auto N = extend_combined_arc(L, a, d)) {
                  N->parent = id;
                  insert(std::move(*N));
                }
            }
          }
          if (R.no_drone_visit[j]) continue;
          if (!closed) {
            const Sortie* s = cat_.find(L.iC, j, L.iT);
            if (s && R.drone_ok(*s))
              if (auto N = extend_drone_leg(L, *s, d)) {
                N->parent = id;
                insert(std::move(*N));
              }
          } else if (inst_.params.loops && !L.fixed) {
            const Sortie* s = cat_.find_loop(L.iT, j);
            if (s && R.drone_ok(*s))
              if (auto N = extend_loop(L, *s, d)) {
                N->parent = id;
                insert(std::move(*N));
              }
          }
        }
      }
      if (k == n) break;
      if (opt.bucket_cap > 0 && opt.dominance) {
        for (auto& [key, b] : buckets) {
          if (b.size() <= opt.bucket_cap) continue;
          std::stable_sort(b.begin(), b.end(), [&](int x, int y) { return labels_[x].value < labels_[y].value; });
          for (std::size_t t = opt.bucket_cap; t < b.size(); ++t) labels_[b[t]].alive = false;
          b.resize(opt.bucket_cap);
        }
      }
      level.clear();
      for (int id : next)
        if (labels_[id].alive) level.push_back(id);
      st.labels[k + 1] = level.size();
      if (opt.trace) *opt.trace << "k=" << (k + 1) << " labels=" << level.size() << " pruned=" << st.pruned[k + 1] << "\n";
    }
    return st;
  }

  CoordinatedRoute reconstruct(int completion) const {
    const Final& f = finals_[completion];
    std::vector<const Label*> chain;
    for (int id = f.parent; id >= 0; id = labels_[id].parent) chain.push_back(&labels_[id]);
    std::reverse(chain.begin(), chain.end());
    CoordinatedRoute r;
    std::optional<std::size_t> open;
    for (const Label* L : chain) {
      switch (L->action) {
        case Action::Truck:
          if (!open) open = r.arcs.size();
          r.arcs.push_back(*L->arc);
          break;
        case Action::Combined:
          r.arcs.push_back(*L->arc);
          break;
        case Action::Drone:
          r.sorties.push_back({*open, r.arcs.size(), *L->sortie});
          open.reset();
          break;
        case Action::Loop:
          r.loops.push_back({r.arcs.size(), *L->sortie});
          break;
        default:
          break;
      }
    }
    if (f.action == Action::FinalOpen && !open) open = r.arcs.size();
    r.arcs.push_back(*f.arc);
    if (f.action == Action::FinalOpen) r.sorties.push_back({*open, r.arcs.size(), *f.sortie});
    return r;
  }

  const std::vector<Label>& labels() const { return labels_; }

 private:
  struct Final {
    int parent;
    Action action;
    const MultiArc* arc;
    const Sortie* sortie;
  };

  int push(Label&& L) {
    labels_.push_back(std::move(L));
    return static_cast<int>(labels_.size()) - 1;
  }
  void finish(int parent, double value, Action a, const MultiArc* arc, const Sortie* s,
              const std::function<void(double, int)>& cb, PricingStats& st) {
    finals_.push_back({parent, a, arc, s});
    ++st.completed;
    cb(value, static_cast<int>(finals_.size()) - 1);
  }

  const Instance& inst_;
  const MultiGraph& g_;
  const SortieCatalog& cat_;
  const NgSets& ng_;
  std::vector<std::uint64_t> cbit_;
  std::vector<Label> labels_;
  std::vector<Final> finals_;
};

inline std::vector<PricedRoute> solve_pricing(const Instance& inst, const MultiGraph& g, const SortieCatalog& cat, const NgSets& ng,
                                              const Duals& d, const Restrictions& R, const PricingOptions& opt,
                                              PricingStats* stats = nullptr) {
  Labeler lab(inst, g, cat, ng);
  std::vector<std::pair<double, int>> found;
  auto st = lab.run(d, R, opt, [&](double v, int id) {
    if (v < -opt.eps) found.emplace_back(v, id);
  });
  if (stats) *stats = st;
  std::stable_sort(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<PricedRoute> out;
  for (std::size_t t = 0; t < found.size() && t < opt.limit; ++t) out.push_back({found[t].first, lab.reconstruct(found[t].second)});
  return out;
}

}  // namespace evtspd
