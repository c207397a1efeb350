#pragma once

#include <algorithm>
#include <chrono>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "core.hpp"
#include "multigraph.hpp"
#include "routes.hpp"

namespace evtspd {

// Route in node terms; anchors are node ids and positions are derived on conversion.
struct Plan {
  struct Trip {
    int launch = 0;
    int drone = 0;
    int retrieve = 0;
    bool operator==(const Trip&) const = default;
  };
  struct Loop {
    int anchor = 0;
    int drone = 0;
    bool operator==(const Loop&) const = default;
  };
  std::vector<int> truck;  // customers in visiting order
  std::vector<Trip> trips;
  std::vector<Loop> loops;
  std::map<std::pair<int, int>, int> choice;  // bucket position per hop; missing = 0

  bool operator==(const Plan&) const = default;
};

struct ScoredPlan {
  Plan plan;
  double cost = std::numeric_limits<double>::infinity();
};

enum class Operator { MakeFly, PushLeft, PushRight, TwoOpt, Exchange11, Exchange21, Exchange22, RelocateCustomer, Exchange31, Exchange32, ReinsertCS };

inline const std::vector<Operator>& default_operator_order() {
  static const std::vector<Operator> order{Operator::MakeFly,    Operator::PushLeft,   Operator::PushRight,        Operator::TwoOpt,
                                           Operator::Exchange11, Operator::Exchange21, Operator::Exchange22,       Operator::RelocateCustomer,
                                           Operator::Exchange31, Operator::Exchange32, Operator::ReinsertCS};
  return order;
}

inline std::string operator_name(Operator op) {
  switch (op) {
    case Operator::MakeFly: return "MakeFly";
    case Operator::PushLeft: return "PushLeft";
    case Operator::PushRight: return "PushRight";
    case Operator::TwoOpt: return "TwoOpt";
    case Operator::Exchange11: return "Exchange11";
    case Operator::Exchange21: return "Exchange21";
    case Operator::Exchange22: return "Exchange22";
    case Operator::RelocateCustomer: return "RelocateCustomer";
    case Operator::Exchange31: return "Exchange31";
    case Operator::Exchange32: return "Exchange32";
    case Operator::ReinsertCS: return "ReinsertCS";
  }
  return "?";
}

struct VnsConfig {
  int max_iteration = 200;
  int max_stopping = 30;
  std::vector<Operator> order = default_operator_order();
  int shake_strength = 2;
  std::uint64_t seed = 1;
  double time_limit = 0.0;  // seconds, 0 = none
  int max_span = 3;          // truck hops a constructed sortie may cover

  void validate() const {
    if (max_iteration < 0 || max_stopping < 1 || shake_strength < 1 || max_span < 1) throw std::invalid_argument("invalid VNS configuration");
    if (order.empty()) throw std::invalid_argument("VNS operator order is empty");
  }
};

struct VnsResult {
  CoordinatedRoute route;
  double cost = std::numeric_limits<double>::infinity();
  double initial_cost = std::numeric_limits<double>::infinity();
  int iterations = 0;
  int shakes = 0;
  double wall_time_s = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> best_trace;  // global best after each iteration
};

class Vns {
 public:
  Vns(const Instance& inst, const MultiGraph& g, const SortieCatalog& cat) : inst_(inst), g_(g), cat_(cat) {}

  std::optional<CoordinatedRoute> to_route(const Plan& p) const {
    const int depot = inst_.depot;
    const std::size_t m = p.truck.size() + 1;
    std::vector<int> seq;
    seq.reserve(m + 1);
    seq.push_back(depot);
    seq.insert(seq.end(), p.truck.begin(), p.truck.end());
    seq.push_back(depot);
    CoordinatedRoute r;
    r.arcs.reserve(m);
    for (std::size_t h = 0; h < m; ++h) {
      const auto& b = g_.bucket(seq[h], seq[h + 1]);
      if (b.empty()) return std::nullopt;
      auto it = p.choice.find({seq[h], seq[h + 1]});
      std::size_t q = it == p.choice.end() ? 0 : static_cast<std::size_t>(it->second);
      if (q >= b.size()) q = 0;
      r.arcs.push_back(b[q]);
    }
    std::vector<int> pos(inst_.size(), -1);
    for (std::size_t h = 1; h < m; ++h) pos[seq[h]] = static_cast<int>(h);
    auto launch_pos = [&](int v) { return v == depot ? 0 : pos[v]; };
    auto retrieve_pos = [&](int v) { return v == depot ? static_cast<int>(m) : pos[v]; };
    for (const Plan::Trip& t : p.trips) {
      const int l = launch_pos(t.launch);
      const int k = retrieve_pos(t.retrieve);
      if (l < 0 || k < 0 || l >= k) return std::nullopt;
      const Sortie* s = cat_.find(t.launch, t.drone, t.retrieve);
      if (!s) return std::nullopt;
      r.sorties.push_back({static_cast<std::size_t>(l), static_cast<std::size_t>(k), *s});
    }
    std::sort(r.sorties.begin(), r.sorties.end(), [](const auto& a, const auto& b) { return a.launch_pos < b.launch_pos; });
    for (const Plan::Loop& l : p.loops) {
      const int at = launch_pos(l.anchor);
      const Sortie* s = cat_.find_loop(l.anchor, l.drone);
      if (at < 0 || !s) return std::nullopt;
      r.loops.push_back({static_cast<std::size_t>(at), *s});
    }
    std::stable_sort(r.loops.begin(), r.loops.end(), [](const auto& a, const auto& b) { return a.pos < b.pos; });
    return r;
  }

  double cost(const Plan& p) const {
    auto r = to_route(p);
    if (!r) return std::numeric_limits<double>::infinity();
    RouteEval ev = evaluate_route(inst_, *r);
    return ev.feasible ? ev.total_time : std::numeric_limits<double>::infinity();
  }

  // Switches hop arcs (direct <-> refuel paths) at or before the first energy violation, cheapest
  // fix first, until the plan is feasible. Each accepted switch pushes the violation strictly later.
  std::optional<ScoredPlan> gain_feasibility(Plan p) const {
    for (;;) {
      auto r = to_route(p);
      if (!r) return std::nullopt;
      const RouteEval ev = evaluate_route(inst_, *r);
      if (ev.feasible) return ScoredPlan{std::move(p), ev.total_time};
      if (ev.violation != Violation::Energy) return std::nullopt;
      const std::size_t vi = ev.violation_index;
      std::optional<Plan> best;
      double best_time = std::numeric_limits<double>::infinity();
      for (std::size_t h = 0; 2 * h + 1 <= vi && h < r->arcs.size(); ++h) {
        const std::pair<int, int> key{r->arcs[h].from, r->arcs[h].to};
        const auto& b = g_.bucket(key.first, key.second);
        const int cur = g_.position(key.first, key.second, r->arcs[h].p);
        for (std::size_t q = 0; q < b.size(); ++q) {
          if (static_cast<int>(q) == cur) continue;
          Plan c = p;
          c.choice[key] = static_cast<int>(q);
          auto r2 = to_route(c);
          if (!r2) continue;
          const RouteEval e2 = evaluate_route(inst_, *r2);
          const bool fixed = e2.feasible || (e2.violation == Violation::Energy && e2.violation_index > vi);
          if (fixed && e2.total_time < best_time) {
            best_time = e2.total_time;
            best = std::move(c);
          }
        }
      }
      if (!best) return std::nullopt;
      p = std::move(*best);
    }
  }

  // Savings construction of a truck-only route; merges that break energy feasibility get a
  // station repair before being rejected.
  ScoredPlan mcws_initial() const {
    const auto& C = inst_.customers;
    const int depot = inst_.depot;
    const int n = inst_.size();
    if (C.empty()) throw std::runtime_error("instance has no customers");
    std::vector<std::vector<int>> routes;
    std::vector<int> owner(n, -1);
    auto solo = [&](const std::vector<int>& seq) {
      Plan p;
      p.truck = seq;
      return gain_feasibility(std::move(p));
    };
    for (int c : C) {
      if (!solo({c})) throw std::runtime_error("customer " + std::to_string(c) + " cannot be reached by the truck");
      owner[c] = static_cast<int>(routes.size());
      routes.push_back({c});
    }
    struct Saving {
      double s;
      int i, j;
    };
    std::vector<Saving> sv;
    for (int i : C)
      for (int j : C)
        if (i != j) sv.push_back({inst_.c_T(i, depot) + inst_.c_T(depot, j) - inst_.c_T(i, j), i, j});
    std::stable_sort(sv.begin(), sv.end(), [](const Saving& a, const Saving& b) { return a.s > b.s; });
    for (const Saving& s : sv) {
      if (s.s <= 0) break;
      const int ri = owner[s.i], rj = owner[s.j];
      if (ri == rj || routes[ri].back() != s.i || routes[rj].front() != s.j) continue;
      std::vector<int> merged = routes[ri];
      merged.insert(merged.end(), routes[rj].begin(), routes[rj].end());
      if (!solo(merged)) continue;
      for (int v : routes[rj]) owner[v] = ri;
      routes[ri] = std::move(merged);
      routes[rj].clear();
    }
    std::erase_if(routes, [](const auto& r) { return r.empty(); });
    // Leftover tours: cheapest feasible concatenation, either orientation of the second.
    while (routes.size() > 1) {
      std::optional<ScoredPlan> best;
      std::size_t ba = 0, bb = 0;
      for (std::size_t a = 0; a < routes.size(); ++a)
        for (std::size_t b = 0; b < routes.size(); ++b) {
          if (a == b) continue;
          for (int rev = 0; rev < 2; ++rev) {
            std::vector<int> seq = routes[a];
            if (rev) seq.insert(seq.end(), routes[b].rbegin(), routes[b].rend());
            else seq.insert(seq.end(), routes[b].begin(), routes[b].end());
            auto sp = solo(seq);
            if (sp && (!best || sp->cost < best->cost)) {
              best = std::move(sp);
              ba = a;
              bb = b;
            }
          }
        }
      if (!best) throw std::runtime_error("no energy-feasible truck route found");
      routes[ba] = best->plan.truck;
      routes.erase(routes.begin() + static_cast<std::ptrdiff_t>(bb));
    }
    auto out = solo(routes.front());
    if (!out) throw std::runtime_error("no energy-feasible truck route found");
    return *out;
  }

  // Best single truck-to-drone conversion, or nothing when no conversion saves time.
  std::optional<ScoredPlan> make_fly_step(const ScoredPlan& cur, int max_span = 3) const {
    std::optional<ScoredPlan> best;
    double best_cost = cur.cost - 1e-9;
    const Plan& p = cur.plan;
    for (std::size_t t = 0; t < p.truck.size(); ++t) {
      const int c = p.truck[t];
      if (!inst_.params.drone_compatible(c)) continue;
      for (bool widen : {false, true}) {
        if (widen && !is_anchor(p, c)) break;
        auto base = detach(p, t, widen);
        if (!base) continue;
        for_each_anchor(*base, c, max_span, [&](Plan&& cand) {
          auto sp = gain_feasibility(std::move(cand));
          if (sp && sp->cost < best_cost) {
            best_cost = sp->cost;
            best = std::move(sp);
          }
          return false;
        });
      }
    }
    return best;
  }

  // Removes truck[t]. Sorties anchored there move that end one node outward (widen) or inward;
  // loops move to the previous node.
  std::optional<Plan> detach(const Plan& p, std::size_t t, bool widen) const {
    const int c = p.truck[t];
    Plan base = p;
    base.truck.erase(base.truck.begin() + static_cast<std::ptrdiff_t>(t));
    if (base.truck.empty()) return std::nullopt;
    const int prev = t == 0 ? inst_.depot : p.truck[t - 1];
    const int next = t + 1 == p.truck.size() ? inst_.depot : p.truck[t + 1];
    for (auto& tr : base.trips) {
      if (tr.launch == c) tr.launch = widen ? prev : next;
      if (tr.retrieve == c) tr.retrieve = widen ? next : prev;
      if (tr.launch == tr.retrieve) return std::nullopt;
    }
    for (auto& l : base.loops)
      if (l.anchor == c) l.anchor = prev;
    return base;
  }

  ScoredPlan make_fly(ScoredPlan cur, int max_span = 3) const {
    while (auto nxt = make_fly_step(cur, max_span)) cur = std::move(*nxt);
    return cur;
  }

  // First improving move of one operator, every candidate passed through the repair.
  std::optional<ScoredPlan> neighborhood(Operator op, const ScoredPlan& cur, std::mt19937_64& rng, int max_span = 3) const {
    if (op == Operator::MakeFly) return make_fly_step(cur, max_span);
    const Plan& p = cur.plan;
    std::optional<ScoredPlan> found;
    auto accept = [&](Plan&& cand) {
      if (cand == p) return false;
      auto sp = gain_feasibility(std::move(cand));
      if (sp && sp->cost < cur.cost - 1e-9) {
        found = std::move(sp);
        return true;
      }
      return false;
    };
    const std::size_t n = p.truck.size();
    switch (op) {
      case Operator::PushLeft:
      case Operator::PushRight: {
        const bool left = op == Operator::PushLeft;
        const std::vector<int> seq = sequence(p);
        for (std::size_t s = 0; s < p.trips.size(); ++s) {
          const Plan::Trip& t = p.trips[s];
          const int at = left ? index_in(seq, t.launch, true) : index_in(seq, t.retrieve, false);
          const int to = left ? at - 1 : at + 1;
          if (at < 0 || to < 0 || to >= static_cast<int>(seq.size())) continue;
          Plan c = p;
          (left ? c.trips[s].launch : c.trips[s].retrieve) = seq[to];
          if (accept(std::move(c))) return found;
        }
        break;
      }
      case Operator::TwoOpt: {
        for (std::size_t i = 0; i + 1 < n; ++i)
          for (std::size_t j = i + 1; j < n; ++j) {
            Plan c = p;
            std::reverse(c.truck.begin() + static_cast<std::ptrdiff_t>(i), c.truck.begin() + static_cast<std::ptrdiff_t>(j) + 1);
            auto inside = [&](int v) {
              for (std::size_t k = i; k <= j; ++k)
                if (p.truck[k] == v) return true;
              return false;
            };
            for (auto& t : c.trips)
              if (inside(t.launch) && inside(t.retrieve)) std::swap(t.launch, t.retrieve);
            if (accept(std::move(c))) return found;
          }
        break;
      }
      case Operator::Exchange11:
      case Operator::Exchange21:
      case Operator::Exchange22:
      case Operator::Exchange31:
      case Operator::Exchange32: {
        const auto [a, b] = exchange_sizes(op);
        for (std::size_t i = 0; i + a <= n; ++i)
          for (std::size_t j = 0; j + b <= n; ++j) {
            if (!(i + a <= j || j + b <= i)) continue;
            if (a == b && j < i) continue;
            Plan c = p;
            c.truck = swap_segments(p.truck, i, a, j, b);
            if (accept(std::move(c))) return found;
          }
        break;
      }
      case Operator::RelocateCustomer: {
        // Truck customers first try the drone, then another truck slot; drone customers try new anchors, then the truck.
        for (std::size_t t = 0; t < n; ++t) {
          const int c = p.truck[t];
          if (is_anchor(p, c)) continue;
          Plan base = p;
          base.truck.erase(base.truck.begin() + static_cast<std::ptrdiff_t>(t));
          if (base.truck.empty()) continue;
          if (inst_.params.drone_compatible(c) && for_each_anchor(base, c, inst_.size(), accept)) return found;
          for (std::size_t q = 0; q <= base.truck.size(); ++q) {
            if (q == t) continue;
            Plan x = base;
            x.truck.insert(x.truck.begin() + static_cast<std::ptrdiff_t>(q), c);
            if (accept(std::move(x))) return found;
          }
        }
        for (std::size_t s = 0; s < p.trips.size(); ++s) {
          Plan base = p;
          const int c = p.trips[s].drone;
          base.trips.erase(base.trips.begin() + static_cast<std::ptrdiff_t>(s));
          if (for_each_anchor(base, c, max_span, accept)) return found;
          for (std::size_t q = 0; q <= base.truck.size(); ++q) {
            Plan x = base;
            x.truck.insert(x.truck.begin() + static_cast<std::ptrdiff_t>(q), c);
            if (accept(std::move(x))) return found;
          }
        }
        break;
      }
      case Operator::ReinsertCS: {
        auto r = to_route(p);
        if (!r) break;
        std::vector<std::size_t> refuel;
        for (std::size_t h = 0; h < r->arcs.size(); ++h)
          if (!r->arcs[h].direct()) refuel.push_back(h);
        if (refuel.empty()) break;
        const std::size_t off = uniform_index(rng, refuel.size());
        for (std::size_t k = 0; k < refuel.size(); ++k) {
          const MultiArc& a = r->arcs[refuel[(off + k) % refuel.size()]];
          const auto& b = g_.bucket(a.from, a.to);
          for (std::size_t q = 0; q < b.size(); ++q) {
            if (b[q].p == a.p) continue;
            Plan c = p;
            c.choice[{a.from, a.to}] = static_cast<int>(q);
            if (accept(std::move(c))) return found;
          }
        }
        break;
      }
      default:
        break;
    }
    return found;
  }

  // Truck-order perturbation plus random mode relocations, then repair. Falls back to the input.
  ScoredPlan shake(const ScoredPlan& from, int strength, std::mt19937_64& rng) const {
    Plan p = from.plan;
    const std::size_t n = p.truck.size();
    if (n >= 8) {
      std::vector<std::size_t> cut;
      while (cut.size() < 3) {
        const std::size_t x = 1 + uniform_index(rng, n - 1);
        if (std::find(cut.begin(), cut.end(), x) == cut.end()) cut.push_back(x);
      }
      std::sort(cut.begin(), cut.end());
      std::vector<int> t(p.truck.begin(), p.truck.begin() + static_cast<std::ptrdiff_t>(cut[0]));
      t.insert(t.end(), p.truck.begin() + static_cast<std::ptrdiff_t>(cut[1]), p.truck.begin() + static_cast<std::ptrdiff_t>(cut[2]));
      t.insert(t.end(), p.truck.begin() + static_cast<std::ptrdiff_t>(cut[0]), p.truck.begin() + static_cast<std::ptrdiff_t>(cut[1]));
      t.insert(t.end(), p.truck.begin() + static_cast<std::ptrdiff_t>(cut[2]), p.truck.end());
      p.truck = std::move(t);
    } else if (n >= 2) {
      std::size_t i = uniform_index(rng, n), j = uniform_index(rng, n);
      if (i > j) std::swap(i, j);
      if (i == j) j = std::min(n - 1, i + 1), i = j - 1;
      std::reverse(p.truck.begin() + static_cast<std::ptrdiff_t>(i), p.truck.begin() + static_cast<std::ptrdiff_t>(j) + 1);
    }
    sanitize(p);
    const auto& C = inst_.customers;
    for (int k = 0; k < strength; ++k) {
      const int c = C[uniform_index(rng, C.size())];
      auto tr = std::find(p.truck.begin(), p.truck.end(), c);
      if (tr != p.truck.end()) {
        if (is_anchor(p, c) || p.truck.size() < 2) continue;
        p.truck.erase(tr);
        const bool fly = inst_.params.drone_compatible(c) && (rng() & 1u);
        bool placed = false;
        if (fly) {
          const std::vector<int> seq = sequence(p);
          const std::size_t M = seq.size() - 1;
          const std::size_t a = uniform_index(rng, M);
          const std::size_t b = a + 1 + uniform_index(rng, std::min<std::size_t>(3, M - a));
          if (!(a == 0 && b == M) && cat_.find(seq[a], c, seq[b])) {
            p.trips.push_back({seq[a], c, seq[b]});
            placed = true;
          }
        }
        if (!placed) p.truck.insert(p.truck.begin() + static_cast<std::ptrdiff_t>(uniform_index(rng, p.truck.size() + 1)), c);
      } else {
        std::erase_if(p.trips, [&](const Plan::Trip& t) { return t.drone == c; });
        std::erase_if(p.loops, [&](const Plan::Loop& l) { return l.drone == c; });
        p.truck.insert(p.truck.begin() + static_cast<std::ptrdiff_t>(uniform_index(rng, p.truck.size() + 1)), c);
      }
      sanitize(p);
    }
    if (auto sp = gain_feasibility(p)) return *sp;
    Plan bare;
    bare.truck = p.truck;
    for (const auto& t : p.trips) bare.truck.push_back(t.drone);
    for (const auto& l : p.loops) bare.truck.push_back(l.drone);
    bare.choice = p.choice;
    if (auto sp = gain_feasibility(bare)) return *sp;
    return from;
  }

  // Drops sorties and loops the current truck order cannot host; their customers return to the truck
  // right after the launch node.
  void sanitize(Plan& p) const {
    const std::vector<int> seq = sequence(p);
    std::vector<Plan::Trip> keep;
    std::vector<int> homeless;
    std::vector<std::pair<int, int>> spans;
    std::vector<Plan::Trip> trips = p.trips;
    std::sort(trips.begin(), trips.end(), [&](const auto& a, const auto& b) { return index_in(seq, a.launch, true) < index_in(seq, b.launch, true); });
    int last = 0;
    for (const auto& t : trips) {
      const int l = index_in(seq, t.launch, true), k = index_in(seq, t.retrieve, false);
      if (l < 0 || k < 0 || l >= k || l < last || !cat_.find(t.launch, t.drone, t.retrieve)) {
        homeless.push_back(t.drone);
        continue;
      }
      keep.push_back(t);
      spans.emplace_back(l, k);
      last = k;
    }
    std::vector<Plan::Loop> lk;
    for (const auto& l : p.loops) {
      const int at = index_in(seq, l.anchor, true);
      bool ok = at >= 0 && at + 1 < static_cast<int>(seq.size()) && cat_.find_loop(l.anchor, l.drone);
      for (const auto& [a, b] : spans)
        if (a < at && at < b) ok = false;
      if (ok) lk.push_back(l);
      else homeless.push_back(l.drone);
    }
    p.trips = std::move(keep);
    p.loops = std::move(lk);
    for (int c : homeless) p.truck.push_back(c);
  }

  VnsResult solve(const VnsConfig& cfg) const {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };
    std::mt19937_64 rng(cfg.seed);
    ScoredPlan init = mcws_initial();
    init = make_fly(std::move(init), cfg.max_span);
    VnsResult res;
    res.seed = cfg.seed;
    res.initial_cost = init.cost;
    ScoredPlan best = init, cur = init;
    int i = 0, p = 0;
    const std::size_t L = cfg.order.size();
    while (i < cfg.max_iteration && p < cfg.max_stopping) {
      if (cfg.time_limit > 0 && elapsed() > cfg.time_limit) break;
      std::size_t l = 0;
      while (l < L) {
        auto nxt = neighborhood(cfg.order[l], cur, rng, cfg.max_span);
        if (nxt) {
          cur = std::move(*nxt);
          if (cur.cost < best.cost - 1e-9) {
            best = cur;
            p = 0;
          }
          l = 0;
        } else {
          ++l;
        }
        if (cfg.time_limit > 0 && elapsed() > cfg.time_limit) break;
      }
      cur = shake(best, cfg.shake_strength + p / 5, rng);
      ++res.shakes;
      ++p;
      ++i;
      res.best_trace.push_back(best.cost);
    }
    res.iterations = i;
    res.cost = best.cost;
    res.route = *to_route(best.plan);
    res.wall_time_s = elapsed();
    return res;
  }

 private:
  std::vector<int> sequence(const Plan& p) const {
    std::vector<int> seq{inst_.depot};
    seq.insert(seq.end(), p.truck.begin(), p.truck.end());
    seq.push_back(inst_.depot);
    return seq;
  }
  // Depot resolves to the start for launches and the end for retrievals.
  int index_in(const std::vector<int>& seq, int v, bool launch) const {
    if (v == inst_.depot) return launch ? 0 : static_cast<int>(seq.size()) - 1;
    for (std::size_t k = 1; k + 1 < seq.size(); ++k)
      if (seq[k] == v) return static_cast<int>(k);
    return -1;
  }
  static bool is_anchor(const Plan& p, int c) {
    for (const auto& t : p.trips)
      if (t.launch == c || t.retrieve == c) return true;
    for (const auto& l : p.loops)
      if (l.anchor == c) return true;
    return false;
  }
  static std::pair<std::size_t, std::size_t> exchange_sizes(Operator op) {
    switch (op) {
      case Operator::Exchange21: return {2, 1};
      case Operator::Exchange22: return {2, 2};
      case Operator::Exchange31: return {3, 1};
      case Operator::Exchange32: return {3, 2};
      default: return {1, 1};
    }
  }
  static std::vector<int> swap_segments(const std::vector<int>& t, std::size_t i, std::size_t a, std::size_t j, std::size_t b) {
    if (j < i) {
      std::swap(i, j);
      std::swap(a, b);
    }
    std::vector<int> out(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(i));
    out.insert(out.end(), t.begin() + static_cast<std::ptrdiff_t>(j), t.begin() + static_cast<std::ptrdiff_t>(j + b));
    out.insert(out.end(), t.begin() + static_cast<std::ptrdiff_t>(i + a), t.begin() + static_cast<std::ptrdiff_t>(j));
    out.insert(out.end(), t.begin() + static_cast<std::ptrdiff_t>(i), t.begin() + static_cast<std::ptrdiff_t>(i + a));
    out.insert(out.end(), t.begin() + static_cast<std::ptrdiff_t>(j + b), t.end());
    return out;
  }
  // Calls f on each plan that serves c by drone from `base`; stops early when f returns true.
  template <class F>
  bool for_each_anchor(const Plan& base, int c, int max_span, F&& f) const {
    const std::vector<int> seq = sequence(base);
    const std::size_t M = seq.size() - 1;
    for (std::size_t a = 0; a < M; ++a)
      for (std::size_t b = a + 1; b <= M && b <= a + static_cast<std::size_t>(max_span); ++b) {
        if (a == 0 && b == M) continue;
        if (!cat_.find(seq[a], c, seq[b])) continue;
        Plan x = base;
        x.trips.push_back({seq[a], c, seq[b]});
        if (f(std::move(x))) return true;
      }
    if (inst_.params.loops)
      for (std::size_t a = 0; a < M; ++a) {
        if (!cat_.find_loop(seq[a], c)) continue;
        Plan x = base;
        x.loops.push_back({seq[a], c});
        if (f(std::move(x))) return true;
      }
    return false;
  }

  const Instance& inst_;
  const MultiGraph& g_;
  const SortieCatalog& cat_;
};

inline VnsResult vns_solve(const Instance& inst, const MultiGraph& g, const SortieCatalog& cat, const VnsConfig& cfg = {}) {
  return Vns(inst, g, cat).solve(cfg);
}

}  // namespace evtspd
