#pragma once

#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "core.hpp"
#include "multigraph.hpp"

namespace evtspd {

// A drone trip launch -> drone -> retrieve. Loops reuse the struct with launch == retrieve.
// time includes the service dwell at a customer launch node and at the drone node; launch and
// retrieve surcharges are applied by the evaluator.
struct Sortie {
  int launch = 0;
  int drone = 0;
  int retrieve = 0;
  double time = 0.0;
  double energy = 0.0;

  bool loop() const { return launch == retrieve; }
  bool operator==(const Sortie&) const = default;
};

class SortieCatalog {
 public:
  std::vector<Sortie> sorties;
  std::vector<Sortie> loops;

  const Sortie* find(int i, int j, int k) const {
    if (i < 0 || j < 0 || k < 0 || i >= n_ || j >= n_ || k >= n_) return nullptr;
    int idx = index_[(static_cast<std::size_t>(i) * n_ + j) * n_ + k];
    return idx < 0 ? nullptr : &sorties[idx];
  }
  const Sortie* find_loop(int i, int j) const {
    if (i < 0 || j < 0 || i >= n_ || j >= n_) return nullptr;
    int idx = loop_index_[static_cast<std::size_t>(i) * n_ + j];
    return idx < 0 ? nullptr : &loops[idx];
  }
  void build_index(int n) {
    n_ = n;
    index_.assign(static_cast<std::size_t>(n) * n * n, -1);
    loop_index_.assign(static_cast<std::size_t>(n) * n, -1);
    for (std::size_t s = 0; s < sorties.size(); ++s) {
      const Sortie& x = sorties[s];
      index_[(static_cast<std::size_t>(x.launch) * n + x.drone) * n + x.retrieve] = static_cast<int>(s);
    }
    for (std::size_t s = 0; s < loops.size(); ++s) loop_index_[static_cast<std::size_t>(loops[s].launch) * n + loops[s].drone] = static_cast<int>(s);
  }

 private:
  int n_ = 0;
  std::vector<int> index_;
  std::vector<int> loop_index_;
};

// Energy of one drone trip. Under the weight model the outbound leg carries the parcel and the
// return leg flies empty; range scales linearly from 2*Q_D empty to Q_D at full payload.
inline double trip_energy(const Instance& inst, int i, int j, int k) {
  if (!inst.params.weight_range) return inst.e_D(i, j) + inst.e_D(j, k);
  const double W = inst.params.payload_capacity;
  const double w = std::clamp(inst.weight[j], 0.0, W);
  return inst.e_D(i, j) / (2.0 - w / W) + inst.e_D(j, k) / 2.0;
}

inline SortieCatalog feasible_sorties(const Instance& inst) {
  SortieCatalog cat;
  const double QD = inst.params.drone_capacity;
  std::vector<int> c0{inst.depot};
  for (int c : inst.customers) c0.push_back(c);
  for (int i : c0) {
    for (int j : inst.customers) {
      if (j == i || !inst.params.drone_compatible(j)) continue;
      for (int k : c0) {
        if (k == j || k == i) continue;
        const double e = trip_energy(inst, i, j, k);
        if (e > QD) continue;
        cat.sorties.push_back({i, j, k, inst.dwell(i) + inst.c_D(i, j) + inst.dwell(j) + inst.c_D(j, k), e});
      }
      if (inst.params.loops) {
        const double e = trip_energy(inst, i, j, i);
        if (e <= QD) cat.loops.push_back({i, j, i, inst.c_D(i, j) + inst.dwell(j) + inst.c_D(j, i), e});
      }
    }
  }
  cat.build_index(inst.size());
  return cat;
}

// Positions run 0..m for m truck arcs; 0 is the depot start and m the depot end.
struct AnchoredSortie {
  std::size_t launch_pos = 0;
  std::size_t retrieve_pos = 0;
  Sortie sortie;
  bool operator==(const AnchoredSortie&) const = default;
};

struct AnchoredLoop {
  std::size_t pos = 0;
  Sortie loop;
  bool operator==(const AnchoredLoop&) const = default;
};

struct CoordinatedRoute {
  std::vector<MultiArc> arcs;
  std::vector<AnchoredSortie> sorties;  // sorted by launch_pos
  std::vector<AnchoredLoop> loops;      // sorted by pos

  std::size_t last_pos() const { return arcs.size(); }
  int node_at(std::size_t pos, int depot) const { return pos == 0 ? depot : arcs[pos - 1].to; }
  bool operator==(const CoordinatedRoute&) const = default;
};

enum class Violation { None, Structure, Energy, DroneRange, MaxLeg, Incompatible };

struct RouteEval {
  bool feasible = true;
  Violation violation = Violation::None;
  std::string reason;
  // First failing check as 2*pos for a deduction at pos, 2*pos+1 for the arc leaving pos.
  std::size_t violation_index = 0;
  double total_time = 0.0;
  std::vector<double> arrival;    // truck arrival per position
  std::vector<double> departure;  // after sync, loops and launch
  std::vector<double> q_arrival;
  std::vector<double> q_departure;
  std::vector<double> waits;  // per sortie, truck waiting for the drone
  std::vector<double> truck_waits;  // per sortie, drone waiting for the truck
};

inline RouteEval structural_error(std::string why) {
  RouteEval ev;
  ev.feasible = false;
  ev.violation = Violation::Structure;
  ev.reason = std::move(why);
  return ev;
}

inline RouteEval evaluate_route(const Instance& inst, const CoordinatedRoute& r) {
  const Params& P = inst.params;
  const double tol = P.tol;
  const std::size_t m = r.last_pos();
  const int depot = inst.depot;

  for (std::size_t h = 0; h < m; ++h) {
    const MultiArc& a = r.arcs[h];
    if (a.from == a.to) return structural_error("self arc");
    if (h == 0 && a.from != depot) return structural_error("route must start at the depot");
    if (h > 0 && a.from != r.arcs[h - 1].to) return structural_error("arcs do not chain");
    if (h + 1 < m && a.to == depot) return structural_error("depot visited mid-route");
  }
  if (m > 0 && r.arcs.back().to != depot) return structural_error("route must end at the depot");
  std::vector<int> launch_at(m + 1, -1), retrieve_at(m + 1, -1);
  for (std::size_t s = 0; s < r.sorties.size(); ++s) {
    const AnchoredSortie& x = r.sorties[s];
    if (x.launch_pos >= x.retrieve_pos || x.retrieve_pos > m) return structural_error("dangling sortie anchor");
    if (x.launch_pos == 0 && x.retrieve_pos == m) return structural_error("sortie from depot start to depot end");
    if (r.node_at(x.launch_pos, depot) != x.sortie.launch || r.node_at(x.retrieve_pos, depot) != x.sortie.retrieve)
      return structural_error("sortie anchor does not match the truck path");
    if (s > 0 && x.launch_pos < r.sorties[s - 1].retrieve_pos) return structural_error("overlapping sorties");
    launch_at[x.launch_pos] = static_cast<int>(s);
    retrieve_at[x.retrieve_pos] = static_cast<int>(s);
  }
  for (std::size_t l = 0; l < r.loops.size(); ++l) {
    const AnchoredLoop& x = r.loops[l];
    if (x.pos >= m && !(m == 0 && x.pos == 0)) return structural_error("loop anchored at the depot end");
    if (l > 0 && x.pos < r.loops[l - 1].pos) return structural_error("loops out of order");
    if (r.node_at(x.pos, depot) != x.loop.launch) return structural_error("loop anchor does not match the truck path");
    for (const AnchoredSortie& s : r.sorties)
      if (s.launch_pos < x.pos && x.pos < s.retrieve_pos) return structural_error("loop while drone is away");
  }
  if (m == 0 && !r.loops.empty()) return structural_error("loop on an empty route");

  RouteEval ev;
  ev.arrival.assign(m + 1, 0.0);
  ev.departure.assign(m + 1, 0.0);
  ev.q_arrival.assign(m + 1, 0.0);
  ev.q_departure.assign(m + 1, 0.0);
  ev.waits.assign(r.sorties.size(), 0.0);
  ev.truck_waits.assign(r.sorties.size(), 0.0);
  auto fail = [&](Violation v, std::size_t idx, std::string why) {
    if (ev.feasible) {
      ev.feasible = false;
      ev.violation = v;
      ev.violation_index = idx;
      ev.reason = std::move(why);
    }
  };

  for (const AnchoredSortie& s : r.sorties) {
    if (!P.drone_compatible(s.sortie.drone)) fail(Violation::Incompatible, 2 * s.launch_pos, "incompatible drone customer");
    if (s.sortie.energy > P.drone_capacity + tol) fail(Violation::DroneRange, 2 * s.launch_pos, "sortie exceeds drone range");
    if (P.max_leg > 0) {
      int cnt = 0;
      for (std::size_t p = s.launch_pos + 1; p <= s.retrieve_pos; ++p)
        if (inst.is_customer(r.node_at(p, depot))) ++cnt;
      if (cnt > P.max_leg) fail(Violation::MaxLeg, 2 * s.launch_pos, "truck leg too long");
    }
  }
  for (const AnchoredLoop& l : r.loops) {
    if (!P.drone_compatible(l.loop.drone)) fail(Violation::Incompatible, 2 * l.pos, "incompatible drone customer");
    if (l.loop.energy > P.drone_capacity + tol) fail(Violation::DroneRange, 2 * l.pos, "loop exceeds drone range");
  }

  const bool lr = P.launch_retrieve;
  double t = 0.0;
  double q = P.truck_capacity;
  double t_launch = 0.0;
  std::size_t next_loop = 0;
  for (std::size_t pos = 0; pos <= m; ++pos) {
    ev.arrival[pos] = t;
    ev.q_arrival[pos] = q;
    if (retrieve_at[pos] >= 0) {
      const int s = retrieve_at[pos];
      const double truck = t - t_launch;
      const double drone = r.sorties[s].sortie.time;
      ev.waits[s] = std::max(0.0, drone - truck);
      ev.truck_waits[s] = std::max(0.0, truck - drone);
      t = t_launch + std::max(truck, drone);
      if (lr) t += P.retrieve_time;
    }
    const bool at_start = pos == 0;
    while (next_loop < r.loops.size() && r.loops[next_loop].pos == pos) {
      const Sortie& lp = r.loops[next_loop].loop;
      q -= lp.energy;
      if (q < -tol) fail(Violation::Energy, 2 * pos, "loop drains the battery");
      t += lp.time;
      if (lr) t += P.retrieve_time + (at_start ? 0.0 : P.launch_time);
      ++next_loop;
    }
    if (launch_at[pos] >= 0) {
      q -= r.sorties[launch_at[pos]].sortie.energy;
      if (q < -tol) fail(Violation::Energy, 2 * pos, "sortie drains the battery");
      if (lr && !at_start) t += P.launch_time;
      t_launch = t;
    }
    ev.departure[pos] = t;
    ev.q_departure[pos] = q;
    if (pos == m) break;
    const MultiArc& a = r.arcs[pos];
    if (a.e_req > q + tol) fail(Violation::Energy, 2 * pos + 1, "insufficient energy for arc");
    q = a.direct() ? q - a.e_req : *a.e_rem;
    if (q < -tol || q > P.truck_capacity + tol) fail(Violation::Energy, 2 * pos + 1, "energy out of range");
    t += a.time;
  }
  ev.total_time = t;
  return ev;
}

// Visit counts per customer (indexed like inst.customers); ng-routes may exceed one.
inline std::vector<int> visit_counts(const Instance& inst, const CoordinatedRoute& r) {
  std::vector<int> a(inst.customers.size(), 0);
  auto bump = [&](int node) {
    int k = inst.customer_index(node);
    if (k >= 0) ++a[k];
  };
  for (std::size_t h = 0; h + 1 < r.arcs.size(); ++h) bump(r.arcs[h].to);
  for (const auto& s : r.sorties) bump(s.sortie.drone);
  for (const auto& l : r.loops) bump(l.loop.drone);
  return a;
}

inline bool check_cover(const Instance& inst, const CoordinatedRoute& r) {
  for (int c : visit_counts(inst, r))
    if (c != 1) return false;
  return true;
}

inline std::string format_route(const Instance& inst, const CoordinatedRoute& r, const RouteEval& ev) {
  std::ostringstream os;
  os << std::setprecision(10);
  os << "truck: " << inst.depot;
  for (const MultiArc& a : r.arcs) os << " -[" << a.p << "]-> " << a.to;
  os << "\n";
  for (std::size_t s = 0; s < r.sorties.size(); ++s) {
    const Sortie& x = r.sorties[s].sortie;
    os << "sortie: " << x.launch << " ~ " << x.drone << " ~ " << x.retrieve << " wait=" << (s < ev.waits.size() ? ev.waits[s] : 0.0) << "\n";
  }
  for (const AnchoredLoop& l : r.loops) os << "loop: " << l.loop.launch << " ~ " << l.loop.drone << " ~ " << l.loop.launch << "\n";
  os << "total=" << ev.total_time << "\n";
  return os.str();
}

// Upper bound on any route's duration: every multigraph arc, the slowest trip per customer and all surcharges.
inline double horizon_bound(const Instance& inst, const MultiGraph& g, const SortieCatalog& cat) {
  double h = 0.0;
  for (int i : g.nodes)
    for (int j : g.nodes)
      if (i != j)
        for (const MultiArc& a : g.bucket(i, j)) h += a.time;
  std::vector<double> slowest(inst.size(), 0.0);
  for (const Sortie& s : cat.sorties) slowest[s.drone] = std::max(slowest[s.drone], s.time);
  for (const Sortie& s : cat.loops) slowest[s.drone] = std::max(slowest[s.drone], s.time);
  for (double v : slowest) h += v;
  h += static_cast<double>(inst.customers.size()) * (inst.params.launch_time + inst.params.retrieve_time);
  return h;
}

}  // namespace evtspd
