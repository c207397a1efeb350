#pragma once

#include <cmath>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "core.hpp"
#include "multigraph.hpp"
#include "routes.hpp"

namespace evtspd {

struct Column {
  CoordinatedRoute route;
  double cost = 0.0;
  std::vector<int> a;  // visits per customer index
  bool artificial = false;
};

inline Column make_column(const Instance& inst, const CoordinatedRoute& r) {
  Column c;
  c.route = r;
  c.cost = evaluate_route(inst, r).total_time;
  c.a = visit_counts(inst, r);
  return c;
}

inline Column artificial_column(std::size_t n_customers, double cost) {
  Column c;
  c.cost = cost;
  c.a.assign(n_customers, 1);
  c.artificial = true;
  return c;
}

struct MasterSolution {
  std::vector<double> lambda;
  double u0 = 0.0;
  std::vector<double> u;  // per customer index
  double objective = 0.0;
  std::vector<int> basis;
  int iterations = 0;
};

// Dense revised simplex on min c'x, Ax = 1, x >= 0 with one convexity row and one row per customer.
// Row slots that no column covers stay basic as fixed-at-zero placeholders (negative basis entries).
class RestrictedMaster {
 public:
  explicit RestrictedMaster(std::size_t n_customers, double eps = 1e-7) : n_(n_customers), eps_(eps) {}

  const std::vector<Column>& columns() const { return cols_; }
  std::size_t rows() const { return n_ + 1; }

  // Adds without checks; used for the artificial column and pool columns.
  void push(Column c) { cols_.push_back(std::move(c)); }

  bool is_duplicate(const Column& c) const {
    for (const Column& o : cols_)
      if (!o.artificial && o.a == c.a && std::abs(o.cost - c.cost) <= eps_) return true;
    return false;
  }

  double reduced_cost(const Column& c) const {
    double rc = c.cost - last_.u0;
    for (std::size_t i = 0; i < n_; ++i) rc -= c.a[i] * last_.u[i];
    return rc;
  }

  // Returns the number accepted; rejected columns are described in `diag` when given.
  int add_columns(std::vector<Column> cs, std::string* diag = nullptr) {
    int added = 0;
    for (Column& c : cs) {
      if (solved_ && reduced_cost(c) >= -eps_) {
        if (diag) *diag += "rejected: nonnegative reduced cost\n";
        continue;
      }
      if (is_duplicate(c)) {
        if (diag) *diag += "rejected: duplicate column\n";
        continue;
      }
      cols_.push_back(std::move(c));
      ++added;
    }
    return added;
  }

  const MasterSolution& solve() {
    const std::size_t m = rows();
    if (basis_.empty()) {
      int art = -1;
      for (std::size_t j = 0; j < cols_.size() && art < 0; ++j)
        if (cols_[j].artificial) art = static_cast<int>(j);
      if (art < 0) throw std::logic_error("master needs the artificial column");
      basis_.assign(m, -1);
      basis_[0] = art;
      for (std::size_t r = 1; r < m; ++r) basis_[r] = -1 - static_cast<int>(r);
    }
    std::vector<double> B(m * m), Binv(m * m), xB(m), pi(m), alpha(m), col(m);
    auto column_of = [&](int j, std::vector<double>& out) {
      std::fill(out.begin(), out.end(), 0.0);
      if (j < 0) {
        out[static_cast<std::size_t>(-1 - j)] = 1.0;
        return;
      }
      out[0] = 1.0;
      for (std::size_t i = 0; i < n_; ++i) out[i + 1] = cols_[j].a[i];
    };
    auto cost_of = [&](int j) { return j < 0 ? 0.0 : cols_[j].cost; };
    int degenerate = 0;
    int iters = 0;
    for (;;) {
      for (std::size_t r = 0; r < m; ++r) {
        column_of(basis_[r], col);
        for (std::size_t i = 0; i < m; ++i) B[i * m + r] = col[i];
      }
      invert(B, Binv, m);
      for (std::size_t i = 0; i < m; ++i) {
        double s = 0;
        for (std::size_t k = 0; k < m; ++k) s += Binv[i * m + k];
        xB[i] = s;
      }
      for (std::size_t k = 0; k < m; ++k) {
        double s = 0;
        for (std::size_t r = 0; r < m; ++r) s += cost_of(basis_[r]) * Binv[r * m + k];
        pi[k] = s;
      }
      std::vector<char> in_basis(cols_.size(), 0);
      for (int b : basis_)
        if (b >= 0) in_basis[b] = 1;
      int enter = -1;
      double best = -eps_;
      const bool bland = degenerate > 50;
      for (std::size_t j = 0; j < cols_.size(); ++j) {
        if (in_basis[j]) continue;
        double rc = cols_[j].cost - pi[0];
        for (std::size_t i = 0; i < n_; ++i) rc -= cols_[j].a[i] * pi[i + 1];
        if (rc < best) {
          best = rc;
          enter = static_cast<int>(j);
          if (bland) break;
        }
      }
      if (enter < 0) break;
      column_of(enter, col);
      for (std::size_t i = 0; i < m; ++i) {
        double s = 0;
        for (std::size_t k = 0; k < m; ++k) s += Binv[i * m + k] * col[k];
        alpha[i] = s;
      }
      int leave = -1;
      double ratio = std::numeric_limits<double>::infinity();
      bool placeholder = false;
      for (std::size_t r = 0; r < m; ++r) {
        if (basis_[r] < 0) {
          // Placeholders are fixed at zero; any movement evicts them first.
          if (!placeholder && std::abs(alpha[r]) > 1e-9) {
            leave = static_cast<int>(r);
            ratio = 0.0;
            placeholder = true;
          }
          continue;
        }
        if (placeholder || alpha[r] <= 1e-9) continue;
        const double t = std::max(0.0, xB[r]) / alpha[r];
        if (leave < 0 || t < ratio - 1e-12 || (std::abs(t - ratio) <= 1e-12 && basis_[r] < basis_[leave])) {
          leave = static_cast<int>(r);
          ratio = t;
        }
      }
      if (leave < 0) throw std::logic_error("master LP unbounded");
      degenerate = ratio <= 1e-12 ? degenerate + 1 : 0;
      basis_[leave] = enter;
      if (++iters > 100000) throw std::logic_error("simplex iteration limit");
    }
    last_ = MasterSolution{};
    last_.lambda.assign(cols_.size(), 0.0);
    double obj = 0;
    for (std::size_t r = 0; r < m; ++r)
      if (basis_[r] >= 0) {
        last_.lambda[basis_[r]] = std::max(0.0, xB[r]);
        obj += cols_[basis_[r]].cost * last_.lambda[basis_[r]];
      }
    last_.u0 = pi[0];
    last_.u.assign(pi.begin() + 1, pi.end());
    last_.objective = obj;
    last_.basis = basis_;
    last_.iterations = iters;
    solved_ = true;
    return last_;
  }

  const MasterSolution& last() const { return last_; }

 private:
  static void invert(const std::vector<double>& A, std::vector<double>& inv, std::size_t m) {
    std::vector<double> a = A;
    inv.assign(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i) inv[i * m + i] = 1.0;
    for (std::size_t c = 0; c < m; ++c) {
      std::size_t piv = c;
      for (std::size_t r = c + 1; r < m; ++r)
        if (std::abs(a[r * m + c]) > std::abs(a[piv * m + c])) piv = r;
      if (std::abs(a[piv * m + c]) < 1e-12) throw std::logic_error("singular basis");
      if (piv != c)
        for (std::size_t k = 0; k < m; ++k) {
          std::swap(a[c * m + k], a[piv * m + k]);
          std::swap(inv[c * m + k], inv[piv * m + k]);
        }
      const double d = a[c * m + c];
      for (std::size_t k = 0; k < m; ++k) {
        a[c * m + k] /= d;
        inv[c * m + k] /= d;
      }
      for (std::size_t r = 0; r < m; ++r) {
        if (r == c) continue;
        const double f = a[r * m + c];
        if (f == 0.0) continue;
        for (std::size_t k = 0; k < m; ++k) {
          a[r * m + k] -= f * a[c * m + k];
          inv[r * m + k] -= f * inv[c * m + k];
        }
      }
    }
  }

  std::size_t n_;
  double eps_;
  std::vector<Column> cols_;
  std::vector<int> basis_;
  MasterSolution last_;
  bool solved_ = false;
};

inline MasterSolution solve_lp(const std::vector<Column>& columns, std::size_t n_customers) {
  RestrictedMaster rm(n_customers);
  for (const Column& c : columns) rm.push(c);
  return rm.solve();
}

// Aggregated arc usage of a master solution.
struct ArcValues {
  std::map<int, double> y;                               // drone-alone visits per customer id
  std::map<std::tuple<int, int, int>, double> xT;        // truck-only traversals (i, j, p)
  std::map<std::tuple<int, int, int>, double> xC;        // traversals with the drone on board
  std::map<std::pair<int, int>, double> w;               // drone-alone traversals (i, j)
  std::map<std::pair<int, int>, double> w_in;            // launch -> drone node legs
  std::map<std::pair<int, int>, double> w_out;           // drone node -> retrieve legs
};

inline ArcValues extract_arc_values(const std::vector<Column>& cols, const MasterSolution& sol, double eps = 1e-9) {
  ArcValues v;
  for (std::size_t c = 0; c < cols.size(); ++c) {
    const double lam = sol.lambda[c];
    if (lam <= eps || cols[c].artificial) continue;
    const CoordinatedRoute& r = cols[c].route;
    std::vector<char> inside(r.arcs.size(), 0);
    for (const auto& s : r.sorties)
      for (std::size_t h = s.launch_pos; h < s.retrieve_pos; ++h) inside[h] = 1;
    for (std::size_t h = 0; h < r.arcs.size(); ++h) {
      const auto key = std::make_tuple(r.arcs[h].from, r.arcs[h].to, r.arcs[h].p);
      (inside[h] ? v.xT : v.xC)[key] += lam;
    }
    auto drone = [&](const Sortie& s) {
      v.y[s.drone] += lam;
      v.w[{s.launch, s.drone}] += lam;
      v.w[{s.drone, s.retrieve}] += lam;
      v.w_in[{s.launch, s.drone}] += lam;
      v.w_out[{s.drone, s.retrieve}] += lam;
    };
    for (const auto& s : r.sorties) drone(s.sortie);
    for (const auto& l : r.loops) drone(l.loop);
  }
  return v;
}

}  // namespace evtspd
