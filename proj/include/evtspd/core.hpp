#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace evtspd {

enum class NodeKind { Depot, Customer, Station };

struct Node {
  int id = 0;
  NodeKind kind = NodeKind::Customer;
  double x = 0.0;  // km
  double y = 0.0;
};

// All energies are in truck-travel seconds.
struct Params {
  double truck_capacity = 9000.0;  // 2.5 h at 40 km/h
  double drone_capacity = 720.0;   // 20 km of flight at energy ratio 0.4
  double truck_speed = 40.0;       // km/h
  double drone_speed = 60.0;
  double energy_ratio = 0.4;
  double charge_time = 120.0;
  double service_time = 0.0;
  double launch_time = 100.0;
  double retrieve_time = 20.0;
  int ng_size = 5;
  double tol = 1e-9;
  bool loops = false;
  bool launch_retrieve = false;
  bool weight_range = false;
  int max_leg = 0;  // 0 disables the limit
  double payload_capacity = 6.0;  // kg
  std::vector<int> incompatible;  // customers the drone may not serve

  double speed_ratio() const { return drone_speed / truck_speed; }
  bool drone_compatible(int customer) const {
    return std::find(incompatible.begin(), incompatible.end(), customer) == incompatible.end();
  }
  void validate() const;
};

inline void Params::validate() const {
  auto bad = [](const char* what) { throw std::invalid_argument(std::string("invalid parameter: ") + what); };
  if (!(truck_capacity > 0)) bad("truck_capacity must be positive");
  if (!(drone_capacity > 0)) bad("drone_capacity must be positive");
  if (!(truck_speed > 0) || !(drone_speed > 0)) bad("speeds must be positive");
  if (!(energy_ratio >= 0)) bad("energy_ratio must be nonnegative");
  if (!(tol > 0)) bad("tol must be positive");
  if (ng_size < 1) bad("ng_size must be at least 1");
  if (max_leg < 0) bad("max_leg must be nonnegative");
  if (!(payload_capacity > 0)) bad("payload_capacity must be positive");
  if (charge_time < 0 || service_time < 0 || launch_time < 0 || retrieve_time < 0) bad("times must be nonnegative");
}

class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t n, double fill = 0.0) : n_(n), v_(n * n, fill) {}
  double& operator()(std::size_t i, std::size_t j) { return v_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return v_[i * n_ + j]; }
  std::size_t size() const { return n_; }
  bool operator==(const Matrix&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> v_;
};

struct Instance {
  Params params;
  std::vector<Node> nodes;  // nodes[i].id == i
  int depot = 0;
  std::vector<int> customers;
  std::vector<int> stations;
  std::vector<double> weight;  // parcel weight per node, kg
  Matrix c_T, c_D, e_T, e_D;
  bool explicit_ct = false;
  bool explicit_cd = false;

  int size() const { return static_cast<int>(nodes.size()); }
  bool is_customer(int i) const { return nodes[i].kind == NodeKind::Customer; }
  bool is_station(int i) const { return nodes[i].kind == NodeKind::Station; }
  // Dwell time charged to any arc leaving node i.
  double dwell(int i) const {
    switch (nodes[i].kind) {
      case NodeKind::Station: return params.charge_time;
      case NodeKind::Customer: return params.service_time;
      default: return 0.0;
    }
  }
  // Position of customer id in `customers`, or -1.
  int customer_index(int id) const {
    auto it = std::find(customers.begin(), customers.end(), id);
    return it == customers.end() ? -1 : static_cast<int>(it - customers.begin());
  }
};

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Unit-interval double from the top 53 bits; avoids implementation-defined distributions.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  if (n <= 1) return 0;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t r;
  do { r = rng(); } while (r >= limit);
  return static_cast<std::size_t>(r % n);
}

inline void reindex(Instance& inst) {
  inst.customers.clear();
  inst.stations.clear();
  for (const Node& nd : inst.nodes) {
    if (nd.kind == NodeKind::Customer) inst.customers.push_back(nd.id);
    else if (nd.kind == NodeKind::Station) inst.stations.push_back(nd.id);
    else inst.depot = nd.id;
  }
  if (inst.weight.size() != inst.nodes.size()) inst.weight.assign(inst.nodes.size(), inst.params.payload_capacity);
}

inline void compute_matrices(Instance& inst) {
  const std::size_t n = inst.nodes.size();
  for (const Node& nd : inst.nodes)
    if (!std::isfinite(nd.x) || !std::isfinite(nd.y)) throw std::invalid_argument("non-finite coordinate at node " + std::to_string(nd.id));
  const Params& p = inst.params;
  if (!inst.explicit_ct) inst.c_T = Matrix(n);
  if (!inst.explicit_cd) inst.c_D = Matrix(n);
  inst.e_T = Matrix(n);
  inst.e_D = Matrix(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) {
        inst.c_T(i, j) = inst.c_D(i, j) = 0.0;
        continue;
      }
      const double dx = inst.nodes[i].x - inst.nodes[j].x;
      const double dy = inst.nodes[i].y - inst.nodes[j].y;
      const double manhattan = std::abs(dx) + std::abs(dy);
      const double euclid = std::hypot(dx, dy);
      if (!inst.explicit_ct) inst.c_T(i, j) = manhattan / p.truck_speed * 3600.0;
      if (!inst.explicit_cd) inst.c_D(i, j) = euclid / p.drone_speed * 3600.0;
      inst.e_T(i, j) = inst.c_T(i, j);
      // With explicit drone times the distance is recovered through the drone speed.
      inst.e_D(i, j) = inst.explicit_cd ? p.energy_ratio * p.speed_ratio() * inst.c_D(i, j)
                                        : p.energy_ratio * euclid / p.truck_speed * 3600.0;
    }
  }
}

inline Instance make_instance(const Params& params, std::vector<Node> nodes) {
  Instance inst;
  inst.params = params;
  inst.nodes = std::move(nodes);
  int depots = 0;
  for (std::size_t i = 0; i < inst.nodes.size(); ++i) {
    if (inst.nodes[i].id != static_cast<int>(i)) throw std::invalid_argument("node ids must be 0..N-1 in order");
    if (inst.nodes[i].kind == NodeKind::Depot) ++depots;
  }
  if (depots != 1) throw std::invalid_argument("exactly one depot required");
  reindex(inst);
  compute_matrices(inst);
  return inst;
}

// Stream order: all customer coordinates first, then stations; x before y.
inline Instance generate_instance(std::uint64_t seed, int n_customers, int n_stations, const Params& params) {
  if (n_customers < 1 || n_stations < 1) throw std::invalid_argument("need at least one customer and one station");
  std::mt19937_64 rng(seed);
  std::vector<Node> nodes;
  nodes.push_back({0, NodeKind::Depot, 0.0, 0.0});
  auto draw = [&] { return -20.0 + 40.0 * uniform01(rng); };
  for (int i = 0; i < n_customers; ++i) {
    double x = draw();
    double y = draw();
    nodes.push_back({static_cast<int>(nodes.size()), NodeKind::Customer, x, y});
  }
  for (int s = 0; s < n_stations; ++s) {
    double x = draw();
    double y = draw();
    nodes.push_back({static_cast<int>(nodes.size()), NodeKind::Station, x, y});
  }
  return make_instance(params, std::move(nodes));
}

namespace detail {

inline std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s, int line) {
  double v = 0;
  const char* b = s.data();
  const char* e = b + s.size();
  if (!s.empty() && *b == '+') ++b;
  auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e) throw ParseError(line, "bad number '" + s + "'");
  return v;
}

inline int parse_int(const std::string& s, int line) {
  int v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ParseError(line, "bad integer '" + s + "'");
  return v;
}

inline std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

inline char kind_char(NodeKind k) { return k == NodeKind::Depot ? 'D' : k == NodeKind::Customer ? 'C' : 'S'; }

}  // namespace detail

inline std::string serialize_instance(const Instance& inst) {
  using detail::fmt_double;
  const Params& p = inst.params;
  std::ostringstream os;
  os << "evtspd 1\n";
  os << "param truck_capacity " << fmt_double(p.truck_capacity) << "\n";
  os << "param drone_capacity " << fmt_double(p.drone_capacity) << "\n";
  os << "param truck_speed " << fmt_double(p.truck_speed) << "\n";
  os << "param drone_speed " << fmt_double(p.drone_speed) << "\n";
  os << "param energy_ratio " << fmt_double(p.energy_ratio) << "\n";
  os << "param charge_time " << fmt_double(p.charge_time) << "\n";
  os << "param service_time " << fmt_double(p.service_time) << "\n";
  os << "param launch_time " << fmt_double(p.launch_time) << "\n";
  os << "param retrieve_time " << fmt_double(p.retrieve_time) << "\n";
  os << "param ng_size " << p.ng_size << "\n";
  os << "param tol " << fmt_double(p.tol) << "\n";
  os << "param loops " << (p.loops ? 1 : 0) << "\n";
  os << "param launch_retrieve " << (p.launch_retrieve ? 1 : 0) << "\n";
  os << "param weight_range " << (p.weight_range ? 1 : 0) << "\n";
  os << "param max_leg " << p.max_leg << "\n";
  os << "param payload_capacity " << fmt_double(p.payload_capacity) << "\n";
  os << "param incompatible ";
  if (p.incompatible.empty()) os << "-";
  for (std::size_t i = 0; i < p.incompatible.size(); ++i) os << (i ? "," : "") << p.incompatible[i];
  os << "\n";
  for (const Node& nd : inst.nodes)
    os << "node " << nd.id << " " << detail::kind_char(nd.kind) << " " << fmt_double(nd.x) << " " << fmt_double(nd.y) << "\n";
  for (int c : inst.customers)
    if (c < static_cast<int>(inst.weight.size()) && inst.weight[c] != p.payload_capacity)
      os << "weight " << c << " " << fmt_double(inst.weight[c]) << "\n";
  auto dump = [&](const char* tag, const Matrix& m) {
    os << tag << "\n";
    for (std::size_t i = 0; i < m.size(); ++i) {
      for (std::size_t j = 0; j < m.size(); ++j) os << (j ? " " : "") << fmt_double(m(i, j));
      os << "\n";
    }
  };
  if (inst.explicit_ct) dump("ctmat", inst.c_T);
  if (inst.explicit_cd) dump("cdmat", inst.c_D);
  return os.str();
}

inline Instance parse_instance(const std::string& text) {
  using detail::parse_double;
  using detail::parse_int;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  bool header = false;
  Params p;
  std::vector<Node> nodes;
  std::vector<std::pair<int, double>> weights;
  std::vector<int> weight_lines;
  std::vector<std::vector<double>> ct, cd;
  std::vector<std::string> seen_keys;
  int depot_line = 0;

  auto read_matrix = [&](std::vector<std::vector<double>>& m, const std::string& tag) {
    // Rows follow until a line with a different leading token; node count must already be known.
    const std::size_t n = nodes.size();
    if (n == 0) throw ParseError(lineno, tag + " before node lines");
    for (std::size_t r = 0; r < n; ++r) {
      if (!std::getline(is, line)) throw ParseError(lineno, tag + " truncated");
      ++lineno;
      auto tok = detail::split_ws(line);
      if (tok.size() != n) throw ParseError(lineno, tag + " row needs " + std::to_string(n) + " entries");
      std::vector<double> row;
      for (auto& t : tok) {
        row.push_back(parse_double(t, lineno));
        if (!(row.back() >= 0) || !std::isfinite(row.back())) throw ParseError(lineno, tag + " entries must be finite and nonnegative");
      }
      m.push_back(std::move(row));
    }
  };

  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto tok = detail::split_ws(line);
    if (tok.empty() || tok[0][0] == '#') continue;
    if (!header) {
      if (tok.size() != 2 || tok[0] != "evtspd" || tok[1] != "1") throw ParseError(lineno, "expected header 'evtspd 1'");
      header = true;
      continue;
    }
    if (tok[0] == "param") {
      if (tok.size() != 3) throw ParseError(lineno, "malformed param line");
      const std::string& k = tok[1];
      const std::string& v = tok[2];
      if (std::find(seen_keys.begin(), seen_keys.end(), k) != seen_keys.end()) throw ParseError(lineno, "duplicate param " + k);
      seen_keys.push_back(k);
      auto flag = [&] {
        int f = parse_int(v, lineno);
        if (f != 0 && f != 1) throw ParseError(lineno, "flag must be 0 or 1");
        return f == 1;
      };
      if (k == "truck_capacity") p.truck_capacity = parse_double(v, lineno);
      else if (k == "drone_capacity") p.drone_capacity = parse_double(v, lineno);
      else if (k == "truck_speed") p.truck_speed = parse_double(v, lineno);
      else if (k == "drone_speed") p.drone_speed = parse_double(v, lineno);
      else if (k == "energy_ratio") p.energy_ratio = parse_double(v, lineno);
      else if (k == "charge_time") p.charge_time = parse_double(v, lineno);
      else if (k == "service_time") p.service_time = parse_double(v, lineno);
      else if (k == "launch_time") p.launch_time = parse_double(v, lineno);
      else if (k == "retrieve_time") p.retrieve_time = parse_double(v, lineno);
      else if (k == "ng_size") p.ng_size = parse_int(v, lineno);
      else if (k == "tol") p.tol = parse_double(v, lineno);
      else if (k == "loops") p.loops = flag();
      else if (k == "launch_retrieve") p.launch_retrieve = flag();
      else if (k == "weight_range") p.weight_range = flag();
      else if (k == "max_leg") p.max_leg = parse_int(v, lineno);
      else if (k == "payload_capacity") p.payload_capacity = parse_double(v, lineno);
      else if (k == "incompatible") {
        p.incompatible.clear();
        if (v != "-") {
          std::string item;
          std::istringstream vs(v);
          while (std::getline(vs, item, ',')) p.incompatible.push_back(parse_int(item, lineno));
        }
      } else throw ParseError(lineno, "unknown param key '" + k + "'");
    } else if (tok[0] == "node") {
      if (tok.size() != 5) throw ParseError(lineno, "malformed node line");
      Node nd;
      nd.id = parse_int(tok[1], lineno);
      if (tok[2] == "D") nd.kind = NodeKind::Depot;
      else if (tok[2] == "C") nd.kind = NodeKind::Customer;
      else if (tok[2] == "S") nd.kind = NodeKind::Station;
      else throw ParseError(lineno, "unknown node kind '" + tok[2] + "'");
      nd.x = parse_double(tok[3], lineno);
      nd.y = parse_double(tok[4], lineno);
      if (!std::isfinite(nd.x) || !std::isfinite(nd.y)) throw ParseError(lineno, "non-finite coordinate");
      for (const Node& o : nodes)
        if (o.id == nd.id) throw ParseError(lineno, "duplicate node id " + tok[1]);
      if (nd.kind == NodeKind::Depot) {
        if (depot_line) throw ParseError(lineno, "duplicate depot");
        depot_line = lineno;
      }
      if (!ct.empty() || !cd.empty()) throw ParseError(lineno, "node line after matrix block");
      nodes.push_back(nd);
    } else if (tok[0] == "weight") {
      if (tok.size() != 3) throw ParseError(lineno, "malformed weight line");
      weights.emplace_back(parse_int(tok[1], lineno), parse_double(tok[2], lineno));
      weight_lines.push_back(lineno);
    } else if (tok[0] == "ctmat" && tok.size() == 1) {
      if (!ct.empty()) throw ParseError(lineno, "duplicate ctmat");
      read_matrix(ct, "ctmat");
    } else if (tok[0] == "cdmat" && tok.size() == 1) {
      if (!cd.empty()) throw ParseError(lineno, "duplicate cdmat");
      read_matrix(cd, "cdmat");
    } else {
      throw ParseError(lineno, "unrecognized line '" + tok[0] + "'");
    }
  }
  if (!header) throw ParseError(lineno, "missing header");
  if (!depot_line) throw ParseError(lineno, "missing depot");
  std::sort(nodes.begin(), nodes.end(), [](const Node& a, const Node& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].id != static_cast<int>(i)) throw ParseError(lineno, "node ids must be contiguous from 0");
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(lineno, e.what());
  }

  Instance inst;
  inst.params = p;
  inst.nodes = nodes;
  reindex(inst);
  for (std::size_t w = 0; w < weights.size(); ++w) {
    auto [id, kg] = weights[w];
    if (id < 0 || id >= inst.size() || !inst.is_customer(id)) throw ParseError(weight_lines[w], "weight for non-customer node");
    inst.weight[id] = kg;
  }
  for (int c : p.incompatible)
    if (c < 0 || c >= inst.size() || !inst.is_customer(c)) throw ParseError(lineno, "incompatible entry is not a customer");
  auto load = [&](const std::vector<std::vector<double>>& m, Matrix& out) {
    out = Matrix(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i)
      for (std::size_t j = 0; j < nodes.size(); ++j) out(i, j) = m[i][j];
  };
  if (!ct.empty()) {
    inst.explicit_ct = true;
    load(ct, inst.c_T);
  }
  if (!cd.empty()) {
    inst.explicit_cd = true;
    load(cd, inst.c_D);
  }
  compute_matrices(inst);
  return inst;
}

}  // namespace evtspd
