#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "evtspd/evtspd.hpp"

namespace fs = std::filesystem;
using namespace evtspd;

namespace {

struct Source {
  std::vector<std::string> files;
  int customers = 5;
  int stations = 3;
  int count = 1;
  std::uint64_t seed = 1;
  int max_retries = 20;
};

// Values stay unset unless given so instance files keep their own parameters.
struct Overrides {
  std::optional<double> truck_capacity, drone_capacity, truck_speed, drone_speed, alpha, rho, charge_time, service_time, launch_time,
      retrieve_time, payload;
  bool loops = false, launch_retrieve = false, weight_range = false;
  std::optional<int> max_leg;
  std::vector<int> incompatible;
};

void add_source(CLI::App* app, Source& s, bool allow_files = true) {
  CLI::Option* inst = nullptr;
  if (allow_files) inst = app->add_option("--instance", s.files, "Instance file(s)")->check(CLI::ExistingFile);
  auto* c = app->add_option("--customers", s.customers, "Customers per generated instance")->check(CLI::Range(1, 64));
  auto* st = app->add_option("--stations", s.stations, "Charging stations per generated instance")->check(CLI::Range(1, 1000));
  auto* n = app->add_option("--count", s.count, "Number of generated instances")->check(CLI::Range(1, 100000));
  app->add_option("--seed", s.seed, "Base seed for generation");
  app->add_option("--max-retries", s.max_retries, "Regeneration attempts per instance")->check(CLI::Range(1, 100000));
  if (inst) {
    inst->excludes(c);
    inst->excludes(st);
    inst->excludes(n);
  }
}

void add_overrides(CLI::App* app, Overrides& o) {
  app->add_option("--truck-capacity", o.truck_capacity, "Truck battery, seconds of driving");
  app->add_option("--drone-capacity", o.drone_capacity, "Drone battery, truck-equivalent seconds");
  app->add_option("--truck-speed", o.truck_speed, "km/h");
  app->add_option("--drone-speed", o.drone_speed, "km/h");
  app->add_option("--alpha", o.alpha, "Drone to truck speed ratio");
  app->add_option("--rho", o.rho, "Drone to truck energy ratio");
  app->add_option("--charge-time", o.charge_time, "Seconds per station visit");
  app->add_option("--service-time", o.service_time, "Seconds per customer");
  app->add_option("--launch-time", o.launch_time, "Seconds");
  app->add_option("--retrieve-time", o.retrieve_time, "Seconds");
  app->add_option("--payload", o.payload, "Drone payload capacity, kg");
  app->add_flag("--loops", o.loops, "Allow sorties returning to their launch node");
  app->add_flag("--launch-retrieve", o.launch_retrieve, "Charge launch and retrieve times");
  app->add_flag("--weight-range", o.weight_range, "Parcel weight shortens drone range");
  app->add_option("--max-leg", o.max_leg, "Truck customers per sortie, 0 = unlimited")->check(CLI::NonNegativeNumber);
  app->add_option("--incompatible", o.incompatible, "Customers the drone may not serve")->delimiter(',');
}

void apply(Params& p, const Overrides& o) {
  if (o.truck_capacity) p.truck_capacity = *o.truck_capacity;
  if (o.drone_capacity) p.drone_capacity = *o.drone_capacity;
  if (o.truck_speed) p.truck_speed = *o.truck_speed;
  if (o.drone_speed) p.drone_speed = *o.drone_speed;
  if (o.alpha) p.drone_speed = *o.alpha * p.truck_speed;
  if (o.rho) p.energy_ratio = *o.rho;
  if (o.charge_time) p.charge_time = *o.charge_time;
  if (o.service_time) p.service_time = *o.service_time;
  if (o.launch_time) p.launch_time = *o.launch_time;
  if (o.retrieve_time) p.retrieve_time = *o.retrieve_time;
  if (o.payload) p.payload_capacity = *o.payload;
  if (o.loops) p.loops = true;
  if (o.launch_retrieve) p.launch_retrieve = true;
  if (o.weight_range) p.weight_range = true;
  if (o.max_leg) p.max_leg = *o.max_leg;
  if (!o.incompatible.empty()) p.incompatible = o.incompatible;
}

void refresh(Instance& inst) {
  inst.params.validate();
  compute_matrices(inst);
}

Instance load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_instance(ss.str());
}

std::uint64_t sub_seed(std::uint64_t seed, int k, int attempt) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(k + 1) + 0xBF58476D1CE4E5B9ULL * static_cast<std::uint64_t>(attempt);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

bool truck_feasible(const Instance& inst) {
  const MultiGraph g = build_multigraph(inst);
  const SortieCatalog cat = feasible_sorties(inst);
  try {
    Vns(inst, g, cat).mcws_initial();
    return true;
  } catch (const std::runtime_error&) {
    return false;
  }
}

struct Named {
  std::string name;
  Instance inst;
};

// Generated instances are rejected and redrawn until the savings construction finds a truck route.
std::vector<Named> materialize(const Source& s, const Overrides& o) {
  std::vector<Named> out;
  if (!s.files.empty()) {
    for (const auto& f : s.files) {
      Instance inst = load_file(f);
      apply(inst.params, o);
      refresh(inst);
      out.push_back({fs::path(f).filename().string(), std::move(inst)});
    }
    return out;
  }
  Params p;
  apply(p, o);
  p.validate();
  for (int k = 0; k < s.count; ++k) {
    bool ok = false;
    for (int a = 0; a < s.max_retries && !ok; ++a) {
      Instance inst = generate_instance(sub_seed(s.seed, k, a), s.customers, s.stations, p);
      if (!truck_feasible(inst)) continue;
      char name[64];
      std::snprintf(name, sizeof name, "inst_c%d_s%d_%03d", s.customers, s.stations, k);
      out.push_back({name, std::move(inst)});
      ok = true;
    }
    if (!ok) throw std::runtime_error("no truck-feasible instance after " + std::to_string(s.max_retries) + " attempts (instance " + std::to_string(k) + ")");
  }
  return out;
}

std::string num(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

struct Row {
  std::string instance, method, sweep_key;
  double sweep_value = std::nan("");
  double seed = std::nan("");
  std::string status;
  double cost = std::nan(""), bb_nodes = std::nan(""), root_gap = std::nan(""), cg = std::nan(""), columns = std::nan(""), iterations = std::nan(""),
         shakes = std::nan(""), gap = std::nan(""), wall = std::nan("");
};

const char* kHeader = "instance,method,sweep_key,sweep_value,seed,status,cost,bb_nodes,root_gap_pct,cg_iterations,columns,iterations,shakes,gap_pct,wall_time_s";

void write_row(std::ostream& os, const Row& r) {
  os << r.instance << "," << r.method << "," << (r.sweep_key.empty() ? "-" : r.sweep_key) << "," << num(r.sweep_value) << "," << num(r.seed) << ","
     << r.status << "," << num(r.cost) << "," << num(r.bb_nodes) << "," << num(r.root_gap) << "," << num(r.cg) << "," << num(r.columns) << ","
     << num(r.iterations) << "," << num(r.shakes) << "," << num(r.gap) << "," << num(r.wall) << "\n";
}

// Mean of each numeric field over the rows of one (method, sweep value) group; nan fields stay nan.
std::vector<Row> summarize(const std::vector<Row>& rows) {
  std::map<std::pair<std::string, double>, std::vector<const Row*>> groups;
  std::vector<std::pair<std::string, double>> order;
  for (const Row& r : rows) {
    auto key = std::make_pair(r.method, std::isnan(r.sweep_value) ? -1e300 : r.sweep_value);
    if (!groups.count(key)) order.push_back(key);
    groups[key].push_back(&r);
  }
  std::vector<Row> out;
  for (const auto& key : order) {
    const auto& g = groups[key];
    if (g.size() < 2) continue;
    Row m;
    m.instance = "mean";
    m.method = g.front()->method;
    m.sweep_key = g.front()->sweep_key;
    m.sweep_value = g.front()->sweep_value;
    m.status = "summary";
    auto mean = [&](double Row::* f) {
      double s = 0;
      for (const Row* r : g) s += r->*f;
      return s / static_cast<double>(g.size());
    };
    m.cost = mean(&Row::cost);
    m.bb_nodes = mean(&Row::bb_nodes);
    m.root_gap = mean(&Row::root_gap);
    m.cg = mean(&Row::cg);
    m.columns = mean(&Row::columns);
    m.iterations = mean(&Row::iterations);
    m.shakes = mean(&Row::shakes);
    m.gap = mean(&Row::gap);
    m.wall = mean(&Row::wall);
    out.push_back(m);
  }
  return out;
}

struct SolveOpts {
  std::string method = "both";
  int ng = 0;  // 0 = instance parameter
  double time_limit = 3600.0;
  std::vector<std::uint64_t> seeds{1};
  int max_iteration = 200;
  int max_stopping = 30;
  int shake_strength = 2;
  std::string sweep;
  std::string out;
  std::string trace;
  bool routes = false;
  bool stats = false;
};

void set_param(Instance& inst, SolveOpts& so, const std::string& key, double v) {
  Params& p = inst.params;
  if (key == "drone_speed") p.drone_speed = v;
  else if (key == "truck_speed") p.truck_speed = v;
  else if (key == "alpha") p.drone_speed = v * p.truck_speed;
  else if (key == "truck_capacity") p.truck_capacity = v;
  else if (key == "drone_capacity") p.drone_capacity = v;
  else if (key == "energy_ratio" || key == "rho") p.energy_ratio = v;
  else if (key == "charge_time") p.charge_time = v;
  else if (key == "service_time") p.service_time = v;
  else if (key == "launch_time") p.launch_time = v;
  else if (key == "retrieve_time") p.retrieve_time = v;
  else if (key == "ng") so.ng = static_cast<int>(v);
  else throw std::invalid_argument("unknown sweep key '" + key + "'");
  refresh(inst);
}

std::pair<std::string, std::vector<double>> parse_sweep(const std::string& s) {
  auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) throw std::invalid_argument("--sweep expects key=v1,v2,...");
  std::vector<double> vals;
  std::stringstream ss(s.substr(eq + 1));
  std::string item;
  while (std::getline(ss, item, ',')) vals.push_back(detail::parse_double(item, 0));
  if (vals.empty()) throw std::invalid_argument("--sweep needs at least one value");
  return {s.substr(0, eq), vals};
}

int run_solve(const std::vector<Named>& insts, SolveOpts so) {
  if (so.method != "bp" && so.method != "vns" && so.method != "both") throw std::invalid_argument("--method must be bp, vns or both");
  std::ofstream file;
  std::ostream* os = &std::cout;
  if (!so.out.empty()) {
    file.open(so.out);
    if (!file) throw std::runtime_error("cannot write " + so.out);
    os = &file;
  }
  std::ofstream trace;
  if (!so.trace.empty()) {
    trace.open(so.trace);
    trace << "instance,seed,iteration,best_cost\n";
  }
  std::string key;
  std::vector<double> values{std::nan("")};
  if (!so.sweep.empty()) std::tie(key, values) = parse_sweep(so.sweep);
  *os << kHeader << "\n";
  std::vector<Row> rows;
  bool timed_out = false;
  for (const Named& nm : insts) {
    for (double v : values) {
      Instance inst = nm.inst;
      SolveOpts local = so;
      if (!key.empty()) set_param(inst, local, key, v);
      const MultiGraph g = build_multigraph(inst);
      const SortieCatalog cat = feasible_sorties(inst);
      if (so.stats) std::cerr << nm.name << " " << format_stats(g.stats) << "\n";
      double bp_cost = std::nan("");
      auto vcfg = [&](std::uint64_t seed) {
        VnsConfig c;
        c.seed = seed;
        c.max_iteration = so.max_iteration;
        c.max_stopping = so.max_stopping;
        c.shake_strength = so.shake_strength;
        return c;
      };
      if (so.method != "vns") {
        BpConfig cfg;
        cfg.ng = local.ng > 0 ? local.ng : inst.params.ng_size;
        cfg.time_limit = so.time_limit;
        cfg.vns = vcfg(so.seeds.front());
        BpResult r = bp_solve(inst, g, cat, cfg);
        Row row;
        row.instance = nm.name;
        row.method = "bp";
        row.sweep_key = key;
        row.sweep_value = v;
        row.status = status_name(r.status);
        row.cost = r.cost;
        row.bb_nodes = static_cast<double>(r.stats.bb_nodes);
        row.root_gap = r.stats.root_gap_pct;
        row.cg = static_cast<double>(r.stats.cg_iterations);
        row.columns = static_cast<double>(r.stats.columns);
        row.wall = r.stats.wall_time_s;
        if (r.status == BpStatus::TimeLimit) timed_out = true;
        if (r.status == BpStatus::Optimal) bp_cost = r.cost;
        write_row(*os, row);
        rows.push_back(row);
        if (so.routes && std::isfinite(r.cost)) std::cerr << format_route(inst, r.route, evaluate_route(inst, r.route));
      }
      if (so.method != "bp") {
        for (std::uint64_t seed : so.seeds) {
          VnsResult r = vns_solve(inst, g, cat, vcfg(seed));
          Row row;
          row.instance = nm.name;
          row.method = "vns";
          row.sweep_key = key;
          row.sweep_value = v;
          row.seed = static_cast<double>(seed);
          row.status = "heuristic";
          row.cost = r.cost;
          row.iterations = r.iterations;
          row.shakes = r.shakes;
          row.gap = std::isnan(bp_cost) ? std::nan("") : (r.cost - bp_cost) / bp_cost * 100.0;
          row.wall = r.wall_time_s;
          write_row(*os, row);
          rows.push_back(row);
          if (trace)
            for (std::size_t i = 0; i < r.best_trace.size(); ++i) trace << nm.name << "," << seed << "," << i + 1 << "," << num(r.best_trace[i]) << "\n";
          if (so.routes) std::cerr << format_route(inst, r.route, evaluate_route(inst, r.route));
        }
      }
    }
  }
  for (const Row& m : summarize(rows)) write_row(*os, m);
  return timed_out ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Electric truck and drone routing toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "evtspd 1.0");

  Source gen_src;
  Overrides gen_ov;
  std::string gen_out = ".";
  auto* gen = app.add_subcommand("gen", "Generate instance files");
  add_source(gen, gen_src, false);
  add_overrides(gen, gen_ov);
  gen->add_option("--out", gen_out, "Output directory");

  Source solve_src;
  Overrides solve_ov;
  SolveOpts so;
  auto add_solve_opts = [&](CLI::App* c) {
    c->add_option("--method", so.method, "bp, vns or both");
    c->add_option("--ng", so.ng, "ng-set size (default: instance parameter)")->check(CLI::Range(1, 64));
    c->add_option("--time-limit", so.time_limit, "Branch-and-price limit, seconds");
    c->add_option("--seed-vns", so.seeds, "VNS seeds, one row each");
    c->add_option("--max-iteration", so.max_iteration, "VNS iteration budget")->check(CLI::NonNegativeNumber);
    c->add_option("--max-stopping", so.max_stopping, "VNS non-improving shake budget")->check(CLI::PositiveNumber);
    c->add_option("--shake-strength", so.shake_strength, "Customers relocated per shake, growing while the search is stuck")->check(CLI::PositiveNumber);
    c->add_option("--sweep", so.sweep, "key=v1,v2,... one row per value");
    c->add_option("--out", so.out, "CSV output file (default stdout)");
    c->add_option("--trace", so.trace, "Per-iteration VNS best-cost CSV");
    c->add_flag("--routes", so.routes, "Print solution routes to stderr");
    c->add_flag("--stats", so.stats, "Print multigraph statistics to stderr");
  };
  auto* solve = app.add_subcommand("solve", "Run branch-and-price and/or VNS, CSV rows out");
  add_source(solve, solve_src);
  add_overrides(solve, solve_ov);
  add_solve_opts(solve);

  Source bench_src;
  Overrides bench_ov;
  auto* bench = app.add_subcommand("bench", "Generate instances in memory and solve them with both methods");
  add_source(bench, bench_src, false);
  add_overrides(bench, bench_ov);
  add_solve_opts(bench);

  Source lp_src;
  Overrides lp_ov;
  std::string lp_out;
  auto* lp = app.add_subcommand("emit-lp", "Write the arc-based model in LP format");
  add_source(lp, lp_src);
  add_overrides(lp, lp_ov);
  lp->add_option("--out", lp_out, "LP file (default stdout)");

  Source or_src;
  Overrides or_ov;
  bool no_prune = false;
  auto* orc = app.add_subcommand("oracle", "Exhaustive optimum for tiny instances");
  add_source(orc, or_src);
  add_overrides(orc, or_ov);
  orc->add_flag("--no-prune", no_prune, "Disable pruning shortcuts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*gen) {
      fs::create_directories(gen_out);
      for (const Named& nm : materialize(gen_src, gen_ov)) {
        const fs::path p = fs::path(gen_out) / (nm.name + ".txt");
        std::ofstream f(p);
        if (!f) throw std::runtime_error("cannot write " + p.string());
        f << serialize_instance(nm.inst);
        std::cout << p.string() << "\n";
      }
      return 0;
    }
    if (*solve) return run_solve(materialize(solve_src, solve_ov), so);
    if (*bench) {
      bench_src.files.clear();
      return run_solve(materialize(bench_src, bench_ov), so);
    }
    if (*lp) {
      auto insts = materialize(lp_src, lp_ov);
      if (insts.size() != 1) throw std::invalid_argument("emit-lp takes exactly one instance");
      const Instance& inst = insts.front().inst;
      const MultiGraph g = build_multigraph(inst);
      const SortieCatalog cat = feasible_sorties(inst);
      const LinearModel m = build_arc_model(inst, g, cat);
      for (const auto& w : m.warnings) std::cerr << "warning: " << w << "\n";
      const std::string text = emit_lp(m);
      if (lp_out.empty()) std::cout << text;
      else {
        std::ofstream f(lp_out);
        if (!f) throw std::runtime_error("cannot write " + lp_out);
        f << text;
      }
      return 0;
    }
    if (*orc) {
      auto insts = materialize(or_src, or_ov);
      for (const Named& nm : insts) {
        const MultiGraph g = build_multigraph(nm.inst);
        const SortieCatalog cat = feasible_sorties(nm.inst);
        OracleOptions opt;
        opt.prune = !no_prune;
        const OracleResult r = brute_force(nm.inst, g, cat, opt);
        std::cout << "instance=" << nm.name << " feasible=" << (r.feasible ? 1 : 0) << " cost=" << num(r.cost) << " truck_paths=" << r.truck_paths
                  << " candidates=" << r.candidates << "\n";
        if (r.feasible) std::cout << format_route(nm.inst, r.route, evaluate_route(nm.inst, r.route));
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
