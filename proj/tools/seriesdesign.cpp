#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "seriesdesign/oracle.hpp"
#include "seriesdesign/simulator.hpp"

using nlohmann::json;
using namespace seriesdesign;
namespace fs = std::filesystem;

namespace {

/// Schema violation at a config path; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, const std::string& what) : std::runtime_error(path + ": " + what) {}
};

// ---------------------------------------------------------------------------
// Config schema

struct OracleSettings {
  double theta_j = 1.0;
  int grid_points = 101;
};

struct ReproduceSettings {
  int S = 1000;
};

struct RunConfig {
  SimulationConfig sim;
  bool pso_seed_explicit = false;
  OracleSettings oracle;
  ReproduceSettings reproduce;
  std::string data;
};

class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) {
      throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }
  }

  void allow(std::initializer_list<const char*> keys) const {
    std::set<std::string> known(keys.begin(), keys.end());
    for (const auto& [key, value] : node_.items()) {
      if (!known.count(key)) {
        throw ConfigError(child(key), "unknown key");
      }
    }
  }

  bool has(const char* key) const { return node_.contains(key); }

  std::optional<Reader> object(const char* key) const {
    if (!has(key)) {
      return std::nullopt;
    }
    return Reader(node_.at(key), child(key));
  }

  void read(const char* key, double& out) const {
    if (!has(key)) {
      return;
    }
    const json& v = node_.at(key);
    if (!v.is_number()) {
      throw ConfigError(child(key), "expected a number");
    }
    out = v.get<double>();
    if (!std::isfinite(out)) {
      throw ConfigError(child(key), "must be finite");
    }
  }

  void read(const char* key, int& out) const {
    if (!has(key)) {
      return;
    }
    const json& v = node_.at(key);
    if (!v.is_number_integer()) {
      throw ConfigError(child(key), "expected an integer");
    }
    out = v.get<int>();
  }

  void read(const char* key, std::uint64_t& out) const {
    if (!has(key)) {
      return;
    }
    const json& v = node_.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      throw ConfigError(child(key), "expected a nonnegative integer");
    }
    out = v.get<std::uint64_t>();
  }

  void read(const char* key, std::string& out) const {
    if (!has(key)) {
      return;
    }
    const json& v = node_.at(key);
    if (!v.is_string()) {
      throw ConfigError(child(key), "expected a string");
    }
    out = v.get<std::string>();
  }

  void read(const char* key, std::vector<double>& out) const {
    if (!has(key)) {
      return;
    }
    const json& v = node_.at(key);
    if (!v.is_array()) {
      throw ConfigError(child(key), "expected an array of numbers");
    }
    out.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) {
        throw ConfigError(child(key) + "[" + std::to_string(i) + "]", "expected a number");
      }
      out.push_back(v[i].get<double>());
    }
  }

  void read(const char* key, std::vector<std::string>& out) const {
    if (!has(key)) {
      return;
    }
    const json& v = node_.at(key);
    if (!v.is_array()) {
      throw ConfigError(child(key), "expected an array of strings");
    }
    out.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_string()) {
        throw ConfigError(child(key) + "[" + std::to_string(i) + "]", "expected a string");
      }
      out.push_back(v[i].get<std::string>());
    }
  }

  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  const json& node_;
  std::string path_;
};

RunConfig parse_config(const json& root) {
  RunConfig rc;
  SimulationConfig& c = rc.sim;
  const Reader r(root, "");
  r.allow({"kernel", "basis", "model", "design", "pso", "simulation", "seed", "threads", "oracle", "reproduce",
           "data"});
  if (auto k = r.object("kernel")) {
    k->allow({"type", "L"});
    k->read("type", c.kernel.type);
    k->read("L", c.kernel.L);
  }
  if (auto b = r.object("basis")) {
    b->allow({"kind", "J"});
    b->read("kind", c.basis.kind);
    b->read("J", c.basis.J);
  }
  r.read("model", c.model);
  if (auto d = r.object("design")) {
    d->allow({"name", "n", "points", "min_gap"});
    d->read("name", c.design_name);
    d->read("n", c.n);
    d->read("points", c.points);
    d->read("min_gap", c.min_gap);
  }
  if (auto p = r.object("pso")) {
    p->allow({"swarm_size", "iterations", "inertia", "cognitive", "social", "seed"});
    p->read("swarm_size", c.pso.swarm_size);
    p->read("iterations", c.pso.iterations);
    p->read("inertia", c.pso.inertia);
    p->read("cognitive", c.pso.cognitive);
    p->read("social", c.pso.social);
    rc.pso_seed_explicit = p->has("seed");
    p->read("seed", c.pso.seed);
  }
  if (auto s = r.object("simulation")) {
    s->allow({"S", "estimators", "quad_order", "quad_panels"});
    s->read("S", c.S);
    s->read("quad_order", c.quad_order);
    s->read("quad_panels", c.quad_panels);
    if (s->has("estimators")) {
      std::vector<std::string> names;
      s->read("estimators", names);
      c.estimators.clear();
      for (std::size_t i = 0; i < names.size(); ++i) {
        try {
          c.estimators.push_back(estimator_from_string(names[i]));
        } catch (const ContractViolation& e) {
          throw ConfigError(s->child("estimators") + "[" + std::to_string(i) + "]", e.what());
        }
      }
      if (c.estimators.empty()) {
        throw ConfigError(s->child("estimators"), "at least one estimator required");
      }
    }
  }
  r.read("seed", c.seed);
  r.read("threads", c.threads);
  if (auto o = r.object("oracle")) {
    o->allow({"theta_j", "grid_points"});
    o->read("theta_j", rc.oracle.theta_j);
    o->read("grid_points", rc.oracle.grid_points);
    if (rc.oracle.grid_points < 2) {
      throw ConfigError("oracle.grid_points", "must be >= 2");
    }
  }
  if (auto p = r.object("reproduce")) {
    p->allow({"S"});
    p->read("S", rc.reproduce.S);
    if (rc.reproduce.S < 1) {
      throw ConfigError("reproduce.S", "must be >= 1");
    }
  }
  r.read("data", rc.data);
  return rc;
}

/// Runs the library validator and rewrites its message with a config path.
void validate_config(const RunConfig& rc) {
  try {
    rc.sim.validate();
  } catch (const ContractViolation& e) {
    static const std::vector<std::pair<std::string, std::string>> prefixes{
        {"kernel.", ""},
        {"basis.", ""},
        {"estimators:", "simulation.estimators"},
        {"S:", "simulation.S"},
        {"quadrature:", "simulation"},
        {"threads:", "threads"},
        {"design:", "design.name"},
    };
    const std::string msg = e.what();
    for (const auto& [prefix, path] : prefixes) {
      if (msg.rfind(prefix, 0) == 0) {
        const auto colon = msg.find(':');
        const std::string where = path.empty() ? msg.substr(0, colon) : path;
        throw ConfigError(where, msg.substr(msg.find_first_not_of(' ', colon + 1)));
      }
    }
    if (msg.find("model") != std::string::npos) {
      throw ConfigError("model", msg);
    }
    if (msg.find("DesignGrid") != std::string::npos) {
      throw ConfigError("design.points", msg);
    }
    throw ConfigError("pso", msg);
  }
}

json to_json(const RunConfig& rc) {
  const SimulationConfig& c = rc.sim;
  json estimators = json::array();
  for (auto k : c.estimators) {
    estimators.push_back(to_string(k));
  }
  json j = {
      {"kernel", {{"type", c.kernel.type}, {"L", c.kernel.L}}},
      {"basis", {{"kind", c.basis.kind}, {"J", c.basis.J}}},
      {"model", c.model},
      {"design", {{"name", c.design_name}, {"n", c.n}, {"points", c.points}, {"min_gap", c.min_gap}}},
      {"pso",
       {{"swarm_size", c.pso.swarm_size},
        {"iterations", c.pso.iterations},
        {"inertia", c.pso.inertia},
        {"cognitive", c.pso.cognitive},
        {"social", c.pso.social},
        {"seed", c.pso.seed}}},
      {"simulation",
       {{"S", c.S}, {"estimators", estimators}, {"quad_order", c.quad_order}, {"quad_panels", c.quad_panels}}},
      {"seed", c.seed},
      {"threads", c.threads},
      {"oracle", {{"theta_j", rc.oracle.theta_j}, {"grid_points", rc.oracle.grid_points}}},
      {"reproduce", {{"S", rc.reproduce.S}}},
  };
  if (!rc.data.empty()) {
    j["data"] = rc.data;
  }
  return j;
}

// ---------------------------------------------------------------------------
// Output helpers

std::string fmt(double x) {
  if (std::isinf(x)) {
    return x > 0 ? "inf" : "-inf";
  }
  std::ostringstream s;
  s << std::setprecision(10) << x;
  return s.str();
}

std::string join_points(const std::vector<double>& pts) {
  std::ostringstream s;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    s << (i ? " " : "") << std::fixed << std::setprecision(4) << pts[i];
  }
  return s.str();
}

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

/// Writes via a temporary file and rename so readers never see partial output.
void write_atomic(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) {
      throw ConfigError("--out", "cannot write " + tmp.string());
    }
    out << content;
  }
  fs::rename(tmp, path);
}

/// CSV files carry the resolved config on a leading comment line.
std::string csv_preamble(const json& config) { return "# config: " + config.dump() + "\n"; }

struct Context {
  RunConfig rc;
  fs::path out;
  bool dry_run = false;
};

void emit(const Context& ctx, const std::string& name, const json& report) {
  const std::string text = report.dump(2) + "\n";
  std::cout << text;
  write_atomic(ctx.out / name, text);
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_optimize(const Context& ctx) {
  const SimulationConfig& c = ctx.rc.sim;
  const auto kernel = c.kernel.build();
  const auto basis = c.basis.build();
  const OptimizedDesign d = optimize_design(kernel, basis, c.n, c.pso, c.min_gap);
  const json config = to_json(ctx.rc);

  json report = {{"config", config},
                 {"seed", c.pso.seed},
                 {"points", d.design.points()},
                 {"criterion", number_or_null(d.criterion)},
                 {"evaluations", d.evaluations}};
  emit(ctx, "optimize.json", report);

  std::ostringstream csv;
  csv << csv_preamble(config) << "kernel,L,J,n,seed,index,t,criterion\n";
  for (int i = 0; i < d.design.size(); ++i) {
    csv << c.kernel.type << ',' << fmt(c.kernel.L) << ',' << c.basis.J << ',' << c.n << ',' << c.pso.seed << ','
        << i << ',' << fmt(d.design[i]) << ',' << fmt(d.criterion) << '\n';
  }
  write_atomic(ctx.out / "optimize.csv", csv.str());
  return 0;
}

json simulation_json(const SimulationReport& r) {
  json est = json::array();
  for (const auto& e : r.estimators) {
    est.push_back({{"estimator", to_string(e.kind)}, {"mise", e.mise}, {"stderr", e.stderr_}});
  }
  return {{"points", r.points},
          {"criterion", number_or_null(r.criterion)},
          {"S", r.S},
          {"seed", r.seed},
          {"estimators", est}};
}

std::string csv_row(const SimulationConfig& c, int n, const std::string& design_name,
                    const EstimatorSummary& e, const SimulationReport& r) {
  std::ostringstream s;
  s << c.kernel.type << ',' << fmt(c.kernel.L) << ',' << c.basis.J << ',' << n << ',' << design_name << ','
    << to_string(e.kind) << ',' << r.S << ',' << r.seed << ',' << fmt(e.mise) << ',' << fmt(e.stderr_);
  return s.str();
}

int cmd_simulate(const Context& ctx) {
  const SimulationConfig& c = ctx.rc.sim;
  const DesignGrid design = resolve_design(c);
  const SimulationReport r = run_mise(c, design);
  const json config = to_json(ctx.rc);

  json report = simulation_json(r);
  report["config"] = config;
  report["wall_seconds"] = r.wall_seconds;
  emit(ctx, "simulate.json", report);

  std::ostringstream csv;
  csv << csv_preamble(config) << "kernel,L,J,n,design_name,estimator,S,seed,mise,stderr\n";
  for (const auto& e : r.estimators) {
    csv << csv_row(c, design.size(), c.design_name, e, r) << '\n';
  }
  write_atomic(ctx.out / "simulate.csv", csv.str());
  return 0;
}

Sample read_sample_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("data", "cannot open '" + path + "'");
  }
  std::vector<double> t, y;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') {
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw ConfigError("data:" + std::to_string(lineno), "expected 't,Y'");
    }
    try {
      const double tv = std::stod(line.substr(0, comma));
      const double yv = std::stod(line.substr(comma + 1));
      t.push_back(tv);
      y.push_back(yv);
    } catch (const std::invalid_argument&) {
      if (t.empty()) {
        continue;  // header row
      }
      throw ConfigError("data:" + std::to_string(lineno), "not a number");
    }
  }
  Vector obs(static_cast<Eigen::Index>(y.size()));
  for (std::size_t i = 0; i < y.size(); ++i) {
    obs(static_cast<Eigen::Index>(i)) = y[i];
  }
  try {
    return Sample(DesignGrid(t, 0.0), obs);
  } catch (const ContractViolation& e) {
    throw ConfigError("data", e.what());
  }
}

json vec_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

int cmd_estimate(const Context& ctx) {
  const SimulationConfig& c = ctx.rc.sim;
  if (ctx.rc.data.empty()) {
    throw ConfigError("data", "estimate needs a CSV of t,Y pairs (--data or config key 'data')");
  }
  const Sample sample = read_sample_csv(ctx.rc.data);
  const SeriesEstimator est(c.kernel.build(), c.basis.build(), sample.design);
  const EstimateResult r = est.estimate(sample.observations);
  const char* kase = r.kase == KernelCase::A ? "A" : r.kase == KernelCase::B ? "B" : "C";
  json report = {{"config", to_json(ctx.rc)},
                 {"seed", c.seed},
                 {"points", sample.design.points()},
                 {"theta_blue", vec_json(r.theta_blue)},
                 {"theta_shrunk", vec_json(r.theta_shrunk)},
                 {"shrink_factor", r.shrink_factor},
                 {"case", kase},
                 {"c_or_m", r.c_or_m},
                 {"theta_riemann", vec_json(est.riemann(sample.observations))}};
  emit(ctx, "estimate.json", report);
  return 0;
}

int cmd_oracle(const Context& ctx) {
  const SimulationConfig& c = ctx.rc.sim;
  const auto kernel = c.kernel.build();
  const auto f = FunctionModel::by_name(c.model);
  const OracleMeasure m = oracle_measure(kernel, f, ctx.rc.oracle.theta_j);
  const int G = ctx.rc.oracle.grid_points;
  std::vector<double> grid(G);
  json density = json::array();
  for (int i = 0; i < G; ++i) {
    grid[i] = static_cast<double>(i) / (G - 1);
    density.push_back({{"t", grid[i]}, {"p", m.p(grid[i])}});
  }
  json residual = nullptr;
  if (m.kase != KernelCase::C) {
    residual = verify_optimality(m, kernel, f, grid);
  }
  const char* kase = m.kase == KernelCase::A ? "A" : m.kase == KernelCase::B ? "B" : "C";
  json report = {{"config", to_json(ctx.rc)},
                 {"seed", c.seed},
                 {"case", kase},
                 {"theta_j", m.theta_j},
                 {"c", m.c},
                 {"P0", m.P0},
                 {"P1", m.P1},
                 {"p", density},
                 {"mise", oracle_mise(kernel, f)},
                 {"verification_residual", residual}};
  emit(ctx, "oracle.json", report);
  return 0;
}

// ---------------------------------------------------------------------------
// Reference reproduction

struct ReferenceKernel {
  std::string label;
  KernelSpec spec;
};

const std::vector<ReferenceKernel>& reference_kernels() {
  static const std::vector<ReferenceKernel> k{
      {"exponential L=1", {"exponential", 1.0}},
      {"exponential L=5", {"exponential", 5.0}},
      {"brownian", {"brownian", 1.0}},
  };
  return k;
}

std::vector<double> reference_points(const KernelSpec& k, int n) {
  if (k.type == "brownian") {
    return n == 4 ? std::vector<double>{0.0, 0.25, 0.47, 1.0}
                  : std::vector<double>{0.0, 0.22, 0.28, 0.50, 0.72, 0.78, 1.0};
  }
  if (k.L == 1.0) {
    return n == 4 ? std::vector<double>{0.0, 0.25, 0.52, 1.0}
                  : std::vector<double>{0.0, 0.12, 0.27, 0.45, 0.57, 0.77, 1.0};
  }
  return n == 4 ? std::vector<double>{0.0, 0.25, 0.51, 1.0}
                : std::vector<double>{0.0, 0.12, 0.27, 0.45, 0.57, 0.76, 1.0};
}

/// Tabulated MISE; index by kernel (0..2), model (0, 1), estimator (shrunk, blue), column (opt4, cmp4, opt7, cmp7).
double reference_mise(int kernel, int model, EstimatorKind e, int column) {
  static const double table[3][2][2][4] = {
      {{{1.72, 2.06, 1.58, 1.59}, {1.89, 2.22, 1.76, 1.77}}, {{1.67, 2.04, 1.54, 1.56}, {1.89, 2.21, 1.76, 1.79}}},
      {{{0.65, 2.13, 0.47, 0.51}, {0.77, 2.30, 0.58, 0.62}}, {{0.64, 2.09, 0.43, 0.43}, {0.81, 2.30, 0.59, 0.59}}},
      {{{0.16, 0.41, 0.13, 0.14}, {0.15, 0.43, 0.12, 0.12}}, {{0.13, 0.45, 0.11, 0.11}, {0.15, 0.48, 0.12, 0.13}}},
  };
  return table[kernel][model][e == EstimatorKind::Shrunk ? 0 : 1][column];
}

const std::vector<std::string>& reference_models() {
  static const std::vector<std::string> m{"4t(t-1)", "sqrt(t(1-t))"};
  return m;
}

int cmd_reproduce(const Context& ctx) {
  const RunConfig& rc = ctx.rc;
  const auto basis_spec = rc.sim.basis;
  const std::vector<int> sizes{4, 7};

  if (ctx.dry_run) {
    std::cout << "reproduce-paper plan (seed " << rc.sim.seed << ", S " << rc.reproduce.S << ")\n";
    for (const auto& k : reference_kernels()) {
      for (int n : sizes) {
        std::cout << "optimize  kernel=" << k.label << " J=" << basis_spec.J << " n=" << n
                  << " pso.iterations=" << rc.sim.pso.iterations << "\n";
      }
    }
    for (const auto& k : reference_kernels()) {
      for (int n : sizes) {
        for (const char* d : {"optimal", "comparative"}) {
          for (const auto& m : reference_models()) {
            std::cout << "simulate  kernel=" << k.label << " n=" << n << " design=" << d << " model=" << m
                      << " estimators=shrunk,blue S=" << rc.reproduce.S << "\n";
          }
        }
      }
    }
    std::cout << "outputs   " << (ctx.out / "designs.csv").string() << ", " << (ctx.out / "mise.csv").string()
              << ", " << (ctx.out / "reproduce.json").string() << ", " << (ctx.out / "tables.md").string() << "\n";
    return 0;
  }

  const json config = to_json(rc);
  std::ostringstream designs_csv, mise_csv, md;
  designs_csv << csv_preamble(config)
              << "kernel,L,J,n,reference_points,computed_points,reference_criterion,computed_criterion\n";
  mise_csv << csv_preamble(config)
           << "kernel,L,J,n,design_name,model,estimator,S,seed,reference_mise,mise,stderr\n";
  md << "# Reference vs computed\n\nSeed " << rc.sim.seed << ", S = " << rc.reproduce.S << ".\n\n";
  md << "## Designs\n\n| kernel | n | reference points | computed points | reference criterion | computed criterion |\n"
     << "|---|---|---|---|---|---|\n";

  json runs = json::array();
  json design_runs = json::array();
  std::vector<std::vector<DesignGrid>> optimal(reference_kernels().size());

  for (std::size_t ki = 0; ki < reference_kernels().size(); ++ki) {
    const auto& k = reference_kernels()[ki];
    const auto kernel = k.spec.build();
    const auto basis = basis_spec.build();
    for (int n : sizes) {
      const OptimizedDesign d = optimize_design(kernel, basis, n, rc.sim.pso, rc.sim.min_gap);
      optimal[ki].push_back(d.design);
      const auto pp = reference_points(k.spec, n);
      const double pc = criterion(kernel, basis, DesignGrid(pp, 0.0));
      designs_csv << k.spec.type << ',' << fmt(k.spec.L) << ',' << basis_spec.J << ',' << n << ','
                  << join_points(pp) << ',' << join_points(d.design.points()) << ',' << fmt(pc) << ','
                  << fmt(d.criterion) << '\n';
      md << "| " << k.label << " | " << n << " | " << join_points(pp) << " | " << join_points(d.design.points())
         << " | " << fmt(pc) << " | " << fmt(d.criterion) << " |\n";
      design_runs.push_back({{"kernel", k.label},
                             {"n", n},
                             {"reference_points", pp},
                             {"points", d.design.points()},
                             {"reference_criterion", number_or_null(pc)},
                             {"criterion", number_or_null(d.criterion)}});
    }
  }

  md << "\n## MISE\n\n| kernel | n | design | model | estimator | reference | computed | stderr |\n"
     << "|---|---|---|---|---|---|---|---|\n";
  for (std::size_t ki = 0; ki < reference_kernels().size(); ++ki) {
    const auto& k = reference_kernels()[ki];
    for (std::size_t ni = 0; ni < sizes.size(); ++ni) {
      const int n = sizes[ni];
      for (int comparative = 0; comparative < 2; ++comparative) {
        const DesignGrid design = comparative ? comparative_design(n) : optimal[ki][ni];
        const std::string design_name = comparative ? "comparative-n" + std::to_string(n) : "optimal";
        for (std::size_t mi = 0; mi < reference_models().size(); ++mi) {
          SimulationConfig sc = rc.sim;
          sc.kernel = k.spec;
          sc.model = reference_models()[mi];
          sc.design_name = "explicit";
          sc.points = design.points();
          sc.n = n;
          sc.S = rc.reproduce.S;
          sc.estimators = {EstimatorKind::Shrunk, EstimatorKind::Blue};
          const SimulationReport r = run_mise(sc, design);
          json entry = simulation_json(r);
          entry["kernel"] = k.label;
          entry["design_name"] = design_name;
          entry["model"] = sc.model;
          runs.push_back(entry);
          for (const auto& e : r.estimators) {
            const double reference = reference_mise(static_cast<int>(ki), static_cast<int>(mi), e.kind,
                                            static_cast<int>(2 * ni) + comparative);
            mise_csv << k.spec.type << ',' << fmt(k.spec.L) << ',' << basis_spec.J << ',' << n << ','
                     << design_name << ',' << sc.model << ',' << to_string(e.kind) << ',' << r.S << ',' << r.seed
                     << ',' << fmt(reference) << ',' << fmt(e.mise) << ',' << fmt(e.stderr_) << '\n';
            md << "| " << k.label << " | " << n << " | " << design_name << " | " << sc.model << " | "
               << to_string(e.kind) << " | " << fmt(reference) << " | " << std::fixed << std::setprecision(3)
               << e.mise << " | " << e.stderr_ << " |\n"
               << std::defaultfloat;
          }
        }
      }
    }
  }

  write_atomic(ctx.out / "designs.csv", designs_csv.str());
  write_atomic(ctx.out / "mise.csv", mise_csv.str());
  write_atomic(ctx.out / "tables.md", md.str());
  const json report = {{"config", config}, {"seed", rc.sim.seed}, {"designs", design_runs}, {"simulations", runs}};
  write_atomic(ctx.out / "reproduce.json", report.dump(2) + "\n");
  std::cout << md.str();
  return 0;
}

// ---------------------------------------------------------------------------

struct Flags {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<int> n;
  std::optional<double> min_gap;
  std::optional<int> S;
  std::string data;
  bool dry_run = false;
};

Context make_context(const Flags& flags) {
  Context ctx;
  json root = json::object();
  if (!flags.config.empty()) {
    std::ifstream in(flags.config);
    if (!in) {
      throw ConfigError("--config", "cannot open '" + flags.config + "'");
    }
    try {
      root = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("--config", e.what());
    }
  }
  ctx.rc = parse_config(root);
  if (flags.seed) {
    ctx.rc.sim.seed = *flags.seed;
  }
  if (!ctx.rc.pso_seed_explicit || flags.seed) {
    ctx.rc.sim.pso.seed = ctx.rc.sim.seed;
  }
  if (flags.threads) {
    ctx.rc.sim.threads = *flags.threads;
  }
  if (flags.n) {
    ctx.rc.sim.n = *flags.n;
  }
  if (flags.min_gap) {
    ctx.rc.sim.min_gap = *flags.min_gap;
  }
  if (flags.S) {
    ctx.rc.sim.S = *flags.S;
    ctx.rc.reproduce.S = *flags.S;
  }
  if (!flags.data.empty()) {
    ctx.rc.data = flags.data;
  }
  validate_config(ctx.rc);
  ctx.out = flags.out;
  ctx.dry_run = flags.dry_run;
  return ctx;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal designs and shrinkage series estimators under Markovian correlated errors"};
  app.require_subcommand(1);
  Flags flags;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "JSON config file");
    sub->add_option("--out", flags.out, "Output directory")->capture_default_str();
    sub->add_option("--seed", flags.seed, "Master seed override");
    sub->add_option("--threads", flags.threads, "Worker threads (0 = all cores)");
    sub->add_flag("--dry-run", flags.dry_run, "Print the planned runs without computing");
  };
  CLI::App* optimize = app.add_subcommand("optimize", "Optimize design points");
  add_common(optimize);
  optimize->add_option("--n", flags.n, "Number of design points");
  optimize->add_option("--min-gap", flags.min_gap, "Minimal spacing between points");
  CLI::App* simulate = app.add_subcommand("simulate", "Monte-Carlo MISE of the estimators");
  add_common(simulate);
  simulate->add_option("--S", flags.S, "Replicates");
  CLI::App* estimate = app.add_subcommand("estimate", "Estimate coefficients from a CSV of t,Y pairs");
  add_common(estimate);
  estimate->add_option("--data", flags.data, "CSV of t,Y pairs");
  CLI::App* oracle = app.add_subcommand("oracle", "Oracle measure and MISE for a known model");
  add_common(oracle);
  CLI::App* reproduce = app.add_subcommand("reproduce-paper", "Design and MISE tables for the published setups");
  add_common(reproduce);
  reproduce->add_option("--S", flags.S, "Replicates per simulation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const Context ctx = make_context(flags);
    if (ctx.dry_run && !reproduce->parsed()) {
      std::cout << "dry run: config valid\n" << to_json(ctx.rc).dump(2) << "\n";
      return 0;
    }
    if (optimize->parsed()) {
      return cmd_optimize(ctx);
    }
    if (simulate->parsed()) {
      return cmd_simulate(ctx);
    }
    if (estimate->parsed()) {
      return cmd_estimate(ctx);
    }
    if (oracle->parsed()) {
      return cmd_oracle(ctx);
    }
    return cmd_reproduce(ctx);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ContractViolation& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
