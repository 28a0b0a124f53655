#include "gpsplit/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "gpsplit/errors.hpp"

namespace gpsplit {

std::string_view to_string(RunMode mode) {
  switch (mode) {
    case RunMode::evolve: return "evolve";
    case RunMode::groundstate: return "groundstate";
    case RunMode::groundstate_then_evolve: return "groundstate_then_evolve";
    case RunMode::order_sweep: return "order_sweep";
    case RunMode::energy_longterm: return "energy_longterm";
    case RunMode::quotient_check: return "quotient_check";
  }
  return "?";
}

int default_refine(int dim, bool modified_method) {
  if (dim <= 1) return 1;
  if (dim == 2) return modified_method ? 8 : 4;
  return 16;
}

namespace {

const std::set<std::string> kTopKeys = {"problem", "grid", "run", "output"};
const std::set<std::string> kProblemKeys = {"J",  "d",     "alpha", "beta", "gamma", "delta",
                                            "theta", "n0", "C1",    "C2",   "C3",    "C4"};
const std::set<std::string> kGridKeys = {"omega", "points"};
const std::set<std::string> kRunKeys = {
    "mode",       "time",      "method",  "adaptive", "tau0",         "t_end",     "tol",
    "strategy",   "refine",    "max_iter", "energy_tol", "patience",  "energy_shift", "init", "center",
    "descent",    "damping",   "momentum_tau", "methods", "taus",     "tols",      "reference",
    "controller", "evolution"};
const std::set<std::string> kEvolutionKeys = {"method", "tau0", "adaptive", "tol"};
const std::set<std::string> kControllerKeys = {"safety",  "fac_min", "fac_max",       "tau_min",
                                               "tau_max", "max_rejections", "exponent"};
const std::set<std::string> kOutputKeys = {"dir", "snapshot_every", "full_volume"};

class Reader {
 public:
  Reader(std::set<std::string> overridden, std::map<std::string, std::string>& provenance)
      : overridden_(std::move(overridden)), provenance_(provenance) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& path,
                         const std::string& msg) const {
    std::ostringstream os;
    if (overridden_.count(path)) {
      os << "override ";
    } else if (node.IsDefined() && node.Mark().line >= 0) {
      os << "line " << node.Mark().line + 1 << ", column " << node.Mark().column + 1 << ": ";
    }
    os << path << ": " << msg;
    throw ConfigError(os.str());
  }

  void check_keys(const YAML::Node& block, const std::string& path,
                  const std::set<std::string>& allowed) const {
    if (!block.IsDefined() || block.IsNull()) return;
    if (!block.IsMap()) fail(block, path, "expected a mapping");
    for (const auto& kv : block) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) {
        const std::string full = path.empty() ? key : path + "." + key;
        fail(kv.first, full, "unknown key");
      }
    }
  }

  /// Records provenance and returns the node (possibly undefined).
  YAML::Node field(const YAML::Node& block, const std::string& path, const std::string& key) {
    const std::string full = path + "." + key;
    YAML::Node n;
    if (block.IsDefined() && block.IsMap() && block[key]) n = block[key];
    provenance_[full] = !n.IsDefined() || n.IsNull()    ? "default"
                        : overridden_.count(full) ? "override"
                                                  : "explicit";
    return n;
  }

  /// Canonical key or its alias; both present is an error.
  YAML::Node field_alias(const YAML::Node& block, const std::string& path, const std::string& key,
                         const std::string& alias) {
    YAML::Node a = field(block, path, key);
    YAML::Node b;
    if (block.IsDefined() && block.IsMap() && block[alias]) b = block[alias];
    if (present(a) && present(b)) fail(b, path + "." + alias, "duplicates " + path + "." + key);
    if (present(b)) {
      provenance_[path + "." + key] =
          overridden_.count(path + "." + alias) ? "override" : "explicit";
      alias_used_[path + "." + key] = path + "." + alias;
      return b;
    }
    return a;
  }

  std::string display(const std::string& path) const {
    auto it = alias_used_.find(path);
    return it == alias_used_.end() ? path : it->second;
  }

  static bool present(const YAML::Node& n) { return n.IsDefined() && !n.IsNull(); }

  double number(const YAML::Node& n, const std::string& path) const {
    if (!n.IsScalar()) fail(n, path, "expected a number");
    double v = 0.0;
    try {
      v = n.as<double>();
    } catch (const YAML::Exception&) {
      fail(n, path, "expected a number, got '" + n.Scalar() + "'");
    }
    if (!std::isfinite(v)) fail(n, path, "must be finite");
    return v;
  }

  std::int64_t integer(const YAML::Node& n, const std::string& path) const {
    const double v = number(n, path);
    if (v != std::floor(v) || std::abs(v) > 9e15) fail(n, path, "expected an integer");
    return static_cast<std::int64_t>(v);
  }

  bool boolean(const YAML::Node& n, const std::string& path) const {
    if (!n.IsScalar()) fail(n, path, "expected true or false");
    try {
      return n.as<bool>();
    } catch (const YAML::Exception&) {
      fail(n, path, "expected true or false, got '" + n.Scalar() + "'");
    }
  }

  std::string text(const YAML::Node& n, const std::string& path) const {
    if (!n.IsScalar()) fail(n, path, "expected a string");
    return n.Scalar();
  }

  std::string choice(const YAML::Node& n, const std::string& path,
                     const std::vector<std::string>& options) const {
    const std::string v = text(n, path);
    for (const auto& o : options)
      if (o == v) return v;
    std::string list;
    for (const auto& o : options) list += (list.empty() ? "" : "|") + o;
    fail(n, path, "expected one of " + list + ", got '" + v + "'");
  }

  std::vector<double> numbers(const YAML::Node& n, const std::string& path) const {
    std::vector<double> out;
    if (n.IsScalar()) return {number(n, path)};
    if (!n.IsSequence()) fail(n, path, "expected a list of numbers");
    for (std::size_t i = 0; i < n.size(); ++i)
      out.push_back(number(n[i], path + "[" + std::to_string(i) + "]"));
    return out;
  }

  /// rows x cols table. A scalar fills every entry when `broadcast` is set (or
  /// the table is 1x1); a flat list of length cols is repeated for every row
  /// under the same rule.
  Eigen::MatrixXd table(const YAML::Node& n, const std::string& path, int rows, int cols,
                        bool broadcast) const {
    const std::string shape = std::to_string(rows) + "x" + std::to_string(cols);
    Eigen::MatrixXd m(rows, cols);
    if (n.IsScalar()) {
      if (!broadcast && rows * cols != 1) fail(n, path, "expected " + shape + " matrix, got scalar");
      m.setConstant(number(n, path));
      return m;
    }
    if (!n.IsSequence() || n.size() == 0) fail(n, path, "expected " + shape + " matrix");
    if (n[0].IsScalar()) {
      if (static_cast<int>(n.size()) != cols || (!broadcast && rows != 1))
        fail(n, path,
             "expected " + shape + " matrix, got 1x" + std::to_string(n.size()));
      for (int k = 0; k < cols; ++k) m.col(k).setConstant(number(n[k], path + "[" + std::to_string(k) + "]"));
      return m;
    }
    const int got_rows = static_cast<int>(n.size());
    const int got_cols = n[0].IsSequence() ? static_cast<int>(n[0].size()) : -1;
    if (got_rows != rows || got_cols != cols)
      fail(n, path,
           "expected " + shape + " matrix, got " + std::to_string(got_rows) + "x" +
               std::to_string(got_cols));
    for (int r = 0; r < rows; ++r) {
      const YAML::Node row = n[r];
      const std::string rp = path + "[" + std::to_string(r) + "]";
      if (!row.IsSequence() || static_cast<int>(row.size()) != cols)
        fail(row, rp, "expected " + std::to_string(cols) + " entries");
      for (int k = 0; k < cols; ++k) m(r, k) = number(row[k], rp + "[" + std::to_string(k) + "]");
    }
    return m;
  }

 private:
  std::set<std::string> overridden_;
  std::map<std::string, std::string>& provenance_;
  std::map<std::string, std::string> alias_used_;
};

/// Sets root[a][b]...= value, creating intermediate maps.
void apply_override(YAML::Node& root, const std::string& spec, std::set<std::string>& touched) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override '" + spec + "': expected key=value");
  const std::string path = spec.substr(0, eq);
  const std::string value = spec.substr(eq + 1);
  std::vector<std::string> keys;
  std::stringstream ss(path);
  for (std::string k; std::getline(ss, k, '.');) {
    if (k.empty()) throw ConfigError("override '" + spec + "': empty path segment");
    keys.push_back(k);
  }
  YAML::Node parsed;
  try {
    parsed = YAML::Load(value);
  } catch (const YAML::Exception& e) {
    throw ConfigError("override " + path + ": " + e.msg);
  }
  // yaml-cpp nodes are handles; walk with fresh handles to avoid aliasing.
  std::vector<YAML::Node> chain{root};
  for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
    YAML::Node next = chain.back()[keys[i]];
    if (next.IsDefined() && !next.IsNull() && !next.IsMap())
      throw ConfigError("override " + path + ": '" + keys[i] + "' is not a mapping");
    if (!next.IsDefined() || next.IsNull()) {
      chain.back()[keys[i]] = YAML::Node(YAML::NodeType::Map);
      next = chain.back()[keys[i]];
    }
    chain.push_back(next);
  }
  chain.back()[keys.back()] = parsed;
  touched.insert(path);
}

RunMode parse_mode(const std::string& s) {
  if (s == "evolve") return RunMode::evolve;
  if (s == "groundstate") return RunMode::groundstate;
  if (s == "groundstate_then_evolve") return RunMode::groundstate_then_evolve;
  if (s == "order_sweep") return RunMode::order_sweep;
  if (s == "energy_longterm") return RunMode::energy_longterm;
  return RunMode::quotient_check;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides,
                       bool paper_mode) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    std::ostringstream os;
    os << "line " << e.mark.line + 1 << ", column " << e.mark.column + 1 << ": " << e.msg;
    throw ConfigError(os.str());
  }
  if (root.IsNull() || !root.IsDefined()) root = YAML::Node(YAML::NodeType::Map);
  if (!root.IsMap()) throw ConfigError("configuration must be a mapping");

  std::set<std::string> touched;
  for (const auto& o : overrides) apply_override(root, o, touched);

  RunConfig cfg;
  Reader rd(touched, cfg.provenance);
  rd.check_keys(root, "", kTopKeys);
  const YAML::Node problem = root["problem"];
  const YAML::Node grid = root["grid"];
  const YAML::Node run = root["run"];
  const YAML::Node output = root["output"];
  rd.check_keys(problem, "problem", kProblemKeys);
  rd.check_keys(grid, "grid", kGridKeys);
  rd.check_keys(run, "run", kRunKeys);
  rd.check_keys(output, "output", kOutputKeys);

  // problem
  ProblemSpec& ps = cfg.problem;
  if (auto n = rd.field(problem, "problem", "J"); Reader::present(n)) {
    ps.components = static_cast<int>(rd.integer(n, "problem.J"));
    if (ps.components != 1 && ps.components != 2) rd.fail(n, "problem.J", "must be 1 or 2");
  }
  if (auto n = rd.field(problem, "problem", "d"); Reader::present(n)) {
    ps.dim = static_cast<int>(rd.integer(n, "problem.d"));
    if (ps.dim < 1 || ps.dim > 3) rd.fail(n, "problem.d", "must be 1, 2 or 3");
  }
  const int J = ps.components;
  const int d = ps.dim;
  auto jd_table = [&](const std::string& key, const std::string& alias, double fallback) {
    const YAML::Node n = alias.empty() ? rd.field(problem, "problem", key)
                                       : rd.field_alias(problem, "problem", key, alias);
    if (!Reader::present(n)) return Eigen::MatrixXd::Constant(J, d, fallback).eval();
    return rd.table(n, rd.display("problem." + key), J, d, true);
  };
  ps.alpha = jd_table("alpha", "C1", -0.5);
  ps.beta = jd_table("beta", "C2", 0.5);
  ps.gamma = jd_table("gamma", "C3", 0.0);
  ps.delta = jd_table("delta", "", 0.0);
  if (auto n = rd.field_alias(problem, "problem", "theta", "C4"); Reader::present(n)) {
    ps.theta = rd.table(n, rd.display("problem.theta"), J, J, false);
  } else {
    ps.theta = Eigen::MatrixXd::Zero(J, J);
  }
  if (auto n = rd.field(problem, "problem", "n0"); Reader::present(n)) {
    ps.n0 = rd.table(n, "problem.n0", 1, J, true).row(0).transpose();
    for (int j = 0; j < J; ++j)
      if (!(ps.n0[j] > 0.0)) rd.fail(n, "problem.n0", "entries must be positive");
  } else {
    ps.n0 = Eigen::VectorXd::Ones(J);
  }
  if (J == 2 && ps.theta(0, 1) != ps.theta(1, 0))
    rd.fail(problem["theta"].IsDefined() ? problem["theta"] : problem["C4"],
            rd.display("problem.theta"), "must be symmetric");

  // grid
  cfg.grid.omega.assign(d, 10.0);
  cfg.grid.points.assign(d, 512);
  if (auto n = rd.field(grid, "grid", "omega"); Reader::present(n)) {
    const auto row = rd.table(n, "grid.omega", 1, d, true);
    for (int i = 0; i < d; ++i) {
      cfg.grid.omega[i] = row(0, i);
      if (!(row(0, i) > 0.0)) rd.fail(n, "grid.omega", "must be positive");
    }
  }
  if (auto n = rd.field(grid, "grid", "points"); Reader::present(n)) {
    const auto row = rd.table(n, "grid.points", 1, d, true);
    for (int i = 0; i < d; ++i) {
      const double m = row(0, i);
      if (m != std::floor(m) || m < 2 || static_cast<std::int64_t>(m) % 2 != 0)
        rd.fail(n, "grid.points", "must be even integers >= 2");
      cfg.grid.points[i] = static_cast<int>(m);
    }
  }

  // run
  RunSettings& rs = cfg.run;
  if (auto n = rd.field(run, "run", "mode"); Reader::present(n))
    rs.mode = parse_mode(rd.choice(n, "run.mode",
                                   {"evolve", "groundstate", "groundstate_then_evolve",
                                    "order_sweep", "energy_longterm", "quotient_check"}));
  const bool descent_mode =
      rs.mode == RunMode::groundstate || rs.mode == RunMode::groundstate_then_evolve;
  rs.time = descent_mode ? Mode::imaginary : Mode::real;
  if (auto n = rd.field(run, "run", "time"); Reader::present(n)) {
    rs.time = rd.choice(n, "run.time", {"real", "imaginary"}) == "real" ? Mode::real
                                                                         : Mode::imaginary;
    if (descent_mode && rs.time == Mode::real)
      rd.fail(n, "run.time", "ground-state modes propagate in imaginary time");
  }
  const auto names = method_names();
  if (auto n = rd.field(run, "run", "method"); Reader::present(n))
    rs.method = rd.choice(n, "run.method", names);
  if (auto n = rd.field(run, "run", "adaptive"); Reader::present(n))
    rs.adaptive = rd.boolean(n, "run.adaptive");
  if (auto n = rd.field(run, "run", "tau0"); Reader::present(n)) {
    rs.tau0 = rd.number(n, "run.tau0");
    if (!(rs.tau0 > 0.0)) rd.fail(n, "run.tau0", "must be positive");
  }
  if (auto n = rd.field(run, "run", "t_end"); Reader::present(n)) {
    rs.t_end = rd.number(n, "run.t_end");
    if (!(rs.t_end > 0.0)) rd.fail(n, "run.t_end", "must be positive");
  }
  ControllerParams& cp = rs.controller;
  if (auto n = rd.field(run, "run", "tol"); Reader::present(n)) cp.tol = rd.number(n, "run.tol");
  if (auto n = rd.field(run, "run", "strategy"); Reader::present(n))
    cp.strategy = rd.choice(n, "run.strategy", {"A", "B"}) == "A" ? ErrorStrategy::A
                                                                   : ErrorStrategy::B;
  const YAML::Node ctl = Reader::present(run) ? run["controller"] : YAML::Node();
  rd.check_keys(ctl, "run.controller", kControllerKeys);
  const std::string cpath = "run.controller";
  if (auto n = rd.field(ctl, cpath, "safety"); Reader::present(n)) cp.safety = rd.number(n, cpath + ".safety");
  if (auto n = rd.field(ctl, cpath, "fac_min"); Reader::present(n)) cp.fac_min = rd.number(n, cpath + ".fac_min");
  if (auto n = rd.field(ctl, cpath, "fac_max"); Reader::present(n)) cp.fac_max = rd.number(n, cpath + ".fac_max");
  if (auto n = rd.field(ctl, cpath, "tau_min"); Reader::present(n)) cp.tau_min = rd.number(n, cpath + ".tau_min");
  if (auto n = rd.field(ctl, cpath, "tau_max"); Reader::present(n)) cp.tau_max = rd.number(n, cpath + ".tau_max");
  if (auto n = rd.field(ctl, cpath, "max_rejections"); Reader::present(n))
    cp.max_rejections = static_cast<int>(rd.integer(n, cpath + ".max_rejections"));
  if (auto n = rd.field(ctl, cpath, "exponent"); Reader::present(n)) cp.exponent = rd.number(n, cpath + ".exponent");
  if (paper_mode) {
    cp.fac_max = 1.0;
    cfg.provenance[cpath + ".fac_max"] = "paper-mode";
  }
  try {
    cp.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("run.") + e.what());
  }

  const bool modified = method_catalog(rs.method).modified() || rs.adaptive;
  rs.refine = rs.time == Mode::imaginary ? default_refine(d, modified) : 1;
  if (auto n = rd.field(run, "run", "refine"); Reader::present(n)) {
    rs.refine = static_cast<int>(rd.integer(n, "run.refine"));
    if (rs.refine < 1) rd.fail(n, "run.refine", "must be at least 1");
  }
  if (auto n = rd.field(run, "run", "max_iter"); Reader::present(n)) {
    rs.stop.max_iter = rd.integer(n, "run.max_iter");
    if (rs.stop.max_iter < 1) rd.fail(n, "run.max_iter", "must be at least 1");
  }
  if (auto n = rd.field(run, "run", "energy_tol"); Reader::present(n)) {
    rs.stop.energy_tol = rd.number(n, "run.energy_tol");
    if (!(rs.stop.energy_tol > 0.0)) rd.fail(n, "run.energy_tol", "must be positive");
  }
  if (auto n = rd.field(run, "run", "patience"); Reader::present(n)) {
    rs.stop.patience = static_cast<int>(rd.integer(n, "run.patience"));
    if (rs.stop.patience < 1) rd.fail(n, "run.patience", "must be at least 1");
  }
  if (auto n = rd.field(run, "run", "energy_shift"); Reader::present(n))
    rs.energy_shift = rd.boolean(n, "run.energy_shift");
  rs.init = descent_mode ? InitKind::gaussian : InitKind::hermite;
  if (auto n = rd.field(run, "run", "init"); Reader::present(n))
    rs.init = parse_init_kind(
        rd.choice(n, "run.init", {"constant", "gaussian", "hermite", "thomas_fermi"}));
  if (auto n = rd.field(run, "run", "center"); Reader::present(n)) {
    const auto row = rd.table(n, "run.center", 1, d, false);
    rs.center.assign(row.data(), row.data() + d);
  }
  if (auto n = rd.field(run, "run", "descent"); Reader::present(n))
    rs.descent = rd.choice(n, "run.descent", {"imaginary", "momentum"}) == "imaginary"
                     ? Descent::imaginary
                     : Descent::momentum;
  if (auto n = rd.field(run, "run", "damping"); Reader::present(n)) {
    rs.momentum.damping = rd.number(n, "run.damping");
    if (!(rs.momentum.damping > 0.0)) rd.fail(n, "run.damping", "must be positive");
  }
  if (auto n = rd.field(run, "run", "momentum_tau"); Reader::present(n)) {
    rs.momentum.tau = rd.number(n, "run.momentum_tau");
    if (!(rs.momentum.tau > 0.0)) rd.fail(n, "run.momentum_tau", "must be positive");
  }
  if (auto n = rd.field(run, "run", "methods"); Reader::present(n)) {
    if (!n.IsSequence() || n.size() == 0) rd.fail(n, "run.methods", "expected a non-empty list");
    for (std::size_t i = 0; i < n.size(); ++i)
      rs.methods.push_back(rd.choice(n[i], "run.methods[" + std::to_string(i) + "]", names));
  }
  if (auto n = rd.field(run, "run", "taus"); Reader::present(n)) {
    rs.taus = rd.numbers(n, "run.taus");
    for (double t : rs.taus)
      if (!(t > 0.0)) rd.fail(n, "run.taus", "entries must be positive");
  }
  if (auto n = rd.field(run, "run", "tols"); Reader::present(n)) {
    rs.tols = rd.numbers(n, "run.tols");
    for (double t : rs.tols)
      if (!(t > 0.0)) rd.fail(n, "run.tols", "entries must be positive");
  }
  if (auto n = rd.field(run, "run", "reference"); Reader::present(n))
    rs.reference = rd.choice(n, "run.reference", {"auto", "exact", "refined"});

  EvolutionSettings& ev = rs.evolution;
  ev = {rs.method, rs.tau0, rs.adaptive, cp.tol};
  const YAML::Node evo = Reader::present(run) ? run["evolution"] : YAML::Node();
  rd.check_keys(evo, "run.evolution", kEvolutionKeys);
  if (auto n = rd.field(evo, "run.evolution", "method"); Reader::present(n))
    ev.method = rd.choice(n, "run.evolution.method", names);
  if (auto n = rd.field(evo, "run.evolution", "tau0"); Reader::present(n)) {
    ev.tau0 = rd.number(n, "run.evolution.tau0");
    if (!(ev.tau0 > 0.0)) rd.fail(n, "run.evolution.tau0", "must be positive");
  }
  if (auto n = rd.field(evo, "run.evolution", "adaptive"); Reader::present(n))
    ev.adaptive = rd.boolean(n, "run.evolution.adaptive");
  if (auto n = rd.field(evo, "run.evolution", "tol"); Reader::present(n)) {
    ev.tol = rd.number(n, "run.evolution.tol");
    if (!(ev.tol > 0.0)) rd.fail(n, "run.evolution.tol", "must be positive");
  }

  // Mode-specific defaults.
  if (rs.mode == RunMode::order_sweep) {
    if (rs.methods.empty()) rs.methods = {"lie", "strang", "blanes_moan4", "chin_modified4"};
    if (rs.taus.empty())
      for (int k = 3; k <= 10; ++k) rs.taus.push_back(std::ldexp(1.0, -k));
  }
  if (rs.mode == RunMode::energy_longterm && rs.methods.empty() && rs.tols.empty())
    rs.methods = {"strang", "yoshida4", "blanes_moan4", "chin_modified4"};
  if (rs.mode == RunMode::quotient_check && rs.tols.empty())
    rs.tols = {1e-4, 1e-5, 1e-6, 1e-7, 1e-8};

  // output
  if (auto n = rd.field(output, "output", "dir"); Reader::present(n))
    cfg.output.dir = rd.text(n, "output.dir");
  if (auto n = rd.field(output, "output", "snapshot_every"); Reader::present(n)) {
    cfg.output.snapshot_every = rd.integer(n, "output.snapshot_every");
    if (cfg.output.snapshot_every < 0) rd.fail(n, "output.snapshot_every", "must be non-negative");
  }
  if (auto n = rd.field(output, "output", "full_volume"); Reader::present(n))
    cfg.output.full_volume = rd.boolean(n, "output.full_volume");

  // Cross-field requirements.
  if (descent_mode) {
    for (int j = 0; j < J; ++j)
      for (int i = 0; i < d; ++i)
        if (!(ps.alpha(j, i) < 0.0)) {
          const std::string path = rd.display("problem.alpha");
          YAML::Node n = problem["alpha"].IsDefined() ? problem["alpha"] : problem["C1"];
          rd.fail(n, path,
                  "ground-state modes need strictly negative Laplacian weights (entry " +
                      std::to_string(j) + "," + std::to_string(i) + " is " +
                      std::to_string(ps.alpha(j, i)) + ")");
        }
  }
  if (rs.mode == RunMode::order_sweep && rs.taus.size() < 2)
    throw ConfigError("run.taus: order_sweep needs at least two step sizes");
  if (rs.mode == RunMode::quotient_check && rs.tols.size() < 2)
    throw ConfigError("run.tols: quotient_check needs at least two tolerances");
  if (rs.mode == RunMode::energy_longterm && rs.methods.empty() && rs.tols.empty())
    throw ConfigError("run: energy_longterm needs run.methods or run.tols");
  if (rs.reference == "exact" && (!ps.theta.isZero(0.0) || !ps.gamma.isZero(0.0)))
    throw ConfigError("run.reference: exact reference needs a linear problem without lattice");
  return cfg;
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides,
                      bool paper_mode) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str(), overrides, paper_mode);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

namespace {

void emit_matrix(YAML::Emitter& out, const Eigen::MatrixXd& m) {
  out << YAML::Flow << YAML::BeginSeq;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    out << YAML::Flow << YAML::BeginSeq;
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << m(r, c);
    out << YAML::EndSeq;
  }
  out << YAML::EndSeq;
}

template <typename T>
void emit_list(YAML::Emitter& out, const std::vector<T>& v) {
  out << YAML::Flow << YAML::BeginSeq;
  for (const auto& x : v) out << x;
  out << YAML::EndSeq;
}

}  // namespace

std::string RunConfig::to_yaml() const {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "problem" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "J" << YAML::Value << problem.components;
  out << YAML::Key << "d" << YAML::Value << problem.dim;
  out << YAML::Key << "alpha" << YAML::Value;
  emit_matrix(out, problem.alpha);
  out << YAML::Key << "beta" << YAML::Value;
  emit_matrix(out, problem.beta);
  out << YAML::Key << "gamma" << YAML::Value;
  emit_matrix(out, problem.gamma);
  out << YAML::Key << "delta" << YAML::Value;
  emit_matrix(out, problem.delta);
  out << YAML::Key << "theta" << YAML::Value;
  emit_matrix(out, problem.theta);
  out << YAML::Key << "n0" << YAML::Value;
  emit_list(out, std::vector<double>(problem.n0.data(), problem.n0.data() + problem.n0.size()));
  out << YAML::EndMap;

  out << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "omega" << YAML::Value;
  emit_list(out, grid.omega);
  out << YAML::Key << "points" << YAML::Value;
  emit_list(out, grid.points);
  out << YAML::EndMap;

  const auto& c = run.controller;
  out << YAML::Key << "run" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "mode" << YAML::Value << std::string(to_string(run.mode));
  out << YAML::Key << "time" << YAML::Value << (run.time == Mode::real ? "real" : "imaginary");
  out << YAML::Key << "method" << YAML::Value << run.method;
  out << YAML::Key << "adaptive" << YAML::Value << run.adaptive;
  out << YAML::Key << "tau0" << YAML::Value << run.tau0;
  out << YAML::Key << "t_end" << YAML::Value << run.t_end;
  out << YAML::Key << "tol" << YAML::Value << c.tol;
  out << YAML::Key << "strategy" << YAML::Value << (c.strategy == ErrorStrategy::A ? "A" : "B");
  out << YAML::Key << "refine" << YAML::Value << run.refine;
  out << YAML::Key << "max_iter" << YAML::Value << run.stop.max_iter;
  out << YAML::Key << "energy_tol" << YAML::Value << run.stop.energy_tol;
  out << YAML::Key << "patience" << YAML::Value << run.stop.patience;
  out << YAML::Key << "energy_shift" << YAML::Value << run.energy_shift;
  out << YAML::Key << "init" << YAML::Value << std::string(to_string(run.init));
  if (!run.center.empty()) {
    out << YAML::Key << "center" << YAML::Value;
    emit_list(out, run.center);
  }
  out << YAML::Key << "descent" << YAML::Value
      << (run.descent == Descent::imaginary ? "imaginary" : "momentum");
  out << YAML::Key << "damping" << YAML::Value << run.momentum.damping;
  out << YAML::Key << "momentum_tau" << YAML::Value << run.momentum.tau;
  if (!run.methods.empty()) {
    out << YAML::Key << "methods" << YAML::Value;
    emit_list(out, run.methods);
  }
  if (!run.taus.empty()) {
    out << YAML::Key << "taus" << YAML::Value;
    emit_list(out, run.taus);
  }
  if (!run.tols.empty()) {
    out << YAML::Key << "tols" << YAML::Value;
    emit_list(out, run.tols);
  }
  out << YAML::Key << "reference" << YAML::Value << run.reference;
  out << YAML::Key << "controller" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "safety" << YAML::Value << c.safety;
  out << YAML::Key << "fac_min" << YAML::Value << c.fac_min;
  out << YAML::Key << "fac_max" << YAML::Value << c.fac_max;
  out << YAML::Key << "tau_min" << YAML::Value << c.tau_min;
  out << YAML::Key << "tau_max" << YAML::Value << c.tau_max;
  out << YAML::Key << "max_rejections" << YAML::Value << c.max_rejections;
  if (c.exponent) out << YAML::Key << "exponent" << YAML::Value << *c.exponent;
  out << YAML::EndMap;
  out << YAML::Key << "evolution" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "method" << YAML::Value << run.evolution.method;
  out << YAML::Key << "tau0" << YAML::Value << run.evolution.tau0;
  out << YAML::Key << "adaptive" << YAML::Value << run.evolution.adaptive;
  out << YAML::Key << "tol" << YAML::Value << run.evolution.tol;
  out << YAML::EndMap;
  out << YAML::EndMap;

  out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "dir" << YAML::Value << output.dir;
  out << YAML::Key << "snapshot_every" << YAML::Value << output.snapshot_every;
  out << YAML::Key << "full_volume" << YAML::Value << output.full_volume;
  out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace gpsplit
