#include "gpsplit/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

#include "json.hpp"

namespace gpsplit {

namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Runs fn(i) for i < n on up to `workers` threads. Divergences are the row's
/// business; any other exception is rethrown after all rows finished.
template <typename F>
void parallel_rows(std::size_t n, int workers, F&& fn) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (std::size_t i; (i = next++) < n;) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const std::size_t count = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), 1, std::max<std::size_t>(n, 1));
  std::vector<std::thread> threads;
  for (std::size_t k = 1; k < count; ++k) threads.emplace_back(body);
  body();
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

Stepper make_stepper(const std::string& method, double tau0, bool adaptive,
                     const ControllerParams& params) {
  if (adaptive) return AdaptiveStepper{params, tau0};
  return FixedStepper{method_catalog(method), tau0};
}

double max_abs(const Components& psi) {
  double m = 0.0;
  for (const auto& f : psi) m = std::max(m, f.abs().maxCoeff());
  return m;
}

double max_diff(const Components& a, const Components& b) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, (a[j] - b[j]).abs().maxCoeff());
  return m;
}

double l2_diff(const SpectralGrid& g, const Components& a, const Components& b) {
  Components d = a;
  for (std::size_t j = 0; j < d.size(); ++j) d[j] -= b[j];
  return discrete_norm(g, d);
}

bool exact_reference_available(const Problem& p, const RunConfig& cfg) {
  const auto& s = p.spec();
  return p.linear() && s.gamma.isZero(0.0) && p.negative_alpha() &&
         (s.beta.array() > 0.0).all() && cfg.run.init == InitKind::hermite &&
         cfg.run.time == Mode::real;
}

EvolveOptions options_for(int refine, bool emit_initial) {
  EvolveOptions o;
  o.refine = refine;
  o.emit_initial = emit_initial;
  return o;
}

std::string strategy_name(ErrorStrategy s) { return s == ErrorStrategy::A ? "A" : "B"; }

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

/// Keeps commas and newlines out of CSV cells.
std::string clean(const std::string& s) {
  std::string out = s;
  std::replace(out.begin(), out.end(), ',', ';');
  std::replace(out.begin(), out.end(), '\n', ' ');
  return out;
}

class TextFile {
 public:
  explicit TextFile(const std::string& path) : path_(path), out_(path) {
    if (!out_) throw IoError("cannot open '" + path + "' for writing");
  }
  template <typename T>
  TextFile& operator<<(const T& v) {
    out_ << v;
    return *this;
  }
  void close() {
    out_.close();
    if (!out_) throw IoError("write failed: '" + path_ + "'");
  }

 private:
  std::string path_;
  std::ofstream out_;
};

}  // namespace

Problem make_problem(const RunConfig& cfg) {
  return Problem(cfg.problem, build_grid(cfg.grid));
}

State initial_state(const Problem& p, const RunConfig& cfg) {
  return init_state(p, cfg.run.init, cfg.run.time, cfg.run.center);
}

double fit_slope(const std::vector<double>& taus, const std::vector<double>& errs, double floor,
                 int* used) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < taus.size() && i < errs.size(); ++i)
    if (std::isfinite(errs[i]) && errs[i] >= floor && errs[i] > 0.0) {
      x.push_back(std::log(taus[i]));
      y.push_back(std::log(errs[i]));
    }
  if (used) *used = static_cast<int>(x.size());
  if (x.size() < 2) return kNaN;
  const Eigen::Map<const Eigen::ArrayXd> xs(x.data(), static_cast<Eigen::Index>(x.size()));
  const Eigen::Map<const Eigen::ArrayXd> ys(y.data(), static_cast<Eigen::Index>(y.size()));
  const Eigen::ArrayXd dx = xs - xs.mean();
  return (dx * (ys - ys.mean())).sum() / dx.square().sum();
}

OrderSweepResult order_sweep(const RunConfig& cfg, int workers) {
  const Problem p = make_problem(cfg);
  const State init = initial_state(p, cfg);
  const auto& rs = cfg.run;
  const double t_end = rs.t_end;
  OrderSweepResult out;

  bool exact = exact_reference_available(p, cfg);
  if (rs.reference == "exact" && !exact)
    throw ConfigError("run.reference: no exact solution for this problem and initial state");
  if (rs.reference == "refined") exact = false;
  out.exact_reference = exact;

  Components reference;
  if (exact) {
    reference = hermite_state(p, t_end);
  } else {
    const double tau_min = *std::min_element(rs.taus.begin(), rs.taus.end());
    const MethodSpec fine = method_catalog("chin_modified4");
    std::vector<EvolveResult> refs(2);
    parallel_rows(2, workers, [&](std::size_t k) {
      Fourier fft(p.grid_ptr());
      refs[k] = evolve(p, fft, init, t_end, FixedStepper{fine, tau_min / (k == 0 ? 16.0 : 32.0)}, {},
                       options_for(rs.refine, false));
    });
    for (const auto& r : refs) {
      if (r.failure) throw DivergenceError("order sweep reference: " + *r.failure);
      out.reference_transforms += r.transforms;
    }
    reference = refs[0].state.psi;
    const double ref_l2 = discrete_norm(p.grid(), reference);
    const double ref_max = max_abs(reference);
    out.noise_l2 = l2_diff(p.grid(), refs[0].state.psi, refs[1].state.psi) / ref_l2;
    out.noise_max = max_diff(refs[0].state.psi, refs[1].state.psi) / ref_max;
    out.floor_l2 = std::max(1e-12, 10.0 * out.noise_l2);
    out.floor_max = std::max(1e-12, 10.0 * out.noise_max);
  }
  const double ref_l2 = discrete_norm(p.grid(), reference);
  const double ref_max = max_abs(reference);

  for (const auto& m : rs.methods)
    for (double tau : rs.taus) {
      SweepRow row;
      row.method = m;
      row.tau = tau;
      out.rows.push_back(row);
    }
  parallel_rows(out.rows.size(), workers, [&](std::size_t i) {
    SweepRow& row = out.rows[i];
    Fourier fft(p.grid_ptr());
    const EvolveResult r = evolve(p, fft, init, t_end, FixedStepper{method_catalog(row.method), row.tau},
                                  {}, options_for(rs.refine, false));
    row.steps = r.accepted;
    row.transforms = r.transforms;
    if (r.failure) {
      row.failure = r.failure;
      row.err_l2 = row.err_max = kNaN;
      return;
    }
    row.err_l2 = l2_diff(p.grid(), r.state.psi, reference) / ref_l2;
    row.err_max = max_diff(r.state.psi, reference) / ref_max;
  });

  for (const auto& m : rs.methods) {
    std::vector<double> taus, l2, mx;
    for (const auto& row : out.rows)
      if (row.method == m) {
        taus.push_back(row.tau);
        l2.push_back(row.err_l2);
        mx.push_back(row.err_max);
      }
    SlopeFit fit{.method = m};
    fit.slope_l2 = fit_slope(taus, l2, out.floor_l2, &fit.points_l2);
    fit.slope_max = fit_slope(taus, mx, out.floor_max, &fit.points_max);
    out.slopes.push_back(fit);
  }
  return out;
}

std::vector<EnergyRow> energy_longterm(const RunConfig& cfg, int workers) {
  const Problem p = make_problem(cfg);
  const State init = initial_state(p, cfg);
  const auto& rs = cfg.run;
  std::vector<EnergyRow> rows;
  for (const auto& m : rs.methods) {
    EnergyRow row;
    row.label = m + "_tau" + short_fmt(rs.tau0);
    row.method = m;
    row.parameter = rs.tau0;
    rows.push_back(row);
  }
  for (double tol : rs.tols) {
    EnergyRow row;
    row.label = "adaptive_tol" + short_fmt(tol);
    row.method = "chin_modified4/strang";
    row.adaptive = true;
    row.parameter = tol;
    rows.push_back(row);
  }

  parallel_rows(rows.size(), workers, [&](std::size_t i) {
    EnergyRow& row = rows[i];
    ControllerParams params = rs.controller;
    if (row.adaptive) params.tol = row.parameter;
    const Stepper stepper = make_stepper(row.method, rs.tau0, row.adaptive, params);
    Fourier fft(p.grid_ptr());
    const EvolveResult r =
        evolve(p, fft, init, rs.t_end, stepper,
               [&](const ObservableRecord& rec) { row.records.push_back(rec); },
               options_for(rs.refine, true));
    row.accepted = r.accepted;
    row.rejected = r.rejected;
    row.transforms = r.transforms;
    row.failure = r.failure;
    if (row.records.empty()) return;
    const double e0 = row.records.front().E;
    const double m0 = row.records.front().mass_total;
    for (const auto& rec : row.records) {
      row.max_energy_drift = std::max(row.max_energy_drift, std::abs(rec.E - e0) / std::abs(e0));
      row.max_mass_drift = std::max(row.max_mass_drift, std::abs(rec.mass_total - m0) / m0);
    }
  });
  return rows;
}

QuotientResult quotient_check(const RunConfig& cfg, int workers) {
  const Problem p = make_problem(cfg);
  const State init = initial_state(p, cfg);
  const auto& rs = cfg.run;
  QuotientResult out;
  for (auto s : {ErrorStrategy::A, ErrorStrategy::B})
    for (double tol : rs.tols) {
      QuotientRow row;
      row.strategy = s;
      row.tol = tol;
      out.rows.push_back(row);
    }
  parallel_rows(out.rows.size(), workers, [&](std::size_t i) {
    QuotientRow& row = out.rows[i];
    ControllerParams params = rs.controller;
    params.tol = row.tol;
    params.strategy = row.strategy;
    Fourier fft(p.grid_ptr());
    const EvolveResult r = evolve(p, fft, init, rs.t_end, AdaptiveStepper{params, rs.tau0}, {},
                                  options_for(rs.refine, false));
    row.accepted = r.accepted;
    row.rejected = r.rejected;
    row.transforms = r.transforms;
    row.failure = r.failure;
  });

  for (auto s : {ErrorStrategy::A, ErrorStrategy::B}) {
    std::vector<const QuotientRow*> sel;
    for (const auto& row : out.rows)
      if (row.strategy == s) sel.push_back(&row);
    QuotientStat stat{.strategy = s};
    int pairs = 0;
    for (std::size_t k = 1; k < sel.size(); ++k) {
      if (sel[k]->failure || sel[k - 1]->failure || sel[k - 1]->accepted == 0) continue;
      stat.mean_q1 += sel[k - 1]->tol / sel[k]->tol;
      stat.mean_q2 += static_cast<double>(sel[k]->accepted) / static_cast<double>(sel[k - 1]->accepted);
      ++pairs;
    }
    if (pairs > 0) {
      stat.mean_q1 /= pairs;
      stat.mean_q2 /= pairs;
      stat.log_ratio = std::log(stat.mean_q1) / std::log(stat.mean_q2);
    } else {
      stat.mean_q1 = stat.mean_q2 = stat.log_ratio = kNaN;
    }
    ControllerParams cp;
    cp.strategy = s;
    stat.expected_q2 = std::pow(stat.mean_q1, 1.0 / cp.local_order());
    out.stats.push_back(stat);
  }
  return out;
}

GroundStateResult compute_ground_state(const Problem& p, const RunConfig& cfg, const Sink& sink) {
  const auto& rs = cfg.run;
  Fourier fft(p.grid_ptr());
  State s = init_state(p, rs.init, Mode::imaginary, rs.center);
  const DescentOptions options{.refine = rs.refine, .energy_shift = rs.energy_shift};
  if (rs.descent == Descent::momentum)
    return momentum_descent(p, fft, std::move(s), rs.momentum, rs.stop, options, sink);
  return propagate_imaginary(p, fft, std::move(s),
                             make_stepper(rs.method, rs.tau0, rs.adaptive, rs.controller), rs.stop,
                             options, sink);
}

StationarityResult groundstate_then_evolve(const RunConfig& cfg, const StateObserver& observer) {
  const Problem p = make_problem(cfg);
  StationarityResult out;
  out.ground = compute_ground_state(
      p, cfg, [&](const ObservableRecord& r) { out.ground_records.push_back(r); });
  if (out.ground.reason == StopReason::divergence) {
    out.max_abs_change = kNaN;
    return out;
  }
  const auto& ev = cfg.run.evolution;
  ControllerParams params = cfg.run.controller;
  params.tol = ev.tol;
  State s;
  s.mode = Mode::real;
  s.psi = out.ground.phi;
  Fourier fft(p.grid_ptr());
  EvolveOptions options;
  options.observer = observer;
  out.evolution = evolve(p, fft, std::move(s), cfg.run.t_end,
                         make_stepper(ev.method, ev.tau0, ev.adaptive, params),
                         [&](const ObservableRecord& r) { out.evolve_records.push_back(r); }, options);
  double change = 0.0;
  for (std::size_t j = 0; j < out.ground.phi.size(); ++j)
    change = std::max(change,
                      (out.evolution->state.psi[j].abs() - out.ground.phi[j].abs()).abs().maxCoeff());
  out.max_abs_change = out.evolution->failure ? kNaN : change;
  return out;
}

std::string coefficient_table_hash() {
  std::string table;
  for (const auto& name : method_names()) {
    const MethodSpec m = method_catalog(name);
    table += m.name + " order " + std::to_string(m.order) + "\n";
    for (int i = 0; i < m.stages(); ++i)
      table += fmt(m.a[i]) + " " + fmt(m.b[i]) + " " + fmt(m.c[i]) + "\n";
  }
  return sha256_hex(table);
}

namespace {

struct Artifacts {
  fs::path dir;
  std::vector<std::string> files;
  std::mutex mutex;

  std::string path(const std::string& name) {
    std::lock_guard lock(mutex);
    files.push_back(name);
    return (dir / name).string();
  }
};

/// 3D fields become their x3 = 0 section unless full volumes are requested.
void write_field(Artifacts& art, const std::string& stem, const SpectralGrid& grid,
                 const State& state, bool full_volume) {
  if (grid.dim() == 3 && !full_volume) {
    const Snapshot sec = section_x3_zero(grid, state);
    const SpectralGrid plane(sec.grid);
    snapshot_write(art.path(stem + "_x3_0.gpss"), plane, sec.state);
  } else {
    snapshot_write(art.path(stem + ".gpss"), grid, state);
  }
}

std::string join_mu(const std::vector<double>& mu) {
  std::string s;
  for (double m : mu) s += "," + fmt(m);
  return s;
}

std::string mu_header(int J) {
  std::string s;
  for (int j = 1; j <= J; ++j) s += ",mu_" + std::to_string(j);
  return s;
}

void write_ground_summary(Artifacts& art, const std::string& name, const GroundStateResult& g,
                          int J) {
  TextFile f(art.path(name));
  f << "reason,iterations,t,energy,residual,rejected,transforms" << mu_header(J) << ",message\n";
  f << std::string(to_string(g.reason)) << "," << g.iterations << "," << fmt(g.t) << ","
    << fmt(g.energy) << "," << fmt(g.residual) << "," << g.rejected << "," << g.transforms
    << (g.mu.empty() ? std::string(J, ',') : join_mu(g.mu)) << "," << clean(g.message) << "\n";
  f.close();
}

}  // namespace

ExperimentSummary run_experiment(const RunConfig& cfg, const std::string& out_dir, int workers) {
  const auto start = std::chrono::steady_clock::now();
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + out_dir + "': " + ec.message());
  Artifacts art;
  art.dir = out_dir;
  ExperimentSummary summary;
  summary.mode = cfg.run.mode;
  const auto& rs = cfg.run;
  const int J = cfg.problem.components;
  nlohmann::json extra = nlohmann::json::object();

  switch (rs.mode) {
    case RunMode::evolve: {
      const Problem p = make_problem(cfg);
      Fourier fft(p.grid_ptr());
      DiagnosticsWriter diag(art.path("diagnostics.csv"), J);
      EvolveOptions options = options_for(rs.refine, true);
      if (cfg.output.snapshot_every > 0)
        options.observer = [&](const State& s, std::int64_t step) {
          if (step % cfg.output.snapshot_every == 0)
            write_field(art, "snapshot_" + std::to_string(step), p.grid(), s,
                        cfg.output.full_volume);
        };
      const EvolveResult r =
          evolve(p, fft, initial_state(p, cfg), rs.t_end,
                 make_stepper(rs.method, rs.tau0, rs.adaptive, rs.controller),
                 [&](const ObservableRecord& rec) { diag.write(rec); }, options);
      diag.close();
      summary.transforms = r.transforms;
      if (r.failure) {
        summary.diverged = true;
        summary.failure = r.failure;
        extra["failure_stage"] = r.failure_stage;
      } else {
        write_field(art, "final", p.grid(), r.state, cfg.output.full_volume);
      }
      extra["accepted"] = r.accepted;
      extra["rejected"] = r.rejected;
      break;
    }
    case RunMode::groundstate: {
      const Problem p = make_problem(cfg);
      DiagnosticsWriter diag(art.path("groundstate.csv"), J);
      const GroundStateResult g =
          compute_ground_state(p, cfg, [&](const ObservableRecord& rec) { diag.write(rec); });
      diag.close();
      write_ground_summary(art, "groundstate_summary.csv", g, J);
      summary.transforms = g.transforms;
      if (g.reason == StopReason::divergence) {
        summary.diverged = true;
        summary.failure = g.message;
      } else {
        write_field(art, "groundstate", p.grid(), State{g.t, Mode::imaginary, g.phi},
                    cfg.output.full_volume);
      }
      extra["reason"] = std::string(to_string(g.reason));
      extra["iterations"] = g.iterations;
      break;
    }
    case RunMode::groundstate_then_evolve: {
      const Problem p = make_problem(cfg);
      StateObserver observer;
      if (cfg.output.snapshot_every > 0)
        observer = [&](const State& s, std::int64_t step) {
          if (step % cfg.output.snapshot_every == 0)
            write_field(art, "evolve_" + std::to_string(step), p.grid(), s, cfg.output.full_volume);
        };
      const StationarityResult r = groundstate_then_evolve(cfg, observer);
      write_diagnostics(art.path("groundstate.csv"), J, r.ground_records);
      write_ground_summary(art, "groundstate_summary.csv", r.ground, J);
      summary.transforms = r.ground.transforms;
      if (r.ground.reason == StopReason::divergence) {
        summary.diverged = true;
        summary.failure = r.ground.message;
        break;
      }
      write_field(art, "groundstate", p.grid(), State{0.0, Mode::imaginary, r.ground.phi},
                  cfg.output.full_volume);
      write_diagnostics(art.path("evolve.csv"), J, r.evolve_records);
      summary.transforms += r.evolution->transforms;
      if (r.evolution->failure) {
        summary.diverged = true;
        summary.failure = r.evolution->failure;
      } else {
        write_field(art, "final", p.grid(), r.evolution->state, cfg.output.full_volume);
      }
      TextFile f(art.path("stationarity.csv"));
      f << "t_end,max_abs_change,ground_reason,ground_iterations,ground_residual\n";
      f << fmt(rs.t_end) << "," << fmt(r.max_abs_change) << ","
        << std::string(to_string(r.ground.reason)) << "," << r.ground.iterations << ","
        << fmt(r.ground.residual) << "\n";
      f.close();
      extra["max_abs_change"] = r.max_abs_change;
      break;
    }
    case RunMode::order_sweep: {
      const OrderSweepResult r = order_sweep(cfg, workers);
      TextFile table(art.path("order_sweep.csv"));
      table << "method,tau,steps,err_l2,err_max,transforms,status\n";
      for (const auto& row : r.rows) {
        table << row.method << "," << fmt(row.tau) << "," << row.steps << "," << fmt(row.err_l2)
              << "," << fmt(row.err_max) << "," << row.transforms << ","
              << (row.failure ? "failed: " + clean(*row.failure) : std::string("ok")) << "\n";
        summary.transforms += row.transforms;
        if (row.failure) ++summary.failed_rows;
      }
      table.close();
      TextFile slopes(art.path("order_slopes.csv"));
      slopes << "method,slope_l2,slope_max,points_l2,points_max\n";
      for (const auto& s : r.slopes)
        slopes << s.method << "," << fmt(s.slope_l2) << "," << fmt(s.slope_max) << ","
               << s.points_l2 << "," << s.points_max << "\n";
      slopes.close();
      summary.transforms += r.reference_transforms;
      extra["reference"] = r.exact_reference ? "exact" : "refined";
      extra["fit_floor_l2"] = r.floor_l2;
      extra["fit_floor_max"] = r.floor_max;
      break;
    }
    case RunMode::energy_longterm: {
      const auto rows = energy_longterm(cfg, workers);
      TextFile table(art.path("energy_summary.csv"));
      table << "label,method,adaptive,parameter,accepted,rejected,transforms,max_energy_drift,"
               "max_mass_drift,status\n";
      for (const auto& row : rows) {
        write_diagnostics(art.path("energy_" + row.label + ".csv"), J, row.records);
        table << row.label << "," << row.method << "," << (row.adaptive ? 1 : 0) << ","
              << fmt(row.parameter) << "," << row.accepted << "," << row.rejected << ","
              << row.transforms << "," << fmt(row.max_energy_drift) << ","
              << fmt(row.max_mass_drift) << ","
              << (row.failure ? "failed: " + clean(*row.failure) : std::string("ok")) << "\n";
        summary.transforms += row.transforms;
        if (row.failure) ++summary.failed_rows;
      }
      table.close();
      break;
    }
    case RunMode::quotient_check: {
      const QuotientResult r = quotient_check(cfg, workers);
      TextFile table(art.path("quotient_check.csv"));
      table << "strategy,tol,accepted,rejected,transforms,status\n";
      for (const auto& row : r.rows) {
        table << strategy_name(row.strategy) << "," << fmt(row.tol) << "," << row.accepted << ","
              << row.rejected << "," << row.transforms << ","
              << (row.failure ? "failed: " + clean(*row.failure) : std::string("ok")) << "\n";
        summary.transforms += row.transforms;
        if (row.failure) ++summary.failed_rows;
      }
      table.close();
      TextFile stats(art.path("quotient_summary.csv"));
      stats << "strategy,mean_q1,mean_q2,log_ratio,expected_q2\n";
      for (const auto& s : r.stats)
        stats << strategy_name(s.strategy) << "," << fmt(s.mean_q1) << "," << fmt(s.mean_q2)
              << "," << fmt(s.log_ratio) << "," << fmt(s.expected_q2) << "\n";
      stats.close();
      break;
    }
  }

  summary.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  summary.files = art.files;

  nlohmann::json manifest;
  manifest["mode"] = std::string(to_string(rs.mode));
  const std::string yaml = cfg.to_yaml();
  manifest["config"] = yaml;
  manifest["config_sha256"] = sha256_hex(yaml);
  manifest["coefficients_sha256"] = coefficient_table_hash();
  manifest["transforms"] = summary.transforms;
  manifest["workers"] = workers;
  manifest["wall_seconds"] = summary.seconds;
  manifest["failed_rows"] = summary.failed_rows;
  manifest["diverged"] = summary.diverged;
  if (summary.failure) manifest["failure"] = *summary.failure;
  manifest["provenance"] = cfg.provenance;
  manifest["results"] = extra;
  nlohmann::json files = nlohmann::json::array();
  std::vector<std::string> sorted = summary.files;
  std::sort(sorted.begin(), sorted.end());
  for (const auto& name : sorted) {
    const fs::path path = art.dir / name;
    files.push_back({{"name", name},
                     {"bytes", static_cast<std::int64_t>(fs::file_size(path))},
                     {"sha256", sha256_file(path.string())}});
  }
  manifest["files"] = files;
  TextFile mf((art.dir / "manifest.json").string());
  mf << manifest.dump(2) << "\n";
  mf.close();
  summary.files.push_back("manifest.json");
  return summary;
}

}  // namespace gpsplit
