// Acceptance run: one PASS/FAIL line per criterion, with the measured values,
// the wall time and the time budget. Exit status 1 if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "gpsplit/commutators.hpp"
#include "gpsplit/experiments.hpp"
#include "gpsplit/groundstate.hpp"
#include "support.hpp"

namespace gpsplit {
namespace {

using testing::grid;
using testing::max_abs;
using testing::max_diff;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok) { pass = pass && ok; }
};

RunConfig config(const std::string& name, const std::vector<std::string>& overrides = {}) {
  return load_config(std::string(GPSPLIT_CONFIGS) + "/" + name, overrides);
}

int workers() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

double field_error(const Components& a, const Components& b) {
  Components neg = b;
  for (auto& f : neg) f = -f;
  return std::min(max_diff(a, b), max_diff(a, neg));
}

StopRule stop_rule(double energy_tol, std::int64_t max_iter = 20000, int patience = 1) {
  StopRule r;
  r.energy_tol = energy_tol;
  r.max_iter = max_iter;
  r.patience = patience;
  return r;
}

AdaptiveStepper adaptive_chin(double tol, double tau0 = 0.1) {
  AdaptiveStepper s{ControllerParams{}, tau0};
  s.params.tol = tol;
  return s;
}

// Slopes of the listed methods, each within its tolerance.
void check_orders(const OrderSweepResult& r, Outcome& out) {
  const std::map<std::string, std::pair<double, double>> expected = {
      {"lie", {1.0, 0.2}}, {"strang", {2.0, 0.2}},
      {"blanes_moan4", {4.0, 0.3}}, {"chin_modified4", {4.0, 0.3}}};
  for (const auto& row : r.rows) out.check(!row.failure);
  for (const auto& [method, target] : expected) {
    const auto it = std::find_if(r.slopes.begin(), r.slopes.end(),
                                 [&](const SlopeFit& s) { return s.method == method; });
    const double slope = it == r.slopes.end() ? NAN : it->slope_l2;
    out.check(std::abs(slope - target.first) <= target.second);
    out.detail << method << " " << slope << " (" << target.first << "+-" << target.second << ") ";
  }
}

void orders_linear(Outcome& out) {
  const RunConfig cfg =
      config("order_sweep_1d.yaml", {"run.methods=[lie, strang, blanes_moan4, chin_modified4]"});
  check_orders(order_sweep(cfg, workers()), out);
}

void orders_nonlinear(Outcome& out) {
  const RunConfig cfg = config("order_sweep_nonlinear_1d.yaml",
                               {"run.methods=[lie, strang, blanes_moan4, chin_modified4]"});
  const OrderSweepResult r = order_sweep(cfg, workers());
  check_orders(r, out);
  out.detail << "fit floor " << r.floor_l2;
}

void stability_contrast(Outcome& out) {
  const RunConfig fixed = config("groundstate_nonlinear_1d.yaml",
                                 {"run.adaptive=false", "run.method=blanes_moan4", "run.tau0=0.1"});
  const GroundStateResult bad = compute_ground_state(make_problem(fixed), fixed);
  const bool bad_failed = !(bad.converged && bad.residual <= 1e-6);
  out.check(bad_failed);
  out.detail << "blanes_moan4 tau 0.1: " << to_string(bad.reason) << " at iteration "
             << bad.iterations << (bad_failed ? " (not converged); " : " (converged); ");

  const RunConfig adaptive = config("groundstate_nonlinear_1d.yaml");
  const GroundStateResult good = compute_ground_state(make_problem(adaptive), adaptive);
  out.check(good.converged && good.residual <= 1e-6);
  out.detail << "adaptive chin_modified4 tol " << adaptive.run.controller.tol << ": "
             << to_string(good.reason) << ", residual " << good.residual << " (<= 1e-6)";
}

void quotients(Outcome& out) {
  const QuotientResult r = quotient_check(config("quotient_check_1d.yaml"), workers());
  for (const auto& row : r.rows) out.check(!row.failure);
  for (const auto& s : r.stats) {
    const bool a = s.strategy == ErrorStrategy::A;
    const double target = a ? 2.15 : 1.58;
    out.check(std::abs(s.mean_q2 - target) <= 0.15 * target);
    out.detail << (a ? "A " : "B ") << s.mean_q2 << " (" << target << "+-15%) ";
  }
  out.check(r.stats.size() == 2);
}

void conservation(Outcome& out) {
  const RunConfig cfg = config("energy_longterm_1d.yaml", {"run.tols=[]"});
  const auto rows = energy_longterm(cfg, workers());
  out.detail << std::llround(cfg.run.t_end / cfg.run.tau0) << " steps of " << cfg.run.tau0 << ": ";
  for (const auto& row : rows) {
    out.check(!row.failure);
    out.check(row.max_mass_drift <= 1e-10);
    const bool symmetric = method_catalog(row.method).symmetric();
    if (symmetric) out.check(row.max_energy_drift <= 1e-6);
    out.detail << row.method << " mass " << row.max_mass_drift;
    if (symmetric) out.detail << " energy " << row.max_energy_drift;
    out.detail << "; ";
  }
}

void commutator_oracle_agreement(Outcome& out) {
  struct Setup {
    const char* label;
    int components, dim;
    bool periodic;
  };
  const Setup setups[] = {{"J1d1", 1, 1, true},       {"J1d2", 1, 2, true},
                          {"J2d1", 2, 1, true},       {"J1d1-trap", 1, 1, false},
                          {"J1d2-trap", 1, 2, false}, {"J2d1-trap", 2, 1, false}};
  std::mt19937_64 rng(2024);
  for (const auto& s : setups) {
    const bool distinct_alpha = s.dim > 1 || s.components > 1;
    const ProblemSpec spec = testing::commutator_spec(s.components, s.dim, s.periodic, distinct_alpha);
    // Trapped states are Gaussian-localised and need the finer grid.
    const Problem p(spec, s.periodic ? grid(s.dim, 64, M_PI) : grid(s.dim, 128, 8.0));
    Fourier fft(p.grid_ptr());
    for (Mode mode : {Mode::real, Mode::imaginary}) {
      double worst = 0.0;
      for (int trial = 0; trial < 20; ++trial) {
        Components psi;
        for (int j = 0; j < s.components; ++j)
          psi.push_back(testing::random_smooth(fft, rng, mode == Mode::imaginary, !s.periodic));
        const Components closed = commutator(p, fft, psi, mode).g;
        const Components oracle = commutator_oracle(p, fft, psi, mode).g;
        worst = std::max(worst, max_diff(closed, oracle) / max_abs(closed));
      }
      out.check(worst <= 1e-6);
      out.detail << s.label << (mode == Mode::real ? "/re " : "/im ") << worst << " ";
    }
  }
  out.detail << "(20 states each, <= 1e-6)";
}

void invariance(Outcome& out) {
  const auto g = grid(1, 128, 8.0);
  Fourier fft(g);
  const Problem p(testing::coupled_lattice(), g);
  std::mt19937_64 rng(3);
  Components psi;
  for (int j = 0; j < 2; ++j) psi.push_back(testing::random_smooth(fft, rng, false, true));
  std::vector<double> taus, gaps;
  for (double tau : {0.4, 0.2, 0.1, 0.05}) {
    taus.push_back(tau);
    gaps.push_back(testing::invariance_gap(p, fft, psi, 0.7, -0.5, tau));
  }
  // Gaps at round-off level carry no order information.
  int used = 0;
  const double order = fit_slope(taus, gaps, 1e-13, &used);
  out.check(used >= 2 && order >= 3.8);
  out.detail << "J=2, c=-0.5: gaps";
  for (double g : gaps) out.detail << " " << g;
  out.detail << ", order " << order << " from " << used << " points (>= 3.8)";
}

void ground_state_oracles(Outcome& out) {
  for (int dim : {1, 2}) {
    const auto g = grid(dim, dim == 1 ? 256 : 64, 8.0);
    const Problem p(ProblemSpec::harmonic(dim, -0.5, 0.5, 0.0), g);
    Fourier fft(g);
    const GroundStateResult r = propagate_imaginary(p, fft, init_state(p, InitKind::constant),
                                                    adaptive_chin(1e-8), stop_rule(1e-15));
    const double err = field_error(r.phi, hermite_state(p));
    const double mu_err = std::abs(r.mu[0] - hermite_mu(p, 0));
    out.check(r.converged && err <= 1e-6 && mu_err <= 1e-8);
    out.detail << "hermite " << dim << "D: state " << err << " mu " << mu_err << "; ";
  }
  {
    const auto g = grid(1, 512, 12.0);
    const Problem p(ProblemSpec::harmonic(1, -0.5, 0.5, 200.0), g);
    Fourier fft(g);
    const GroundStateResult r = propagate_imaginary(p, fft, init_state(p, InitKind::thomas_fermi),
                                                    adaptive_chin(1e-6), stop_rule(1e-12));
    const double mu_tf = thomas_fermi_mu(p, 0);
    const double rel = std::abs(r.mu[0] - mu_tf) / mu_tf;
    out.check(r.converged && rel <= 0.05);
    out.detail << "theta 200: mu " << r.mu[0] << " vs TF " << mu_tf << " (" << 100 * rel << "%); ";
  }
  {
    const auto g = grid(1, 256, 10.0);
    const Problem p(ProblemSpec::harmonic(1, -0.5, 0.5, 1.0), g);
    Fourier fft(g);
    const State start = init_state(p, InitKind::gaussian);
    const GroundStateResult plain =
        propagate_imaginary(p, fft, start, adaptive_chin(1e-7), stop_rule(1e-15));
    const GroundStateResult momentum = momentum_descent(p, fft, start, MomentumParams{2.0, 0.005},
                                                        stop_rule(1e-15, 200000, 20));
    const double gap = field_error(momentum.phi, plain.phi);
    out.check(plain.converged && momentum.converged && gap <= 1e-6);
    out.detail << "momentum vs plain " << gap;
  }
}

void stationarity(Outcome& out) {
  const std::pair<const char*, double> runs[] = {{"stationarity_1d.yaml", 1e-6},
                                                 {"stationarity_2d.yaml", 1e-6},
                                                 {"stationarity_3d.yaml", 1e-5}};
  for (const auto& [name, bound] : runs) {
    const RunConfig cfg = config(name);
    const auto t0 = std::chrono::steady_clock::now();
    const StationarityResult r = groundstate_then_evolve(cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.check(r.ground.converged && r.evolution && !r.evolution->failure && r.max_abs_change <= bound);
    out.detail << cfg.grid.dim() << "D " << r.max_abs_change << " (<= " << bound << ", "
               << std::lround(secs) << " s); ";
  }
}

struct Criterion {
  const char* id;
  const char* title;
  double budget_seconds;
  std::function<void(Outcome&)> run;
};

}  // namespace
}  // namespace gpsplit

int main() {
  using namespace gpsplit;
  const Criterion criteria[] = {
      {"C1", "convergence orders, linear 1D", 60, orders_linear},
      {"C2", "convergence orders, nonlinear 1D", 120, orders_nonlinear},
      {"C3", "imaginary-time stability contrast", 60, stability_contrast},
      {"C4", "tolerance/step-count quotients", 300, quotients},
      {"C5", "mass and energy conservation", 120, conservation},
      {"C6", "commutator closed form vs oracle", 120, commutator_oracle_agreement},
      {"C7", "invariance principle order", 60, invariance},
      {"C8", "ground-state oracles", 180, ground_state_oracles},
      {"C9", "stationarity round trip", 600, stationarity},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome out;
    out.detail.precision(3);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(out);
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail << "exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_budget = secs <= c.budget_seconds;
    const bool pass = out.pass && in_budget;
    failed += pass ? 0 : 1;
    std::printf("%s %s %s: %s[%.1f s, budget %.0f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.title,
                out.detail.str().c_str(), secs, c.budget_seconds, in_budget ? "" : ", exceeded");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed,
              std::size(criteria));
  return failed == 0 ? 0 : 1;
}
