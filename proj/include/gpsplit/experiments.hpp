#pragma once

// Experiment drivers built on a RunConfig: convergence-order sweeps, long-term
// conservation, tolerance/step-count quotients and ground state followed by
// real-time evolution. Rows run concurrently up to a worker budget; a row that
// diverges is recorded and the remaining rows still run.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gpsplit/config.hpp"
#include "gpsplit/io.hpp"

namespace gpsplit {

/// Grid and problem described by the configuration.
Problem make_problem(const RunConfig& cfg);

/// Initial state of run.init in run.time.
State initial_state(const Problem& problem, const RunConfig& cfg);

/// Least-squares slope of log(err) over log(tau), using entries that are finite
/// and at least `floor`. NaN with fewer than two usable points.
double fit_slope(const std::vector<double>& taus, const std::vector<double>& errs, double floor,
                 int* used = nullptr);

struct SweepRow {
  std::string method;
  double tau = 0.0;
  std::int64_t steps = 0;
  /// ||psi - ref|| / ||ref|| in the discrete L2 norm.
  double err_l2 = 0.0;
  /// max |psi - ref| / max |ref|.
  double err_max = 0.0;
  std::int64_t transforms = 0;
  std::optional<std::string> failure;
};

struct SlopeFit {
  std::string method;
  double slope_l2 = 0.0;
  double slope_max = 0.0;
  int points_l2 = 0;
  int points_max = 0;
};

struct OrderSweepResult {
  std::vector<SweepRow> rows;
  std::vector<SlopeFit> slopes;
  bool exact_reference = false;
  /// Difference between the two refined references (zero for exact ones).
  double noise_l2 = 0.0;
  double noise_max = 0.0;
  /// Errors below these values are left out of the fits.
  double floor_l2 = 1e-12;
  double floor_max = 1e-12;
  std::int64_t reference_transforms = 0;
};

/// Every run.methods entry at every run.taus entry up to run.t_end. The
/// reference is the exact Hermite solution when available, otherwise
/// chin_modified4 at min(taus) / 16; a second run at min(taus) / 32 measures
/// the reference noise, and the fit floor is max(1e-12, 10 * noise).
OrderSweepResult order_sweep(const RunConfig& cfg, int workers = 1);

struct EnergyRow {
  std::string label;
  std::string method;
  bool adaptive = false;
  /// Fixed step, or the tolerance for adaptive rows.
  double parameter = 0.0;
  std::int64_t accepted = 0;
  std::int64_t rejected = 0;
  std::int64_t transforms = 0;
  /// max_n |E_n - E_0| / |E_0| and the same for the total mass.
  double max_energy_drift = 0.0;
  double max_mass_drift = 0.0;
  std::vector<ObservableRecord> records;
  std::optional<std::string> failure;
};

/// Fixed-step rows (run.methods at run.tau0) and adaptive rows (run.tols),
/// each integrated to run.t_end with full diagnostics.
std::vector<EnergyRow> energy_longterm(const RunConfig& cfg, int workers = 1);

struct QuotientRow {
  ErrorStrategy strategy = ErrorStrategy::A;
  double tol = 0.0;
  std::int64_t accepted = 0;
  std::int64_t rejected = 0;
  std::int64_t transforms = 0;
  std::optional<std::string> failure;
};

struct QuotientStat {
  ErrorStrategy strategy = ErrorStrategy::A;
  /// Mean ratio of consecutive tolerances and of consecutive step counts.
  double mean_q1 = 0.0;
  double mean_q2 = 0.0;
  /// ln(Q1) / ln(Q2), ideally the local order.
  double log_ratio = 0.0;
  /// Q1^(1 / p_loc).
  double expected_q2 = 0.0;
};

struct QuotientResult {
  std::vector<QuotientRow> rows;
  std::vector<QuotientStat> stats;
};

/// Adaptive runs to run.t_end for both error strategies over run.tols.
QuotientResult quotient_check(const RunConfig& cfg, int workers = 1);

/// Ground state with the run block's descent settings.
GroundStateResult compute_ground_state(const Problem& problem, const RunConfig& cfg,
                                       const Sink& sink = {});

struct StationarityResult {
  GroundStateResult ground;
  std::optional<EvolveResult> evolution;
  /// max_j max_x | |psi_j(T)| - |phi_j| |.
  double max_abs_change = 0.0;
  std::vector<ObservableRecord> ground_records;
  std::vector<ObservableRecord> evolve_records;
};

using StateObserver = std::function<void(const State&, std::int64_t)>;

/// Ground state, then real-time evolution over run.t_end with run.evolution.
/// No evolution is attempted when the descent diverged.
StationarityResult groundstate_then_evolve(const RunConfig& cfg,
                                           const StateObserver& observer = {});

struct ExperimentSummary {
  RunMode mode = RunMode::evolve;
  std::vector<std::string> files;
  std::int64_t transforms = 0;
  int failed_rows = 0;
  /// The single trajectory of evolve / groundstate / groundstate_then_evolve diverged.
  bool diverged = false;
  std::optional<std::string> failure;
  double seconds = 0.0;
};

/// Runs run.mode and writes its artifacts plus manifest.json into `out_dir`.
ExperimentSummary run_experiment(const RunConfig& cfg, const std::string& out_dir,
                                 int workers = 1);

/// SHA-256 of the coefficient table of every catalogued method.
std::string coefficient_table_hash();

}  // namespace gpsplit
