#pragma once

// Embedded fourth/second order pair and time-stepping drivers.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>

#include "gpsplit/splitting.hpp"

namespace gpsplit {

enum class ErrorStrategy {
  A,  // eps = Err, local order 3
  B,  // eps = tau^2 Err, local order 5
};

struct ControllerParams {
  double tol = 1e-6;
  ErrorStrategy strategy = ErrorStrategy::A;
  double safety = 0.9;
  double fac_min = 0.25;
  double fac_max = 2.0;
  double tau_min = 1e-12;
  double tau_max = 1.0;
  int max_rejections = 20;
  /// Overrides the controller exponent 1 / p_loc.
  std::optional<double> exponent;

  /// Throws ConfigError on inconsistent values.
  void validate() const;
  int local_order() const { return strategy == ErrorStrategy::A ? 3 : 5; }
};

struct StepResult {
  State state;  // accepted state, or the input state on rejection
  double tau_used = 0.0;
  double tau_next = 0.0;
  double err = 0.0;  // controlled quantity eps
  bool accepted = false;
};

/// One attempt with chin_modified4 and strang from the same state. The error
/// is ||Psi_M - Psi_S|| / sqrt(sum N0). Throws ControllerError when both
/// sub-steps diverge or the proposed step falls below tau_min.
StepResult embedded_step(const Problem& problem, Fourier& fft, const State& state, double tau,
                         const ControllerParams& params, int refine = 1);

/// tau * clamp(safety (tol / eps)^(1 / p_loc), fac_min, fac_max).
double propose_step(const ControllerParams& params, double tau, double eps);

struct FixedStepper {
  MethodSpec method;
  double tau = 0.0;
};

struct AdaptiveStepper {
  ControllerParams params;
  double tau0 = 0.1;
};

using Stepper = std::variant<FixedStepper, AdaptiveStepper>;

using Sink = std::function<void(const ObservableRecord&)>;

struct EvolveOptions {
  int refine = 1;
  /// Merge the trailing nonlinear stage of a step with the leading one of the
  /// next (real time, fixed step, commutator-free boundary stages only).
  bool fuse_stages = false;
  /// Emit a record for the initial state (step 0).
  bool emit_initial = true;
  /// Called with the state after every accepted step.
  std::function<void(const State&, std::int64_t step)> observer;
};

struct EvolveResult {
  State state;
  std::int64_t accepted = 0;
  std::int64_t rejected = 0;
  std::int64_t transforms = 0;
  /// Set when the run aborted; `state` is then the state at the failure.
  std::optional<std::string> failure;
  int failure_stage = -1;
  bool controller_failure = false;
};

/// Integrates from state.t to t_end. Fixed mode takes ceil((t_end - t) / tau)
/// uniform steps; adaptive mode shortens the final step to land on t_end.
EvolveResult evolve(const Problem& problem, Fourier& fft, State state, double t_end,
                    const Stepper& stepper, const Sink& sink = {}, const EvolveOptions& options = {});

}  // namespace gpsplit
