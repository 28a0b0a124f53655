#pragma once

// Run configuration: YAML schema, defaults, validation and provenance.
//
//   problem: J, d, alpha (C1), beta (C2), gamma (C3), delta, theta (C4), n0
//   grid:    omega, points
//   run:     mode, time, method, adaptive, tau0, t_end, tol, strategy, refine,
//            max_iter, energy_tol, patience, energy_shift, init, center,
//            descent,
//            damping, momentum_tau, methods, taus, tols, reference, controller,
//            evolution (method, tau0, adaptive, tol)
//   output:  dir, snapshot_every, full_volume

#include <map>
#include <string>
#include <vector>

#include "gpsplit/adaptive.hpp"
#include "gpsplit/groundstate.hpp"

namespace gpsplit {

enum class RunMode {
  evolve,
  groundstate,
  groundstate_then_evolve,
  order_sweep,
  energy_longterm,
  quotient_check,
};

std::string_view to_string(RunMode mode);

enum class Descent { imaginary, momentum };

/// Real-time phase of groundstate_then_evolve. Unset fields inherit the run block.
struct EvolutionSettings {
  std::string method;
  double tau0 = 0.0;
  bool adaptive = false;
  double tol = 0.0;
};

struct RunSettings {
  RunMode mode = RunMode::evolve;
  Mode time = Mode::real;
  std::string method = "strang";
  bool adaptive = false;
  double tau0 = 0.1;
  double t_end = 1.0;
  ControllerParams controller;  // tol, strategy and overrides
  int refine = 1;
  StopRule stop;
  bool energy_shift = true;
  InitKind init = InitKind::constant;
  /// Centre of the Gaussian initial state (origin if empty).
  std::vector<double> center;
  Descent descent = Descent::imaginary;
  MomentumParams momentum;
  // Sweeps.
  std::vector<std::string> methods;
  std::vector<double> taus;
  std::vector<double> tols;
  /// auto | exact | refined
  std::string reference = "auto";
  EvolutionSettings evolution;
};

struct OutputSettings {
  std::string dir = "out";
  /// Snapshot every this many accepted steps (0: final state only).
  std::int64_t snapshot_every = 0;
  /// Write full 3D volumes instead of the x3 = 0 section.
  bool full_volume = false;
};

struct RunConfig {
  ProblemSpec problem;
  GridSpec grid;
  RunSettings run;
  OutputSettings output;
  /// Dotted field path -> explicit | default | override | paper-mode.
  std::map<std::string, std::string> provenance;

  /// Canonical YAML of the effective configuration.
  std::string to_yaml() const;
};

/// Parses and validates a configuration document. `overrides` are
/// "dotted.path=value" strings whose value is read as YAML. Errors carry the
/// line (when known) and field path.
RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides = {},
                       bool paper_mode = false);

/// Reads `path` and parses it; I/O failures raise IoError.
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {},
                      bool paper_mode = false);

/// Default refine factor for the imaginary-time nonlinear flow.
int default_refine(int dim, bool modified_method);

}  // namespace gpsplit
