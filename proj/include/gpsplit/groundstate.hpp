#pragma once

// Ground states by imaginary-time propagation with renormalisation, analytic
// initial states and the damped second-order (momentum) descent.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "gpsplit/adaptive.hpp"

namespace gpsplit {

enum class InitKind { constant, gaussian, hermite, thomas_fermi };

InitKind parse_init_kind(std::string_view name);
std::string_view to_string(InitKind kind);

/// Thomas-Fermi chemical potential of component j (harmonic part of V only).
double thomas_fermi_mu(const Problem& problem, int j);

/// Ground state of the linear harmonic problem, times exp(-i mu t) in real time.
/// Requires alpha < 0 and beta > 0.
Components hermite_state(const Problem& problem, double t = 0.0);

/// sum_i sqrt(-alpha_ji beta_ji).
double hermite_mu(const Problem& problem, int j);

/// Real initial state of the given kind with ||psi_j||^2 = N0_j. The Gaussian
/// is centred at `center` (origin if empty). Throws ConfigError for
/// thomas_fermi without positive self-coupling.
State init_state(const Problem& problem, InitKind kind, Mode mode = Mode::imaginary,
                 const std::vector<double>& center = {});

/// psi_j <- sqrt(N0_j) psi_j / ||psi_j||. Throws DivergenceError for a zero component.
void renormalize(const SpectralGrid& grid, Components& psi, const Eigen::VectorXd& n0);

struct StopRule {
  double energy_tol = 1e-15;
  std::int64_t max_iter = 100000;
  /// Divide the energy change by the step size before comparing.
  bool per_unit_time = false;
  /// Renormalise every this many accepted steps.
  int renormalize_every = 1;
  /// Consecutive iterations that must meet energy_tol. Values above one guard
  /// against the non-monotone energy of the momentum flow.
  int patience = 1;

  void validate() const;
};

enum class StopReason { tolerance, max_iter, divergence };
std::string_view to_string(StopReason reason);

struct GroundStateResult {
  Components phi;
  std::vector<double> mu;
  double energy = 0.0;
  std::int64_t iterations = 0;
  double residual = 0.0;
  bool converged = false;
  StopReason reason = StopReason::max_iter;
  /// Iteration index of a divergence, or -1.
  std::int64_t failed_iteration = -1;
  std::string message;
  double t = 0.0;
  std::int64_t transforms = 0;
  std::int64_t rejected = 0;
};

/// sqrt(sum_j ||H_1j(phi) + H_2j(phi) - mu_j phi_j||^2) / ||phi||.
double residual(const Problem& problem, Fourier& fft, const Components& phi,
                const std::vector<double>& mu);

struct DescentOptions {
  /// Substeps of the imaginary-time nonlinear flow.
  int refine = 1;
  /// Propagate with H_j - mu_j, mu_j taken from the current iterate. The
  /// normalised ground state is then a fixed point of the flow itself, which
  /// removes the O(tau) offset of step-then-renormalise for nonlinear problems.
  bool energy_shift = true;
};

/// Imaginary-time loop: step, renormalise, stop on |dE| < energy_tol, the
/// iteration limit, or divergence.
GroundStateResult propagate_imaginary(const Problem& problem, Fourier& fft, State state,
                                      const Stepper& stepper, const StopRule& stop,
                                      const DescentOptions& options = {}, const Sink& sink = {});

struct MomentumParams {
  double damping = 2.0;
  double tau = 0.05;
};

/// Damped second-order flow u'' + c u' = -H(u) by the Strang composition of
/// the exact kinetic/damping flow (per Fourier mode) and the exact
/// potential/nonlinear kick. The velocity starts at zero.
GroundStateResult momentum_descent(const Problem& problem, Fourier& fft, State state,
                                   const MomentumParams& params, const StopRule& stop,
                                   const DescentOptions& options = {}, const Sink& sink = {});

/// exp(tau [[0, 1], [-kappa, -damping]]) as a row-major (m00, m01, m10, m11).
std::array<double, 4> damped_mode_exponential(double kappa, double damping, double tau);

}  // namespace gpsplit
