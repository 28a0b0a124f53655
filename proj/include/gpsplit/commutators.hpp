#pragma once

// Iterated commutator G(v) = [D_F2, [D_F2, D_F1]](v) of the kinetic part
// F1 = C Delta_alpha and the potential/nonlinear part F2 = C (V + sum theta |psi|^2),
// with C = -i (real time) or C = -1 (imaginary time).
//
// Closed forms are provided for J = 1 and J = 2. The real-time operator has
// the structure G_j = g_j * psi_j with a purely imaginary multiplier g_j.

#include "gpsplit/model.hpp"

namespace gpsplit {

struct CommutatorOutput {
  Components g;
  /// Real time only: pointwise multiplier with g[j] = multiplier[j] * psi[j].
  Components multiplier;
};

/// Closed form for the parabolic (imaginary-time) system. Fields must be
/// real up to 1e-12 relative; imaginary parts are ignored.
CommutatorOutput commutator_imaginary(const Problem& problem, Fourier& fft, const Components& psi);

/// Closed form for the Schroedinger (real-time) system.
CommutatorOutput commutator_real(const Problem& problem, Fourier& fft, const Components& psi);

/// Dispatches on `mode`.
CommutatorOutput commutator(const Problem& problem, Fourier& fft, const Components& psi, Mode mode);

struct OracleOptions {
  /// Relative step for first Gateaux derivatives.
  double eps1 = 1e-3;
  /// Relative step for the mixed second derivative.
  double eps2 = 1e-2;
  /// Combine steps eps and 2 eps to cancel the O(eps^2) term. For the cubic
  /// nonlinearity this removes the truncation error entirely, which is why the
  /// steps can be this large.
  bool richardson = true;
};

struct OracleOutput {
  Components g;
  /// Estimated absolute round-off level of the finite differences (max norm).
  double noise_floor = 0.0;
};

/// Finite-difference evaluation of the five-term definition
///   F1'' (F2, F2) + F1' F2' F2 + F2' F2' F1 - F2'' (F1, F2) - 2 F2' F1' F2
/// for any J. Test oracle; not used by the integrators.
OracleOutput commutator_oracle(const Problem& problem, Fourier& fft, const Components& psi,
                               Mode mode, const OracleOptions& options = {});

/// F1 = C Delta_alpha and F2 = C (V + sum theta |psi|^2) for the given mode.
Components apply_f1(const Problem& problem, Fourier& fft, const Components& psi, Mode mode);
Components apply_f2(const Problem& problem, const Components& psi, Mode mode);

}  // namespace gpsplit
