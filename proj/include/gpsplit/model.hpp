#pragma once

// Coupled Gross-Pitaevskii model
//
//   i d/dt psi_j = Delta_{alpha_j} psi_j + V_j psi_j + sum_k theta_jk |psi_k|^2 psi_j
//
// with V_j(x) = sum_i beta_ji x_i^2 + gamma_ji sin^2(delta_ji x_i), its
// Hamiltonian parts and the conserved functionals.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "gpsplit/spectral.hpp"

namespace gpsplit {

enum class Mode { real, imaginary };

struct ProblemSpec {
  int components = 1;   // J
  int dim = 1;          // d
  Eigen::MatrixXd alpha;  // J x d Laplacian weights
  Eigen::MatrixXd beta;   // J x d harmonic weights
  Eigen::MatrixXd gamma;  // J x d lattice amplitudes
  Eigen::MatrixXd delta;  // J x d lattice frequencies
  Eigen::MatrixXd theta;  // J x J couplings
  Eigen::VectorXd n0;     // per-component squared-norm targets

  /// Single component, isotropic weights, no lattice.
  static ProblemSpec harmonic(int dim, double alpha, double beta, double theta, double n0 = 1.0);
};

/// A validated problem bound to a grid, with cached potentials and their
/// analytic first and second derivatives.
class Problem {
 public:
  Problem(ProblemSpec spec, std::shared_ptr<const SpectralGrid> grid);

  const ProblemSpec& spec() const { return spec_; }
  const SpectralGrid& grid() const { return *grid_; }
  const std::shared_ptr<const SpectralGrid>& grid_ptr() const { return grid_; }
  int components() const { return spec_.components; }
  int dim() const { return spec_.dim; }

  /// Row j of alpha as a contiguous array.
  std::span<const double> alpha(int j) const { return alpha_rows_[j]; }
  double theta(int j, int k) const { return spec_.theta(j, k); }
  double n0(int j) const { return spec_.n0[j]; }
  double n0_total() const { return spec_.n0.sum(); }

  const RealField& potential(int j) const { return potential_[j]; }
  /// d V_j / d x_axis (closed form).
  const RealField& potential_gradient(int j, int axis) const { return dpotential_[j][axis]; }
  /// d^2 V_j / d x_axis^2 (closed form).
  const RealField& potential_curvature(int j, int axis) const { return d2potential_[j][axis]; }

  /// Copy with V_j replaced by V_j - offset[j]; derivatives are unchanged.
  Problem with_potential_offset(const std::vector<double>& offset) const;

  bool linear() const { return spec_.theta.isZero(0.0); }
  /// All components share the same Laplacian weights.
  bool uniform_alpha() const;
  /// Every Laplacian weight is strictly negative.
  bool negative_alpha() const { return (spec_.alpha.array() < 0.0).all(); }

 private:
  ProblemSpec spec_;
  std::shared_ptr<const SpectralGrid> grid_;
  std::vector<std::vector<double>> alpha_rows_;
  std::vector<RealField> potential_;
  std::vector<std::vector<RealField>> dpotential_;
  std::vector<std::vector<RealField>> d2potential_;
};

struct State {
  double t = 0.0;
  Mode mode = Mode::real;
  Components psi;
};

struct ObservableRecord {
  std::int64_t step = 0;
  double t = 0.0;
  double tau = 0.0;
  std::vector<double> mass;  // per component
  double mass_total = 0.0;
  std::vector<double> e1;    // per component E_{1j}
  std::vector<double> e2;    // per component E_{2j}
  double E1 = 0.0;
  double E2 = 0.0;
  double E = 0.0;
  std::vector<double> mu;
  double err_estimate = 0.0;
  bool accepted = true;
  std::int64_t transforms = 0;
  /// Largest |Im E_{lj}| encountered; should vanish up to round-off.
  double energy_imag = 0.0;
};

/// V_j sampled on the grid (cached in the problem).
const RealField& potential(const Problem& problem, int j);

/// H_{1j}(psi) = Delta_{alpha_j} psi_j + V_j psi_j.
Field apply_h1(const Problem& problem, Fourier& fft, const Components& psi, int j);
/// H_{2j}(psi) = (sum_k theta_jk |psi_k|^2) psi_j.
Field apply_h2(const Problem& problem, const Components& psi, int j);

/// Mass, energy split and chemical potentials. The kinetic part of E_1 is
/// summed in coefficient space, so it is real by construction.
ObservableRecord observables(const Problem& problem, Fourier& fft, const Components& psi);

/// E_1 through the integration-by-parts form -sum_i alpha_i ||d_i psi||^2 + <V, |psi|^2>.
double energy_by_parts(const Problem& problem, Fourier& fft, const Components& psi);

/// True if any entry is non-finite or the mass exceeds 1e6 times the target.
bool is_diverged(const Problem& problem, const Components& psi);

using Operator = std::function<Components(const Components&)>;

/// Central difference (F(v + eps w) - F(v - eps w)) / (2 eps).
Components gateaux_fd(const Operator& op, const Components& v, const Components& w, double eps);

}  // namespace gpsplit
