#pragma once

#include <cmath>
#include <memory>
#include <random>

#include "gpsplit/commutators.hpp"
#include "gpsplit/model.hpp"
#include "gpsplit/splitting.hpp"

namespace gpsplit::testing {

inline std::shared_ptr<const SpectralGrid> grid(int dim, int points, double omega) {
  return build_grid({std::vector<double>(dim, omega), std::vector<int>(dim, points)});
}

/// Random field with coefficients ~ exp(-0.2 m^2) on |m| <= points / 4 per
/// axis (m the integer mode index), so that fifth powers stay resolved. With
/// `envelope`, the field is multiplied by exp(-|x|^2 / 2) for non-periodic potentials.
inline Field random_smooth(Fourier& fft, std::mt19937_64& rng, bool real_valued, bool envelope) {
  const auto& g = fft.grid();
  std::normal_distribution<double> normal;
  Field c = Field::Zero(g.size());
  for (Eigen::Index n = 0; n < g.size(); ++n) {
    bool keep = true;
    double m2 = 0.0;
    for (int i = 0; i < g.dim(); ++i) {
      const double m = g.wavenumbers(i)[n] * g.omega(i) / M_PI;
      keep = keep && std::abs(m) <= g.points(i) / 4;
      m2 += m * m;
    }
    if (keep) c[n] = Complex(normal(rng), normal(rng)) * std::exp(-0.2 * m2);
  }
  fft.inverse(c);
  if (real_valued) c = c.real().cast<Complex>();
  if (envelope) {
    RealField r2 = RealField::Zero(g.size());
    for (int i = 0; i < g.dim(); ++i) r2 += g.coords(i).square();
    c *= (-0.5 * r2).exp();
  }
  c /= c.abs().maxCoeff();
  return c;
}

/// Problem coefficients for commutator checks: a lattice-only potential on
/// [-pi, pi]^d (`periodic`) or harmonic plus lattice, optionally with
/// per-component, per-axis kinetic weights.
inline ProblemSpec commutator_spec(int components, int dim, bool periodic, bool distinct_alpha) {
  ProblemSpec p;
  p.components = components;
  p.dim = dim;
  const int J = components, d = dim;
  p.alpha.resize(J, d);
  p.beta.resize(J, d);
  p.gamma.resize(J, d);
  p.delta.resize(J, d);
  for (int j = 0; j < J; ++j)
    for (int i = 0; i < d; ++i) {
      p.alpha(j, i) = distinct_alpha ? -0.5 - 0.3 * j - 0.1 * i : -0.5;
      p.beta(j, i) = periodic ? 0.0 : 0.5 + 0.2 * j + 0.1 * i;
      p.gamma(j, i) = 1.3 - 0.4 * j;
      p.delta(j, i) = periodic ? 1.0 + j : 0.7 + 0.2 * j;
    }
  p.theta.resize(J, J);
  if (J == 1)
    p.theta << 1.7;
  else
    p.theta << 1.1, 0.6, -0.4, 0.9;
  p.n0 = Eigen::VectorXd::Ones(J);
  return p;
}

/// Two coupled 1D components in a harmonic trap with an optical lattice.
inline ProblemSpec coupled_lattice() {
  ProblemSpec s;
  s.components = 2;
  s.dim = 1;
  s.alpha.resize(2, 1);
  s.alpha << -0.5, -0.8;
  s.beta.resize(2, 1);
  s.beta << 0.5, 0.3;
  s.gamma.resize(2, 1);
  s.gamma << 1.0, 0.5;
  s.delta.resize(2, 1);
  s.delta << 1.0, 2.0;
  s.theta.resize(2, 2);
  s.theta << 1.0, 0.5, 0.5, 0.8;
  s.n0 = Eigen::VectorXd::Ones(2);
  return s;
}

inline double max_abs(const Components& v) {
  double m = 0.0;
  for (const auto& f : v) m = std::max(m, f.abs().maxCoeff());
  return m;
}

inline double max_diff(const Components& a, const Components& b) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, (a[j] - b[j]).abs().maxCoeff());
  return m;
}

/// Least-squares slope of log(err) against log(tau).
inline double loglog_slope(const std::vector<double>& tau, const std::vector<double>& err) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(tau.size());
  for (std::size_t i = 0; i < tau.size(); ++i) {
    const double x = std::log(tau[i]), y = std::log(err[i]);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Max-norm gap between the frozen-multiplier real-time flow of (b F2 + c tau^2 G)
/// and an RK4 integration (`substeps` steps) of the full nonlinear subproblem.
inline double invariance_gap(const Problem& p, Fourier& fft, const Components& psi, double b,
                             double c, double tau, int substeps = 200) {
  Components frozen = psi;
  nonlinear_flow_real(p, fft, frozen, b, c, tau);
  auto rate = [&](const Components& u) {
    Components f = apply_f2(p, u, Mode::real);
    const Components g = commutator_real(p, fft, u).g;
    for (std::size_t j = 0; j < f.size(); ++j) f[j] = b * f[j] + (c * tau * tau) * g[j];
    return f;
  };
  auto axpy = [](const Components& u, double h, const Components& k) {
    Components r = u;
    for (std::size_t j = 0; j < r.size(); ++j) r[j] += h * k[j];
    return r;
  };
  Components u = psi;
  const double h = tau / substeps;
  for (int n = 0; n < substeps; ++n) {
    const Components k1 = rate(u);
    const Components k2 = rate(axpy(u, h / 2, k1));
    const Components k3 = rate(axpy(u, h / 2, k2));
    const Components k4 = rate(axpy(u, h, k3));
    for (std::size_t j = 0; j < u.size(); ++j) u[j] += (h / 6) * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
  }
  return max_diff(frozen, u);
}

}  // namespace gpsplit::testing
