#include <gtest/gtest.h>

#include <random>

#include "gpsplit/errors.hpp"
#include "gpsplit/groundstate.hpp"
#include "gpsplit/model.hpp"
#include "support.hpp"

namespace gpsplit {
namespace {

using testing::grid;
using testing::max_diff;
using testing::random_smooth;

ProblemSpec two_component(int dim) {
  ProblemSpec s;
  s.components = 2;
  s.dim = dim;
  s.alpha = Eigen::MatrixXd::Constant(2, dim, -0.5);
  s.alpha(1, 0) = -0.7;
  s.beta = Eigen::MatrixXd::Constant(2, dim, 0.5);
  s.gamma = Eigen::MatrixXd::Zero(2, dim);
  s.delta = Eigen::MatrixXd::Zero(2, dim);
  s.theta = Eigen::MatrixXd::Zero(2, 2);
  s.n0 = Eigen::VectorXd::Ones(2);
  return s;
}

Components random_state(Fourier& fft, int components, unsigned seed) {
  std::mt19937_64 rng(seed);
  Components psi;
  for (int j = 0; j < components; ++j) psi.push_back(random_smooth(fft, rng, false, true));
  return psi;
}

TEST(Potential, HarmonicAndLatticeSamples) {
  const auto g = build_grid({{4.0}, {8}});  // x = -4, -3, ..., 3
  ProblemSpec s = ProblemSpec::harmonic(1, -0.5, 1.0, 0.0);
  Problem harmonic(s, g);
  EXPECT_EQ(potential(harmonic, 0)[4], 0.0);  // x = 0
  EXPECT_DOUBLE_EQ(potential(harmonic, 0)[6], 4.0);  // x = 2

  s.beta(0, 0) = 0.0;
  s.gamma(0, 0) = 3.0;
  s.delta(0, 0) = M_PI / 2;
  Problem lattice(s, g);
  EXPECT_NEAR(potential(lattice, 0)[5], 3.0, 1e-14);  // delta x = pi / 2
  EXPECT_NEAR(potential(lattice, 0)[6], 0.0, 1e-14);
}

TEST(Potential, ClosedFormDerivatives) {
  const auto g = grid(2, 16, 3.0);
  ProblemSpec s = ProblemSpec::harmonic(2, -0.5, 0.7, 0.0);
  s.gamma(0, 1) = 2.0;
  s.delta(0, 1) = 1.3;
  Problem p(s, g);
  const RealField& y = g->coords(1);
  EXPECT_LE((p.potential_gradient(0, 0) - 1.4 * g->coords(0)).abs().maxCoeff(), 1e-13);
  const RealField dy = 1.4 * y + 2.0 * 1.3 * (2.0 * 1.3 * y).sin();
  EXPECT_LE((p.potential_gradient(0, 1) - dy).abs().maxCoeff(), 1e-12);
  const RealField d2y = 1.4 + 2.0 * 2.0 * 1.3 * 1.3 * (2.0 * 1.3 * y).cos();
  EXPECT_LE((p.potential_curvature(0, 1) - d2y).abs().maxCoeff(), 1e-12);
}

TEST(Potential, OffsetShiftsOnlyThePotential) {
  const auto g = grid(1, 32, 4.0);
  Problem p(ProblemSpec::harmonic(1, -0.5, 0.5, 1.0), g);
  const Problem q = p.with_potential_offset({0.25});
  EXPECT_LE((q.potential(0) - (p.potential(0) - 0.25)).abs().maxCoeff(), 1e-15);
  EXPECT_LE((q.potential_gradient(0, 0) - p.potential_gradient(0, 0)).abs().maxCoeff(), 0.0);
}

TEST(Problem, RejectsInconsistentSpecs) {
  const auto g = grid(1, 32, 4.0);
  ProblemSpec s = ProblemSpec::harmonic(1, -0.5, 0.5, 0.0);
  s.n0(0) = 0.0;
  EXPECT_THROW(Problem(s, g), ConfigError);
  s = ProblemSpec::harmonic(2, -0.5, 0.5, 0.0);
  EXPECT_THROW(Problem(s, g), ConfigError);
  s = ProblemSpec::harmonic(1, 0.0, 0.5, 0.0);
  EXPECT_THROW(Problem(s, g), ConfigError);
  s = two_component(1);
  s.theta.resize(1, 1);
  EXPECT_THROW(Problem(s, g), ConfigError);
}

TEST(Hamiltonian, NoCouplingGivesZeroNonlinearPart) {
  const auto g = grid(2, 16, 3.0);
  Fourier fft(g);
  Problem p(two_component(2), g);
  const Components psi = random_state(fft, 2, 1);
  for (int j = 0; j < 2; ++j) EXPECT_EQ(apply_h2(p, psi, j).abs().maxCoeff(), 0.0);
}

TEST(Hamiltonian, CrossCouplingOnly) {
  const auto g = grid(1, 64, 5.0);
  Fourier fft(g);
  ProblemSpec s = two_component(1);
  s.theta(0, 1) = 1.0;
  Problem p(s, g);
  const Components psi = random_state(fft, 2, 2);
  const Field expected = psi[1].abs2() * psi[0];
  EXPECT_LE((apply_h2(p, psi, 0) - expected).abs().maxCoeff(), 1e-15);
  EXPECT_EQ(apply_h2(p, psi, 1).abs().maxCoeff(), 0.0);
}

TEST(Hamiltonian, HermiteFunctionIsEigenfunction) {
  const auto g = grid(1, 512, 10.0);
  Fourier fft(g);
  for (double alpha : {-0.5, -1.3}) {
    Problem p(ProblemSpec::harmonic(1, alpha, 0.8, 0.0), g);
    const Components phi = hermite_state(p);
    const double mu = std::sqrt(-alpha * 0.8);
    EXPECT_DOUBLE_EQ(hermite_mu(p, 0), mu);
    const Field h = apply_h1(p, fft, phi, 0);
    EXPECT_LE((h - mu * phi[0]).abs().maxCoeff(), 1e-8 * phi[0].abs().maxCoeff()) << alpha;
  }
}

TEST(Observables, HermiteStateEnergy) {
  const auto g = grid(1, 512, 10.0);
  Fourier fft(g);
  Problem p(ProblemSpec::harmonic(1, -0.5, 0.5, 0.0), g);
  const ObservableRecord r = observables(p, fft, hermite_state(p));
  EXPECT_NEAR(r.E, 0.5, 1e-8);
  EXPECT_EQ(r.E2, 0.0);
  EXPECT_NEAR(r.mu[0] * p.n0(0), r.E, 1e-12);
  EXPECT_NEAR(r.mass_total, 1.0, 1e-10);
  EXPECT_LE(r.energy_imag, 1e-12);
}

TEST(Observables, RecordInvariants) {
  const auto g = grid(2, 32, 4.0);
  Fourier fft(g);
  ProblemSpec s = two_component(2);
  s.theta << 1.0, 0.4, 0.4, 0.7;
  s.n0 << 1.0, 2.0;
  Problem p(s, g);
  const Components psi = random_state(fft, 2, 3);
  const ObservableRecord r = observables(p, fft, psi);
  EXPECT_DOUBLE_EQ(r.E, r.E1 + 0.5 * r.E2);
  EXPECT_DOUBLE_EQ(r.mass_total, r.mass[0] + r.mass[1]);
  EXPECT_NEAR(r.E1, r.e1[0] + r.e1[1], 1e-13 * std::abs(r.E1));
  for (int j = 0; j < 2; ++j) {
    EXPECT_NEAR(r.mass[j], discrete_norm_squared(*g, psi[j]), 1e-14 * r.mass[j]);
    EXPECT_NEAR(r.mu[j], (r.e1[j] + r.e2[j]) / p.n0(j), 1e-13 * std::abs(r.mu[j]));
  }
}

TEST(Observables, InvariantUnderComponentPhases) {
  const auto g = grid(2, 32, 4.0);
  Fourier fft(g);
  ProblemSpec s = two_component(2);
  s.theta << 1.0, 0.4, 0.4, 0.7;
  Problem p(s, g);
  Components psi = random_state(fft, 2, 4);
  const ObservableRecord before = observables(p, fft, psi);
  psi[0] *= std::polar(1.0, 0.8);
  psi[1] *= std::polar(1.0, -2.1);
  const ObservableRecord after = observables(p, fft, psi);
  EXPECT_NEAR(after.E, before.E, 1e-13 * std::abs(before.E));
  for (int j = 0; j < 2; ++j) EXPECT_NEAR(after.mu[j], before.mu[j], 1e-13 * std::abs(before.mu[j]));
}

TEST(Observables, EnergyByPartsAgrees) {
  for (int dim = 1; dim <= 3; ++dim) {
    const auto g = grid(dim, dim == 3 ? 16 : 64, 5.0);
    Fourier fft(g);
    ProblemSpec s = ProblemSpec::harmonic(dim, -0.5, 0.5, 1.0);
    s.alpha(0, 0) = -0.9;
    s.gamma(0, 0) = 1.5;
    s.delta(0, 0) = 2.0;
    Problem p(s, g);
    const Components psi = random_state(fft, 1, 5 + dim);
    const ObservableRecord r = observables(p, fft, psi);
    EXPECT_NEAR(energy_by_parts(p, fft, psi), r.E1, 1e-10 * std::abs(r.E1)) << "d=" << dim;
  }
}

TEST(Observables, TwoComponentReducesToOne) {
  const auto g = grid(1, 128, 6.0);
  Fourier fft(g);
  ProblemSpec two = two_component(1);
  two.alpha(1, 0) = -0.5;
  two.theta(0, 0) = 1.7;
  ProblemSpec one = ProblemSpec::harmonic(1, -0.5, 0.5, 1.7);
  Problem p2(two, g), p1(one, g);
  const Components psi1 = random_state(fft, 1, 6);
  const Components psi2 = {psi1[0], Field::Zero(g->size())};
  const ObservableRecord r1 = observables(p1, fft, psi1);
  const ObservableRecord r2 = observables(p2, fft, psi2);
  EXPECT_NEAR(r2.E, r1.E, 1e-13 * std::abs(r1.E));
  EXPECT_NEAR(r2.E1, r1.E1, 1e-13 * std::abs(r1.E1));
  EXPECT_NEAR(r2.E2, r1.E2, 1e-13 * std::abs(r1.E2));
  EXPECT_NEAR(r2.mass_total, r1.mass_total, 1e-14);
  EXPECT_NEAR(r2.mu[0], r1.mu[0], 1e-13 * std::abs(r1.mu[0]));
}

TEST(Divergence, DetectsNonFiniteAndMassBlowup) {
  const auto g = grid(1, 32, 4.0);
  Problem p(ProblemSpec::harmonic(1, -0.5, 0.5, 0.0), g);
  Components psi = hermite_state(p);
  EXPECT_FALSE(is_diverged(p, psi));
  Components big = psi;
  big[0] *= 2e3;
  EXPECT_TRUE(is_diverged(p, big));
  psi[0][3] = Complex(std::nan(""), 0.0);
  EXPECT_TRUE(is_diverged(p, psi));
  psi[0][3] = Complex(0.0, INFINITY);
  EXPECT_TRUE(is_diverged(p, psi));
}

TEST(Gateaux, LinearOperatorIsExact) {
  const auto g = grid(1, 64, 5.0);
  Fourier fft(g);
  Problem p(ProblemSpec::harmonic(1, -0.5, 0.5, 0.0), g);
  const Operator h1 = [&](const Components& v) { return Components{apply_h1(p, fft, v, 0)}; };
  const Components v = random_state(fft, 1, 7), w = random_state(fft, 1, 8);
  for (double eps : {1e-4, 1e-1, 1.0}) {
    const Components d = gateaux_fd(h1, v, w, eps);
    EXPECT_LE(max_diff(d, h1(w)), 1e-10) << eps;
  }
}

TEST(Gateaux, CubicTermDerivative) {
  const auto g = grid(1, 64, 5.0);
  Fourier fft(g);
  const double theta = 1.3;
  Problem p(ProblemSpec::harmonic(1, -0.5, 0.5, theta), g);
  const Operator h2 = [&](const Components& v) { return Components{apply_h2(p, v, 0)}; };
  const Components v = random_state(fft, 1, 9), w = random_state(fft, 1, 10);
  const Field exact = theta * (2.0 * v[0].abs2() * w[0] + v[0].square() * w[0].conjugate());
  // The central difference of a cubic has error eps^2 * theta * |w|^3 exactly.
  std::vector<double> errs;
  for (double eps : {1e-2, 5e-3}) {
    errs.push_back((gateaux_fd(h2, v, w, eps)[0] - exact).abs().maxCoeff());
    EXPECT_LE(errs.back(), 2.0 * theta * eps * eps * w[0].abs().maxCoeff());
  }
  EXPECT_NEAR(errs[0] / errs[1], 4.0, 0.05);
}

TEST(Gateaux, EnergyDerivativeIsTwiceRealInnerProduct) {
  const auto g = grid(1, 128, 6.0);
  Fourier fft(g);
  Problem p(ProblemSpec::harmonic(1, -0.5, 0.5, 2.0), g);
  const Components psi = random_state(fft, 1, 11), phi = random_state(fft, 1, 12);
  const Field h = apply_h1(p, fft, psi, 0) + apply_h2(p, psi, 0);
  const double expected = 2.0 * discrete_inner(*g, h, phi[0]).real();
  auto energy_at = [&](double eps) {
    Components v = {psi[0] + eps * phi[0]};
    return observables(p, fft, v).E;
  };
  std::vector<double> errs;
  for (double eps : {1e-2, 5e-3}) {
    const double fd = (energy_at(eps) - energy_at(-eps)) / (2 * eps);
    errs.push_back(std::abs(fd - expected));
  }
  EXPECT_LE(errs[0], 1e-3 * std::abs(expected));
  EXPECT_NEAR(errs[0] / errs[1], 4.0, 0.2);
}

}  // namespace
}  // namespace gpsplit
