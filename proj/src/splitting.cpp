#include "gpsplit/splitting.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <sstream>

#include "gpsplit/errors.hpp"

namespace gpsplit {

bool MethodSpec::modified() const {
  for (double x : c)
    if (x != 0.0) return true;
  return false;
}

bool MethodSpec::positive() const {
  for (double x : a)
    if (x < 0.0) return false;
  for (double x : b)
    if (x < 0.0) return false;
  return true;
}

bool MethodSpec::symmetric() const {
  // Operator sequence N_s K_s ... N_1 K_1 read as one list of (kind, weight).
  struct Flow {
    bool kinetic;
    double weight;
    double commutator;
  };
  std::vector<Flow> seq;
  for (int i = 0; i < stages(); ++i) {
    if (a[i] != 0.0) seq.push_back({true, a[i], 0.0});
    if (b[i] != 0.0 || c[i] != 0.0) seq.push_back({false, b[i], c[i]});
  }
  for (std::size_t i = 0; i < seq.size() / 2; ++i) {
    const Flow& l = seq[i];
    const Flow& r = seq[seq.size() - 1 - i];
    if (l.kinetic != r.kinetic || std::abs(l.weight - r.weight) > 1e-14 ||
        std::abs(l.commutator - r.commutator) > 1e-14)
      return false;
  }
  return true;
}

namespace {

MethodSpec make_yoshida() {
  const double cbrt2 = std::cbrt(2.0);
  const double b2 = (1.0 - cbrt2 - 0.5 * cbrt2 * cbrt2) / 6.0;
  const double b1 = 0.5 - b2;
  return {"yoshida4", {0.0, 1.0 - 2.0 * b2, 4.0 * b2 - 1.0, 1.0 - 2.0 * b2}, {b1, b2, b2, b1},
          {0.0, 0.0, 0.0, 0.0}, 4};
}

// Optimised six-stage partitioned Runge-Kutta scheme of order four. The
// seven-fold weights act on the nonlinear part, the six-fold on the kinetic part.
MethodSpec make_blanes_moan() {
  const double p1 = 0.0792036964311957, p2 = 0.353172906049774, p3 = -0.0420650803577195;
  const double p4 = 1.0 - 2.0 * (p1 + p2 + p3);
  const double q1 = 0.209515106613362, q2 = -0.143851773179818;
  const double q3 = 0.5 - (q1 + q2);
  return {"blanes_moan4",
          {0.0, q1, q2, q3, q3, q2, q1},
          {p1, p2, p3, p4, p3, p2, p1},
          std::vector<double>(7, 0.0),
          4};
}

MethodSpec lookup(std::string_view name) {
  if (name == "lie") return {"lie", {1.0}, {1.0}, {0.0}, 1};
  if (name == "strang") return {"strang", {0.0, 1.0}, {0.5, 0.5}, {0.0, 0.0}, 2};
  if (name == "yoshida4") return make_yoshida();
  if (name == "blanes_moan4") return make_blanes_moan();
  if (name == "chin_modified4")
    return {"chin_modified4", {0.0, 0.5, 0.5}, {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0},
            {0.0, -1.0 / 72.0, 0.0}, 4};
  std::ostringstream os;
  os << "unknown method '" << name << "'; expected one of lie, strang, yoshida4, blanes_moan4, "
     << "chin_modified4";
  throw std::invalid_argument(os.str());
}

// Truncated power series in tau with 4x4 matrix coefficients.
using Mat = Eigen::Matrix4d;
using Series = std::vector<Mat>;

Series series_mul(const Series& x, const Series& y) {
  Series out(x.size(), Mat::Zero());
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; i + j < x.size(); ++j) out[i + j] += x[i] * y[j];
  return out;
}

// exp(Y) for a series Y without constant term.
Series series_exp(const Series& y) {
  Series out(y.size(), Mat::Zero());
  out[0] = Mat::Identity();
  Series power = out;
  double factorial = 1.0;
  for (std::size_t n = 1; n < y.size(); ++n) {
    power = series_mul(power, y);
    factorial *= static_cast<double>(n);
    for (std::size_t k = 0; k < y.size(); ++k) out[k] += power[k] / factorial;
  }
  return out;
}

}  // namespace

MethodSpec method_catalog(std::string_view name) {
  MethodSpec m = lookup(name);
  static const bool verified = [] {
    for (const auto& n : method_names()) {
      const MethodSpec spec = lookup(n);
      if (order_condition_residual(spec) > 1e-12)
        throw std::logic_error("method catalog: order conditions violated for " + n);
    }
    return true;
  }();
  (void)verified;
  return m;
}

std::vector<std::string> method_names() {
  return {"lie", "strang", "yoshida4", "blanes_moan4", "chin_modified4"};
}

double order_condition_residual(const MethodSpec& method, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Mat kin, pot;
  for (int i = 0; i < 16; ++i) kin(i) = dist(rng);
  for (int i = 0; i < 16; ++i) pot(i) = dist(rng);
  const Mat bracket = pot * pot * kin - 2.0 * pot * kin * pot + kin * pot * pot;

  const std::size_t len = static_cast<std::size_t>(method.order) + 1;
  Series total(len, Mat::Zero());
  total[0] = Mat::Identity();
  for (int i = 0; i < method.stages(); ++i) {
    Series k(len, Mat::Zero());
    if (len > 1) k[1] = method.a[i] * kin;
    Series n(len, Mat::Zero());
    if (len > 1) n[1] = method.b[i] * pot;
    if (len > 3) n[3] = method.c[i] * bracket;
    total = series_mul(series_exp(k), total);
    total = series_mul(series_exp(n), total);
  }
  Series exact(len, Mat::Zero());
  if (len > 1) exact[1] = kin + pot;
  exact = series_exp(exact);

  double residual = 0.0;
  for (std::size_t k = 0; k < len; ++k)
    residual = std::max(residual, (total[k] - exact[k]).cwiseAbs().maxCoeff());
  return residual;
}

// ---------------------------------------------------------------------------

void nonlinear_flow_real(const Problem& p, Fourier& fft, Components& psi, double b, double c,
                         double tau) {
  const int J = p.components();
  std::vector<Field> multiplier(J);
  if (c != 0.0) {
    CommutatorOutput g = commutator_real(p, fft, psi);
    for (int j = 0; j < J; ++j) multiplier[j] = (c * tau * tau) * g.multiplier[j];
  }
  // All exponents are evaluated before any component is updated.
  std::vector<Field> exponent(J);
  for (int j = 0; j < J; ++j) {
    RealField w = p.potential(j);
    for (int k = 0; k < J; ++k)
      if (p.theta(j, k) != 0.0) w += p.theta(j, k) * psi[k].abs2();
    exponent[j] = Complex(0.0, -b * tau) * w.cast<Complex>();
    if (c != 0.0) exponent[j] += tau * multiplier[j];
  }
  for (int j = 0; j < J; ++j) {
    psi[j] *= exponent[j].exp();
    if (!psi[j].allFinite()) throw DivergenceError("nonlinear flow: non-finite values");
  }
}

namespace {

void add_scaled(Components& out, const Components& x, double s) {
  for (std::size_t j = 0; j < out.size(); ++j) out[j] += s * x[j];
}

// k_j = -b (V_j + sum_k theta_jk |v_k|^2) v_j, written into preallocated buffers.
void potential_rate(const Problem& p, const Components& v, double b, RealField& density,
                    Components& k) {
  for (int j = 0; j < p.components(); ++j) {
    density = p.potential(j);
    for (int m = 0; m < p.components(); ++m)
      if (p.theta(j, m) != 0.0) density += p.theta(j, m) * v[m].abs2();
    k[j] = v[j] * (-b * density);
  }
}

// Classical RK4 for u' = b F2(u) with F2 = -(V + sum theta |u|^2) u.
void rk4_potential(const Problem& p, Components& u, double b, double h, int n) {
  const double dt = h / n;
  RealField density(u[0].size());
  Components k = u, probe = u, acc = u;
  const int J = p.components();
  for (int s = 0; s < n; ++s) {
    potential_rate(p, u, b, density, k);
    for (int j = 0; j < J; ++j) {
      acc[j] = u[j] + (dt / 6.0) * k[j];
      probe[j] = u[j] + (0.5 * dt) * k[j];
    }
    potential_rate(p, probe, b, density, k);
    for (int j = 0; j < J; ++j) {
      acc[j] += (dt / 3.0) * k[j];
      probe[j] = u[j] + (0.5 * dt) * k[j];
    }
    potential_rate(p, probe, b, density, k);
    for (int j = 0; j < J; ++j) {
      acc[j] += (dt / 3.0) * k[j];
      probe[j] = u[j] + dt * k[j];
    }
    potential_rate(p, probe, b, density, k);
    for (int j = 0; j < J; ++j) u[j] = acc[j] + (dt / 6.0) * k[j];
  }
}

void project_real(Components& psi) {
  for (auto& f : psi) f = f.real().cast<Complex>();
}

}  // namespace

void nonlinear_flow_imaginary(const Problem& p, Fourier& fft, Components& psi, double b, double c,
                              double tau, int refine) {
  if (refine < 1) throw std::invalid_argument("nonlinear_flow_imaginary: refine must be >= 1");
  const bool potential = b != 0.0;
  if (potential) rk4_potential(p, psi, b, 0.5 * tau, refine);
  if (c != 0.0) {
    const double dt = tau / refine;
    for (int s = 0; s < refine; ++s) {
      const CommutatorOutput g = commutator_imaginary(p, fft, psi);
      add_scaled(psi, g.g, dt * c * tau * tau);
    }
  }
  if (potential) rk4_potential(p, psi, b, 0.5 * tau, refine);
  for (const auto& f : psi)
    if (!f.allFinite()) throw DivergenceError("nonlinear flow: non-finite values");
}

void apply_stage(const Problem& p, Fourier& fft, Components& psi, Mode mode, double a, double b,
                 double c, double tau, int refine) {
  if (a != 0.0) {
    const Complex constant = mode == Mode::real ? Complex(0.0, -1.0) : Complex(-1.0, 0.0);
    for (int j = 0; j < p.components(); ++j) kinetic_flow(fft, psi[j], p.alpha(j), constant, a * tau);
    if (mode == Mode::imaginary) project_real(psi);
  }
  if (b != 0.0 || c != 0.0) {
    if (mode == Mode::real)
      nonlinear_flow_real(p, fft, psi, b, c, tau);
    else
      nonlinear_flow_imaginary(p, fft, psi, b, c, tau, refine);
  }
}

void step(const Problem& p, Fourier& fft, State& state, const MethodSpec& method, double tau,
          int refine) {
  if (state.mode == Mode::imaginary && !(tau > 0.0))
    throw std::invalid_argument("step: imaginary time requires tau > 0");
  for (int i = 0; i < method.stages(); ++i) {
    try {
      apply_stage(p, fft, state.psi, state.mode, method.a[i], method.b[i], method.c[i], tau, refine);
    } catch (const DivergenceError& e) {
      throw DivergenceError(method.name + " stage " + std::to_string(i) + ": " + e.what(), i);
    }
    if (is_diverged(p, state.psi))
      throw DivergenceError(method.name + " stage " + std::to_string(i) + ": state diverged", i);
  }
  state.t += tau;
}

std::int64_t commutator_transforms(const Problem& p, Mode mode) {
  if (p.linear()) return 0;
  const std::int64_t J = p.components();
  const std::int64_t d = p.dim();
  std::int64_t n = J + J * d;
  if (mode == Mode::real)
    n += J == 1 ? 1 : (p.uniform_alpha() ? 2 : 4);
  else if (J == 2 && !p.uniform_alpha())
    n += 2;
  return n;
}

std::int64_t transforms_per_step(const Problem& p, const MethodSpec& method, Mode mode, int refine) {
  std::int64_t n = 0;
  const std::int64_t per_commutator = commutator_transforms(p, mode);
  for (int i = 0; i < method.stages(); ++i) {
    if (method.a[i] != 0.0) n += 2 * p.components();
    if (method.c[i] != 0.0) n += per_commutator * (mode == Mode::real ? 1 : refine);
  }
  return n;
}

}  // namespace gpsplit
