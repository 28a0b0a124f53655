#include "gpsplit/commutators.hpp"

#include <cmath>
#include <limits>

#include "gpsplit/errors.hpp"

namespace gpsplit {

namespace {

// sum_i w_i a_i b_i
template <typename T>
T wdot(std::span<const double> w, const std::vector<T>& a, const std::vector<T>& b) {
  T out = a[0] * b[0] * w[0];
  for (std::size_t i = 1; i < a.size(); ++i) out += a[i] * b[i] * w[i];
  return out;
}

RealField wdot_potential(std::span<const double> w, const Problem& p, int va, int vb) {
  RealField out = RealField::Zero(p.grid().size());
  for (int i = 0; i < p.dim(); ++i)
    out += w[i] * p.potential_gradient(va, i) * p.potential_gradient(vb, i);
  return out;
}

template <typename T>
T wdot_potential_field(std::span<const double> w, const Problem& p, int v, const std::vector<T>& d) {
  T out = d[0] * (w[0] * p.potential_gradient(v, 0));
  for (int i = 1; i < p.dim(); ++i) out += d[i] * (w[i] * p.potential_gradient(v, i));
  return out;
}

RealField potential_laplacian(std::span<const double> w, const Problem& p, int v) {
  RealField out = RealField::Zero(p.grid().size());
  for (int i = 0; i < p.dim(); ++i) out += w[i] * p.potential_curvature(v, i);
  return out;
}

std::vector<double> difference(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

void check_diverged(const Components& psi) {
  for (const auto& f : psi)
    if (!f.allFinite()) throw DivergenceError("commutator: non-finite input state");
}

// Forward transform once per component, then one inverse per axis.
struct Spectra {
  std::vector<Field> coeffs;
  std::vector<std::vector<Field>> grad;  // [component][axis]
};

Spectra spectra(const Problem& p, Fourier& fft, const Components& psi) {
  Spectra s;
  for (int j = 0; j < p.components(); ++j) {
    Field c = psi[j];
    fft.forward(c);
    std::vector<Field> g;
    for (int i = 0; i < p.dim(); ++i) g.push_back(gradient_from_coefficients(fft, c, i));
    s.coeffs.push_back(std::move(c));
    s.grad.push_back(std::move(g));
  }
  return s;
}

std::vector<RealField> real_parts(const std::vector<Field>& v) {
  std::vector<RealField> out;
  out.reserve(v.size());
  for (const auto& f : v) out.push_back(f.real());
  return out;
}

// ---------------------------------------------------------------------------
// Imaginary time.

RealField imaginary_single(const Problem& p, const RealField& u, const std::vector<RealField>& du) {
  const auto a = p.alpha(0);
  const double th = p.theta(0, 0);
  RealField s = wdot_potential(a, p, 0, 0);
  if (th != 0.0) {
    const RealField gpp = wdot(a, du, du);
    s += th * (6.0 * p.potential(0) * gpp + 6.0 * wdot_potential_field(a, p, 0, du) * u -
               potential_laplacian(a, p, 0) * u.square()) +
         12.0 * th * th * gpp * u.square();
  }
  return -2.0 * s * u;
}

// Component `s` of the J = 2 identity; the other component is `o`.
RealField imaginary_pair(const Problem& p, int s, int o, const RealField& p1, const RealField& p2,
                         const std::vector<RealField>& d1, const std::vector<RealField>& d2,
                         const RealField* lapdiff1, const RealField* lapdiff2, double sign) {
  const auto a1 = p.alpha(s);
  const auto a2 = p.alpha(o);
  const double t11 = p.theta(s, s), t12 = p.theta(s, o), t21 = p.theta(o, s),
               t22 = p.theta(o, o);
  const RealField& v1 = p.potential(s);
  const RealField& v2 = p.potential(o);

  const RealField s0 = wdot_potential(a1, p, s, s) * p1;
  if (p.linear()) return -2.0 * s0;

  const RealField g11_a1 = wdot(a1, d1, d1);
  const RealField g11_a2 = wdot(a2, d1, d1);
  const RealField g12_a1 = wdot(a1, d1, d2);
  const RealField g12_a2 = wdot(a2, d1, d2);
  const RealField g22_a1 = wdot(a1, d2, d2);
  const RealField g22_a2 = wdot(a2, d2, d2);
  const RealField p1sq = p1.square();
  const RealField p2sq = p2.square();

  RealField s1 = 6.0 * t11 * v1 * g11_a1 * p1 +
                 2.0 * t12 * v2 * (2.0 * g12_a1 * p2 + g22_a1 * p1) +
                 2.0 * (3.0 * t11 * wdot_potential_field(a1, p, s, d1) * p1 +
                        2.0 * t12 * wdot_potential_field(a1, p, s, d2) * p2) *
                     p1 +
                 2.0 * t12 *
                     (wdot_potential_field(a1, p, o, d1) * p2 +
                      2.0 * (wdot_potential_field(a1, p, o, d2) - wdot_potential_field(a2, p, o, d2)) *
                          p1) *
                     p2 -
                 t11 * potential_laplacian(a1, p, s) * p1sq * p1 +
                 t12 * (potential_laplacian(a1, p, o) - 2.0 * potential_laplacian(a2, p, o)) * p1 *
                     p2sq;

  const double c1 = t11 * t12 + t12 * t21;
  RealField s2 = 2.0 * (6.0 * t11 * t11 * g11_a1 * p1sq * p1 + 3.0 * c1 * g11_a1 * p1 * p2sq -
                        2.0 * t12 * t21 * g11_a2 * p1 * p2sq + 4.0 * t12 * t22 * g12_a1 * p2sq * p2 +
                        6.0 * c1 * g12_a1 * p1sq * p2 - 4.0 * t12 * t21 * g12_a2 * p1sq * p2 +
                        (t12 * t21 - t11 * t12) * g22_a1 * p1sq * p1 +
                        2.0 * t12 * t12 * g22_a1 * p1 * p2sq +
                        6.0 * t12 * t22 * (g22_a1 - g22_a2) * p1 * p2sq);

  RealField total = s0 + s1 + s2;
  // Laplacian-difference terms; lapdiffk = (Delta_{a_s} - Delta_{a_o}) p_k up to `sign`.
  if (lapdiff1 != nullptr) {
    total += 2.0 * t12 * v2 * (sign * *lapdiff2) * p1 * p2;
    total += 2.0 * (2.0 * t12 * t21 * (sign * *lapdiff1) * p1sq * p2sq -
                    (t11 * t12 - t12 * t21) * (sign * *lapdiff2) * p1sq * p1 * p2 +
                    2.0 * t12 * t22 * (sign * *lapdiff2) * p1 * p2sq * p2);
  }
  return -2.0 * total;
}

// ---------------------------------------------------------------------------
// Real time. Returns the real bracket S0 + S1 + S2 + S3; the multiplier is 2i times it.

RealField real_single(const Problem& p, const Field& u, const std::vector<Field>& du,
                      const Field& lap) {
  const auto a = p.alpha(0);
  const double th = p.theta(0, 0);
  RealField s = wdot_potential(a, p, 0, 0);
  if (th != 0.0) {
    const RealField n = u.abs2();
    const Field uc = u.conjugate();
    std::vector<Field> duc;
    for (const auto& f : du) duc.push_back(f.conjugate());
    const Field g = wdot(a, du, du);
    const RealField h = wdot(a, du, duc).real();
    s += -2.0 * th * potential_laplacian(a, p, 0) * n -
         2.0 * th * th * (g * uc.square()).real() - 6.0 * th * th * h * n -
         4.0 * th * th * (lap * uc).real() * n;
  }
  return s;
}

RealField real_pair(const Problem& p, int s, int o, const Field& u1, const Field& u2,
                    const std::vector<Field>& d1, const std::vector<Field>& d2,
                    const Field& l1u1, const Field& l2u1, const Field& l1u2, const Field& l2u2) {
  const auto a1 = p.alpha(s);
  const auto a2 = p.alpha(o);
  const double t11 = p.theta(s, s), t12 = p.theta(s, o), t21 = p.theta(o, s),
               t22 = p.theta(o, o);

  RealField total = wdot_potential(a1, p, s, s);
  if (p.linear()) return total;

  const Field c1 = u1.conjugate();
  const Field c2 = u2.conjugate();
  const RealField n1 = u1.abs2();
  const RealField n2 = u2.abs2();
  std::vector<Field> d1c, d2c;
  for (const auto& f : d1) d1c.push_back(f.conjugate());
  for (const auto& f : d2) d2c.push_back(f.conjugate());

  // sum_i (a1_i dV1 - a2_i dV2) Re(d_i u2 conj u2)
  RealField r2 = RealField::Zero(u1.size());
  for (int i = 0; i < p.dim(); ++i)
    r2 += (a1[i] * p.potential_gradient(s, i) - a2[i] * p.potential_gradient(o, i)) *
          (d2[i] * c2).real();

  const RealField s1 = 2.0 * (2.0 * t12 * r2 - (t11 * potential_laplacian(a1, p, s) * n1 +
                                               t12 * potential_laplacian(a2, p, o) * n2));

  const RealField h11_a1 = wdot(a1, d1, d1c).real();
  const RealField h11_a2 = wdot(a2, d1, d1c).real();
  const RealField h22_a1 = wdot(a1, d2, d2c).real();
  const RealField h22_a2 = wdot(a2, d2, d2c).real();
  const RealField s2 =
      -2.0 * (t11 * t11 * (wdot(a1, d1, d1) * c1.square()).real() + 3.0 * t11 * t11 * h11_a1 * n1 +
              2.0 * t12 * t21 * h11_a2 * n2 +
              2.0 * t12 * t21 * (wdot(a2, d1, d2) * c1 * c2 + wdot(a2, d1, d2c) * c1 * u2).real() -
              t12 * t12 * ((wdot(a1, d2, d2) * c2.square()).real() + h22_a1 * n2) +
              2.0 * t12 * t22 * ((wdot(a2, d2, d2) * c2.square()).real() + 2.0 * h22_a2 * n2) +
              2.0 * t11 * t12 * h22_a1 * n1);

  const RealField s3 = -2.0 * (2.0 * (t11 * t11 * l1u1 * c1 * n1 + t12 * t21 * l2u1 * c1 * n2).real() +
                               2.0 * (t11 * t12 * l1u2 * c2 * n1 + t12 * t22 * l2u2 * c2 * n2).real());
  return total + s1 + s2 + s3;
}

}  // namespace

CommutatorOutput commutator_imaginary(const Problem& p, Fourier& fft, const Components& psi) {
  const int J = p.components();
  if (J > 2) throw std::invalid_argument("commutator_imaginary: closed form only for J <= 2");
  check_diverged(psi);
  for (const auto& f : psi) {
    const double scale = f.abs().maxCoeff();
    if (f.imag().abs().maxCoeff() > 1e-12 * std::max(scale, 1e-300))
      throw std::invalid_argument("commutator_imaginary: fields must be real-valued");
  }

  CommutatorOutput out;
  std::vector<RealField> u;
  for (const auto& f : psi) u.push_back(f.real());

  if (p.linear()) {
    for (int j = 0; j < J; ++j)
      out.g.push_back((-2.0 * wdot_potential(p.alpha(j), p, j, j) * u[j]).cast<Complex>());
    return out;
  }

  const Spectra sp = spectra(p, fft, psi);
  std::vector<std::vector<RealField>> du;
  for (int j = 0; j < J; ++j) du.push_back(real_parts(sp.grad[j]));

  if (J == 1) {
    out.g.push_back(imaginary_single(p, u[0], du[0]).cast<Complex>());
    return out;
  }

  RealField lapdiff0, lapdiff1;
  const bool uniform = p.uniform_alpha();
  if (!uniform) {
    const auto diff = difference(p.alpha(0), p.alpha(1));
    lapdiff0 = laplacian_from_coefficients(fft, sp.coeffs[0], diff).real();
    lapdiff1 = laplacian_from_coefficients(fft, sp.coeffs[1], diff).real();
  }
  // (Delta_{a_s} - Delta_{a_o}) flips sign when the roles are exchanged.
  out.g.push_back(imaginary_pair(p, 0, 1, u[0], u[1], du[0], du[1], uniform ? nullptr : &lapdiff0,
                                 uniform ? nullptr : &lapdiff1, 1.0)
                      .cast<Complex>());
  out.g.push_back(imaginary_pair(p, 1, 0, u[1], u[0], du[1], du[0], uniform ? nullptr : &lapdiff1,
                                 uniform ? nullptr : &lapdiff0, -1.0)
                      .cast<Complex>());
  return out;
}

CommutatorOutput commutator_real(const Problem& p, Fourier& fft, const Components& psi) {
  const int J = p.components();
  if (J > 2) throw std::invalid_argument("commutator_real: closed form only for J <= 2");
  check_diverged(psi);

  std::vector<RealField> bracket;
  if (p.linear()) {
    for (int j = 0; j < J; ++j) bracket.push_back(wdot_potential(p.alpha(j), p, j, j));
  } else {
    const Spectra sp = spectra(p, fft, psi);
    if (J == 1) {
      const Field lap = laplacian_from_coefficients(fft, sp.coeffs[0], p.alpha(0));
      bracket.push_back(real_single(p, psi[0], sp.grad[0], lap));
    } else {
      // lap[a][k] = Delta_{alpha_a} psi_k
      Field lap[2][2];
      for (int k = 0; k < 2; ++k) {
        lap[0][k] = laplacian_from_coefficients(fft, sp.coeffs[k], p.alpha(0));
        lap[1][k] = p.uniform_alpha() ? lap[0][k]
                                      : laplacian_from_coefficients(fft, sp.coeffs[k], p.alpha(1));
      }
      bracket.push_back(real_pair(p, 0, 1, psi[0], psi[1], sp.grad[0], sp.grad[1], lap[0][0],
                                  lap[1][0], lap[0][1], lap[1][1]));
      bracket.push_back(real_pair(p, 1, 0, psi[1], psi[0], sp.grad[1], sp.grad[0], lap[1][1],
                                  lap[0][1], lap[1][0], lap[0][0]));
    }
  }

  CommutatorOutput out;
  for (int j = 0; j < J; ++j) {
    Field m = Complex(0.0, 2.0) * bracket[j].cast<Complex>();
    out.g.push_back(m * psi[j]);
    out.multiplier.push_back(std::move(m));
  }
  return out;
}

CommutatorOutput commutator(const Problem& problem, Fourier& fft, const Components& psi, Mode mode) {
  return mode == Mode::real ? commutator_real(problem, fft, psi)
                            : commutator_imaginary(problem, fft, psi);
}

// ---------------------------------------------------------------------------
// Oracle.

namespace {

Complex mode_constant(Mode mode) { return mode == Mode::real ? Complex(0.0, -1.0) : Complex(-1.0, 0.0); }

double max_abs(const Components& v) {
  double m = 0.0;
  for (const auto& f : v) m = std::max(m, f.abs().maxCoeff());
  return m;
}

Components axpy(const Components& v, double a, const Components& w, double b = 0.0,
                const Components* z = nullptr) {
  Components out = v;
  for (std::size_t j = 0; j < v.size(); ++j) {
    out[j] += a * w[j];
    if (z != nullptr) out[j] += b * (*z)[j];
  }
  return out;
}

void combine(Components& acc, double s, const Components& x) {
  for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += s * x[j];
}

struct FiniteDifferences {
  const Operator& op;
  double scale;  // max |v|
  const OracleOptions& opt;

  double step(double eps, const Components& w) const {
    const double wm = max_abs(w);
    return wm > 0.0 ? eps * std::max(scale, 1e-300) / wm : 0.0;
  }

  Components first_raw(const Components& v, const Components& w, double h) {
    Components d = gateaux_fd(op, v, w, h);
    return d;
  }

  // F'(v) w
  Components first(const Components& v, const Components& w) {
    const double h = step(opt.eps1, w);
    if (h == 0.0) return zero_like(v);
    Components d = first_raw(v, w, h);
    if (opt.richardson) {
      const Components d2 = first_raw(v, w, 2.0 * h);
      for (std::size_t j = 0; j < d.size(); ++j) d[j] = (4.0 * d[j] - d2[j]) / 3.0;
    }
    return d;
  }

  Components mixed_raw(const Components& v, const Components& w1, const Components& w2, double h1,
                       double h2) {
    Components acc = op(axpy(v, h1, w1, h2, &w2));
    combine(acc, -1.0, op(axpy(v, h1, w1, -h2, &w2)));
    combine(acc, -1.0, op(axpy(v, -h1, w1, h2, &w2)));
    combine(acc, 1.0, op(axpy(v, -h1, w1, -h2, &w2)));
    for (auto& f : acc) f /= 4.0 * h1 * h2;
    return acc;
  }

  // F''(v)(w1, w2)
  Components second(const Components& v, const Components& w1, const Components& w2) {
    const double h1 = step(opt.eps2, w1);
    const double h2 = step(opt.eps2, w2);
    if (h1 == 0.0 || h2 == 0.0) return zero_like(v);
    Components d = mixed_raw(v, w1, w2, h1, h2);
    if (opt.richardson) {
      const Components d2 = mixed_raw(v, w1, w2, 2.0 * h1, 2.0 * h2);
      for (std::size_t j = 0; j < d.size(); ++j) d[j] = (4.0 * d[j] - d2[j]) / 3.0;
    }
    return d;
  }

  static Components zero_like(const Components& v) {
    Components z = v;
    for (auto& f : z) f.setZero();
    return z;
  }
};

}  // namespace

Components apply_f1(const Problem& p, Fourier& fft, const Components& psi, Mode mode) {
  const Complex c = mode_constant(mode);
  Components out;
  for (int j = 0; j < p.components(); ++j)
    out.push_back(c * weighted_laplacian(fft, psi[j], p.alpha(j)));
  return out;
}

Components apply_f2(const Problem& p, const Components& psi, Mode mode) {
  const Complex c = mode_constant(mode);
  Components out;
  for (int j = 0; j < p.components(); ++j)
    out.push_back(c * (p.potential(j) * psi[j] + apply_h2(p, psi, j)));
  return out;
}

OracleOutput commutator_oracle(const Problem& p, Fourier& fft, const Components& psi, Mode mode,
                               const OracleOptions& options) {
  const Operator f1 = [&](const Components& v) { return apply_f1(p, fft, v, mode); };
  const Operator f2 = [&](const Components& v) { return apply_f2(p, v, mode); };
  const double scale = max_abs(psi);
  FiniteDifferences d1{f1, scale, options};
  FiniteDifferences d2{f2, scale, options};

  const Components f1v = f1(psi);
  const Components f2v = f2(psi);

  // Each term carries a relative round-off of about u / eps per difference
  // level; the terms cancel heavily, so the floor scales with their size.
  const double u = std::numeric_limits<double>::epsilon();
  double noise = 0.0;
  auto add = [&](Components& acc, double weight, Components term, double levels_relative) {
    noise += std::abs(weight) * max_abs(term) * u * levels_relative;
    combine(acc, weight, term);
  };
  const double first = 1.0 / options.eps1;
  const double second = 1.0 / (options.eps2 * options.eps2);

  Components g = FiniteDifferences::zero_like(psi);
  // F1''(v)(F2 v, F2 v)
  add(g, 1.0, d1.second(psi, f2v, f2v), second);
  // + F1'(v) F2'(v) F2(v)
  add(g, 1.0, d1.first(psi, d2.first(psi, f2v)), 2.0 * first);
  // + F2'(v) F2'(v) F1(v)
  add(g, 1.0, d2.first(psi, d2.first(psi, f1v)), 2.0 * first);
  // - F2''(v)(F1 v, F2 v)
  add(g, -1.0, d2.second(psi, f1v, f2v), second);
  // - 2 F2'(v) F1'(v) F2(v)
  add(g, -2.0, d2.first(psi, d1.first(psi, f2v)), 2.0 * first);

  return {std::move(g), noise};
}

}  // namespace gpsplit
