#include "gpsplit/groundstate.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "gpsplit/errors.hpp"

namespace gpsplit {

InitKind parse_init_kind(std::string_view name) {
  if (name == "constant") return InitKind::constant;
  if (name == "gaussian") return InitKind::gaussian;
  if (name == "hermite") return InitKind::hermite;
  if (name == "thomas_fermi") return InitKind::thomas_fermi;
  throw ConfigError("unknown initial state '" + std::string(name) +
                    "'; expected constant, gaussian, hermite or thomas_fermi");
}

std::string_view to_string(InitKind kind) {
  switch (kind) {
    case InitKind::constant: return "constant";
    case InitKind::gaussian: return "gaussian";
    case InitKind::hermite: return "hermite";
    case InitKind::thomas_fermi: return "thomas_fermi";
  }
  return "?";
}

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::tolerance: return "tolerance";
    case StopReason::max_iter: return "max_iter";
    case StopReason::divergence: return "divergence";
  }
  return "?";
}

void StopRule::validate() const {
  if (!(energy_tol > 0.0)) throw ConfigError("stop.energy_tol must be positive");
  if (max_iter < 1) throw ConfigError("stop.max_iter must be at least 1");
  if (renormalize_every < 1) throw ConfigError("stop.renormalize_every must be at least 1");
  if (patience < 1) throw ConfigError("stop.patience must be at least 1");
}

double thomas_fermi_mu(const Problem& p, int j) {
  const double th = p.theta(j, j);
  if (!(th > 0.0)) throw ConfigError("thomas_fermi: requires a positive self-coupling theta_jj");
  const double n = p.n0(j);
  double beta = 1.0;
  for (int i = 0; i < p.dim(); ++i) {
    const double b = p.spec().beta(j, i);
    if (!(b > 0.0)) throw ConfigError("thomas_fermi: requires positive harmonic weights beta");
    beta *= b;
  }
  const double pi = std::numbers::pi;
  switch (p.dim()) {
    case 1: return std::cbrt(9.0 / 16.0 * beta * th * th * n * n);
    case 2: return std::sqrt(2.0 / pi * std::sqrt(beta) * th * n);
    default: return std::pow(225.0 / (64.0 * pi * pi) * beta * th * th * n * n, 0.2);
  }
}

double hermite_mu(const Problem& p, int j) {
  double mu = 0.0;
  for (int i = 0; i < p.dim(); ++i) mu += std::sqrt(-p.spec().alpha(j, i) * p.spec().beta(j, i));
  return mu;
}

Components hermite_state(const Problem& p, double t) {
  const auto& g = p.grid();
  Components out;
  for (int j = 0; j < p.components(); ++j) {
    double amp = std::sqrt(p.n0(j)) / std::pow(std::numbers::pi, 0.25 * p.dim());
    RealField exponent = RealField::Zero(g.size());
    for (int i = 0; i < p.dim(); ++i) {
      const double a = p.spec().alpha(j, i);
      const double b = p.spec().beta(j, i);
      if (!(a < 0.0 && b > 0.0))
        throw ConfigError("hermite state: requires alpha < 0 and beta > 0");
      const double ratio = b / -a;
      amp *= std::pow(ratio, 0.125);
      exponent -= 0.5 * std::sqrt(ratio) * g.coords(i).square();
    }
    const Complex phase = std::exp(Complex(0.0, -hermite_mu(p, j) * t));
    out.push_back((amp * phase) * exponent.exp().cast<Complex>());
  }
  return out;
}

void renormalize(const SpectralGrid& grid, Components& psi, const Eigen::VectorXd& n0) {
  for (std::size_t j = 0; j < psi.size(); ++j) {
    const double norm = discrete_norm(grid, psi[j]);
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      std::ostringstream os;
      os << "renormalize: component " << j << " has norm " << norm;
      throw DivergenceError(os.str());
    }
    psi[j] *= std::sqrt(n0[static_cast<Eigen::Index>(j)]) / norm;
  }
}

State init_state(const Problem& p, InitKind kind, Mode mode, const std::vector<double>& center) {
  if (!center.empty() && static_cast<int>(center.size()) != p.dim())
    throw ConfigError("initial state: center needs one entry per axis");
  const auto& g = p.grid();
  State s;
  s.mode = mode;
  switch (kind) {
    case InitKind::constant:
      for (int j = 0; j < p.components(); ++j) s.psi.push_back(Field::Ones(g.size()));
      break;
    case InitKind::gaussian: {
      RealField r2 = RealField::Zero(g.size());
      for (int i = 0; i < p.dim(); ++i)
        r2 += (g.coords(i) - (center.empty() ? 0.0 : center[i])).square();
      for (int j = 0; j < p.components(); ++j) s.psi.push_back((-0.5 * r2).exp().cast<Complex>());
      break;
    }
    case InitKind::hermite:
      s.psi = hermite_state(p, 0.0);
      break;
    case InitKind::thomas_fermi:
      for (int j = 0; j < p.components(); ++j) {
        const double mu = thomas_fermi_mu(p, j);
        RealField harmonic = RealField::Zero(g.size());
        for (int i = 0; i < p.dim(); ++i) harmonic += p.spec().beta(j, i) * g.coords(i).square();
        const RealField w = ((mu - harmonic) / p.theta(j, j)).max(0.0);
        s.psi.push_back(w.sqrt().cast<Complex>());
      }
      break;
  }
  renormalize(g, s.psi, p.spec().n0);
  return s;
}

double residual(const Problem& p, Fourier& fft, const Components& phi, const std::vector<double>& mu) {
  const auto& g = p.grid();
  double sum = 0.0;
  for (int j = 0; j < p.components(); ++j) {
    const Field r = apply_h1(p, fft, phi, j) + apply_h2(p, phi, j) - mu[j] * phi[j];
    sum += discrete_norm_squared(g, r);
  }
  return std::sqrt(sum) / discrete_norm(g, phi);
}

namespace {

void require_imaginary_ready(const Problem& p, State& state) {
  if (!p.negative_alpha())
    throw ConfigError("imaginary time: every Laplacian weight alpha must be negative");
  for (auto& f : state.psi) {
    const double scale = f.abs().maxCoeff();
    if (f.imag().abs().maxCoeff() > 1e-12 * scale)
      throw ConfigError("imaginary time: initial state must be real-valued");
    f = f.real().cast<Complex>();
  }
  state.mode = Mode::imaginary;
}

void finish(const Problem& p, Fourier& diag, GroundStateResult& r) {
  const ObservableRecord obs = observables(p, diag, r.phi);
  r.mu = obs.mu;
  r.energy = obs.E;
  r.residual = residual(p, diag, r.phi, r.mu);
  r.converged = r.reason == StopReason::tolerance;
}

// Shared loop: `advance(state, mu)` performs one accepted step (returns the
// step size) or throws DivergenceError; `normalize` projects the state.
template <typename Advance, typename Normalize>
GroundStateResult descent_loop(const Problem& p, Fourier& fft, State& state, const StopRule& stop,
                               const Sink& sink, Advance&& advance, Normalize&& normalize) {
  stop.validate();
  Fourier diag(p.grid_ptr());
  const std::int64_t start = fft.transform_count();
  GroundStateResult r;
  normalize(state.psi, true);
  ObservableRecord initial = observables(p, diag, state.psi);
  double energy = initial.E;
  std::vector<double> mu = initial.mu;
  int calm = 0;
  while (true) {
    double tau = 0.0;
    try {
      tau = advance(state, mu);
      ++r.iterations;
      normalize(state.psi, r.iterations % stop.renormalize_every == 0);
    } catch (const DivergenceError& e) {
      r.reason = StopReason::divergence;
      r.failed_iteration = r.iterations + 1;
      r.message = e.what();
      break;
    }
    ObservableRecord obs = observables(p, diag, state.psi);
    if (!std::isfinite(obs.E) || is_diverged(p, state.psi)) {
      r.reason = StopReason::divergence;
      r.failed_iteration = r.iterations;
      r.message = "energy is not finite or the mass exploded";
      break;
    }
    if (sink) {
      obs.step = r.iterations;
      obs.t = state.t;
      obs.tau = tau;
      obs.transforms = fft.transform_count() - start;
      sink(obs);
    }
    mu = obs.mu;
    double change = std::abs(obs.E - energy);
    if (stop.per_unit_time) change /= tau;
    energy = obs.E;
    calm = change < stop.energy_tol ? calm + 1 : 0;
    if (calm >= stop.patience) {
      r.reason = StopReason::tolerance;
      break;
    }
    if (r.iterations >= stop.max_iter) {
      r.reason = StopReason::max_iter;
      break;
    }
  }
  r.t = state.t;
  r.transforms = fft.transform_count() - start;
  r.phi = state.psi;
  finish(p, diag, r);
  return r;
}

}  // namespace

GroundStateResult propagate_imaginary(const Problem& p, Fourier& fft, State state,
                                      const Stepper& stepper, const StopRule& stop,
                                      const DescentOptions& options, const Sink& sink) {
  require_imaginary_ready(p, state);
  const int refine = options.refine;
  auto flow_problem = [&](const std::vector<double>& mu) {
    return options.energy_shift ? p.with_potential_offset(mu) : p;
  };
  auto normalize = [&](Components& psi, bool now) {
    if (now) renormalize(p.grid(), psi, p.spec().n0);
  };
  std::int64_t rejected = 0;

  GroundStateResult r;
  if (const auto* fixed = std::get_if<FixedStepper>(&stepper)) {
    auto advance = [&](State& s, const std::vector<double>& mu) {
      step(flow_problem(mu), fft, s, fixed->method, fixed->tau, refine);
      return fixed->tau;
    };
    r = descent_loop(p, fft, state, stop, sink, advance, normalize);
  } else {
    const auto& adaptive = std::get<AdaptiveStepper>(stepper);
    adaptive.params.validate();
    double tau = adaptive.tau0;
    auto advance = [&](State& s, const std::vector<double>& mu) {
      const Problem flow = flow_problem(mu);
      for (int attempt = 0;; ++attempt) {
        if (attempt >= adaptive.params.max_rejections)
          throw ControllerError("controller: too many consecutive rejections");
        StepResult res = embedded_step(flow, fft, s, tau, adaptive.params, refine);
        const double used = tau;
        tau = res.tau_next;
        if (res.accepted) {
          s = std::move(res.state);
          return used;
        }
        ++rejected;
      }
    };
    r = descent_loop(p, fft, state, stop, sink, advance, normalize);
  }
  r.rejected = rejected;
  return r;
}

std::array<double, 4> damped_mode_exponential(double kappa, double damping, double tau) {
  using C = std::complex<double>;
  const double shift = -0.5 * damping;
  const C q = std::sqrt(C(0.25 * damping * damping - kappa, 0.0));
  const C qt = q * tau;
  const C cosh_qt = std::cosh(qt);
  // sinh(q tau) / q
  const C sinhc = std::abs(qt) < 1e-4 ? tau * (1.0 + qt * qt / 6.0) : std::sinh(qt) / q;
  const double e = std::exp(shift * tau);
  const double ch = cosh_qt.real();
  const double sh = sinhc.real();
  // exp(tau A) = e^{s tau} (cosh(q tau) I + sinh(q tau)/q (A - s I)), s = -c/2
  return {e * (ch + sh * 0.5 * damping), e * sh, e * (-kappa * sh), e * (ch - sh * 0.5 * damping)};
}

GroundStateResult momentum_descent(const Problem& p, Fourier& fft, State state,
                                   const MomentumParams& params, const StopRule& stop,
                                   const DescentOptions& options, const Sink& sink) {
  require_imaginary_ready(p, state);
  if (!(params.damping > 0.0)) throw ConfigError("momentum.damping must be positive");
  if (!(params.tau > 0.0)) throw ConfigError("momentum.tau must be positive");
  const int J = p.components();
  const auto& g = p.grid();

  // Per-mode propagators of the kinetic/damping part.
  std::vector<std::array<Field, 4>> prop(J);
  for (int j = 0; j < J; ++j) {
    const RealField kappa = g.weighted_laplacian_symbol(p.alpha(j));
    for (auto& m : prop[j]) m.resize(g.size());
    for (Eigen::Index n = 0; n < g.size(); ++n) {
      const auto m = damped_mode_exponential(kappa[n], params.damping, params.tau);
      for (int e = 0; e < 4; ++e) prop[j][e][n] = m[e];
    }
  }

  Components velocity(J, Field::Zero(g.size()));
  auto kick = [&](const Components& u, double h, const std::vector<double>& mu) {
    for (int j = 0; j < J; ++j) {
      RealField w = p.potential(j) - (options.energy_shift ? mu[j] : 0.0);
      for (int k = 0; k < J; ++k)
        if (p.theta(j, k) != 0.0) w += p.theta(j, k) * u[k].abs2();
      velocity[j] -= h * (w.cast<Complex>() * u[j]);
    }
  };
  auto advance = [&](State& s, const std::vector<double>& mu) {
    kick(s.psi, 0.5 * params.tau, mu);
    for (int j = 0; j < J; ++j) {
      Field u = s.psi[j];
      Field v = velocity[j];
      fft.forward(u);
      fft.forward(v);
      Field nu = prop[j][0] * u + prop[j][1] * v;
      Field nv = prop[j][2] * u + prop[j][3] * v;
      fft.inverse(nu);
      fft.inverse(nv);
      s.psi[j] = nu.real().cast<Complex>();
      velocity[j] = nv.real().cast<Complex>();
    }
    kick(s.psi, 0.5 * params.tau, mu);
    s.t += params.tau;
    if (is_diverged(p, s.psi)) throw DivergenceError("momentum descent: state diverged");
    return params.tau;
  };
  auto normalize = [&](Components& psi, bool now) {
    if (!now) return;
    for (int j = 0; j < J; ++j) {
      const double norm = discrete_norm(g, psi[j]);
      if (!(norm > 0.0) || !std::isfinite(norm))
        throw DivergenceError("momentum descent: component lost its norm");
      const double f = std::sqrt(p.n0(j)) / norm;
      psi[j] *= f;
      velocity[j] *= f;
    }
  };
  return descent_loop(p, fft, state, stop, sink, advance, normalize);
}

}  // namespace gpsplit
