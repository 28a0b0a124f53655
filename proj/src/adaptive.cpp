#include "gpsplit/adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "gpsplit/errors.hpp"

namespace gpsplit {

void ControllerParams::validate() const {
  if (!(tol > 0.0)) throw ConfigError("controller.tol must be positive");
  if (!(fac_min > 0.0 && fac_min <= 1.0)) throw ConfigError("controller.fac_min must lie in (0, 1]");
  if (!(fac_max >= 1.0)) throw ConfigError("controller.fac_max must be at least 1");
  if (!(safety > 0.0 && safety <= 1.0)) throw ConfigError("controller.safety must lie in (0, 1]");
  if (!(tau_min > 0.0 && tau_min <= tau_max)) throw ConfigError("controller: need 0 < tau_min <= tau_max");
  if (max_rejections < 1) throw ConfigError("controller.max_rejections must be at least 1");
  if (exponent && !(*exponent > 0.0)) throw ConfigError("controller.exponent must be positive");
}

double propose_step(const ControllerParams& params, double tau, double eps) {
  const double exponent = params.exponent.value_or(1.0 / params.local_order());
  double factor = params.fac_max;
  if (eps > 0.0) factor = params.safety * std::pow(params.tol / eps, exponent);
  if (!std::isfinite(factor)) factor = eps > 0.0 ? params.fac_min : params.fac_max;
  return tau * std::clamp(factor, params.fac_min, params.fac_max);
}

StepResult embedded_step(const Problem& p, Fourier& fft, const State& state, double tau,
                         const ControllerParams& params, int refine) {
  static const MethodSpec modified = method_catalog("chin_modified4");
  static const MethodSpec strang = method_catalog("strang");

  State high = state;
  State low = state;
  std::optional<std::string> high_failure, low_failure;
  try {
    step(p, fft, high, modified, tau, refine);
  } catch (const DivergenceError& e) {
    high_failure = e.what();
  }
  try {
    step(p, fft, low, strang, tau, refine);
  } catch (const DivergenceError& e) {
    low_failure = e.what();
  }
  if (high_failure && low_failure) {
    std::ostringstream os;
    os << "controller: both embedded steps diverged at t = " << state.t << ", tau = " << tau
       << " (" << *high_failure << ")";
    throw ControllerError(os.str());
  }

  StepResult r;
  r.tau_used = tau;
  if (high_failure || low_failure) {
    r.err = std::numeric_limits<double>::infinity();
  } else {
    Components diff = high.psi;
    for (std::size_t j = 0; j < diff.size(); ++j) diff[j] -= low.psi[j];
    const double local = discrete_norm(p.grid(), diff) / std::sqrt(p.n0_total());
    r.err = params.strategy == ErrorStrategy::A ? local : tau * tau * local;
  }
  r.accepted = r.err <= params.tol;
  r.tau_next = std::min(propose_step(params, tau, r.err), params.tau_max);
  if (r.tau_next < params.tau_min) {
    std::ostringstream os;
    os << "controller: proposed step " << r.tau_next << " below tau_min = " << params.tau_min
       << " at t = " << state.t;
    throw ControllerError(os.str());
  }
  r.state = r.accepted ? std::move(high) : state;
  return r;
}

namespace {

ObservableRecord record(const Problem& p, Fourier& diag, const State& s, std::int64_t step,
                        double tau, double err, bool accepted, std::int64_t transforms) {
  ObservableRecord r = observables(p, diag, s.psi);
  r.step = step;
  r.t = s.t;
  r.tau = tau;
  r.err_estimate = err;
  r.accepted = accepted;
  r.transforms = transforms;
  return r;
}

bool can_fuse(const MethodSpec& m, Mode mode) {
  const int s = m.stages();
  return mode == Mode::real && s > 1 && m.a[0] == 0.0 && m.c[0] == 0.0 && m.c[s - 1] == 0.0;
}

}  // namespace

EvolveResult evolve(const Problem& p, Fourier& fft, State state, double t_end, const Stepper& stepper,
                    const Sink& sink, const EvolveOptions& options) {
  if (!(t_end > state.t)) throw std::invalid_argument("evolve: t_end must exceed the current time");
  Fourier diag(p.grid_ptr());
  const std::int64_t start = fft.transform_count();
  EvolveResult out;
  auto emit = [&](std::int64_t n, double tau, double err, bool accepted) {
    if (sink) sink(record(p, diag, state, n, tau, err, accepted, fft.transform_count() - start));
  };
  if (options.emit_initial) emit(0, 0.0, 0.0, true);

  if (const auto* fixed = std::get_if<FixedStepper>(&stepper)) {
    if (!(fixed->tau > 0.0)) throw std::invalid_argument("evolve: tau must be positive");
    const double span = t_end - state.t;
    const auto n = static_cast<std::int64_t>(std::ceil(span / fixed->tau - 1e-9));
    const double tau = span / static_cast<double>(n);
    const double t0 = state.t;
    const MethodSpec& m = fixed->method;
    const bool fuse = options.fuse_stages && can_fuse(m, state.mode);
    const int s = m.stages();
    try {
      if (fuse) apply_stage(p, fft, state.psi, state.mode, 0.0, m.b[0], 0.0, tau);
      for (std::int64_t k = 1; k <= n; ++k) {
        if (fuse) {
          // The leading half of the next step is folded into this step's last stage.
          for (int i = 1; i < s; ++i) {
            const double b = i == s - 1 && k < n ? m.b[i] + m.b[0] : m.b[i];
            apply_stage(p, fft, state.psi, state.mode, m.a[i], b, m.c[i], tau, options.refine);
          }
          if (is_diverged(p, state.psi)) throw DivergenceError("fused step: state diverged");
        } else {
          step(p, fft, state, m, tau, options.refine);
        }
        state.t = t0 + static_cast<double>(k) * tau;
        ++out.accepted;
        emit(k, tau, 0.0, true);
        if (options.observer) options.observer(state, k);
      }
    } catch (const DivergenceError& e) {
      out.failure = e.what();
      out.failure_stage = e.stage();
    }
  } else {
    const auto& adaptive = std::get<AdaptiveStepper>(stepper);
    adaptive.params.validate();
    double tau = adaptive.tau0;
    int consecutive = 0;
    try {
      while (t_end - state.t > 1e-13 * std::max(1.0, std::abs(t_end))) {
        const double remaining = t_end - state.t;
        const bool last = tau >= remaining;
        const double attempt = last ? remaining : tau;
        StepResult r = embedded_step(p, fft, state, attempt, adaptive.params, options.refine);
        if (r.accepted) {
          consecutive = 0;
          state = std::move(r.state);
          if (last) state.t = t_end;
          ++out.accepted;
          emit(out.accepted, attempt, r.err, true);
          if (options.observer) options.observer(state, out.accepted);
          // A shortened landing step does not shrink the proposal.
          tau = last ? std::max(r.tau_next, tau) : r.tau_next;
        } else {
          ++out.rejected;
          if (++consecutive >= adaptive.params.max_rejections) {
            std::ostringstream os;
            os << "controller: " << consecutive << " consecutive rejections at t = " << state.t;
            throw ControllerError(os.str());
          }
          tau = r.tau_next;
        }
      }
    } catch (const ControllerError& e) {
      out.failure = e.what();
      out.controller_failure = true;
    } catch (const DivergenceError& e) {
      out.failure = e.what();
      out.failure_stage = e.stage();
    }
  }
  out.transforms = fft.transform_count() - start;
  out.state = std::move(state);
  return out;
}

}  // namespace gpsplit
