#pragma once

// Splitting methods in the form
//
//   S(tau) = E_{b_s F2 + c_s tau^2 G} o E_{a_s F1} o ... o E_{b_1 F2 + c_1 tau^2 G} o E_{a_1 F1}
//
// with F1 the kinetic part and F2 the potential and nonlinear part.

#include <string>
#include <string_view>
#include <vector>

#include "gpsplit/commutators.hpp"
#include "gpsplit/model.hpp"

namespace gpsplit {

struct MethodSpec {
  std::string name;
  std::vector<double> a;  // kinetic weights
  std::vector<double> b;  // nonlinear weights
  std::vector<double> c;  // commutator weights
  int order = 1;

  int stages() const { return static_cast<int>(a.size()); }
  bool modified() const;
  bool positive() const;
  /// Reversing the stage sequence gives the same composition.
  bool symmetric() const;
};

/// lie, strang, yoshida4, blanes_moan4, chin_modified4. Throws
/// std::invalid_argument for unknown names.
MethodSpec method_catalog(std::string_view name);
std::vector<std::string> method_names();

/// Largest deviation of the tau^k series coefficients (k <= order) of the
/// composition from exp(tau (A + B)) for random 4x4 matrices A, B. The
/// commutator stage uses [B, [B, A]].
double order_condition_residual(const MethodSpec& method, unsigned seed = 7);

/// psi_j <- exp(tau (-i b (V_j + sum_k theta_jk |psi_k|^2) + c tau^2 g_j)) psi_j,
/// with the commutator multiplier g_j frozen at the input state.
void nonlinear_flow_real(const Problem& problem, Fourier& fft, Components& psi, double b, double c,
                         double tau);

/// E_{tau/2, b F2} o E_{tau, c tau^2 G} o E_{tau/2, b F2}: classical RK4 for the
/// outer pieces, one explicit Euler step for the middle one, each split into
/// `refine` equal substeps. The middle piece is skipped for c = 0.
void nonlinear_flow_imaginary(const Problem& problem, Fourier& fft, Components& psi, double b,
                              double c, double tau, int refine = 1);

/// Flow of one stage: kinetic part with a tau, then nonlinear part with (b, c).
void apply_stage(const Problem& problem, Fourier& fft, Components& psi, Mode mode, double a,
                 double b, double c, double tau, int refine = 1);

/// One step of `method`. Advances state.t by tau. Throws DivergenceError
/// carrying the stage index (0-based) if a stage produces a diverged state.
void step(const Problem& problem, Fourier& fft, State& state, const MethodSpec& method, double tau,
          int refine = 1);

/// Transforms used by one commutator evaluation.
std::int64_t commutator_transforms(const Problem& problem, Mode mode);

/// Transforms used by one unfused step.
std::int64_t transforms_per_step(const Problem& problem, const MethodSpec& method, Mode mode,
                                 int refine = 1);

}  // namespace gpsplit
