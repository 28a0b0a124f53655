#include "gpsplit/model.hpp"

#include <cmath>
#include <sstream>

#include "gpsplit/errors.hpp"

namespace gpsplit {

ProblemSpec ProblemSpec::harmonic(int dim, double alpha, double beta, double theta, double n0) {
  ProblemSpec p;
  p.components = 1;
  p.dim = dim;
  p.alpha = Eigen::MatrixXd::Constant(1, dim, alpha);
  p.beta = Eigen::MatrixXd::Constant(1, dim, beta);
  p.gamma = Eigen::MatrixXd::Zero(1, dim);
  p.delta = Eigen::MatrixXd::Zero(1, dim);
  p.theta = Eigen::MatrixXd::Constant(1, 1, theta);
  p.n0 = Eigen::VectorXd::Constant(1, n0);
  return p;
}

namespace {

void check_shape(const Eigen::MatrixXd& m, Eigen::Index rows, Eigen::Index cols,
                 const char* name) {
  if (m.rows() != rows || m.cols() != cols) {
    std::ostringstream os;
    os << "problem." << name << ": expected " << rows << "x" << cols << ", got " << m.rows()
       << "x" << m.cols();
    throw ConfigError(os.str());
  }
}

}  // namespace

Problem::Problem(ProblemSpec spec, std::shared_ptr<const SpectralGrid> grid)
    : spec_(std::move(spec)), grid_(std::move(grid)) {
  const int J = spec_.components;
  const int d = spec_.dim;
  if (J < 1) throw ConfigError("problem.J must be at least 1");
  if (d != grid_->dim()) throw ConfigError("problem.d does not match the grid dimension");
  check_shape(spec_.alpha, J, d, "alpha");
  check_shape(spec_.beta, J, d, "beta");
  check_shape(spec_.gamma, J, d, "gamma");
  check_shape(spec_.delta, J, d, "delta");
  check_shape(spec_.theta, J, J, "theta");
  if (spec_.n0.size() != J) throw ConfigError("problem.n0: expected one entry per component");
  if ((spec_.n0.array() <= 0.0).any()) throw ConfigError("problem.n0: entries must be positive");
  if ((spec_.alpha.array() == 0.0).any())
    throw ConfigError("problem.alpha: Laplacian weights must be nonzero");

  for (int j = 0; j < J; ++j) {
    auto& row = alpha_rows_.emplace_back(d);
    for (int i = 0; i < d; ++i) row[i] = spec_.alpha(j, i);

    RealField v = RealField::Zero(grid_->size());
    std::vector<RealField> dv, d2v;
    for (int i = 0; i < d; ++i) {
      const RealField& x = grid_->coords(i);
      const double b = spec_.beta(j, i);
      const double g = spec_.gamma(j, i);
      const double w = spec_.delta(j, i);
      v += b * x.square() + g * (w * x).sin().square();
      // d/dx sin^2(w x) = w sin(2 w x), d^2/dx^2 = 2 w^2 cos(2 w x)
      dv.push_back(2.0 * b * x + g * w * (2.0 * w * x).sin());
      d2v.push_back(RealField::Constant(grid_->size(), 2.0 * b) +
                    2.0 * g * w * w * (2.0 * w * x).cos());
    }
    potential_.push_back(std::move(v));
    dpotential_.push_back(std::move(dv));
    d2potential_.push_back(std::move(d2v));
  }
}

Problem Problem::with_potential_offset(const std::vector<double>& offset) const {
  Problem out = *this;
  for (int j = 0; j < components(); ++j) out.potential_[j] -= offset[j];
  return out;
}

bool Problem::uniform_alpha() const {
  for (int j = 1; j < spec_.components; ++j)
    if (spec_.alpha.row(j) != spec_.alpha.row(0)) return false;
  return true;
}

const RealField& potential(const Problem& problem, int j) { return problem.potential(j); }

Field apply_h1(const Problem& problem, Fourier& fft, const Components& psi, int j) {
  return weighted_laplacian(fft, psi[j], problem.alpha(j)) + problem.potential(j) * psi[j];
}

namespace {

RealField density_weight(const Problem& problem, const Components& psi, int j) {
  RealField w = RealField::Zero(problem.grid().size());
  for (int k = 0; k < problem.components(); ++k)
    if (problem.theta(j, k) != 0.0) w += problem.theta(j, k) * psi[k].abs2();
  return w;
}

}  // namespace

Field apply_h2(const Problem& problem, const Components& psi, int j) {
  return density_weight(problem, psi, j) * psi[j];
}

ObservableRecord observables(const Problem& problem, Fourier& fft, const Components& psi) {
  const auto& g = problem.grid();
  const int J = problem.components();
  const double inv_n = 1.0 / static_cast<double>(g.size());
  ObservableRecord rec;
  rec.mass.resize(J);
  rec.e1.resize(J);
  rec.e2.resize(J);
  rec.mu.resize(J);
  for (int j = 0; j < J; ++j) {
    rec.mass[j] = discrete_norm_squared(g, psi[j]);
    Field c = psi[j];
    fft.forward(c);
    // Parseval: sum |psi_m|^2 = h_vol / N * sum |DFT|^2
    const double kinetic =
        g.cell_volume() * inv_n * (g.weighted_laplacian_symbol(problem.alpha(j)) * c.abs2()).sum();
    const double pot = g.cell_volume() * (problem.potential(j) * psi[j].abs2()).sum();
    rec.e1[j] = kinetic + pot;
    const Complex e2 = discrete_inner(g, apply_h2(problem, psi, j), psi[j]);
    rec.e2[j] = e2.real();
    rec.energy_imag = std::max(rec.energy_imag, std::abs(e2.imag()));
    rec.mu[j] = (rec.e1[j] + rec.e2[j]) / problem.n0(j);
    rec.mass_total += rec.mass[j];
    rec.E1 += rec.e1[j];
    rec.E2 += rec.e2[j];
  }
  rec.E = rec.E1 + 0.5 * rec.E2;
  return rec;
}

double energy_by_parts(const Problem& problem, Fourier& fft, const Components& psi) {
  const auto& g = problem.grid();
  double e1 = 0.0;
  for (int j = 0; j < problem.components(); ++j) {
    Field c = psi[j];
    fft.forward(c);
    for (int i = 0; i < g.dim(); ++i) {
      const Field d = gradient_from_coefficients(fft, c, i);
      e1 -= problem.alpha(j)[i] * discrete_norm_squared(g, d);
    }
    e1 += g.cell_volume() * (problem.potential(j) * psi[j].abs2()).sum();
  }
  return e1;
}

bool is_diverged(const Problem& problem, const Components& psi) {
  for (int j = 0; j < problem.components(); ++j) {
    if (!psi[j].allFinite()) return true;
    if (discrete_norm_squared(problem.grid(), psi[j]) > 1e6 * problem.n0_total()) return true;
  }
  return false;
}

Components gateaux_fd(const Operator& op, const Components& v, const Components& w, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("gateaux_fd: eps must be positive");
  Components plus = v, minus = v;
  for (std::size_t j = 0; j < v.size(); ++j) {
    plus[j] += eps * w[j];
    minus[j] -= eps * w[j];
  }
  Components fp = op(plus);
  const Components fm = op(minus);
  for (std::size_t j = 0; j < fp.size(); ++j) fp[j] = (fp[j] - fm[j]) / (2.0 * eps);
  return fp;
}

}  // namespace gpsplit
