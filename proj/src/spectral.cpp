#include "gpsplit/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>

#include "gpsplit/errors.hpp"

namespace gpsplit {

namespace {

// FFTW's planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

int mode_index(int k, int m) { return k < m / 2 ? k : k - m; }

}  // namespace

SpectralGrid::SpectralGrid(GridSpec spec) : spec_(std::move(spec)) {
  const int d = spec_.dim();
  if (d < 1 || d > 3) throw ConfigError("grid: dimension must be 1, 2 or 3");
  if (static_cast<int>(spec_.omega.size()) != d)
    throw ConfigError("grid: omega and points must have the same length");

  size_ = 1;
  for (int i = 0; i < d; ++i) {
    const int m = spec_.points[i];
    if (m <= 0 || m % 2 != 0) {
      std::ostringstream os;
      os << "grid: points[" << i << "] = " << m << " must be even and positive";
      throw ConfigError(os.str());
    }
    if (!(spec_.omega[i] > 0.0)) {
      std::ostringstream os;
      os << "grid: omega[" << i << "] must be positive";
      throw ConfigError(os.str());
    }
    if (size_ > std::numeric_limits<Eigen::Index>::max() / m)
      throw ConfigError("grid: total point count overflows");
    stride_.push_back(size_);
    size_ *= m;
  }

  for (int i = 0; i < d; ++i) {
    const int m = spec_.points[i];
    const double w = spec_.omega[i];
    const double h = 2.0 * w / m;
    spacing_.push_back(h);
    cell_volume_ *= h;

    Eigen::ArrayXd x(m);
    Eigen::ArrayXcd mu(m);
    Eigen::ArrayXd lam(m);
    for (int k = 0; k < m; ++k) {
      x[k] = -w + k * h;
      const double kk = std::numbers::pi * mode_index(k, m) / w;
      mu[k] = Complex(0.0, kk);
      lam[k] = -kk * kk;
    }
    axis_coords_.push_back(std::move(x));
    deriv_eigs_.push_back(std::move(mu));
    lap_eigs_.push_back(std::move(lam));
  }

  for (int i = 0; i < d; ++i) {
    RealField xc(size_);
    RealField kc(size_);
    const Eigen::Index m = spec_.points[i];
    const Eigen::Index s = stride_[i];
    for (Eigen::Index n = 0; n < size_; ++n) {
      const Eigen::Index k = (n / s) % m;
      xc[n] = axis_coords_[i][k];
      kc[n] = deriv_eigs_[i][k].imag();
    }
    coords_.push_back(std::move(xc));
    wavenumbers_.push_back(std::move(kc));
  }
}

RealField SpectralGrid::weighted_laplacian_symbol(std::span<const double> alpha) const {
  RealField sym = RealField::Zero(size_);
  for (int i = 0; i < dim(); ++i) sym -= alpha[i] * wavenumbers_[i].square();
  return sym;
}

bool SpectralGrid::same_shape(const SpectralGrid& other) const {
  return spec_.points == other.spec_.points && spec_.omega == other.spec_.omega;
}

std::shared_ptr<const SpectralGrid> build_grid(GridSpec spec) {
  return std::make_shared<const SpectralGrid>(std::move(spec));
}

// ---------------------------------------------------------------------------

Fourier::Fourier(std::shared_ptr<const SpectralGrid> grid) : grid_(std::move(grid)) {
  const int d = grid_->dim();
  // FFTW is row-major (last index fastest); our axis 0 is fastest.
  std::vector<int> n(d);
  for (int i = 0; i < d; ++i) n[i] = grid_->points(d - 1 - i);

  Field buffer(grid_->size());
  auto* data = reinterpret_cast<fftw_complex*>(buffer.data());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  std::lock_guard lock(planner_mutex());
  forward_plan_ = fftw_plan_dft(d, n.data(), data, data, FFTW_FORWARD, flags);
  inverse_plan_ = fftw_plan_dft(d, n.data(), data, data, FFTW_BACKWARD, flags);
}

Fourier::~Fourier() {
  std::lock_guard lock(planner_mutex());
  if (forward_plan_) fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  if (inverse_plan_) fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
}

Fourier::Fourier(Fourier&& other) noexcept
    : grid_(std::move(other.grid_)),
      forward_plan_(std::exchange(other.forward_plan_, nullptr)),
      inverse_plan_(std::exchange(other.inverse_plan_, nullptr)),
      forward_count_(other.forward_count_),
      inverse_count_(other.inverse_count_) {}

Fourier& Fourier::operator=(Fourier&& other) noexcept {
  std::swap(grid_, other.grid_);
  std::swap(forward_plan_, other.forward_plan_);
  std::swap(inverse_plan_, other.inverse_plan_);
  std::swap(forward_count_, other.forward_count_);
  std::swap(inverse_count_, other.inverse_count_);
  return *this;
}

void Fourier::check_shape(const Field& f) const {
  if (f.size() != grid_->size()) {
    std::ostringstream os;
    os << "field has " << f.size() << " entries, grid has " << grid_->size();
    throw std::invalid_argument(os.str());
  }
}

void Fourier::forward(Field& f) {
  check_shape(f);
  auto* data = reinterpret_cast<fftw_complex*>(f.data());
  fftw_execute_dft(static_cast<fftw_plan>(forward_plan_), data, data);
  ++forward_count_;
}

void Fourier::inverse(Field& f) {
  check_shape(f);
  auto* data = reinterpret_cast<fftw_complex*>(f.data());
  fftw_execute_dft(static_cast<fftw_plan>(inverse_plan_), data, data);
  f /= static_cast<double>(grid_->size());
  ++inverse_count_;
}

// ---------------------------------------------------------------------------

Field transform(Fourier& fft, const Field& field, Direction direction) {
  const auto& g = fft.grid();
  // psi_m = sqrt(prod h / N) * DFT(psi)_m
  const double scale = std::sqrt(g.cell_volume() / static_cast<double>(g.size()));
  Field out = field;
  if (direction == Direction::forward) {
    fft.forward(out);
    out *= scale;
  } else {
    out /= scale;
    fft.inverse(out);
  }
  return out;
}

Field gradient_from_coefficients(Fourier& fft, const Field& coeffs, int axis, double weight) {
  const auto& g = fft.grid();
  if (axis < 0 || axis >= g.dim()) throw std::out_of_range("spectral_gradient: axis out of range");
  Field out = coeffs * (Complex(0.0, weight) * g.wavenumbers(axis));
  fft.inverse(out);
  return out;
}

Field spectral_gradient(Fourier& fft, const Field& field, int axis, double weight) {
  if (axis < 0 || axis >= fft.grid().dim())
    throw std::out_of_range("spectral_gradient: axis out of range");
  Field coeffs = field;
  fft.forward(coeffs);
  return gradient_from_coefficients(fft, coeffs, axis, weight);
}

Field laplacian_from_coefficients(Fourier& fft, const Field& coeffs,
                                  std::span<const double> alpha) {
  Field out = coeffs * fft.grid().weighted_laplacian_symbol(alpha);
  fft.inverse(out);
  return out;
}

Field weighted_laplacian(Fourier& fft, const Field& field, std::span<const double> alpha) {
  Field coeffs = field;
  fft.forward(coeffs);
  return laplacian_from_coefficients(fft, coeffs, alpha);
}

void kinetic_flow(Fourier& fft, Field& field, std::span<const double> alpha, Complex c,
                  double tau) {
  if (tau == 0.0) return;
  const RealField sym = fft.grid().weighted_laplacian_symbol(alpha);
  const Complex scale = c * tau;
  const double max_growth = (scale.real() * sym).maxCoeff();
  if (max_growth > 700.0)
    throw DivergenceError("kinetic flow: multiplier exponent exceeds 700");
  fft.forward(field);
  field *= (scale * sym.cast<Complex>()).exp();
  fft.inverse(field);
}

Complex discrete_inner(const SpectralGrid& grid, const Components& a, const Components& b) {
  Complex sum = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) sum += discrete_inner(grid, a[j], b[j]);
  return sum;
}

double discrete_norm(const SpectralGrid& grid, const Components& a) {
  double sum = 0.0;
  for (const auto& f : a) sum += discrete_norm_squared(grid, f);
  return std::sqrt(sum);
}

}  // namespace gpsplit
