#pragma once

// Tensor-product Fourier grids on [-w_1, w_1) x ... x [-w_d, w_d) with
// periodic identification, FFT-backed transforms and spectral derivatives.
//
// Fields are stored as flat Eigen arrays with axis 0 varying fastest:
//   index = k_0 + M_0 * (k_1 + M_1 * k_2).
// Fourier coefficients use the transform engine's native order, i.e. mode
// m = k for k < M/2 and m = k - M for k >= M/2.

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace gpsplit {

using Complex = std::complex<double>;
using Field = Eigen::ArrayXcd;
using RealField = Eigen::ArrayXd;
/// One field per condensate component.
using Components = std::vector<Field>;

struct GridSpec {
  std::vector<double> omega;  // half-widths
  std::vector<int> points;    // even mode counts per axis

  int dim() const { return static_cast<int>(points.size()); }
};

class SpectralGrid {
 public:
  /// Validates the spec (d in {1,2,3}, even positive M, positive omega) and
  /// tabulates coordinates and derivative eigenvalues.
  explicit SpectralGrid(GridSpec spec);

  const GridSpec& spec() const { return spec_; }
  int dim() const { return spec_.dim(); }
  Eigen::Index size() const { return size_; }
  int points(int axis) const { return spec_.points[axis]; }
  double omega(int axis) const { return spec_.omega[axis]; }
  double spacing(int axis) const { return spacing_[axis]; }
  /// Product of the spacings; the quadrature weight of every grid point.
  double cell_volume() const { return cell_volume_; }
  Eigen::Index stride(int axis) const { return stride_[axis]; }

  /// Per-axis physical coordinates x_k = -w + k h.
  const Eigen::ArrayXd& axis_coords(int axis) const { return axis_coords_[axis]; }
  /// Per-axis first-derivative eigenvalues i*pi*m/w in transform order.
  const Eigen::ArrayXcd& deriv_eigs(int axis) const { return deriv_eigs_[axis]; }
  /// Per-axis second-derivative eigenvalues -pi^2 m^2 / w^2 in transform order.
  const Eigen::ArrayXd& lap_eigs(int axis) const { return lap_eigs_[axis]; }

  /// Coordinate x_axis broadcast over the full grid.
  const RealField& coords(int axis) const { return coords_[axis]; }
  /// Real wavenumber pi*m/w along `axis`, broadcast over the full grid.
  const RealField& wavenumbers(int axis) const { return wavenumbers_[axis]; }
  /// lambda_{alpha,m} = sum_i alpha_i lambda_{m_i} over the full grid.
  RealField weighted_laplacian_symbol(std::span<const double> alpha) const;

  bool same_shape(const SpectralGrid& other) const;

 private:
  GridSpec spec_;
  Eigen::Index size_ = 0;
  double cell_volume_ = 1.0;
  std::vector<double> spacing_;
  std::vector<Eigen::Index> stride_;
  std::vector<Eigen::ArrayXd> axis_coords_;
  std::vector<Eigen::ArrayXcd> deriv_eigs_;
  std::vector<Eigen::ArrayXd> lap_eigs_;
  std::vector<RealField> coords_;
  std::vector<RealField> wavenumbers_;
};

/// Builds a shareable immutable grid.
std::shared_ptr<const SpectralGrid> build_grid(GridSpec spec);

/// FFT engine bound to one grid. Counts every transform it performs, so one
/// instance belongs to one trajectory; the grid itself may be shared.
class Fourier {
 public:
  explicit Fourier(std::shared_ptr<const SpectralGrid> grid);
  ~Fourier();
  Fourier(const Fourier&) = delete;
  Fourier& operator=(const Fourier&) = delete;
  Fourier(Fourier&&) noexcept;
  Fourier& operator=(Fourier&&) noexcept;

  const SpectralGrid& grid() const { return *grid_; }
  const std::shared_ptr<const SpectralGrid>& grid_ptr() const { return grid_; }

  /// Unnormalised forward DFT, in place.
  void forward(Field& f);
  /// Inverse DFT including the 1/N factor, in place.
  void inverse(Field& f);

  std::int64_t forward_count() const { return forward_count_; }
  std::int64_t inverse_count() const { return inverse_count_; }
  std::int64_t transform_count() const { return forward_count_ + inverse_count_; }
  void reset_counters() { forward_count_ = inverse_count_ = 0; }

 private:
  void check_shape(const Field& f) const;

  std::shared_ptr<const SpectralGrid> grid_;
  void* forward_plan_ = nullptr;
  void* inverse_plan_ = nullptr;
  std::int64_t forward_count_ = 0;
  std::int64_t inverse_count_ = 0;
};

enum class Direction { forward, inverse };

/// Parseval-scaled transform: forward returns coefficients psi_m with
/// sum |psi_m|^2 equal to the discrete squared L2 norm; inverse undoes it.
Field transform(Fourier& fft, const Field& field, Direction direction);

/// d/dx_axis of `field` (times `weight`) by coefficient multiplication.
Field spectral_gradient(Fourier& fft, const Field& field, int axis, double weight = 1.0);

/// Same as spectral_gradient but starting from unnormalised coefficients
/// (output of Fourier::forward); costs one inverse transform.
Field gradient_from_coefficients(Fourier& fft, const Field& coeffs, int axis,
                                 double weight = 1.0);

/// Delta_alpha applied to unnormalised coefficients; one inverse transform.
Field laplacian_from_coefficients(Fourier& fft, const Field& coeffs,
                                  std::span<const double> alpha);

Field weighted_laplacian(Fourier& fft, const Field& field, std::span<const double> alpha);

/// Exact flow of du/dt = C * Delta_alpha u over time `tau`, in place.
/// Throws DivergenceError if a multiplier exponent exceeds 700.
void kinetic_flow(Fourier& fft, Field& field, std::span<const double> alpha, Complex c,
                  double tau);

/// <a, b> = prod(h) * sum a * conj(b).
template <typename A, typename B>
Complex discrete_inner(const SpectralGrid& grid, const Eigen::ArrayBase<A>& a,
                       const Eigen::ArrayBase<B>& b) {
  return grid.cell_volume() * (a.derived() * b.derived().conjugate()).sum();
}

template <typename A>
double discrete_norm_squared(const SpectralGrid& grid, const Eigen::ArrayBase<A>& a) {
  return grid.cell_volume() * a.derived().abs2().sum();
}

template <typename A>
double discrete_norm(const SpectralGrid& grid, const Eigen::ArrayBase<A>& a) {
  return std::sqrt(discrete_norm_squared(grid, a));
}

/// Component-summed inner product and norm.
Complex discrete_inner(const SpectralGrid& grid, const Components& a, const Components& b);
double discrete_norm(const SpectralGrid& grid, const Components& a);

}  // namespace gpsplit
