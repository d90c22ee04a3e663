#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <vector>

#include "spinflow/su2.hpp"

namespace spinflow {

/// Gauss-Legendre colatitudes times uniform azimuths.
///
/// theta nodes ascend in (0, pi). n_theta is always even, so no node falls on
/// the equator, where tan(theta) in the Kerr operator diverges.
class SphereGrid {
 public:
  SphereGrid(int n_theta, int n_phi);

  int n_theta() const noexcept { return n_theta_; }
  int n_phi() const noexcept { return n_phi_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(n_theta_) * n_phi_; }

  double theta(int i) const { return theta_[static_cast<std::size_t>(i)]; }
  double cos_theta(int i) const { return cos_[static_cast<std::size_t>(i)]; }
  double sin_theta(int i) const { return sin_[static_cast<std::size_t>(i)]; }
  double weight(int i) const { return weight_[static_cast<std::size_t>(i)]; }
  double phi(int j) const;
  double phi_weight() const noexcept;

  const std::vector<double>& theta_nodes() const noexcept { return theta_; }
  const std::vector<double>& gl_weights() const noexcept { return weight_; }
  std::vector<double> phi_nodes() const;

  /// e^{i m phi_j}, taken from an exact table of n_phi-th roots of unity.
  cplx phase(int m, int j) const;

  /// Largest degree whose analysis is exact for fields of the same band.
  int max_degree() const noexcept;
  bool resolves(int k_max) const noexcept;

  bool operator==(const SphereGrid& o) const {
    return n_theta_ == o.n_theta_ && n_phi_ == o.n_phi_;
  }

 private:
  int n_theta_;
  int n_phi_;
  std::vector<double> theta_, cos_, sin_, weight_;
  std::vector<cplx> roots_;
};

using GridPtr = std::shared_ptr<const SphereGrid>;

/// Grid for spin S: n_theta = ceil(oversample (2S+1)) rounded up to even,
/// n_phi = smallest even integer >= oversample (4S+2).
GridPtr build_grid(SpinRep rep, double oversample = 1.0);

/// Coefficients c_{Kq} of f = sum_{K<=K_max} c_{Kq} Y_{Kq}, flat-indexed by kq_index.
class SpectralField {
 public:
  SpectralField() = default;
  explicit SpectralField(int k_max);
  SpectralField(int k_max, std::vector<cplx> coeffs);

  int k_max() const noexcept { return k_max_; }
  cplx operator()(int k, int q) const { return coeffs_[static_cast<std::size_t>(kq_index(k, q))]; }
  cplx& operator()(int k, int q) { return coeffs_[static_cast<std::size_t>(kq_index(k, q))]; }
  const std::vector<cplx>& coeffs() const noexcept { return coeffs_; }

  /// Largest violation of c_{K,-q} = (-1)^q conj(c_{Kq}).
  double reality_error() const;
  double max_abs() const;

  /// Multiplies each degree-K block by mult(K).
  SpectralField scaled_by_degree(const std::function<double(int)>& mult) const;
  /// Restricts or zero-pads to a new band limit.
  SpectralField with_k_max(int k_max) const;

  SpectralField operator+(const SpectralField& o) const;
  SpectralField operator-(const SpectralField& o) const;
  SpectralField operator*(cplx s) const;

 private:
  int k_max_ = 0;
  std::vector<cplx> coeffs_{cplx(0.0)};
};

/// Real samples on a grid, row-major over (theta index i, phi index j).
class GridField {
 public:
  explicit GridField(GridPtr grid);
  GridField(GridPtr grid, std::vector<double> values);

  const SphereGrid& grid() const noexcept { return *grid_; }
  const GridPtr& grid_ptr() const noexcept { return grid_; }
  double operator()(int i, int j) const {
    return values_[static_cast<std::size_t>(i) * grid_->n_phi() + j];
  }
  double& operator()(int i, int j) {
    return values_[static_cast<std::size_t>(i) * grid_->n_phi() + j];
  }
  const std::vector<double>& values() const noexcept { return values_; }
  double max_abs() const;

  GridField operator+(const GridField& o) const;
  GridField operator-(const GridField& o) const;
  GridField operator*(double s) const;
  /// Pointwise product.
  GridField operator*(const GridField& o) const;
  /// Applies f(theta_i) as a row factor.
  GridField times_row(const std::function<double(int)>& f) const;

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

/// Complex samples, used for reality checks on synthesized fields.
struct ComplexGridField {
  GridPtr grid;
  std::vector<cplx> values;
  double max_imag() const;
  GridField real() const;
};

/// Normalized associated Legendre functions Pbar_K^m(cos theta) for m >= 0,
/// with Y_{Kq} = Pbar_K^q e^{i q phi} and the Condon-Shortley phase included,
/// plus their theta derivatives.
class LegendreTable {
 public:
  LegendreTable(int k_max, const std::vector<double>& cos_theta,
                const std::vector<double>& sin_theta);

  int k_max() const noexcept { return k_max_; }
  /// Any sign of m; Pbar_K^{-m} = (-1)^m Pbar_K^m.
  double value(int row, int k, int m) const;
  double dtheta(int row, int k, int m) const;

 private:
  std::size_t offset(int row, int k, int m) const;
  int k_max_;
  std::size_t stride_;
  std::vector<double> p_, dp_;
};

/// Orthonormal Y_{Kq}(theta, phi) with Condon-Shortley phase.
cplx evaluate_Y(int k, int q, double theta, double phi);

ComplexGridField synthesize_complex(const SpectralField& f, const GridPtr& grid);
/// Real part of the synthesis; f must satisfy the reality condition.
GridField synthesize(const SpectralField& f, const GridPtr& grid);
/// Synthesis with every theta row rotated in phi: returns f(theta_i, phi_j - shift(i)).
GridField synthesize_shifted(const SpectralField& f, const GridPtr& grid,
                             const std::function<double(int)>& shift);
/// Throws ResolutionError when the grid cannot resolve k_max.
SpectralField analyze(const GridField& g, int k_max);

double integrate(const GridField& g);

/// d/dphi: multiplies c_{Kq} by i q.
SpectralField phi_derivative(const SpectralField& f);
/// d/dtheta on the grid nodes via analytic Legendre derivatives.
GridField theta_derivative(const SpectralField& f, const GridPtr& grid);
ComplexGridField theta_derivative_complex(const SpectralField& f, const GridPtr& grid);
/// d/dphi of grid samples by exact trigonometric interpolation along each row.
/// Exact when every row has azimuthal band < n_phi / 2.
GridField phi_derivative_rows(const GridField& g);

}  // namespace spinflow
