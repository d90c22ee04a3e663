#include "spinflow/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "spinflow/errors.hpp"

namespace spinflow {

namespace {

constexpr double kPi = std::numbers::pi;

// Gauss-Legendre nodes in descending x (ascending theta), mirrored exactly.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(static_cast<std::size_t>(n), 0.0);
  w.assign(static_cast<std::size_t>(n), 0.0);
  const int half = (n + 1) / 2;
  for (int k = 0; k < half; ++k) {
    double z = std::cos(kPi * (k + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = z;
      for (int l = 2; l <= n; ++l) {
        const double p2 = ((2.0 * l - 1.0) * z * p1 - (l - 1.0) * p0) / l;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0, p1 = z;
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    {
      double p0 = 1.0, p1 = z;
      for (int l = 2; l <= n; ++l) {
        const double p2 = ((2.0 * l - 1.0) * z * p1 - (l - 1.0) * p0) / l;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
    }
    const double wk = 2.0 / ((1.0 - z * z) * dp * dp);
    x[static_cast<std::size_t>(k)] = z;
    x[static_cast<std::size_t>(n - 1 - k)] = -z;
    w[static_cast<std::size_t>(k)] = wk;
    w[static_cast<std::size_t>(n - 1 - k)] = wk;
  }
}

void require_same_grid(const GridField& a, const GridField& b) {
  if (!(a.grid() == b.grid())) throw std::invalid_argument("GridField: grids differ");
}

}  // namespace

SphereGrid::SphereGrid(int n_theta, int n_phi) : n_theta_(n_theta), n_phi_(n_phi) {
  if (n_theta < 2 || n_theta % 2 != 0) {
    throw std::invalid_argument("SphereGrid: n_theta must be even and >= 2");
  }
  if (n_phi < 2 || n_phi % 2 != 0) {
    throw std::invalid_argument("SphereGrid: n_phi must be even and >= 2");
  }
  gauss_legendre(n_theta, cos_, weight_);
  theta_.resize(cos_.size());
  sin_.resize(cos_.size());
  for (std::size_t i = 0; i < cos_.size(); ++i) {
    const double x = cos_[i];
    sin_[i] = std::sqrt((1.0 - x) * (1.0 + x));
    theta_[i] = std::atan2(sin_[i], x);
  }
  roots_.resize(static_cast<std::size_t>(n_phi));
  for (int k = 0; k < n_phi; ++k) {
    const double a = 2.0 * kPi * k / n_phi;
    roots_[static_cast<std::size_t>(k)] = {std::cos(a), std::sin(a)};
  }
}

double SphereGrid::phi(int j) const { return 2.0 * kPi * j / n_phi_; }
double SphereGrid::phi_weight() const noexcept { return 2.0 * kPi / n_phi_; }

std::vector<double> SphereGrid::phi_nodes() const {
  std::vector<double> out(static_cast<std::size_t>(n_phi_));
  for (int j = 0; j < n_phi_; ++j) out[static_cast<std::size_t>(j)] = phi(j);
  return out;
}

cplx SphereGrid::phase(int m, int j) const {
  long long k = (static_cast<long long>(m) * j) % n_phi_;
  if (k < 0) k += n_phi_;
  return roots_[static_cast<std::size_t>(k)];
}

int SphereGrid::max_degree() const noexcept { return std::min(n_theta_ - 1, n_phi_ / 2 - 1); }
bool SphereGrid::resolves(int k_max) const noexcept {
  return k_max >= 0 && k_max <= max_degree();
}

GridPtr build_grid(SpinRep rep, double oversample) {
  if (!(oversample >= 1.0)) throw std::invalid_argument("build_grid: oversample must be >= 1");
  int n_theta = static_cast<int>(std::ceil(oversample * rep.dim() - 1e-9));
  if (n_theta % 2 != 0) ++n_theta;
  int n_phi = static_cast<int>(std::ceil(oversample * (2 * rep.two_s() + 2) - 1e-9));
  if (n_phi % 2 != 0) ++n_phi;
  return std::make_shared<const SphereGrid>(n_theta, n_phi);
}

// ---------------------------------------------------------------- SpectralField

SpectralField::SpectralField(int k_max)
    : k_max_(k_max), coeffs_(static_cast<std::size_t>(kq_count(k_max)), cplx(0.0)) {
  if (k_max < 0) throw std::invalid_argument("SpectralField: negative band limit");
}

SpectralField::SpectralField(int k_max, std::vector<cplx> coeffs)
    : k_max_(k_max), coeffs_(std::move(coeffs)) {
  if (k_max < 0 || coeffs_.size() != static_cast<std::size_t>(kq_count(k_max))) {
    throw std::invalid_argument("SpectralField: coefficient count does not match band limit");
  }
}

double SpectralField::reality_error() const {
  double err = 0.0;
  for (int k = 0; k <= k_max_; ++k) {
    for (int q = 0; q <= k; ++q) {
      const double sign = (q % 2 == 0) ? 1.0 : -1.0;
      err = std::max(err, std::abs((*this)(k, -q) - sign * std::conj((*this)(k, q))));
    }
  }
  return err;
}

double SpectralField::max_abs() const {
  double m = 0.0;
  for (const auto& c : coeffs_) m = std::max(m, std::abs(c));
  return m;
}

SpectralField SpectralField::scaled_by_degree(const std::function<double(int)>& mult) const {
  SpectralField out(*this);
  for (int k = 0; k <= k_max_; ++k) {
    const double f = mult(k);
    for (int q = -k; q <= k; ++q) out(k, q) *= f;
  }
  return out;
}

SpectralField SpectralField::with_k_max(int k_max) const {
  SpectralField out(k_max);
  for (int k = 0; k <= std::min(k_max, k_max_); ++k) {
    for (int q = -k; q <= k; ++q) out(k, q) = (*this)(k, q);
  }
  return out;
}

SpectralField SpectralField::operator+(const SpectralField& o) const {
  const int k = std::max(k_max_, o.k_max_);
  SpectralField a = with_k_max(k), b = o.with_k_max(k);
  for (std::size_t n = 0; n < a.coeffs_.size(); ++n) a.coeffs_[n] += b.coeffs_[n];
  return a;
}

SpectralField SpectralField::operator-(const SpectralField& o) const { return *this + o * -1.0; }

SpectralField SpectralField::operator*(cplx s) const {
  SpectralField out(*this);
  for (auto& c : out.coeffs_) c *= s;
  return out;
}

// ---------------------------------------------------------------- GridField

GridField::GridField(GridPtr grid) : grid_(std::move(grid)), values_(grid_->size(), 0.0) {}

GridField::GridField(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_->size()) {
    throw std::invalid_argument("GridField: value count does not match grid");
  }
}

double GridField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

GridField GridField::operator+(const GridField& o) const {
  require_same_grid(*this, o);
  GridField out(*this);
  for (std::size_t n = 0; n < values_.size(); ++n) out.values_[n] += o.values_[n];
  return out;
}

GridField GridField::operator-(const GridField& o) const {
  require_same_grid(*this, o);
  GridField out(*this);
  for (std::size_t n = 0; n < values_.size(); ++n) out.values_[n] -= o.values_[n];
  return out;
}

GridField GridField::operator*(double s) const {
  GridField out(*this);
  for (auto& v : out.values_) v *= s;
  return out;
}

GridField GridField::operator*(const GridField& o) const {
  require_same_grid(*this, o);
  GridField out(*this);
  for (std::size_t n = 0; n < values_.size(); ++n) out.values_[n] *= o.values_[n];
  return out;
}

GridField GridField::times_row(const std::function<double(int)>& f) const {
  GridField out(*this);
  for (int i = 0; i < grid_->n_theta(); ++i) {
    const double r = f(i);
    for (int j = 0; j < grid_->n_phi(); ++j) out(i, j) *= r;
  }
  return out;
}

double ComplexGridField::max_imag() const {
  double m = 0.0;
  for (const auto& v : values) m = std::max(m, std::abs(v.imag()));
  return m;
}

GridField ComplexGridField::real() const {
  std::vector<double> re(values.size());
  for (std::size_t n = 0; n < values.size(); ++n) re[n] = values[n].real();
  return {grid, std::move(re)};
}

// ---------------------------------------------------------------- Legendre

LegendreTable::LegendreTable(int k_max, const std::vector<double>& cos_theta,
                             const std::vector<double>& sin_theta)
    : k_max_(k_max), stride_(static_cast<std::size_t>((k_max + 1) * (k_max + 2) / 2)) {
  if (k_max < 0) throw std::invalid_argument("LegendreTable: negative band limit");
  const std::size_t rows = cos_theta.size();
  p_.assign(rows * stride_, 0.0);
  dp_.assign(rows * stride_, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const double x = cos_theta[r];
    const double s = sin_theta[r];
    double* p = p_.data() + r * stride_;
    const auto at = [](int k, int m) { return static_cast<std::size_t>(k * (k + 1) / 2 + m); };
    double pmm = 1.0 / std::sqrt(4.0 * kPi);
    for (int m = 0; m <= k_max; ++m) {
      if (m > 0) pmm *= -std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * s;
      p[at(m, m)] = pmm;
      if (m + 1 <= k_max) p[at(m + 1, m)] = std::sqrt(2.0 * m + 3.0) * x * pmm;
      for (int k = m + 2; k <= k_max; ++k) {
        const double kk = k, mm = m;
        const double a = std::sqrt((4.0 * kk * kk - 1.0) / (kk * kk - mm * mm));
        const double b = std::sqrt(((kk - 1.0) * (kk - 1.0) - mm * mm) /
                                   (4.0 * (kk - 1.0) * (kk - 1.0) - 1.0));
        p[at(k, m)] = a * (x * p[at(k - 1, m)] - b * p[at(k - 2, m)]);
      }
    }
    double* dp = dp_.data() + r * stride_;
    for (int k = 0; k <= k_max; ++k) {
      for (int m = 0; m <= k; ++m) {
        // Pbar_K^{-1} = -Pbar_K^1.
        double lower = 0.0;
        if (m > 0) {
          lower = p[at(k, m - 1)];
        } else if (k >= 1) {
          lower = -p[at(k, 1)];
        }
        const double upper = (m + 1 <= k) ? p[at(k, m + 1)] : 0.0;
        dp[at(k, m)] = 0.5 * (std::sqrt(double(k - m) * (k + m + 1)) * upper -
                              std::sqrt(double(k + m) * (k - m + 1)) * lower);
      }
    }
  }
}

std::size_t LegendreTable::offset(int row, int k, int m) const {
  return static_cast<std::size_t>(row) * stride_ + static_cast<std::size_t>(k * (k + 1) / 2 + m);
}

double LegendreTable::value(int row, int k, int m) const {
  const int am = std::abs(m);
  const double v = p_[offset(row, k, am)];
  return (m < 0 && am % 2 == 1) ? -v : v;
}

double LegendreTable::dtheta(int row, int k, int m) const {
  const int am = std::abs(m);
  const double v = dp_[offset(row, k, am)];
  return (m < 0 && am % 2 == 1) ? -v : v;
}

cplx evaluate_Y(int k, int q, double theta, double phi) {
  if (k < 0 || std::abs(q) > k) throw std::domain_error("evaluate_Y: need |q| <= K");
  const LegendreTable table(k, {std::cos(theta)}, {std::sin(theta)});
  return table.value(0, k, q) * std::polar(1.0, q * phi);
}

// ---------------------------------------------------------------- transforms

namespace {

// Row transforms shared by synthesis and theta differentiation.
ComplexGridField synthesize_impl(const SpectralField& f, const GridPtr& grid, bool derivative,
                                 const std::function<double(int)>* shift) {
  const int k_max = f.k_max();
  const LegendreTable table(k_max, [&] {
    std::vector<double> c(static_cast<std::size_t>(grid->n_theta()));
    for (int i = 0; i < grid->n_theta(); ++i) c[static_cast<std::size_t>(i)] = grid->cos_theta(i);
    return c;
  }(), [&] {
    std::vector<double> s(static_cast<std::size_t>(grid->n_theta()));
    for (int i = 0; i < grid->n_theta(); ++i) s[static_cast<std::size_t>(i)] = grid->sin_theta(i);
    return s;
  }());
  ComplexGridField out{grid, std::vector<cplx>(grid->size(), cplx(0.0))};
  std::vector<cplx> row_coeffs(static_cast<std::size_t>(2 * k_max + 1));
  for (int i = 0; i < grid->n_theta(); ++i) {
    for (int m = -k_max; m <= k_max; ++m) {
      cplx acc = 0.0;
      for (int k = std::abs(m); k <= k_max; ++k) {
        acc += f(k, m) * (derivative ? table.dtheta(i, k, m) : table.value(i, k, m));
      }
      if (shift) acc *= std::polar(1.0, -m * (*shift)(i));
      row_coeffs[static_cast<std::size_t>(m + k_max)] = acc;
    }
    for (int j = 0; j < grid->n_phi(); ++j) {
      cplx v = 0.0;
      for (int m = -k_max; m <= k_max; ++m) {
        v += row_coeffs[static_cast<std::size_t>(m + k_max)] * grid->phase(m, j);
      }
      out.values[static_cast<std::size_t>(i) * grid->n_phi() + j] = v;
    }
  }
  return out;
}

}  // namespace

ComplexGridField synthesize_complex(const SpectralField& f, const GridPtr& grid) {
  return synthesize_impl(f, grid, false, nullptr);
}

GridField synthesize(const SpectralField& f, const GridPtr& grid) {
  return synthesize_complex(f, grid).real();
}

GridField synthesize_shifted(const SpectralField& f, const GridPtr& grid,
                             const std::function<double(int)>& shift) {
  return synthesize_impl(f, grid, false, &shift).real();
}

SpectralField analyze(const GridField& g, int k_max) {
  const SphereGrid& grid = g.grid();
  if (!grid.resolves(k_max)) {
    throw ResolutionError("analyze: grid " + std::to_string(grid.n_theta()) + "x" +
                          std::to_string(grid.n_phi()) + " cannot resolve K_max = " +
                          std::to_string(k_max));
  }
  std::vector<double> c(static_cast<std::size_t>(grid.n_theta()));
  std::vector<double> s(c.size());
  for (int i = 0; i < grid.n_theta(); ++i) {
    c[static_cast<std::size_t>(i)] = grid.cos_theta(i);
    s[static_cast<std::size_t>(i)] = grid.sin_theta(i);
  }
  const LegendreTable table(k_max, c, s);
  SpectralField out(k_max);
  std::vector<cplx> row(static_cast<std::size_t>(2 * k_max + 1));
  for (int i = 0; i < grid.n_theta(); ++i) {
    for (int m = -k_max; m <= k_max; ++m) {
      cplx acc = 0.0;
      for (int j = 0; j < grid.n_phi(); ++j) acc += g(i, j) * std::conj(grid.phase(m, j));
      row[static_cast<std::size_t>(m + k_max)] = acc * grid.phi_weight() * grid.weight(i);
    }
    for (int k = 0; k <= k_max; ++k) {
      for (int m = -k; m <= k; ++m) {
        out(k, m) += row[static_cast<std::size_t>(m + k_max)] * table.value(i, k, m);
      }
    }
  }
  return out;
}

double integrate(const GridField& g) {
  const SphereGrid& grid = g.grid();
  double total = 0.0;
  for (int i = 0; i < grid.n_theta(); ++i) {
    double row = 0.0;
    for (int j = 0; j < grid.n_phi(); ++j) row += g(i, j);
    total += grid.weight(i) * row;
  }
  return total * grid.phi_weight();
}

SpectralField phi_derivative(const SpectralField& f) {
  SpectralField out(f);
  for (int k = 0; k <= f.k_max(); ++k) {
    for (int q = -k; q <= k; ++q) out(k, q) *= cplx(0.0, q);
  }
  return out;
}

ComplexGridField theta_derivative_complex(const SpectralField& f, const GridPtr& grid) {
  return synthesize_impl(f, grid, true, nullptr);
}

GridField theta_derivative(const SpectralField& f, const GridPtr& grid) {
  return theta_derivative_complex(f, grid).real();
}

GridField phi_derivative_rows(const GridField& g) {
  const SphereGrid& grid = g.grid();
  const int n = grid.n_phi();
  const int m_max = n / 2 - 1;  // Nyquist mode dropped: its derivative is ambiguous.
  GridField out(g.grid_ptr());
  std::vector<cplx> a(static_cast<std::size_t>(2 * m_max + 1));
  for (int i = 0; i < grid.n_theta(); ++i) {
    for (int m = -m_max; m <= m_max; ++m) {
      cplx acc = 0.0;
      for (int j = 0; j < n; ++j) acc += g(i, j) * std::conj(grid.phase(m, j));
      a[static_cast<std::size_t>(m + m_max)] = acc / double(n);
    }
    for (int j = 0; j < n; ++j) {
      cplx v = 0.0;
      for (int m = -m_max; m <= m_max; ++m) {
        v += cplx(0.0, m) * a[static_cast<std::size_t>(m + m_max)] * grid.phase(m, j);
      }
      out(i, j) = v.real();
    }
  }
  return out;
}

}  // namespace spinflow
