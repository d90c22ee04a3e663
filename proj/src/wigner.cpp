#include "spinflow/wigner.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace spinflow {

namespace {

double symbol_norm(SpinRep rep) { return std::sqrt(4.0 * std::numbers::pi / rep.dim()); }

}  // namespace

double Symbol::at(double theta, double phi) const {
  const int k_max = spectral.k_max();
  const LegendreTable table(k_max, {std::cos(theta)}, {std::sin(theta)});
  cplx acc = 0.0;
  for (int k = 0; k <= k_max; ++k) {
    for (int q = -k; q <= k; ++q) {
      acc += spectral(k, q) * table.value(0, k, q) * std::polar(1.0, q * phi);
    }
  }
  return acc.real();
}

Symbol symbol_of(const Operator& a, const TensorBasis& basis) {
  return symbol_from_tensor_coefficients(a.rep(), basis.k_max(), basis.coefficients(a));
}

Symbol symbol_of(const Operator& a) { return symbol_of(a, TensorBasis(a.rep())); }

Symbol symbol_from_tensor_coefficients(SpinRep rep, int k_max, const std::vector<cplx>& a_kq) {
  if (k_max > rep.band_limit()) {
    throw std::domain_error("symbol: band limit exceeds 2S");
  }
  SpectralField f(k_max, a_kq);
  return {rep, (f * symbol_norm(rep)).with_k_max(rep.band_limit())};
}

Operator kernel_matrix(const TensorBasis& basis, double theta, double phi) {
  const SpinRep rep = basis.rep();
  const int k_max = basis.k_max();
  const LegendreTable table(k_max, {std::cos(theta)}, {std::sin(theta)});
  const int d = rep.dim();
  Matrix w = Matrix::Zero(d, d);
  for (int k = 0; k <= k_max; ++k) {
    for (int q = -k; q <= k; ++q) {
      const cplx y_conj = table.value(0, k, q) * std::polar(1.0, -q * phi);
      for (int col = std::max(0, q); col < std::min(d, d + q); ++col) {
        w(col - q, col) += y_conj * basis.entry(k, q, col);
      }
    }
  }
  return {rep, w * symbol_norm(rep)};
}

Operator kernel_matrix(SpinRep rep, double theta, double phi) {
  return kernel_matrix(TensorBasis(rep), theta, phi);
}

double overlap(const DensityMatrix& rho, const Operator& a, const GridPtr& grid) {
  if (!(rho.rep() == a.rep())) throw std::invalid_argument("overlap: spin mismatch");
  const TensorBasis basis(a.rep());
  const GridField w_rho = symbol_of(rho.op(), basis).on(grid);
  const GridField w_a = symbol_of(a, basis).on(grid);
  return a.rep().dim() / (4.0 * std::numbers::pi) * integrate(w_rho * w_a);
}

double overlap(const DensityMatrix& rho, const Operator& a) {
  return overlap(rho, a, build_grid(rho.rep(), 2.0));
}

std::vector<double> coherent_wigner_weights(SpinRep rep) {
  const int two_s = rep.two_s();
  const long double lf2s = std::lgammal(two_s + 1.0L);
  std::vector<double> a(static_cast<std::size_t>(two_s + 1));
  for (int k = 0; k <= two_s; ++k) {
    const long double log_mag =
        lf2s + 0.5L * (std::log(static_cast<long double>(two_s + 1)) -
                       std::lgammal(two_s - k + 1.0L) - std::lgammal(two_s + k + 2.0L));
    a[static_cast<std::size_t>(k)] =
        static_cast<double>((2.0L * k + 1.0L) / (two_s + 1.0L) * std::exp(log_mag));
  }
  return a;
}

namespace {

double legendre_series(const std::vector<double>& a, double x) {
  double p0 = 1.0, p1 = x;
  double sum = a[0];
  if (a.size() > 1) sum += a[1] * x;
  for (std::size_t k = 2; k < a.size(); ++k) {
    const double kk = static_cast<double>(k);
    const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
    sum += a[k] * p2;
    p0 = p1;
    p1 = p2;
  }
  return sum;
}

double cos_angle(CoherentLabel l, double theta, double phi) {
  return std::cos(theta) * std::cos(l.theta0) +
         std::sin(theta) * std::sin(l.theta0) * std::cos(phi - l.phi0);
}

}  // namespace

double coherent_wigner_closed_form(SpinRep rep, CoherentLabel label, double theta, double phi) {
  return legendre_series(coherent_wigner_weights(rep), cos_angle(label, theta, phi));
}

GridField coherent_wigner_closed_form(SpinRep rep, CoherentLabel label, const GridPtr& grid) {
  const auto a = coherent_wigner_weights(rep);
  GridField out(grid);
  for (int i = 0; i < grid->n_theta(); ++i) {
    for (int j = 0; j < grid->n_phi(); ++j) {
      const double x = grid->cos_theta(i) * std::cos(label.theta0) +
                       grid->sin_theta(i) * std::sin(label.theta0) * std::cos(grid->phi(j) - label.phi0);
      out(i, j) = legendre_series(a, x);
    }
  }
  return out;
}

}  // namespace spinflow
