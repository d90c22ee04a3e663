#include "spinflow/current.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace spinflow {

namespace {

constexpr double kRadicandClamp = 1e-12;

}  // namespace

double phi_multiplier(SpinRep rep, int k) {
  if (k < 0 || k > rep.band_limit()) {
    throw std::domain_error("phi_multiplier: K = " + std::to_string(k) + " outside [0, 2S]");
  }
  const double eps = rep.epsilon();
  const double l2 = double(k) * (k + 1);
  const double e2 = eps * eps;
  // 1 - eps^2 (2L^2+1) + eps^4 L^4 = (d^2 - d - L^2)(d^2 + d - L^2) / d^4 with
  // d = 2S+1. The integer factors make the zero at K = 2S exact.
  const long long d = rep.dim();
  const long long ll2 = static_cast<long long>(k) * (k + 1);
  const double d2 = double(d) * double(d);
  double radicand = double(d * d - d - ll2) / d2 * (double(d * d + d - ll2) / d2);
  if (radicand < 0.0) {
    if (radicand < -kRadicandClamp) {
      throw std::domain_error("phi_multiplier: negative radicand");
    }
    radicand = 0.0;
  }
  return std::sqrt(2.0 - e2 * (2.0 * l2 + 1.0) + 2.0 * std::sqrt(radicand));
}

GammaMultipliers::GammaMultipliers(SpinRep r) : rep(r) {
  for (int k = 0; k <= rep.band_limit(); ++k) {
    phi_k.push_back(phi_multiplier(rep, k));
    phi_inv_k.push_back(1.0 / phi_k.back());
  }
}

namespace {

struct GammaParts {
  GridField phi_w;     // Phi W
  GridField inv_w;     // Phi^{-1} W
  GridField d_inv_w;   // d/dtheta Phi^{-1} W
};

GammaParts gamma_parts(const SpectralField& w, SpinRep rep, const GridPtr& grid) {
  if (w.k_max() > rep.band_limit()) {
    throw std::domain_error("apply_gamma: field band exceeds 2S");
  }
  const GammaMultipliers mult(rep);
  const SpectralField phi_w =
      w.scaled_by_degree([&](int k) { return mult.phi_k[static_cast<std::size_t>(k)]; });
  const SpectralField inv_w =
      w.scaled_by_degree([&](int k) { return mult.phi_inv_k[static_cast<std::size_t>(k)]; });
  return {synthesize(phi_w, grid), synthesize(inv_w, grid), theta_derivative(inv_w, grid)};
}

}  // namespace

GridField apply_gamma(const SpectralField& w, SpinRep rep, const GridPtr& grid) {
  const double e2 = rep.epsilon() * rep.epsilon();
  const GammaParts p = gamma_parts(w, rep, grid);
  GridField out(grid);
  for (int i = 0; i < grid->n_theta(); ++i) {
    const double tan_t = grid->sin_theta(i) / grid->cos_theta(i);
    for (int j = 0; j < grid->n_phi(); ++j) {
      out(i, j) = 0.5 * p.phi_w(i, j) - 0.5 * e2 * (p.inv_w(i, j) + 2.0 * tan_t * p.d_inv_w(i, j));
    }
  }
  return out;
}

GridField kerr_phase_space_rhs(const Symbol& w, double chi, const GridPtr& grid) {
  const GridField g = apply_gamma(phi_derivative(w.spectral), w.rep, grid);
  const double pref = -chi / w.rep.epsilon();
  return g.times_row([&](int i) { return pref * grid->cos_theta(i); });
}

namespace {

// Tolerance, relative to max|J_phi| on the grid, below which the equator
// counts as an exact zero line of the Kerr current.
constexpr double kEquatorZero = 1e-9;

}  // namespace

double kerr_equator_current_max(const Symbol& sym, double chi, const SphereGrid& grid) {
  const SpectralField& w = sym.spectral;
  const SpinRep rep = sym.rep;
  const GammaMultipliers mult(rep);
  const int k_max = w.k_max();
  const LegendreTable table(k_max, {0.0}, {1.0});
  std::vector<cplx> by_q(static_cast<std::size_t>(2 * k_max + 1), 0.0);
  for (int k = 0; k <= k_max; ++k) {
    for (int q = -k; q <= k; ++q) {
      by_q[static_cast<std::size_t>(q + k_max)] +=
          mult.phi_inv_k[static_cast<std::size_t>(k)] * w(k, q) * table.dtheta(0, k, q);
    }
  }
  const double eps = rep.epsilon();
  double out = 0.0;
  for (int j = 0; j < grid.n_phi(); ++j) {
    cplx d = 0.0;
    for (int q = -k_max; q <= k_max; ++q) d += by_q[static_cast<std::size_t>(q + k_max)] * grid.phase(q, j);
    out = std::max(out, std::abs(chi * eps * d.real()));
  }
  return out;
}

CurrentField kerr_current(const Symbol& w, double chi, const GridPtr& grid) {
  const double eps = w.rep.epsilon();
  const double e2 = eps * eps;
  const GammaParts p = gamma_parts(w.spectral, w.rep, grid);
  GridField j_phi(grid);
  for (int i = 0; i < grid->n_theta(); ++i) {
    const double s = grid->sin_theta(i), c = grid->cos_theta(i);
    for (int j = 0; j < grid->n_phi(); ++j) {
      j_phi(i, j) = chi / eps *
                    (0.5 * s * c * p.phi_w(i, j) -
                     0.5 * e2 * (s * c * p.inv_w(i, j) + 2.0 * s * s * p.d_inv_w(i, j)));
    }
  }
  const bool equator_zero =
      kerr_equator_current_max(w, chi, *grid) <= kEquatorZero * j_phi.max_abs();
  return {GridField(grid), std::move(j_phi), equator_zero};
}

double kerr_current_at(const Symbol& w, double chi, double theta, double phi) {
  const SpinRep rep = w.rep;
  const double eps = rep.epsilon();
  const GammaMultipliers mult(rep);
  const int k_max = w.spectral.k_max();
  const LegendreTable table(k_max, {std::cos(theta)}, {std::sin(theta)});
  cplx phi_w = 0.0, inv_w = 0.0, d_inv_w = 0.0;
  for (int k = 0; k <= k_max; ++k) {
    for (int q = -k; q <= k; ++q) {
      const cplx e = w.spectral(k, q) * std::polar(1.0, q * phi);
      phi_w += mult.phi_k[static_cast<std::size_t>(k)] * e * table.value(0, k, q);
      inv_w += mult.phi_inv_k[static_cast<std::size_t>(k)] * e * table.value(0, k, q);
      d_inv_w += mult.phi_inv_k[static_cast<std::size_t>(k)] * e * table.dtheta(0, k, q);
    }
  }
  const double s = std::sin(theta), c = std::cos(theta);
  return chi / eps *
         (0.5 * s * c * phi_w.real() -
          0.5 * eps * eps * (s * c * inv_w.real() + 2.0 * s * s * d_inv_w.real()));
}

CurrentField semiclassical_current(const GridField& w_t, double chi, SpinRep rep) {
  const SphereGrid& grid = w_t.grid();
  const double pref = 0.5 * chi / rep.epsilon();
  GridField j_phi = w_t.times_row(
      [&](int i) { return pref * 2.0 * grid.sin_theta(i) * grid.cos_theta(i); });
  return {GridField(w_t.grid_ptr()), std::move(j_phi), true};
}

CurrentField linear_current(const GridField& w, const std::array<double, 3>& a) {
  const SphereGrid& grid = w.grid();
  GridField j_theta(w.grid_ptr()), j_phi(w.grid_ptr());
  for (int i = 0; i < grid.n_theta(); ++i) {
    const double s = grid.sin_theta(i), c = grid.cos_theta(i);
    for (int j = 0; j < grid.n_phi(); ++j) {
      const double cp = std::cos(grid.phi(j)), sp = std::sin(grid.phi(j));
      // d_phi n = (-s sp, s cp, 0); d_theta n = (c cp, c sp, -s).
      const double a_dphi_n_over_sin = -a[0] * sp + a[1] * cp;
      const double a_dtheta_n = a[0] * c * cp + a[1] * c * sp - a[2] * s;
      j_theta(i, j) = w(i, j) * a_dphi_n_over_sin;
      j_phi(i, j) = -w(i, j) * a_dtheta_n;
    }
  }
  return {std::move(j_theta), std::move(j_phi), false};
}

CurrentField linear_current(const Symbol& w, const std::array<double, 3>& a, const GridPtr& grid) {
  return linear_current(w.on(grid), a);
}

GridField divergence(const CurrentField& j, std::optional<int> theta_band) {
  const SphereGrid& grid = j.j_phi.grid();
  const GridPtr& gp = j.j_phi.grid_ptr();
  GridField div = phi_derivative_rows(j.j_phi);
  if (!j.theta_vanishes()) {
    const int band = theta_band.value_or(grid.max_degree());
    const GridField sin_jt = j.j_theta.times_row([&](int i) { return grid.sin_theta(i); });
    div = div + theta_derivative(analyze(sin_jt, band), gp);
  }
  return div.times_row([&](int i) { return 1.0 / grid.sin_theta(i); });
}

ContinuityResidual continuity_residual(const GridField& dwdt, const CurrentField& j,
                                       std::optional<int> theta_band) {
  GridField r = dwdt + divergence(j, theta_band);
  const double m = r.max_abs();
  return {std::move(r), m};
}

}  // namespace spinflow
