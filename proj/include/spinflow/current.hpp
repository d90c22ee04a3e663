#pragma once

#include <array>
#include <optional>
#include <vector>

#include "spinflow/sphere.hpp"
#include "spinflow/wigner.hpp"

namespace spinflow {

/// Phi(L^2) and 1/Phi(L^2) on each eigenspace L^2 = K(K+1), K = 0..2S.
struct GammaMultipliers {
  SpinRep rep;
  std::vector<double> phi_k;
  std::vector<double> phi_inv_k;

  explicit GammaMultipliers(SpinRep rep);
};

/// Phi = [2 - eps^2 (2L^2+1) + 2 sqrt(1 - eps^2 (2L^2+1) + eps^4 L^4)]^{1/2}.
/// The radicand vanishes at K = 2S; values down to -1e-12 are clamped to 0.
/// Throws std::domain_error for K outside [0, 2S].
double phi_multiplier(SpinRep rep, int k);

/// Wigner current (J_theta, J_phi) on a grid.
///
/// `equator_factor` marks currents whose J_phi vanishes identically on the
/// equator and so carries a sin(theta) cos(theta) factor. The semiclassical
/// current always does. The quantum Kerr current does only when the
/// d_theta Phi^{-1} W term vanishes there, for instance for W symmetric under
/// theta -> pi - theta.
struct CurrentField {
  GridField j_theta;
  GridField j_phi;
  bool equator_factor = false;

  bool theta_vanishes() const { return j_theta.max_abs() == 0.0; }
};

/// Gamma W = (1/2) Phi W - (eps^2/2) (1 + 2 tan(theta) d/dtheta) Phi^{-1} W on the
/// grid nodes (none of which sits on the equator).
GridField apply_gamma(const SpectralField& w, SpinRep rep, const GridPtr& grid);
inline GridField apply_gamma(const Symbol& w, const GridPtr& grid) {
  return apply_gamma(w.spectral, w.rep, grid);
}

/// Exact Kerr phase-space generator -(chi/eps) cos(theta) Gamma d/dphi W.
GridField kerr_phase_space_rhs(const Symbol& w, double chi, const GridPtr& grid);

/// J_phi = (chi/eps) sin cos Gamma W with the tan(theta) pole cancelled
/// analytically:
///   (chi/eps) [ (sin cos / 2) Phi W - (eps^2/2)(sin cos Phi^{-1} W + 2 sin^2 d/dtheta Phi^{-1} W) ]
/// J_theta = 0. On the equator J_phi = -chi eps d_theta Phi^{-1} W, which is
/// nonzero in general; `equator_factor` is set when it is below 1e-9 max|J_phi|.
CurrentField kerr_current(const Symbol& w, double chi, const GridPtr& grid);
/// max |J_phi| over the equator points (pi/2, phi_j) of the grid.
double kerr_equator_current_max(const Symbol& w, double chi, const SphereGrid& grid);
/// Same J_phi evaluated at an arbitrary point (for instance on the equator).
double kerr_current_at(const Symbol& w, double chi, double theta, double phi);

/// J_phi = (chi / 2 eps) sin(2 theta) W_t, J_theta = 0.
CurrentField semiclassical_current(const GridField& w_t, double chi, SpinRep rep);

/// J_theta = (1/sin) W sum a_i d_phi n_i, J_phi = -W sum a_i d_theta n_i.
CurrentField linear_current(const Symbol& w, const std::array<double, 3>& a, const GridPtr& grid);
CurrentField linear_current(const GridField& w, const std::array<double, 3>& a);

/// div J = (1/sin)[d_theta(sin J_theta) + d_phi J_phi].
///
/// d_phi uses exact row interpolation. d_theta(sin J_theta) goes through
/// spectral analysis at `theta_band` (default: the grid's max degree), so the
/// grid must resolve the band of sin(theta) J_theta.
GridField divergence(const CurrentField& j, std::optional<int> theta_band = std::nullopt);

struct ContinuityResidual {
  GridField residual;
  double max_abs;
};

/// residual = dW/dt + div J.
ContinuityResidual continuity_residual(const GridField& dwdt, const CurrentField& j,
                                       std::optional<int> theta_band = std::nullopt);

}  // namespace spinflow
