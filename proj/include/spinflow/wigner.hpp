#pragma once

#include "spinflow/sphere.hpp"
#include "spinflow/su2.hpp"

namespace spinflow {

/// Phase-space symbol W_A of an operator, stored spectrally with K_max = 2S.
///
/// The coefficient of Y_{Kq} is sqrt(4 pi / (2S+1)) Tr[A T^K_q^dagger], which is
/// the same function as Tr[A w(Omega)] for the kernel below. With this
/// convention W_{S_i} = sqrt(S(S+1)) n_i for all three axes.
struct Symbol {
  SpinRep rep;
  SpectralField spectral;

  GridField on(const GridPtr& grid) const { return synthesize(spectral, grid); }
  double at(double theta, double phi) const;
};

Symbol symbol_of(const Operator& a);
Symbol symbol_of(const Operator& a, const TensorBasis& basis);
inline Symbol wigner_function(const DensityMatrix& rho) { return symbol_of(rho.op()); }

/// Spectral coefficients of an arbitrary tensor expansion (inverse of
/// operator_coefficients followed by the symbol normalization).
Symbol symbol_from_tensor_coefficients(SpinRep rep, int k_max, const std::vector<cplx>& a_kq);

/// Stratonovich-Weyl kernel w(Omega) = sqrt(4pi/(2S+1)) sum Y*_{Kq}(Omega) T^K_q.
Operator kernel_matrix(SpinRep rep, double theta, double phi);
Operator kernel_matrix(const TensorBasis& basis, double theta, double phi);

/// (2S+1)/(4 pi) times the integral of W_rho W_A, on a grid with oversample 2.
double overlap(const DensityMatrix& rho, const Operator& a);
double overlap(const DensityMatrix& rho, const Operator& a, const GridPtr& grid);

/// Closed-form Wigner function of the coherent state |Omega0> at Omega:
///
///   W(Omega) = sum_K (2K+1)/(2S+1) * (2S)! sqrt((2S+1) / ((2S-K)! (2S+K+1)!)) P_K(cos zeta)
///
/// where zeta is the angle between Omega and Omega0. The (2K+1)/(2S+1)
/// weight comes from summing |Y_{Kq}|^2 over q (addition theorem) and is
/// what makes the series agree with Tr[rho w(Omega)].
double coherent_wigner_closed_form(SpinRep rep, CoherentLabel label, double theta, double phi);
GridField coherent_wigner_closed_form(SpinRep rep, CoherentLabel label, const GridPtr& grid);

/// Series weights a_K of the closed form, K = 0..2S.
std::vector<double> coherent_wigner_weights(SpinRep rep);

}  // namespace spinflow
