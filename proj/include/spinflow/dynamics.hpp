#pragma once

#include <array>
#include <variant>

#include "spinflow/sphere.hpp"
#include "spinflow/su2.hpp"
#include "spinflow/wigner.hpp"

namespace spinflow {

/// H = a_x S_x + a_y S_y + a_z S_z.
struct LinearHamiltonian {
  std::array<double, 3> a{0.0, 0.0, 0.0};
  Operator op(SpinRep rep) const;
  /// Angular frequency |a|; dimensionless time is tau = |a| t.
  double frequency() const;
};

/// H = chi S_z^2 (one-axis twisting); dimensionless time tau = chi t.
struct KerrHamiltonian {
  double chi = 1.0;
  Operator op(SpinRep rep) const;
};

using Hamiltonian = std::variant<LinearHamiltonian, KerrHamiltonian>;

Operator hamiltonian_operator(const Hamiltonian& h, SpinRep rep);
/// Physical time corresponding to dimensionless time tau.
double physical_time(const Hamiltonian& h, double tau);

/// rho(t) = e^{-iHt} rho e^{iHt} via eigendecomposition of the generator.
DensityMatrix evolve_linear(const DensityMatrix& rho0, const LinearHamiltonian& h, double t);
/// rho_{m'm}(t) = e^{-i chi (m'^2 - m^2) t} rho_{m'm}(0).
DensityMatrix evolve_kerr(const DensityMatrix& rho0, const KerrHamiltonian& h, double t);
DensityMatrix evolve(const DensityMatrix& rho0, const Hamiltonian& h, double t);

Vector evolve_kerr(const Vector& psi0, const KerrHamiltonian& h, SpinRep rep, double t);

/// Truncated Wigner evolution under the Kerr flow:
/// W(theta, phi, t) = W0(theta, phi - (chi t / eps) cos theta), applied as an exact
/// Fourier shift of each theta row.
GridField twa_evolve(const Symbol& w0, const KerrHamiltonian& h, double t, const GridPtr& grid);
/// Same transport evaluated at an arbitrary point.
double twa_evaluate(const Symbol& w0, const KerrHamiltonian& h, double t, double theta,
                    double phi);

/// Symbol of -i[H, rho]: the exact instantaneous dW/dt.
Symbol exact_time_derivative(const DensityMatrix& rho, const Operator& h);

}  // namespace spinflow
