#include "spinflow/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace spinflow {

Operator LinearHamiltonian::op(SpinRep rep) const {
  const auto s = spin_operators(rep);
  return {rep, a[0] * s.sx.mat() + a[1] * s.sy.mat() + a[2] * s.sz.mat()};
}

double LinearHamiltonian::frequency() const {
  return std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
}

Operator KerrHamiltonian::op(SpinRep rep) const {
  const auto s = spin_operators(rep);
  return {rep, chi * s.sz.mat() * s.sz.mat()};
}

Operator hamiltonian_operator(const Hamiltonian& h, SpinRep rep) {
  return std::visit([&](const auto& hh) { return hh.op(rep); }, h);
}

double physical_time(const Hamiltonian& h, double tau) {
  const double rate = std::visit(
      [](const auto& hh) -> double {
        if constexpr (std::is_same_v<std::decay_t<decltype(hh)>, KerrHamiltonian>) {
          return std::abs(hh.chi);
        } else {
          return hh.frequency();
        }
      },
      h);
  return rate > 0.0 ? tau / rate : tau;
}

DensityMatrix evolve_linear(const DensityMatrix& rho0, const LinearHamiltonian& h, double t) {
  const SpinRep rep = rho0.rep();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(h.op(rep).mat());
  const Matrix& v = eig.eigenvectors();
  Vector phases(rep.dim());
  for (int n = 0; n < rep.dim(); ++n) phases(n) = std::polar(1.0, -eig.eigenvalues()(n) * t);
  const Matrix u = v * phases.asDiagonal() * v.adjoint();
  Matrix rho = u * rho0.mat() * u.adjoint();
  // Remove the O(eps) anti-Hermitian part left by the two products.
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return DensityMatrix(Operator(rep, rho));
}

DensityMatrix evolve_kerr(const DensityMatrix& rho0, const KerrHamiltonian& h, double t) {
  const SpinRep rep = rho0.rep();
  const int d = rep.dim();
  Matrix rho = rho0.mat();
  for (int r = 0; r < d; ++r) {
    const double mr = rep.m_of(r);
    for (int c = 0; c < d; ++c) {
      const double mc = rep.m_of(c);
      rho(r, c) *= std::polar(1.0, -h.chi * (mr * mr - mc * mc) * t);
    }
  }
  return DensityMatrix(Operator(rep, rho));
}

DensityMatrix evolve(const DensityMatrix& rho0, const Hamiltonian& h, double t) {
  return std::visit(
      [&](const auto& hh) -> DensityMatrix {
        if constexpr (std::is_same_v<std::decay_t<decltype(hh)>, KerrHamiltonian>) {
          return evolve_kerr(rho0, hh, t);
        } else {
          return evolve_linear(rho0, hh, t);
        }
      },
      h);
}

Vector evolve_kerr(const Vector& psi0, const KerrHamiltonian& h, SpinRep rep, double t) {
  if (psi0.size() != rep.dim()) throw std::invalid_argument("evolve_kerr: dimension mismatch");
  Vector psi = psi0;
  for (int i = 0; i < rep.dim(); ++i) {
    const double m = rep.m_of(i);
    psi(i) *= std::polar(1.0, -h.chi * m * m * t);
  }
  return psi;
}

GridField twa_evolve(const Symbol& w0, const KerrHamiltonian& h, double t, const GridPtr& grid) {
  const double rate = h.chi * t / w0.rep.epsilon();
  return synthesize_shifted(w0.spectral, grid, [&](int i) { return rate * grid->cos_theta(i); });
}

double twa_evaluate(const Symbol& w0, const KerrHamiltonian& h, double t, double theta,
                    double phi) {
  return w0.at(theta, phi - h.chi * t / w0.rep.epsilon() * std::cos(theta));
}

Symbol exact_time_derivative(const DensityMatrix& rho, const Operator& h) {
  const Operator c = commutator(h, rho.op());
  return symbol_of(c * cplx(0.0, -1.0));
}

}  // namespace spinflow
