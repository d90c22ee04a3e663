#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace spinflow {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

namespace tol {
inline constexpr double kHermitian = 1e-12;
inline constexpr double kTrace = 1e-12;
inline constexpr double kPositivity = -1e-10;
}  // namespace tol

/// Irreducible representation of SU(2) with spin S, stored as the integer 2S.
///
/// Basis index i = 0 .. 2S corresponds to m = S - i, so every matrix in the
/// library is ordered m = S, S-1, ..., -S.
class SpinRep {
 public:
  explicit SpinRep(int two_s);
  /// Accepts a spin given as a real number; 2S must be a positive integer.
  static SpinRep from_spin(double s);

  int two_s() const noexcept { return two_s_; }
  double spin() const noexcept { return 0.5 * two_s_; }
  int dim() const noexcept { return two_s_ + 1; }
  double epsilon() const noexcept { return 1.0 / dim(); }
  /// Largest spherical-harmonic degree carried by any symbol: 2S.
  int band_limit() const noexcept { return two_s_; }
  bool integer_spin() const noexcept { return two_s_ % 2 == 0; }

  double m_of(int index) const noexcept { return spin() - index; }
  /// Index for the magnetic number given as 2m.
  int index_of_two_m(int two_m) const;

  bool operator==(const SpinRep&) const = default;

 private:
  int two_s_;
};

/// Dense operator on the (2S+1)-dimensional carrier space.
class Operator {
 public:
  Operator(SpinRep rep, Matrix mat);
  static Operator identity(SpinRep rep);
  static Operator zero(SpinRep rep);

  const SpinRep& rep() const noexcept { return rep_; }
  const Matrix& mat() const noexcept { return mat_; }

  Operator adjoint() const { return {rep_, mat_.adjoint()}; }
  double hermiticity_error() const;

  Operator operator+(const Operator& o) const;
  Operator operator-(const Operator& o) const;
  Operator operator*(const Operator& o) const;
  Operator operator*(cplx s) const { return {rep_, mat_ * s}; }

 private:
  SpinRep rep_;
  Matrix mat_;
};

Operator commutator(const Operator& a, const Operator& b);

/// A validated density operator: Hermitian, unit trace, positive semidefinite.
/// Construction throws std::invalid_argument when any invariant fails.
class DensityMatrix {
 public:
  explicit DensityMatrix(Operator op);
  static DensityMatrix pure(SpinRep rep, const Vector& psi);
  static DensityMatrix maximally_mixed(SpinRep rep);

  const Operator& op() const noexcept { return op_; }
  const SpinRep& rep() const noexcept { return op_.rep(); }
  const Matrix& mat() const noexcept { return op_.mat(); }
  double purity() const;

 private:
  Operator op_;
};

/// Point on the sphere labelling a coherent state.
struct CoherentLabel {
  double theta0 = 0.0;
  double phi0 = 0.0;

  /// Maps any pair of angles onto theta0 in [0, pi], phi0 in [0, 2 pi).
  CoherentLabel canonical() const;
};

struct SpinOperators {
  Operator sx, sy, sz, splus, sminus;
};

SpinOperators spin_operators(SpinRep rep);

/// Coherent state |theta0, phi0> in the |S,m> basis; unit norm.
Vector coherent_state(SpinRep rep, CoherentLabel label);

/// Clebsch-Gordan coefficient <j1 m1; j2 m2 | j m> (Condon-Shortley phase).
/// All quantum numbers are passed doubled so half-integers are exact.
/// Throws std::domain_error on out-of-range or non-matching parities.
double clebsch_gordan(int two_j1, int two_m1, int two_j2, int two_m2, int two_j,
                      int two_m);

/// C^{S m'}_{S m, K q}, the coupling that builds the tensor operators.
double tensor_cg(SpinRep rep, int two_m, int k, int q, int two_m_prime);

/// Flat index of (K, q) in every spectral array: K^2 + K + q.
constexpr int kq_index(int k, int q) noexcept { return k * k + k + q; }
constexpr int kq_count(int k_max) noexcept { return (k_max + 1) * (k_max + 1); }

/// T^K_q as a dense operator.
Operator tensor_operator(SpinRep rep, int k, int q);

/// Precomputed nonzero entries of every T^K_q for one representation.
///
/// T^K_q only has entries on the q-th superdiagonal (m' = m + q), so each
/// tensor is stored as the vector of its dim - |q| real entries. Building
/// the table costs O(dim^3) Clebsch-Gordan evaluations; reuse it when
/// expanding many operators of the same spin.
class TensorBasis {
 public:
  explicit TensorBasis(SpinRep rep, int k_max = -1);

  const SpinRep& rep() const noexcept { return rep_; }
  int k_max() const noexcept { return k_max_; }

  /// Entry of T^K_q at column `col` (row col - q); column must be in range.
  double entry(int k, int q, int col) const;
  Operator tensor(int k, int q) const;

  /// A_{Kq} = Tr[A T^K_q^dagger], flat-indexed by kq_index.
  std::vector<cplx> coefficients(const Operator& a) const;
  Operator reconstruct(const std::vector<cplx>& coeffs) const;

 private:
  SpinRep rep_;
  int k_max_;
  std::vector<std::vector<double>> entries_;
};

std::vector<cplx> operator_coefficients(const Operator& a);
Operator reconstruct(SpinRep rep, const std::vector<cplx>& coeffs);

}  // namespace spinflow
