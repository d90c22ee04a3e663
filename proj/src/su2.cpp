#include "spinflow/su2.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace spinflow {

namespace {

long double log_factorial(int n) { return std::lgammal(static_cast<long double>(n) + 1.0L); }

bool same_parity(int a, int b) { return ((a - b) % 2) == 0; }

namespace mp = boost::multiprecision;

mp::cpp_int factorial(int n) {
  mp::cpp_int f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Exact evaluation of the Racah sum for large spins, where the alternating
// terms cancel far below long double resolution.
double racah_exact(int a, int b, int c, int d, int j1pm1, int j1mm1, int j2pm2, int j2mm2, int jpm,
                   int jmm, int shift1, int shift2, int two_j, int k_lo, int k_hi) {
  mp::cpp_rational sum = 0;
  for (int k = k_lo; k <= k_hi; ++k) {
    const mp::cpp_int den = factorial(k) * factorial(a - k) * factorial(j1mm1 - k) *
                            factorial(j2pm2 - k) * factorial(shift1 + k) * factorial(shift2 + k);
    const mp::cpp_rational term(mp::cpp_int(1), den);
    sum += (k % 2 == 0) ? term : mp::cpp_rational(-term);
  }
  if (sum == 0) return 0.0;
  // CG^2 = pref * sum^2 is rational; take the square root in floating point.
  const mp::cpp_rational pref(
      mp::cpp_int(two_j + 1) * factorial(a) * factorial(b) * factorial(c) * factorial(j1pm1) *
          factorial(j1mm1) * factorial(j2pm2) * factorial(j2mm2) * factorial(jpm) * factorial(jmm),
      factorial(d));
  const mp::cpp_rational squared = pref * sum * sum;
  const long double mag = std::sqrt(static_cast<long double>(squared));
  return static_cast<double>(sum > 0 ? mag : -mag);
}

}  // namespace

SpinRep::SpinRep(int two_s) : two_s_(two_s) {
  if (two_s < 1) {
    throw std::invalid_argument("SpinRep: 2S must be a positive integer, got " +
                                std::to_string(two_s));
  }
}

SpinRep SpinRep::from_spin(double s) {
  const double two_s = 2.0 * s;
  const double rounded = std::round(two_s);
  if (!std::isfinite(s) || std::abs(two_s - rounded) > 1e-9 || rounded < 1.0) {
    throw std::invalid_argument("SpinRep: spin must be a positive multiple of 1/2");
  }
  return SpinRep(static_cast<int>(rounded));
}

int SpinRep::index_of_two_m(int two_m) const {
  if (std::abs(two_m) > two_s_ || !same_parity(two_m, two_s_)) {
    throw std::domain_error("SpinRep: m out of range for this spin");
  }
  return (two_s_ - two_m) / 2;
}

Operator::Operator(SpinRep rep, Matrix mat) : rep_(rep), mat_(std::move(mat)) {
  if (mat_.rows() != rep_.dim() || mat_.cols() != rep_.dim()) {
    throw std::invalid_argument("Operator: matrix must be (2S+1)x(2S+1)");
  }
}

Operator Operator::identity(SpinRep rep) {
  return {rep, Matrix::Identity(rep.dim(), rep.dim())};
}

Operator Operator::zero(SpinRep rep) { return {rep, Matrix::Zero(rep.dim(), rep.dim())}; }

double Operator::hermiticity_error() const {
  return (mat_ - mat_.adjoint()).cwiseAbs().maxCoeff();
}

Operator Operator::operator+(const Operator& o) const { return {rep_, mat_ + o.mat_}; }
Operator Operator::operator-(const Operator& o) const { return {rep_, mat_ - o.mat_}; }
Operator Operator::operator*(const Operator& o) const { return {rep_, mat_ * o.mat_}; }

Operator commutator(const Operator& a, const Operator& b) {
  return {a.rep(), a.mat() * b.mat() - b.mat() * a.mat()};
}

DensityMatrix::DensityMatrix(Operator op) : op_(std::move(op)) {
  const Matrix& m = op_.mat();
  if (op_.hermiticity_error() > tol::kHermitian) {
    throw std::invalid_argument("DensityMatrix: not Hermitian");
  }
  if (std::abs(m.trace() - cplx(1.0)) > tol::kTrace) {
    throw std::invalid_argument("DensityMatrix: trace differs from 1");
  }
  const Matrix herm = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(herm, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < tol::kPositivity) {
    throw std::invalid_argument("DensityMatrix: negative eigenvalue");
  }
}

DensityMatrix DensityMatrix::pure(SpinRep rep, const Vector& psi) {
  if (psi.size() != rep.dim()) {
    throw std::invalid_argument("DensityMatrix::pure: state has wrong dimension");
  }
  const Vector v = psi / psi.norm();
  return DensityMatrix(Operator(rep, v * v.adjoint()));
}

DensityMatrix DensityMatrix::maximally_mixed(SpinRep rep) {
  return DensityMatrix(Operator(rep, Matrix::Identity(rep.dim(), rep.dim()) / double(rep.dim())));
}

double DensityMatrix::purity() const { return (mat() * mat()).trace().real(); }

CoherentLabel CoherentLabel::canonical() const {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double t = std::fmod(theta0, two_pi);
  if (t < 0) t += two_pi;
  double p = phi0;
  if (t > std::numbers::pi) {
    t = two_pi - t;
    p += std::numbers::pi;
  }
  p = std::fmod(p, two_pi);
  if (p < 0) p += two_pi;
  if (p >= two_pi) p = 0.0;
  return {t, p};
}

SpinOperators spin_operators(SpinRep rep) {
  const int d = rep.dim();
  const double s = rep.spin();
  Matrix sz = Matrix::Zero(d, d);
  Matrix sp = Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    const double m = rep.m_of(i);
    sz(i, i) = m;
    // S+ |m> = sqrt(S(S+1) - m(m+1)) |m+1>, and m+1 sits at index i-1.
    if (i > 0) sp(i - 1, i) = std::sqrt(s * (s + 1) - m * (m + 1));
  }
  const Matrix sm = sp.adjoint();
  const Matrix sx = 0.5 * (sp + sm);
  const Matrix sy = (sp - sm) / cplx(0.0, 2.0);
  return {Operator(rep, sx), Operator(rep, sy), Operator(rep, sz), Operator(rep, sp),
          Operator(rep, sm)};
}

Vector coherent_state(SpinRep rep, CoherentLabel label) {
  const int two_s = rep.two_s();
  const double c = std::cos(0.5 * label.theta0);
  const double s = std::sin(0.5 * label.theta0);
  const long double log_fact_2s = log_factorial(two_s);
  Vector v(rep.dim());
  for (int i = 0; i < rep.dim(); ++i) {
    // S + m = 2S - i, S - m = i.
    const int up = two_s - i;
    const int down = i;
    const double binom =
        std::exp(static_cast<double>(0.5L * (log_fact_2s - log_factorial(up) - log_factorial(down))));
    const double amp = binom * std::pow(c, up) * std::pow(s, down);
    const double m = rep.m_of(i);
    v(i) = amp * std::polar(1.0, -m * label.phi0);
  }
  return v;
}

double clebsch_gordan(int two_j1, int two_m1, int two_j2, int two_m2, int two_j, int two_m) {
  const auto bad = [](const char* what) {
    throw std::domain_error(std::string("clebsch_gordan: ") + what);
  };
  if (two_j1 < 0 || two_j2 < 0 || two_j < 0) bad("negative angular momentum");
  if (std::abs(two_m1) > two_j1 || std::abs(two_m2) > two_j2 || std::abs(two_m) > two_j) {
    bad("|m| exceeds j");
  }
  if (!same_parity(two_m1, two_j1) || !same_parity(two_m2, two_j2) ||
      !same_parity(two_m, two_j)) {
    bad("m and j parities differ");
  }
  if (two_j > two_j1 + two_j2 || two_j < std::abs(two_j1 - two_j2) ||
      !same_parity(two_j1 + two_j2, two_j)) {
    bad("triangle condition violated");
  }
  if (two_m1 + two_m2 != two_m) return 0.0;

  // Racah's closed form; all combinations below are integers.
  const int a = (two_j1 + two_j2 - two_j) / 2;
  const int b = (two_j1 - two_j2 + two_j) / 2;
  const int c = (-two_j1 + two_j2 + two_j) / 2;
  const int d = (two_j1 + two_j2 + two_j) / 2 + 1;
  const int j1pm1 = (two_j1 + two_m1) / 2, j1mm1 = (two_j1 - two_m1) / 2;
  const int j2pm2 = (two_j2 + two_m2) / 2, j2mm2 = (two_j2 - two_m2) / 2;
  const int jpm = (two_j + two_m) / 2, jmm = (two_j - two_m) / 2;
  const int shift1 = (two_j - two_j2 + two_m1) / 2;  // j - j2 + m1
  const int shift2 = (two_j - two_j1 - two_m2) / 2;  // j - j1 - m2

  const long double log_pref =
      0.5L * (std::log(static_cast<long double>(two_j + 1)) + log_factorial(a) +
              log_factorial(b) + log_factorial(c) - log_factorial(d) + log_factorial(j1pm1) +
              log_factorial(j1mm1) + log_factorial(j2pm2) + log_factorial(j2mm2) +
              log_factorial(jpm) + log_factorial(jmm));

  const int k_lo = std::max({0, -shift1, -shift2});
  const int k_hi = std::min({a, j1mm1, j2pm2});
  if (k_lo > k_hi) return 0.0;

  std::vector<long double> logs;
  logs.reserve(static_cast<std::size_t>(k_hi - k_lo + 1));
  for (int k = k_lo; k <= k_hi; ++k) {
    logs.push_back(log_pref - (log_factorial(k) + log_factorial(a - k) + log_factorial(j1mm1 - k) +
                               log_factorial(j2pm2 - k) + log_factorial(shift1 + k) +
                               log_factorial(shift2 + k)));
  }
  const long double top = *std::max_element(logs.begin(), logs.end());
  // Terms larger than ~1e2 would lose more than three digits of the
  // long double mantissa to cancellation.
  if (top + std::log(static_cast<long double>(logs.size())) > std::log(1e2L)) {
    return racah_exact(a, b, c, d, j1pm1, j1mm1, j2pm2, j2mm2, jpm, jmm, shift1, shift2, two_j,
                       k_lo, k_hi);
  }
  long double sum = 0.0L;
  for (int k = k_lo; k <= k_hi; ++k) {
    const long double term = std::exp(logs[static_cast<std::size_t>(k - k_lo)] - top);
    sum += (k % 2 == 0) ? term : -term;
  }
  return static_cast<double>(sum * std::exp(top));
}

double tensor_cg(SpinRep rep, int two_m, int k, int q, int two_m_prime) {
  if (k < 0 || k > rep.two_s() || std::abs(q) > k) {
    throw std::domain_error("tensor_cg: need 0 <= K <= 2S and |q| <= K");
  }
  return clebsch_gordan(rep.two_s(), two_m, 2 * k, 2 * q, rep.two_s(), two_m_prime);
}

Operator tensor_operator(SpinRep rep, int k, int q) {
  if (k < 0 || k > rep.two_s() || std::abs(q) > k) {
    throw std::domain_error("tensor_operator: need 0 <= K <= 2S and |q| <= K");
  }
  const int d = rep.dim();
  const double norm = std::sqrt(double(2 * k + 1) / d);
  Matrix t = Matrix::Zero(d, d);
  for (int col = 0; col < d; ++col) {
    const int row = col - q;  // m' = m + q
    if (row < 0 || row >= d) continue;
    const int two_m = rep.two_s() - 2 * col;
    t(row, col) = norm * tensor_cg(rep, two_m, k, q, two_m + 2 * q);
  }
  return {rep, t};
}

TensorBasis::TensorBasis(SpinRep rep, int k_max)
    : rep_(rep), k_max_(k_max < 0 ? rep.two_s() : k_max) {
  if (k_max_ > rep.two_s()) {
    throw std::domain_error("TensorBasis: k_max exceeds 2S");
  }
  const int d = rep.dim();
  entries_.resize(static_cast<std::size_t>(kq_count(k_max_)));
  for (int k = 0; k <= k_max_; ++k) {
    const double norm = std::sqrt(double(2 * k + 1) / d);
    for (int q = -k; q <= k; ++q) {
      auto& e = entries_[static_cast<std::size_t>(kq_index(k, q))];
      e.assign(static_cast<std::size_t>(d), 0.0);
      for (int col = 0; col < d; ++col) {
        const int row = col - q;
        if (row < 0 || row >= d) continue;
        const int two_m = rep.two_s() - 2 * col;
        e[static_cast<std::size_t>(col)] = norm * tensor_cg(rep, two_m, k, q, two_m + 2 * q);
      }
    }
  }
}

double TensorBasis::entry(int k, int q, int col) const {
  return entries_[static_cast<std::size_t>(kq_index(k, q))][static_cast<std::size_t>(col)];
}

Operator TensorBasis::tensor(int k, int q) const {
  if (k < 0 || k > k_max_ || std::abs(q) > k) {
    throw std::domain_error("TensorBasis::tensor: (K, q) outside the table");
  }
  const int d = rep_.dim();
  Matrix t = Matrix::Zero(d, d);
  for (int col = std::max(0, q); col < std::min(d, d + q); ++col) {
    t(col - q, col) = entry(k, q, col);
  }
  return {rep_, t};
}

std::vector<cplx> TensorBasis::coefficients(const Operator& a) const {
  if (!(a.rep() == rep_)) throw std::invalid_argument("TensorBasis: spin mismatch");
  const int d = rep_.dim();
  const Matrix& m = a.mat();
  std::vector<cplx> out(static_cast<std::size_t>(kq_count(k_max_)));
  for (int k = 0; k <= k_max_; ++k) {
    for (int q = -k; q <= k; ++q) {
      cplx acc = 0.0;
      for (int col = std::max(0, q); col < std::min(d, d + q); ++col) {
        acc += m(col - q, col) * entry(k, q, col);
      }
      out[static_cast<std::size_t>(kq_index(k, q))] = acc;
    }
  }
  return out;
}

Operator TensorBasis::reconstruct(const std::vector<cplx>& coeffs) const {
  if (coeffs.size() != static_cast<std::size_t>(kq_count(k_max_))) {
    throw std::invalid_argument("TensorBasis::reconstruct: coefficient count mismatch");
  }
  const int d = rep_.dim();
  Matrix m = Matrix::Zero(d, d);
  for (int k = 0; k <= k_max_; ++k) {
    for (int q = -k; q <= k; ++q) {
      const cplx c = coeffs[static_cast<std::size_t>(kq_index(k, q))];
      for (int col = std::max(0, q); col < std::min(d, d + q); ++col) {
        m(col - q, col) += c * entry(k, q, col);
      }
    }
  }
  return {rep_, m};
}

std::vector<cplx> operator_coefficients(const Operator& a) {
  return TensorBasis(a.rep()).coefficients(a);
}

Operator reconstruct(SpinRep rep, const std::vector<cplx>& coeffs) {
  return TensorBasis(rep).reconstruct(coeffs);
}

}  // namespace spinflow
