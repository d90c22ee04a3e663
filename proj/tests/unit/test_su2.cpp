#include <cmath>
#include <numbers>
#include <unsupported/Eigen/MatrixFunctions>

#include "doctest.h"
#include "../helpers.hpp"

using namespace spinflow;
using spinflow::testing::max_abs;

TEST_SUITE("su2") {

TEST_CASE("spin one half Sz") {
  const auto ops = spin_operators(SpinRep(1));
  CHECK(ops.sz.mat()(0, 0).real() == doctest::Approx(0.5));
  CHECK(ops.sz.mat()(1, 1).real() == doctest::Approx(-0.5));
  CHECK(std::abs(ops.sz.mat()(0, 1)) == 0.0);
}

TEST_CASE("commutators and Casimir") {
  for (int two_s = 1; two_s <= 40; ++two_s) {
    const SpinRep rep(two_s);
    const auto o = spin_operators(rep);
    const Matrix c = commutator(o.sx, o.sy).mat() - cplx(0, 1) * o.sz.mat();
    CHECK(max_abs(c) <= 1e-13 * std::max(1.0, rep.spin()));
    const Matrix cas = o.sx.mat() * o.sx.mat() + o.sy.mat() * o.sy.mat() + o.sz.mat() * o.sz.mat();
    const double ss = rep.spin() * (rep.spin() + 1);
    CHECK(max_abs(cas - ss * Matrix::Identity(rep.dim(), rep.dim())) <= 1e-12 * std::max(1.0, ss));
  }
}

TEST_CASE("spin rep") {
  const SpinRep r = SpinRep::from_spin(2.5);
  CHECK(r.two_s() == 5);
  CHECK(r.dim() * r.epsilon() == 1.0);
  CHECK_THROWS(SpinRep::from_spin(0.3));
  CHECK_THROWS(SpinRep(0));
}

TEST_CASE("coherent state values") {
  const SpinRep rep(7);
  const Vector north = coherent_state(rep, {0.0, 1.3});
  // |S,S> carrying the e^{-i S phi0} phase of the expansion.
  CHECK(std::abs(north(0) - std::polar(1.0, -rep.spin() * 1.3)) <= 1e-15);
  CHECK(north.tail(rep.dim() - 1).norm() <= 1e-15);

  const Vector half = coherent_state(SpinRep(1), {std::numbers::pi / 2, 0.0});
  CHECK(std::abs(half(0) - std::sqrt(0.5)) <= 1e-15);
  CHECK(std::abs(half(1) - std::sqrt(0.5)) <= 1e-15);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int two_s : {1, 4, 31, 200, 401}) {
    const Vector v = coherent_state(SpinRep(two_s), {std::numbers::pi * u(rng), 2 * std::numbers::pi * u(rng)});
    CHECK(std::abs(v.norm() - 1.0) <= 1e-13);
  }
}

// Oracle: exp[theta0 (S- e^{i phi0} - S+ e^{-i phi0}) / 2] |S,S>. With the
// opposite sign of the generator the exponential lands on (theta0, phi0 + pi).
TEST_CASE("coherent state matches displacement exponential") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int two_s = 1; two_s <= 20; ++two_s) {
    const SpinRep rep(two_s);
    const auto o = spin_operators(rep);
    const double th = std::numbers::pi * u(rng), ph = 2 * std::numbers::pi * u(rng);
    const Matrix gen = 0.5 * th *
                       (o.sminus.mat() * std::polar(1.0, ph) - o.splus.mat() * std::polar(1.0, -ph));
    const Vector oracle = gen.exp().col(0);
    const Vector v = coherent_state(rep, {th, ph});
    // Global phase e^{-i S phi0} between the two constructions.
    const Vector rephased = oracle * std::polar(1.0, -rep.spin() * ph);
    CHECK((rephased - v).cwiseAbs().maxCoeff() <= 1e-10);

    const Vector flipped = (-gen).exp().col(0);
    CHECK(std::norm(flipped.dot(coherent_state(rep, {th, ph + std::numbers::pi}))) >= 1.0 - 1e-12);
  }
}

TEST_CASE("coherent label canonicalization") {
  const CoherentLabel c = CoherentLabel{-0.5, 7.0}.canonical();
  CHECK(c.theta0 == doctest::Approx(0.5));
  CHECK(c.phi0 >= 0.0);
  CHECK(c.phi0 < 2 * std::numbers::pi);
  CHECK(c.phi0 == doctest::Approx(std::fmod(7.0 + std::numbers::pi, 2 * std::numbers::pi)));
}

TEST_CASE("Clebsch-Gordan basics") {
  for (int two_s = 1; two_s <= 12; ++two_s) {
    CHECK(clebsch_gordan(two_s, two_s, 0, 0, two_s, two_s) == doctest::Approx(1.0));
  }
  CHECK(clebsch_gordan(2, 2, 2, 0, 2, 0) == 0.0);
  CHECK_THROWS_AS(clebsch_gordan(2, 4, 2, 0, 2, 4), std::domain_error);
  CHECK_THROWS_AS(clebsch_gordan(2, 1, 2, 0, 2, 1), std::domain_error);
  CHECK_THROWS_AS(tensor_cg(SpinRep(2), 0, 3, 0, 0), std::domain_error);
}

TEST_CASE("Clebsch-Gordan unitarity") {
  for (int two_s = 1; two_s <= 40; two_s += (two_s < 10 ? 1 : 7)) {
    const SpinRep rep(two_s);
    for (int k = 0; k <= two_s; ++k) {
      for (int two_mp = -two_s; two_mp <= two_s; two_mp += 2) {
        double sum = 0.0;
        for (int q = -k; q <= k; ++q) {
          const int two_m = two_mp - 2 * q;
          if (std::abs(two_m) > two_s) continue;
          const double c = tensor_cg(rep, two_m, k, q, two_mp);
          sum += c * c;
        }
        CHECK(std::abs(sum - 1.0) <= 1e-12);
      }
    }
  }
}

// Oracle: diagonalize J^2 of two coupled spin-1 systems inside the M = 1
// sector and fix the sign by the Condon-Shortley rule <j1 j1; j2 (J - j1)|J J> > 0.
TEST_CASE("Clebsch-Gordan against coupled diagonalization") {
  const SpinRep one(2);
  const auto o = spin_operators(one);
  const Matrix id = Matrix::Identity(3, 3);
  const auto kron = [](const Matrix& a, const Matrix& b) {
    Matrix k(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
      for (int j = 0; j < a.cols(); ++j) k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return k;
  };
  const Matrix jx = kron(o.sx.mat(), id) + kron(id, o.sx.mat());
  const Matrix jy = kron(o.sy.mat(), id) + kron(id, o.sy.mat());
  const Matrix jz = kron(o.sz.mat(), id) + kron(id, o.sz.mat());
  const Matrix j2 = jx * jx + jy * jy + jz * jz;
  // Product index = 3 * i1 + i2 with m = 1 - i. M = 1 states: (m1,m2) = (1,0) -> 1, (0,1) -> 3.
  Eigen::Matrix2cd sector;
  sector << j2(1, 1), j2(1, 3), j2(3, 1), j2(3, 3);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> eig(sector);
  int idx = std::abs(eig.eigenvalues()(0) - 2.0) < 1e-9 ? 0 : 1;
  REQUIRE(std::abs(eig.eigenvalues()(idx) - 2.0) < 1e-9);
  Eigen::Vector2cd v = eig.eigenvectors().col(idx);
  // Phase: for J=1 = j1, the rule <1 1; 1 0|1 1> > 0.
  v *= std::abs(v(0)) / v(0);
  CHECK(clebsch_gordan(2, 2, 2, 0, 2, 2) == doctest::Approx(v(0).real()).epsilon(1e-12));
  CHECK(clebsch_gordan(2, 0, 2, 2, 2, 2) == doctest::Approx(v(1).real()).epsilon(1e-12));
  CHECK(clebsch_gordan(2, 2, 2, 0, 2, 2) == doctest::Approx(std::sqrt(0.5)));
}

TEST_CASE("tensor operators") {
  const SpinRep r3(6);
  const Matrix t00 = tensor_operator(r3, 0, 0).mat();
  CHECK(max_abs(t00 - Matrix::Identity(7, 7) / std::sqrt(7.0)) <= 1e-14);

  for (int two_s : {1, 2, 5, 10, 20, 40}) {
    const SpinRep rep(two_s);
    const TensorBasis basis(rep);
    double ortho = 0.0, herm = 0.0;
    for (int k = 0; k <= two_s; ++k) {
      for (int q = -k; q <= k; ++q) {
        const Matrix t = basis.tensor(k, q).mat();
        const Matrix tm = basis.tensor(k, -q).mat();
        herm = std::max(herm, max_abs(t.adjoint() - ((q % 2) ? -1.0 : 1.0) * tm));
        // Against a sample of partners to keep the cost bounded.
        for (int k2 = std::max(0, k - 2); k2 <= std::min(two_s, k + 2); ++k2) {
          for (int q2 = -k2; q2 <= k2; ++q2) {
            const cplx tr = (t.adjoint() * basis.tensor(k2, q2).mat()).trace();
            const double want = (k == k2 && q == q2) ? 1.0 : 0.0;
            ortho = std::max(ortho, std::abs(tr - want));
          }
        }
      }
    }
    CHECK(ortho <= 1e-12);
    CHECK(herm <= 1e-12);
  }
}

TEST_CASE("tensor orthonormality at large spin") {
  const SpinRep rep(200);
  for (auto [k, q] : {std::pair{200, 0}, {137, -50}, {3, 2}, {199, 199}}) {
    const Matrix t = tensor_operator(rep, k, q).mat();
    CHECK(std::abs((t.adjoint() * t).trace() - 1.0) <= 1e-11);
  }
}

TEST_CASE("operator coefficients") {
  for (int two_s : {1, 4, 9}) {
    const SpinRep rep(two_s);
    const auto c_id = operator_coefficients(Operator::identity(rep));
    CHECK(std::abs(c_id[0] - std::sqrt(double(rep.dim()))) <= 1e-12);
    for (std::size_t n = 1; n < c_id.size(); ++n) CHECK(std::abs(c_id[n]) <= 1e-12);

    // Oracle: dense trace against every tensor operator.
    const Operator sz = spin_operators(rep).sz;
    const auto c_sz = operator_coefficients(sz);
    for (int k = 0; k <= two_s; ++k) {
      for (int q = -k; q <= k; ++q) {
        const cplx direct = (sz.mat() * tensor_operator(rep, k, q).mat().adjoint()).trace();
        CHECK(std::abs(c_sz[std::size_t(kq_index(k, q))] - direct) <= 1e-13);
        if (!(k == 1 && q == 0)) CHECK(std::abs(direct) <= 1e-13);
      }
    }
    CHECK(std::abs(c_sz[std::size_t(kq_index(1, 0))]) > 0.1);

    std::mt19937_64 rng(two_s);
    const Operator a = spinflow::testing::random_hermitian(rep, rng);
    const auto c = operator_coefficients(a);
    CHECK(max_abs(reconstruct(rep, c).mat() - a.mat()) <= 1e-12);
    for (int k = 0; k <= two_s; ++k) {
      for (int q = -k; q <= k; ++q) {
        const cplx want = ((q % 2) ? -1.0 : 1.0) * std::conj(c[std::size_t(kq_index(k, q))]);
        CHECK(std::abs(c[std::size_t(kq_index(k, -q))] - want) <= 1e-12);
      }
    }
  }
}

TEST_CASE("density matrix invariants") {
  const SpinRep rep(2);
  Matrix bad = Matrix::Identity(3, 3) / 3.0;
  bad(0, 1) = 0.1;
  CHECK_THROWS_AS(DensityMatrix(Operator(rep, bad)), std::invalid_argument);
  CHECK_THROWS_AS(DensityMatrix(Operator(rep, Matrix::Identity(3, 3))), std::invalid_argument);
  Matrix neg = Matrix::Zero(3, 3);
  neg(0, 0) = 1.5;
  neg(1, 1) = -0.5;
  CHECK_THROWS_AS(DensityMatrix(Operator(rep, neg)), std::invalid_argument);
  CHECK(DensityMatrix::maximally_mixed(rep).purity() == doctest::Approx(1.0 / 3.0));
  CHECK(DensityMatrix::pure(rep, coherent_state(rep, {1.0, 2.0})).purity() == doctest::Approx(1.0));
}

}
