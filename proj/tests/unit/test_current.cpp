#include <cmath>
#include <numbers>

#include "doctest.h"
#include "spinflow/current.hpp"
#include "spinflow/dynamics.hpp"
#include "../helpers.hpp"

using namespace spinflow;
using spinflow::testing::low_k_symbol;
using spinflow::testing::random_density;

namespace {

constexpr double kPi = std::numbers::pi;

DensityMatrix equator_state(SpinRep rep) {
  return DensityMatrix::pure(rep, coherent_state(rep, {kPi / 2, 0.0}));
}

}  // namespace

TEST_SUITE("current") {

TEST_CASE("phi multiplier values") {
  for (int two_s = 1; two_s <= 40; ++two_s) {
    const SpinRep rep(two_s);
    const double s = rep.spin();
    CHECK(std::abs(phi_multiplier(rep, two_s) - std::sqrt(4 * s + 1) / (2 * s + 1)) <= 1e-12);
    const double e = rep.epsilon();
    CHECK(std::abs(phi_multiplier(rep, 0) - std::sqrt(2 - e * e + 2 * std::sqrt(1 - e * e))) <= 1e-15);
    const GammaMultipliers m(rep);
    for (int k = 0; k <= two_s; ++k) {
      CHECK(m.phi_k[std::size_t(k)] > 0.0);
      CHECK(m.phi_inv_k[std::size_t(k)] * m.phi_k[std::size_t(k)] == doctest::Approx(1.0));
      if (k > 0) CHECK(m.phi_k[std::size_t(k)] <= m.phi_k[std::size_t(k - 1)]);
    }
    CHECK_THROWS_AS(phi_multiplier(rep, two_s + 1), std::domain_error);
    CHECK_THROWS_AS(phi_multiplier(rep, -1), std::domain_error);
  }
}

TEST_CASE("phi multiplier semiclassical limit") {
  // 2 - Phi = eps^2 (2 L^2 + 1) / 2 + O(eps^4).
  for (int k : {0, 1, 3}) {
    for (int two_s : {100, 200, 400}) {
      const SpinRep rep(two_s);
      const double e2 = rep.epsilon() * rep.epsilon();
      const double lead = (2.0 * k * (k + 1) + 1) / 2;
      CHECK((2.0 - phi_multiplier(rep, k)) / e2 == doctest::Approx(lead).epsilon(1e-2));
    }
  }
}

TEST_CASE("Gamma on a constant") {
  const SpinRep rep(7);
  const GridPtr g = build_grid(rep);
  SpectralField f(7);
  f(0, 0) = 1.0;
  const double p0 = phi_multiplier(rep, 0), e2 = rep.epsilon() * rep.epsilon();
  const GridField out = apply_gamma(f, rep, g);
  const double want = (0.5 * p0 - 0.5 * e2 / p0) / std::sqrt(4 * kPi);
  for (double v : out.values()) CHECK(std::abs(v - want) <= 1e-14);
  CHECK_THROWS_AS(apply_gamma(SpectralField(8), rep, g), std::domain_error);
}

TEST_CASE("Gamma tends to the identity") {
  std::vector<double> err;
  for (int two_s : {100, 200, 400}) {
    const SpinRep rep(two_s);
    const Symbol w{rep, low_k_symbol(rep).spectral.with_k_max(6)};
    const GridPtr g = std::make_shared<SphereGrid>(16, 16);
    const GridField gw = apply_gamma(w.spectral, rep, g);
    const GridField plain = synthesize(w.spectral, g);
    err.push_back((gw - plain).max_abs() / plain.max_abs());
  }
  const double slope1 = std::log(err[0] / err[1]) / std::log(201.0 / 101.0);
  const double slope2 = std::log(err[1] / err[2]) / std::log(401.0 / 201.0);
  CHECK(slope1 == doctest::Approx(2.0).epsilon(0.1));
  CHECK(slope2 == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("Kerr generator matches the commutator") {
  std::mt19937_64 rng(19);
  for (int two_s : {4, 10, 20}) {
    const SpinRep rep(two_s);
    const GridPtr g = build_grid(rep);
    const DensityMatrix rho = random_density(rep, rng);
    const KerrHamiltonian h{1.3};
    const GridField exact = exact_time_derivative(rho, h.op(rep)).on(g);
    const GridField phase = kerr_phase_space_rhs(wigner_function(rho), h.chi, g);
    CHECK((exact - phase).max_abs() <= 1e-9 * exact.max_abs());
  }
}

TEST_CASE("Poisson-bracket form of the Kerr generator") {
  // 2 eps chi {Gamma W, cos^2 / (4 eps^2)} with {f, g} = (f_phi g_theta - f_theta g_phi) / sin.
  const SpinRep rep(12);
  const GridPtr g = build_grid(rep);
  std::mt19937_64 rng(23);
  const Symbol w = wigner_function(random_density(rep, rng));
  const double chi = 0.9, eps = rep.epsilon();
  const GridField gamma_w = apply_gamma(w, g);
  const GridField dphi = phi_derivative_rows(gamma_w);
  const GridField bracket = dphi.times_row([&](int i) {
    const double s = g->sin_theta(i), c = g->cos_theta(i);
    return 2 * eps * chi * (-2 * c * s / (4 * eps * eps)) / s;
  });
  const GridField rhs = kerr_phase_space_rhs(w, chi, g);
  CHECK((bracket - rhs).max_abs() <= 1e-9 * rhs.max_abs());
}

TEST_CASE("Kerr current satisfies the continuity equation") {
  const SpinRep rep(20);
  const GridPtr g = build_grid(rep);
  const DensityMatrix rho0 = equator_state(rep);
  const KerrHamiltonian h{1.0};
  for (double tau : {0.0, 0.32, 1.5}) {
    const DensityMatrix rho = evolve_kerr(rho0, h, tau);
    const Symbol w = wigner_function(rho);
    const GridField dwdt = exact_time_derivative(rho, h.op(rep)).on(g);
    const CurrentField j = kerr_current(w, h.chi, g);
    CHECK(j.theta_vanishes());
    const ContinuityResidual r = continuity_residual(dwdt, j);
    CHECK(r.max_abs <= 1e-9 * dwdt.max_abs());
    CHECK(std::abs(integrate(dwdt)) <= 1e-10 * dwdt.max_abs());
    CHECK(std::abs(integrate(divergence(j))) <= 1e-10 * dwdt.max_abs());

    CHECK(std::abs(kerr_current_at(w, h.chi, g->theta(4), g->phi(9)) - j.j_phi(4, 9)) <= 1e-11 * j.j_phi.max_abs());

    double on_equator = 0.0;
    for (int n = 0; n < 37; ++n)
      on_equator = std::max(on_equator, std::abs(kerr_current_at(w, h.chi, kPi / 2, 2 * kPi * n / 37)));
    if (tau == 0.0) {
      // The initial state is symmetric under theta -> pi - theta, so J_phi
      // vanishes along the equator.
      CHECK(on_equator <= 1e-9 * j.j_phi.max_abs());
      CHECK(j.equator_factor);
    } else {
      // Later the symmetry is only (theta, phi) -> (pi - theta, -phi) and
      // dW/dt is nonzero on the equator; continuity then requires
      // d_phi J_phi = -dW/dt there.
      CHECK(!j.equator_factor);
      CHECK(on_equator > 1e-3 * j.j_phi.max_abs());
      const Symbol dw = exact_time_derivative(rho, h.op(rep));
      const double hstep = 1e-5;
      double err = 0.0, scale = 0.0;
      for (int n = 0; n < 37; ++n) {
        const double ph = 2 * kPi * n / 37;
        const double dj = (kerr_current_at(w, h.chi, kPi / 2, ph + hstep) -
                           kerr_current_at(w, h.chi, kPi / 2, ph - hstep)) /
                          (2 * hstep);
        err = std::max(err, std::abs(dj + dw.at(kPi / 2, ph)));
        scale = std::max(scale, std::abs(dw.at(kPi / 2, ph)));
      }
      CHECK(scale > 0.1);
      CHECK(err <= 1e-6 * scale);
      CHECK(kerr_equator_current_max(w, h.chi, *g) ==
            doctest::Approx(on_equator).epsilon(0.05));
    }
  }
}

TEST_CASE("continuity residual of a random Kerr state") {
  const SpinRep rep(4);
  const GridPtr g = build_grid(rep);
  std::mt19937_64 rng(41);
  const DensityMatrix rho = random_density(rep, rng);
  const GridField dwdt = exact_time_derivative(rho, KerrHamiltonian{1.0}.op(rep)).on(g);
  const ContinuityResidual r = continuity_residual(dwdt, kerr_current(wigner_function(rho), 1.0, g));
  CHECK(r.max_abs <= 1e-9 * dwdt.max_abs());

  const ContinuityResidual zero = continuity_residual(GridField(g), CurrentField{GridField(g), GridField(g)});
  CHECK(zero.max_abs == 0.0);
}

TEST_CASE("Kerr current is antisymmetric about the equator") {
  const SpinRep rep(20);
  const GridPtr g = build_grid(rep);
  const CurrentField j = kerr_current(wigner_function(equator_state(rep)), 1.0, g);
  const int n = g->n_theta();
  double err = 0.0;
  for (int i = 0; i < n / 2; ++i)
    for (int c = 0; c < g->n_phi(); ++c) err = std::max(err, std::abs(j.j_phi(i, c) + j.j_phi(n - 1 - i, c)));
  CHECK(err <= 1e-12 * j.j_phi.max_abs());
  CHECK(j.j_phi.max_abs() > 0.0);
}

TEST_CASE("semiclassical current") {
  const SpinRep rep(20);
  const GridPtr g = build_grid(rep);
  const Symbol w0 = wigner_function(equator_state(rep));
  const GridField wt = twa_evolve(w0, {1.0}, 1.5, g);
  const CurrentField j = semiclassical_current(wt, 1.0, rep);
  CHECK(j.theta_vanishes());
  for (int i = 0; i < g->n_theta(); ++i) {
    const double s2 = std::sin(2 * g->theta(i));
    for (int c = 0; c < g->n_phi(); ++c) {
      CHECK(std::abs(j.j_phi(i, c) - 0.5 / rep.epsilon() * s2 * wt(i, c)) <= 1e-12 * j.j_phi.max_abs());
      // Zeros of J follow zeros of W away from the equator and poles.
      CHECK((j.j_phi(i, c) > 0) == ((wt(i, c) > 0) == (s2 > 0)));
    }
  }
}

TEST_CASE("quantum and semiclassical currents converge") {
  std::vector<double> err;
  for (int two_s : {100, 200, 400}) {
    const SpinRep rep(two_s);
    const Symbol w{rep, low_k_symbol(rep).spectral.with_k_max(6)};
    const GridPtr g = std::make_shared<SphereGrid>(16, 16);
    const CurrentField jq = kerr_current(w, 1.0, g);
    const CurrentField js = semiclassical_current(w.on(g), 1.0, rep);
    err.push_back((jq.j_phi - js.j_phi).max_abs() / jq.j_phi.max_abs());
  }
  CHECK(err[1] < err[0] / 3.5);
  CHECK(err[2] < err[1] / 3.5);
  CHECK(err[0] <= 50.0 / (101.0 * 101.0));
}

TEST_CASE("linear current") {
  const SpinRep rep(12);
  const GridPtr g = build_grid(rep);
  std::mt19937_64 rng(5);
  const DensityMatrix rho = random_density(rep, rng);
  const Symbol w = wigner_function(rho);
  const GridField wg = w.on(g);
  const double omega = 1.4;
  const CurrentField j = linear_current(w, {0.0, 0.0, omega}, g);
  CHECK(j.j_theta.max_abs() == 0.0);
  CHECK(!j.equator_factor);
  for (int i = 0; i < g->n_theta(); ++i)
    for (int c = 0; c < g->n_phi(); ++c)
      CHECK(std::abs(j.j_phi(i, c) - omega * g->sin_theta(i) * wg(i, c)) <= 1e-12 * wg.max_abs());
  // Near the poles the current dies out with sin(theta).
  CHECK(std::abs(j.j_phi(0, 0)) <= omega * g->sin_theta(0) * wg.max_abs() * (1 + 1e-12));

  const GridField dwdt = exact_time_derivative(rho, LinearHamiltonian{{0, 0, omega}}.op(rep)).on(g);
  CHECK(continuity_residual(dwdt, j).max_abs <= 1e-10 * dwdt.max_abs());
}

TEST_CASE("linear current with a tilted axis") {
  const SpinRep rep(10);
  const GridPtr g = build_grid(rep, 2.0);
  std::mt19937_64 rng(50);
  const DensityMatrix rho = random_density(rep, rng);
  const std::array<double, 3> a{0.4, -0.7, 1.1};
  const GridField dwdt = exact_time_derivative(rho, LinearHamiltonian{a}.op(rep)).on(g);
  const CurrentField j = linear_current(wigner_function(rho), a, g);
  CHECK(!j.theta_vanishes());
  CHECK(continuity_residual(dwdt, j).max_abs <= 1e-10 * dwdt.max_abs());
  CHECK(std::abs(integrate(divergence(j))) <= 1e-10 * dwdt.max_abs());
}

}
