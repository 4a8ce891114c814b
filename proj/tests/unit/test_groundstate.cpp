#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "gzk/errors.hpp"
#include "gzk/functionals.hpp"
#include "gzk/groundstate.hpp"
#include "gzk/spectral.hpp"
#include "radial_oracle.hpp"

using namespace gzk;

namespace {

double q2(double q, int) { return q * q; }

int center(const SpectralGrid& g) { return g.n1() / 2; }

}  // namespace

TEST_CASE("p = 4 ground state solves its equation and passes the shape checks") {
  const GroundState& q = *fixtures::ground4();
  CHECK(q.residual < 1e-10 * std::sqrt(q.mass));
  CHECK(equation_residual(q.profile, 4, 1.0) == doctest::Approx(q.residual).epsilon(1e-3).scale(1e-12));
  const auto checks = check_ground_state(q);
  CHECK(checks.ok());
  CHECK(checks.positive);
  CHECK(checks.peak_at_origin);
  CHECK(checks.monotone_axes);
  CHECK(checks.edge_ratio < 1e-6);  // the true tail Q(L/2) ~ 6e-8 Q(0)
  CHECK(checks.resolution_floor < 1e-4 * q.peak());
  // decay rate sqrt(c) = 1 to within 5%
  CHECK(std::abs(checks.decay_slope + 1.0) < 0.05);
  CHECK(q.peak() == q.profile(center(q.grid()), center(q.grid())));
}

TEST_CASE("Pohozaev identities") {
  // Multiplying by Q and by x.grad Q gives, in two dimensions,
  //   |grad Q|^2 + |Q|^2 = int Q^{p+1},   |Q|^2 = 2/(p+1) int Q^{p+1}.
  const GroundState& q = *fixtures::ground4();
  const double m = mass(q.profile);
  const double g = gradient_norm_squared(q.profile);
  const double pw = integrate_power(q.profile, 5);
  CHECK(pw == doctest::Approx(2.5 * m).epsilon(1e-9));
  CHECK(g == doctest::Approx(1.5 * m).epsilon(1e-9));
  CHECK(std::abs(q.pohozaev_gap) < 1e-8 * pw);
  CHECK(q.mass == doctest::Approx(m).epsilon(1e-14));
  // E[Q] = M/4 for p = 4.
  CHECK(energy(q.profile, 4) == doctest::Approx(0.25 * m).epsilon(1e-9));
  CHECK(q.energy == doctest::Approx(0.25 * m).epsilon(1e-9));
}

TEST_CASE("ground state agrees with the radial shooting oracle") {
  const GroundState& q = *fixtures::ground4();
  const auto ref = oracle::shoot_ground_state(4);
  CHECK(std::abs(q.peak() - ref.q0) < 1e-5);
  CHECK(q.mass == doctest::Approx(oracle::radial_integral(ref, q2)).epsilon(1e-6));
  // profile along the x1 axis
  const auto& g = q.grid();
  double err = 0.0;
  for (int i = center(g); i < g.n1(); i += 8) err = std::max(err, std::abs(q.profile(i, center(g)) - ref(g.x1(i))));
  CHECK(err < 1e-5);
}

TEST_CASE("p = 3 and p = 5 against the oracle") {
  // p = 5 is narrower in the complex plane; 256 points leave ~7e-5 at the
  // peak, 512 resolve it to round-off.
  for (int p : {3, 5}) {
    CAPTURE(p);
    const GroundState q = solve_ground_state(p, SpectralGrid(512, 32.0));
    const auto ref = oracle::shoot_ground_state(p);
    CHECK(std::abs(q.peak() - ref.q0) < 1e-5);
    CHECK(q.mass == doctest::Approx(oracle::radial_integral(ref, q2)).epsilon(1e-4));
    CHECK(check_ground_state(q).ok());
  }
}

TEST_CASE("grid refinement leaves the profile unchanged") {
  // Spectral convergence: 512 points are already at round-off, and the
  // default 256 grid is within its truncation floor.
  const GroundState a = solve_ground_state(4, SpectralGrid(512, 32.0));
  const GroundState b = solve_ground_state(4, SpectralGrid(1024, 32.0));
  RealField2D d(a.grid());
  for (int i = 0; i < 512; ++i)
    for (int j = 0; j < 512; ++j) d(i, j) = a.profile(i, j) - b.profile(2 * i, 2 * j);
  CHECK(l2_norm(d) < 1e-8);

  const GroundState& coarse = *fixtures::ground4();
  RealField2D e(coarse.grid());
  for (int i = 0; i < 256; ++i)
    for (int j = 0; j < 256; ++j) e(i, j) = coarse.profile(i, j) - a.profile(2 * i, 2 * j);
  CHECK(l2_norm(e) < 1e-6);
  CHECK(e.max_abs() < check_ground_state(coarse).resolution_floor);
}

TEST_CASE("dilation") {
  const auto q = fixtures::ground4();
  const GroundState same = dilate(*q, 1.0);
  double err = 0.0;
  for (std::size_t k = 0; k < same.profile.size(); ++k) err = std::max(err, std::abs(same.profile[k] - q->profile[k]));
  CHECK(err < 1e-12);

  const GroundState q2c = dilate(*q, 2.0);
  CHECK(q2c.c == 2.0);
  CHECK(equation_residual(q2c.profile, 4, 2.0) < 1e-8);
  // |Q_c|^2 = c^{2/(p-1) - 1} |Q|^2
  // Q_c is narrower, so the 256 grid resolves it less well than Q itself
  CHECK(q2c.mass == doctest::Approx(q->mass * std::pow(2.0, -1.0 / 3)).epsilon(1e-5));
  CHECK(q2c.peak() == doctest::Approx(q->peak() * std::pow(2.0, 1.0 / 3)).epsilon(1e-4));
  const auto checks = check_ground_state(q2c);
  CHECK(std::abs(checks.decay_slope + std::sqrt(2.0)) < 0.05 * std::sqrt(2.0));

  CHECK_THROWS_AS(dilate(*q, 0.0), InvalidArgument);
  CHECK_THROWS_AS(dilate(*q, -1.0), InvalidArgument);
}

TEST_CASE("Lambda generator") {
  const SpectralGrid g(128, 16.0);
  auto f = RealField2D::sample(g, [](double x, double y) { return std::exp(-(x * x + y * y)); });
  // Lambda e^{-r^2} = e^{-r^2}/3 - r^2 e^{-r^2} for p = 4
  auto want = RealField2D::sample(g, [](double x, double y) {
    const double r2 = x * x + y * y;
    return (1.0 / 3 - r2) * std::exp(-r2);
  });
  const RealField2D lf = lambda_apply(f, 4);
  double err = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) err = std::max(err, std::abs(lf[k] - want[k]));
  CHECK(err < 1e-11);

  // (Q, Lambda Q) = (1/(p-1) - 1/2) |Q|^2 = -|Q|^2/6
  const auto& q = fixtures::ground4()->profile;
  CHECK(inner(q, lambda_apply(q, 4)) / mass(q) == doctest::Approx(-1.0 / 6).epsilon(1e-9));
}

TEST_CASE("unstable initial data") {
  const GroundState& q = *fixtures::ground4();
  for (int n : {5, 10, 20}) {
    CAPTURE(n);
    const double lam = 1.0 + 1.0 / n;
    const RealField2D u = unstable_initial_data(q, n);
    // mass is invariant under the L2 scaling
    CHECK(mass(u) == doctest::Approx(q.mass).epsilon(1e-10));
    // E[lam Q(lam x)] = lam^2 G/2 - lam^3 P/5
    const double G = gradient_norm_squared(q.profile);
    const double P = integrate_power(q.profile, 5);
    const double want = 0.5 * (lam * lam - 1) * G - (lam * lam * lam - 1) * P / 5;
    CHECK(energy(u, 4) - q.energy == doctest::Approx(want).epsilon(1e-8));
    CHECK(energy(u, 4) < q.energy);
    // peak scales with lambda
    CHECK(u(128, 128) == doctest::Approx(lam * q.peak()).epsilon(1e-12));
  }
  CHECK_THROWS_AS(unstable_initial_data(q, 0), InvalidArgument);
  // H1 distance to Q shrinks with n
  double prev = 1e300;
  for (int n : {5, 10, 20, 40}) {
    RealField2D d = unstable_initial_data(q, n);
    d -= q.profile;
    const double h = h1_norm(d);
    CHECK(h < prev);
    prev = h;
  }
}

TEST_CASE("radial log slope of a pure exponential") {
  const SpectralGrid g(256, 40.0);
  auto f = RealField2D::sample(g, [](double x, double y) {
    const double r = std::hypot(x, y);
    return std::exp(-1.7 * r) / std::sqrt(r + 1e-300);
  });
  CHECK(radial_log_slope(f, 2.0, 8.0) == doctest::Approx(-1.7).epsilon(1e-9));
}

TEST_CASE("failures are reported") {
  CHECK_THROWS_AS(solve_ground_state(1, SpectralGrid(64, 32.0)), InvalidArgument);
  // Too coarse a grid cannot reach the tolerance or produces a negative lobe.
  CHECK_THROWS_AS(solve_ground_state(4, SpectralGrid(16, 32.0)), Error);
  RealField2D neg(SpectralGrid(64, 32.0), -1.0);
  GroundState bogus{4, 1.0, neg};
  CHECK_FALSE(check_ground_state(bogus).ok());
}
