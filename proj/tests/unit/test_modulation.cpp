#include <cmath>
#include <span>

#include "doctest.h"
#include "fixtures.hpp"
#include "gzk/errors.hpp"
#include "gzk/functionals.hpp"
#include "gzk/linearized.hpp"
#include "gzk/modulation.hpp"
#include "gzk/spectral.hpp"

using namespace gzk;

TEST_CASE("a translated ground state decomposes to its translation") {
  const auto& b = fixtures::basis4();
  const auto& q = b.ground->profile;
  for (auto [a1, a2] : {std::pair{0.37, -0.21}, std::pair{-1.3, 0.8}, std::pair{2.5, 0.0}}) {
    // u(x) = Q(x - a)
    const RealField2D u = shift(q, -a1, -a2);
    const auto pt = decompose(u, b, a1 + 0.05, a2 - 0.05);
    CHECK(std::abs(pt.y1 - a1) < 1e-9);
    CHECK(std::abs(pt.y2 - a2) < 1e-9);
    CHECK(pt.l2_eps < 1e-9);
  }
}

TEST_CASE("orthogonality conditions hold after decomposition") {
  const auto& b = fixtures::basis4();
  RealField2D u = shift(b.ground->profile, -0.4, 0.3);
  RealField2D bump = random_smooth_field(b.grid(), 21, 1.5);
  u.axpy(0.05, bump);
  const auto pt = decompose(u, b, 0.4, -0.3);
  CHECK(std::abs(pt.ortho1) < 1e-10);
  CHECK(std::abs(pt.ortho2) < 1e-10);
  CHECK(std::abs(inner(pt.eps, b.q1)) < 1e-10);
  // eps reconstructs u
  RealField2D back = pt.eps;
  back += b.ground->profile;
  back = shift(back, -pt.y1, -pt.y2);
  double err = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) err = std::max(err, std::abs(back[k] - u[k]));
  CHECK(err < 1e-11);
  CHECK(pt.h1_eps == doctest::Approx(h1_norm(pt.eps)).epsilon(1e-12));
}

TEST_CASE("far from the tube decomposition is refused") {
  const auto& b = fixtures::basis4();
  RealField2D u(b.grid(), 0.0);
  CHECK_THROWS_AS(decompose(u, b, 0.0, 0.0), ModulationError);
  // Q shifted far from the guess
  CHECK_THROWS_AS(decompose(shift(b.ground->profile, -8.0, 0.0), b, 0.0, 0.0), ModulationError);
}

TEST_CASE("tube distance matches a brute-force search") {
  const auto q = fixtures::ground4();
  const auto& g = q->grid();
  RealField2D u = shift(q->profile, -1.0, 0.5);
  u.axpy(0.03, random_smooth_field(g, 5, 1.0));
  u.axpy(0.02, shift(q->profile, -2.0, 0.0));
  const auto td = tube_distance(u, *q);
  // Oracle: golden-ratio-free grid search of |u - Q(. - y)|_H1 on a 1/20 lattice, then local refine.
  double best = 1e300, by1 = 0, by2 = 0;
  for (double y1 = 0.0; y1 <= 2.0; y1 += 0.05)
    for (double y2 = -0.5; y2 <= 1.5; y2 += 0.05) {
      RealField2D d = u;
      d -= shift(q->profile, -y1, -y2);
      const double h = h1_norm(d);
      if (h < best) best = h, by1 = y1, by2 = y2;
    }
  for (double step = 0.01; step > 1e-5; step /= 4) {
    for (int it = 0; it < 20; ++it) {
      bool moved = false;
      for (auto [d1, d2] : {std::pair{step, 0.0}, std::pair{-step, 0.0}, std::pair{0.0, step}, std::pair{0.0, -step}}) {
        RealField2D d = u;
        d -= shift(q->profile, -(by1 + d1), -(by2 + d2));
        const double h = h1_norm(d);
        if (h < best) best = h, by1 += d1, by2 += d2, moved = true;
      }
      if (!moved) break;
    }
  }
  CHECK(td.distance <= best + 1e-9);
  CHECK(td.distance == doctest::Approx(best).epsilon(1e-6));
  CHECK(std::abs(td.y1 - by1) < 1e-3);
  CHECK(std::abs(td.y2 - by2) < 1e-3);
  CHECK(tube_distance(q->profile, *q).distance < 1e-9);
}

TEST_CASE("periodic image selection") {
  const auto q = fixtures::ground4();
  const RealField2D u = shift(q->profile, -15.0, 0.0);
  const auto near0 = tube_distance(u, *q, 0.0);
  const auto near20 = tube_distance(u, *q, 20.0);
  CHECK(near0.y1 == doctest::Approx(15.0).epsilon(1e-8));
  CHECK(near20.y1 == doctest::Approx(15.0).epsilon(1e-8));
  const auto nearm = tube_distance(u, *q, -20.0);
  CHECK(nearm.y1 == doctest::Approx(-17.0).epsilon(1e-8));
}

TEST_CASE("remainder R against its direct expansion") {
  const auto q = fixtures::ground4();
  RealField2D eps = random_smooth_field(q->grid(), 3, 1.0);
  eps *= 0.1;
  // R = d1 P[(Q + eps)^4 - Q^4 - 4 Q^3 eps], in difference form and with the
  // whole polynomial projected once (staged products would truncate Q^3).
  const RealField2D* fields[] = {&q->profile, &eps};
  RealField2D direct = dealiased_map(fields, 4, [](std::span<const double> v) {
    const double a = v[0], e = v[1];
    return std::pow(a + e, 4) - std::pow(a, 4) - 4 * std::pow(a, 3) * e;
  });
  direct = ddx(direct, Axis::kX1);
  const RealField2D r = remainder_R(eps, q->profile, 4);
  RealField2D d = r;
  d -= direct;
  CHECK(l2_norm(d) < 1e-10 * l2_norm(r));
  CHECK(remainder_R(RealField2D(q->grid()), q->profile, 4).max_abs() == 0.0);
  // quadratic in eps at leading order
  RealField2D half = eps;
  half *= 0.5;
  CHECK(l2_norm(remainder_R(half, q->profile, 4)) / l2_norm(r) == doctest::Approx(0.25).epsilon(0.1));
}

TEST_CASE("parameter system at eps = 0") {
  const auto& b = fixtures::basis4();
  const auto r = solve_parameter_system(RealField2D(b.grid()), b);
  CHECK(r.y1p == 1.0);
  CHECK(r.y2p == 0.0);
}

TEST_CASE("tracking a travelling ground state") {
  const auto& b = fixtures::basis4();
  std::vector<RealField2D> snaps;
  std::vector<double> times;
  for (int i = 0; i < 6; ++i) {
    times.push_back(0.1 * i);
    snaps.push_back(shift(b.ground->profile, -0.1 * i, 0.0));
  }
  const auto tr = track(snaps, times, b);
  CHECK(tr.stop_reason.empty());
  REQUIRE(tr.points.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) CHECK(std::abs(tr.points[i].y1 - 0.1 * i) < 1e-9);
  const auto dv = track_derivatives(tr, 2, 4);
  CHECK(dv.y1p == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(std::abs(dv.y2p) < 1e-8);

  // a snapshot far away stops the track
  snaps.push_back(RealField2D(b.grid()));
  times.push_back(0.6);
  const auto stopped = track(snaps, times, b);
  CHECK_FALSE(stopped.stop_reason.empty());
  CHECK(stopped.points.size() == 6);
  CHECK(stopped.stop_time == doctest::Approx(0.6));
}
