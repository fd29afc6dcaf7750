// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>

#include "nhfeast/contour.hpp"

using namespace nhfeast;

namespace {

constexpr double kPi = std::numbers::pi;
const Complex kI(0.0, 1.0);

std::vector<Complex> square(double h) { return {Complex(-h, -h), Complex(h, -h), Complex(h, h), Complex(-h, h)}; }

} // namespace

TEST_CASE("gauss-legendre rule") {
  const GaussLegendre g = gauss_legendre(5);
  double sum = 0.0, x4 = 0.0;
  for (std::size_t i = 0; i < 5; ++i) {
    sum += g.weights[i];
    x4 += g.weights[i] * std::pow(g.nodes[i], 4);
  }
  CHECK(sum == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(x4 == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(g.nodes.front() < g.nodes.back());
}

TEST_CASE("single-node circle") {
  const Contour c = gen_ellipse({}, 1);
  REQUIRE(c.size() == 1);
  CHECK(std::abs(c.nodes()[0] - Complex(-1.0)) < 1e-15);
  CHECK(std::abs(c.weights()[0] - Complex(-1.0)) < 1e-15);
  CHECK(std::abs(eval_filter(c, 0.0) - 1.0) < 1e-15);
}

TEST_CASE("four-node circle sits at odd multiples of 45 degrees") {
  const Contour c = gen_ellipse({}, 4);
  for (std::size_t j = 0; j < 4; ++j) {
    const double theta = kPi / 4.0 + kPi / 2.0 * static_cast<double>(j);
    CHECK(std::abs(c.nodes()[j] - std::polar(1.0, theta)) < 1e-15);
    CHECK(std::abs(c.weights()[j] - std::polar(1.0, theta) / 4.0) < 1e-15);
  }
}

TEST_CASE("sixteen nodes on the shifted circle") {
  const Contour c = gen_ellipse({Complex(0.3, 0.2), 0.5}, 16);
  REQUIRE(c.size() == 16);
  for (std::size_t j = 0; j < 16; ++j) {
    CHECK(std::abs(std::abs(c.nodes()[j] - Complex(0.3, 0.2)) - 0.5) < 1e-15);
    for (std::size_t k = 0; k < j; ++k) CHECK(std::abs(c.nodes()[j] - c.nodes()[k]) > 1e-3);
  }
  CHECK(c.alpha() == doctest::Approx(std::sqrt(0.13) + 0.5).epsilon(1e-15));
  CHECK(c.alpha() == doctest::Approx(0.8605551).epsilon(1e-7));
}

TEST_CASE("filter closed form on the unit circle") {
  const Contour c = gen_ellipse({}, 8);
  CHECK(std::abs(eval_filter(c, 0.0) - 1.0) < 1e-15);
  CHECK(std::abs(eval_filter(c, 2.0) - 1.0 / 257.0) < 1e-15);
  CHECK(std::abs(eval_filter(c, 2.0) - 3.8911e-3) < 1e-7);
  CHECK(std::abs(eval_filter(c, 0.5) - 1.0 / (1.0 + std::pow(0.5, 8))) < 1e-15);
  CHECK(std::abs(eval_filter(c, 0.5) - 0.9961089) < 1e-7);
}

TEST_CASE("filter decays and respects conjugation") {
  const Contour c = gen_ellipse({Complex(0.2, 0.0), 1.5}, 16);
  REQUIRE(c.symmetric_real_axis());
  double wsum = 0.0;
  for (Complex w : c.weights()) wsum += std::abs(w);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-6.0, 6.0);
  for (int k = 0; k < 200; ++k) {
    const Complex l(u(rng), u(rng));
    const Complex r = eval_filter(c, l);
    CHECK(eval_filter(c, std::conj(l)) == std::conj(r));
    double dist = 1e300;
    for (Complex z : c.nodes()) dist = std::min(dist, std::abs(z - l));
    CHECK(std::abs(r) <= wsum / dist * (1.0 + 1e-12));
  }
}

TEST_CASE("filter singular on a node") {
  const Contour c = gen_ellipse({}, 8);
  CHECK_THROWS_AS(eval_filter(c, c.nodes()[3]), Error);
  const std::vector<Complex> pts = {0.0, c.nodes()[0], 2.0};
  const auto grid = eval_filter(c, std::span<const Complex>(pts));
  REQUIRE(grid.size() == 3);
  CHECK(grid[0].has_value());
  CHECK_FALSE(grid[1].has_value());
  CHECK(std::abs(*grid[2] - 1.0 / 257.0) < 1e-15);
}

TEST_CASE("ellipse geometry") {
  Ellipse e;
  e.center = Complex(1.0, 1.0);
  e.radius = 2.0;
  e.aspect = 0.5;
  e.rotation = kPi / 2.0;
  const Contour c = gen_ellipse(e, 32);
  // Rotated by 90 degrees the long axis is vertical.
  CHECK(inside(c, Complex(1.0, 2.9)));
  CHECK_FALSE(inside(c, Complex(2.9, 1.0)));
  // No closed form off the circle; the filter is still close to 1 at the center.
  CHECK(std::abs(eval_filter(c, e.center) - 1.0) < 1e-6);
  CHECK_THROWS_AS(gen_ellipse({Complex(0.0), -1.0}, 8), Error);
  CHECK_THROWS_AS(gen_ellipse({}, 0), Error);
}

TEST_CASE("inside tests") {
  const Contour circle = gen_ellipse({}, 8);
  CHECK(inside(circle, 0.0));
  CHECK_FALSE(inside(circle, 2.0));
  CHECK_FALSE(inside(circle, 1.0));
  const Contour sq = gen_polygon(square(1.0), 4);
  CHECK(inside(sq, Complex(0.999, 0.999)));
  CHECK_FALSE(inside(sq, Complex(1.001, 0.0)));
}

TEST_CASE("polygon nodes and weights") {
  const Contour sq = gen_polygon(square(0.5), 4);
  CHECK(sq.size() == 16);
  Complex total = 0.0;
  for (Complex w : sq.weights()) total += w;
  CHECK(std::abs(total) < 1e-15);
  // First edge runs from (-0.5,-0.5) to (0.5,-0.5): midpoints of quarters.
  CHECK(std::abs(sq.nodes()[0] - Complex(-0.375, -0.5)) < 1e-15);
  CHECK(std::abs(sq.weights()[0] - Complex(1.0) / (4.0 * 2.0 * kPi * kI)) < 1e-15);

  const Contour gl = gen_polygon(square(1.0), 8, QuadratureRule::GaussLegendre);
  Complex gsum = 0.0;
  for (Complex w : gl.weights()) gsum += w;
  CHECK(std::abs(gsum) < 1e-15);
  CHECK(std::abs(eval_filter(gl, 0.0) - 1.0) < 1e-3);
  // Midpoint nodes are less accurate than Gauss points at this order.
  CHECK(std::abs(eval_filter(gen_polygon(square(1.0), 8), 0.0) - 1.0) == doctest::Approx(1.6577148530694e-3));
  for (Complex z : gl.nodes()) CHECK(std::abs(std::max(std::abs(z.real()), std::abs(z.imag())) - 1.0) < 1e-15);
}

TEST_CASE("polygon orientation and validation") {
  std::vector<Complex> cw = square(1.0);
  std::reverse(cw.begin(), cw.end());
  const Contour c = gen_polygon(cw, 4);
  CHECK(std::abs(eval_filter(c, 0.0) - 1.0) < 1e-2);
  CHECK(inside(c, 0.0));

  CHECK_THROWS_AS(gen_polygon({0.0, 1.0, 2.0}, 4), Error);
  CHECK_THROWS_AS(gen_polygon({0.0, 1.0}, 4), Error);
  // Bow tie.
  CHECK_THROWS_AS(gen_polygon({Complex(0, 0), Complex(1, 1), Complex(1, 0), Complex(0, 1)}, 4), Error);
  CHECK_THROWS_AS(gen_polygon(square(1.0), 0), Error);
}

TEST_CASE("conjugate pairing") {
  const Contour c = gen_ellipse({Complex(0.3, 0.0), 1.0}, 16);
  CHECK(c.symmetric_real_axis());
  CHECK(c.half_contour_available());
  for (std::size_t j = 0; j < c.size(); ++j)
    CHECK(c.nodes()[c.conjugate_partner(j)] == std::conj(c.nodes()[j]));
  CHECK_FALSE(gen_ellipse({Complex(0.3, 0.2), 1.0}, 16).symmetric_real_axis());
  // An odd count on a circle puts a node on the axis.
  CHECK_FALSE(gen_ellipse({}, 5).half_contour_available());
}

TEST_CASE("work plans") {
  CHECK(plan_work(PencilKind::ComplexGeneral, false, 16, false) == WorkPlan{16, 32});
  CHECK(plan_work(PencilKind::ComplexSymmetric, false, 16, false) == WorkPlan{16, 16});
  CHECK(plan_work(PencilKind::RealGeneral, false, 16, true) == WorkPlan{8, 16});
  CHECK(plan_work(PencilKind::RealGeneral, false, 16, false) == WorkPlan{16, 32});
  CHECK(plan_work(PencilKind::RealSymmetric, false, 16, true) == WorkPlan{8, 8});
  CHECK(plan_work(PencilKind::ComplexGeneral, false, 16, false, false) == WorkPlan{32, 32});
  CHECK_THROWS_AS(plan_work(PencilKind::RealGeneral, false, 15, true), Error);
}
