// SPDX-License-Identifier: Apache-2.0
#include "nhfeast/contour.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace nhfeast {

namespace {

constexpr Complex kI{0.0, 1.0};
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double node_scale(const std::vector<Complex>& nodes) {
  double s = 1.0;
  for (const auto& z : nodes) s = std::max(s, std::abs(z));
  return s;
}

double cross(Complex a, Complex b) { return a.real() * b.imag() - a.imag() * b.real(); }

double signed_area(const std::vector<Complex>& v) {
  double area = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) area += cross(v[k], v[(k + 1) % v.size()]);
  return 0.5 * area;
}

bool on_segment(Complex p, Complex a, Complex b, double tol) {
  const Complex d = b - a;
  const double len = std::abs(d);
  if (len == 0.0) return std::abs(p - a) <= tol;
  if (std::abs(cross(d, p - a)) / len > tol) return false;
  const double t = ((p - a) * std::conj(d)).real() / (len * len);
  return t >= -tol / len && t <= 1.0 + tol / len;
}

bool segments_intersect(Complex a, Complex b, Complex c, Complex d, double tol) {
  const double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
  if (((d1 > tol && d2 < -tol) || (d1 < -tol && d2 > tol)) &&
      ((d3 > tol && d4 < -tol) || (d3 < -tol && d4 > tol)))
    return true;
  return on_segment(c, a, b, tol) || on_segment(d, a, b, tol) || on_segment(a, c, d, tol) ||
         on_segment(b, c, d, tol);
}

} // namespace

std::string_view to_string(QuadratureRule rule) {
  return rule == QuadratureRule::Trapezoidal ? "trapezoidal" : "gauss";
}

QuadratureRule quadrature_rule_from_string(std::string_view name) {
  if (name == "trapezoidal" || name == "trapezoid") return QuadratureRule::Trapezoidal;
  if (name == "gauss" || name == "gauss_legendre" || name == "gauss-legendre") return QuadratureRule::GaussLegendre;
  throw Error(ErrorKind::InvalidArgument, "unknown quadrature rule '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------

Contour::Contour(std::vector<Complex> nodes, std::vector<Complex> weights, ContourGeometry geometry)
    : nodes_(std::move(nodes)), weights_(std::move(weights)), geometry_(std::move(geometry)) {
  if (nodes_.empty()) throw Error(ErrorKind::InvalidContour, "contour needs at least one node");
  if (nodes_.size() != weights_.size())
    throw Error(ErrorKind::InvalidContour, "contour nodes and weights differ in length");
  for (std::size_t j = 0; j < nodes_.size(); ++j) {
    const auto& z = nodes_[j];
    const auto& w = weights_[j];
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()) || !std::isfinite(w.real()) ||
        !std::isfinite(w.imag()))
      throw Error(ErrorKind::InvalidContour, "contour has non-finite nodes or weights");
  }
  const double scale = node_scale(nodes_);
  for (std::size_t j = 0; j < nodes_.size(); ++j)
    for (std::size_t k = j + 1; k < nodes_.size(); ++k)
      if (std::abs(nodes_[j] - nodes_[k]) <= 1e-14 * scale)
        throw Error(ErrorKind::InvalidContour, "contour has repeated nodes");

  // Conjugate pairing. A node on the real axis pairs with itself.
  double wscale = 0.0;
  for (const auto& w : weights_) wscale = std::max(wscale, std::abs(w));
  partner_.assign(nodes_.size(), nodes_.size());
  symmetric_ = true;
  for (std::size_t j = 0; j < nodes_.size() && symmetric_; ++j) {
    bool found = false;
    for (std::size_t k = 0; k < nodes_.size(); ++k) {
      if (std::abs(nodes_[k] - std::conj(nodes_[j])) <= 1e-14 * scale &&
          std::abs(weights_[k] - std::conj(weights_[j])) <= 1e-14 * wscale) {
        partner_[j] = k;
        found = true;
        break;
      }
    }
    symmetric_ = found;
  }
  if (!symmetric_) {
    partner_.clear();
    return;
  }
  // Make the pairing exact so conjugate identities hold bitwise.
  for (std::size_t j = 0; j < nodes_.size(); ++j) {
    const std::size_t k = partner_[j];
    if (k == j) {
      nodes_[j].imag(0.0);
      weights_[j].imag(0.0);
    } else if (nodes_[j].imag() > 0.0) {
      nodes_[k] = std::conj(nodes_[j]);
      weights_[k] = std::conj(weights_[j]);
    }
  }
}

bool Contour::half_contour_available() const {
  if (!symmetric_) return false;
  for (std::size_t j = 0; j < partner_.size(); ++j)
    if (partner_[j] == j) return false;
  return true;
}

double Contour::alpha() const {
  if (const auto* e = std::get_if<Ellipse>(&geometry_)) return std::abs(e->center) + e->radius;
  const auto& p = std::get<Polygon>(geometry_);
  double a = 0.0;
  for (const auto& v : p.vertices) a = std::max(a, std::abs(v));
  return a;
}

// ---------------------------------------------------------------------------

Contour gen_ellipse(const Ellipse& e, int n_e, QuadratureRule rule) {
  if (n_e < 1) throw Error(ErrorKind::InvalidContour, "gen_ellipse: n_e must be >= 1");
  if (!(e.radius > 0.0) || !(e.aspect > 0.0))
    throw Error(ErrorKind::InvalidContour, "gen_ellipse: radius and aspect must be positive");

  const Complex rot = std::polar(1.0, e.rotation);
  auto z = [&](double t) { return e.center + rot * Complex(e.radius * std::cos(t), e.aspect * e.radius * std::sin(t)); };
  auto dz = [&](double t) { return rot * Complex(-e.radius * std::sin(t), e.aspect * e.radius * std::cos(t)); };

  std::vector<Complex> nodes(n_e), weights(n_e);
  if (rule == QuadratureRule::Trapezoidal) {
    for (int j = 0; j < n_e; ++j) {
      // Half-offset angles keep nodes off the real axis for real-centered circles.
      const double t = kTwoPi * (j + 0.5) / n_e;
      nodes[j] = z(t);
      weights[j] = dz(t) * (kTwoPi / n_e) / (kTwoPi * kI);
    }
  } else {
    const GaussLegendre gl = gauss_legendre(n_e);
    for (int j = 0; j < n_e; ++j) {
      const double t = std::numbers::pi * (gl.nodes[j] + 1.0);
      nodes[j] = z(t);
      weights[j] = dz(t) * gl.weights[j] * std::numbers::pi / (kTwoPi * kI);
    }
  }
  return Contour(std::move(nodes), std::move(weights), e);
}

Polygon make_polygon(std::vector<Complex> v) {
  if (v.size() >= 2 && v.front() == v.back()) v.pop_back();
  if (v.size() < 3) throw Error(ErrorKind::InvalidContour, "polygon needs at least 3 vertices");
  double scale = 0.0;
  for (const auto& p : v) {
    if (!std::isfinite(p.real()) || !std::isfinite(p.imag()))
      throw Error(ErrorKind::InvalidContour, "polygon has non-finite vertices");
    scale = std::max(scale, std::abs(p));
  }
  scale = std::max(scale, 1e-300);
  const double area = signed_area(v);
  if (std::abs(area) <= 1e-14 * scale * scale)
    throw Error(ErrorKind::InvalidContour, "polygon vertices are collinear");

  const std::size_t n = v.size();
  const double tol = 1e-14 * scale;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(v[i] - v[(i + 1) % n]) <= tol)
      throw Error(ErrorKind::InvalidContour, "polygon has repeated consecutive vertices");
    // Consecutive edges must not fold back onto each other.
    const Complex a = v[i], b = v[(i + 1) % n], c = v[(i + 2) % n];
    if (std::abs(cross(b - a, c - b)) <= tol * std::abs(b - a) && ((c - b) * std::conj(b - a)).real() < 0.0)
      throw Error(ErrorKind::InvalidContour, "polygon is self-intersecting");
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segments_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n], tol))
        throw Error(ErrorKind::InvalidContour, "polygon is self-intersecting");
    }
  }
  if (area < 0.0) std::reverse(v.begin(), v.end());
  return Polygon{std::move(v)};
}

Contour gen_polygon(std::vector<Complex> vertices, int nodes_per_edge, QuadratureRule rule) {
  if (nodes_per_edge < 1) throw Error(ErrorKind::InvalidContour, "gen_polygon: nodes_per_edge must be >= 1");
  Polygon poly = make_polygon(std::move(vertices));
  const auto& v = poly.vertices;
  std::vector<Complex> nodes, weights;
  nodes.reserve(v.size() * nodes_per_edge);
  weights.reserve(v.size() * nodes_per_edge);
  const GaussLegendre gl =
      rule == QuadratureRule::GaussLegendre ? gauss_legendre(nodes_per_edge) : GaussLegendre{};
  for (std::size_t e = 0; e < v.size(); ++e) {
    const Complex a = v[e], b = v[(e + 1) % v.size()];
    for (int k = 0; k < nodes_per_edge; ++k) {
      if (rule == QuadratureRule::Trapezoidal) {
        nodes.push_back(a + (b - a) * ((k + 0.5) / nodes_per_edge));
        weights.push_back((b - a) / (static_cast<double>(nodes_per_edge) * kTwoPi * kI));
      } else {
        nodes.push_back(a + (b - a) * (0.5 * (gl.nodes[k] + 1.0)));
        weights.push_back((b - a) * gl.weights[k] / (2.0 * kTwoPi * kI));
      }
    }
  }
  return Contour(std::move(nodes), std::move(weights), std::move(poly));
}

// ---------------------------------------------------------------------------

namespace {

std::optional<Complex> filter_value(const Contour& c, Complex lambda, double tol) {
  const auto& z = c.nodes();
  const auto& w = c.weights();
  for (const auto& node : z)
    if (std::abs(node - lambda) <= tol) return std::nullopt;
  Complex sum = 0.0;
  if (c.symmetric_real_axis()) {
    // Pairwise summation keeps rho(conj(l)) == conj(rho(l)) bitwise.
    for (std::size_t j = 0; j < z.size(); ++j) {
      const std::size_t k = c.conjugate_partner(j);
      if (k == j)
        sum += w[j] / (z[j] - lambda);
      else if (z[j].imag() > 0.0)
        sum += w[j] / (z[j] - lambda) + w[k] / (z[k] - lambda);
    }
    return sum;
  }
  for (std::size_t j = 0; j < z.size(); ++j) sum += w[j] / (z[j] - lambda);
  return sum;
}

} // namespace

Complex eval_filter(const Contour& c, Complex lambda) {
  const double tol = 1e-14 * node_scale(c.nodes());
  auto v = filter_value(c, lambda, tol);
  if (!v)
    throw Error(ErrorKind::SingularFilter,
                "eval_filter: lambda coincides with a quadrature node (too close to a pole of the filter)");
  return *v;
}

std::vector<std::optional<Complex>> eval_filter(const Contour& c, std::span<const Complex> lambdas) {
  const double tol = 1e-14 * node_scale(c.nodes());
  std::vector<std::optional<Complex>> out;
  out.reserve(lambdas.size());
  for (const auto& l : lambdas) out.push_back(filter_value(c, l, tol));
  return out;
}

bool inside(const ContourGeometry& g, Complex lambda) {
  if (const auto* e = std::get_if<Ellipse>(&g)) {
    const Complex w = std::polar(1.0, -e->rotation) * (lambda - e->center);
    const double x = w.real() / e->radius;
    const double y = w.imag() / (e->aspect * e->radius);
    return x * x + y * y < 1.0;
  }
  const auto& v = std::get<Polygon>(g).vertices;
  double scale = 0.0;
  for (const auto& p : v) scale = std::max(scale, std::abs(p));
  const double tol = 1e-14 * std::max(scale, std::abs(lambda));
  for (std::size_t k = 0; k < v.size(); ++k)
    if (on_segment(lambda, v[k], v[(k + 1) % v.size()], tol)) return false;

  // Winding number by signed upward/downward crossings.
  int winding = 0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const Complex a = v[k], b = v[(k + 1) % v.size()];
    const double side = cross(b - a, lambda - a);
    if (a.imag() <= lambda.imag()) {
      if (b.imag() > lambda.imag() && side > 0.0) ++winding;
    } else if (b.imag() <= lambda.imag() && side < 0.0) {
      --winding;
    }
  }
  return winding != 0;
}

// ---------------------------------------------------------------------------

WorkPlan plan_work(PencilKind kind, bool hermitian_b_spd, int n_e, bool symmetric_contour,
                   bool has_conj_transpose_solve) {
  if (n_e < 1) throw Error(ErrorKind::InvalidArgument, "plan_work: n_e must be >= 1");
  if (hermitian_b_spd && (kind == PencilKind::ComplexSymmetric || kind == PencilKind::RealGeneral))
    throw Error(ErrorKind::InvalidArgument,
                "plan_work: a Hermitian pencil cannot be tagged " + std::string(to_string(kind)));

  const bool half = symmetric_contour && (is_real_kind(kind) || hermitian_b_spd);
  if (half && n_e % 2 != 0)
    throw Error(ErrorKind::InvalidArgument, "plan_work: half-contour reduction requires an even n_e");

  // Without a conjugate-transpose solve every dual solve needs its own factorization.
  const int dual_factor = has_conj_transpose_solve ? 1 : 2;
  switch (kind) {
  case PencilKind::ComplexGeneral:
    if (hermitian_b_spd && symmetric_contour) return {n_e / 2, n_e};
    return {n_e * dual_factor, 2 * n_e};
  case PencilKind::ComplexSymmetric:
    return {n_e, n_e};
  case PencilKind::RealGeneral:
    if (symmetric_contour) return {n_e / 2 * dual_factor, n_e};
    return {n_e * dual_factor, 2 * n_e};
  case PencilKind::RealSymmetric:
    if (symmetric_contour) return {n_e / 2, n_e / 2};
    return {n_e, n_e};
  }
  return {};
}

} // namespace nhfeast
