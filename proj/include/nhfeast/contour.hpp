// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "nhfeast/matrices.hpp"

namespace nhfeast {

enum class QuadratureRule { Trapezoidal, GaussLegendre };

std::string_view to_string(QuadratureRule rule);
QuadratureRule quadrature_rule_from_string(std::string_view name);

/// Gauss-Legendre nodes (ascending) and weights on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussLegendre gauss_legendre(int n);

/// z(t) = center + e^{i rotation} (radius cos t + i aspect radius sin t)
struct Ellipse {
  Complex center{0.0, 0.0};
  double radius = 1.0;
  double aspect = 1.0; // vertical / horizontal axis ratio
  double rotation = 0.0;
};

/// Closed polygon, stored counterclockwise.
struct Polygon {
  std::vector<Complex> vertices;
};

using ContourGeometry = std::variant<Ellipse, Polygon>;

/// Quadrature nodes z_j and weights w_j of the rational filter
/// rho(lambda) = sum_j w_j / (z_j - lambda), together with the boundary
/// used for inside tests. Immutable once built.
class Contour {
public:
  Contour(std::vector<Complex> nodes, std::vector<Complex> weights, ContourGeometry geometry);

  const std::vector<Complex>& nodes() const { return nodes_; }
  const std::vector<Complex>& weights() const { return weights_; }
  const ContourGeometry& geometry() const { return geometry_; }
  std::size_t size() const { return nodes_.size(); }

  /// True iff nodes and weights are closed under conjugation (z, w) -> (z*, w*).
  /// A node on the real axis is its own partner.
  bool symmetric_real_axis() const { return symmetric_; }
  /// Symmetric with every node paired to a distinct partner, so the upper
  /// half of the nodes determines the whole integration.
  bool half_contour_available() const;
  /// For symmetric contours: index of the node holding conj(z_j).
  std::size_t conjugate_partner(std::size_t j) const { return partner_[j]; }

  /// Residual scaling: |center| + radius for ellipses, max |vertex| for polygons.
  double alpha() const;

private:
  std::vector<Complex> nodes_;
  std::vector<Complex> weights_;
  ContourGeometry geometry_;
  bool symmetric_ = false;
  std::vector<std::size_t> partner_;
};

Contour gen_ellipse(const Ellipse& ellipse, int n_e, QuadratureRule rule = QuadratureRule::Trapezoidal);
Contour gen_polygon(std::vector<Complex> vertices, int nodes_per_edge,
                    QuadratureRule rule = QuadratureRule::Trapezoidal);

/// Validates and normalizes a polygon to counterclockwise order.
Polygon make_polygon(std::vector<Complex> vertices);

/// rho_a(lambda). Throws SingularFilter when lambda sits on a node.
Complex eval_filter(const Contour& c, Complex lambda);
/// Grid variant; node-coincident points yield nullopt instead of throwing.
std::vector<std::optional<Complex>> eval_filter(const Contour& c, std::span<const Complex> lambdas);

/// Strict interior test; boundary points are outside.
bool inside(const ContourGeometry& g, Complex lambda);
inline bool inside(const Contour& c, Complex lambda) { return inside(c.geometry(), lambda); }

/// Factorizations and block solves per full contour integration.
struct WorkPlan {
  int factorizations = 0;
  int solves = 0;
  friend bool operator==(const WorkPlan&, const WorkPlan&) = default;
};

WorkPlan plan_work(PencilKind kind, bool hermitian_b_spd, int n_e, bool symmetric_contour,
                   bool has_conj_transpose_solve = true);

} // namespace nhfeast
