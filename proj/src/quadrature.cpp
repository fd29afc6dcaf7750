// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numbers>

#include "nhfeast/contour.hpp"

namespace nhfeast {

// Newton iteration on the Legendre three-term recurrence.
GaussLegendre gauss_legendre(int n) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "gauss_legendre: n must be >= 1");
  GaussLegendre gl;
  gl.nodes.assign(n, 0.0);
  gl.weights.assign(n, 0.0);
  const int half = (n + 1) / 2;
  for (int i = 1; i <= half; ++i) {
    double z = std::cos(std::numbers::pi * (i - 0.25) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15) break;
    }
    // Recompute the derivative at the converged root for the weight.
    double p1 = 1.0, p2 = 0.0;
    for (int j = 1; j <= n; ++j) {
      const double p3 = p2;
      p2 = p1;
      p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
    }
    pp = n * (z * p1 - p2) / (z * z - 1.0);
    gl.nodes[i - 1] = -z;
    gl.nodes[n - i] = z;
    gl.weights[i - 1] = 2.0 / ((1.0 - z * z) * pp * pp);
    gl.weights[n - i] = gl.weights[i - 1];
  }
  if (n % 2 == 1) gl.nodes[n / 2] = 0.0;
  return gl;
}

} // namespace nhfeast
