// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <random>

#include <Eigen/Eigenvalues>
#include <doctest.h>

#include "nhfeast/reduced_eig.hpp"

using namespace nhfeast;

namespace {

ComplexDense random_dense(Index r, Index c, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  ComplexDense m(r, c);
  for (Index j = 0; j < c; ++j)
    for (Index i = 0; i < r; ++i) m(i, j) = Complex(g(rng), g(rng));
  return m;
}

double max_abs(const ComplexDense& m) { return m.cwiseAbs().maxCoeff(); }

ComplexDense diag(const std::vector<Complex>& v) {
  ComplexVector d(static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) d(static_cast<Index>(i)) = v[i];
  return d.asDiagonal();
}

std::vector<Complex> sorted(std::vector<Complex> v) {
  std::sort(v.begin(), v.end(), [](Complex a, Complex b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return v;
}

double max_distance(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

} // namespace

TEST_CASE("schur form of a random matrix") {
  const ComplexDense m = random_dense(15, 15, 1);
  const SchurForm s = complex_schur(m);
  CHECK(max_abs(s.z * s.t * s.z.adjoint() - m) < 1e-12 * max_abs(m));
  CHECK(max_abs(s.z.adjoint() * s.z - ComplexDense::Identity(15, 15)) < 1e-13);
  for (Index j = 0; j < 15; ++j)
    for (Index i = j + 1; i < 15; ++i) CHECK(s.t(i, j) == Complex(0.0));
}

TEST_CASE("eigenvalues of small examples") {
  const EigDecomposition d = eig_standard(diag({3.0, Complex(1.0, 2.0)}));
  REQUIRE(d.gamma.size() == 2);
  CHECK(std::abs(d.gamma[0] - 3.0) < 1e-15);
  CHECK(std::abs(d.gamma[1] - Complex(1.0, 2.0)) < 1e-15);
  CHECK(max_abs(d.v_right.cwiseAbs() - ComplexDense::Identity(2, 2).cwiseAbs()) < 1e-15);
  CHECK(max_abs(d.v_left.cwiseAbs() - ComplexDense::Identity(2, 2).cwiseAbs()) < 1e-15);

  ComplexDense m(2, 2);
  m << 0.0, 1.0, -2.0, 3.0;
  const EigDecomposition e = eig_standard(m);
  CHECK(std::abs(e.gamma[0] - 2.0) < 1e-14);
  CHECK(std::abs(e.gamma[1] - 1.0) < 1e-14);
}

TEST_CASE("random matrices: residual, bi-orthonormality, ordering") {
  for (unsigned seed : {2u, 3u, 4u}) {
    const ComplexDense m = random_dense(12, 12, seed);
    const EigDecomposition e = eig_standard(m);
    ComplexVector g(12);
    for (Index i = 0; i < 12; ++i) g(i) = e.gamma[static_cast<std::size_t>(i)];
    CHECK(max_abs(m * e.v_right - e.v_right * g.asDiagonal()) < 1e-10 * max_abs(m));
    CHECK(max_abs(e.v_left.adjoint() * e.v_right - ComplexDense::Identity(12, 12)) < 1e-10);
    for (std::size_t i = 1; i < 12; ++i) CHECK(std::abs(e.gamma[i - 1]) >= std::abs(e.gamma[i]));
    for (Index j = 0; j < 12; ++j) CHECK(e.v_right.col(j).norm() == doctest::Approx(1.0).epsilon(1e-13));

    // Independent oracle.
    Eigen::ComplexEigenSolver<ComplexDense> ref(m, false);
    std::vector<Complex> r(ref.eigenvalues().data(), ref.eigenvalues().data() + 12);
    CHECK(max_distance(sorted(e.gamma), sorted(r)) < 1e-10);
  }
}

TEST_CASE("eigenvalues are invariant under similarity") {
  const ComplexDense m = random_dense(10, 10, 5);
  const ComplexDense s = random_dense(10, 10, 6) + 4.0 * ComplexDense::Identity(10, 10);
  const ComplexDense t = s * m * s.inverse();
  CHECK(max_distance(sorted(eig_standard(m).gamma), sorted(eig_standard(t).gamma)) < 1e-8);
}

TEST_CASE("graded and non-normal matrices") {
  ComplexDense g = random_dense(10, 10, 7);
  for (Index i = 0; i < 10; ++i) {
    g.row(i) *= std::pow(10.0, static_cast<double>(i));
    g.col(i) /= std::pow(10.0, static_cast<double>(i));
  }
  const EigDecomposition e = eig_standard(g);
  ComplexVector d(10);
  for (Index i = 0; i < 10; ++i) d(i) = e.gamma[static_cast<std::size_t>(i)];
  CHECK(max_abs(g * e.v_right - e.v_right * d.asDiagonal()) < 1e-9 * max_abs(g));

  // Jordan block: the bi-orthonormal pair does not exist.
  ComplexDense j = ComplexDense::Zero(3, 3);
  j(0, 1) = 1.0;
  j(1, 2) = 1.0;
  CHECK_THROWS_AS(eig_standard(j), Error);
}

TEST_CASE("complex-symmetric normalization") {
  ComplexDense m = random_dense(8, 8, 8);
  m = (m + m.transpose()).eval();
  const EigDecomposition e = eig_standard(m, EigNormalization::ComplexSymmetric);
  CHECK(max_abs(e.v_right.transpose() * e.v_right - ComplexDense::Identity(8, 8)) < 1e-10);
  CHECK(e.v_left == e.v_right.conjugate());
  CHECK(max_abs(e.v_left.adjoint() * e.v_right - ComplexDense::Identity(8, 8)) < 1e-10);

  const ComplexDense s = complex_symmetric_normalizer(m * m.transpose() + ComplexDense::Identity(8, 8), 1e-12);
  CHECK(max_abs(s.transpose() * (m * m.transpose() + ComplexDense::Identity(8, 8)) * s -
                ComplexDense::Identity(8, 8)) < 1e-10);
  CHECK_THROWS_AS(complex_symmetric_normalizer(ComplexDense::Zero(2, 2), 1e-12), Error);
}

TEST_CASE("generalized examples") {
  const GenEigDecomposition a = eig_generalized(diag({1.0, 2.0}), ComplexDense::Identity(2, 2));
  CHECK(std::abs(a.lambda_q[0] - 2.0) < 1e-15);
  CHECK(std::abs(a.lambda_q[1] - 1.0) < 1e-15);
  // Sorted by modulus, so W and W-hat are the swapped identity up to phase.
  const Eigen::Matrix2d swap{{0.0, 1.0}, {1.0, 0.0}};
  CHECK((a.w_right.cwiseAbs() - swap).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((a.w_left.cwiseAbs() - swap).cwiseAbs().maxCoeff() < 1e-15);

  const GenEigDecomposition b = eig_generalized(diag({2.0, 6.0}), diag({2.0, 2.0}));
  CHECK(std::abs(b.lambda_q[0] - 3.0) < 1e-15);
  CHECK(std::abs(b.lambda_q[1] - 1.0) < 1e-15);
  CHECK(max_abs(b.w_left.adjoint() * diag({2.0, 2.0}) * b.w_right - ComplexDense::Identity(2, 2)) < 1e-15);

  CHECK_THROWS_AS(eig_generalized(diag({1.0, 2.0}), diag({1.0, 0.0})), Error);
  try {
    (void)eig_generalized(diag({1.0, 2.0}), diag({1.0, 0.0}));
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SingularBU);
  }
}

TEST_CASE("generalized random pair") {
  const ComplexDense a = random_dense(9, 9, 11);
  const ComplexDense b = random_dense(9, 9, 12) + 5.0 * ComplexDense::Identity(9, 9);
  const GenEigDecomposition g = eig_generalized(a, b);
  ComplexVector l(9);
  for (Index i = 0; i < 9; ++i) l(i) = g.lambda_q[static_cast<std::size_t>(i)];
  CHECK(max_abs(a * g.w_right - b * g.w_right * l.asDiagonal()) < 1e-10);
  CHECK(max_abs(g.w_left.adjoint() * b * g.w_right - ComplexDense::Identity(9, 9)) < 1e-10);
  CHECK(max_abs(a.adjoint() * g.w_left - b.adjoint() * g.w_left * l.conjugate().asDiagonal()) < 1e-9);
  CHECK(g.left_residual < 1e-10);

  // B = I reproduces the standard problem.
  const GenEigDecomposition id = eig_generalized(a, ComplexDense::Identity(9, 9));
  CHECK(max_distance(id.lambda_q, eig_standard(a).gamma) < 1e-12);
}

TEST_CASE("generalized complex-symmetric pair: left vectors are conjugates") {
  ComplexDense a = random_dense(6, 6, 13);
  a = (a + a.transpose()).eval();
  ComplexDense c = random_dense(6, 6, 14) + 3.0 * ComplexDense::Identity(6, 6);
  const ComplexDense b = c.transpose() * c;
  const GenEigDecomposition g = eig_generalized(a, b, EigNormalization::ComplexSymmetric);
  CHECK(g.w_left == g.w_right.conjugate());
  CHECK(max_abs(g.w_left.adjoint() * b * g.w_right - ComplexDense::Identity(6, 6)) < 1e-10);

  // The general normalization yields left vectors parallel to conj(W).
  const GenEigDecomposition h = eig_generalized(a, b);
  for (Index j = 0; j < 6; ++j) {
    const ComplexVector wl = h.w_left.col(j), wc = h.w_right.col(j).conjugate();
    const Complex ratio = wc.dot(wl) / wc.squaredNorm();
    CHECK((wl - ratio * wc).norm() < 1e-10 * wl.norm());
  }
}
