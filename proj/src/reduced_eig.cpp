// SPDX-License-Identifier: Apache-2.0
#include "nhfeast/reduced_eig.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Jacobi>
#include <Eigen/SVD>

#include "nhfeast/linsolve.hpp"

namespace nhfeast {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kSafeMin = std::numeric_limits<double>::min();
constexpr double kDefectiveRatio = 1e-12;

double abs1(Complex z) { return std::abs(z.real()) + std::abs(z.imag()); }

void require_square_finite(const ComplexDense& m, const char* who) {
  if (m.rows() != m.cols())
    throw Error(ErrorKind::DimensionMismatch, std::string(who) + ": matrix must be square");
  if (!m.allFinite()) throw Error(ErrorKind::InvalidArgument, std::string(who) + ": non-finite entries");
}

// Diagonal scaling by powers of two so that row and column norms are
// comparable; returns d with balanced = D^-1 M D.
Eigen::VectorXd balance(ComplexDense& m) {
  const Index n = m.rows();
  Eigen::VectorXd d = Eigen::VectorXd::Ones(n);
  constexpr double radix = 2.0, sqrdx = 4.0;
  bool done = false;
  while (!done) {
    done = true;
    for (Index i = 0; i < n; ++i) {
      double c = 0.0, r = 0.0;
      for (Index j = 0; j < n; ++j) {
        if (j == i) continue;
        c += abs1(m(j, i));
        r += abs1(m(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      const double s = c + r;
      double f = 1.0, g = r / radix;
      while (c < g) {
        f *= radix;
        c *= sqrdx;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= sqrdx;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        d(i) *= f;
        m.row(i) /= f;
        m.col(i) *= f;
      }
    }
  }
  return d;
}

// H = Q^H M Q upper Hessenberg; q is accumulated.
void hessenberg(ComplexDense& h, ComplexDense& q) {
  const Index n = h.rows();
  q.setIdentity(n, n);
  for (Index k = 0; k + 2 < n; ++k) {
    const Index len = n - k - 1;
    ComplexVector v = h.col(k).tail(len);
    const double alpha = v.norm();
    if (alpha == 0.0) continue;
    const Complex x0 = v(0);
    const Complex phase = std::abs(x0) > 0.0 ? x0 / std::abs(x0) : Complex(1.0);
    v(0) += phase * alpha;
    v.normalize();
    // P = I - 2 v v^H
    Eigen::RowVectorXcd w = v.adjoint() * h.block(k + 1, k, len, n - k);
    h.block(k + 1, k, len, n - k).noalias() -= 2.0 * v * w;
    ComplexVector u = h.block(0, k + 1, n, len) * v;
    h.block(0, k + 1, n, len).noalias() -= 2.0 * u * v.adjoint();
    ComplexVector p = q.block(0, k + 1, n, len) * v;
    q.block(0, k + 1, n, len).noalias() -= 2.0 * p * v.adjoint();
    h(k + 1, k) = -phase * alpha;
    h.col(k).tail(len - 1).setZero();
  }
}

Complex wilkinson_shift(const ComplexDense& t, Index iu) {
  const Complex a = t(iu - 1, iu - 1), b = t(iu - 1, iu), c = t(iu, iu - 1), d = t(iu, iu);
  const Complex mid = 0.5 * (a + d);
  const Complex disc = std::sqrt(0.25 * (a - d) * (a - d) + b * c);
  const Complex e1 = mid + disc, e2 = mid - disc;
  return std::abs(e1 - d) < std::abs(e2 - d) ? e1 : e2;
}

// Shifted QR on an upper Hessenberg t, full Schur form (whole rows/columns updated).
void hessenberg_qr(ComplexDense& t, ComplexDense& z) {
  const Index n = t.rows();
  const long max_sweeps = 30L * std::max<Index>(n, 1);
  long sweeps = 0;
  int local = 0;
  Index iu = n - 1;
  while (iu > 0) {
    Index il = iu;
    while (il > 0) {
      const double sub = abs1(t(il, il - 1));
      const double diag = abs1(t(il - 1, il - 1)) + abs1(t(il, il));
      if (sub <= kEps * diag || sub < kSafeMin) {
        t(il, il - 1) = 0.0;
        break;
      }
      --il;
    }
    if (il == iu) {
      --iu;
      local = 0;
      continue;
    }
    if (++sweeps > max_sweeps)
      throw Error(ErrorKind::NonConvergedEig,
                  "QR iteration did not converge in " + std::to_string(max_sweeps) + " sweeps");
    ++local;

    Complex shift;
    if (local % 10 == 0) {
      // Exceptional shift to break cycles.
      shift = std::abs(t(iu, iu - 1).real()) + (iu >= 2 ? std::abs(t(iu - 1, iu - 2).real()) : 0.0);
      shift += t(iu, iu);
    } else {
      shift = wilkinson_shift(t, iu);
    }

    Eigen::JacobiRotation<Complex> g;
    g.makeGivens(t(il, il) - shift, t(il + 1, il));
    t.rightCols(n - il).applyOnTheLeft(il, il + 1, g.adjoint());
    t.topRows(std::min(il + 2, iu) + 1).applyOnTheRight(il, il + 1, g);
    z.applyOnTheRight(il, il + 1, g);
    for (Index k = il + 1; k < iu; ++k) {
      g.makeGivens(t(k, k - 1), t(k + 1, k - 1), &t(k, k - 1));
      t(k + 1, k - 1) = 0.0;
      t.rightCols(n - k).applyOnTheLeft(k, k + 1, g.adjoint());
      t.topRows(std::min(k + 2, iu) + 1).applyOnTheRight(k, k + 1, g);
      z.applyOnTheRight(k, k + 1, g);
    }
  }
  // Clear roundoff below the diagonal.
  for (Index j = 0; j < n; ++j) t.col(j).tail(n - j - 1).setZero();
}

// Right eigenvectors of an upper triangular t.
ComplexDense triangular_eigenvectors(const ComplexDense& t) {
  const Index n = t.rows();
  ComplexDense x = ComplexDense::Zero(n, n);
  const double smin = std::max(kEps * t.norm(), kSafeMin);
  constexpr double big = 1e150;
  for (Index k = 0; k < n; ++k) {
    x(k, k) = 1.0;
    const Complex lam = t(k, k);
    for (Index i = k - 1; i >= 0; --i) {
      Complex s = 0.0;
      for (Index j = i + 1; j <= k; ++j) s += t(i, j) * x(j, k);
      Complex den = t(i, i) - lam;
      if (std::abs(den) < smin) den = smin;
      x(i, k) = -s / den;
      if (std::abs(x(i, k)) > big) x.col(k).segment(i, k - i + 1) /= big;
    }
  }
  return x;
}

void check_not_defective(const ComplexDense& v, const char* what) {
  if (v.cols() == 0) return;
  Eigen::BDCSVD<ComplexDense> svd(v);
  const auto& s = svd.singularValues();
  const double smax = s(0), smin = s(s.size() - 1);
  if (!(smin >= kDefectiveRatio * smax))
    throw Error(ErrorKind::DefectiveSuspected,
                std::string(what) + " is numerically singular (sigma_min/sigma_max = " +
                    std::to_string(smax > 0 ? smin / smax : 0.0) + "); the matrix looks defective");
}

ComplexDense inverse(const ComplexDense& m, const char* what) {
  try {
    return solve(factorize(m), ComplexDense::Identity(m.rows(), m.cols()));
  } catch (const Error&) {
    throw Error(ErrorKind::DefectiveSuspected, std::string(what) + " could not be inverted");
  }
}

// Rescales columns of v so that v^T g v = I (g = identity when null).
// Within degenerate eigenvalue clusters the columns are recombined, so v
// stays a valid eigenvector basis.
void complex_orthonormalize(ComplexDense& v, const ComplexDense* g) {
  ComplexDense gram = g ? ComplexDense(v.transpose() * (*g) * v) : ComplexDense(v.transpose() * v);
  v = (v * complex_symmetric_normalizer(gram, 1e-10)).eval();
}

std::vector<Index> descending_modulus_order(const std::vector<Complex>& vals) {
  std::vector<Index> order(vals.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return std::abs(vals[a]) > std::abs(vals[b]); });
  return order;
}

} // namespace

ComplexDense complex_symmetric_normalizer(const ComplexDense& g, double tol) {
  const Index m = g.rows();
  const ComplexDense gs = 0.5 * (g + g.transpose());
  // gs = L D L^T without pivoting.
  ComplexDense l = ComplexDense::Identity(m, m);
  ComplexVector d(m);
  const double scale = m > 0 ? gs.cwiseAbs().maxCoeff() : 0.0;
  for (Index j = 0; j < m; ++j) {
    Complex s = gs(j, j);
    for (Index k = 0; k < j; ++k) s -= l(j, k) * l(j, k) * d(k);
    if (!(std::abs(s) > tol * scale))
      throw Error(ErrorKind::DefectiveSuspected,
                  "vector with (near) zero complex-symmetric norm; no complex-orthogonal basis");
    d(j) = s;
    for (Index i = j + 1; i < m; ++i) {
      Complex t = gs(i, j);
      for (Index k = 0; k < j; ++k) t -= l(i, k) * l(j, k) * d(k);
      l(i, j) = t / d(j);
    }
  }
  // S = L^-T D^-1/2
  ComplexDense s = ComplexDense::Identity(m, m);
  l.transpose().triangularView<Eigen::Upper>().solveInPlace(s);
  for (Index j = 0; j < m; ++j) {
    Complex dj = d(j);
    if (dj.imag() == 0.0) dj = Complex(dj.real(), 0.0);
    s.col(j) /= std::sqrt(dj);
  }
  return s;
}

SchurForm complex_schur(const ComplexDense& m) {
  require_square_finite(m, "complex_schur");
  SchurForm s;
  s.t = m;
  hessenberg(s.t, s.z);
  hessenberg_qr(s.t, s.z);
  return s;
}

EigDecomposition eig_standard(const ComplexDense& m, EigNormalization norm) {
  require_square_finite(m, "eig_standard");
  const Index n = m.rows();
  EigDecomposition out;
  if (n == 0) return out;

  ComplexDense bal = m;
  const Eigen::VectorXd d = balance(bal);
  SchurForm s;
  s.t = std::move(bal);
  hessenberg(s.t, s.z);
  hessenberg_qr(s.t, s.z);

  ComplexDense v = d.asDiagonal() * (s.z * triangular_eigenvectors(s.t));
  for (Index j = 0; j < n; ++j) {
    const double nv = v.col(j).norm();
    if (nv > 0.0) v.col(j) /= nv;
  }

  std::vector<Complex> vals(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) vals[i] = s.t(i, i);
  const auto order = descending_modulus_order(vals);
  out.gamma.resize(vals.size());
  out.v_right.resize(n, n);
  for (Index k = 0; k < n; ++k) {
    out.gamma[k] = vals[order[k]];
    out.v_right.col(k) = v.col(order[k]);
  }

  check_not_defective(out.v_right, "eigenvector matrix");
  if (norm == EigNormalization::ComplexSymmetric) {
    complex_orthonormalize(out.v_right, nullptr);
    out.v_left = out.v_right.conjugate();
  } else {
    out.v_left = inverse(out.v_right, "eigenvector matrix").adjoint();
  }
  return out;
}

GenEigDecomposition eig_generalized(const ComplexDense& a, const ComplexDense& b, EigNormalization norm) {
  require_square_finite(a, "eig_generalized");
  require_square_finite(b, "eig_generalized");
  if (a.rows() != b.rows())
    throw Error(ErrorKind::DimensionMismatch, "eig_generalized: A_U and B_U sizes differ");
  const Index n = a.rows();
  GenEigDecomposition out;
  if (n == 0) return out;

  LuFactors fb;
  try {
    fb = factorize(b);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::SingularShift) throw;
    throw Error(ErrorKind::SingularBU, "reduced B matrix is singular (min|U_ii|/max|U_ii| below 1e-14)");
  }
  const EigDecomposition std_dec = eig_standard(solve(fb, a));
  out.lambda_q = std_dec.gamma;
  out.w_right = std_dec.v_right;

  if (norm == EigNormalization::ComplexSymmetric) {
    complex_orthonormalize(out.w_right, &b);
    out.w_left = out.w_right.conjugate();
  } else {
    out.w_left = inverse(b * out.w_right, "B-scaled eigenvector matrix").adjoint();
  }

  ComplexVector lam_conj(n);
  double lmax = 0.0;
  for (Index i = 0; i < n; ++i) {
    lam_conj(i) = std::conj(out.lambda_q[i]);
    lmax = std::max(lmax, std::abs(out.lambda_q[i]));
  }
  const ComplexDense r = a.adjoint() * out.w_left - b.adjoint() * out.w_left * lam_conj.asDiagonal();
  const double denom = (a.cwiseAbs().maxCoeff() + lmax * b.cwiseAbs().maxCoeff()) *
                       std::max(out.w_left.cwiseAbs().maxCoeff(), kSafeMin);
  out.left_residual = denom > 0.0 ? r.cwiseAbs().maxCoeff() / denom : 0.0;
  return out;
}

} // namespace nhfeast
