// SPDX-License-Identifier: Apache-2.0
#include "nhfeast/generators.hpp"

#include <cmath>
#include <random>
#include <string>

#include <Eigen/QR>
#include <Eigen/SVD>

namespace nhfeast {

Pencil gen_grcar(Index n) {
  if (n < 5) throw Error(ErrorKind::InvalidArgument, "gen_grcar: n must be >= 5");
  std::vector<CsrComplex::Triplet> entries;
  for (Index i = 0; i < n; ++i) {
    if (i > 0) entries.push_back({i, i - 1, -1.0});
    for (Index k = 0; k <= 3 && i + k < n; ++k) entries.push_back({i, i + k, 1.0});
  }
  return Pencil{CsrComplex::from_triplets(n, n, std::move(entries)), std::nullopt, PencilKind::RealGeneral};
}

namespace {

using RealDense = Eigen::MatrixXd;

struct Rng {
  std::mt19937_64 engine;
  std::normal_distribution<double> normal{0.0, 1.0};
  explicit Rng(std::uint64_t seed) : engine(seed) {}

  RealDense real(Index r, Index c) {
    RealDense m(r, c);
    for (Index j = 0; j < c; ++j)
      for (Index i = 0; i < r; ++i) m(i, j) = normal(engine);
    return m;
  }
  ComplexDense complex(Index r, Index c) {
    ComplexDense m(r, c);
    for (Index j = 0; j < c; ++j)
      for (Index i = 0; i < r; ++i) m(i, j) = Complex(normal(engine), normal(engine)) / std::sqrt(2.0);
    return m;
  }
};

template <class M> M orthonormal_factor(const M& g) {
  Eigen::HouseholderQR<M> qr(g);
  return qr.householderQ() * M::Identity(g.rows(), g.cols());
}

Eigen::VectorXd log_spaced(Index n, double lo, double hi) {
  Eigen::VectorXd s(n);
  for (Index k = 0; k < n; ++k) {
    double t = n > 1 ? static_cast<double>(k) / static_cast<double>(n - 1) : 0.0;
    s(k) = lo * std::pow(hi / lo, t);
  }
  return s;
}

template <class M> M conditioned(Rng& rng, Index n, double lo, double hi) {
  M u, v;
  if constexpr (std::is_same_v<M, RealDense>) {
    u = orthonormal_factor<M>(rng.real(n, n));
    v = orthonormal_factor<M>(rng.real(n, n));
  } else {
    u = orthonormal_factor<M>(rng.complex(n, n));
    v = orthonormal_factor<M>(rng.complex(n, n));
  }
  Eigen::VectorXd s = log_spaced(n, lo, hi);
  return u * s.asDiagonal() * v.adjoint();
}

void require_nonsingular(const ComplexDense& x, const char* what) {
  Eigen::JacobiSVD<ComplexDense> svd(x);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(sv.size() - 1) < 1e-12 * sv(0))
    throw Error(ErrorKind::DefectiveSuspected,
                std::string("gen_diagonalizable_pencil: generated ") + what +
                    " is numerically singular; use another seed");
}

OraclePencil finish(ComplexDense a, std::optional<ComplexDense> b, ComplexDense x,
                    std::vector<Complex> eigenvalues, PencilKind kind) {
  const Index n = x.rows();
  Eigen::PartialPivLU<ComplexDense> xlu(x);
  ComplexDense x_inv = xlu.inverse();
  ComplexDense b_inv = b ? ComplexDense(Eigen::PartialPivLU<ComplexDense>(*b).inverse())
                         : ComplexDense(ComplexDense::Identity(n, n));
  ComplexDense x_left = (x_inv * b_inv).adjoint();

  OraclePencil out;
  out.pencil.a = std::move(a);
  if (b) out.pencil.b = std::move(*b);
  out.pencil.kind = kind;
  out.x_right = std::move(x);
  out.x_left = std::move(x_left);
  out.eigenvalues = std::move(eigenvalues);
  return out;
}

} // namespace

OraclePencil gen_diagonalizable_pencil(const std::vector<Complex>& eigenvalues, const OracleOptions& options) {
  const Index n = static_cast<Index>(eigenvalues.size());
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "gen_diagonalizable_pencil: empty eigenvalue list");
  for (const auto& l : eigenvalues)
    if (!std::isfinite(l.real()) || !std::isfinite(l.imag()))
      throw Error(ErrorKind::InvalidArgument, "gen_diagonalizable_pencil: non-finite eigenvalue");
  if (!(options.conditioning >= 1.0))
    throw Error(ErrorKind::InvalidArgument, "gen_diagonalizable_pencil: conditioning must be >= 1");

  Rng rng(options.seed);

  switch (options.structure) {
  case OracleStructure::General: {
    ComplexDense x = conditioned<ComplexDense>(rng, n, 1.0, options.conditioning);
    require_nonsingular(x, "X");
    std::optional<ComplexDense> b;
    if (!options.identity_b) b = conditioned<ComplexDense>(rng, n, 1.0, 2.0);
    Eigen::VectorXcd lam = Eigen::Map<const Eigen::VectorXcd>(eigenvalues.data(), n);
    ComplexDense x_inv = Eigen::PartialPivLU<ComplexDense>(x).inverse();
    ComplexDense bx = b ? ComplexDense(*b * x) : x;
    ComplexDense a = bx * lam.asDiagonal() * x_inv;
    return finish(std::move(a), std::move(b), std::move(x), eigenvalues, PencilKind::ComplexGeneral);
  }

  case OracleStructure::Real: {
    // Group eigenvalues: reals alone, conjugate pairs as (a+ib, a-ib), b > 0.
    std::vector<Complex> ordered;
    std::vector<bool> used(eigenvalues.size(), false);
    for (std::size_t i = 0; i < eigenvalues.size(); ++i) {
      if (used[i]) continue;
      const Complex l = eigenvalues[i];
      used[i] = true;
      if (l.imag() == 0.0) {
        ordered.push_back(l);
        continue;
      }
      std::size_t partner = eigenvalues.size();
      for (std::size_t k = i + 1; k < eigenvalues.size(); ++k)
        if (!used[k] && eigenvalues[k] == std::conj(l)) {
          partner = k;
          break;
        }
      if (partner == eigenvalues.size())
        throw Error(ErrorKind::InvalidArgument,
                    "gen_diagonalizable_pencil: real structure needs conjugate-closed eigenvalues");
      used[partner] = true;
      Complex up = l.imag() > 0 ? l : std::conj(l);
      ordered.push_back(up);
      ordered.push_back(std::conj(up));
    }

    RealDense d = RealDense::Zero(n, n);
    ComplexDense p = ComplexDense::Zero(n, n);
    for (Index k = 0; k < n;) {
      const Complex l = ordered[k];
      if (l.imag() == 0.0) {
        d(k, k) = l.real();
        p(k, k) = 1.0;
        ++k;
        continue;
      }
      // [[a, b], [-b, a]] (1, i)^T = (a + ib) (1, i)^T
      d(k, k) = l.real();
      d(k, k + 1) = l.imag();
      d(k + 1, k) = -l.imag();
      d(k + 1, k + 1) = l.real();
      const double s = 1.0 / std::sqrt(2.0);
      p(k, k) = s;
      p(k + 1, k) = Complex(0.0, s);
      p(k, k + 1) = s;
      p(k + 1, k + 1) = Complex(0.0, -s);
      k += 2;
    }

    RealDense xr = conditioned<RealDense>(rng, n, 1.0, options.conditioning);
    std::optional<RealDense> br;
    if (!options.identity_b) br = conditioned<RealDense>(rng, n, 1.0, 2.0);
    RealDense xr_inv = Eigen::PartialPivLU<RealDense>(xr).inverse();
    RealDense ar = (br ? RealDense(*br * xr) : xr) * d * xr_inv;

    ComplexDense x = xr.cast<Complex>() * p;
    require_nonsingular(x, "X");
    std::optional<ComplexDense> b;
    if (br) b = br->cast<Complex>();
    return finish(ar.cast<Complex>(), std::move(b), std::move(x), ordered, PencilKind::RealGeneral);
  }

  case OracleStructure::ComplexSymmetric: {
    ComplexDense g = rng.complex(n, n);
    ComplexDense k = g - g.transpose();
    const double c = options.conditioning;
    const double target = (std::sqrt(c) - 1.0) / (std::sqrt(c) + 1.0);
    if (const double norm = Eigen::JacobiSVD<ComplexDense>(k).singularValues()(0); norm > 0.0)
      k *= target / norm;
    const ComplexDense id = ComplexDense::Identity(n, n);
    ComplexDense o = Eigen::PartialPivLU<ComplexDense>(id - k).solve(id + k);

    std::optional<ComplexDense> b;
    ComplexDense x = o;
    if (!options.identity_b) {
      ComplexDense cm = conditioned<ComplexDense>(rng, n, 1.0, 2.0);
      b = ComplexDense(cm.transpose() * cm);
      x = Eigen::PartialPivLU<ComplexDense>(cm).solve(o);
    }
    require_nonsingular(x, "X");
    Eigen::VectorXcd lam = Eigen::Map<const Eigen::VectorXcd>(eigenvalues.data(), n);
    // X^T B X = I, so A = B X Lambda X^T B is symmetric.
    ComplexDense bx = b ? ComplexDense(*b * x) : x;
    ComplexDense a = bx * lam.asDiagonal() * bx.transpose();
    a = 0.5 * (a + a.transpose()).eval();
    if (b) *b = 0.5 * (*b + b->transpose()).eval();
    return finish(std::move(a), std::move(b), std::move(x), eigenvalues, PencilKind::ComplexSymmetric);
  }
  }
  throw Error(ErrorKind::InvalidArgument, "gen_diagonalizable_pencil: unknown structure");
}

} // namespace nhfeast
