// SPDX-License-Identifier: Apache-2.0
#include "nhfeast/linsolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace nhfeast {

namespace {

constexpr Index kPanelWidth = 48;

// Unblocked LU on columns [k0, k0 + width) of the full matrix; swaps whole rows.
void factor_panel(ComplexDense& a, Index k0, Index width, std::vector<Index>& pivots) {
  const Index n = a.rows();
  for (Index j = k0; j < k0 + width; ++j) {
    Index p = j;
    a.col(j).tail(n - j).cwiseAbs2().maxCoeff(&p);
    p += j;
    pivots[j] = p;
    if (p != j) a.row(j).swap(a.row(p));
    const Complex piv = a(j, j);
    if (piv == Complex(0.0)) continue;
    const Index below = n - j - 1;
    if (below == 0) continue;
    a.col(j).tail(below) /= piv;
    const Index right = k0 + width - j - 1;
    if (right > 0)
      a.block(j + 1, j + 1, below, right).noalias() -= a.col(j).tail(below) * a.row(j).segment(j + 1, right);
  }
}

void apply_row_swaps(const std::vector<Index>& pivots, ComplexBlock& x) {
  for (std::size_t k = 0; k < pivots.size(); ++k)
    if (pivots[k] != static_cast<Index>(k)) x.row(static_cast<Index>(k)).swap(x.row(pivots[k]));
}

void undo_row_swaps(const std::vector<Index>& pivots, ComplexBlock& x) {
  for (std::size_t k = pivots.size(); k-- > 0;)
    if (pivots[k] != static_cast<Index>(k)) x.row(static_cast<Index>(k)).swap(x.row(pivots[k]));
}

void check_rhs(const LuFactors& f, const ComplexBlock& rhs) {
  if (rhs.rows() != f.size())
    throw Error(ErrorKind::DimensionMismatch, "solve: right-hand side has " + std::to_string(rhs.rows()) +
                                                  " rows, factors are " + std::to_string(f.size()));
}

} // namespace

LuFactors factorize(ComplexDense m, Complex shift, long node) {
  if (m.rows() != m.cols()) throw Error(ErrorKind::DimensionMismatch, "factorize: matrix must be square");
  const Index n = m.rows();
  LuFactors f;
  f.shift = shift;
  f.pivots.assign(static_cast<std::size_t>(n), 0);

  for (Index k = 0; k < n; k += kPanelWidth) {
    const Index b = std::min(kPanelWidth, n - k);
    factor_panel(m, k, b, f.pivots);
    const Index rest = n - k - b;
    if (rest == 0) continue;
    // U12 = L11^{-1} A12, then the trailing update A22 -= L21 U12.
    m.block(k, k, b, b).triangularView<Eigen::UnitLower>().solveInPlace(m.block(k, k + b, b, rest));
    m.block(k + b, k + b, rest, rest).noalias() -= m.block(k + b, k, rest, b) * m.block(k, k + b, b, rest);
  }

  double umax = 0.0, umin = n > 0 ? std::numeric_limits<double>::infinity() : 0.0;
  for (Index i = 0; i < n; ++i) {
    const double u = std::abs(m(i, i));
    umax = std::max(umax, u);
    umin = std::min(umin, u);
  }
  f.pivot_ratio = umax > 0.0 ? umin / umax : 0.0;
  if (n > 0 && !(f.pivot_ratio >= kSingularPivotRatio)) {
    std::ostringstream msg;
    msg << "shifted system is singular to working precision (min|U_ii|/max|U_ii| = " << f.pivot_ratio << ")";
    if (node >= 0) msg << " at contour node " << node;
    msg << " z = (" << shift.real() << ", " << shift.imag() << ")"
        << "; the node lies too close to an eigenvalue, move the contour node";
    throw Error(ErrorKind::SingularShift, msg.str());
  }
  f.lu = std::move(m);
  return f;
}

ComplexBlock solve(const LuFactors& f, const ComplexBlock& rhs) {
  check_rhs(f, rhs);
  ComplexBlock x = rhs;
  apply_row_swaps(f.pivots, x);
  f.lu.triangularView<Eigen::UnitLower>().solveInPlace(x);
  f.lu.triangularView<Eigen::Upper>().solveInPlace(x);
  return x;
}

ComplexBlock solve_conj_transpose(const LuFactors& f, const ComplexBlock& rhs) {
  check_rhs(f, rhs);
  // M^H = U^H L^H P: forward with U^H, backward with L^H, then P^T.
  ComplexBlock x = rhs;
  f.lu.triangularView<Eigen::Upper>().adjoint().solveInPlace(x);
  f.lu.triangularView<Eigen::UnitLower>().adjoint().solveInPlace(x);
  undo_row_swaps(f.pivots, x);
  return x;
}

// ---------------------------------------------------------------------------

DenseShiftedSolver::DenseShiftedSolver(const Pencil& pencil, bool cache_factorizations)
    : pencil_(pencil), cache_enabled_(cache_factorizations) {}

void DenseShiftedSolver::prepare(std::size_t node, Complex z) {
  {
    std::lock_guard lock(mutex_);
    auto it = cache_.find(node);
    if (it != cache_.end() && it->second->shift == z) {
      ++cache_hits_;
      return;
    }
  }
  auto f = std::make_shared<const LuFactors>(factorize(shifted_matrix(pencil_, z), z, static_cast<long>(node)));
  ++factorizations_;
  std::lock_guard lock(mutex_);
  cache_[node] = std::move(f);
}

std::shared_ptr<const LuFactors> DenseShiftedSolver::lookup(std::size_t node) const {
  std::lock_guard lock(mutex_);
  auto it = cache_.find(node);
  if (it == cache_.end())
    throw Error(ErrorKind::InvalidArgument, "solve requested for unprepared node " + std::to_string(node));
  return it->second;
}

ComplexBlock DenseShiftedSolver::solve(std::size_t node, const ComplexBlock& rhs) {
  auto f = lookup(node);
  ++solves_;
  return nhfeast::solve(*f, rhs);
}

ComplexBlock DenseShiftedSolver::solve_conj_transpose(std::size_t node, const ComplexBlock& rhs) {
  auto f = lookup(node);
  ++solves_;
  return nhfeast::solve_conj_transpose(*f, rhs);
}

void DenseShiftedSolver::release(std::size_t node) {
  if (cache_enabled_) return;
  std::lock_guard lock(mutex_);
  cache_.erase(node);
}

SolverCounters DenseShiftedSolver::counters() const {
  return {factorizations_.load(), solves_.load(), cache_hits_.load()};
}

std::size_t DenseShiftedSolver::cached_nodes() const {
  std::lock_guard lock(mutex_);
  return cache_.size();
}

std::shared_ptr<const LuFactors> DenseShiftedSolver::factors(std::size_t node) const {
  std::lock_guard lock(mutex_);
  auto it = cache_.find(node);
  return it == cache_.end() ? nullptr : it->second;
}

} // namespace nhfeast
