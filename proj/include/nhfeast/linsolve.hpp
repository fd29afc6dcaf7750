// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "nhfeast/matrices.hpp"

namespace nhfeast {

/// Packed LU factors of a row-pivoted square matrix: P M = L U with unit
/// lower L stored below the diagonal and U on and above it.
struct LuFactors {
  ComplexDense lu;
  /// LAPACK-style row interchanges: row k was swapped with row pivots[k].
  std::vector<Index> pivots;
  Complex shift{0.0, 0.0};
  /// min |U_ii| / max |U_ii|
  double pivot_ratio = 1.0;

  Index size() const { return lu.rows(); }
};

inline constexpr double kSingularPivotRatio = 1e-14;

/// Blocked right-looking LU with partial pivoting. Throws SingularShift when
/// min |U_ii| < 1e-14 max |U_ii|; the message names `shift` and `node`.
LuFactors factorize(ComplexDense m, Complex shift = {}, long node = -1);

/// Solves (P^T L U) X = rhs.
ComplexBlock solve(const LuFactors& f, const ComplexBlock& rhs);
/// Solves (P^T L U)^H X = rhs from the same factors.
ComplexBlock solve_conj_transpose(const LuFactors& f, const ComplexBlock& rhs);

/// Operation counters shared by shifted solvers. Solves count block solve
/// calls, whatever the number of right-hand sides.
struct SolverCounters {
  long factorizations = 0;
  long solves = 0;
  long cache_hits = 0;
};

/// Node-keyed access to the shifted systems (z_j B - A). The contour
/// integration only talks to this interface, so other backends (sparse,
/// iterative) can be slotted in behind it.
///
/// Implementations must allow concurrent calls for distinct nodes.
class ShiftedSolver {
public:
  virtual ~ShiftedSolver() = default;

  /// Make (z B - A) for `node` ready to solve.
  virtual void prepare(std::size_t node, Complex z) = 0;
  virtual ComplexBlock solve(std::size_t node, const ComplexBlock& rhs) = 0;
  virtual ComplexBlock solve_conj_transpose(std::size_t node, const ComplexBlock& rhs) = 0;
  /// Called once the node's solves for this integration are done.
  virtual void release(std::size_t node) = 0;

  virtual SolverCounters counters() const = 0;
};

/// Dense LU backend. With caching enabled, factors survive `release` and are
/// reused by later integrations as long as the shift is unchanged; this
/// trades memory (one n x n matrix per node) for repeated factorizations.
class DenseShiftedSolver final : public ShiftedSolver {
public:
  DenseShiftedSolver(const Pencil& pencil, bool cache_factorizations);

  void prepare(std::size_t node, Complex z) override;
  ComplexBlock solve(std::size_t node, const ComplexBlock& rhs) override;
  ComplexBlock solve_conj_transpose(std::size_t node, const ComplexBlock& rhs) override;
  void release(std::size_t node) override;
  SolverCounters counters() const override;

  bool caching() const { return cache_enabled_; }
  std::size_t cached_nodes() const;
  /// The factors currently held for `node` (null if none).
  std::shared_ptr<const LuFactors> factors(std::size_t node) const;

private:
  std::shared_ptr<const LuFactors> lookup(std::size_t node) const;

  const Pencil& pencil_;
  bool cache_enabled_;
  mutable std::mutex mutex_;
  std::map<std::size_t, std::shared_ptr<const LuFactors>> cache_;
  std::atomic<long> factorizations_{0};
  std::atomic<long> solves_{0};
  std::atomic<long> cache_hits_{0};
};

} // namespace nhfeast
