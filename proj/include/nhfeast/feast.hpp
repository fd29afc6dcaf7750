// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "nhfeast/contour.hpp"
#include "nhfeast/linsolve.hpp"
#include "nhfeast/matrices.hpp"
#include "nhfeast/reduced_eig.hpp"

namespace nhfeast {

/// Right and left blocks of equal shape (Y/Y-hat, Q/Q-hat, U/U-hat).
struct SubspacePair {
  ComplexBlock right;
  ComplexBlock left;

  Index width() const { return right.cols(); }
};

struct FeastConfig {
  Index m0 = 0;
  double epsilon = 1e-12;
  int max_iterations = 20;
  double eta = 1e-16;
  double mu = 0.1;
  std::uint64_t seed = 1;
  bool cache_factorizations = false;
  /// Use the complex-symmetric and real half-contour fast paths when the
  /// pencil kind and contour allow them.
  bool exploit_symmetry = true;
  /// Threads for per-node solves.
  unsigned workers = 1;
  /// Replaces the random start. In complex-symmetric mode only the right
  /// block is used; the left one is its conjugate.
  std::optional<SubspacePair> initial_guess;

  void validate(Index n) const;
};

/// Which identities the contour integration exploits.
enum class IntegrationMode {
  Full,             // factorize every node, solve and conj-transpose solve
  ComplexSymmetric, // right solves only, Q-hat = conj(Q)
  RealHalf,         // upper nodes only, both sides
  RealSymmetricHalf // upper nodes, right solves only
};

std::string_view to_string(IntegrationMode mode);
IntegrationMode select_mode(const Pencil& pencil, const Contour& contour, bool exploit_symmetry);
inline bool conjugate_dual(IntegrationMode m) {
  return m == IntegrationMode::ComplexSymmetric || m == IntegrationMode::RealSymmetricHalf;
}

struct ConvergenceCriteria {
  double epsilon = 1e-12;
  double alpha = 1.0;
};

struct ReducedSystem {
  ComplexDense b_q;
  ComplexDense a_u;
  ComplexDense b_u;
  EigDecomposition bq_decomp;
  GenEigDecomposition ritz;
};

struct IterationReport {
  int iteration = 0;
  Index width = 0; // m0 entering the iteration
  Index m_r = 0;
  Index m_s = 0;
  Index m_tilde0 = 0;
  Index m = 0;
  double max_residual = 0.0;
  /// Per Ritz pair, in subspace order (descending |rho|).
  std::vector<Complex> ritz_values;
  std::vector<double> residuals;
  std::vector<Complex> rho;
  std::vector<bool> inside;
  /// Flags against the previous iteration's Ritz pairs (empty at iteration 1).
  std::vector<bool> spurious;
  /// max |U-hat^H B U - I| after bi-orthonormalization.
  double biortho_error = 0.0;
  IntegrationMode mode = IntegrationMode::Full;
  SolverCounters counters; // this iteration only
  double seconds = 0.0;
};

enum class FeastStatus { Converged, MaxIterations };
std::string_view to_string(FeastStatus s);

struct FeastResult {
  FeastStatus status = FeastStatus::MaxIterations;
  std::vector<Complex> lambdas;
  ComplexBlock x_right;
  ComplexBlock x_left;
  std::vector<double> residuals;
  std::vector<IterationReport> reports;
  int iterations = 0;
  SolverCounters counters;
  /// Final Ritz subspace, reusable as an initial guess.
  SubspacePair subspace;
};

/// Seeded standard complex Gaussian blocks (independent right and left).
SubspacePair init_subspaces(Index n, Index m0, std::uint64_t seed);

/// Q = sum_j w_j (z_j B - A)^-1 B Y and Q-hat = sum_j conj(w_j) (z_j B - A)^-H B^H Y-hat.
/// Contributions are summed in ascending node order whatever `workers` is.
SubspacePair integrate_dual(const Pencil& pencil, const Contour& contour, const SubspacePair& y,
                            ShiftedSolver& solver, IntegrationMode mode, unsigned workers = 1);

ComplexDense project_bq(const Pencil& pencil, const SubspacePair& q);

struct ResizedDecomposition {
  EigDecomposition decomp;
  Index m_tilde0 = 0;
};
/// Keeps eigenpairs with |gamma| >= eta max |gamma|.
ResizedDecomposition decompose_resize(const ComplexDense& b_q, double eta,
                                      EigNormalization norm = EigNormalization::BiOrthonormal);

/// U = Q V Gamma^-1/2, U-hat = Q-hat V-hat conj(Gamma^-1/2).
SubspacePair biorthonormalize(const SubspacePair& q, const EigDecomposition& decomp);

/// One correction pass restoring U-hat^H B U = I to working precision, lost
/// to cancellation when small gamma are kept. In complex-symmetric mode the
/// correction keeps U-hat = conj(U).
void refine_biorthonormality(const Pencil& pencil, SubspacePair& u, bool complex_symmetric);

/// max |U-hat^H B U - I|
double biortho_error(const Pencil& pencil, const SubspacePair& u);

struct RitzStep {
  ComplexDense a_u;
  ComplexDense b_u;
  GenEigDecomposition ritz; // columns reordered like `lambdas`
  SubspacePair y;
  std::vector<Complex> lambdas;
  std::vector<Complex> rho;
};
/// Ritz pairs ordered by descending |rho(lambda)|.
RitzStep rayleigh_ritz(const Pencil& pencil, const SubspacePair& u, const Contour& contour,
                       EigNormalization norm = EigNormalization::BiOrthonormal);

std::vector<bool> detect_spurious(const std::vector<Complex>& rho_prev, const ComplexVector& b_q_diag, double mu);

std::vector<double> residuals(const Pencil& pencil, const SubspacePair& x, const std::vector<Complex>& lambdas,
                              const ConvergenceCriteria& criteria);

FeastResult run(const Pencil& pencil, const Contour& contour, const FeastConfig& config);
/// Same, with a caller-owned solver backend.
FeastResult run(const Pencil& pencil, const Contour& contour, const FeastConfig& config, ShiftedSolver& solver);

struct EstimateOptions {
  int samples = 32;
  std::uint64_t seed = 1;
  /// Use the n unit vectors instead of random probes (exact trace).
  bool full_basis = false;
  unsigned workers = 1;
};
/// Hutchinson estimate of trace(rho(B^-1 A)), the filtered eigenvalue count.
double estimate_count(const Pencil& pencil, const Contour& contour, const EstimateOptions& opts);

} // namespace nhfeast
