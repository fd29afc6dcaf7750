// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "nhfeast/matrices.hpp"

namespace nhfeast {

/// Grcar test matrix: -1 on the first subdiagonal, +1 on the diagonal and the
/// first three superdiagonals. B = I, kind RealGeneral, CSR storage.
Pencil gen_grcar(Index n);

enum class OracleStructure {
  General,          // complex A, B
  Real,             // real A, B; eigenvalue list must be closed under conjugation
  ComplexSymmetric, // A = A^T, B = B^T; left vectors are conj(X)
};

struct OracleOptions {
  double conditioning = 1.0; // upper bound on cond_2(X), >= 1
  std::uint64_t seed = 1;
  bool identity_b = true;
  OracleStructure structure = OracleStructure::General;
};

/// Pencil with known spectrum and eigenvectors: A X = B X diag(eigenvalues)
/// and x_left^H B x_right = I.
struct OraclePencil {
  Pencil pencil;
  ComplexDense x_right;
  ComplexDense x_left;
  /// Eigenvalue of column k of x_right (order may differ from the input list
  /// for the Real structure, where conjugate pairs are grouped).
  std::vector<Complex> eigenvalues;
};

/// Builds A = B X Lambda X^{-1}.
///
/// General: X = U1 diag(s) U2^H with Haar-like random unitary U1, U2 (QR of a
/// seeded complex Gaussian) and singular values s log-spaced on
/// [1, conditioning]; B (unless identity) is built the same way with
/// singular values on [1, 2].
/// Real: same recipe with real orthogonal factors, applied to the real block
/// diagonal form of Lambda (2x2 rotation-scaling blocks for conjugate pairs).
/// ComplexSymmetric: X = C^{-1} O with O the Cayley transform of a complex
/// skew-symmetric matrix (so O^T O = I) and B = C^T C; cond(O) <= conditioning.
///
/// Throws InvalidArgument for non-finite eigenvalues, conditioning < 1, or a
/// Real request whose eigenvalues are not closed under conjugation;
/// DefectiveSuspected if the generated X is numerically singular.
OraclePencil gen_diagonalizable_pencil(const std::vector<Complex>& eigenvalues,
                                       const OracleOptions& options = {});

} // namespace nhfeast
