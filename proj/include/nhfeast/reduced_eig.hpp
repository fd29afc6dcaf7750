// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "nhfeast/matrices.hpp"

namespace nhfeast {

/// How eigenvector pairs are scaled.
enum class EigNormalization {
  /// Right vectors unit 2-norm, left vectors V^-H.
  BiOrthonormal,
  /// For complex-symmetric input: v^T v = 1 and left = conj(right).
  ComplexSymmetric,
};

/// M = V diag(gamma) V^H-hat, eigenvalues sorted by descending modulus.
struct EigDecomposition {
  std::vector<Complex> gamma;
  ComplexDense v_right;
  ComplexDense v_left;
};

/// A W = B W diag(lambda_q) with W-hat^H B W = I.
struct GenEigDecomposition {
  std::vector<Complex> lambda_q;
  ComplexDense w_right;
  ComplexDense w_left;
  /// Relative max-norm of A^H W-hat - B^H W-hat diag(conj(lambda_q)).
  double left_residual = 0.0;
};

/// M = Z T Z^H with T upper triangular and Z unitary.
struct SchurForm {
  ComplexDense t;
  ComplexDense z;
};

/// Householder reduction and shifted complex QR. Throws NonConvergedEig
/// after 30 n sweeps.
SchurForm complex_schur(const ComplexDense& m);

/// S with S^T G S = I for complex-symmetric G, from G = L D L^T without
/// pivoting. Throws DefectiveSuspected when a pivot falls below tol max|G|.
ComplexDense complex_symmetric_normalizer(const ComplexDense& g, double tol);

EigDecomposition eig_standard(const ComplexDense& m,
                              EigNormalization norm = EigNormalization::BiOrthonormal);

/// Reduces to B^-1 A. Throws SingularBU when B cannot be factorized.
GenEigDecomposition eig_generalized(const ComplexDense& a, const ComplexDense& b,
                                    EigNormalization norm = EigNormalization::BiOrthonormal);

} // namespace nhfeast
