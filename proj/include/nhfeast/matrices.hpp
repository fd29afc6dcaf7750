// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "nhfeast/error.hpp"

namespace nhfeast {

using Complex = std::complex<double>;
using Index = Eigen::Index;

/// Dense complex matrix, column-major (Eigen default layout). Also used for
/// every n x m0 block of long vectors.
using ComplexDense = Eigen::MatrixXcd;
using ComplexBlock = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Compressed sparse row storage. Column indices are strictly increasing
/// within each row.
struct CsrComplex {
  Index rows = 0;
  Index cols = 0;
  std::vector<Index> row_pointers{0};
  std::vector<Index> col_indices;
  std::vector<Complex> values;

  struct Triplet {
    Index row;
    Index col;
    Complex value;
  };

  /// Sorts and sums duplicates; explicit zeros are kept.
  static CsrComplex from_triplets(Index rows, Index cols, std::vector<Triplet> entries);
  /// Stores every entry with a nonzero value.
  static CsrComplex from_dense(const ComplexDense& m);

  ComplexDense to_dense() const;
  Index nonzeros() const { return static_cast<Index>(values.size()); }
  /// Throws InvalidArgument if any structural invariant is broken.
  void validate() const;
};

using Matrix = std::variant<ComplexDense, CsrComplex>;

enum class PencilKind { ComplexGeneral, ComplexSymmetric, RealGeneral, RealSymmetric };

std::string_view to_string(PencilKind kind);
PencilKind pencil_kind_from_string(std::string_view name);

inline bool is_real_kind(PencilKind k) {
  return k == PencilKind::RealGeneral || k == PencilKind::RealSymmetric;
}
inline bool is_symmetric_kind(PencilKind k) {
  return k == PencilKind::ComplexSymmetric || k == PencilKind::RealSymmetric;
}

/// Matrix pencil (A, B). An empty `b` means B = I (standard problem).
///
/// Real kinds are stored with zero imaginary parts; the kind tag is a claim
/// by the caller that selects fast paths, checked by `validate(true)`.
struct Pencil {
  Matrix a;
  std::optional<Matrix> b;
  PencilKind kind = PencilKind::ComplexGeneral;

  Index size() const;
  bool standard() const { return !b.has_value(); }
  void validate(bool check_structure = false) const;
};

Index rows(const Matrix& m);
Index cols(const Matrix& m);
ComplexDense to_dense(const Matrix& m);
bool all_finite(const Matrix& m);
bool is_real(const Matrix& m);
/// Exact test M == M^T.
bool is_symmetric(const Matrix& m);

/// M * X
ComplexBlock matvec(const Matrix& m, const ComplexBlock& x);
/// M^H * X
ComplexBlock matvec_conj_transpose(const Matrix& m, const ComplexBlock& x);

/// B * X and B^H * X, with the identity shortcut.
ComplexBlock apply_b(const Pencil& p, const ComplexBlock& x);
ComplexBlock apply_b_conj_transpose(const Pencil& p, const ComplexBlock& x);

/// Dense z*B - A.
ComplexDense shifted_matrix(const Pencil& p, Complex z);

} // namespace nhfeast
