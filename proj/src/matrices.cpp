// SPDX-License-Identifier: Apache-2.0
#include "nhfeast/matrices.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace nhfeast {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
  case ErrorKind::DimensionMismatch: return "DimensionMismatch";
  case ErrorKind::InvalidArgument: return "InvalidArgument";
  case ErrorKind::Parse: return "ParseError";
  case ErrorKind::UnsupportedFormat: return "UnsupportedFormat";
  case ErrorKind::Io: return "IoError";
  case ErrorKind::InvalidContour: return "InvalidContour";
  case ErrorKind::SingularFilter: return "SingularFilter";
  case ErrorKind::SingularShift: return "SingularShift";
  case ErrorKind::NonConvergedEig: return "NonConvergedEig";
  case ErrorKind::DefectiveSuspected: return "DefectiveSuspected";
  case ErrorKind::SingularBU: return "SingularBU";
  case ErrorKind::EmptySubspace: return "EmptySubspace";
  }
  return "Unknown";
}

std::string_view to_string(PencilKind kind) {
  switch (kind) {
  case PencilKind::ComplexGeneral: return "complex_general";
  case PencilKind::ComplexSymmetric: return "complex_symmetric";
  case PencilKind::RealGeneral: return "real_general";
  case PencilKind::RealSymmetric: return "real_symmetric";
  }
  return "unknown";
}

PencilKind pencil_kind_from_string(std::string_view name) {
  if (name == "complex_general") return PencilKind::ComplexGeneral;
  if (name == "complex_symmetric") return PencilKind::ComplexSymmetric;
  if (name == "real_general") return PencilKind::RealGeneral;
  if (name == "real_symmetric") return PencilKind::RealSymmetric;
  throw Error(ErrorKind::InvalidArgument, "unknown pencil kind '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// CSR

CsrComplex CsrComplex::from_triplets(Index rows, Index cols, std::vector<Triplet> entries) {
  if (rows < 0 || cols < 0) throw Error(ErrorKind::InvalidArgument, "negative matrix dimension");
  for (const auto& t : entries) {
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
      throw Error(ErrorKind::InvalidArgument, "triplet index out of range");
  }
  std::sort(entries.begin(), entries.end(), [](const Triplet& x, const Triplet& y) {
    return x.row != y.row ? x.row < y.row : x.col < y.col;
  });

  CsrComplex out;
  out.rows = rows;
  out.cols = cols;
  out.row_pointers.assign(static_cast<std::size_t>(rows) + 1, 0);
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const auto& t = entries[k];
    if (!out.col_indices.empty() && k > 0 && entries[k - 1].row == t.row &&
        entries[k - 1].col == t.col) {
      out.values.back() += t.value;
      continue;
    }
    out.col_indices.push_back(t.col);
    out.values.push_back(t.value);
    ++out.row_pointers[static_cast<std::size_t>(t.row) + 1];
  }
  for (Index i = 0; i < rows; ++i) out.row_pointers[i + 1] += out.row_pointers[i];
  return out;
}

CsrComplex CsrComplex::from_dense(const ComplexDense& m) {
  std::vector<Triplet> entries;
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      if (m(i, j) != Complex(0.0)) entries.push_back({i, j, m(i, j)});
  return from_triplets(m.rows(), m.cols(), std::move(entries));
}

ComplexDense CsrComplex::to_dense() const {
  ComplexDense out = ComplexDense::Zero(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index k = row_pointers[i]; k < row_pointers[i + 1]; ++k) out(i, col_indices[k]) = values[k];
  return out;
}

void CsrComplex::validate() const {
  auto fail = [](const char* what) { throw Error(ErrorKind::InvalidArgument, what); };
  if (rows < 0 || cols < 0) fail("CSR: negative dimension");
  if (row_pointers.size() != static_cast<std::size_t>(rows) + 1) fail("CSR: row_pointers length must be rows+1");
  if (row_pointers.front() != 0) fail("CSR: row_pointers must start at 0");
  if (static_cast<std::size_t>(row_pointers.back()) != col_indices.size() ||
      col_indices.size() != values.size())
    fail("CSR: inconsistent entry counts");
  for (Index i = 0; i < rows; ++i) {
    if (row_pointers[i + 1] < row_pointers[i]) fail("CSR: row_pointers must be nondecreasing");
    for (Index k = row_pointers[i]; k < row_pointers[i + 1]; ++k) {
      if (col_indices[k] < 0 || col_indices[k] >= cols) fail("CSR: column index out of range");
      if (k > row_pointers[i] && col_indices[k] <= col_indices[k - 1])
        fail("CSR: column indices must be strictly increasing within a row");
    }
  }
  for (const auto& v : values)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) fail("CSR: non-finite entry");
}

// ---------------------------------------------------------------------------
// Generic matrix helpers

namespace {

template <class... F> struct Overloaded : F... { using F::operator()...; };
template <class... F> Overloaded(F...) -> Overloaded<F...>;

void require_conforming(Index inner, Index x_rows) {
  if (inner != x_rows)
    throw Error(ErrorKind::DimensionMismatch, "matvec: matrix has " + std::to_string(inner) +
                                                  " columns but block has " + std::to_string(x_rows) +
                                                  " rows");
}

} // namespace

Index rows(const Matrix& m) {
  return std::visit(Overloaded{[](const ComplexDense& d) { return d.rows(); },
                               [](const CsrComplex& s) { return s.rows; }},
                    m);
}

Index cols(const Matrix& m) {
  return std::visit(Overloaded{[](const ComplexDense& d) { return d.cols(); },
                               [](const CsrComplex& s) { return s.cols; }},
                    m);
}

ComplexDense to_dense(const Matrix& m) {
  return std::visit(Overloaded{[](const ComplexDense& d) { return d; },
                               [](const CsrComplex& s) { return s.to_dense(); }},
                    m);
}

bool all_finite(const Matrix& m) {
  auto finite = [](const Complex& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); };
  return std::visit(Overloaded{[&](const ComplexDense& d) {
                                 return std::all_of(d.data(), d.data() + d.size(), finite);
                               },
                               [&](const CsrComplex& s) {
                                 return std::all_of(s.values.begin(), s.values.end(), finite);
                               }},
                    m);
}

bool is_real(const Matrix& m) {
  auto real = [](const Complex& v) { return v.imag() == 0.0; };
  return std::visit(Overloaded{[&](const ComplexDense& d) {
                                 return std::all_of(d.data(), d.data() + d.size(), real);
                               },
                               [&](const CsrComplex& s) {
                                 return std::all_of(s.values.begin(), s.values.end(), real);
                               }},
                    m);
}

bool is_symmetric(const Matrix& m) {
  if (rows(m) != cols(m)) return false;
  ComplexDense d = to_dense(m);
  return d == d.transpose();
}

ComplexBlock matvec(const Matrix& m, const ComplexBlock& x) {
  return std::visit(Overloaded{[&](const ComplexDense& d) -> ComplexBlock {
                                 require_conforming(d.cols(), x.rows());
                                 return d * x;
                               },
                               [&](const CsrComplex& s) -> ComplexBlock {
                                 require_conforming(s.cols, x.rows());
                                 ComplexBlock y = ComplexBlock::Zero(s.rows, x.cols());
                                 for (Index i = 0; i < s.rows; ++i)
                                   for (Index k = s.row_pointers[i]; k < s.row_pointers[i + 1]; ++k)
                                     y.row(i) += s.values[k] * x.row(s.col_indices[k]);
                                 return y;
                               }},
                    m);
}

ComplexBlock matvec_conj_transpose(const Matrix& m, const ComplexBlock& x) {
  return std::visit(Overloaded{[&](const ComplexDense& d) -> ComplexBlock {
                                 require_conforming(d.rows(), x.rows());
                                 return d.adjoint() * x;
                               },
                               [&](const CsrComplex& s) -> ComplexBlock {
                                 require_conforming(s.rows, x.rows());
                                 ComplexBlock y = ComplexBlock::Zero(s.cols, x.cols());
                                 for (Index i = 0; i < s.rows; ++i)
                                   for (Index k = s.row_pointers[i]; k < s.row_pointers[i + 1]; ++k)
                                     y.row(s.col_indices[k]) += std::conj(s.values[k]) * x.row(i);
                                 return y;
                               }},
                    m);
}

// ---------------------------------------------------------------------------
// Pencil

Index Pencil::size() const { return rows(a); }

void Pencil::validate(bool check_structure) const {
  if (rows(a) != cols(a)) throw Error(ErrorKind::DimensionMismatch, "pencil: A must be square");
  if (b && (rows(*b) != cols(*b) || rows(*b) != rows(a)))
    throw Error(ErrorKind::DimensionMismatch, "pencil: B must be square and the same size as A");
  if (const auto* s = std::get_if<CsrComplex>(&a)) s->validate();
  if (b)
    if (const auto* s = std::get_if<CsrComplex>(&*b)) s->validate();
  if (!all_finite(a) || (b && !all_finite(*b)))
    throw Error(ErrorKind::InvalidArgument, "pencil: non-finite entries");
  if (!check_structure) return;

  if (is_real_kind(kind) && (!is_real(a) || (b && !is_real(*b))))
    throw Error(ErrorKind::InvalidArgument,
                "pencil: kind " + std::string(to_string(kind)) + " but matrices have imaginary parts");
  if (is_symmetric_kind(kind) && (!is_symmetric(a) || (b && !is_symmetric(*b))))
    throw Error(ErrorKind::InvalidArgument,
                "pencil: kind " + std::string(to_string(kind)) + " but A or B is not symmetric");
}

ComplexBlock apply_b(const Pencil& p, const ComplexBlock& x) {
  if (!p.b) {
    if (x.rows() != p.size()) require_conforming(p.size(), x.rows());
    return x;
  }
  return matvec(*p.b, x);
}

ComplexBlock apply_b_conj_transpose(const Pencil& p, const ComplexBlock& x) {
  if (!p.b) {
    if (x.rows() != p.size()) require_conforming(p.size(), x.rows());
    return x;
  }
  return matvec_conj_transpose(*p.b, x);
}

ComplexDense shifted_matrix(const Pencil& p, Complex z) {
  ComplexDense m = -to_dense(p.a);
  if (p.b)
    m += z * to_dense(*p.b);
  else
    m.diagonal().array() += z;
  return m;
}

} // namespace nhfeast
