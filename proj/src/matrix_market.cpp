// SPDX-License-Identifier: Apache-2.0
#include "nhfeast/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

namespace nhfeast {

namespace {

enum class Field { Real, Complex };
enum class Symmetry { General, Symmetric, SkewSymmetric, Hermitian };

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

[[noreturn]] void parse_error(long line, const std::string& what) {
  throw Error(ErrorKind::Parse, "Matrix Market line " + std::to_string(line) + ": " + what);
}

// Next non-comment, non-blank line.
bool next_data_line(std::istream& in, std::string& line, long& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    auto pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos || line[pos] == '%') continue;
    return true;
  }
  return false;
}

Complex read_value(std::istringstream& ss, Field field, long line_no) {
  double re = 0.0, im = 0.0;
  if (!(ss >> re)) parse_error(line_no, "missing value");
  if (field == Field::Complex && !(ss >> im)) parse_error(line_no, "missing imaginary part");
  return {re, im};
}

Complex mirror(Complex v, Symmetry s) {
  switch (s) {
  case Symmetry::SkewSymmetric: return -v;
  case Symmetry::Hermitian: return std::conj(v);
  default: return v;
  }
}

} // namespace

Matrix read_matrix_market(std::istream& in) {
  long line_no = 0;
  std::string line;
  if (!std::getline(in, line)) parse_error(1, "empty file");
  ++line_no;

  std::istringstream header(line);
  std::string banner, object, format, field_s, sym_s;
  header >> banner >> object >> format >> field_s >> sym_s;
  if (banner != "%%MatrixMarket") parse_error(line_no, "missing %%MatrixMarket banner");
  object = lower(object);
  format = lower(format);
  field_s = lower(field_s);
  sym_s = lower(sym_s);
  if (object != "matrix") throw Error(ErrorKind::UnsupportedFormat, "unsupported object '" + object + "'");

  Field field;
  if (field_s == "real" || field_s == "integer" || field_s == "double")
    field = Field::Real;
  else if (field_s == "complex")
    field = Field::Complex;
  else
    throw Error(ErrorKind::UnsupportedFormat, "unsupported field type '" + field_s + "'");

  Symmetry sym;
  if (sym_s == "general")
    sym = Symmetry::General;
  else if (sym_s == "symmetric")
    sym = Symmetry::Symmetric;
  else if (sym_s == "skew-symmetric")
    sym = Symmetry::SkewSymmetric;
  else if (sym_s == "hermitian")
    sym = Symmetry::Hermitian;
  else
    throw Error(ErrorKind::UnsupportedFormat, "unsupported symmetry '" + sym_s + "'");

  if (!next_data_line(in, line, line_no)) parse_error(line_no, "missing size line");
  std::istringstream size_line(line);

  if (format == "coordinate") {
    long long r = 0, c = 0, nnz = 0;
    if (!(size_line >> r >> c >> nnz) || r < 0 || c < 0 || nnz < 0) parse_error(line_no, "bad size line");
    std::vector<CsrComplex::Triplet> entries;
    entries.reserve(static_cast<std::size_t>(sym == Symmetry::General ? nnz : 2 * nnz));
    for (long long k = 0; k < nnz; ++k) {
      if (!next_data_line(in, line, line_no)) parse_error(line_no, "unexpected end of file");
      std::istringstream ss(line);
      long long i = 0, j = 0;
      if (!(ss >> i >> j)) parse_error(line_no, "bad entry indices");
      if (i < 1 || i > r || j < 1 || j > c) parse_error(line_no, "entry index out of range");
      Complex v = read_value(ss, field, line_no);
      entries.push_back({static_cast<Index>(i - 1), static_cast<Index>(j - 1), v});
      if (sym != Symmetry::General && i != j)
        entries.push_back({static_cast<Index>(j - 1), static_cast<Index>(i - 1), mirror(v, sym)});
    }
    return CsrComplex::from_triplets(r, c, std::move(entries));
  }

  if (format == "array") {
    long long r = 0, c = 0;
    if (!(size_line >> r >> c) || r < 0 || c < 0) parse_error(line_no, "bad size line");
    ComplexDense m = ComplexDense::Zero(r, c);
    // Column-major; symmetric variants store the lower triangle only.
    for (long long j = 0; j < c; ++j) {
      long long first = (sym == Symmetry::General) ? 0 : (sym == Symmetry::SkewSymmetric ? j + 1 : j);
      for (long long i = first; i < r; ++i) {
        if (!next_data_line(in, line, line_no)) parse_error(line_no, "unexpected end of file");
        std::istringstream ss(line);
        Complex v = read_value(ss, field, line_no);
        m(i, j) = v;
        if (sym != Symmetry::General && i != j) m(j, i) = mirror(v, sym);
      }
    }
    return m;
  }

  throw Error(ErrorKind::UnsupportedFormat, "unsupported format '" + format + "'");
}

Matrix read_matrix_market(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  return read_matrix_market(in);
}

void write_matrix_market(std::ostream& out, const ComplexDense& m) {
  out << "%%MatrixMarket matrix array complex general\n";
  out << m.rows() << ' ' << m.cols() << '\n';
  out << std::setprecision(17);
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i) out << m(i, j).real() << ' ' << m(i, j).imag() << '\n';
}

void write_matrix_market(const std::filesystem::path& path, const ComplexDense& m) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  write_matrix_market(out, m);
}

void write_matrix_market(std::ostream& out, const CsrComplex& m) {
  out << "%%MatrixMarket matrix coordinate complex general\n";
  out << m.rows << ' ' << m.cols << ' ' << m.nonzeros() << '\n';
  out << std::setprecision(17);
  for (Index i = 0; i < m.rows; ++i)
    for (Index k = m.row_pointers[i]; k < m.row_pointers[i + 1]; ++k)
      out << i + 1 << ' ' << m.col_indices[k] + 1 << ' ' << m.values[k].real() << ' ' << m.values[k].imag()
          << '\n';
}

} // namespace nhfeast
