// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <iosfwd>

#include "nhfeast/matrices.hpp"

namespace nhfeast {

/// Reads a Matrix Market file. Coordinate files become CSR, array files
/// become dense. Supported fields: real, integer, complex. Supported
/// symmetries: general, symmetric, skew-symmetric, hermitian (the stored
/// triangle is mirrored). Errors carry the 1-based line number.
Matrix read_matrix_market(const std::filesystem::path& path);
Matrix read_matrix_market(std::istream& in);

/// Writes a dense block as "array complex general" with 17 significant
/// digits, which round-trips doubles exactly.
void write_matrix_market(const std::filesystem::path& path, const ComplexDense& m);
void write_matrix_market(std::ostream& out, const ComplexDense& m);

/// Writes a CSR matrix as "coordinate complex general".
void write_matrix_market(std::ostream& out, const CsrComplex& m);

} // namespace nhfeast
