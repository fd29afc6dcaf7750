// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nhfeast/contour.hpp"
#include "nhfeast/feast.hpp"

namespace nhfeast {

struct ContourSpec {
  ContourGeometry geometry = Ellipse{};
  /// Ellipse: total nodes. Polygon: nodes per edge.
  int nodes = 16;
  QuadratureRule rule = QuadratureRule::Trapezoidal;

  Contour build() const;
};

ContourSpec parse_contour_spec(const nlohmann::json& j);

/// Parsed job file. Relative matrix paths resolve against `base_dir`.
struct JobConfig {
  std::optional<std::filesystem::path> matrix_a;
  std::optional<std::filesystem::path> matrix_b;
  /// {"type": "grcar" | "diagonalizable", ...} in place of matrix files.
  std::optional<nlohmann::json> generator;
  std::optional<PencilKind> kind;
  std::vector<ContourSpec> contours;
  std::vector<Index> m0;
  /// Everything but m0.
  FeastConfig feast;
  unsigned workers = 1;
  std::filesystem::path output_dir = "nhfeast_out";
  std::filesystem::path base_dir = ".";
};

JobConfig parse_job(const nlohmann::json& j, const std::filesystem::path& base_dir = ".");
JobConfig load_job(const std::filesystem::path& path);

/// Reads or generates the pencil; without an explicit kind it is detected
/// from the entries (real, symmetric).
Pencil load_pencil(const JobConfig& job);
PencilKind detect_kind(const Pencil& p);

struct ContourOutcome {
  std::optional<FeastResult> result;
  std::optional<Error> error;
  double alpha = 0.0;
  double seconds = 0.0;
  /// Expected per-iteration work for the pencil kind and flags.
  WorkPlan plan;
};

struct MergedEigenvalue {
  Complex lambda;
  double residual = 0.0;
  std::size_t contour = 0;
  Index column = 0;
};

struct Duplicate {
  MergedEigenvalue kept;
  MergedEigenvalue dropped;
};

struct MergedResult {
  std::vector<ContourOutcome> per_contour;
  std::vector<MergedEigenvalue> merged;
  std::vector<Duplicate> duplicates;

  bool all_converged() const;
};

/// Runs every contour as its own task on up to `workers` threads; the
/// remaining budget goes to per-node solves inside each contour. Module
/// errors are captured per contour.
MergedResult solve_contours(const Pencil& pencil, const std::vector<Contour>& contours,
                            const std::vector<Index>& m0, const FeastConfig& feast, unsigned workers);

nlohmann::json report_json(const MergedResult& r, const std::vector<Contour>& contours, const FeastConfig& feast);
nlohmann::json error_json(const Error& e, std::optional<std::size_t> contour = std::nullopt);

/// eigenvalues.csv, report.json and per-contour vector files.
void write_solve_outputs(const MergedResult& r, const std::vector<Contour>& contours, const FeastConfig& feast,
                         const std::filesystem::path& dir);

/// |rho| on an nx x ny grid as CSV rows "re,im,abs_rho"; node hits print inf.
void write_filter_grid(std::ostream& out, const Contour& c, double xmin, double xmax, double ymin, double ymax,
                       int nx, int ny);

} // namespace nhfeast
