// SPDX-License-Identifier: Apache-2.0
// nhfeast command-line driver: solve, estimate, filter-grid.
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "nhfeast/job.hpp"

using namespace nhfeast;
using nlohmann::json;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

// NHFEAST_WORKERS overrides the worker count from the config file.
unsigned workers_from_env(unsigned fallback) {
  const char* v = std::getenv("NHFEAST_WORKERS");
  if (!v || !*v) return fallback;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 1) {
    std::cerr << "ignoring invalid NHFEAST_WORKERS=" << v << '\n';
    return fallback;
  }
  return static_cast<unsigned>(n);
}

std::vector<Contour> build_contours(const JobConfig& job) {
  std::vector<Contour> cs;
  for (const auto& s : job.contours) cs.push_back(s.build());
  return cs;
}

int fail(const Error& e) {
  std::cerr << error_json(e).dump() << '\n';
  return e.kind() == ErrorKind::InvalidArgument || e.kind() == ErrorKind::Parse ? kExitUsage : kExitFailure;
}

int cmd_solve(const std::string& config) {
  const JobConfig job = load_job(config);
  const unsigned workers = workers_from_env(job.workers);
  const Pencil pencil = load_pencil(job);
  const auto contours = build_contours(job);
  const MergedResult r = solve_contours(pencil, contours, job.m0, job.feast, workers);
  write_solve_outputs(r, contours, job.feast, job.output_dir);

  int status = 0;
  for (std::size_t k = 0; k < r.per_contour.size(); ++k) {
    const auto& o = r.per_contour[k];
    if (o.error) {
      std::cerr << error_json(*o.error, k).dump() << '\n';
      status = kExitFailure;
      continue;
    }
    std::cout << "contour " << k << ": " << to_string(o.result->status) << ", m = " << o.result->lambdas.size()
              << ", iterations = " << o.result->iterations << '\n';
    if (o.result->status != FeastStatus::Converged) status = kExitFailure;
  }
  std::cout << r.merged.size() << " eigenvalues written to " << (job.output_dir / "eigenvalues.csv").string() << '\n';
  return status;
}

int cmd_estimate(const std::string& config, int samples, bool full_basis) {
  const JobConfig job = load_job(config);
  const unsigned workers = workers_from_env(job.workers);
  const Pencil pencil = load_pencil(job);
  const auto contours = build_contours(job);
  json out = json::array();
  for (std::size_t k = 0; k < contours.size(); ++k) {
    EstimateOptions opts;
    opts.samples = samples;
    opts.seed = job.feast.seed;
    opts.full_basis = full_basis;
    opts.workers = workers;
    const double est = estimate_count(pencil, contours[k], opts);
    const long m0 = std::max(1L, static_cast<long>(std::ceil(2.0 * est)));
    std::cout << "contour " << k << ": estimated count " << est << ", suggested m0 " << m0 << '\n';
    out.push_back({{"contour", k}, {"estimate", est}, {"suggested_m0", m0}});
  }
  std::cout << json{{"estimates", out}}.dump() << '\n';
  return 0;
}

int cmd_filter_grid(const std::string& config, double xmin, double xmax, double ymin, double ymax, int nx, int ny,
                    const std::string& output) {
  std::ifstream in(config);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + config);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, config + ": " + e.what());
  }
  // Accept a bare contour, {"contour": {...}}, or a job file (first contour).
  const json* spec = &j;
  if (j.contains("contour")) spec = &j.at("contour");
  else if (j.contains("contours") && j.at("contours").is_array() && !j.at("contours").empty())
    spec = &j.at("contours")[0];
  const Contour c = parse_contour_spec(*spec).build();
  if (output.empty() || output == "-") {
    write_filter_grid(std::cout, c, xmin, xmax, ymin, ymax, nx, ny);
  } else {
    std::ofstream out(output);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + output);
    write_filter_grid(out, c, xmin, xmax, ymin, ymax, nx, ny);
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Non-Hermitian FEAST eigensolver"};
  app.require_subcommand(1);

  std::string config;
  auto* solve = app.add_subcommand("solve", "Compute the eigenpairs inside each contour of a job");
  solve->add_option("--config", config, "Job file (JSON)")->required()->check(CLI::ExistingFile);

  int samples = 32;
  bool full_basis = false;
  auto* estimate = app.add_subcommand("estimate", "Estimate the eigenvalue count inside each contour");
  estimate->add_option("--config", config, "Job file (JSON)")->required()->check(CLI::ExistingFile);
  estimate->add_option("--samples", samples, "Number of random probe vectors")->check(CLI::PositiveNumber);
  estimate->add_flag("--full-basis", full_basis, "Use all unit vectors (exact trace)");

  double xmin = -2, xmax = 2, ymin = -2, ymax = 2;
  int nx = 101, ny = 101;
  std::string output;
  auto* grid = app.add_subcommand("filter-grid", "Tabulate |rho| on a rectangular grid");
  grid->add_option("--config", config, "Contour spec (JSON)")->required()->check(CLI::ExistingFile);
  grid->add_option("--xmin", xmin);
  grid->add_option("--xmax", xmax);
  grid->add_option("--ymin", ymin);
  grid->add_option("--ymax", ymax);
  grid->add_option("--nx", nx)->check(CLI::Range(2, 1 << 20));
  grid->add_option("--ny", ny)->check(CLI::Range(2, 1 << 20));
  grid->add_option("--output,-o", output, "CSV file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*solve) return cmd_solve(config);
    if (*estimate) return cmd_estimate(config, samples, full_basis);
    if (*grid) return cmd_filter_grid(config, xmin, xmax, ymin, ymax, nx, ny, output);
  } catch (const Error& e) {
    return fail(e);
  }
  return kExitUsage;
}
