// SPDX-License-Identifier: Apache-2.0
#include "nhfeast/job.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <random>

#include "nhfeast/generators.hpp"
#include "nhfeast/matrix_market.hpp"
#include "nhfeast/parallel.hpp"

namespace nhfeast {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorKind::InvalidArgument, "config: " + msg); }

Complex parse_complex(const json& j, const char* what) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  config_error(std::string(what) + " must be a number or [re, im]");
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    config_error(std::string("bad value for \"") + key + "\"");
  }
}

OracleStructure oracle_structure_from_string(const std::string& s) {
  if (s == "general") return OracleStructure::General;
  if (s == "real") return OracleStructure::Real;
  if (s == "complex_symmetric") return OracleStructure::ComplexSymmetric;
  config_error("unknown oracle structure \"" + s + "\"");
}

Pencil generate(const json& g) {
  const std::string type = get_or<std::string>(g, "type", "");
  if (type == "grcar") return gen_grcar(get_or<Index>(g, "n", 100));
  if (type != "diagonalizable") config_error("generator type must be \"grcar\" or \"diagonalizable\"");

  std::vector<Complex> eigs;
  if (g.contains("eigenvalues")) {
    for (const auto& e : g.at("eigenvalues")) eigs.push_back(parse_complex(e, "eigenvalue"));
  } else if (g.contains("random_disk")) {
    // Uniform in the disk |z - center| < radius.
    const json& d = g.at("random_disk");
    const Index count = get_or<Index>(d, "count", 0);
    const double radius = get_or<double>(d, "radius", 1.0);
    const Complex center = d.contains("center") ? parse_complex(d.at("center"), "center") : Complex(0.0);
    std::mt19937_64 rng(get_or<std::uint64_t>(d, "seed", 1));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (Index k = 0; k < count; ++k) {
      const double r = radius * std::sqrt(unit(rng));
      const double t = 2.0 * std::numbers::pi * unit(rng);
      eigs.push_back(center + std::polar(r, t));
    }
  } else {
    config_error("diagonalizable generator needs \"eigenvalues\" or \"random_disk\"");
  }
  OracleOptions o;
  o.conditioning = get_or<double>(g, "conditioning", 1.0);
  o.seed = get_or<std::uint64_t>(g, "seed", 1);
  o.identity_b = get_or<bool>(g, "identity_b", true);
  o.structure = oracle_structure_from_string(get_or<std::string>(g, "structure", "general"));
  return gen_diagonalizable_pencil(eigs, o).pencil;
}

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Per-iteration work for a given integration mode.
WorkPlan mode_plan(IntegrationMode mode, int n_e) {
  switch (mode) {
  case IntegrationMode::Full: return {n_e, 2 * n_e};
  case IntegrationMode::ComplexSymmetric: return {n_e, n_e};
  case IntegrationMode::RealHalf: return {n_e / 2, n_e};
  case IntegrationMode::RealSymmetricHalf: return {n_e / 2, n_e / 2};
  }
  return {};
}

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

} // namespace

Contour ContourSpec::build() const {
  if (const auto* e = std::get_if<Ellipse>(&geometry)) return gen_ellipse(*e, nodes, rule);
  return gen_polygon(std::get<Polygon>(geometry).vertices, nodes, rule);
}

ContourSpec parse_contour_spec(const json& j) {
  if (!j.is_object()) config_error("contour must be an object");
  ContourSpec s;
  const std::string type = get_or<std::string>(j, "type", "ellipse");
  s.rule = quadrature_rule_from_string(get_or<std::string>(j, "rule", "trapezoidal"));
  if (type == "ellipse" || type == "circle") {
    Ellipse e;
    if (j.contains("center")) e.center = parse_complex(j.at("center"), "center");
    e.radius = get_or<double>(j, "radius", 1.0);
    e.aspect = get_or<double>(j, "aspect", 1.0);
    e.rotation = get_or<double>(j, "rotation", 0.0);
    s.geometry = e;
    s.nodes = get_or<int>(j, "nodes", 16);
  } else if (type == "polygon") {
    Polygon p;
    if (!j.contains("vertices") || !j.at("vertices").is_array()) config_error("polygon needs \"vertices\"");
    for (const auto& v : j.at("vertices")) p.vertices.push_back(parse_complex(v, "vertex"));
    s.geometry = p;
    s.nodes = get_or<int>(j, "nodes_per_edge", get_or<int>(j, "nodes", 4));
  } else {
    config_error("contour type must be \"ellipse\" or \"polygon\"");
  }
  return s;
}

JobConfig parse_job(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) config_error("top level must be an object");
  JobConfig c;
  c.base_dir = base_dir;
  if (j.contains("matrix")) {
    const json& m = j.at("matrix");
    if (m.is_string()) {
      c.matrix_a = m.get<std::string>();
    } else {
      if (!m.contains("a")) config_error("\"matrix\" needs an \"a\" path");
      c.matrix_a = m.at("a").get<std::string>();
      if (m.contains("b") && !m.at("b").is_null()) c.matrix_b = m.at("b").get<std::string>();
    }
  }
  if (j.contains("generator")) c.generator = j.at("generator");
  if (c.matrix_a.has_value() == c.generator.has_value()) config_error("give exactly one of \"matrix\" and \"generator\"");
  if (j.contains("kind")) c.kind = pencil_kind_from_string(j.at("kind").get<std::string>());

  if (!j.contains("contours") || !j.at("contours").is_array() || j.at("contours").empty())
    config_error("at least one contour is required");
  for (const auto& cj : j.at("contours")) c.contours.push_back(parse_contour_spec(cj));

  if (!j.contains("m0")) config_error("\"m0\" is required");
  const json& m0 = j.at("m0");
  if (m0.is_number_integer()) {
    c.m0.assign(c.contours.size(), m0.get<Index>());
  } else if (m0.is_array()) {
    for (const auto& v : m0) c.m0.push_back(v.get<Index>());
  } else {
    config_error("\"m0\" must be an integer or a list");
  }
  if (c.m0.size() != c.contours.size())
    config_error("m0 list has " + std::to_string(c.m0.size()) + " entries for " + std::to_string(c.contours.size()) +
                 " contours");

  c.feast.epsilon = get_or<double>(j, "epsilon", c.feast.epsilon);
  c.feast.max_iterations = get_or<int>(j, "max_iterations", c.feast.max_iterations);
  c.feast.eta = get_or<double>(j, "eta", c.feast.eta);
  c.feast.mu = get_or<double>(j, "mu", c.feast.mu);
  c.feast.seed = get_or<std::uint64_t>(j, "seed", c.feast.seed);
  c.feast.cache_factorizations = get_or<bool>(j, "cache_factorizations", c.feast.cache_factorizations);
  c.feast.exploit_symmetry = get_or<bool>(j, "exploit_symmetry", c.feast.exploit_symmetry);
  c.workers = get_or<unsigned>(j, "workers", c.workers);
  if (c.workers < 1) config_error("workers must be >= 1");
  c.output_dir = get_or<std::string>(j, "output_dir", c.output_dir.string());
  return c;
}

JobConfig load_job(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, "config " + path.string() + ": " + e.what());
  }
  return parse_job(j, path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

PencilKind detect_kind(const Pencil& p) {
  const bool real = is_real(p.a) && (!p.b || is_real(*p.b));
  const bool sym = is_symmetric(p.a) && (!p.b || is_symmetric(*p.b));
  if (real) return sym ? PencilKind::RealSymmetric : PencilKind::RealGeneral;
  return sym ? PencilKind::ComplexSymmetric : PencilKind::ComplexGeneral;
}

Pencil load_pencil(const JobConfig& job) {
  Pencil p;
  if (job.generator) {
    p = generate(*job.generator);
  } else {
    auto resolve = [&](const std::filesystem::path& f) { return f.is_absolute() ? f : job.base_dir / f; };
    p.a = read_matrix_market(resolve(*job.matrix_a));
    if (job.matrix_b) p.b = read_matrix_market(resolve(*job.matrix_b));
    p.kind = detect_kind(p);
  }
  if (job.kind) p.kind = *job.kind;
  p.validate(true);
  return p;
}

bool MergedResult::all_converged() const {
  return std::all_of(per_contour.begin(), per_contour.end(), [](const ContourOutcome& o) {
    return o.result && o.result->status == FeastStatus::Converged;
  });
}

MergedResult solve_contours(const Pencil& pencil, const std::vector<Contour>& contours,
                            const std::vector<Index>& m0, const FeastConfig& feast, unsigned workers) {
  if (m0.size() != contours.size())
    throw Error(ErrorKind::InvalidArgument, "solve_contours: one m0 per contour is required");
  MergedResult out;
  const std::size_t nc = contours.size();
  out.per_contour.resize(nc);
  workers = std::max(workers, 1u);
  const unsigned outer = static_cast<unsigned>(std::min<std::size_t>(workers, nc));
  const unsigned inner = std::max(1u, workers / std::max(outer, 1u));

  parallel_for(nc, outer, [&](std::size_t k) {
    ContourOutcome& o = out.per_contour[k];
    const Contour& c = contours[k];
    o.alpha = c.alpha();
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const PencilKind kind = feast.exploit_symmetry ? pencil.kind : PencilKind::ComplexGeneral;
      o.plan = plan_work(kind, false, static_cast<int>(c.size()), c.half_contour_available());
      FeastConfig cfg = feast;
      cfg.m0 = m0[k];
      cfg.workers = inner;
      o.result = run(pencil, c, cfg);
    } catch (const Error& e) {
      o.error = e;
    }
    o.seconds = elapsed(t0);
  });

  // Merge in contour order; near-equal values from different contours are
  // resolved in favour of the contour whose interior holds the point.
  for (std::size_t k = 0; k < nc; ++k) {
    const auto& r = out.per_contour[k].result;
    if (!r) continue;
    for (std::size_t i = 0; i < r->lambdas.size(); ++i) {
      MergedEigenvalue cand{r->lambdas[i], r->residuals[i], k, static_cast<Index>(i)};
      bool placed = false;
      for (auto& existing : out.merged) {
        if (existing.contour == k) continue;
        const double tol = 1e-10 * std::max(out.per_contour[existing.contour].alpha, out.per_contour[k].alpha);
        if (std::abs(existing.lambda - cand.lambda) > tol) continue;
        const bool new_owns = inside(contours[k], cand.lambda) && !inside(contours[existing.contour], existing.lambda);
        if (new_owns) {
          out.duplicates.push_back({cand, existing});
          existing = cand;
        } else {
          out.duplicates.push_back({existing, cand});
        }
        placed = true;
        break;
      }
      if (!placed) out.merged.push_back(cand);
    }
  }
  return out;
}

json error_json(const Error& e, std::optional<std::size_t> contour) {
  json j = {{"kind", std::string(to_string(e.kind()))}, {"message", e.what()}};
  if (contour) j["contour"] = *contour;
  return {{"error", j}};
}

json report_json(const MergedResult& r, const std::vector<Contour>& contours, const FeastConfig& feast) {
  json rep;
  rep["all_converged"] = r.all_converged();
  rep["merged_count"] = r.merged.size();
  rep["settings"] = {{"epsilon", feast.epsilon},
                     {"max_iterations", feast.max_iterations},
                     {"eta", feast.eta},
                     {"mu", feast.mu},
                     {"seed", feast.seed},
                     {"cache_factorizations", feast.cache_factorizations},
                     {"exploit_symmetry", feast.exploit_symmetry}};
  json cs = json::array();
  for (std::size_t k = 0; k < r.per_contour.size(); ++k) {
    const ContourOutcome& o = r.per_contour[k];
    json c;
    c["id"] = k;
    c["nodes"] = contours[k].size();
    c["alpha"] = o.alpha;
    c["seconds"] = o.seconds;
    c["plan_per_iteration"] = {{"factorizations", o.plan.factorizations}, {"solves", o.plan.solves}};
    if (o.error) {
      c["status"] = "error";
      c["error"] = error_json(*o.error, k)["error"];
      cs.push_back(c);
      continue;
    }
    const FeastResult& f = *o.result;
    c["status"] = std::string(to_string(f.status));
    c["iterations"] = f.iterations;
    c["m"] = f.lambdas.size();
    c["counters"] = {{"factorizations", f.counters.factorizations},
                     {"solves", f.counters.solves},
                     {"cache_hits", f.counters.cache_hits}};
    bool conforms = true;
    json its = json::array();
    for (const auto& it : f.reports) {
      WorkPlan expect = mode_plan(it.mode, static_cast<int>(contours[k].size()));
      if (feast.cache_factorizations && it.iteration > 1) expect.factorizations = 0;
      const bool ok = it.counters.factorizations == expect.factorizations && it.counters.solves == expect.solves;
      conforms = conforms && ok && mode_plan(it.mode, static_cast<int>(contours[k].size())) == o.plan;
      its.push_back({{"iteration", it.iteration},
                     {"mode", std::string(to_string(it.mode))},
                     {"m0", it.width},
                     {"m_r", it.m_r},
                     {"m_s", it.m_s},
                     {"m_tilde0", it.m_tilde0},
                     {"m", it.m},
                     {"max_residual", it.max_residual},
                     {"biortho_error", it.biortho_error},
                     {"seconds", it.seconds},
                     {"factorizations", it.counters.factorizations},
                     {"solves", it.counters.solves},
                     {"cache_hits", it.counters.cache_hits}});
    }
    c["matches_plan"] = conforms;
    c["history"] = its;
    json eig = json::array();
    for (std::size_t i = 0; i < f.lambdas.size(); ++i)
      eig.push_back({{"lambda", complex_json(f.lambdas[i])}, {"residual", f.residuals[i]}});
    c["eigenvalues"] = eig;
    cs.push_back(c);
  }
  rep["contours"] = cs;
  json dups = json::array();
  for (const auto& d : r.duplicates)
    dups.push_back({{"kept", {{"lambda", complex_json(d.kept.lambda)}, {"contour", d.kept.contour}}},
                    {"dropped", {{"lambda", complex_json(d.dropped.lambda)}, {"contour", d.dropped.contour}}}});
  rep["duplicates"] = dups;
  return rep;
}

void write_solve_outputs(const MergedResult& r, const std::vector<Contour>& contours, const FeastConfig& feast,
                         const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create output directory " + dir.string() + ": " + ec.message());

  std::ofstream csv(dir / "eigenvalues.csv");
  if (!csv) throw Error(ErrorKind::Io, "cannot write " + (dir / "eigenvalues.csv").string());
  csv << "re,im,residual,contour_id\n" << std::setprecision(17);
  for (const auto& e : r.merged)
    csv << e.lambda.real() << ',' << e.lambda.imag() << ',' << e.residual << ',' << e.contour << '\n';

  for (std::size_t k = 0; k < r.per_contour.size(); ++k) {
    const auto& res = r.per_contour[k].result;
    if (!res) continue;
    const std::string stem = "contour_" + std::to_string(k);
    write_matrix_market(dir / (stem + "_right.mtx"), res->x_right);
    write_matrix_market(dir / (stem + "_left.mtx"), res->x_left);
  }

  std::ofstream rep(dir / "report.json");
  if (!rep) throw Error(ErrorKind::Io, "cannot write " + (dir / "report.json").string());
  rep << report_json(r, contours, feast).dump(2) << '\n';
}

void write_filter_grid(std::ostream& out, const Contour& c, double xmin, double xmax, double ymin, double ymax,
                       int nx, int ny) {
  if (nx < 2 || ny < 2) throw Error(ErrorKind::InvalidArgument, "filter grid needs nx, ny >= 2");
  for (double v : {xmin, xmax, ymin, ymax})
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "filter grid bounds must be finite");
  std::vector<Complex> pts;
  pts.reserve(static_cast<std::size_t>(nx) * ny);
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix)
      pts.emplace_back(xmin + (xmax - xmin) * ix / (nx - 1), ymin + (ymax - ymin) * iy / (ny - 1));
  const auto rho = eval_filter(c, std::span<const Complex>(pts));
  out << "re,im,abs_rho\n" << std::setprecision(17);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    out << pts[i].real() << ',' << pts[i].imag() << ',';
    if (rho[i])
      out << std::abs(*rho[i]);
    else
      out << "inf";
    out << '\n';
  }
}

} // namespace nhfeast
