// SPDX-License-Identifier: Apache-2.0
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

#include <doctest.h>

#include "nhfeast/generators.hpp"
#include "nhfeast/job.hpp"
#include "nhfeast/matrix_market.hpp"

using namespace nhfeast;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Scratch directory removed on scope exit.
struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("nhfeast_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

// Runs the CLI; returns its exit status.
int cli(const std::string& args, const fs::path& out, const std::string& env = "") {
  const std::string cmd = env + " \"" NHFEAST_CLI_PATH "\" " + args + " > \"" + out.string() + "\" 2> \"" +
                          out.string() + ".err\"";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

json two_contour_job(const fs::path& out_dir, bool cache) {
  return {{"generator",
           {{"type", "diagonalizable"},
            {"random_disk", {{"count", 60}, {"radius", 1.5}, {"seed", 3}}},
            {"conditioning", 5.0},
            {"identity_b", false},
            {"seed", 2}}},
          {"contours",
           {{{"type", "circle"}, {"center", {-0.6, 0.0}}, {"radius", 0.5}, {"nodes", 16}},
            {{"type", "polygon"},
             {"vertices", {{0.1, -0.5}, {1.1, -0.5}, {1.1, 0.5}, {0.1, 0.5}}},
             {"nodes_per_edge", 6},
             {"rule", "gauss"}}}},
          {"m0", {24, 30}},
          {"cache_factorizations", cache},
          {"output_dir", out_dir.string()}};
}

} // namespace

TEST_CASE("contour specs") {
  const ContourSpec c = parse_contour_spec(json{{"type", "circle"}, {"center", {0.3, 0.2}}, {"radius", 0.5}});
  const Contour built = c.build();
  CHECK(built.size() == 16);
  CHECK(built.alpha() == doctest::Approx(0.8605551).epsilon(1e-7));

  const ContourSpec p = parse_contour_spec(
      json{{"type", "polygon"}, {"vertices", {{0, 0}, {1, 0}, {1, 1}, {0, 1}}}, {"nodes_per_edge", 4}});
  CHECK(p.build().size() == 16);
  CHECK(p.rule == QuadratureRule::Trapezoidal);

  CHECK_THROWS_AS(parse_contour_spec(json{{"type", "star"}}), Error);
  CHECK_THROWS_AS(parse_contour_spec(json{{"type", "polygon"}}), Error);
  CHECK_THROWS_AS(parse_contour_spec(json{{"center", "middle"}}), Error);
  CHECK_THROWS_AS(parse_contour_spec(json{{"rule", "simpson"}}), Error);
}

TEST_CASE("job parsing") {
  const json ok = {{"matrix", {{"a", "a.mtx"}, {"b", "b.mtx"}}},
                   {"contours", {{{"radius", 2.0}}, {{"center", 5.0}}}},
                   {"m0", 8},
                   {"epsilon", 1e-10},
                   {"max_iterations", 7},
                   {"workers", 3},
                   {"kind", "complex_general"}};
  const JobConfig j = parse_job(ok, "/data");
  CHECK(j.matrix_a->string() == "a.mtx");
  CHECK(j.matrix_b->string() == "b.mtx");
  CHECK(j.m0 == std::vector<Index>{8, 8});
  CHECK(j.feast.epsilon == 1e-10);
  CHECK(j.feast.max_iterations == 7);
  CHECK(j.workers == 3);
  CHECK(*j.kind == PencilKind::ComplexGeneral);
  CHECK(j.base_dir == fs::path("/data"));

  json bad = ok;
  bad["m0"] = {1, 2, 3};
  CHECK_THROWS_AS(parse_job(bad), Error);
  bad = ok;
  bad["contours"] = json::array();
  CHECK_THROWS_AS(parse_job(bad), Error);
  bad = ok;
  bad["generator"] = {{"type", "grcar"}};
  CHECK_THROWS_AS(parse_job(bad), Error);
  bad = ok;
  bad.erase("m0");
  CHECK_THROWS_AS(parse_job(bad), Error);
  bad = ok;
  bad["epsilon"] = "small";
  CHECK_THROWS_AS(parse_job(bad), Error);
}

TEST_CASE("pencils from files and generators") {
  TempDir tmp;
  write_file(tmp.path / "a.mtx", "%%MatrixMarket matrix coordinate real symmetric\n3 3 4\n1 1 1\n2 2 2\n3 3 3\n3 1 0.5\n");
  const JobConfig j = parse_job(json{{"matrix", "a.mtx"}, {"contours", {json::object()}}, {"m0", 2}}, tmp.path);
  const Pencil p = load_pencil(j);
  CHECK(p.kind == PencilKind::RealSymmetric);
  CHECK(to_dense(p.a)(0, 2) == Complex(0.5));
  CHECK(p.standard());

  const JobConfig g = parse_job(json{{"generator", {{"type", "grcar"}, {"n", 10}}}, {"contours", {json::object()}}, {"m0", 2}});
  CHECK(load_pencil(g).size() == 10);
  CHECK(load_pencil(g).kind == PencilKind::RealGeneral);

  const JobConfig missing = parse_job(json{{"matrix", "nope.mtx"}, {"contours", {json::object()}}, {"m0", 2}}, tmp.path);
  CHECK_THROWS_AS(load_pencil(missing), Error);

  // A kind override that the data contradicts is rejected.
  JobConfig wrong = j;
  wrong.kind = PencilKind::ComplexSymmetric;
  CHECK_NOTHROW(load_pencil(wrong));
  wrong.matrix_a = "b.mtx";
  write_file(tmp.path / "b.mtx", "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 2 1\n2 2 1\n");
  wrong.kind = PencilKind::RealSymmetric;
  CHECK_THROWS_AS(load_pencil(wrong), Error);
}

TEST_CASE("multi-contour merge matches the oracle and is worker independent") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.4, 1.4);
  std::vector<Complex> eigs;
  while (eigs.size() < 80) {
    const Complex z(u(rng), u(rng));
    // Keep clear of the shared edge at re = 0.
    if (std::abs(z.real()) > 0.02) eigs.push_back(z);
  }
  OracleOptions o;
  o.seed = 4;
  o.conditioning = 5.0;
  const OraclePencil op = gen_diagonalizable_pencil(eigs, o);
  const std::vector<Contour> contours = {
      gen_polygon({Complex(-1, -1), Complex(0, -1), Complex(0, 1), Complex(-1, 1)}, 6, QuadratureRule::GaussLegendre),
      gen_polygon({Complex(0, -1), Complex(1, -1), Complex(1, 1), Complex(0, 1)}, 6, QuadratureRule::GaussLegendre)};
  std::size_t expected = 0;
  for (Complex l : eigs) expected += inside(contours[0], l) || inside(contours[1], l);
  FeastConfig cfg;
  const std::vector<Index> m0 = {40, 40};
  const MergedResult one = solve_contours(op.pencil, contours, m0, cfg, 1);
  const MergedResult three = solve_contours(op.pencil, contours, m0, cfg, 3);
  CHECK(one.all_converged());
  CHECK(one.merged.size() == expected);
  CHECK(one.duplicates.empty());
  REQUIRE(three.merged.size() == one.merged.size());
  for (std::size_t i = 0; i < one.merged.size(); ++i) {
    CHECK(three.merged[i].lambda == one.merged[i].lambda);
    CHECK(three.merged[i].contour == one.merged[i].contour);
  }
  for (const auto& m : one.merged) {
    double best = 1e300;
    for (Complex l : eigs) best = std::min(best, std::abs(l - m.lambda));
    CHECK(best < 1e-10);
  }
}

TEST_CASE("overlapping contours report duplicates") {
  const OraclePencil op = gen_diagonalizable_pencil({0.0, Complex(0.2, 0.1), 3.0, -3.0, Complex(0.0, 3.0)});
  const std::vector<Contour> contours = {gen_ellipse({Complex(0.0), 1.0}, 16), gen_ellipse({Complex(0.1), 1.0}, 16)};
  FeastConfig cfg;
  const MergedResult r = solve_contours(op.pencil, contours, {4, 4}, cfg, 2);
  CHECK(r.all_converged());
  CHECK(r.merged.size() == 2);
  CHECK(r.duplicates.size() == 2);
  for (std::size_t i = 0; i < r.merged.size(); ++i)
    for (std::size_t k = 0; k < i; ++k) CHECK(std::abs(r.merged[i].lambda - r.merged[k].lambda) > 1e-8);
  const json rep = report_json(r, contours, cfg);
  CHECK(rep["duplicates"].size() == 2);
}

TEST_CASE("per-contour errors are isolated") {
  // The second contour has a node exactly on an eigenvalue.
  const Contour good = gen_ellipse({Complex(0.0), 0.5}, 8);
  const Contour bad = gen_ellipse({Complex(5.0), 1.0}, 4);
  const OraclePencil op = gen_diagonalizable_pencil({0.1, bad.nodes()[0], 9.0, -9.0});
  const MergedResult r = solve_contours(op.pencil, {good, bad}, {2, 2}, FeastConfig{}, 2);
  REQUIRE(r.per_contour[0].result.has_value());
  REQUIRE(r.per_contour[1].error.has_value());
  CHECK(r.per_contour[1].error->kind() == ErrorKind::SingularShift);
  CHECK_FALSE(r.all_converged());
  const json e = error_json(*r.per_contour[1].error, 1);
  CHECK(e["error"]["kind"] == "SingularShift");
  CHECK(e["error"]["contour"] == 1);
}

TEST_CASE("filter grid") {
  const Contour c = gen_ellipse({}, 8);
  std::ostringstream s;
  write_filter_grid(s, c, -2.0, 2.0, -1.0, 1.0, 3, 3);
  const std::string out = s.str();
  CHECK(count_lines(out) == 10);
  CHECK(out.rfind("re,im,abs_rho\n", 0) == 0);
  // The center of the grid is the center of the circle.
  CHECK(out.find("\n0,0,1\n") != std::string::npos);
  // Off the contour the circle filter is 1 / (1 + z^8); 1/257 at z = 2.
  CHECK(out.find("\n2,0,0.00389105058365") != std::string::npos);

  std::ostringstream hit;
  const Complex z = c.nodes()[0];
  write_filter_grid(hit, c, z.real(), z.real() + 1.0, z.imag(), z.imag() + 1.0, 2, 2);
  CHECK(hit.str().find(",inf\n") != std::string::npos);

  std::ostringstream bad;
  CHECK_THROWS_AS(write_filter_grid(bad, c, 0, 1, 0, 1, 1, 3), Error);
}

TEST_CASE("command line: solve, caching and worker override") {
  TempDir tmp;
  write_file(tmp.path / "off.json", two_contour_job(tmp.path / "off", false).dump());
  write_file(tmp.path / "on.json", two_contour_job(tmp.path / "on", true).dump());
  write_file(tmp.path / "env.json", two_contour_job(tmp.path / "env", false).dump());

  REQUIRE(cli("solve --config " + (tmp.path / "off.json").string(), tmp.path / "off.txt") == 0);
  REQUIRE(cli("solve --config " + (tmp.path / "on.json").string(), tmp.path / "on.txt") == 0);
  REQUIRE(cli("solve --config " + (tmp.path / "env.json").string(), tmp.path / "env.txt", "NHFEAST_WORKERS=2") == 0);

  const std::string csv_off = read_file(tmp.path / "off" / "eigenvalues.csv");
  CHECK(csv_off.rfind("re,im,residual,contour_id\n", 0) == 0);
  CHECK(count_lines(csv_off) > 5);
  CHECK(read_file(tmp.path / "on" / "eigenvalues.csv") == csv_off);
  CHECK(read_file(tmp.path / "env" / "eigenvalues.csv") == csv_off);
  CHECK(fs::exists(tmp.path / "off" / "contour_0_right.mtx"));
  CHECK(fs::exists(tmp.path / "off" / "contour_1_left.mtx"));

  const json off = json::parse(read_file(tmp.path / "off" / "report.json"));
  const json on = json::parse(read_file(tmp.path / "on" / "report.json"));
  for (std::size_t k = 0; k < 2; ++k) {
    const json& a = off["contours"][k];
    const json& b = on["contours"][k];
    CHECK(a["matches_plan"] == true);
    CHECK(b["matches_plan"] == true);
    const int n_e = a["nodes"];
    CHECK(a["counters"]["factorizations"].get<int>() == n_e * a["iterations"].get<int>());
    CHECK(b["counters"]["factorizations"].get<int>() == n_e);
    CHECK(a["history"].size() == a["iterations"].get<std::size_t>());
    CHECK(a["history"][0].contains("m_tilde0"));
  }
  CHECK(off["duplicates"].empty());
}

TEST_CASE("command line: estimate") {
  TempDir tmp;
  std::vector<json> eigs;
  for (int i = 0; i < 50; ++i) {
    const Complex l = i < 7 ? std::polar(0.1 * (i + 1), 0.9 * i) : std::polar(1.5 + 0.1 * i, 0.5 * i);
    eigs.push_back({l.real(), l.imag()});
  }
  const json job = {{"generator", {{"type", "diagonalizable"}, {"eigenvalues", eigs}}},
                    {"contours", {{{"radius", 1.0}}}},
                    {"m0", 14},
                    {"seed", 4}};
  write_file(tmp.path / "job.json", job.dump());
  REQUIRE(cli("estimate --config " + (tmp.path / "job.json").string() + " --samples 32", tmp.path / "out.txt") == 0);
  const std::string out = read_file(tmp.path / "out.txt");
  const auto brace = out.find('{');
  REQUIRE(brace != std::string::npos);
  const json j = json::parse(out.substr(brace));
  const double est = j["estimates"][0]["estimate"];
  CHECK(est >= 4.9);
  CHECK(est <= 9.1);
  CHECK(j["estimates"][0]["suggested_m0"].get<long>() == static_cast<long>(std::ceil(2.0 * est)));

  CHECK(cli("estimate --config " + (tmp.path / "job.json").string() + " --samples 0", tmp.path / "bad.txt") == 2);
}

TEST_CASE("command line: filter grid and usage errors") {
  TempDir tmp;
  write_file(tmp.path / "contour.json", R"({"type": "circle", "center": [0, 0], "radius": 1, "nodes": 8})");
  REQUIRE(cli("filter-grid --config " + (tmp.path / "contour.json").string() +
                  " --xmin -1 --xmax 1 --ymin -1 --ymax 1 --nx 3 --ny 3",
              tmp.path / "grid.csv") == 0);
  CHECK(count_lines(read_file(tmp.path / "grid.csv")) == 10);

  CHECK(cli("filter-grid --config " + (tmp.path / "contour.json").string() + " --nx 1", tmp.path / "g1.csv") == 2);
  CHECK(cli("", tmp.path / "none.txt") == 2);
  CHECK(cli("solve", tmp.path / "noconf.txt") == 2);

  write_file(tmp.path / "broken.json", "{ not json");
  CHECK(cli("solve --config " + (tmp.path / "broken.json").string(), tmp.path / "broken.txt") == 2);
  const json err = json::parse(read_file(tmp.path / "broken.txt.err"));
  CHECK(err["error"]["kind"] == "ParseError");

  write_file(tmp.path / "nomatrix.json", R"({"matrix": "missing.mtx", "contours": [{}], "m0": 2})");
  CHECK(cli("solve --config " + (tmp.path / "nomatrix.json").string(), tmp.path / "nomatrix.txt") == 1);
  CHECK(json::parse(read_file(tmp.path / "nomatrix.txt.err"))["error"]["kind"] == "IoError");
}
