#include <catch2/catch_amalgamated.hpp>
#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "kocp/json_io.hpp"

namespace fs = std::filesystem;
using kocp::io::json;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
};

RunResult run_cli(const std::string& args) {
  const std::string cmd = std::string(KOCP_CLI_PATH) + " " + args + " 2>/dev/null";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch_dir() {
  const auto dir = fs::temp_directory_path() / "kocp_cli_test";
  fs::create_directories(dir);
  return dir;
}

fs::path write_file(const std::string& name, const json& j) {
  const auto path = scratch_dir() / name;
  std::ofstream out(path);
  out << j.dump(2);
  return path;
}

}  // namespace

TEST_CASE("check: the bordered certificate is a dual member at order 2 only") {
  const auto cert = kocp::nesting_certificate_psd(3, 2);
  const auto path = write_file("cert.json", kocp::io::to_json(cert));
  const auto ok = run_cli("check --cone psd --k 2 --dual --matrix " + path.string() + " --json");
  CHECK(ok.exit_code == 0);
  const json rep = json::parse(ok.out);
  CHECK(rep["verdict"] == "member");
  CHECK(std::abs(rep["margin"].get<double>()) <= 1e-9);

  const auto bad = run_cli("check --cone psd --k 3 --dual --matrix " + path.string() + " --json");
  CHECK(bad.exit_code == 1);
  CHECK(json::parse(bad.out)["verdict"] == "non-member");
}

TEST_CASE("decompose emits a verifiable factor-width-2 certificate") {
  const auto a = kocp::SymMatrix::from_rows({{4, 2, 0}, {2, 2, 1}, {0, 1, 2}});
  const auto path = write_file("sdd.json", kocp::io::to_json(a));
  const auto r = run_cli("decompose --matrix " + path.string() + " --json");
  REQUIRE(r.exit_code == 0);
  const json rep = json::parse(r.out);
  const auto dec = kocp::io::decomposition_from_json(rep["decomposition"]);
  CHECK((dec.assemble() - a).frobenius() < 1e-10);

  const auto not_sdd = write_file("notsdd.json",
                                  kocp::io::to_json(kocp::SymMatrix::from_rows({{1, 2}, {2, 1}})));
  CHECK(run_cli("decompose --matrix " + not_sdd.string()).exit_code == 1);
}

TEST_CASE("solve and scan on the hollow-objective anchor") {
  kocp::StandardProblem p;
  p.cone = kocp::ConeSpec::psd(3, 1);
  p.A0 = kocp::SymMatrix::from_rows({{0, 1, 1}, {1, 0, 1}, {1, 1, 0}});
  p.constraints.emplace_back(kocp::SymMatrix::identity(3), 1.0);
  const auto path = write_file("problem.json", kocp::io::to_json(p));

  const auto solved = run_cli("solve " + path.string() + " --json");
  REQUIRE(solved.exit_code == 0);
  const json srep = json::parse(solved.out);
  CHECK(srep["verdict"] == "optimal");
  CHECK(std::abs(srep["solution"]["objective"].get<double>()) <= 1e-6);

  const auto scanned = run_cli("scan " + path.string() + " --kmax 3 --json");
  REQUIRE(scanned.exit_code == 0);
  const json rep = json::parse(scanned.out);
  REQUIRE(rep["entries"].size() == 3);
  CHECK(std::abs(rep["entries"][0]["objective"].get<double>() - 0.0) <= 1e-6);
  CHECK(std::abs(rep["entries"][1]["objective"].get<double>() + 1.0) <= 1e-6);
  CHECK(std::abs(rep["entries"][2]["objective"].get<double>() + 1.0) <= 1e-6);
  CHECK(rep["monotone"] == true);
}

TEST_CASE("certify-poly: infeasible Motzkin exits 1, feasible square exits 0") {
  kocp::Polynomial mz(3);
  mz.add_term({4, 2, 0}, 1);
  mz.add_term({2, 4, 0}, 1);
  mz.add_term({2, 2, 2}, -3);
  mz.add_term({0, 0, 6}, 1);
  const auto mzpath = write_file("motzkin.json", kocp::io::to_json(mz));
  CHECK(run_cli("certify-poly " + mzpath.string() + " --k 2").exit_code == 1);

  kocp::Polynomial sq(2);
  sq.add_term({2, 0}, 1);
  sq.add_term({1, 1}, 2);
  sq.add_term({0, 2}, 1);
  const auto sqpath = write_file("square.json", kocp::io::to_json(sq));
  const auto r = run_cli("certify-poly " + sqpath.string() + " --k 2 --json");
  REQUIRE(r.exit_code == 0);
  const json rep = json::parse(r.out);
  CHECK(rep["certificate_valid"] == true);

  // verify-cert roundtrip through files
  const auto certpath = scratch_dir() / "square_cert.json";
  std::ofstream(certpath) << rep["certificate"].dump(2);
  CHECK(run_cli("verify-cert " + sqpath.string() + " " + certpath.string()).exit_code == 0);
}

TEST_CASE("verify-embedding runs clean for the psd family") {
  const auto r =
      run_cli("verify-embedding --family psd --d 5 --k 3 --samples 100 --seed 42 --json");
  REQUIRE(r.exit_code == 0);
  CHECK(json::parse(r.out)["violations"] == 0);
}

TEST_CASE("cast-socp reproduces the sqrt(2) anchor through solve") {
  const json socp{{"objective", {1.0}},
                  {"soc_constraints",
                   {{{"A", {{0.0}, {0.0}}}, {"b", {1.0, 1.0}}, {"c", {1.0}}, {"d", 0.0}}}}};
  const auto path = write_file("socp.json", socp);
  const auto cast = run_cli("cast-socp " + path.string() + " --json");
  REQUIRE(cast.exit_code == 0);
  const json rep = json::parse(cast.out);
  CHECK(rep["problem"]["cone"]["k"] == 2);

  const auto solved = run_cli("cast-socp " + path.string() + " --solve --json");
  REQUIRE(solved.exit_code == 0);
  const double t = json::parse(solved.out)["solution"]["objective"].get<double>();
  CHECK(std::abs(t - std::sqrt(2.0)) <= 1e-6);
}

TEST_CASE("same input and seed give byte-identical JSON reports") {
  const auto cert = kocp::nesting_certificate_psd(4, 2);
  const auto path = write_file("det.json", kocp::io::to_json(cert));
  const std::string cmd = "check --cone psd --k 2 --dual --matrix " + path.string() +
                          " --seed 7 --json";
  const auto a = run_cli(cmd);
  const auto b = run_cli(cmd);
  CHECK(a.exit_code == b.exit_code);
  CHECK(a.out == b.out);
}

TEST_CASE("malformed input exits 3 with a diagnostic") {
  const auto path = scratch_dir() / "broken.json";
  std::ofstream(path) << "{ not json";
  CHECK(run_cli("check --cone psd --k 2 --dual --matrix " + path.string()).exit_code == 3);
  CHECK(run_cli("solve /nonexistent/file.json").exit_code == 3);
}
