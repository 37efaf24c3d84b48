#include <doctest.h>

#include "coopcomp/examples_repro.hpp"
#include "coopcomp/problem_file.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace coopcomp;
namespace fs = std::filesystem;

namespace {

const fs::path kProblems = COOPCOMP_PROBLEM_DIR;

int run(const std::string& args) {
  const std::string cmd = std::string(COOPCOMP_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// data lines of a CSV, skipping the provenance comment
std::vector<std::string> csv_lines(const fs::path& p) {
  std::vector<std::string> out;
  std::istringstream in(slurp(p));
  for (std::string line; std::getline(in, line);)
    if (!line.empty() && line[0] != '#') out.push_back(line);
  return out;
}

std::vector<double> fields(const std::string& line) {
  std::vector<double> v;
  std::istringstream in(line);
  for (std::string tok; std::getline(in, tok, ',');) v.push_back(std::stod(tok));
  return v;
}

struct TempDir {
  static inline int counter = 0;
  fs::path path = fs::temp_directory_path() /
                  ("coopcomp_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  TempDir() { fs::remove_all(path); }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("unknown subcommand and bad input map to exit 2") {
  CHECK(run("frobnicate") == 2);
  CHECK(run("") == 2);
  CHECK(run("region " + (kProblems / "example2.txt").string() + " --mode bogus") == 2);
  TempDir d;
  fs::create_directories(d.path);
  std::ofstream(d.path / "bad.txt") << "[alphabets]\nX a b\nY a b\n[pmf]\n0.5 1.0\n0 0\n[f]\n0 0\n0 0\n";
  CHECK(run("gentropy " + (d.path / "bad.txt").string()) == 2);
  CHECK(run("gentropy " + (d.path / "missing.txt").string()) == 2);
  // rate-distortion mode on a file without distortion sections
  CHECK(run("region " + (kProblems / "example2.txt").string() + " --mode rd --out " + d.path.string()) == 2);
  CHECK(run("--help") == 0);
}

TEST_CASE("cascade on the example 2 file reports H(G_X|Y) and H(f)") {
  TempDir d;
  REQUIRE(run("region " + (kProblems / "example2.txt").string() + " --mode cascade --out " + d.path.string()) == 0);
  const fs::path out = d.path / "region_cascade.csv";
  const std::string text = slurp(out);
  CHECK(text.rfind("# coopcomp ", 0) == 0);
  CHECK(text.find("seed=0") != std::string::npos);
  CHECK(text.find("config_hash=") != std::string::npos);
  const auto lines = csv_lines(out);
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] == "r0_bits,rx_bits,ry_bits");
  const auto v = fields(lines[1]);
  const RateTuple ref = region_cascade(example2_pmf(), example2_function());
  CHECK(std::abs(v[0] - ref.r0) < 1e-6);
  CHECK(std::abs(v[2] - ref.ry) < 1e-6);
  CHECK(std::abs(v[0] - rate_one_round(example2_pmf(), example2_function())) < 1e-6);
}

TEST_CASE("repro appendix writes the three-claim report") {
  TempDir d;
  REQUIRE(run("repro --target appendix --seed 3 --out " + d.path.string()) == 0);
  const auto lines = csv_lines(d.path / "appendix_claims.csv");
  REQUIRE(lines.size() == 6);
  CHECK(lines[0] == "claim,quantity,value_bits,stated_bits,tolerance,within_tolerance");
  CHECK(slurp(d.path / "appendix_claims.csv").find("seed=3") != std::string::npos);
  // claim 2 is the closed form, exact up to print precision
  CHECK(lines[2].rfind("2,I(XY;W),0.857143,", 0) == 0);
}

TEST_CASE("repro example1 emits the a=3 and a=4 curves") {
  TempDir d;
  REQUIRE(run("repro --target example1 --points 9 --out " + d.path.string()) == 0);
  for (const char* name : {"example1_a3_b10.csv", "example1_a4_b10.csv"}) {
    const auto lines = csv_lines(d.path / name);
    REQUIRE(lines.size() == 10);
    CHECK(lines[0] == "r0_bits,min_sum_bits");
  }
  const auto a4 = csv_lines(d.path / "example1_a4_b10.csv");
  CHECK(std::abs(fields(a4[1])[1] - 42.0) < 1e-6);
  CHECK(std::abs(fields(a4[9])[1] - 12.0) < 1e-6);
}

TEST_CASE("simulate writes the documented columns") {
  TempDir d;
  REQUIRE(run("simulate " + (kProblems / "xor_oneround.txt").string() + " --n 20 --n 40 --trials 30 --out " +
              d.path.string()) == 0);
  const auto lines = csv_lines(d.path / "simulate.csv");
  REQUIRE(lines.size() == 3);
  CHECK(lines[0].rfind("n,trials,err_total,err_phase1_cover,err_phase1_bin,err_phase2_cover,err_phase2_bin,err_fundef",
                       0) == 0);
  CHECK(lines[1].rfind("20,30,", 0) == 0);
  // simulate needs auxiliaries
  CHECK(run("simulate " + (kProblems / "example2.txt").string() + " --out " + d.path.string()) == 2);
}

TEST_CASE("shipped problem files round-trip") {
  for (const auto& e : fs::directory_iterator(kProblems)) {
    const ProblemFile p = load_problem(e.path());
    CHECK_MESSAGE(parse_problem(serialize_problem(p)) == p, e.path().string());
  }
}
