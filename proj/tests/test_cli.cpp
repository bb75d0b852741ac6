#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "config.hpp"
#include "doctest.h"
#include "runner.hpp"

using namespace divprog;
using namespace divprog::cli;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = 0;
  std::string out, err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "divprog");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Outcome o;
  o.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("divprog_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::vector<std::string>> csv_rows(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("validation failures exit with 1") {
  const auto dir = scratch("validation");
  CHECK(invoke({"moments", "--out", dir.string()}).code == kExitValidation);
  CHECK(invoke({"moments", "--prime", "100", "--out", dir.string()}).code == kExitValidation);
  CHECK(invoke({"moments", "--prime", "101", "--x", "5000", "--phi-c", "50"}).code == kExitValidation);
  CHECK(invoke({"moments", "--prime", "101", "--kind", "g"}).code == kExitValidation);
  CHECK(invoke({"moments", "--prime", "101", "--w0", "2", "--w1", "1"}).code == kExitValidation);
  CHECK(invoke({"mixed", "--prime", "101", "--x", "5000", "--gamma", "1,200,0,1"}).code == kExitValidation);
  CHECK(invoke({"moments", "--bogus", "1"}).code == kExitValidation);
  CHECK(invoke({"moments", "--prime", "9973", "--x", "6000000"}).code == kExitValidation);
  CHECK(invoke({}).code == kExitValidation);
  const auto bad = dir / "bad.cfg";
  std::ofstream(bad) << "primes = 101\ncolour = blue\n";
  const auto o = invoke({"moments", "--config", bad.string()});
  CHECK(o.code == kExitValidation);
  CHECK(o.err.find("colour") != std::string::npos);
}

TEST_CASE("Phi rule and explicit window") {
  KeyValues kv{{"phi_c", "50"}, {"phi_e", "0"}, {"primes", "9973"}};
  const auto cfg = build_config(kv);
  const std::uint64_t want = 9973ull * 9973ull / 50ull;
  CHECK(want == 1989214);
  CHECK(cfg.window(9973) == static_cast<double>(want));
  KeyValues grow{{"phi_c", "2"}, {"phi_e", "1.5"}};
  const auto g = build_config(grow);
  CHECK(g.window(1009) == std::floor(1009.0 * 1009.0 / (2 * std::pow(std::log(1009.0), 1.5))));
  CHECK_THROWS_AS(build_config({{"x", "10"}, {"phi_e", "1"}}), ValidationError);
  CHECK_THROWS_AS(build_config({{"phi_c", "0"}}), ValidationError);
  CHECK_THROWS_AS(build_config({{"phi_e", "-1"}}), ValidationError);
  CHECK(build_config({{"x", "5000"}}).window(101) == 5000);
}

TEST_CASE("config round trip and flag precedence") {
  const auto defaults = build_config({});
  std::istringstream in(emit_config(defaults));
  CHECK(emit_config(build_config(parse_key_values(in, "defaults"))) == emit_config(defaults));

  KeyValues kv{{"command", "mixed"},  {"kind", "f,d"},        {"prime_range", "1000:1100"}, {"x", "12345.5"},
               {"w0", "0.75"},        {"w1", "1.9"},          {"gamma", "2,0,0,-3"},        {"kappa_max", "6"},
               {"lambda_max", "3"},   {"normalization", "analytic"}, {"format", "csv"},     {"workers", "3"}};
  const auto cfg = build_config(kv);
  CHECK(cfg.profile == "custom");
  CHECK(cfg.primes.front() == 1009);
  std::istringstream again(emit_config(cfg));
  CHECK(emit_config(build_config(parse_key_values(again, "emitted"))) == emit_config(cfg));

  const auto dir = scratch("precedence");
  const auto file = dir / "run.cfg";
  std::ofstream(file) << "# comment\nkappa_max = 3\nprimes = 101\nprofile = wide\n";
  const auto o = invoke({"moments", "--config", file.string(), "--kappa-max", "5", "--dump-config"});
  CHECK(o.code == 0);
  CHECK(o.out.find("kappa_max = 5\n") != std::string::npos);
  CHECK(o.out.find("primes = 101\n") != std::string::npos);
  CHECK(o.out.find("w1 = 3\n") != std::string::npos);
  CHECK(o.out.find("command = moments\n") != std::string::npos);
  CHECK_THROWS_AS(build_config({{"profile", "wide"}, {"w1", "2"}}), ValidationError);
  CHECK_THROWS_AS(build_config({{"primes", "101"}, {"prime_range", "1:5"}}), ValidationError);
}

TEST_CASE("moments report matches its residue dump") {
  const auto dir = scratch("moments");
  const auto o = invoke({"moments", "--prime", "101", "--x", "5000", "--kind", "d", "--out", dir.string()});
  REQUIRE(o.code == 0);
  const auto report = nlohmann::json::parse(slurp(dir / "moments_d_p101.json"));
  CHECK(report["schema_version"] == kReportSchemaVersion);
  CHECK(report["config"]["x"] == "5000");
  CHECK(report["caches"].size() == 1);
  const auto rows = csv_rows(dir / "residues_d_p101.csv");
  REQUIRE(rows.size() == 101);
  long double s = 0.0L;
  for (std::size_t i = 1; i < rows.size(); ++i) s += std::stod(rows[i][5]);
  const double first = report["result"]["empirical"][0];
  CHECK(first == doctest::Approx(static_cast<double>(s / 101)).epsilon(1e-12));
  CHECK(csv_rows(dir / "histogram_d_p101.csv").size() == 43);
}

TEST_CASE("reports do not depend on the worker count") {
  const auto a = scratch("workers1");
  const auto b = scratch("workers3");
  const std::vector<std::string> common{"moments", "--kind", "d,f", "--prime", "101", "--prime", "103,107",
                                        "--x", "6000"};
  auto run_with = [&](const fs::path& dir, const char* workers) {
    auto args = common;
    args.insert(args.end(), {"--out", dir.string(), "--workers", workers});
    return invoke(args).code;
  };
  REQUIRE(run_with(a, "1") == 0);
  REQUIRE(run_with(b, "3") == 0);
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    ++files;
    CHECK(slurp(entry.path()) == slurp(b / entry.path().filename()));
  }
  CHECK(files == 18);
}

TEST_CASE("clt-sweep summary schema") {
  const auto dir = scratch("sweep");
  const auto o = invoke({"clt-sweep", "--prime", "1009,4999,9973", "--phi-c", "50", "--out", dir.string()});
  REQUIRE(o.code == 0);
  const auto j = nlohmann::json::parse(slurp(dir / "clt_sweep_d.json"));
  REQUIRE(j["result"]["rows"].size() == 3);
  for (const auto& row : j["result"]["rows"]) {
    CHECK(row.contains("ks"));
    CHECK(row["normalized"].size() == 4);
  }
  CHECK(j["result"]["ks_non_increasing"].is_boolean());
  CHECK(j["result"]["rows"][2]["X"] == 1989214.0);
}

TEST_CASE("other subcommands") {
  const auto dir = scratch("other");
  auto o = invoke({"voronoi-check", "--prime", "101", "--x", "5000", "--kind", "d,f", "--residues", "4", "--out",
                dir.string()});
  CHECK(o.code == 0);
  const auto v = nlohmann::json::parse(slurp(dir / "voronoi_f_p101.json"));
  CHECK(v["result"]["rows"].size() == 4);
  CHECK(v["accepted"] == true);
  o = invoke({"voronoi-check", "--prime", "101", "--x", "5000", "--n-max", "10", "--out", dir.string()});
  CHECK(o.code == kExitValidation);
  CHECK(o.err.find("required N_max") != std::string::npos);

  CHECK(invoke({"sieve-dump", "--kind", "f", "--dump-n", "12", "--out", dir.string()}).code == 0);
  const auto tau = csv_rows(dir / "coefficients_f.csv");
  REQUIRE(tau.size() == 13);
  CHECK(tau[2][1] == "-24");
  CHECK(tau[12][1] == "-370944");

  CHECK(invoke({"kloosterman", "--prime", "101", "--maps", "1,0,0,1;1,0,0,1;2,1,1,1;2,1,1,1", "--out",
             dir.string()}).code == 0);
  const auto k = nlohmann::json::parse(slurp(dir / "kloosterman_p101.json"));
  CHECK(k["result"]["configuration_sum"]["A"] == 1);
  CHECK(csv_rows(dir / "kl_table_p101.csv").size() == 101);

  CHECK(invoke({"mixed", "--prime", "101", "--x", "5000", "--gamma", "2,0,0,1", "--format", "csv", "--out",
             dir.string()}).code == 0);
  const std::string mixed = slurp(dir / "mixed_d_p101.csv");
  CHECK(mixed.rfind("# schema_version = 1\n", 0) == 0);
  CHECK(csv_rows(dir / "mixed_d_p101.csv").size() == 1 + 5 * 3 - 1);

  CHECK(invoke({"bessel-selftest", "--kind", "d", "--out", dir.string()}).code == 0);
  CHECK(csv_rows(dir / "bessel_selftest_d.csv").size() > 100);
}
