#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

// End-to-end checks that spawn the installed binary. The path comes
// from ODMRSIM_CLI (set by the test harness); sequences and profiles
// are located the same way.

namespace fs = std::filesystem;

#ifndef ODMR_TEST_SEQ_DIR
#define ODMR_TEST_SEQ_DIR "../sequences"
#endif

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out, err;
};

std::string cli_path() {
  const char* env = std::getenv("ODMRSIM_CLI");
  REQUIRE_MESSAGE(env != nullptr, "ODMRSIM_CLI must point at the binary");
  return env;
}

fs::path scratch_dir() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "odmrsim-cli-test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "cannot read ", p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunResult run_cli(const std::string& args) {
  static int counter = 0;
  fs::path out = scratch_dir() / ("stdout." + std::to_string(counter));
  fs::path err = scratch_dir() / ("stderr." + std::to_string(counter));
  ++counter;
  std::string cmd =
      cli_path() + " " + args + " >" + out.string() + " 2>" + err.string();
  int raw = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = raw < 0 ? raw : WEXITSTATUS(raw);
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

}  // namespace

TEST_CASE("validate prints the canonical sequence and reports errors by position") {
  std::string rabi = std::string(ODMR_TEST_SEQ_DIR) + "/rabi.pseq";
  RunResult ok = run_cli("validate " + rabi);
  CHECK(ok.exit_code == 0);
  CHECK(ok.out.find("sweep mw[0].duration") != std::string::npos);
  CHECK(ok.err.empty());

  fs::path bad = scratch_dir() / "bad.pseq";
  std::ofstream(bad) << "laser 1\nmw X nonsense\nread 1\n";
  RunResult fail = run_cli("validate " + bad.string());
  CHECK(fail.exit_code == 2);
  CHECK(fail.err.find("bad.pseq:2:") != std::string::npos);
  CHECK(fail.err.find("error:") != std::string::npos);

  CHECK(run_cli("validate /no/such/file.pseq").exit_code == 2);
}

TEST_CASE("experiment writes a CSV with a JSON sidecar that reproduces it") {
  fs::path base = scratch_dir();
  std::string common = "experiment --preset rabi --points 21 --seed 9 ";
  RunResult a = run_cli(common + "--out " + (base / "run_a.csv").string());
  REQUIRE(a.exit_code == 0);
  CHECK(a.out.find("fit:") != std::string::npos);

  std::string csv_a = slurp(base / "run_a.csv");
  CHECK(csv_a.rfind("duration_ns,contrast\n", 0) == 0);
  CHECK(std::count(csv_a.begin(), csv_a.end(), '\n') == 22);

  // same invocation, byte-identical output
  RunResult b = run_cli(common + "--out " + (base / "run_b.csv").string());
  REQUIRE(b.exit_code == 0);
  CHECK(slurp(base / "run_b.csv") == csv_a);

  // more worker threads change nothing
  RunResult c = run_cli(common + "--jobs 4 --out " + (base / "run_c.csv").string());
  REQUIRE(c.exit_code == 0);
  CHECK(slurp(base / "run_c.csv") == csv_a);

  // replay from the sidecar alone
  std::string sidecar = slurp(base / "run_a.json");
  CHECK(sidecar.find("\"preset\": \"rabi\"") != std::string::npos);
  RunResult d = run_cli("experiment --config " + (base / "run_a.json").string() + " --out " +
                        (base / "run_d.csv").string());
  REQUIRE(d.exit_code == 0);
  CHECK(slurp(base / "run_d.csv") == csv_a);

  // flags given alongside the sidecar win
  RunResult e = run_cli("experiment --config " + (base / "run_a.json").string() +
                        " --points 11 --out " + (base / "run_e.csv").string());
  REQUIRE(e.exit_code == 0);
  std::string csv_e = slurp(base / "run_e.csv");
  CHECK(std::count(csv_e.begin(), csv_e.end(), '\n') == 12);
}

TEST_CASE("run scans a sequence file and records the sequence in the sidecar") {
  fs::path out = scratch_dir() / "seq.csv";
  std::string rabi = std::string(ODMR_TEST_SEQ_DIR) + "/rabi.pseq";
  RunResult r = run_cli("run " + rabi + " --out " + out.string());
  REQUIRE(r.exit_code == 0);
  std::string csv = slurp(out);
  CHECK(csv.rfind("mw[0].duration,contrast\n", 0) == 0);
  std::string sidecar = slurp(scratch_dir() / "seq.json");
  CHECK(sidecar.find("\"sequence\"") != std::string::npos);
  CHECK(sidecar.find("sweep mw[0].duration") != std::string::npos);
}

TEST_CASE("sensitivity prints a table and sweeps to CSV") {
  RunResult table = run_cli("sensitivity");
  REQUIRE(table.exit_code == 0);
  CHECK(table.out.find("profile") != std::string::npos);
  CHECK(table.out.find("eta_nT_um32") != std::string::npos);
  CHECK(table.out.find("film") != std::string::npos);
  CHECK(table.out.find("projected") != std::string::npos);

  fs::path out = scratch_dir() / "sens.csv";
  RunResult sweep = run_cli(
      "sensitivity --profile film --mode dc --sweep doping --start 1e-4 --stop 1e-2 "
      "--steps 5 --log --out " +
      out.string());
  REQUIRE(sweep.exit_code == 0);
  std::string csv = slurp(out);
  CHECK(csv.find("eta_v") != std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
}

TEST_CASE("usage problems exit with 2") {
  CHECK(run_cli("experiment --preset rabi --profile diamond").exit_code == 2);
  CHECK(run_cli("experiment --preset zeeman-ladder").exit_code == 2);
  CHECK(run_cli("experiment").exit_code == 2);
  CHECK(run_cli("experiment --preset rabi --pair zz").exit_code == 2);
  CHECK(run_cli("run /no/such.pseq").exit_code == 2);
  CHECK(run_cli("sensitivity --mode sideways").exit_code == 2);
  CHECK(run_cli("sensitivity --sweep doping --start 1 --stop 2").exit_code == 2);
  CHECK(run_cli("--no-such-flag").exit_code == 2);
  CHECK(run_cli("experiment --preset rabi --config /no/such.cfg").exit_code == 2);

  fs::path junk = scratch_dir() / "junk.cfg";
  std::ofstream(junk) << "[zfs]\nd = banana\n";
  CHECK(run_cli("experiment --preset rabi --config " + junk.string()).exit_code == 2);

  CHECK(run_cli("--help").exit_code == 0);
  CHECK(run_cli("experiment --help").exit_code == 0);
}
