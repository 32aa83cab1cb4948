#include "tbspec/cli.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace tbspec;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
  fs::path p = fs::temp_directory_path() / ("tbspec_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p)
{
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json summary(const fs::path& dir) { return nlohmann::json::parse(slurp(dir / "summary.json")); }

int run_in_process(const std::string& cmd, const std::string& text, const fs::path& out)
{
  std::ostringstream log;
  RunOptions o;
  o.out_dir = out.string();
  return run_text(cmd, text, o, log);
}

// Runs the installed executable when available.
int run_exe(const std::string& args)
{
  const char* exe = std::getenv("TBSPEC_EXE");
  if (!exe) return -1;
  int rc = std::system((std::string(exe) + " " + args + " 2>/dev/null").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

const char* kCos = "[model]\nname = reference-cos\n[couplings]\nmu1 = mu0\nmu2 = mu0\n[grids]\nbranch_n = 8\n";

}  // namespace

TEST_CASE("verify writes a passing report")
{
  fs::path out = scratch("verify");
  CHECK(run_in_process("verify", kCos, out) == kExitOk);
  auto s = summary(out);
  CHECK(s["schema_version"] == kSummarySchemaVersion);
  CHECK(s["results"]["all_passed"] == true);
  CHECK(s["partial"] == false);
  CHECK(s["grids"]["hypothesis_n"] == 8);
  CHECK(fs::exists(out / "hypotheses.csv"));
}

TEST_CASE("spectrum at mu0 is [0, 13.5]")
{
  fs::path out = scratch("spectrum");
  CHECK(run_in_process("spectrum", kCos, out) == kExitOk);
  auto s = summary(out);
  REQUIRE(s["results"]["bands"].size() == 1);
  CHECK(s["results"]["bands"][0][0].get<double>() == 0.0);
  CHECK(std::abs(s["results"]["bands"][0][1].get<double>() - 13.5) < 1e-6);
}

TEST_CASE("count with an empty schedule is a validation error")
{
  fs::path out = scratch("count_empty");
  CHECK(run_in_process("count", kCos, out) == kExitValidation);
  auto s = summary(out);
  CHECK(s["status"] == "error");
  CHECK(s["error"]["kind"] == "validation");
}

TEST_CASE("count tables are reproducible")
{
  std::string text = std::string(kCos) + "kernel_n = 6\n[schedule]\nz = -1e-2, -1e-3\n";
  fs::path a = scratch("count_a"), b = scratch("count_b");
  REQUIRE(run_in_process("count", text, a) == kExitOk);
  REQUIRE(run_in_process("count", text, b) == kExitOk);
  std::string ca = slurp(a / "counts.csv");
  CHECK(ca.rfind("z,log_abs_z,count,grid_n,resolution_flag\n", 0) == 0);
  CHECK(ca == slurp(b / "counts.csv"));
  CHECK(slurp(a / "singular_values.csv") == slurp(b / "singular_values.csv"));
}

TEST_CASE("efimov summary and json tables")
{
  std::string text = std::string(kCos) + "[schedule]\nr = 10, 20\n[output]\nformat = json\n";
  fs::path out = scratch("efimov");
  REQUIRE(run_in_process("efimov", text, out) == kExitOk);
  auto s = summary(out);
  CHECK(s["results"]["u0"].get<double>() == doctest::Approx(0.06584197).epsilon(1e-6));
  CHECK(s["results"]["lower_bound_satisfied"] == false);
  CHECK(s["notes"].size() == 1);
  auto sr = nlohmann::json::parse(slurp(out / "efimov_sr.json"));
  CHECK(sr.size() == 2);
}

TEST_CASE("invalid configuration and unknown command")
{
  fs::path out = scratch("bad");
  CHECK(run_in_process("verify", "[model]\nname = nope\n", out) == kExitValidation);
  auto s = summary(out);
  CHECK(s["error"]["diagnostics"][0]["line"] == 2);
  CHECK(run_in_process("frobnicate", kCos, scratch("unknown")) == kExitValidation);
}

TEST_CASE("thread count resolution")
{
  CHECK(resolve_threads(3) == 3);
  setenv("TBSPEC_THREADS", "2", 1);
  CHECK(resolve_threads(std::nullopt) == 2);
  CHECK(resolve_threads(5) == 5);
  unsetenv("TBSPEC_THREADS");
  CHECK(resolve_threads(std::nullopt) == 0);
}

TEST_CASE("command-line executable")
{
  if (!std::getenv("TBSPEC_EXE")) return;
  fs::path dir = scratch("exe");
  std::ofstream(dir / "cfg.ini") << kCos;
  CHECK(run_exe("verify --config " + (dir / "cfg.ini").string() + " --out " + (dir / "o").string()) == 0);
  CHECK(fs::exists(dir / "o" / "summary.json"));
  CHECK(run_exe("count --config " + (dir / "cfg.ini").string() + " --out " + (dir / "c").string()) == 1);
  CHECK(run_exe("verify --config " + (dir / "missing.ini").string()) == 1);
  CHECK(run_exe("") == 1);
}
