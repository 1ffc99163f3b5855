// Copyright 2026 The billiard-lab Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "billiard/error.hpp"
#include "billiard/pipeline.hpp"

using namespace billiard;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("billiard_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kRectangle =
    "profile.kind = constant-rectangle\n"
    "profile.L0 = 1\n"
    "profile.B0 = 1\n"
    "profile.B1 = 1\n"
    "grid.ns = 64\n"
    "grid.nt = 32\n"
    "window.lo = 10\n"
    "window.hi = 60\n";

int run_cli(const std::string& args) {
  const int status = std::system((std::string(BILLIARD_CLI) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config parsing") {
  const auto c = parse_config(std::string(kRectangle) + "# comment\n\neps = 0, 0.0625\njobs = 1\n");
  CHECK(c.ns == 64);
  CHECK(c.window_hi == 60.0);
  CHECK(c.eps.size() == 2);
  CHECK(c.eps[1] == 0.0625);
  CHECK(c.build_profile().kind() == ProfileKind::ConstantRectangle);
  CHECK(c.resolved_cache_path() == (fs::path("out") / "eigenpairs.cache").string());
  CHECK(c.resolved_jobs() == 1);

  const auto expect_format = [](const std::string& text, const std::string& needle) {
    try {
      (void)parse_config(text, "t.conf");
      FAIL("accepted: " << text);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Format);
      CHECK_MESSAGE(std::string(e.what()).find(needle) != std::string::npos, e.what());
    }
  };
  expect_format("grid.ns = 4\nbogus = 1\n", "t.conf:2: unknown key 'bogus'");
  expect_format("grid.ns = 4\ngrid.ns = 5\n", "already set on line 1");
  expect_format("grid.ns\n", "t.conf:1:");
  expect_format("grid.ns = four\n", "t.conf:1:");
  expect_format("certify = maybe\n", "true or false");
  expect_format("eps = -0.1\n", "non-negative");

  RunConfig r;
  set_config_value(r, "window.lo", "5");
  CHECK(r.window_lo == 5.0);
  CHECK_THROWS_AS(set_config_value(r, "nope", "1"), Error);
}

TEST_CASE("validate command") {
  auto c = parse_config(kRectangle);
  c.out_dir = scratch_dir("validate").string();
  CHECK(cmd_validate(c).exit_code == kExitPass);
  CHECK(fs::exists(fs::path(c.out_dir) / "validate.json"));

  auto steep = parse_config(
      "profile.kind = power-profile\nprofile.L0 = 1\nprofile.B0 = 1\nprofile.B1 = 0.5\n"
      "profile.gamma = 1.4\nprofile.c_L = 0.5\n");
  steep.out_dir = c.out_dir;
  const auto r = cmd_validate(steep);
  CHECK(r.exit_code == kExitFail);
  CHECK(r.text.find("3/2") != std::string::npos);
}

TEST_CASE("spectrum command") {
  auto c = parse_config(kRectangle);
  c.out_dir = scratch_dir("spectrum").string();
  const auto r = cmd_spectrum(c);
  CHECK(r.exit_code == kExitPass);
  const auto csv = slurp(fs::path(c.out_dir) / "spectrum.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
  CHECK(csv.rfind("index,E,residual,refine_shift,certified,nu,argmin_k,argmin_l,z_eps_", 0) == 0);
  CHECK(cmd_spectrum(c).exit_code == kExitPass);
  CHECK(slurp(fs::path(c.out_dir) / "spectrum.csv") == csv);

  c.window_lo = 13.0;
  c.window_hi = 19.0;
  CHECK(cmd_spectrum(c).exit_code == kExitPass);
  const auto empty = slurp(fs::path(c.out_dir) / "spectrum.csv");
  CHECK(std::count(empty.begin(), empty.end(), '\n') == 1);

  // The cache belongs to the 64 x 32 grid.
  c.ns = 32;
  CHECK_THROWS_AS((void)cmd_spectrum(c), Error);
}

TEST_CASE("verify commands") {
  auto c = parse_config(kRectangle);
  c.out_dir = scratch_dir("verify").string();
  c.onedim_samples = 5;
  c.forms_random_v = 10;
  const auto od = cmd_verify(c, "onedim");
  CHECK_MESSAGE(od.exit_code == kExitPass, od.text);
  CHECK(fs::exists(fs::path(c.out_dir) / "verify_onedim.json"));
  CHECK_THROWS_AS((void)cmd_verify(c, "forms"), Error);
  REQUIRE(cmd_spectrum(c).exit_code == kExitPass);
  const auto fm = cmd_verify(c, "forms");
  CHECK_MESSAGE(fm.exit_code == kExitPass, fm.text);
  // The rectangle carries gamma = 0 and is not a theorem geometry.
  try {
    (void)cmd_verify(c, "bounds");
    FAIL("bounds accepted the rectangle");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Parameter);
  }
  CHECK_THROWS_AS((void)cmd_verify(c, "nothing"), Error);
}

TEST_CASE("command line exit codes") {
  const auto dir = scratch_dir("cli");
  {
    std::ofstream(dir / "rect.conf") << kRectangle << "output.dir = " << (dir / "out").string() << "\n";
    std::ofstream(dir / "bad.conf") << "bogus = 1\n";
    std::ofstream(dir / "steep.conf") << "profile.kind = power-profile\nprofile.L0 = 1\nprofile.B0 = 1\n"
                                         "profile.B1 = 0.5\nprofile.gamma = 1.4\nprofile.c_L = 0.5\n"
                                      << "output.dir = " << (dir / "out").string() << "\n";
  }
  const std::string rect = "--config " + (dir / "rect.conf").string();
  CHECK(run_cli(rect + " validate") == 0);
  CHECK(run_cli(rect + " spectrum") == 0);
  CHECK(run_cli(rect + " --window 13 19 spectrum") == 0);
  CHECK(run_cli(rect + " --set grid.ns=32 spectrum") == 2);
  CHECK(run_cli(rect + " verify bounds") == 2);
  CHECK(run_cli("--config " + (dir / "bad.conf").string() + " validate") == 2);
  CHECK(run_cli("--config " + (dir / "steep.conf").string() + " validate") == 1);
  CHECK(run_cli("--config " + (dir / "missing.conf").string() + " validate") == 2);
  CHECK(run_cli(rect) == 2);
  CHECK(run_cli(rect + " verify nonsense") == 2);
}
