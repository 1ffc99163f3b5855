// Copyright 2026 The billiard-lab Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end. Links only the C interface.

#include <CLI11.hpp>
#include <cstdio>
#include <string>
#include <vector>

#include "billiard/billiard.h"

namespace {

int exit_for(billiard_status s) {
  switch (s) {
    case BILLIARD_ERR_PARAMETER:
    case BILLIARD_ERR_FORMAT:
    case BILLIARD_ERR_IO:
    case BILLIARD_ERR_PRECONDITION:
    case BILLIARD_ERR_ARGUMENT:
      return BILLIARD_EXIT_USAGE;
    default:
      return BILLIARD_EXIT_FAIL;
  }
}

int report_error(billiard_status s) {
  std::fprintf(stderr, "billiard: %s error: %s\n", billiard_status_name(s), billiard_last_error());
  return exit_for(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Eigenfunction non-concentration experiments on partially rectangular billiards"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  int jobs = -1;
  std::vector<double> window;
  std::vector<std::string> sets;
  app.add_option("--config", config_path, "Run configuration (key = value lines)")->required();
  app.add_option("--out", out_dir, "Output directory (overrides output.dir)");
  app.add_option("--jobs", jobs, "Worker threads, 0 = all cores (overrides jobs)")->check(CLI::NonNegativeNumber);
  app.add_option("--window", window, "E window LO HI (overrides window.lo, window.hi)")->expected(2);
  app.add_option("--set", sets, "Extra key=value override, repeatable");
  app.set_version_flag("--version", billiard_version());

  app.add_subcommand("validate", "Check the profile against the wing conditions");
  app.add_subcommand("spectrum", "Solve and cache the eigenpairs of the window, write spectrum.csv");
  auto* verify = app.add_subcommand("verify", "Run a verification suite");
  std::string suite;
  verify->add_option("suite", suite, "onedim | forms | bounds")
      ->required()
      ->check(CLI::IsMember({"onedim", "forms", "bounds"}));
  app.add_subcommand("sweep", "spectrum, then the bounds suite and resonance.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : BILLIARD_EXIT_USAGE;
  }

  billiard_config* config = nullptr;
  billiard_status s = billiard_config_load(config_path.c_str(), &config);
  if (s != BILLIARD_OK) return report_error(s);
  auto set = [&](const std::string& key, const std::string& value) {
    const billiard_status st = billiard_config_set(config, key.c_str(), value.c_str());
    if (st != BILLIARD_OK) std::fprintf(stderr, "billiard: override %s: %s\n", key.c_str(), billiard_last_error());
    return st;
  };
  std::vector<billiard_status> overrides;
  if (!out_dir.empty()) overrides.push_back(set("output.dir", out_dir));
  if (jobs >= 0) overrides.push_back(set("jobs", std::to_string(jobs)));
  if (window.size() == 2) {
    overrides.push_back(set("window.lo", CLI::detail::to_string(window[0])));
    overrides.push_back(set("window.hi", CLI::detail::to_string(window[1])));
  }
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "billiard: --set expects key=value, got '%s'\n", kv.c_str());
      billiard_config_free(config);
      return BILLIARD_EXIT_USAGE;
    }
    overrides.push_back(set(kv.substr(0, eq), kv.substr(eq + 1)));
  }
  for (auto st : overrides)
    if (st != BILLIARD_OK) {
      billiard_config_free(config);
      return BILLIARD_EXIT_USAGE;
    }

  const std::string command = app.get_subcommands().front()->get_name();
  int exit_code = 0;
  char* report = nullptr;
  s = billiard_run(config, command.c_str(), suite.empty() ? nullptr : suite.c_str(), &exit_code, &report);
  billiard_config_free(config);
  if (s != BILLIARD_OK) return report_error(s);
  std::fputs(report, stdout);
  billiard_string_free(report);
  return exit_code;
}
