#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "plsgd/config.hpp"
#include "plsgd/dispatch.hpp"
#include "plsgd/errors.hpp"
#include "plsgd/property_suite.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitRuntimeError = 3;

fs::path output_directory(const plsgd::ExperimentConfig& config,
                          const fs::path& config_path, const std::string& flag) {
  if (!flag.empty()) return flag;
  if (!config.output.empty()) return config.output;
  const char* root = std::getenv("PLSGD_OUT");
  return fs::path(root && *root ? root : "runs") / config_path.stem();
}

int run_command(const std::string& config_path, const std::string& out,
                unsigned threads) {
  plsgd::ExperimentConfig config;
  try {
    config = plsgd::parse_config(config_path);
  } catch (const plsgd::ConfigError& e) {
    nlohmann::json err = {{"error", "config"}, {"key", e.key()}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return plsgd::kExitConfigError;
  }
  const fs::path dir = output_directory(config, config_path, out);
  try {
    const plsgd::RunOutcome outcome = plsgd::run_experiment(config, dir, threads);
    std::cout << plsgd::render_report(dir);
    if (!outcome.failures.empty()) {
      nlohmann::json err = {{"error", "invariant"}, {"failures", outcome.failures}};
      std::cerr << err.dump() << "\n";
    }
    return outcome.exit_code;
  } catch (const plsgd::ConfigError& e) {
    nlohmann::json err = {{"error", "config"}, {"key", e.key()}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return plsgd::kExitConfigError;
  } catch (const plsgd::DivergenceError& e) {
    nlohmann::json err = {{"error", "divergence"}, {"step", e.step()},
                          {"gap", e.gap()}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return plsgd::kExitInvariantFailure;
  } catch (const std::exception& e) {
    nlohmann::json err = {{"error", "runtime"}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return kExitRuntimeError;
  }
}

int check_command(const std::string& fault) {
  std::vector<plsgd::PropertyResult> results;
  try {
    results = plsgd::run_property_suite(fault);
  } catch (const plsgd::InvalidArgument& e) {
    std::cerr << e.what() << "\n";
    return plsgd::kExitConfigError;
  }
  std::vector<std::string> failures;
  for (const auto& r : results) {
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.name;
    if (!r.detail.empty()) std::cout << "  (" << r.detail << ")";
    std::cout << "\n";
    if (!r.pass) failures.push_back(r.name);
  }
  if (!failures.empty()) {
    std::cerr << nlohmann::json{{"error", "property"}, {"failures", failures}}.dump()
              << "\n";
    return plsgd::kExitInvariantFailure;
  }
  return 0;
}

int report_command(const std::string& dir) {
  try {
    std::cout << plsgd::render_report(dir);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return plsgd::kExitConfigError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SGD under the PL condition: envelopes, ensembles, stability"};
  app.set_version_flag("--version", plsgd::version_string());
  app.require_subcommand(1);

  std::string config_path, out_dir;
  unsigned threads = 0;
  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("config", config_path, "Experiment config (TOML)")->required();
  run->add_option("--out", out_dir,
                  "Output directory (default: config 'output', else $PLSGD_OUT/<name>)");
  run->add_option("--threads", threads, "Worker threads (0 = all cores)");

  std::string fault;
  auto* check = app.add_subcommand("check", "Run the fast property suite");
  check->add_option("--inject-fault", fault, "Perturb the named property (self-test)");

  std::string run_dir;
  auto* report = app.add_subcommand("report", "Print the bound-vs-measurement table of a run");
  report->add_option("run-dir", run_dir, "Run output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : plsgd::kExitConfigError;
  }
  if (*run) return run_command(config_path, out_dir, threads);
  if (*check) return check_command(fault);
  if (*report) return report_command(run_dir);
  return plsgd::kExitConfigError;
}
