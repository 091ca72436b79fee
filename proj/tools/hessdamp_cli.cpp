// Command-line front end: run, validate and check.
#include "hessdamp/hessdamp.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

constexpr int kOk = 0;
constexpr int kRunFailed = 1;
constexpr int kConfigError = 2;

std::vector<hessdamp::ExperimentConfig> load_or_report(const std::string& path, int& code) {
  try {
    return hessdamp::load_config(path);
  } catch (const hessdamp::Error& ex) {
    std::cerr << path << ": " << ex.what() << '\n';
    code = kConfigError;
    return {};
  }
}

int cmd_run(const std::string& path, bool strict, const std::string& out_dir, std::uint64_t seed) {
  int code = kOk;
  const auto configs = load_or_report(path, code);
  if (code != kOk) return code;
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  hessdamp::RunOptions opts;
  opts.out_dir = out_dir;
  opts.strict = strict;
  opts.seed = seed;
  for (const auto& outcome : hessdamp::run_all(configs, opts)) {
    std::cout << outcome.summary << '\n';
    if (outcome.status != hessdamp::ExitStatus::Ok) code = kRunFailed;
  }
  return code;
}

int cmd_validate(const std::string& path) {
  int code = kOk;
  const auto configs = load_or_report(path, code);
  if (code != kOk) return code;
  for (const auto& cfg : configs) {
    const auto problem = hessdamp::make_problem(cfg.problem);
    const auto verdict = hessdamp::certify(cfg, problem);
    std::cout << "name=" << cfg.name << " method=" << hessdamp::to_string(cfg.method)
              << " certificate=" << hessdamp::certificate_field(verdict) << '\n';
  }
  return code;
}

int cmd_check(const std::string& name, const std::vector<double>& args,
              const std::vector<std::string>& properties, std::size_t samples, std::uint64_t seed,
              const std::optional<double>& gamma, const std::optional<double>& lipschitz) {
  hessdamp::TestProblem problem;
  try {
    problem = hessdamp::make_problem({name, args, gamma, lipschitz});
  } catch (const std::exception& ex) {
    std::cerr << ex.what() << '\n';
    return kConfigError;
  }
  int code = kOk;
  for (const auto& prop : properties) {
    try {
      const auto rep = hessdamp::run_check(prop, problem, samples, seed);
      std::cout << hessdamp::serialize(rep) << '\n';
      if (!rep.passed) code = kRunFailed;
    } catch (const hessdamp::InvalidInput& ex) {
      std::cerr << prop << ": " << ex.what() << '\n';
      return kConfigError;
    } catch (const hessdamp::Error& ex) {
      std::cout << "property=" << prop << " passed=false error=\"" << ex.what() << "\"\n";
      code = kRunFailed;
    }
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heavy Ball / Nesterov with Hessian correction: experiments and checks"};
  app.require_subcommand(1);

  std::string config_path;
  bool strict = false;
  std::string out_dir = ".";
  std::uint64_t seed = 42;
  auto* run = app.add_subcommand("run", "run every experiment in a config file");
  run->add_option("config", config_path, "config file")->required();
  run->add_flag("--strict", strict, "refuse runs whose certificate is invalid");
  run->add_option("--out-dir", out_dir, "directory for CSV traces");
  run->add_option("--seed", seed, "seed for property checks");

  auto* validate = app.add_subcommand("validate", "print certificates without running");
  validate->add_option("config", config_path, "config file")->required();

  std::string problem;
  std::vector<double> args;
  std::vector<std::string> properties;
  std::size_t samples = 1000;
  std::optional<double> gamma;
  std::optional<double> lipschitz;
  auto* check = app.add_subcommand("check", "run sampled property checks on a problem");
  check->add_option("problem", problem, "registered problem name")->required();
  check->add_option("--properties", properties, "comma-separated property names")
      ->delimiter(',')
      ->required();
  check->add_option("--args", args, "problem constructor arguments")->delimiter(',');
  check->add_option("--samples", samples, "number of samples");
  check->add_option("--seed", seed, "sampling seed");
  check->add_option("--gamma", gamma, "override the quasiconvexity modulus");
  check->add_option("--lipschitz", lipschitz, "override the gradient Lipschitz constant");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  if (*run) return cmd_run(config_path, strict, out_dir, seed);
  if (*validate) return cmd_validate(config_path);
  return cmd_check(problem, args, properties, samples, seed, gamma, lipschitz);
}
