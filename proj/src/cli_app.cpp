#include "micma/cli.hpp"

#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "micma/config.hpp"
#include "micma/errors.hpp"
#include "micma/harness.hpp"

namespace micma {

namespace {

using nlohmann::json;

json load_config_file(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json parsed;
  try {
    in >> parsed;
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
  if (!parsed.is_object()) throw ConfigError("config file must hold a JSON object");
  return parsed;
}

/// Command-line flags win over config-file values, which win over defaults.
template <typename T>
void merge_option(const CLI::App& cmd, const std::string& flag, const json& file,
                  const std::string& key, T& value) {
  if (cmd.count(flag) > 0 || !file.contains(key)) return;
  try {
    value = file.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write to '" + path + "'");
  return out;
}

int default_jobs() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

struct OptimizeOpts {
  std::string config_path;
  std::string function;
  int dim = 0;
  std::string method = "margin";
  std::string alpha = "auto";
  std::uint64_t seed = 1;
  long max_evals = 1'000'000;
  double target = 1e-10;
  double min_eig_stop = 1e-30;
  double max_cond = 1e14;
  std::string log_path;
  int lambda = 0;  // 0 keeps the dimension default
};

int cmd_optimize(const CLI::App& cmd, OptimizeOpts opts, std::ostream& out) {
  const json file = load_config_file(opts.config_path);
  merge_option(cmd, "--function", file, "function", opts.function);
  merge_option(cmd, "--dim", file, "dim", opts.dim);
  merge_option(cmd, "--method", file, "method", opts.method);
  merge_option(cmd, "--seed", file, "seed", opts.seed);
  merge_option(cmd, "--max-evals", file, "max-evals", opts.max_evals);
  merge_option(cmd, "--target", file, "target", opts.target);
  merge_option(cmd, "--min-eig-stop", file, "min-eig-stop", opts.min_eig_stop);
  merge_option(cmd, "--max-cond", file, "max-cond", opts.max_cond);
  merge_option(cmd, "--log", file, "log", opts.log_path);
  merge_option(cmd, "--lambda", file, "lambda", opts.lambda);
  if (cmd.count("--alpha") == 0 && file.contains("alpha")) {
    const auto& a = file.at("alpha");
    opts.alpha = a.is_string() ? a.get<std::string>() : format_double(a.get<double>());
  }

  if (opts.function.empty()) throw ConfigError("--function is required");
  if (opts.method.empty()) throw ConfigError("--method is required");

  std::optional<Benchmark> bench;
  if (file.contains("space")) {
    SearchSpace space = space_from_json(file.at("space"));
    if (opts.dim != 0 && opts.dim != space.dim())
      throw ConfigError("--dim does not match the configured space");
    opts.dim = space.dim();
    bench = make_benchmark(opts.function, std::move(space));
  }
  if (opts.dim <= 0) throw ConfigError("--dim is required");

  TrialConfig config;
  config.function = opts.function;
  config.dim = opts.dim;
  config.method = method_from_string(opts.method);
  config.alpha = parse_alpha(opts.alpha);
  config.seed = opts.seed;
  config.max_evals = opts.max_evals;
  config.target = opts.target;
  config.min_eig_stop = opts.min_eig_stop;
  config.max_cond = opts.max_cond;
  config.log_trajectory = !opts.log_path.empty();
  if (opts.lambda > 0) config.lambda_override = opts.lambda;

  const TrialResult result =
      bench ? run_trial(config, *bench) : run_trial(config);

  if (!opts.log_path.empty()) {
    std::ofstream log = open_output(opts.log_path);
    write_trajectory_csv(log, result, config.dim, config.method == Method::Margin);
  }

  json report;
  report["function"] = config.function;
  report["dim"] = config.dim;
  report["method"] = std::string(method_name(config.method));
  if (config.method == Method::Margin) {
    report["alpha"] = config.alpha.value_or(
        default_alpha(config.dim, CmaParams::defaults(config.dim, config.lambda_override).lambda));
  } else {
    report["alpha"] = nullptr;
  }
  report["seed"] = config.seed;
  report["success"] = result.success;
  report["evaluations"] = result.evaluations;
  report["best_f"] = result.best_f;
  report["reason"] = std::string(stop_reason_name(result.reason));
  out << report.dump() << "\n";
  return result.reason == StopReason::Numerical ? 1 : 0;
}

struct ExperimentOpts {
  std::string config_path;
  std::vector<std::string> functions{kBenchmarkNames, std::end(kBenchmarkNames)};
  std::vector<int> dims{20, 40, 60};
  std::vector<std::string> methods{"cmaes-im", "cmaes-im-box", "margin"};
  int trials = 100;
  int jobs = default_jobs();
  std::uint64_t seed_base = 1;
  long max_evals = 1'000'000;
  std::string out_path;
};

int cmd_experiment(const CLI::App& cmd, ExperimentOpts opts, std::ostream& out) {
  const json file = load_config_file(opts.config_path);
  merge_option(cmd, "--functions", file, "functions", opts.functions);
  merge_option(cmd, "--dims", file, "dims", opts.dims);
  merge_option(cmd, "--methods", file, "methods", opts.methods);
  merge_option(cmd, "--trials", file, "trials", opts.trials);
  merge_option(cmd, "--jobs", file, "jobs", opts.jobs);
  merge_option(cmd, "--seed-base", file, "seed-base", opts.seed_base);
  merge_option(cmd, "--max-evals", file, "max-evals", opts.max_evals);
  merge_option(cmd, "--out", file, "out", opts.out_path);
  if (opts.out_path.empty()) throw ConfigError("--out is required");

  std::vector<TrialConfig> configs;
  for (const auto& function : opts.functions) {
    if (!is_benchmark_name(function)) throw ConfigError("unknown benchmark '" + function + "'");
    for (int dim : opts.dims) {
      for (const auto& method : opts.methods) {
        TrialConfig config;
        config.function = function;
        config.dim = dim;
        config.method = method_from_string(method);
        config.max_evals = opts.max_evals;
        configs.push_back(std::move(config));
      }
    }
  }

  const std::vector<BatchSummary> summary =
      run_batch(configs, opts.trials, opts.seed_base, opts.jobs);
  if (opts.out_path == "-") {
    write_summary_csv(out, summary);
  } else {
    std::ofstream file_out = open_output(opts.out_path);
    write_summary_csv(file_out, summary);
  }
  return 0;
}

struct AlphaGridOpts {
  std::string config_path;
  std::string function;
  std::vector<int> dims;
  int trials = 100;
  int jobs = default_jobs();
  std::uint64_t seed_base = 1;
  long max_evals = 1'000'000;
  std::string out_path;
};

int cmd_alpha_grid(const CLI::App& cmd, AlphaGridOpts opts, std::ostream& out) {
  const json file = load_config_file(opts.config_path);
  merge_option(cmd, "--function", file, "function", opts.function);
  merge_option(cmd, "--dims", file, "dims", opts.dims);
  merge_option(cmd, "--trials", file, "trials", opts.trials);
  merge_option(cmd, "--jobs", file, "jobs", opts.jobs);
  merge_option(cmd, "--seed-base", file, "seed-base", opts.seed_base);
  merge_option(cmd, "--max-evals", file, "max-evals", opts.max_evals);
  merge_option(cmd, "--out", file, "out", opts.out_path);
  if (opts.function.empty()) throw ConfigError("--function is required");
  if (opts.dims.empty()) throw ConfigError("--dims is required");
  if (opts.out_path.empty()) throw ConfigError("--out is required");

  std::vector<GridRow> rows;
  for (int dim : opts.dims) {
    const auto cells =
        alpha_grid(opts.function, dim, kDefaultAlphaExponents, kDefaultAlphaExponents,
                   opts.trials, opts.seed_base, opts.jobs, opts.max_evals);
    for (const auto& cell : cells) rows.push_back(GridRow{opts.function, dim, cell});
  }

  if (opts.out_path == "-") {
    write_grid_csv(out, rows);
  } else {
    std::ofstream file_out = open_output(opts.out_path);
    write_grid_csv(file_out, rows);
  }
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mixed-integer black-box optimization with CMA-ES variants"};
  app.require_subcommand(1);

  const std::uint64_t env_base = env_seed_base().value_or(1);

  OptimizeOpts opt;
  opt.seed = env_base;
  CLI::App* optimize = app.add_subcommand("optimize", "Run a single optimization trial");
  optimize->add_option("--config", opt.config_path, "JSON config file; flags override it");
  optimize->add_option("--function", opt.function, "Benchmark function name");
  optimize->add_option("--dim", opt.dim, "Problem dimension N");
  optimize->add_option("--method", opt.method, "cmaes | cmaes-im | cmaes-im-box | margin");
  optimize->add_option("--alpha", opt.alpha, "Margin parameter or 'auto' for 1/(N*lambda)");
  optimize->add_option("--seed", opt.seed, "RNG seed");
  optimize->add_option("--max-evals", opt.max_evals, "Evaluation budget");
  optimize->add_option("--target", opt.target, "Success threshold on the best value");
  optimize->add_option("--min-eig-stop", opt.min_eig_stop,
                       "Stop when the smallest eigenvalue of sigma^2 C falls below this");
  optimize->add_option("--max-cond", opt.max_cond,
                       "Stop when the condition number of C exceeds this");
  optimize->add_option("--log", opt.log_path, "Write a trajectory CSV to this path");
  optimize->add_option("--lambda", opt.lambda, "Population size override");

  ExperimentOpts exp;
  exp.seed_base = env_base;
  CLI::App* experiment =
      app.add_subcommand("experiment", "Success-rate/evaluation-count comparison table");
  experiment->add_option("--config", exp.config_path, "JSON config file; flags override it");
  experiment->add_option("--functions", exp.functions, "Benchmark list")->delimiter(',');
  experiment->add_option("--dims", exp.dims, "Dimension list")->delimiter(',');
  experiment->add_option("--methods", exp.methods, "Method list")->delimiter(',');
  experiment->add_option("--trials", exp.trials, "Trials per configuration");
  experiment->add_option("--jobs", exp.jobs, "Worker threads");
  experiment->add_option("--seed-base", exp.seed_base, "Seed of trial k is base + k");
  experiment->add_option("--max-evals", exp.max_evals, "Evaluation budget per trial");
  experiment->add_option("--out", exp.out_path, "Summary CSV path ('-' for stdout)");

  AlphaGridOpts grid;
  grid.seed_base = env_base;
  CLI::App* alpha = app.add_subcommand("alpha-grid", "Margin-parameter sensitivity sweep");
  alpha->add_option("--config", grid.config_path, "JSON config file; flags override it");
  alpha->add_option("--function", grid.function, "Benchmark function name");
  alpha->add_option("--dims", grid.dims, "Dimension list")->delimiter(',');
  alpha->add_option("--trials", grid.trials, "Trials per grid cell");
  alpha->add_option("--jobs", grid.jobs, "Worker threads");
  alpha->add_option("--seed-base", grid.seed_base, "Seed of trial k is base + k");
  alpha->add_option("--max-evals", grid.max_evals, "Evaluation budget per trial");
  alpha->add_option("--out", grid.out_path, "Grid CSV path ('-' for stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (optimize->parsed()) return cmd_optimize(*optimize, std::move(opt), out);
    if (experiment->parsed()) return cmd_experiment(*experiment, std::move(exp), out);
    if (alpha->parsed()) return cmd_alpha_grid(*alpha, std::move(grid), out);
    err << "error: expected a subcommand\n";
    return 2;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace micma
