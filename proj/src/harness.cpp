#include "micma/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <ostream>
#include <thread>

#include "micma/errors.hpp"

namespace micma {

Method method_from_string(std::string_view name) {
  if (name == "cmaes") return Method::Cmaes;
  if (name == "cmaes-im") return Method::CmaesIm;
  if (name == "cmaes-im-box") return Method::CmaesImBox;
  if (name == "margin") return Method::Margin;
  throw ConfigError("unknown method '" + std::string(name) + "'");
}

std::string_view method_name(Method method) {
  switch (method) {
    case Method::Cmaes: return "cmaes";
    case Method::CmaesIm: return "cmaes-im";
    case Method::CmaesImBox: return "cmaes-im-box";
    case Method::Margin: return "margin";
  }
  return "?";
}

std::string_view stop_reason_name(StopReason reason) {
  switch (reason) {
    case StopReason::Target: return "target";
    case StopReason::EigCollapse: return "eig-collapse";
    case StopReason::Condition: return "condition";
    case StopReason::Budget: return "budget";
    case StopReason::Numerical: return "numerical";
  }
  return "?";
}

void init_mean(std::vector<double>& mean, const SearchSpace& space, Rng& rng) {
  mean.resize(space.dim());
  for (int j = 0; j < space.dim(); ++j) {
    if (space.is_binary(j)) {
      mean[j] = space.thresholds(j).front();  // start on the encoding boundary
    } else {
      mean[j] = rng.uniform(1.0, 3.0);
    }
  }
}

namespace {

// Uniform per-method interface for the trial loop: factor the current C once
// per iteration, then run ask -> evaluate -> tell for one generation.
class Driver {
 public:
  virtual ~Driver() = default;
  virtual const FactoredCov& factored() = 0;
  virtual const CmaState& cma_state() const = 0;
  virtual const std::vector<double>* affine() const { return nullptr; }
  virtual void generation(Rng& rng, const Benchmark& bench,
                          std::vector<std::vector<double>>& points,
                          std::vector<double>& values) = 0;
};

class CmaDriver final : public Driver {
 public:
  CmaDriver(const SearchSpace& space, CmaParams params, CmaState state)
      : space_(space), params_(std::move(params)), state_(std::move(state)) {}

  const FactoredCov& factored() override {
    if (!factored_) factored_ = factor_covariance(state_.cov);
    return *factored_;
  }
  const CmaState& cma_state() const override { return state_; }

  void generation(Rng& rng, const Benchmark& bench, std::vector<std::vector<double>>& points,
                  std::vector<double>& values) override {
    GenerationRecord record = sample_generation(state_, params_, factored(), rng);
    points.clear();
    values.clear();
    for (const auto& x : record.x) {
      points.push_back(space_.encode(x));
      values.push_back(bench.evaluate(points.back()));
    }
    record.ranking = rank(values);
    update(state_, params_, record, *factored_);
    factored_.reset();
  }

 private:
  const SearchSpace& space_;
  CmaParams params_;
  CmaState state_;
  std::optional<FactoredCov> factored_;
};

class ImDriver final : public Driver {
 public:
  ImDriver(SearchSpace space, CmaParams params, CmaState state, BoxBounds bounds)
      : opt_(std::move(space), std::move(params), std::move(state), std::move(bounds)) {}

  const FactoredCov& factored() override { return opt_.factored(); }
  const CmaState& cma_state() const override { return opt_.state(); }

  void generation(Rng& rng, const Benchmark& bench, std::vector<std::vector<double>>& points,
                  std::vector<double>& values) override {
    GenerationRecord record = opt_.ask(rng);
    std::vector<double> penalties;
    points = opt_.evaluation_points(record, &penalties);
    values.resize(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
      values[i] = bench.evaluate(points[i]) + penalties[i];
    opt_.tell(record, values);
  }

 private:
  ImOptimizer opt_;
};

class MarginDriver final : public Driver {
 public:
  MarginDriver(SearchSpace space, CmaParams params, MarginState state)
      : opt_(std::move(space), std::move(params), std::move(state)) {}

  const FactoredCov& factored() override { return opt_.factored(); }
  const CmaState& cma_state() const override { return opt_.state().base; }
  const std::vector<double>* affine() const override { return &opt_.state().affine; }

  void generation(Rng& rng, const Benchmark& bench, std::vector<std::vector<double>>& points,
                  std::vector<double>& values) override {
    MarginRecord record = opt_.ask(rng);
    points = std::move(record.v_bar);
    record.v_bar.clear();
    values.resize(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) values[i] = bench.evaluate(points[i]);
    opt_.tell(record, values);
  }

 private:
  MarginOptimizer opt_;
};

std::unique_ptr<Driver> make_driver(const TrialConfig& config, const Benchmark& bench,
                                    const CmaParams& params, Rng& rng) {
  const SearchSpace& space = bench.space;
  CmaState cma(space.dim());
  init_mean(cma.mean, space, rng);
  switch (config.method) {
    case Method::Cmaes:
      return std::make_unique<CmaDriver>(space, params, std::move(cma));
    case Method::CmaesIm:
      return std::make_unique<ImDriver>(space, params, std::move(cma), BoxBounds::none());
    case Method::CmaesImBox:
      return std::make_unique<ImDriver>(space, params, std::move(cma),
                                        BoxBounds::discrete_default(space));
    case Method::Margin: {
      const double alpha = config.alpha.value_or(default_alpha(space.dim(), params.lambda));
      MarginState state(space.dim(), alpha);
      state.base = std::move(cma);
      return std::make_unique<MarginDriver>(space, params, std::move(state));
    }
  }
  throw ConfigError("unknown method");
}

}  // namespace

TrialResult run_trial(const TrialConfig& config) {
  return run_trial(config, make_benchmark(config.function, config.dim));
}

TrialResult run_trial(const TrialConfig& config, const Benchmark& bench) {
  const CmaParams params = CmaParams::defaults(bench.dim(), config.lambda_override);
  Rng rng(config.seed);

  TrialResult result;
  result.best_f = std::numeric_limits<double>::infinity();
  long evals = 0;
  long t = 0;

  std::vector<std::vector<double>> points;
  std::vector<double> values;
  try {
    auto driver = make_driver(config, bench, params, rng);
    for (;;) {
      if (evals + params.lambda > config.max_evals) {
        result.reason = StopReason::Budget;
        break;
      }
      const FactoredCov& factored = driver->factored();
      const double sigma = driver->cma_state().sigma;
      if (sigma * sigma * factored.min_eigenvalue() < config.min_eig_stop) {
        result.reason = StopReason::EigCollapse;
        break;
      }
      if (factored.condition_number() > config.max_cond) {
        result.reason = StopReason::Condition;
        break;
      }

      driver->generation(rng, bench, points, values);
      evals += params.lambda;
      ++t;
      for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] < result.best_f) {
          result.best_f = values[i];
          result.best_encoded = points[i];
        }
      }

      if (config.log_trajectory) {
        const CmaState& state = driver->cma_state();
        TrajectoryRow row;
        row.t = t;
        row.evals = evals;
        row.best_f = result.best_f;
        row.sigma = state.sigma;
        row.mean = state.mean;
        row.std_dev.resize(state.dim());
        for (int j = 0; j < state.dim(); ++j)
          row.std_dev[j] = state.sigma * std::sqrt(state.cov(j, j));
        if (const auto* a = driver->affine()) row.affine = *a;
        result.trajectory.push_back(std::move(row));
      }

      if (result.best_f < config.target) {
        result.success = true;
        result.reason = StopReason::Target;
        break;
      }
    }
  } catch (const NumericalFailure&) {
    result.reason = StopReason::Numerical;
  } catch (const EvaluationError&) {
    result.reason = StopReason::Numerical;
  } catch (const InvalidMatrix&) {
    result.reason = StopReason::Numerical;
  }
  result.evaluations = evals;
  return result;
}

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body) {
  jobs = std::max(1, jobs);
  if (jobs == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (int w = 0; w < jobs; ++w) pool.emplace_back(worker);
  for (auto& thread : pool) thread.join();
  if (first_error) std::rethrow_exception(first_error);
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n == 0) throw DomainError("median of empty set");
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::pair<double, double> quartiles(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n == 0) throw DomainError("quartiles of empty set");
  const std::size_t half = (n + 1) / 2;  // odd counts share the middle element
  std::vector<double> lower(values.begin(), values.begin() + half);
  std::vector<double> upper(values.end() - half, values.end());
  return {median(std::move(lower)), median(std::move(upper))};
}

namespace {

BatchSummary summarize(BatchKey key, const std::vector<TrialResult>& results) {
  BatchSummary summary;
  summary.key = std::move(key);
  summary.trials = static_cast<int>(results.size());
  std::vector<double> successful_evals;
  for (const auto& r : results) {
    if (r.success) {
      ++summary.successes;
      successful_evals.push_back(static_cast<double>(r.evaluations));
    }
  }
  if (!successful_evals.empty()) {
    summary.median_evals = median(successful_evals);
    const auto [q1, q3] = quartiles(std::move(successful_evals));
    summary.iqr_evals = q3 - q1;
  }
  return summary;
}

}  // namespace

std::vector<BatchSummary> run_batch(const std::vector<TrialConfig>& configs, int trials,
                                    std::uint64_t base_seed, int parallelism) {
  if (trials < 1) throw ConfigError("run_batch: trials must be >= 1");
  const std::size_t total = configs.size() * static_cast<std::size_t>(trials);
  std::vector<TrialResult> results(total);
  parallel_for(total, parallelism, [&](std::size_t item) {
    TrialConfig config = configs[item / trials];
    config.seed = base_seed + static_cast<std::uint64_t>(item % trials);
    config.log_trajectory = false;
    results[item] = run_trial(config);
  });

  std::vector<BatchSummary> summaries;
  summaries.reserve(configs.size());
  for (std::size_t c = 0; c < configs.size(); ++c) {
    std::vector<TrialResult> slice(results.begin() + c * trials,
                                   results.begin() + (c + 1) * trials);
    summaries.push_back(summarize(
        BatchKey{configs[c].function, configs[c].dim, configs[c].method}, slice));
  }
  return summaries;
}

std::vector<AlphaGridCell> alpha_grid(const std::string& function, int dim,
                                      const std::vector<double>& m_grid,
                                      const std::vector<double>& n_grid, int trials,
                                      std::uint64_t base_seed, int parallelism, long max_evals) {
  if (m_grid.empty() || n_grid.empty()) throw ConfigError("alpha_grid: empty exponent grid");
  const CmaParams params = CmaParams::defaults(dim);
  std::vector<AlphaGridCell> cells;
  for (double m : m_grid) {
    for (double n : n_grid) {
      if (m == 0.0 && n == 0.0) continue;  // alpha = 1 is excluded
      AlphaGridCell cell;
      cell.m = m;
      cell.n = n;
      cell.alpha = std::pow(static_cast<double>(dim), -m) *
                   std::pow(static_cast<double>(params.lambda), -n);
      cells.push_back(cell);
    }
  }

  const std::size_t total = cells.size() * static_cast<std::size_t>(trials);
  std::vector<TrialResult> results(total);
  parallel_for(total, parallelism, [&](std::size_t item) {
    const AlphaGridCell& cell = cells[item / trials];
    TrialConfig config;
    config.function = function;
    config.dim = dim;
    config.method = Method::Margin;
    config.alpha = cell.alpha;
    config.seed = base_seed + static_cast<std::uint64_t>(item % trials);
    config.max_evals = max_evals;
    results[item] = run_trial(config);
  });

  for (std::size_t c = 0; c < cells.size(); ++c) {
    int successes = 0;
    std::vector<double> evals;
    for (int k = 0; k < trials; ++k) {
      const TrialResult& r = results[c * trials + k];
      if (r.success) {
        ++successes;
        evals.push_back(static_cast<double>(r.evaluations));
      }
    }
    cells[c].success_rate = static_cast<double>(successes) / trials;
    if (!evals.empty()) cells[c].median_evals = median(std::move(evals));
  }
  return cells;
}

std::string format_double(double value) {
  char buffer[32];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

void write_trajectory_csv(std::ostream& out, const TrialResult& result, int dim,
                          bool with_affine) {
  out << "t,evals,best_f,sigma";
  for (int j = 1; j <= dim; ++j) out << ",m_" << j;
  for (int j = 1; j <= dim; ++j) out << ",std_" << j;
  if (with_affine)
    for (int j = 1; j <= dim; ++j) out << ",A_" << j;
  out << "\n";
  for (const auto& row : result.trajectory) {
    out << row.t << ',' << row.evals << ',' << format_double(row.best_f) << ','
        << format_double(row.sigma);
    for (double v : row.mean) out << ',' << format_double(v);
    for (double v : row.std_dev) out << ',' << format_double(v);
    if (with_affine)
      for (double v : row.affine) out << ',' << format_double(v);
    out << "\n";
  }
}

void write_summary_csv(std::ostream& out, const std::vector<BatchSummary>& rows) {
  out << "function,N,method,trials,successes,median_evals,iqr_evals\n";
  for (const auto& row : rows) {
    out << row.key.function << ',' << row.key.dim << ',' << method_name(row.key.method) << ','
        << row.trials << ',' << row.successes << ',';
    if (row.median_evals) out << format_double(*row.median_evals);
    out << ',';
    if (row.iqr_evals) out << format_double(*row.iqr_evals);
    out << "\n";
  }
}

void write_grid_csv(std::ostream& out, const std::vector<GridRow>& rows) {
  out << "function,N,m,n,alpha,success_rate,median_evals\n";
  for (const auto& row : rows) {
    const AlphaGridCell& cell = row.cell;
    out << row.function << ',' << row.dim << ',' << format_double(cell.m) << ','
        << format_double(cell.n) << ',' << format_double(cell.alpha) << ','
        << format_double(cell.success_rate) << ',';
    if (cell.median_evals) out << format_double(*cell.median_evals);
    out << "\n";
  }
}

}  // namespace micma
