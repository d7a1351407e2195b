#ifndef MICMA_HARNESS_HPP
#define MICMA_HARNESS_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "micma/benchmarks.hpp"
#include "micma/cmaes.hpp"
#include "micma/int_mutation.hpp"
#include "micma/margin.hpp"

namespace micma {

enum class Method { Cmaes, CmaesIm, CmaesImBox, Margin };

Method method_from_string(std::string_view name);
std::string_view method_name(Method method);

struct TrialConfig {
  std::string function;
  int dim = 20;
  Method method = Method::Margin;
  std::optional<double> alpha;  // margin only; empty means 1/(N*lambda)
  std::uint64_t seed = 1;
  double target = 1e-10;
  double min_eig_stop = 1e-30;
  double max_cond = 1e14;
  long max_evals = 1'000'000;
  bool log_trajectory = false;
  std::optional<int> lambda_override;
};

enum class StopReason { Target, EigCollapse, Condition, Budget, Numerical };

std::string_view stop_reason_name(StopReason reason);

struct TrajectoryRow {
  long t = 0;
  long evals = 0;
  double best_f = 0.0;
  double sigma = 0.0;
  std::vector<double> mean;
  std::vector<double> std_dev;  // sigma * sqrt(C_jj)
  std::vector<double> affine;   // margin method only
};

struct TrialResult {
  bool success = false;
  long evaluations = 0;
  double best_f = 0.0;
  StopReason reason = StopReason::Budget;
  std::vector<double> best_encoded;
  std::vector<TrajectoryRow> trajectory;
};

/// Distribution initialization shared by every method: continuous and integer
/// means uniform on [1,3], binary means at the 0.5 threshold, sigma 1, C = I.
void init_mean(std::vector<double>& mean, const SearchSpace& space, Rng& rng);

/// Runs one optimization to termination. Numerical failures become a result
/// reason, not an exception.
TrialResult run_trial(const TrialConfig& config);
/// Same, over a caller-supplied benchmark (custom search spaces).
TrialResult run_trial(const TrialConfig& config, const Benchmark& bench);

struct BatchKey {
  std::string function;
  int dim = 0;
  Method method = Method::Margin;
};

struct BatchSummary {
  BatchKey key;
  int trials = 0;
  int successes = 0;
  std::optional<double> median_evals;  // absent when no trial succeeded
  std::optional<double> iqr_evals;
};

/// Median with even counts averaged; quartiles are Tukey hinges (the median
/// element joins both halves when the count is odd).
double median(std::vector<double> values);
std::pair<double, double> quartiles(std::vector<double> values);

/// Index-parallel loop over independent work items; jobs <= 1 runs inline.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body);

/// Runs `trials` seeds (base_seed + k) per configuration on a worker pool.
/// The summary is independent of the parallelism degree.
std::vector<BatchSummary> run_batch(const std::vector<TrialConfig>& configs, int trials,
                                    std::uint64_t base_seed, int parallelism);

struct AlphaGridCell {
  double m = 0.0;
  double n = 0.0;
  double alpha = 0.0;
  double success_rate = 0.0;
  std::optional<double> median_evals;
};

/// Margin-method sweep over alpha = N^-m * lambda^-n for every exponent pair
/// except (0,0).
std::vector<AlphaGridCell> alpha_grid(const std::string& function, int dim,
                                      const std::vector<double>& m_grid,
                                      const std::vector<double>& n_grid, int trials,
                                      std::uint64_t base_seed, int parallelism,
                                      long max_evals = 1'000'000);

inline const std::vector<double> kDefaultAlphaExponents = {0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0};

struct GridRow {
  std::string function;
  int dim = 0;
  AlphaGridCell cell;
};

void write_trajectory_csv(std::ostream& out, const TrialResult& result, int dim,
                          bool with_affine);
void write_summary_csv(std::ostream& out, const std::vector<BatchSummary>& rows);
void write_grid_csv(std::ostream& out, const std::vector<GridRow>& rows);

/// Shortest round-trip decimal representation of a double.
std::string format_double(double value);

}  // namespace micma

#endif
