#ifndef MICMA_BENCHMARKS_HPP
#define MICMA_BENCHMARKS_HPP

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "micma/space.hpp"

namespace micma {

/// Mixed-variable test function over encoded vectors. The continuous block
/// comes first, then the binary or integer block; integer dimensions use the
/// candidate set {-10, ..., 10}.
struct Benchmark {
  std::string name;
  int n_continuous = 0;
  int n_binary = 0;
  int n_integer = 0;
  SearchSpace space;
  double optimum_value = 0.0;
  long int_lo = -10;
  long int_hi = 10;

  int dim() const { return space.dim(); }
  double evaluate(std::span<const double> encoded) const;
};

inline constexpr std::string_view kBenchmarkNames[] = {
    "sphere-one-max",  "sphere-leading-ones",  "ellipsoid-one-max",
    "ellipsoid-leading-ones", "sphere-int", "ellipsoid-int"};

bool is_benchmark_name(std::string_view name);

/// Builds one of the named functions with an even split between continuous
/// and discrete dimensions. Throws ConfigError for unknown names or odd N.
Benchmark make_benchmark(std::string_view name, int dim);

/// Same formula over a caller-supplied space (counts are derived from it).
Benchmark make_benchmark(std::string_view name, SearchSpace space);

}  // namespace micma

#endif
