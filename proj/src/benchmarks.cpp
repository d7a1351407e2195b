#include "micma/benchmarks.hpp"

#include <algorithm>
#include <cmath>

#include "micma/errors.hpp"

namespace micma {

namespace {

// 1000^((j-1)/(count-1)) with j 1-based; a single dimension gets coefficient 1.
double ellipsoid_coefficient(int index, int count) {
  if (count <= 1) return 1.0;
  return std::pow(1000.0, static_cast<double>(index) / static_cast<double>(count - 1));
}

double sphere_term(std::span<const double> v, int begin, int end) {
  double sum = 0.0;
  for (int j = begin; j < end; ++j) sum += v[j] * v[j];
  return sum;
}

double ellipsoid_term(std::span<const double> v, int begin, int end) {
  double sum = 0.0;
  for (int j = begin; j < end; ++j) {
    const double scaled = ellipsoid_coefficient(j - begin, end - begin) * v[j];
    sum += scaled * scaled;
  }
  return sum;
}

double one_max_term(std::span<const double> v, int begin, int end) {
  double sum = 0.0;
  for (int j = begin; j < end; ++j) sum += v[j];
  return static_cast<double>(end - begin) - sum;
}

double leading_ones_term(std::span<const double> v, int begin, int end) {
  double sum = 0.0;
  double prefix = 1.0;
  for (int j = begin; j < end; ++j) {
    prefix *= v[j];
    sum += prefix;
  }
  return static_cast<double>(end - begin) - sum;
}

}  // namespace

bool is_benchmark_name(std::string_view name) {
  return std::find(std::begin(kBenchmarkNames), std::end(kBenchmarkNames), name) !=
         std::end(kBenchmarkNames);
}

double Benchmark::evaluate(std::span<const double> encoded) const {
  const int n = dim();
  if (static_cast<int>(encoded.size()) != n)
    throw DimensionError("benchmark: vector length does not match dimension");
  const int nc = n_continuous;
  if (name == "sphere-one-max") return sphere_term(encoded, 0, nc) + one_max_term(encoded, nc, n);
  if (name == "sphere-leading-ones")
    return sphere_term(encoded, 0, nc) + leading_ones_term(encoded, nc, n);
  if (name == "ellipsoid-one-max")
    return ellipsoid_term(encoded, 0, nc) + one_max_term(encoded, nc, n);
  if (name == "ellipsoid-leading-ones")
    return ellipsoid_term(encoded, 0, nc) + leading_ones_term(encoded, nc, n);
  if (name == "sphere-int") return sphere_term(encoded, 0, n);
  if (name == "ellipsoid-int") return ellipsoid_term(encoded, 0, n);
  throw ConfigError("benchmark: unknown function '" + name + "'");
}

Benchmark make_benchmark(std::string_view name, int dim) {
  if (!is_benchmark_name(name)) throw ConfigError("unknown benchmark '" + std::string(name) + "'");
  if (dim < 4 || dim % 2 != 0) throw ConfigError("benchmark dimension must be even and >= 4");
  const bool integer = name == "sphere-int" || name == "ellipsoid-int";
  const int half = dim / 2;

  std::vector<VariableSpec> specs;
  specs.reserve(dim);
  for (int j = 0; j < half; ++j) specs.push_back(VariableSpec::continuous());
  for (int j = 0; j < half; ++j)
    specs.push_back(integer ? VariableSpec::integer_range(-10, 10)
                            : VariableSpec::discrete({0.0, 1.0}));
  return make_benchmark(name, SearchSpace(std::move(specs)));
}

Benchmark make_benchmark(std::string_view name, SearchSpace space) {
  if (!is_benchmark_name(name)) throw ConfigError("unknown benchmark '" + std::string(name) + "'");
  Benchmark b{std::string(name), space.n_continuous(), space.n_binary(), space.n_integer(),
              std::move(space)};
  b.optimum_value = 0.0;
  return b;
}

}  // namespace micma
