#include <doctest.h>

#include <cmath>
#include <vector>

#include "micma/benchmarks.hpp"
#include "micma/errors.hpp"
#include "micma/numerics.hpp"

using namespace micma;

TEST_CASE("make splits dimensions evenly") {
  const auto som = make_benchmark("sphere-one-max", 40);
  CHECK(som.n_continuous == 20);
  CHECK(som.n_binary == 20);
  CHECK(som.n_integer == 0);
  CHECK(som.dim() == 40);

  const auto si = make_benchmark("sphere-int", 20);
  CHECK(si.n_continuous == 10);
  CHECK(si.n_integer == 10);
  CHECK(si.space.candidates(10).front() == -10.0);
  CHECK(si.space.candidates(10).back() == 10.0);
  CHECK(si.space.candidates(10).size() == 21);

  CHECK_THROWS_AS(make_benchmark("rosenbrock", 20), ConfigError);
  CHECK_THROWS_AS(make_benchmark("sphere-int", 21), ConfigError);
  CHECK_THROWS_AS(make_benchmark("sphere-int", 2), ConfigError);
}

TEST_CASE("evaluate matches the closed forms") {
  SUBCASE("sphere-one-max") {
    const auto b = make_benchmark("sphere-one-max", 40);
    std::vector<double> v(40, 0.0);
    for (int j = 20; j < 40; ++j) v[j] = 1.0;
    CHECK(b.evaluate(v) == 0.0);  // optimum
    std::fill(v.begin() + 20, v.end(), 0.0);
    CHECK(b.evaluate(v) == 20.0);  // N_bi minus an empty sum
    CHECK_THROWS_AS(b.evaluate(std::vector<double>(39, 0.0)), DimensionError);
  }

  SUBCASE("sphere-leading-ones counts the prefix") {
    const auto b = make_benchmark("sphere-leading-ones", 8);
    std::vector<double> v(8, 0.0);
    v[4] = 1.0;
    v[5] = 1.0;
    v[6] = 0.0;
    v[7] = 1.0;  // prefix products: 1, 1, 0, 0
    CHECK(b.evaluate(v) == doctest::Approx(4.0 - 2.0));
  }

  SUBCASE("ellipsoid-int uses the full-dimension coefficient") {
    SearchSpace space({VariableSpec::continuous(), VariableSpec::integer_range(-10, 10)});
    const auto b = make_benchmark("ellipsoid-int", std::move(space));
    const std::vector<double> v{1.0, 1.0};
    CHECK(b.evaluate(v) == doctest::Approx(1000001.0));
  }

  SUBCASE("sphere-int at zero") {
    const auto b = make_benchmark("sphere-int", 20);
    CHECK(b.evaluate(std::vector<double>(20, 0.0)) == 0.0);
  }

  SUBCASE("ellipsoid-one-max coefficient spans the continuous block only") {
    const auto b = make_benchmark("ellipsoid-one-max", 4);
    std::vector<double> v{0.0, 1.0, 1.0, 1.0};
    // Second continuous coordinate carries 1000^{(2-1)/(2-1)} = 1000.
    CHECK(b.evaluate(v) == doctest::Approx(1000.0 * 1000.0));
  }
}

TEST_CASE("benchmarks are non-negative with zero exactly at the optimum") {
  Rng rng(41);
  for (const auto name : kBenchmarkNames) {
    const auto b = make_benchmark(name, 8);
    std::vector<double> opt(8, 0.0);
    if (b.n_binary > 0)
      for (int j = b.n_continuous; j < 8; ++j) opt[j] = 1.0;
    CHECK(b.evaluate(opt) == 0.0);

    for (int trial = 0; trial < 200; ++trial) {
      std::vector<double> v(8);
      for (int j = 0; j < 8; ++j) v[j] = rng.uniform(-12.0, 12.0);
      CHECK(b.evaluate(b.space.encode(v)) >= 0.0);
    }
  }
}

TEST_CASE("one-max and leading-ones agree on uniform binary blocks") {
  const auto om = make_benchmark("sphere-one-max", 12);
  const auto lo = make_benchmark("sphere-leading-ones", 12);
  std::vector<double> ones(12, 0.0), zeros(12, 0.0);
  for (int j = 6; j < 12; ++j) ones[j] = 1.0;
  CHECK(om.evaluate(ones) == lo.evaluate(ones));
  CHECK(om.evaluate(zeros) == lo.evaluate(zeros));
}
