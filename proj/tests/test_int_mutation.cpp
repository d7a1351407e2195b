#include <doctest.h>

#include <cmath>
#include <vector>

#include "micma/errors.hpp"
#include "micma/int_mutation.hpp"

using namespace micma;

namespace {

SearchSpace mixed_space(int n_cont, int n_int) {
  std::vector<VariableSpec> specs;
  for (int j = 0; j < n_cont; ++j) specs.push_back(VariableSpec::continuous());
  for (int j = 0; j < n_int; ++j) specs.push_back(VariableSpec::integer_range(-10, 10));
  return SearchSpace(std::move(specs));
}

}  // namespace

TEST_CASE("build_J selects dims whose deviation fell below the granularity") {
  const auto space = mixed_space(2, 2);
  const auto s = GranularityMatrix::for_space(space);
  CHECK(s.s == std::vector<double>{0.0, 0.0, 1.0, 1.0});

  CmaState state(4);
  Rng rng(1);
  SUBCASE("large sigma leaves J empty") {
    state.sigma = 10.0;
    CHECK(build_J(state, s, rng).empty());
  }
  SUBCASE("small deviations are picked up, continuous dims never") {
    state.sigma = 0.4;  // 2 * 0.4 * 1 = 0.8 < 1
    const auto J = build_J(state, s, rng);
    REQUIRE(J.size() == 2);
    CHECK(((J[0] == 2 && J[1] == 3) || (J[0] == 3 && J[1] == 2)));
  }
  SUBCASE("per-dimension covariance matters") {
    state.sigma = 0.4;
    state.cov.set(2, 2, 25.0);  // 2 * 0.4 * 5 = 4 >= 1
    const auto J = build_J(state, s, rng);
    CHECK(J == std::vector<int>{3});
  }
}

TEST_CASE("lambda_int piecewise count") {
  CHECK(lambda_int_count(0, 15, 40) == 0);
  CHECK(lambda_int_count(3, 15, 40) == 5);  // min(1.5 + 4, 6) floored
  CHECK(lambda_int_count(40, 15, 40) == 7); // floor(15 / 2)
  CHECK(lambda_int_count(12, 12, 12) == 6);
  CHECK(lambda_int_count(1, 12, 24) == 3);  // min(1.2 + 2, 5) floored
}

TEST_CASE("sample_mutations structure") {
  const auto space = mixed_space(1, 3);
  const auto s = GranularityMatrix::for_space(space);
  const auto params = CmaParams::defaults(4);
  CmaState state(4);
  state.sigma = 0.1;
  Rng rng(7);

  SUBCASE("lambda_int zero means no mutation at all") {
    const auto draw = sample_mutations(state, params, s, {1, 2, 3}, 0, nullptr, rng);
    for (const auto& r : draw.r_int)
      for (long v : r) CHECK(v == 0);
  }

  SUBCASE("singleton J puts the one-hot on the same index for every candidate") {
    const auto draw = sample_mutations(state, params, s, {2}, 3, nullptr, rng);
    for (int i = 0; i < 3; ++i) {
      CHECK(draw.r_prime[i][2] == 1);
      for (int j = 0; j < 4; ++j)
        if (j != 2) CHECK(draw.r_prime[i][j] == 0);
      CHECK(std::abs(draw.r_int[i][2]) >= 1);
    }
    // Untouched candidates between lambda_int and lambda stay zero.
    for (int i = 3; i < params.lambda - 1; ++i)
      for (long v : draw.r_int[i]) CHECK(v == 0);
  }

  SUBCASE("mutations live on J dims only") {
    Rng local(19);
    const auto draw = sample_mutations(state, params, s, {3, 1}, 2, nullptr, local);
    for (int i = 0; i < 2; ++i) {
      CHECK(draw.r_int[i][0] == 0);
      CHECK(draw.r_int[i][2] == 0);
    }
  }

  SUBCASE("last candidate steps toward the previous best") {
    state.mean = {0.0, 0.4, 0.4, 0.4};
    const std::vector<double> prev_best{9.9, 3.2, 3.2, 3.2};
    const auto draw = sample_mutations(state, params, s, {1}, 2, &prev_best, rng);
    const int last = params.lambda - 1;
    CHECK(draw.r_int[last][0] == 0);  // continuous dim excluded
    for (int j = 1; j < 4; ++j) CHECK(std::abs(draw.r_int[last][j]) == 3);
  }
}

TEST_CASE("inject adds granular steps to x only") {
  const auto space = mixed_space(1, 1);
  const auto s = GranularityMatrix::for_space(space);
  GenerationRecord record;
  record.x = {{1.0, 2.0}, {0.5, -1.0}};
  record.y = {{1.0, 2.0}, {0.5, -1.0}};
  MutationDraw draw;
  draw.r_int = {{5, 2}, {0, 0}};

  inject(record, s, draw);
  CHECK(record.x[0][0] == 1.0);  // s = 0 on the continuous dim
  CHECK(record.x[0][1] == 4.0);
  CHECK(record.x[1][0] == 0.5);
  CHECK(record.x[1][1] == -1.0);
  CHECK(record.y[0][1] == 2.0);
}

TEST_CASE("masked step-size update") {
  const auto params = CmaParams::defaults(2);
  SUBCASE("all-ones mask reproduces the plain update") {
    const std::vector<double> p{0.4, -1.1};
    const std::vector<std::uint8_t> mask{1, 1};
    CHECK(masked_sigma_update(0.7, params, p, mask) == csa_step_size(0.7, params, p));
  }
  SUBCASE("fully masked leaves sigma unchanged") {
    const std::vector<double> p{3.0, 4.0};
    const std::vector<std::uint8_t> mask{0, 0};
    CHECK(masked_sigma_update(0.7, params, p, mask) == 0.7);
  }
  SUBCASE("partial mask uses only unmasked components") {
    const std::vector<double> p{3.0, 4.0};
    const std::vector<std::uint8_t> mask{0, 1};
    const double expected =
        0.7 * std::exp(params.c_sigma / params.d_sigma * (4.0 / expected_norm(1) - 1.0));
    CHECK(masked_sigma_update(0.7, params, p, mask) == doctest::Approx(expected).epsilon(1e-15));
  }
}

TEST_CASE("sigma_mask rule") {
  const auto space = mixed_space(1, 1);
  const auto s = GranularityMatrix::for_space(space);
  const auto params = CmaParams::defaults(2);
  CmaState state(2);
  state.sigma = 0.001;
  const auto masked = sigma_mask(state, params, s);
  CHECK(masked[0] == 1);  // continuous dims never masked
  CHECK(masked[1] == 0);  // 5 * 0.001 / sqrt(c_sigma) << 1
  state.sigma = 10.0;
  CHECK(sigma_mask(state, params, s)[1] == 1);
}

TEST_CASE("box_penalty") {
  const auto space = mixed_space(0, 40);
  BoxBounds bounds;
  bounds.interval.assign(40, std::make_pair(-1.0, 1.0));

  std::vector<double> inside(40, 0.25);
  auto [feas_in, pen_in] = box_penalty(inside, bounds);
  CHECK(pen_in == 0.0);
  CHECK(feas_in == inside);

  std::vector<double> x(40, 0.0);
  x[3] = 1.5;
  auto [feas, pen] = box_penalty(x, bounds);
  CHECK(pen == doctest::Approx(0.25 / 40.0).epsilon(1e-15));
  CHECK(feas[3] == 1.0);

  x[10] = -1.5;
  auto [feas2, pen2] = box_penalty(x, bounds);
  CHECK(pen2 == doctest::Approx(0.5 / 40.0).epsilon(1e-15));
  CHECK(feas2[10] == -1.0);

  auto [feas3, pen3] = box_penalty(x, BoxBounds::none());
  CHECK(pen3 == 0.0);
  CHECK(feas3[3] == 1.5);
}

TEST_CASE("all-continuous reduction is bit-identical to plain CMA-ES") {
  const int n = 6;
  std::vector<VariableSpec> specs(n);
  SearchSpace space(std::move(specs));
  const auto params = CmaParams::defaults(n);

  CmaState init(n);
  for (int j = 0; j < n; ++j) init.mean[j] = 1.5 + 0.2 * j;

  ImOptimizer im(space, params, init, BoxBounds::none());
  CmaState plain = init;

  Rng rng_im(321), rng_plain(321);
  for (int iter = 0; iter < 50; ++iter) {
    GenerationRecord rec_im = im.ask(rng_im);
    GenerationRecord rec_plain = sample_generation(plain, params, rng_plain);
    std::vector<double> f_im(params.lambda), f_plain(params.lambda);
    for (int i = 0; i < params.lambda; ++i) {
      double a = 0.0, b = 0.0;
      for (int j = 0; j < n; ++j) {
        a += rec_im.x[i][j] * rec_im.x[i][j];
        b += rec_plain.x[i][j] * rec_plain.x[i][j];
      }
      f_im[i] = a;
      f_plain[i] = b;
    }
    im.tell(rec_im, f_im);
    rec_plain.ranking = rank(f_plain);
    update(plain, params, rec_plain);
  }

  CHECK(im.state().sigma == plain.sigma);
  CHECK(im.state().iteration == plain.iteration);
  for (int i = 0; i < n; ++i) {
    CHECK(im.state().mean[i] == plain.mean[i]);
    CHECK(im.state().p_sigma[i] == plain.p_sigma[i]);
    CHECK(im.state().p_c[i] == plain.p_c[i]);
    for (int j = 0; j < n; ++j) CHECK(im.state().cov(i, j) == plain.cov(i, j));
  }
}
