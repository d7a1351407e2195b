#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "micma/cmaes.hpp"
#include "micma/errors.hpp"

using namespace micma;

namespace {

double sphere(const std::vector<double>& x) {
  double sum = 0.0;
  for (double v : x) sum += v * v;
  return sum;
}

// Straight-line transcription of the update equations, written without the
// library's matrix machinery. Valid from the initial state where C = I, so
// C^{-1/2} is the identity.
struct ReferenceResult {
  std::vector<double> mean, p_sigma, p_c;
  std::vector<std::vector<double>> cov;
  double sigma;
};

ReferenceResult reference_update_from_identity(const CmaParams& p,
                                               const std::vector<double>& m0, double sigma0,
                                               const GenerationRecord& record,
                                               const std::vector<double>& f) {
  const int n = static_cast<int>(m0.size());
  // Independent ranking: selection sort on values with stable ties.
  std::vector<int> order(p.lambda);
  std::iota(order.begin(), order.end(), 0);
  for (int i = 0; i < p.lambda; ++i)
    for (int j = i + 1; j < p.lambda; ++j)
      if (f[order[j]] < f[order[i]]) std::swap(order[i], order[j]);

  ReferenceResult r;
  r.mean = m0;
  std::vector<double> dy(n, 0.0);
  for (int i = 0; i < p.mu; ++i) {
    for (int j = 0; j < n; ++j) {
      r.mean[j] += p.c_m * p.weights[i] * (record.x[order[i]][j] - m0[j]);
      dy[j] += p.weights[i] * record.y[order[i]][j];
    }
  }

  r.p_sigma.assign(n, 0.0);
  double ps_norm_sq = 0.0;
  for (int j = 0; j < n; ++j) {
    r.p_sigma[j] = std::sqrt(p.c_sigma * (2.0 - p.c_sigma) * p.mu_w) * dy[j];
    ps_norm_sq += r.p_sigma[j] * r.p_sigma[j];
  }
  const double e_norm =
      std::sqrt(static_cast<double>(n)) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));
  const int h_sigma = std::sqrt(ps_norm_sq) <
                              std::sqrt(1.0 - std::pow(1.0 - p.c_sigma, 2.0)) *
                                  (1.4 + 2.0 / (n + 1.0)) * e_norm
                          ? 1
                          : 0;

  r.p_c.assign(n, 0.0);
  for (int j = 0; j < n; ++j)
    r.p_c[j] = h_sigma * std::sqrt(p.c_c * (2.0 - p.c_c) * p.mu_w) * dy[j];

  std::vector<double> w_circ(p.lambda);
  double w_sum = 0.0;
  for (int i = 0; i < p.lambda; ++i) {
    w_sum += p.weights[i];
    if (p.weights[i] >= 0.0) {
      w_circ[i] = p.weights[i];
    } else {
      double y_sq = 0.0;
      for (double v : record.y[order[i]]) y_sq += v * v;
      w_circ[i] = p.weights[i] * n / y_sq;
    }
  }
  const double decay = 1.0 - p.c_1 - p.c_mu * w_sum +
                       (1.0 - h_sigma) * p.c_1 * p.c_c * (2.0 - p.c_c);
  r.cov.assign(n, std::vector<double>(n, 0.0));
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      double v = (a == b ? decay : 0.0) + p.c_1 * r.p_c[a] * r.p_c[b];
      for (int i = 0; i < p.lambda; ++i)
        v += p.c_mu * w_circ[i] * record.y[order[i]][a] * record.y[order[i]][b];
      r.cov[a][b] = v;
    }
  }
  r.sigma = sigma0 * std::exp(p.c_sigma / p.d_sigma * (std::sqrt(ps_norm_sq) / e_norm - 1.0));
  return r;
}

}  // namespace

TEST_CASE("default hyperparameters") {
  const auto p40 = CmaParams::defaults(40);
  CHECK(p40.lambda == 15);
  CHECK(p40.mu == 7);
  const auto p20 = CmaParams::defaults(20);
  CHECK(p20.lambda == 12);
  CHECK(p20.mu == 6);

  for (const auto& p : {p40, p20, CmaParams::defaults(7), CmaParams::defaults(60)}) {
    double pos = 0.0;
    for (int i = 0; i < p.mu; ++i) {
      pos += p.weights[i];
      CHECK(p.weights[i] > 0.0);
      if (i > 0) CHECK(p.weights[i - 1] >= p.weights[i]);
    }
    CHECK(std::abs(pos - 1.0) < 1e-12);
    for (int i = p.mu; i < p.lambda; ++i) CHECK(p.weights[i] <= 0.0);
    CHECK(p.c_1 + p.c_mu * pos <= 1.0 + 1e-12);
    for (double rate : {p.c_sigma, p.c_c, p.c_1, p.c_mu}) {
      CHECK(rate > 0.0);
      CHECK(rate <= 1.0);
    }
    CHECK(p.d_sigma >= 1.0);
    CHECK(p.c_m == 1.0);
  }
  CHECK_THROWS_AS(CmaParams::defaults(1), DomainError);
  CHECK(CmaParams::defaults(20, 30).lambda == 30);
}

TEST_CASE("sample_generation") {
  const auto params = CmaParams::defaults(4);
  CmaState state(4);
  SUBCASE("identity covariance gives y == xi") {
    Rng rng(3);
    const auto record = sample_generation(state, params, rng);
    for (int i = 0; i < params.lambda; ++i)
      for (int j = 0; j < 4; ++j) CHECK(record.y[i][j] == record.xi[i][j]);
  }
  SUBCASE("x is mean plus sigma times y") {
    state.sigma = 0.5;
    Rng rng(4);
    const auto record = sample_generation(state, params, rng);
    for (int i = 0; i < params.lambda; ++i)
      for (int j = 0; j < 4; ++j) CHECK(record.x[i][j] == 0.5 * record.y[i][j]);
  }
  SUBCASE("empirical covariance approaches C") {
    const std::vector<double> diag{1.0, 4.0};
    const auto factored = factor_covariance(SymMatrix::from_diagonal(diag));
    Rng rng(5);
    double s11 = 0.0, s22 = 0.0, s12 = 0.0;
    const int draws = 100'000;
    for (int i = 0; i < draws; ++i) {
      const auto y = factored.sqrt_cov.mul(rng.normal_vector(2));
      s11 += y[0] * y[0];
      s22 += y[1] * y[1];
      s12 += y[0] * y[1];
    }
    CHECK(std::abs(s11 / draws - 1.0) < 0.1);
    CHECK(std::abs(s22 / draws - 4.0) < 0.1);
    CHECK(std::abs(s12 / draws) < 0.1);
  }
}

TEST_CASE("rank") {
  const std::vector<double> f{3.0, 1.0, 2.0};
  CHECK(rank(f) == std::vector<int>{1, 2, 0});
  CHECK(rank(std::vector<double>{1.0, 1.0}) == std::vector<int>{0, 1});
  CHECK(rank(std::vector<double>{1.0, 2.0, 3.0}) == std::vector<int>{0, 1, 2});
  CHECK_THROWS_AS(rank(std::vector<double>{1.0, std::nan("")}), EvaluationError);
}

TEST_CASE("update matches an independently coded reference after one step") {
  const int n = 2;
  const auto params = CmaParams::defaults(n);
  CmaState state(n);
  state.mean = {1.5, -0.5};
  state.sigma = 0.8;
  Rng rng(101);
  GenerationRecord record = sample_generation(state, params, rng);
  std::vector<double> f(params.lambda);
  for (int i = 0; i < params.lambda; ++i) f[i] = sphere(record.x[i]);

  const ReferenceResult ref =
      reference_update_from_identity(params, state.mean, state.sigma, record, f);

  record.ranking = rank(f);
  update(state, params, record);

  for (int j = 0; j < n; ++j) {
    CHECK(std::abs(state.mean[j] - ref.mean[j]) < 1e-12);
    CHECK(std::abs(state.p_sigma[j] - ref.p_sigma[j]) < 1e-12);
    CHECK(std::abs(state.p_c[j] - ref.p_c[j]) < 1e-12);
    for (int k = 0; k < n; ++k) CHECK(std::abs(state.cov(j, k) - ref.cov[j][k]) < 1e-12);
  }
  CHECK(std::abs(state.sigma - ref.sigma) < 1e-12);
  CHECK(state.iteration == 1);
}

TEST_CASE("degenerate recombination copies the best candidate") {
  auto params = CmaParams::defaults(3);
  params.mu = 1;
  params.weights.assign(params.lambda, 0.0);
  params.weights[0] = 1.0;
  CmaState state(3);
  state.mean = {2.0, 2.0, 2.0};
  Rng rng(6);
  GenerationRecord record = sample_generation(state, params, rng);
  std::vector<double> f(params.lambda);
  for (int i = 0; i < params.lambda; ++i) f[i] = sphere(record.x[i]);
  record.ranking = rank(f);
  const auto best = record.x[record.ranking[0]];
  update(state, params, record);
  for (int j = 0; j < 3; ++j) CHECK(state.mean[j] == doctest::Approx(best[j]).epsilon(1e-12));
}

TEST_CASE("path norm at its expectation leaves sigma unchanged") {
  const auto params = CmaParams::defaults(5);
  std::vector<double> p(5, 0.0);
  p[0] = expected_norm(5);
  CHECK(csa_step_size(2.5, params, p) == doctest::Approx(2.5).epsilon(1e-15));
}

TEST_CASE("mean shift identity") {
  const auto params = CmaParams::defaults(6);
  CmaState state(6);
  for (int j = 0; j < 6; ++j) state.mean[j] = 0.3 * j - 1.0;
  state.sigma = 1.7;
  Rng rng(21);
  for (int iter = 0; iter < 5; ++iter) {
    GenerationRecord record = sample_generation(state, params, rng);
    std::vector<double> f(params.lambda);
    for (int i = 0; i < params.lambda; ++i) f[i] = sphere(record.x[i]);
    record.ranking = rank(f);
    const auto old_mean = state.mean;
    const double old_sigma = state.sigma;
    update(state, params, record);
    for (int j = 0; j < 6; ++j) {
      double wy = 0.0;
      for (int i = 0; i < params.mu; ++i)
        wy += params.weights[i] * record.y[record.ranking[i]][j];
      CHECK(std::abs(state.mean[j] - old_mean[j] - params.c_m * old_sigma * wy) < 1e-12);
    }
  }
}

TEST_CASE("covariance frozen when both covariance rates vanish") {
  auto params = CmaParams::defaults(4);
  params.c_1 = 0.0;
  params.c_mu = 0.0;
  CmaState state(4);
  state.mean = {1.0, 1.0, 1.0, 1.0};
  Rng rng(31);
  for (int iter = 0; iter < 10; ++iter) {
    GenerationRecord record = sample_generation(state, params, rng);
    std::vector<double> f(params.lambda);
    for (int i = 0; i < params.lambda; ++i) f[i] = sphere(record.x[i]);
    record.ranking = rank(f);
    update(state, params, record);
  }
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(state.cov(i, j) == (i == j ? 1.0 : 0.0));
}

TEST_CASE("covariance stays symmetric with real spectrum across updates") {
  const auto params = CmaParams::defaults(5);
  CmaState state(5);
  for (int j = 0; j < 5; ++j) state.mean[j] = 1.0 + 0.4 * j;
  Rng rng(77);
  for (int iter = 0; iter < 40; ++iter) {
    GenerationRecord record = sample_generation(state, params, rng);
    std::vector<double> f(params.lambda);
    for (int i = 0; i < params.lambda; ++i) f[i] = sphere(record.x[i]);
    record.ranking = rank(f);
    update(state, params, record);
    CHECK(state.sigma > 0.0);
    for (int i = 0; i < 5; ++i)
      for (int j = i + 1; j < 5; ++j) CHECK(state.cov(i, j) == state.cov(j, i));
    const auto eig = sym_eig(state.cov);  // must not throw; spectrum is real
    CHECK(eig.values.size() == 5);
  }
}

TEST_CASE("translation invariance on the sphere") {
  const int n = 5;
  const auto params = CmaParams::defaults(n);
  const std::vector<double> shift{10.0, -5.0, 3.0, 7.0, -2.0};

  CmaState plain(n), moved(n);
  for (int j = 0; j < n; ++j) {
    plain.mean[j] = 1.0 + 0.3 * j;
    moved.mean[j] = plain.mean[j] + shift[j];
  }
  Rng rng_a(55), rng_b(55);
  for (int iter = 0; iter < 50; ++iter) {
    GenerationRecord ra = sample_generation(plain, params, rng_a);
    GenerationRecord rb = sample_generation(moved, params, rng_b);
    std::vector<double> fa(params.lambda), fb(params.lambda);
    for (int i = 0; i < params.lambda; ++i) {
      fa[i] = sphere(ra.x[i]);
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += (rb.x[i][j] - shift[j]) * (rb.x[i][j] - shift[j]);
      fb[i] = s;
    }
    ra.ranking = rank(fa);
    rb.ranking = rank(fb);
    REQUIRE(ra.ranking == rb.ranking);
    update(plain, params, ra);
    update(moved, params, rb);
  }
  CHECK(std::abs(plain.sigma - moved.sigma) < 1e-12 * plain.sigma);
  for (int i = 0; i < n; ++i) {
    CHECK(std::abs(plain.mean[i] + shift[i] - moved.mean[i]) < 1e-9);
    for (int j = 0; j < n; ++j) CHECK(std::abs(plain.cov(i, j) - moved.cov(i, j)) < 1e-12);
  }
}

TEST_CASE("monotone transform of f leaves the trajectory bit-identical") {
  const int n = 6;
  const auto params = CmaParams::defaults(n);
  CmaState raw(n), warped(n);
  for (int j = 0; j < n; ++j) raw.mean[j] = warped.mean[j] = 2.0 - 0.2 * j;
  Rng rng_a(91), rng_b(91);
  for (int iter = 0; iter < 30; ++iter) {
    GenerationRecord ra = sample_generation(raw, params, rng_a);
    GenerationRecord rb = sample_generation(warped, params, rng_b);
    std::vector<double> fa(params.lambda), fb(params.lambda);
    for (int i = 0; i < params.lambda; ++i) {
      fa[i] = sphere(ra.x[i]);
      fb[i] = std::exp(sphere(rb.x[i]) / 10.0);
    }
    ra.ranking = rank(fa);
    rb.ranking = rank(fb);
    update(raw, params, ra);
    update(warped, params, rb);
  }
  CHECK(raw.sigma == warped.sigma);
  for (int i = 0; i < n; ++i) {
    CHECK(raw.mean[i] == warped.mean[i]);
    CHECK(raw.p_sigma[i] == warped.p_sigma[i]);
    for (int j = 0; j < n; ++j) CHECK(raw.cov(i, j) == warped.cov(i, j));
  }
}
