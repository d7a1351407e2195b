#include "micma/cmaes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "micma/errors.hpp"

namespace micma {

CmaParams CmaParams::defaults(int dim, std::optional<int> lambda_override) {
  if (dim < 2) throw DomainError("CmaParams: dim must be >= 2");
  CmaParams p;
  p.dim = dim;
  const double n = static_cast<double>(dim);
  p.lambda = lambda_override.value_or(4 + static_cast<int>(std::floor(3.0 * std::log(n))));
  if (p.lambda < 2) throw DomainError("CmaParams: lambda must be >= 2");
  p.mu = p.lambda / 2;

  std::vector<double> w_prime(p.lambda);
  for (int i = 0; i < p.lambda; ++i)
    w_prime[i] = std::log((p.lambda + 1.0) / 2.0) - std::log(i + 1.0);

  double pos_sum = 0.0, pos_sq = 0.0, neg_sum = 0.0, neg_sq = 0.0, neg_abs = 0.0;
  for (int i = 0; i < p.lambda; ++i) {
    if (i < p.mu) {
      pos_sum += w_prime[i];
      pos_sq += w_prime[i] * w_prime[i];
    } else {
      neg_sum += w_prime[i];
      neg_sq += w_prime[i] * w_prime[i];
      neg_abs += std::abs(w_prime[i]);
    }
  }
  p.mu_w = pos_sum * pos_sum / pos_sq;
  p.mu_w_neg = neg_sq > 0.0 ? neg_sum * neg_sum / neg_sq : 0.0;

  p.c_m = 1.0;
  p.c_sigma = (p.mu_w + 2.0) / (n + p.mu_w + 5.0);
  p.c_c = (4.0 + p.mu_w / n) / (n + 4.0 + 2.0 * p.mu_w / n);
  p.c_1 = 2.0 / ((n + 1.3) * (n + 1.3) + p.mu_w);
  p.c_mu = std::min(1.0 - p.c_1,
                    2.0 * (p.mu_w - 2.0 + 1.0 / p.mu_w) / ((n + 2.0) * (n + 2.0) + p.mu_w));
  p.d_sigma = 1.0 + p.c_sigma + 2.0 * std::max(0.0, std::sqrt((p.mu_w - 1.0) / (n + 1.0)) - 1.0);

  const double neg_scale = std::min({1.0 + p.c_1 / p.c_mu,
                                     1.0 + 2.0 * p.mu_w_neg / (p.mu_w + 2.0),
                                     (1.0 - p.c_1 - p.c_mu) / (n * p.c_mu)});
  p.weights.resize(p.lambda);
  for (int i = 0; i < p.lambda; ++i) {
    p.weights[i] = i < p.mu ? w_prime[i] / pos_sum
                            : (neg_abs > 0.0 ? w_prime[i] / neg_abs * neg_scale : 0.0);
  }
  return p;
}

double FactoredCov::condition_number() const {
  const double lo = eig.min_eigenvalue();
  const double hi = eig.max_eigenvalue();
  if (lo <= 0.0) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

FactoredCov factor_covariance(const SymMatrix& cov) {
  FactoredCov f{sym_eig(cov), SymMatrix(cov.dim()), SymMatrix(cov.dim())};
  f.sqrt_cov = sqrt_from_eigen(f.eig);
  f.inv_sqrt_cov = inv_sqrt_from_eigen(f.eig);
  return f;
}

GenerationRecord sample_generation(const CmaState& state, const CmaParams& params,
                                   const FactoredCov& factored, Rng& rng) {
  const int n = state.dim();
  GenerationRecord record;
  record.xi.resize(params.lambda);
  record.y.resize(params.lambda);
  record.x.resize(params.lambda);
  for (int i = 0; i < params.lambda; ++i) {
    record.xi[i] = rng.normal_vector(n);
    record.y[i] = factored.sqrt_cov.mul(record.xi[i]);
    record.x[i].resize(n);
    for (int j = 0; j < n; ++j) record.x[i][j] = state.mean[j] + state.sigma * record.y[i][j];
  }
  return record;
}

GenerationRecord sample_generation(const CmaState& state, const CmaParams& params, Rng& rng) {
  return sample_generation(state, params, factor_covariance(state.cov), rng);
}

std::vector<int> rank(std::span<const double> f_values) {
  for (double f : f_values)
    if (std::isnan(f)) throw EvaluationError("rank: NaN objective value");
  std::vector<int> order(f_values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return f_values[a] < f_values[b]; });
  return order;
}

double csa_step_size(double sigma, const CmaParams& params, std::span<const double> p_sigma_next,
                     const std::vector<std::uint8_t>* mask) {
  int active = 0;
  double norm_sq = 0.0;
  for (std::size_t j = 0; j < p_sigma_next.size(); ++j) {
    if (mask != nullptr && (*mask)[j] == 0) continue;
    ++active;
    norm_sq += p_sigma_next[j] * p_sigma_next[j];
  }
  if (active == 0) return sigma;
  return sigma * std::exp(params.c_sigma / params.d_sigma *
                          (std::sqrt(norm_sq) / expected_norm(active) - 1.0));
}

void update(CmaState& state, const CmaParams& params, GenerationRecord& record,
            const FactoredCov& factored, const UpdateOptions& options) {
  const int n = state.dim();
  const int lambda = params.lambda;

  // Weighted recombination of the mu best candidates.
  std::vector<double> dy(n, 0.0);
  std::vector<double> new_mean = state.mean;
  for (int i = 0; i < params.mu; ++i) {
    const int idx = record.ranking[i];
    for (int j = 0; j < n; ++j) {
      new_mean[j] += params.c_m * params.weights[i] * (record.x[idx][j] - state.mean[j]);
      dy[j] += params.weights[i] * record.y[idx][j];
    }
  }

  // Step-size path.
  const std::vector<double> whitened = factored.inv_sqrt_cov.mul(dy);
  const double cs_scale = std::sqrt(params.c_sigma * (2.0 - params.c_sigma) * params.mu_w);
  double p_sigma_norm_sq = 0.0;
  for (int j = 0; j < n; ++j) {
    state.p_sigma[j] = (1.0 - params.c_sigma) * state.p_sigma[j] + cs_scale * whitened[j];
    p_sigma_norm_sq += state.p_sigma[j] * state.p_sigma[j];
  }

  const double normalizer =
      std::sqrt(1.0 - std::pow(1.0 - params.c_sigma, 2.0 * (state.iteration + 1)));
  record.h_sigma = std::sqrt(p_sigma_norm_sq) <
                           normalizer * (1.4 + 2.0 / (n + 1.0)) * expected_norm(n)
                       ? 1
                       : 0;

  // Covariance path, gated to suppress rapid growth after large path norms.
  const double cc_scale =
      record.h_sigma * std::sqrt(params.c_c * (2.0 - params.c_c) * params.mu_w);
  for (int j = 0; j < n; ++j)
    state.p_c[j] = (1.0 - params.c_c) * state.p_c[j] + cc_scale * dy[j];

  // Rank-mu weights: negative weights are rescaled by N / ||C^{-1/2} y||^2.
  record.w_circ.resize(lambda);
  double weight_sum = 0.0;
  for (int i = 0; i < lambda; ++i) {
    weight_sum += params.weights[i];
    const int idx = record.ranking[i];
    if (params.weights[i] >= 0.0) {
      record.w_circ[i] = params.weights[i];
    } else {
      const std::vector<double> w = factored.inv_sqrt_cov.mul(record.y[idx]);
      double sq = 0.0;
      for (double v : w) sq += v * v;
      if (sq < 1e-300) throw NumericalFailure("update: degenerate whitened sample norm");
      record.w_circ[i] = params.weights[i] * n / sq;
    }
  }

  const double decay = 1.0 - params.c_1 - params.c_mu * weight_sum +
                       (1.0 - record.h_sigma) * params.c_1 * params.c_c * (2.0 - params.c_c);
  SymMatrix new_cov(n);
  for (int r = 0; r < n; ++r) {
    for (int c = r; c < n; ++c) {
      double value = decay * state.cov(r, c) + params.c_1 * state.p_c[r] * state.p_c[c];
      for (int i = 0; i < lambda; ++i) {
        const int idx = record.ranking[i];
        value += params.c_mu * record.w_circ[i] * record.y[idx][r] * record.y[idx][c];
      }
      new_cov.set(r, c, value);
    }
  }

  state.mean = std::move(new_mean);
  state.cov = std::move(new_cov);
  state.sigma = csa_step_size(state.sigma, params, state.p_sigma, options.sigma_mask);
  state.iteration += 1;

  bool finite = std::isfinite(state.sigma) && state.cov.all_finite();
  for (int j = 0; j < n && finite; ++j)
    finite = std::isfinite(state.mean[j]) && std::isfinite(state.p_sigma[j]) &&
             std::isfinite(state.p_c[j]);
  if (!finite) throw NumericalFailure("update: non-finite distribution state");
}

void update(CmaState& state, const CmaParams& params, GenerationRecord& record) {
  update(state, params, record, factor_covariance(state.cov));
}

}  // namespace micma
