#include "micma/margin.hpp"

#include <algorithm>
#include <cmath>

#include "micma/errors.hpp"

namespace micma {

MarginState::MarginState(int dim, double alpha_value) : base(dim), affine(dim, 1.0), alpha(alpha_value) {
  if (!(alpha_value == 0.0 || (alpha_value > 0.0 && alpha_value < 0.5)))
    throw ConfigError("MarginState: alpha must be 0 or in (0, 0.5)");
}

double default_alpha(int dim, int lambda) {
  return 1.0 / (static_cast<double>(dim) * static_cast<double>(lambda));
}

MarginProbabilities restrict_probabilities(double p_low, double p_up, double p_mid, double alpha) {
  const double half = alpha / 2.0;
  MarginProbabilities p;
  p.p_low = p_low;
  p.p_up = p_up;
  p.p_mid = p_mid;
  p.p_low_clipped = std::max(half, p_low);
  p.p_up_clipped = std::max(half, p_up);
  const double denom = p.p_low_clipped + p.p_up_clipped + p_mid - 3.0 * half;
  if (denom <= 0.0) throw DomainError("restrict_probabilities: degenerate denominator");
  const double excess = (1.0 - p.p_low_clipped - p.p_up_clipped - p_mid) / denom;
  p.p_low_final = p.p_low_clipped + excess * (p.p_low_clipped - half);
  p.p_up_final = p.p_up_clipped + excess * (p.p_up_clipped - half);
  return p;
}

double marginal_ci(const MarginState& state, int j, double coverage) {
  const double a = state.affine[j];
  const double variance = state.base.sigma * state.base.sigma * a * a * state.base.cov(j, j);
  return std::sqrt(chi2_ppf_1dof(coverage) * variance);
}

void correct_toward_threshold(MarginState& state, const SearchSpace& space, int j) {
  double& m = state.base.mean[j];
  const double threshold = space.nearest_threshold(j, m);
  const double ci = marginal_ci(state, j, 1.0 - 2.0 * state.alpha);
  const double offset = m - threshold;
  const double sign = offset > 0.0 ? 1.0 : (offset < 0.0 ? -1.0 : 0.0);
  m = threshold + sign * std::min(std::abs(offset), ci);
}

namespace {

double tail_coefficient(double p_tail) {
  if (p_tail > 0.5) throw NumericalFailure("margin correction: tail mass above one half");
  // Round-off from the redistribution can leave 1-2p marginally negative.
  return std::sqrt(chi2_ppf_1dof(std::max(0.0, 1.0 - 2.0 * p_tail)));
}

}  // namespace

void correct_interior_integer(MarginState& state, const SearchSpace& space, int j) {
  double& m = state.base.mean[j];
  const auto bracket = space.low_up_thresholds(j, m);
  if (!bracket) throw DomainError("correct_interior_integer: mean not interior");
  const auto [lo, up] = *bracket;

  const double scale = state.base.sigma * std::sqrt(state.base.cov(j, j));
  const double marginal_std = scale * state.affine[j];
  const double p_low = normal_cdf((lo - m) / marginal_std);
  const double p_up = 1.0 - normal_cdf((up - m) / marginal_std);
  const double p_mid = 1.0 - p_low - p_up;

  const MarginProbabilities p = restrict_probabilities(p_low, p_up, p_mid, state.alpha);
  const double k_low = tail_coefficient(p.p_low_final);
  const double k_up = tail_coefficient(p.p_up_final);
  if (k_low + k_up <= 0.0) throw NumericalFailure("margin correction: degenerate tail coefficients");

  m = (lo * k_up + up * k_low) / (k_low + k_up);
  // Solves the pair of coverage conditions for A_j; the scale factor below is
  // what makes the solution consistent with the CI definition. The legacy
  // variant omits it and matches only when sigma^2 * C_jj == 1.
  if (state.legacy_affine_update) {
    state.affine[j] = (up - lo) / (k_low + k_up);
  } else {
    state.affine[j] = (up - lo) / (scale * (k_low + k_up));
  }
}

void apply_margin_correction(MarginState& state, const SearchSpace& space) {
  if (state.alpha == 0.0) return;
  for (int j = 0; j < space.dim(); ++j) {
    if (!space.is_discrete(j)) continue;
    if (space.is_binary(j)) {
      correct_toward_threshold(state, space, j);
      continue;
    }
    const auto& th = space.thresholds(j);
    const double m = state.base.mean[j];
    if (m <= th.front() || m > th.back()) {
      correct_toward_threshold(state, space, j);
    } else {
      correct_interior_integer(state, space, j);
    }
  }
}

MarginOptimizer::MarginOptimizer(SearchSpace space, CmaParams params, MarginState initial)
    : space_(std::move(space)), params_(std::move(params)), state_(std::move(initial)) {}

const FactoredCov& MarginOptimizer::factored() {
  if (!factored_) factored_ = factor_covariance(state_.base.cov);
  return *factored_;
}

MarginRecord MarginOptimizer::ask(Rng& rng) {
  MarginRecord record;
  record.base = sample_generation(state_.base, params_, factored(), rng);
  const int n = state_.base.dim();
  record.v.resize(params_.lambda);
  record.v_bar.resize(params_.lambda);
  for (int i = 0; i < params_.lambda; ++i) {
    record.v[i].resize(n);
    for (int j = 0; j < n; ++j)
      record.v[i][j] = state_.base.mean[j] +
                       state_.base.sigma * state_.affine[j] * record.base.y[i][j];
    record.v_bar[i] = space_.encode(record.v[i]);
  }
  return record;
}

void MarginOptimizer::tell(MarginRecord& record, std::span<const double> f_values) {
  record.base.ranking = rank(f_values);
  update(state_.base, params_, record.base, factored());
  apply_margin_correction(state_, space_);
  factored_.reset();
}

}  // namespace micma
