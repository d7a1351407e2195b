#include "micma/int_mutation.hpp"

#include <algorithm>
#include <cmath>

#include "micma/errors.hpp"

namespace micma {

GranularityMatrix GranularityMatrix::for_space(const SearchSpace& space) {
  GranularityMatrix g;
  g.s.resize(space.dim(), 0.0);
  for (int j = 0; j < space.dim(); ++j)
    if (space.is_discrete(j)) g.s[j] = 1.0;
  return g;
}

BoxBounds BoxBounds::discrete_default(const SearchSpace& space) {
  BoxBounds b;
  b.interval.resize(space.dim());
  for (int j = 0; j < space.dim(); ++j) {
    if (!space.is_discrete(j)) continue;
    const auto& z = space.candidates(j);
    b.interval[j] = space.is_binary(j) ? std::make_pair(-1.0, 1.0)
                                       : std::make_pair(z.front(), z.back());
  }
  return b;
}

std::vector<int> build_J(const CmaState& state, const GranularityMatrix& s, Rng& rng) {
  std::vector<int> J;
  for (int j = 0; j < state.dim(); ++j) {
    if (2.0 * state.sigma * std::sqrt(state.cov(j, j)) < s.s[j]) J.push_back(j);
  }
  // Fisher-Yates; draws nothing when J is empty or a singleton, which keeps
  // the all-continuous reduction stream-identical to plain CMA-ES.
  for (std::size_t i = J.size(); i > 1; --i) {
    const auto k = static_cast<std::size_t>(rng.next_double() * static_cast<double>(i));
    std::swap(J[i - 1], J[std::min(k, i - 1)]);
  }
  return J;
}

int lambda_int_count(int j_size, int lambda, int dim) {
  if (j_size == 0) return 0;
  if (j_size == dim) return lambda / 2;
  const double mid = std::min(lambda / 10.0 + j_size + 1.0,
                              static_cast<double>(lambda / 2 - 1));
  return static_cast<int>(std::floor(mid));
}

MutationDraw sample_mutations(const CmaState& state, const CmaParams& params,
                              const GranularityMatrix& s, std::vector<int> J, int lambda_int,
                              const std::vector<double>* prev_best_x, Rng& rng) {
  const int n = state.dim();
  const int lambda = params.lambda;
  MutationDraw draw;
  draw.J = std::move(J);
  draw.lambda_int = lambda_int;
  draw.r_int.assign(lambda, std::vector<long>(n, 0));
  draw.r_prime.assign(lambda, std::vector<long>(n, 0));
  draw.r_second.assign(lambda, std::vector<long>(n, 0));
  if (draw.J.empty() || lambda_int == 0) return draw;

  const auto j_size = static_cast<int>(draw.J.size());
  const double p = std::pow(0.7, 1.0 / j_size);
  std::vector<int> sorted_J = draw.J;
  std::sort(sorted_J.begin(), sorted_J.end());

  for (int i = 0; i < lambda_int; ++i) {
    draw.r_prime[i][draw.J[i % j_size]] = 1;
    for (int j : sorted_J) draw.r_second[i][j] = rng.geometric(p);
    for (int j : sorted_J) {
      const long magnitude = draw.r_prime[i][j] + draw.r_second[i][j];
      draw.r_int[i][j] = rng.next_double() < 0.5 ? magnitude : -magnitude;
    }
  }

  // Last candidate mimics the integer step from the mean to the previous best.
  if (prev_best_x != nullptr && !prev_best_x->empty()) {
    const int last = lambda - 1;
    for (int j = 0; j < n; ++j) {
      if (s.s[j] <= 0.0) continue;
      const long step = static_cast<long>(std::floor((*prev_best_x)[j] / s.s[j])) -
                        static_cast<long>(std::floor(state.mean[j] / s.s[j]));
      draw.r_int[last][j] = rng.next_double() < 0.5 ? step : -step;
    }
  }
  return draw;
}

void inject(GenerationRecord& record, const GranularityMatrix& s, const MutationDraw& draw) {
  for (std::size_t i = 0; i < record.x.size(); ++i)
    for (std::size_t j = 0; j < record.x[i].size(); ++j)
      record.x[i][j] += s.s[j] * static_cast<double>(draw.r_int[i][j]);
}

std::vector<std::uint8_t> sigma_mask(const CmaState& state, const CmaParams& params,
                                     const GranularityMatrix& s) {
  std::vector<std::uint8_t> mask(state.dim(), 1);
  const double scale = 5.0 * state.sigma / std::sqrt(params.c_sigma);
  for (int j = 0; j < state.dim(); ++j)
    if (scale * std::sqrt(state.cov(j, j)) < s.s[j]) mask[j] = 0;
  return mask;
}

double masked_sigma_update(double sigma, const CmaParams& params,
                           std::span<const double> p_sigma_next,
                           const std::vector<std::uint8_t>& mask) {
  return csa_step_size(sigma, params, p_sigma_next, &mask);
}

std::pair<std::vector<double>, double> box_penalty(std::span<const double> x,
                                                   const BoxBounds& bounds) {
  std::vector<double> feasible(x.begin(), x.end());
  if (bounds.empty()) return {std::move(feasible), 0.0};
  double dist_sq = 0.0;
  for (std::size_t j = 0; j < feasible.size(); ++j) {
    if (!bounds.interval[j]) continue;
    const auto [lo, hi] = *bounds.interval[j];
    const double clamped = std::clamp(feasible[j], lo, hi);
    const double d = feasible[j] - clamped;
    dist_sq += d * d;
    feasible[j] = clamped;
  }
  return {std::move(feasible), dist_sq / static_cast<double>(x.size())};
}

ImOptimizer::ImOptimizer(SearchSpace space, CmaParams params, CmaState initial, BoxBounds bounds)
    : space_(std::move(space)),
      params_(std::move(params)),
      state_(std::move(initial)),
      bounds_(std::move(bounds)),
      s_(GranularityMatrix::for_space(space_)) {}

const FactoredCov& ImOptimizer::factored() {
  if (!factored_) factored_ = factor_covariance(state_.cov);
  return *factored_;
}

GenerationRecord ImOptimizer::ask(Rng& rng, MutationDraw* draw_out) {
  GenerationRecord record = sample_generation(state_, params_, factored(), rng);
  std::vector<int> J = build_J(state_, s_, rng);
  const int count = lambda_int_count(static_cast<int>(J.size()), params_.lambda, state_.dim());
  MutationDraw draw = sample_mutations(state_, params_, s_, std::move(J), count,
                                       prev_best_x_.empty() ? nullptr : &prev_best_x_, rng);
  inject(record, s_, draw);
  if (draw_out != nullptr) *draw_out = std::move(draw);
  return record;
}

std::vector<std::vector<double>> ImOptimizer::evaluation_points(
    const GenerationRecord& record, std::vector<double>* penalties) const {
  std::vector<std::vector<double>> points;
  points.reserve(record.x.size());
  if (penalties != nullptr) penalties->assign(record.x.size(), 0.0);
  for (std::size_t i = 0; i < record.x.size(); ++i) {
    auto [feasible, penalty] = box_penalty(record.x[i], bounds_);
    if (penalties != nullptr) (*penalties)[i] = penalty;
    points.push_back(space_.encode(feasible));
  }
  return points;
}

void ImOptimizer::tell(GenerationRecord& record, std::span<const double> f_values) {
  record.ranking = rank(f_values);
  const std::vector<std::uint8_t> mask = sigma_mask(state_, params_, s_);
  UpdateOptions options;
  options.sigma_mask = &mask;
  update(state_, params_, record, factored(), options);
  prev_best_x_ = record.x[record.ranking.front()];
  factored_.reset();
}

}  // namespace micma
