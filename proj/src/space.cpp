#include "micma/space.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "micma/errors.hpp"

namespace micma {

VariableSpec VariableSpec::discrete(std::vector<double> candidates) {
  VariableSpec spec;
  spec.kind = VariableKind::Discrete;
  spec.candidates = std::move(candidates);
  return spec;
}

VariableSpec VariableSpec::integer_range(long lo, long hi) {
  if (lo >= hi) throw ConfigError("integer_range: lo must be < hi");
  std::vector<double> candidates;
  candidates.reserve(static_cast<std::size_t>(hi - lo + 1));
  for (long v = lo; v <= hi; ++v) candidates.push_back(static_cast<double>(v));
  return discrete(std::move(candidates));
}

namespace {

int kind_class(const VariableSpec& spec) {
  if (spec.kind == VariableKind::Continuous) return 0;
  return spec.candidates.size() == 2 ? 1 : 2;
}

void validate(const VariableSpec& spec) {
  if (spec.kind == VariableKind::Continuous) {
    if (!spec.candidates.empty())
      throw ConfigError("continuous dimension must not carry candidates");
    return;
  }
  if (spec.candidates.size() < 2)
    throw ConfigError("discrete dimension needs at least 2 candidates");
  for (std::size_t k = 0; k < spec.candidates.size(); ++k) {
    if (!std::isfinite(spec.candidates[k]))
      throw ConfigError("discrete candidate must be finite");
    if (k > 0 && !(spec.candidates[k - 1] < spec.candidates[k]))
      throw ConfigError("discrete candidates must be strictly ascending");
  }
}

}  // namespace

SearchSpace::SearchSpace(std::vector<VariableSpec> specs) {
  const int n = static_cast<int>(specs.size());
  if (n < 1) throw ConfigError("search space must have at least one dimension");
  for (const auto& spec : specs) validate(spec);

  // Canonical order: continuous | binary | wider discrete, stable within class.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return kind_class(specs[a]) < kind_class(specs[b]);
  });

  specs_.reserve(n);
  to_user_.resize(n);
  to_internal_.resize(n);
  for (int internal = 0; internal < n; ++internal) {
    const int user = order[internal];
    to_user_[internal] = user;
    to_internal_[user] = internal;
    specs_.push_back(std::move(specs[user]));
  }

  thresholds_.resize(n);
  for (int j = 0; j < n; ++j) {
    const auto& spec = specs_[j];
    switch (kind_class(spec)) {
      case 0: ++n_continuous_; break;
      case 1: ++n_binary_; break;
      default: ++n_integer_; break;
    }
    if (spec.kind == VariableKind::Discrete) {
      auto& th = thresholds_[j];
      th.reserve(spec.candidates.size() - 1);
      for (std::size_t k = 0; k + 1 < spec.candidates.size(); ++k)
        th.push_back(0.5 * (spec.candidates[k] + spec.candidates[k + 1]));
    }
  }
}

double SearchSpace::encode_component(int j, double value) const {
  if (!is_discrete(j)) return value;
  const auto& th = thresholds_[j];
  // Candidate index = number of thresholds strictly below the value, so a
  // value equal to a threshold takes the lower candidate.
  const auto it = std::lower_bound(th.begin(), th.end(), value);
  return specs_[j].candidates[static_cast<std::size_t>(it - th.begin())];
}

std::vector<double> SearchSpace::encode(std::span<const double> v) const {
  if (static_cast<int>(v.size()) != dim())
    throw DimensionError("encode: vector length does not match space dimension");
  std::vector<double> out(v.begin(), v.end());
  for (int j = 0; j < dim(); ++j) out[j] = encode_component(j, out[j]);
  return out;
}

double SearchSpace::nearest_threshold(int j, double m) const {
  if (!is_discrete(j)) throw DimensionError("nearest_threshold: dimension is continuous");
  const auto& th = thresholds_[j];
  const auto it = std::lower_bound(th.begin(), th.end(), m);
  if (it == th.begin()) return th.front();
  if (it == th.end()) return th.back();
  const double above = *it;
  const double below = *(it - 1);
  // Ties go to the smaller threshold.
  return (m - below <= above - m) ? below : above;
}

std::optional<std::pair<double, double>> SearchSpace::low_up_thresholds(int j, double m) const {
  if (!is_discrete(j)) throw DimensionError("low_up_thresholds: dimension is continuous");
  const auto& th = thresholds_[j];
  if (!(m > th.front() && m <= th.back())) return std::nullopt;
  // First threshold >= m; its predecessor is the largest threshold < m.
  const auto it = std::lower_bound(th.begin(), th.end(), m);
  return std::make_pair(*(it - 1), *it);
}

}  // namespace micma
