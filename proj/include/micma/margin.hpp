#ifndef MICMA_MARGIN_HPP
#define MICMA_MARGIN_HPP

#include <optional>
#include <span>
#include <vector>

#include "micma/cmaes.hpp"
#include "micma/space.hpp"

namespace micma {

/// CMA-ES state extended with the diagonal affine transform applied to
/// evaluation samples and the margin parameter alpha.
///
/// The distribution update itself is untouched: discrete dimensions are kept
/// alive by correcting the mean, and the diagonal of A, after each update so
/// that the marginal probability of crossing the relevant encoding thresholds
/// never drops below alpha (alpha/2 per tail for interior integer dims).
struct MarginState {
  CmaState base;
  std::vector<double> affine;  // diagonal of A, 1 on continuous dims
  double alpha = 0.0;          // 0 disables the correction entirely
  /// Solve the interior A update without the sigma*sqrt(C_jj) factor. The two
  /// forms agree only when sigma^2 * C_jj == 1; the default keeps the update
  /// consistent with the coverage-interval definition.
  bool legacy_affine_update = false;

  MarginState(int dim, double alpha_value);
};

/// Recommended margin 1/(N*lambda).
double default_alpha(int dim, int lambda);

/// Tail and middle masses around the thresholds bracketing the mean, before
/// and after the lower-bound restriction.
struct MarginProbabilities {
  double p_low = 0.0, p_up = 0.0, p_mid = 0.0;
  double p_low_clipped = 0.0, p_up_clipped = 0.0;
  double p_low_final = 0.0, p_up_final = 0.0;
};

/// Clips both tails to alpha/2 and redistributes the excess so the three
/// masses still sum to one. Inputs must be non-negative and sum to one.
MarginProbabilities restrict_probabilities(double p_low, double p_up, double p_mid, double alpha);

/// Generation extended with the affine-transformed samples and their encodings;
/// ranking and evaluation use f(v_bar).
struct MarginRecord {
  GenerationRecord base;
  std::vector<std::vector<double>> v;
  std::vector<std::vector<double>> v_bar;
};

/// Half-width of the coverage interval of the j-th marginal,
/// sqrt(chi2_ppf(coverage) * sigma^2 * A_j^2 * C_jj).
double marginal_ci(const MarginState& state, int j, double coverage);

/// Pulls m_j back to within CI(1-2*alpha) of its nearest threshold; A_j stays.
void correct_toward_threshold(MarginState& state, const SearchSpace& space, int j);

/// Re-solves m_j and A_j so both tail masses outside the bracketing thresholds
/// equal their restricted values exactly. Requires m_j strictly inside the
/// threshold range of dimension j.
void correct_interior_integer(MarginState& state, const SearchSpace& space, int j);

class MarginOptimizer {
 public:
  MarginOptimizer(SearchSpace space, CmaParams params, MarginState initial);

  /// Factorization of the current C, computed once per ask/tell cycle.
  const FactoredCov& factored();

  MarginRecord ask(Rng& rng);

  /// Ranks by f(v_bar), runs the plain distribution update on (x, y), then
  /// applies the per-dimension margin corrections. alpha == 0 skips the
  /// correction step, reducing to plain CMA-ES.
  void tell(MarginRecord& record, std::span<const double> f_values);

  const MarginState& state() const { return state_; }
  const SearchSpace& space() const { return space_; }
  const CmaParams& params() const { return params_; }

 private:
  SearchSpace space_;
  CmaParams params_;
  MarginState state_;
  std::optional<FactoredCov> factored_;
};

/// The correction step alone (binary/edge dims toward the nearest threshold,
/// interior integer dims via the two-sided solve); exposed for direct checks.
void apply_margin_correction(MarginState& state, const SearchSpace& space);

}  // namespace micma

#endif
