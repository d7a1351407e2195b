#ifndef MICMA_INT_MUTATION_HPP
#define MICMA_INT_MUTATION_HPP

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "micma/cmaes.hpp"
#include "micma/space.hpp"

namespace micma {

/// Diagonal of the granularity matrix: 1 on discrete dimensions, 0 elsewhere
/// in the default construction.
struct GranularityMatrix {
  std::vector<double> s;

  static GranularityMatrix for_space(const SearchSpace& space);
};

/// Integer mutation vectors for one generation plus the intermediates they
/// were built from.
struct MutationDraw {
  std::vector<int> J;       // randomly ordered indices with 2*sigma*sqrt(C_jj) < s_j
  int lambda_int = 0;
  std::vector<std::vector<long>> r_int;   // lambda x N
  std::vector<std::vector<long>> r_prime;
  std::vector<std::vector<long>> r_second;
};

/// Optional per-dimension clamp interval; violations are penalized, not rejected.
struct BoxBounds {
  std::vector<std::optional<std::pair<double, double>>> interval;

  bool empty() const { return interval.empty(); }
  static BoxBounds none() { return {}; }
  /// Bounds on discrete dims only: [-1,1] for binary, the candidate span for
  /// wider sets.
  static BoxBounds discrete_default(const SearchSpace& space);
};

/// Randomly ordered indices whose per-dimension standard deviation dropped
/// below half the granularity. Consumes no randomness when the set is empty.
std::vector<int> build_J(const CmaState& state, const GranularityMatrix& s, Rng& rng);

/// Number of candidates receiving an injected mutation.
int lambda_int_count(int j_size, int lambda, int dim);

/// Mutation vectors: cyclic one-hot plus geometric excess with per-element
/// sign flips for the first lambda_int candidates; the last candidate carries
/// the step toward the previous generation's best (zero when there is none).
MutationDraw sample_mutations(const CmaState& state, const CmaParams& params,
                              const GranularityMatrix& s, std::vector<int> J, int lambda_int,
                              const std::vector<double>* prev_best_x, Rng& rng);

/// x_i += S r_i; y stays untouched so the distribution update sees the
/// original Gaussian samples.
void inject(GenerationRecord& record, const GranularityMatrix& s, const MutationDraw& draw);

/// Mask for the step-size update: 0 where 5*sigma*sqrt(C_jj)/sqrt(c_sigma)
/// dropped below the granularity.
std::vector<std::uint8_t> sigma_mask(const CmaState& state, const CmaParams& params,
                                     const GranularityMatrix& s);

/// Step-size update restricted to unmasked dimensions; sigma is left unchanged
/// when every dimension is masked.
double masked_sigma_update(double sigma, const CmaParams& params,
                           std::span<const double> p_sigma_next,
                           const std::vector<std::uint8_t>& mask);

/// Clamp into the box and return (feasible point, squared distance / N).
std::pair<std::vector<double>, double> box_penalty(std::span<const double> x,
                                                   const BoxBounds& bounds);

/// CMA-ES with integer-mutation injection and masked step-size adaptation.
class ImOptimizer {
 public:
  ImOptimizer(SearchSpace space, CmaParams params, CmaState initial, BoxBounds bounds);

  /// Factorization of the current C, computed once per ask/tell cycle and also
  /// serving the harness termination checks.
  const FactoredCov& factored();

  /// Samples a generation, injects mutations, and reports the mutation draw.
  GenerationRecord ask(Rng& rng, MutationDraw* draw_out = nullptr);

  /// Evaluation points: clamped (if bounded), encoded candidates, and the
  /// additive penalties to apply to their objective values.
  std::vector<std::vector<double>> evaluation_points(const GenerationRecord& record,
                                                     std::vector<double>* penalties) const;

  void tell(GenerationRecord& record, std::span<const double> f_values);

  const CmaState& state() const { return state_; }
  const SearchSpace& space() const { return space_; }
  const CmaParams& params() const { return params_; }
  const GranularityMatrix& granularity() const { return s_; }

 private:
  SearchSpace space_;
  CmaParams params_;
  CmaState state_;
  BoxBounds bounds_;
  GranularityMatrix s_;
  std::vector<double> prev_best_x_;  // empty until the first tell
  std::optional<FactoredCov> factored_;
};

}  // namespace micma

#endif
