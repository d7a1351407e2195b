#ifndef MICMA_CMAES_HPP
#define MICMA_CMAES_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "micma/numerics.hpp"

namespace micma {

/// Default CMA-ES hyperparameters: weighted recombination with negative
/// weights, cumulative step-size adaptation, rank-one and rank-mu covariance
/// updates.
struct CmaParams {
  int dim = 0;
  int lambda = 0;
  int mu = 0;
  std::vector<double> weights;  // size lambda; positive for i < mu, scaled non-positive after
  double mu_w = 0.0;
  double mu_w_neg = 0.0;
  double c_m = 1.0;
  double c_sigma = 0.0;
  double c_c = 0.0;
  double c_1 = 0.0;
  double c_mu = 0.0;
  double d_sigma = 1.0;

  static CmaParams defaults(int dim, std::optional<int> lambda_override = std::nullopt);
};

struct CmaState {
  std::vector<double> mean;
  double sigma = 1.0;
  SymMatrix cov;
  std::vector<double> p_sigma;
  std::vector<double> p_c;
  long iteration = 0;

  explicit CmaState(int dim)
      : mean(dim, 0.0), cov(SymMatrix::identity(dim)), p_sigma(dim, 0.0), p_c(dim, 0.0) {}
  int dim() const { return static_cast<int>(mean.size()); }
};

/// Per-iteration factorization of C shared by sampling, the path update and
/// the termination checks. Eigenvalues are kept pre-clamp.
struct FactoredCov {
  EigenDecomposition eig;
  SymMatrix sqrt_cov;
  SymMatrix inv_sqrt_cov;

  double min_eigenvalue() const { return eig.min_eigenvalue(); }
  double condition_number() const;
};

FactoredCov factor_covariance(const SymMatrix& cov);

/// One generation of samples. `ranking` holds candidate indices in f-ascending
/// order; `h_sigma` and the adjusted rank-mu weights are filled in by update().
struct GenerationRecord {
  std::vector<std::vector<double>> xi;  // lambda standard-normal draws
  std::vector<std::vector<double>> y;   // C^{1/2} xi
  std::vector<std::vector<double>> x;   // m + sigma * y (possibly mutated afterwards)
  std::vector<int> ranking;
  int h_sigma = 0;
  std::vector<double> w_circ;
};

GenerationRecord sample_generation(const CmaState& state, const CmaParams& params,
                                   const FactoredCov& factored, Rng& rng);
GenerationRecord sample_generation(const CmaState& state, const CmaParams& params, Rng& rng);

/// Stable ascending ranking of candidates by objective value.
/// Throws EvaluationError on NaN.
std::vector<int> rank(std::span<const double> f_values);

struct UpdateOptions {
  /// Per-dimension inclusion mask for the step-size path norm. Null means all
  /// dimensions; with a mask, the expected-norm baseline uses the number of
  /// unmasked dimensions and sigma stays unchanged if everything is masked.
  const std::vector<std::uint8_t>* sigma_mask = nullptr;
};

/// Advances mean, both evolution paths, covariance and step-size, in that
/// order, from a ranked generation. `factored` must factor the pre-update C.
void update(CmaState& state, const CmaParams& params, GenerationRecord& record,
            const FactoredCov& factored, const UpdateOptions& options = {});
void update(CmaState& state, const CmaParams& params, GenerationRecord& record);

/// Step-size update from the new path, optionally restricted to unmasked
/// dimensions. Shared by the plain and the masked variants.
double csa_step_size(double sigma, const CmaParams& params, std::span<const double> p_sigma_next,
                     const std::vector<std::uint8_t>* mask = nullptr);

}  // namespace micma

#endif
