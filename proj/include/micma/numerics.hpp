#ifndef MICMA_NUMERICS_HPP
#define MICMA_NUMERICS_HPP

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace micma {

/// Dense symmetric matrix. Entries are stored fully (row-major) and every
/// mutator writes both (i,j) and (j,i), so symmetry holds exactly at all times.
class SymMatrix {
 public:
  explicit SymMatrix(int dim);
  static SymMatrix identity(int dim);
  static SymMatrix from_diagonal(std::span<const double> diag);
  /// Builds from full row data; throws InvalidMatrix if the rows are not symmetric.
  static SymMatrix from_rows(const std::vector<std::vector<double>>& rows);

  int dim() const { return dim_; }
  double operator()(int i, int j) const { return entries_[static_cast<std::size_t>(i) * dim_ + j]; }
  void set(int i, int j, double value);
  void add(int i, int j, double value);

  double frobenius_norm() const;
  bool all_finite() const;

  /// y = M x
  std::vector<double> mul(std::span<const double> x) const;

 private:
  int dim_;
  std::vector<double> entries_;
};

/// Result of a symmetric eigendecomposition: M = V diag(values) V^T with
/// eigenvalues ascending and the k-th column of `vectors` the k-th eigenvector.
struct EigenDecomposition {
  int dim = 0;
  std::vector<double> values;
  std::vector<double> vectors;  // dim x dim, row-major; column k pairs with values[k]

  double vec(int row, int col) const { return vectors[static_cast<std::size_t>(row) * dim + col]; }
  double min_eigenvalue() const { return values.front(); }
  double max_eigenvalue() const { return values.back(); }
};

/// Cyclic Jacobi eigendecomposition for small dense symmetric matrices.
/// Converges when the off-diagonal Frobenius mass drops below 1e-14 * ||M||_F.
EigenDecomposition sym_eig(const SymMatrix& m);

/// V diag(f(lambda)) V^T for an elementwise spectral map f.
SymMatrix spectral_map(const EigenDecomposition& eig, double (*f)(double));

/// Symmetric square root. Eigenvalues below `eigen_floor` are raised to it;
/// anything still non-positive is clamped to 1e-30 before the square root so
/// round-off-induced tiny negatives cannot produce NaNs.
SymMatrix sqrt_sym(const SymMatrix& m, double eigen_floor = 0.0);
SymMatrix sqrt_from_eigen(const EigenDecomposition& eig, double eigen_floor = 0.0);
SymMatrix inv_sqrt_from_eigen(const EigenDecomposition& eig, double eigen_floor = 0.0);

/// Standard normal CDF, accurate to ~1e-15 absolute over the full double range.
double normal_cdf(double x);

/// Standard normal quantile. Rational initial guess refined by one Newton step
/// on normal_cdf; |Phi(result) - q| < 1e-12. Throws DomainError outside (0,1).
double normal_ppf(double q);

/// Percentage point of the chi-squared distribution with 1 degree of freedom,
/// i.e. the inverse of q = 2*Phi(sqrt(x)) - 1. Domain [0,1).
double chi2_ppf_1dof(double q);

/// E||N(0,I_n)|| approximated as sqrt(n) * (1 - 1/(4n) + 1/(21n^2)).
double expected_norm(int n);

/// xoshiro256++ with splitmix64 seeding. Same seed, same platform-independent
/// stream; normal variates are produced by quantile inversion so no libm
/// trigonometry enters the stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  /// Uniform on [0, 1).
  double next_double();
  /// Uniform on (0, 1) (both endpoints excluded).
  double next_open();
  double uniform(double lo, double hi);
  double normal();
  std::vector<double> normal_vector(int n);
  /// Number of failures before the first success; support {0, 1, 2, ...}.
  long geometric(double p);

 private:
  std::array<std::uint64_t, 4> state_;
};

std::vector<double> draw_standard_normal(Rng& rng, int n);
long draw_geometric(Rng& rng, double p);

}  // namespace micma

#endif
