#include "micma/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>

#include "micma/errors.hpp"

namespace micma {

// ---------------------------------------------------------------------------
// SymMatrix

SymMatrix::SymMatrix(int dim) : dim_(dim) {
  if (dim < 1) throw InvalidMatrix("SymMatrix: dim must be >= 1");
  entries_.assign(static_cast<std::size_t>(dim) * dim, 0.0);
}

SymMatrix SymMatrix::identity(int dim) {
  SymMatrix m(dim);
  for (int i = 0; i < dim; ++i) m.set(i, i, 1.0);
  return m;
}

SymMatrix SymMatrix::from_diagonal(std::span<const double> diag) {
  SymMatrix m(static_cast<int>(diag.size()));
  for (int i = 0; i < m.dim_; ++i) m.set(i, i, diag[i]);
  return m;
}

SymMatrix SymMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const int n = static_cast<int>(rows.size());
  SymMatrix m(n);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(rows[i].size()) != n) throw InvalidMatrix("from_rows: not square");
    for (int j = 0; j < n; ++j) {
      if (rows[i][j] != rows[j][i]) throw InvalidMatrix("from_rows: not symmetric");
      m.entries_[static_cast<std::size_t>(i) * n + j] = rows[i][j];
    }
  }
  return m;
}

void SymMatrix::set(int i, int j, double value) {
  entries_[static_cast<std::size_t>(i) * dim_ + j] = value;
  entries_[static_cast<std::size_t>(j) * dim_ + i] = value;
}

void SymMatrix::add(int i, int j, double value) {
  set(i, j, (*this)(i, j) + value);
}

double SymMatrix::frobenius_norm() const {
  double sum = 0.0;
  for (double e : entries_) sum += e * e;
  return std::sqrt(sum);
}

bool SymMatrix::all_finite() const {
  return std::all_of(entries_.begin(), entries_.end(), [](double e) { return std::isfinite(e); });
}

std::vector<double> SymMatrix::mul(std::span<const double> x) const {
  std::vector<double> y(dim_, 0.0);
  for (int i = 0; i < dim_; ++i) {
    double sum = 0.0;
    const double* row = entries_.data() + static_cast<std::size_t>(i) * dim_;
    for (int j = 0; j < dim_; ++j) sum += row[j] * x[j];
    y[i] = sum;
  }
  return y;
}

// ---------------------------------------------------------------------------
// Jacobi eigendecomposition

namespace {

double off_diagonal_mass(const std::vector<double>& a, int n) {
  double sum = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double v = a[static_cast<std::size_t>(i) * n + j];
      sum += 2.0 * v * v;
    }
  return std::sqrt(sum);
}

}  // namespace

EigenDecomposition sym_eig(const SymMatrix& m) {
  if (!m.all_finite()) throw InvalidMatrix("sym_eig: non-finite entry");
  const int n = m.dim();

  std::vector<double> a(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a[static_cast<std::size_t>(i) * n + j] = m(i, j);
  std::vector<double> v(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i) * n + i] = 1.0;

  const double tol = 1e-14 * m.frobenius_norm();
  constexpr int kMaxSweeps = 60;
  bool converged = false;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    if (off_diagonal_mass(a, n) <= tol) {
      converged = true;
      break;
    }
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a[static_cast<std::size_t>(p) * n + q];
        if (apq == 0.0) continue;
        const double app = a[static_cast<std::size_t>(p) * n + p];
        const double aqq = a[static_cast<std::size_t>(q) * n + q];
        const double theta = (aqq - app) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e153) {
          t = 1.0 / (2.0 * theta);  // avoids overflow in theta^2
        } else {
          t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
          if (theta < 0.0) t = -t;
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        a[static_cast<std::size_t>(p) * n + p] = app - t * apq;
        a[static_cast<std::size_t>(q) * n + q] = aqq + t * apq;
        a[static_cast<std::size_t>(p) * n + q] = 0.0;
        a[static_cast<std::size_t>(q) * n + p] = 0.0;
        for (int k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = a[static_cast<std::size_t>(k) * n + p];
          const double akq = a[static_cast<std::size_t>(k) * n + q];
          const double np = c * akp - s * akq;
          const double nq = s * akp + c * akq;
          a[static_cast<std::size_t>(k) * n + p] = np;
          a[static_cast<std::size_t>(p) * n + k] = np;
          a[static_cast<std::size_t>(k) * n + q] = nq;
          a[static_cast<std::size_t>(q) * n + k] = nq;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v[static_cast<std::size_t>(k) * n + p];
          const double vkq = v[static_cast<std::size_t>(k) * n + q];
          v[static_cast<std::size_t>(k) * n + p] = c * vkp - s * vkq;
          v[static_cast<std::size_t>(k) * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }
  if (!converged && off_diagonal_mass(a, n) > tol)
    throw NumericalFailure("sym_eig: Jacobi sweeps did not converge");

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int x, int y) {
    return a[static_cast<std::size_t>(x) * n + x] < a[static_cast<std::size_t>(y) * n + y];
  });

  EigenDecomposition eig;
  eig.dim = n;
  eig.values.resize(n);
  eig.vectors.resize(static_cast<std::size_t>(n) * n);
  for (int k = 0; k < n; ++k) {
    eig.values[k] = a[static_cast<std::size_t>(order[k]) * n + order[k]];
    for (int row = 0; row < n; ++row)
      eig.vectors[static_cast<std::size_t>(row) * n + k] = v[static_cast<std::size_t>(row) * n + order[k]];
  }
  return eig;
}

SymMatrix spectral_map(const EigenDecomposition& eig, double (*f)(double)) {
  const int n = eig.dim;
  std::vector<double> fl(n);
  for (int k = 0; k < n; ++k) fl[k] = f(eig.values[k]);
  SymMatrix out(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      double sum = 0.0;
      for (int k = 0; k < n; ++k) sum += eig.vec(i, k) * fl[k] * eig.vec(j, k);
      out.set(i, j, sum);
    }
  }
  return out;
}

namespace {

// Round-off guard: keeps floored eigenvalues strictly positive without masking
// real degeneracy (termination checks read the pre-clamp spectrum).
double clamp_eigenvalue(double lambda, double eigen_floor) {
  const double floored = std::max(lambda, eigen_floor);
  return floored > 0.0 ? floored : 1e-30;
}

SymMatrix map_clamped(const EigenDecomposition& eig, double eigen_floor, bool inverse) {
  const int n = eig.dim;
  std::vector<double> fl(n);
  for (int k = 0; k < n; ++k) {
    const double root = std::sqrt(clamp_eigenvalue(eig.values[k], eigen_floor));
    fl[k] = inverse ? 1.0 / root : root;
  }
  SymMatrix out(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double sum = 0.0;
      for (int k = 0; k < n; ++k) sum += eig.vec(i, k) * fl[k] * eig.vec(j, k);
      out.set(i, j, sum);
    }
  return out;
}

}  // namespace

SymMatrix sqrt_from_eigen(const EigenDecomposition& eig, double eigen_floor) {
  return map_clamped(eig, eigen_floor, false);
}

SymMatrix inv_sqrt_from_eigen(const EigenDecomposition& eig, double eigen_floor) {
  return map_clamped(eig, eigen_floor, true);
}

SymMatrix sqrt_sym(const SymMatrix& m, double eigen_floor) {
  return sqrt_from_eigen(sym_eig(m), eigen_floor);
}

// ---------------------------------------------------------------------------
// Distribution functions

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / 1.4142135623730951);
}

namespace {

double normal_pdf(double x) {
  return 0.3989422804014327 * std::exp(-0.5 * x * x);
}

// Rational approximation of the normal quantile (relative error ~1.15e-9),
// good enough as a Newton starting point.
double ppf_initial_guess(double q) {
  static constexpr double A[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                  -2.759285104469687e+02, 1.383577518672690e+02,
                                  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double B[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                  -1.556989798598866e+02, 6.680131188771972e+01,
                                  -1.328068155288572e+01};
  static constexpr double C[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                  -2.400758277161838e+00, -2.549732539343734e+00,
                                  4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double D[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                  2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double kLow = 0.02425;
  if (q < kLow) {
    const double r = std::sqrt(-2.0 * std::log(q));
    return (((((C[0] * r + C[1]) * r + C[2]) * r + C[3]) * r + C[4]) * r + C[5]) /
           ((((D[0] * r + D[1]) * r + D[2]) * r + D[3]) * r + 1.0);
  }
  if (q > 1.0 - kLow) {
    const double r = std::sqrt(-2.0 * std::log(1.0 - q));
    return -(((((C[0] * r + C[1]) * r + C[2]) * r + C[3]) * r + C[4]) * r + C[5]) /
           ((((D[0] * r + D[1]) * r + D[2]) * r + D[3]) * r + 1.0);
  }
  const double r = q - 0.5;
  const double s = r * r;
  return (((((A[0] * s + A[1]) * s + A[2]) * s + A[3]) * s + A[4]) * s + A[5]) * r /
         (((((B[0] * s + B[1]) * s + B[2]) * s + B[3]) * s + B[4]) * s + 1.0);
}

}  // namespace

double normal_ppf(double q) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("normal_ppf: q must be in (0,1)");
  double x = ppf_initial_guess(q);
  const double pdf = normal_pdf(x);
  if (pdf > 0.0) x -= (normal_cdf(x) - q) / pdf;
  return x;
}

double chi2_ppf_1dof(double q) {
  if (!(q >= 0.0 && q < 1.0)) throw DomainError("chi2_ppf_1dof: q must be in [0,1)");
  if (q == 0.0) return 0.0;
  const double z = normal_ppf(0.5 * (1.0 + q));
  return z * z;
}

double expected_norm(int n) {
  if (n < 1) throw DomainError("expected_norm: n must be >= 1");
  const double dn = static_cast<double>(n);
  return std::sqrt(dn) * (1.0 - 1.0 / (4.0 * dn) + 1.0 / (21.0 * dn * dn));
}

// ---------------------------------------------------------------------------
// Rng: xoshiro256++ (public-domain reference constants) seeded via splitmix64

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

Rng::Rng(std::uint64_t seed) {
  std::uint64_t s = seed;
  for (auto& word : state_) word = splitmix64(s);
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double Rng::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::next_open() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  return lo + (hi - lo) * next_double();
}

double Rng::normal() {
  return normal_ppf(next_open());
}

std::vector<double> Rng::normal_vector(int n) {
  if (n < 1) throw DomainError("normal_vector: n must be >= 1");
  std::vector<double> out(n);
  for (double& value : out) value = normal();
  return out;
}

long Rng::geometric(double p) {
  if (!(p > 0.0 && p <= 1.0)) throw DomainError("geometric: p must be in (0,1]");
  if (p == 1.0) return 0;
  const double u = next_double();
  return static_cast<long>(std::floor(std::log1p(-u) / std::log1p(-p)));
}

std::vector<double> draw_standard_normal(Rng& rng, int n) {
  return rng.normal_vector(n);
}

long draw_geometric(Rng& rng, double p) {
  return rng.geometric(p);
}

}  // namespace micma
