#ifndef MICMA_SPACE_HPP
#define MICMA_SPACE_HPP

#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace micma {

enum class VariableKind { Continuous, Discrete };

struct VariableSpec {
  VariableKind kind = VariableKind::Continuous;
  std::vector<double> candidates;  // strictly ascending, size >= 2; Discrete only

  static VariableSpec continuous() { return {}; }
  static VariableSpec discrete(std::vector<double> candidates);
  static VariableSpec integer_range(long lo, long hi);
};

/// Mixed search space. Dimensions are held in canonical order
/// (continuous, then binary, then wider discrete); an index map translates
/// from the caller-supplied order.
///
/// Each discrete dimension carries its encoding thresholds, the midpoints of
/// adjacent candidate values. Encoding snaps a real coordinate to the
/// candidate whose threshold interval contains it, with values exactly on a
/// threshold mapping to the lower candidate.
class SearchSpace {
 public:
  explicit SearchSpace(std::vector<VariableSpec> specs);

  int dim() const { return static_cast<int>(specs_.size()); }
  int n_continuous() const { return n_continuous_; }
  int n_binary() const { return n_binary_; }
  int n_integer() const { return n_integer_; }

  VariableKind kind(int j) const { return specs_[j].kind; }
  bool is_discrete(int j) const { return specs_[j].kind == VariableKind::Discrete; }
  bool is_binary(int j) const { return is_discrete(j) && specs_[j].candidates.size() == 2; }
  const std::vector<double>& candidates(int j) const { return specs_[j].candidates; }

  /// Canonical index of the j-th caller-order dimension and back.
  int internal_index(int user_j) const { return to_internal_[user_j]; }
  int user_index(int internal_j) const { return to_user_[internal_j]; }

  /// Thresholds of dimension j (empty for continuous dims).
  const std::vector<double>& thresholds(int j) const { return thresholds_[j]; }
  /// All per-dimension threshold vectors, canonical order.
  const std::vector<std::vector<double>>& thresholds() const { return thresholds_; }

  std::vector<double> encode(std::span<const double> v) const;
  double encode_component(int j, double value) const;

  /// Threshold closest to m; exact midpoints break toward the smaller threshold.
  double nearest_threshold(int j, double m) const;

  /// Adjacent thresholds bracketing m as (max{l < m}, min{l >= m}).
  /// Empty when m is at or below the first threshold or above the last one
  /// (the edge-correction case), which for binary dims is always.
  std::optional<std::pair<double, double>> low_up_thresholds(int j, double m) const;

 private:
  std::vector<VariableSpec> specs_;           // canonical order
  std::vector<std::vector<double>> thresholds_;
  std::vector<int> to_internal_;
  std::vector<int> to_user_;
  int n_continuous_ = 0;
  int n_binary_ = 0;
  int n_integer_ = 0;
};

}  // namespace micma

#endif
