#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gsb {

class ModelFamily;

inline constexpr double kDefaultTailTolerance = 1e-12;

/// A probability mass function on {0, 1, 2, ...} stored densely up to some
/// truncation point. Mass beyond the stored range is treated as zero and is
/// bounded above by `tail_bound`.
class DiscreteDensity {
 public:
  DiscreteDensity() = default;
  explicit DiscreteDensity(std::vector<double> mass, double tail_bound = 0.0);

  /// Model pmf truncated at the first x >= min_len - 1 where the upper tail
  /// drops below tail_tol.
  static DiscreteDensity from_model(const ModelFamily& family, double theta,
                                    double tail_tol = kDefaultTailTolerance,
                                    std::size_t min_len = 0);

  /// (1 - eps) * a + eps * b on the union of the two stored ranges.
  static DiscreteDensity mixture(const DiscreteDensity& a, const DiscreteDensity& b,
                                 double eps);

  /// (1 - eps) * this + eps * point mass at y.
  DiscreteDensity contaminated(std::size_t y, double eps) const;

  double operator[](std::size_t x) const noexcept { return x < mass_.size() ? mass_[x] : 0.0; }
  std::size_t size() const noexcept { return mass_.size(); }
  std::span<const double> mass() const noexcept { return mass_; }
  double tail_bound() const noexcept { return tail_bound_; }
  double total() const noexcept;
  double mean() const noexcept;
  /// Largest x with positive mass, or 0 for an all-zero density.
  std::size_t max_support() const noexcept;

 private:
  std::vector<double> mass_;
  double tail_bound_ = 0.0;
};

}  // namespace gsb
