#include "gsb/density.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gsb/errors.hpp"
#include "gsb/models.hpp"

namespace gsb {

namespace {
constexpr std::size_t kMaxStoredPoints = 10'000'000;
}

DiscreteDensity::DiscreteDensity(std::vector<double> mass, double tail_bound)
    : mass_(std::move(mass)), tail_bound_(tail_bound) {
  for (std::size_t x = 0; x < mass_.size(); ++x) {
    if (!(mass_[x] >= 0.0) || !std::isfinite(mass_[x])) {
      throw DomainError("density mass at x = " + std::to_string(x) + " is not a finite nonnegative number");
    }
  }
  if (!(tail_bound_ >= 0.0)) throw DomainError("tail bound must be nonnegative");
}

DiscreteDensity DiscreteDensity::from_model(const ModelFamily& family, double theta, double tail_tol,
                                            std::size_t min_len) {
  family.validate(theta);
  std::vector<double> mass;
  for (std::size_t x = 0;; ++x) {
    mass.push_back(family.pmf(theta, x));
    if (x + 1 >= min_len) {
      const double tail = family.upper_tail(theta, x);
      if (tail < tail_tol) return DiscreteDensity(std::move(mass), tail);
    }
    if (x >= kMaxStoredPoints) {
      throw TruncationError(family.name() + " tail did not fall below tolerance within " +
                            std::to_string(kMaxStoredPoints) + " points");
    }
  }
}

DiscreteDensity DiscreteDensity::mixture(const DiscreteDensity& a, const DiscreteDensity& b, double eps) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw DomainError("mixture weight must lie in [0, 1]");
  std::vector<double> mass(std::max(a.size(), b.size()));
  for (std::size_t x = 0; x < mass.size(); ++x) mass[x] = (1.0 - eps) * a[x] + eps * b[x];
  return DiscreteDensity(std::move(mass), (1.0 - eps) * a.tail_bound() + eps * b.tail_bound());
}

DiscreteDensity DiscreteDensity::contaminated(std::size_t y, double eps) const {
  if (!(eps >= 0.0 && eps <= 1.0)) throw DomainError("contamination weight must lie in [0, 1]");
  std::vector<double> mass(std::max(mass_.size(), y + 1), 0.0);
  for (std::size_t x = 0; x < mass_.size(); ++x) mass[x] = (1.0 - eps) * mass_[x];
  mass[y] += eps;
  return DiscreteDensity(std::move(mass), (1.0 - eps) * tail_bound_);
}

double DiscreteDensity::total() const noexcept {
  double s = 0.0;
  for (double m : mass_) s += m;
  return s;
}

double DiscreteDensity::mean() const noexcept {
  double s = 0.0;
  for (std::size_t x = 0; x < mass_.size(); ++x) s += static_cast<double>(x) * mass_[x];
  return s;
}

std::size_t DiscreteDensity::max_support() const noexcept {
  for (std::size_t x = mass_.size(); x-- > 0;) {
    if (mass_[x] > 0.0) return x;
  }
  return 0;
}

}  // namespace gsb
