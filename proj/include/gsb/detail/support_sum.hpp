#pragma once

#include <cstddef>
#include <limits>
#include <string>

#include "gsb/errors.hpp"
#include "gsb/models.hpp"

namespace gsb::detail {

struct SupportPolicy {
  double tail_tol = 1e-12;
  /// A point is "quiet" once its term magnitude drops below this.
  double term_tol = 1e-16;
  std::size_t quiet_run = 3;
  std::size_t max_points = 2'000'000;
};

/// Calls visit(x) for x = 0, 1, ... and stops after `quiet_run` consecutive
/// quiet points past both `min_x` and the point where the model tail mass
/// falls below tail_tol. visit returns the magnitude of the term it added.
/// Returns the number of points visited.
template <typename Visit>
std::size_t for_each_support_point(const ModelFamily& family, double theta, std::size_t min_x,
                                   const SupportPolicy& policy, Visit&& visit) {
  bool tail_done = false;
  std::size_t quiet = 0;
  for (std::size_t x = 0;; ++x) {
    const double magnitude = visit(x);
    if (!(magnitude < std::numeric_limits<double>::infinity())) {
      throw DomainError("support sum for " + family.name() + " has a non-finite term at x = " +
                        std::to_string(x));
    }
    if (x >= min_x) {
      if (!tail_done) tail_done = family.upper_tail(theta, x) < policy.tail_tol;
      if (tail_done && magnitude < policy.term_tol) {
        if (++quiet >= policy.quiet_run) return x + 1;
      } else {
        quiet = 0;
      }
    }
    if (x + 1 >= policy.max_points) {
      throw TruncationError("support sum for " + family.name() + "(" + std::to_string(theta) +
                            ") did not settle within " + std::to_string(policy.max_points) + " points");
    }
  }
}

}  // namespace gsb::detail
