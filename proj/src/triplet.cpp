#include "gsb/triplet.hpp"

#include <cstdio>

#include "gsb/errors.hpp"

namespace gsb {

std::string TuningTriplet::to_string() const {
  char buf[96];
  std::snprintf(buf, sizeof buf, "(%g, %g, %g)", alpha_, lambda_, beta_);
  return buf;
}

std::string estimability_problem(const TuningTriplet& t) {
  char buf[160];
  if (!(t.alpha() >= -1.0)) {
    std::snprintf(buf, sizeof buf, "alpha = %g violates alpha >= -1", t.alpha());
    return buf;
  }
  if (!(t.A() > 0.0)) {
    std::snprintf(buf, sizeof buf,
                  "A = 1 + lambda(1 - alpha) = %g violates A > 0 (empirical objective undefined)",
                  t.A());
    return buf;
  }
  return {};
}

void require_estimable(const TuningTriplet& t) {
  if (auto why = estimability_problem(t); !why.empty()) {
    throw DomainError("triplet " + t.to_string() + ": " + why);
  }
}

}  // namespace gsb
