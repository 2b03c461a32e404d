#pragma once

#include <string>

namespace gsb {

/// Tuning parameters (alpha, lambda, beta) of the GSB family.
///
/// The exponents A = 1 + lambda(1 - alpha) and B = alpha - lambda(1 - alpha)
/// are derived on construction and cannot be set independently, so
/// A + B == 1 + alpha always holds up to round-off.
class TuningTriplet {
 public:
  TuningTriplet() : TuningTriplet(0.0, 0.0, 0.0) {}
  TuningTriplet(double alpha, double lambda, double beta)
      : alpha_(alpha),
        lambda_(lambda),
        beta_(beta),
        A_(1.0 + lambda * (1.0 - alpha)),
        B_(alpha - lambda * (1.0 - alpha)) {}

  double alpha() const noexcept { return alpha_; }
  double lambda() const noexcept { return lambda_; }
  double beta() const noexcept { return beta_; }
  double A() const noexcept { return A_; }
  double B() const noexcept { return B_; }
  /// A + B, computed as 1 + alpha.
  double AB_sum() const noexcept { return 1.0 + alpha_; }

  std::string to_string() const;

  friend bool operator==(const TuningTriplet& a, const TuningTriplet& b) {
    return a.alpha_ == b.alpha_ && a.lambda_ == b.lambda_ && a.beta_ == b.beta_;
  }

 private:
  double alpha_;
  double lambda_;
  double beta_;
  double A_;
  double B_;
};

/// Throws DomainError naming the violated constraint unless the triplet can
/// be used for estimation (alpha >= -1 and A > 0).
void require_estimable(const TuningTriplet& t);

/// Empty string when estimable, otherwise a description of the violation.
std::string estimability_problem(const TuningTriplet& t);

}  // namespace gsb
