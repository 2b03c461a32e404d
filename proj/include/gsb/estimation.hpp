#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gsb/density.hpp"
#include "gsb/divergence.hpp"
#include "gsb/models.hpp"
#include "gsb/triplet.hpp"

namespace gsb {

/// Relative frequencies r_n(x) = count(x) / n of an observed sample.
class EmpiricalDensity {
 public:
  /// Throws InputError on an empty sample or a negative value.
  static EmpiricalDensity from_sample(std::span<const long long> sample);
  static EmpiricalDensity from_sample(std::span<const std::size_t> sample);
  /// (value, count) rows; values must be unique and at least one count positive.
  static EmpiricalDensity from_counts(std::span<const std::pair<long long, long long>> rows);

  std::size_t n() const noexcept { return n_; }
  /// Dense counts indexed by value, up to the largest observed value.
  const std::vector<std::size_t>& counts() const noexcept { return counts_; }
  const std::vector<double>& r() const noexcept { return r_; }
  double mean() const noexcept;
  std::size_t max_value() const noexcept { return counts_.empty() ? 0 : counts_.size() - 1; }
  DiscreteDensity density() const { return DiscreteDensity(r_, 0.0); }

 private:
  explicit EmpiricalDensity(std::vector<std::size_t> counts);
  std::vector<std::size_t> counts_;
  std::vector<double> r_;
  std::size_t n_ = 0;
};

/// delta = g/f - 1 and K(delta) = ((delta + 1)^A - 1) / A with K'(delta) = (delta + 1)^{A-1}.
struct ResidualFunction {
  double A = 1.0;

  static double delta(double g, double f) { return g / f - 1.0; }
  double K(double delta) const;
  double K_prime(double delta) const;
};

enum class ObjectiveKind {
  kFull,     ///< D*(g_hat, f_theta) exactly
  kReduced,  ///< D* minus its theta-free part
};

/// Sum over the truncated support of
/// {A^2 beta^2 e^{beta f^A} f^A + (A + B) f^B} (f^A - g_hat^A) u_theta.
/// This equals A times d/dtheta of the full objective. Requires A > 0.
double estimating_function(const TuningTriplet& t, const ModelFamily& family, double theta,
                           const DiscreteDensity& g_hat);

/// d/dtheta of the full objective (estimating_function / A).
double objective_gradient(const TuningTriplet& t, const ModelFamily& family, double theta,
                          const DiscreteDensity& g_hat);

double gsb_objective(const TuningTriplet& t, const ModelFamily& family, double theta,
                     const DiscreteDensity& g_hat, ObjectiveKind kind = ObjectiveKind::kFull,
                     const GsbOptions& opts = {});

struct EstimateOptions {
  double theta_tol = 1e-10;
  double estimating_tol = 1e-8;
  bool use_l2_start = true;
  bool compute_std_error = true;
  std::vector<double> extra_starts;
  std::optional<std::pair<double, double>> box;
  GsbOptions gsb;
};

struct StartDiagnostics {
  double start = 0.0;
  double theta = 0.0;
  double objective = 0.0;
  double estimating_value = 0.0;
  bool converged = false;
  bool hit_boundary = false;
};

struct EstimationResult {
  double theta_hat = 0.0;
  double objective_at_min = 0.0;
  std::optional<double> std_error;
  std::size_t iterations = 0;
  bool converged = false;
  TuningTriplet triplet;
  double estimating_value = 0.0;
  std::string message;
  std::vector<StartDiagnostics> starts;
};

/// Minimum GSB divergence estimate: multi-start bracketing, Brent minimisation
/// of the full objective, then a root polish of the estimating function.
/// `n` enables the standard error (model-based sandwich at theta_hat).
EstimationResult estimate(const TuningTriplet& t, const ModelFamily& family, const DiscreteDensity& g_hat,
                          const EstimateOptions& opts = {}, std::optional<std::size_t> n = std::nullopt);
EstimationResult estimate(const TuningTriplet& t, const ModelFamily& family, const EmpiricalDensity& data,
                          const EstimateOptions& opts = {});
EstimationResult estimate(const TuningTriplet& t, const ModelFamily& family,
                          std::span<const std::size_t> sample, const EstimateOptions& opts = {});

}  // namespace gsb
