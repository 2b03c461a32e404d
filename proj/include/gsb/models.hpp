#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace gsb {

using RngStream = std::mt19937_64;

/// Score and curvature (i = -du/dtheta) at one support point.
struct ScoreBundle {
  double u = 0.0;
  double i = 0.0;
};

/// A one-parameter discrete family on {0, 1, 2, ...}.
///
/// Built-ins are Poisson (theta > 0) and geometric with success probability
/// theta in (0, 1). Custom families supply a log-pmf plus optional score and
/// curvature; missing derivatives fall back to central finite differences,
/// which carry roughly 1e-7 (score) and 1e-4 (curvature) relative error.
class ModelFamily {
 public:
  using LogPmfFn = std::function<double(double theta, std::size_t x)>;
  using DerivFn = std::function<double(double theta, std::size_t x)>;

  struct CustomSpec {
    std::string name = "custom";
    double lower = 0.0;
    double upper = 1.0;
    LogPmfFn log_pmf;
    DerivFn score;      // optional
    DerivFn curvature;  // optional
    /// Moment-type starting value from the sample mean (optional).
    std::function<double(double mean)> moment_start;
  };

  static ModelFamily poisson();
  static ModelFamily geometric();
  static ModelFamily custom(CustomSpec spec);
  /// "poisson" or "geometric".
  static ModelFamily by_name(const std::string& name);

  const std::string& name() const noexcept { return name_; }
  std::size_t param_dim() const noexcept { return 1; }
  /// Open parameter interval.
  std::pair<double, double> domain() const noexcept { return {lower_, upper_}; }
  bool in_domain(double theta) const noexcept;
  /// Throws DomainError unless theta is inside the open domain by at least 1e-10.
  void validate(double theta) const;

  double log_pmf(double theta, std::size_t x) const;
  double pmf(double theta, std::size_t x) const;
  double score(double theta, std::size_t x) const;
  double curvature(double theta, std::size_t x) const;
  ScoreBundle score_bundle(double theta, std::size_t x) const;
  /// Upper bound on P(X > x); exact for the geometric family.
  double upper_tail(double theta, std::size_t x) const;

  /// Closed-box search interval used by the estimator given the data mean.
  std::pair<double, double> search_box(double data_mean) const;
  /// Starting value matched to the data mean, clamped into the search box.
  double moment_start(double data_mean) const;

  std::vector<std::size_t> sample(double theta, std::size_t n, RngStream& rng) const;
  std::size_t draw(double theta, RngStream& rng) const;

 private:
  enum class Kind { kPoisson, kGeometric, kCustom };
  ModelFamily() = default;

  Kind kind_ = Kind::kCustom;
  std::string name_;
  double lower_ = 0.0;
  double upper_ = 1.0;
  LogPmfFn custom_log_pmf_;
  DerivFn custom_score_;
  DerivFn custom_curvature_;
  std::function<double(double)> custom_moment_start_;
};

}  // namespace gsb
