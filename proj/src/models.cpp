#include "gsb/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gsb/errors.hpp"

namespace gsb {

namespace {

constexpr double kDomainMargin = 1e-10;
constexpr double kBoxMargin = 1e-6;

double clamp_into(double v, std::pair<double, double> box) {
  if (!std::isfinite(v)) return 0.5 * (box.first + box.second);
  return std::clamp(v, box.first, box.second);
}

}  // namespace

ModelFamily ModelFamily::poisson() {
  ModelFamily m;
  m.kind_ = Kind::kPoisson;
  m.name_ = "poisson";
  m.lower_ = 0.0;
  m.upper_ = std::numeric_limits<double>::infinity();
  return m;
}

ModelFamily ModelFamily::geometric() {
  ModelFamily m;
  m.kind_ = Kind::kGeometric;
  m.name_ = "geometric";
  m.lower_ = 0.0;
  m.upper_ = 1.0;
  return m;
}

ModelFamily ModelFamily::custom(CustomSpec spec) {
  if (!spec.log_pmf) throw InputError("custom family requires a log-pmf callback");
  if (!(spec.lower < spec.upper)) throw InputError("custom family domain is empty");
  ModelFamily m;
  m.kind_ = Kind::kCustom;
  m.name_ = std::move(spec.name);
  m.lower_ = spec.lower;
  m.upper_ = spec.upper;
  m.custom_log_pmf_ = std::move(spec.log_pmf);
  m.custom_score_ = std::move(spec.score);
  m.custom_curvature_ = std::move(spec.curvature);
  m.custom_moment_start_ = std::move(spec.moment_start);
  return m;
}

ModelFamily ModelFamily::by_name(const std::string& name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "poisson") return poisson();
  if (lower == "geometric") return geometric();
  throw InputError("unknown model family '" + name + "' (expected poisson or geometric)");
}

bool ModelFamily::in_domain(double theta) const noexcept {
  return std::isfinite(theta) && theta > lower_ + kDomainMargin && theta < upper_ - kDomainMargin;
}

void ModelFamily::validate(double theta) const {
  if (!in_domain(theta)) {
    throw DomainError(name_ + " parameter " + std::to_string(theta) + " is outside the open domain (" +
                      std::to_string(lower_) + ", " + std::to_string(upper_) + ")");
  }
}

double ModelFamily::log_pmf(double theta, std::size_t x) const {
  const auto xd = static_cast<double>(x);
  switch (kind_) {
    case Kind::kPoisson:
      return xd * std::log(theta) - theta - std::lgamma(xd + 1.0);
    case Kind::kGeometric:
      return std::log(theta) + xd * std::log1p(-theta);
    case Kind::kCustom:
      break;
  }
  return custom_log_pmf_(theta, x);
}

double ModelFamily::pmf(double theta, std::size_t x) const { return std::exp(log_pmf(theta, x)); }

double ModelFamily::score(double theta, std::size_t x) const {
  const auto xd = static_cast<double>(x);
  switch (kind_) {
    case Kind::kPoisson:
      return xd / theta - 1.0;
    case Kind::kGeometric:
      return 1.0 / theta - xd / (1.0 - theta);
    case Kind::kCustom:
      break;
  }
  if (custom_score_) return custom_score_(theta, x);
  const double h = 1e-6 * std::max(1.0, std::abs(theta));
  return (custom_log_pmf_(theta + h, x) - custom_log_pmf_(theta - h, x)) / (2.0 * h);
}

double ModelFamily::curvature(double theta, std::size_t x) const {
  const auto xd = static_cast<double>(x);
  switch (kind_) {
    case Kind::kPoisson:
      return xd / (theta * theta);
    case Kind::kGeometric:
      return 1.0 / (theta * theta) + xd / ((1.0 - theta) * (1.0 - theta));
    case Kind::kCustom:
      break;
  }
  if (custom_curvature_) return custom_curvature_(theta, x);
  const double h = 1e-4 * std::max(1.0, std::abs(theta));
  return -(score(theta + h, x) - score(theta - h, x)) / (2.0 * h);
}

ScoreBundle ModelFamily::score_bundle(double theta, std::size_t x) const {
  return {score(theta, x), curvature(theta, x)};
}

double ModelFamily::upper_tail(double theta, std::size_t x) const {
  const auto xd = static_cast<double>(x);
  switch (kind_) {
    case Kind::kPoisson: {
      // Geometric-series bound on sum_{k > x} f(k) once the ratio theta/(k+1) < 1.
      if (xd + 2.0 <= theta) return 1.0;
      return std::min(1.0, pmf(theta, x + 1) * (xd + 2.0) / (xd + 2.0 - theta));
    }
    case Kind::kGeometric:
      return std::exp((xd + 1.0) * std::log1p(-theta));
    case Kind::kCustom:
      break;
  }
  double cdf = 0.0;
  for (std::size_t k = 0; k <= x; ++k) cdf += pmf(theta, k);
  return std::max(0.0, 1.0 - cdf);
}

std::pair<double, double> ModelFamily::search_box(double data_mean) const {
  switch (kind_) {
    case Kind::kPoisson:
      return {kBoxMargin, std::max(10.0 * data_mean, 50.0)};
    case Kind::kGeometric:
      return {kBoxMargin, 1.0 - kBoxMargin};
    case Kind::kCustom:
      break;
  }
  const double lo = lower_ + kBoxMargin * std::max(1.0, std::abs(lower_));
  const double hi = std::isfinite(upper_) ? upper_ - kBoxMargin * std::max(1.0, std::abs(upper_))
                                          : std::max(10.0 * std::abs(data_mean), 50.0);
  return {lo, hi};
}

double ModelFamily::moment_start(double data_mean) const {
  const auto box = search_box(data_mean);
  switch (kind_) {
    case Kind::kPoisson:
      return clamp_into(data_mean, box);
    case Kind::kGeometric:
      return clamp_into(1.0 / (1.0 + data_mean), box);
    case Kind::kCustom:
      break;
  }
  if (custom_moment_start_) return clamp_into(custom_moment_start_(data_mean), box);
  return 0.5 * (box.first + box.second);
}

std::size_t ModelFamily::draw(double theta, RngStream& rng) const {
  switch (kind_) {
    case Kind::kPoisson:
      return static_cast<std::size_t>(std::poisson_distribution<long long>(theta)(rng));
    case Kind::kGeometric:
      return static_cast<std::size_t>(std::geometric_distribution<long long>(theta)(rng));
    case Kind::kCustom:
      break;
  }
  // Inverse-cdf walk.
  const double v = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double cdf = 0.0;
  for (std::size_t x = 0;; ++x) {
    cdf += pmf(theta, x);
    if (v < cdf || upper_tail(theta, x) <= 0.0 || x > 100'000'000) return x;
  }
}

std::vector<std::size_t> ModelFamily::sample(double theta, std::size_t n, RngStream& rng) const {
  if (n == 0) throw InputError("sample size must be at least 1");
  validate(theta);
  std::vector<std::size_t> out(n);
  for (auto& v : out) v = draw(theta, rng);
  return out;
}

}  // namespace gsb
