#include "gsb/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "gsb/asymptotics.hpp"
#include "gsb/detail/support_sum.hpp"
#include "gsb/errors.hpp"

namespace gsb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double safe_log(double x) { return x > 0.0 ? std::log(x) : -kInf; }

void check_data(const DiscreteDensity& g) {
  if (g.tail_bound() > kDefaultTailTolerance) {
    throw TruncationError("data density tail bound exceeds the truncation tolerance");
  }
  if (!(g.total() > 0.0)) throw InputError("data density has no mass");
}

std::size_t data_min_x(const DiscreteDensity& g) { return g.size() == 0 ? 0 : g.size() - 1; }

}  // namespace

// ---------------------------------------------------------------------------
// EmpiricalDensity

EmpiricalDensity::EmpiricalDensity(std::vector<std::size_t> counts) : counts_(std::move(counts)) {
  for (auto c : counts_) n_ += c;
  if (n_ == 0) throw InputError("empirical density needs at least one observation");
  while (!counts_.empty() && counts_.back() == 0) counts_.pop_back();
  r_.resize(counts_.size());
  for (std::size_t x = 0; x < counts_.size(); ++x) {
    r_[x] = static_cast<double>(counts_[x]) / static_cast<double>(n_);
  }
}

EmpiricalDensity EmpiricalDensity::from_sample(std::span<const long long> sample) {
  if (sample.empty()) throw InputError("empty sample");
  std::vector<std::size_t> counts;
  for (long long v : sample) {
    if (v < 0) throw InputError("negative value " + std::to_string(v) + " in sample");
    const auto x = static_cast<std::size_t>(v);
    if (x >= counts.size()) counts.resize(x + 1, 0);
    ++counts[x];
  }
  return EmpiricalDensity(std::move(counts));
}

EmpiricalDensity EmpiricalDensity::from_sample(std::span<const std::size_t> sample) {
  if (sample.empty()) throw InputError("empty sample");
  std::vector<std::size_t> counts;
  for (std::size_t x : sample) {
    if (x >= counts.size()) counts.resize(x + 1, 0);
    ++counts[x];
  }
  return EmpiricalDensity(std::move(counts));
}

EmpiricalDensity EmpiricalDensity::from_counts(std::span<const std::pair<long long, long long>> rows) {
  std::map<long long, long long> seen;
  for (const auto& [value, count] : rows) {
    if (value < 0) throw InputError("negative value " + std::to_string(value));
    if (count < 0) throw InputError("negative count for value " + std::to_string(value));
    if (!seen.emplace(value, count).second) throw InputError("duplicate value " + std::to_string(value));
  }
  std::vector<std::size_t> counts;
  for (const auto& [value, count] : seen) {
    const auto x = static_cast<std::size_t>(value);
    if (x >= counts.size()) counts.resize(x + 1, 0);
    counts[x] = static_cast<std::size_t>(count);
  }
  return EmpiricalDensity(std::move(counts));
}

double EmpiricalDensity::mean() const noexcept {
  double s = 0.0;
  for (std::size_t x = 0; x < counts_.size(); ++x) s += static_cast<double>(x) * static_cast<double>(counts_[x]);
  return s / static_cast<double>(n_);
}

double ResidualFunction::K(double delta) const { return (std::pow(delta + 1.0, A) - 1.0) / A; }
double ResidualFunction::K_prime(double delta) const { return std::pow(delta + 1.0, A - 1.0); }

// ---------------------------------------------------------------------------
// Objective and estimating function

double estimating_function(const TuningTriplet& t, const ModelFamily& family, double theta,
                           const DiscreteDensity& g_hat) {
  require_estimable(t);
  family.validate(theta);
  check_data(g_hat);
  const double A = t.A();
  const double B = t.B();
  const double c = t.AB_sum();
  const double beta = t.beta();
  const double exp_coef = A * A * beta * beta;

  double sum = 0.0;
  detail::for_each_support_point(family, theta, data_min_x(g_hat), {}, [&](std::size_t x) {
    const double lf = family.log_pmf(theta, x);
    const double lg = safe_log(g_hat[x]);
    const double u = family.score(theta, x);
    const double fA = std::exp(A * lf);
    // {exp_coef e^{b fA} f^A + c f^B}(f^A - g^A), each product formed in log space
    const double gA_fA = lg == -kInf ? 0.0 : std::exp(A * (lg + lf));
    const double gA_fB = lg == -kInf ? 0.0 : std::exp(A * lg + B * lf);
    double w = c * (std::exp(c * lf) - gA_fB);
    if (exp_coef != 0.0) w += exp_coef * std::exp(beta * fA) * (std::exp(2.0 * A * lf) - gA_fA);
    const double term = w * u;
    sum += term;
    return std::abs(term);
  });
  return sum;
}

double objective_gradient(const TuningTriplet& t, const ModelFamily& family, double theta,
                          const DiscreteDensity& g_hat) {
  return estimating_function(t, family, theta, g_hat) / t.A();
}

namespace {

// theta-free part of the summand at a data point with mass g > 0.
double theta_free_part(double g, const TuningTriplet& t, const GsbOptions& opts) {
  const double A = t.A();
  const double B = t.B();
  const double c = t.AB_sum();
  double v = 0.0;
  if (t.beta() != 0.0) v += std::expm1(t.beta() * std::pow(g, A));
  if (std::abs(c) < 1e-12) return v;
  const double gc = std::pow(g, c);
  if (std::abs(B) < opts.branch_threshold && opts.enable_limit_branches) {
    v += gc * std::log(g) - gc / c;
  } else if (std::abs(A) < opts.branch_threshold && opts.enable_limit_branches) {
    v += gc / c;
  } else {
    v += gc / B;
  }
  return v;
}

}  // namespace

double gsb_objective(const TuningTriplet& t, const ModelFamily& family, double theta, const DiscreteDensity& g_hat,
                     ObjectiveKind kind, const GsbOptions& opts) {
  require_estimable(t);
  family.validate(theta);
  check_data(g_hat);
  double sum = 0.0;
  detail::for_each_support_point(family, theta, data_min_x(g_hat), {}, [&](std::size_t x) {
    const double term = gsb_summand(g_hat[x], family.log_pmf(theta, x), t, opts);
    sum += term;
    return std::abs(term);
  });
  if (kind == ObjectiveKind::kReduced) {
    for (std::size_t x = 0; x < g_hat.size(); ++x) {
      if (g_hat[x] > 0.0) sum -= theta_free_part(g_hat[x], t, opts);
    }
  }
  return sum;
}

// ---------------------------------------------------------------------------
// Solver

namespace {

class Problem {
 public:
  Problem(const TuningTriplet& t, const ModelFamily& family, const DiscreteDensity& g, const EstimateOptions& opts)
      : t_(t), family_(family), g_(g), opts_(opts) {}

  // Far from the data the sums can overflow (f^B with B < 0 at a tiny f).
  // Such points are treated as +inf objective / NaN psi so the search backs off.
  double objective(double theta) {
    ++evals_;
    try {
      return gsb_objective(t_, family_, theta, g_, ObjectiveKind::kFull, opts_.gsb);
    } catch (const DomainError&) {
      return kInf;
    }
  }
  double psi(double theta) {
    ++evals_;
    try {
      return estimating_function(t_, family_, theta, g_);
    } catch (const DomainError&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  }
  std::size_t evals() const noexcept { return evals_; }

 private:
  const TuningTriplet& t_;
  const ModelFamily& family_;
  const DiscreteDensity& g_;
  const EstimateOptions& opts_;
  std::size_t evals_ = 0;
};

StartDiagnostics run_start(Problem& problem, double start, double lo, double hi, const EstimateOptions& opts) {
  StartDiagnostics d;
  d.start = start;
  const double span = hi - lo;
  const double edge = 1e-9 * span;

  // Walk downhill on the sign of psi until it flips or the box edge is hit.
  double a = start;
  double pa = problem.psi(a);
  double b = a;
  double pb = pa;
  if (pa != 0.0) {
    const double dir = pa > 0.0 ? -1.0 : 1.0;
    double h = std::max(0.02 * std::abs(start), 1e-4 * span);
    bool bracketed = false;
    for (int k = 0; k < 200; ++k) {
      double next = std::clamp(b + dir * h, lo, hi);
      const double pn = problem.psi(next);
      if (std::isnan(pn)) {
        h *= 0.5;
        continue;
      }
      if ((dir > 0.0 && pn >= 0.0) || (dir < 0.0 && pn <= 0.0)) {
        a = b;
        pa = pb;
        b = next;
        pb = pn;
        bracketed = true;
        break;
      }
      b = next;
      pb = pn;
      if (next == lo || next == hi) break;
      h *= 2.0;
    }
    if (!bracketed) {
      d.theta = b;
      d.hit_boundary = true;
      d.estimating_value = pb;
      d.objective = problem.objective(b);
      return d;
    }
    if (a > b) {
      std::swap(a, b);
      std::swap(pa, pb);
    }
  }

  double theta = a;
  if (a != b) {
    // Golden-section / parabolic minimisation inside the bracket.
    boost::uintmax_t max_it = 200;
    auto [xm, fm] = boost::math::tools::brent_find_minima([&](double th) { return problem.objective(th); }, a, b,
                                                          24, max_it);
    (void)fm;
    // Polish the root of the estimating function around the minimiser.
    double lo_r = a, hi_r = b, plo = pa, phi = pb;
    const double delta = 1e-5 * std::max(std::abs(xm), 1e-3);
    if (xm - delta > a && xm + delta < b) {
      const double p1 = problem.psi(xm - delta);
      const double p2 = problem.psi(xm + delta);
      if (p1 <= 0.0 && p2 >= 0.0) {
        lo_r = xm - delta;
        hi_r = xm + delta;
        plo = p1;
        phi = p2;
      }
    }
    if (plo == 0.0) {
      theta = lo_r;
    } else if (phi == 0.0) {
      theta = hi_r;
    } else {
      boost::uintmax_t root_it = 200;
      const double rel = std::min(opts.theta_tol, 1e-13);
      auto tol = [rel](double x, double y) { return std::abs(x - y) <= rel * std::max(std::abs(x), 1e-300); };
      auto [r1, r2] = boost::math::tools::toms748_solve([&](double th) { return problem.psi(th); }, lo_r, hi_r, plo,
                                                        phi, tol, root_it);
      theta = 0.5 * (r1 + r2);
    }
  }
  d.theta = theta;
  d.estimating_value = problem.psi(theta);
  d.objective = problem.objective(theta);
  d.hit_boundary = (theta - lo) <= edge || (hi - theta) <= edge;
  d.converged = !d.hit_boundary && std::abs(d.estimating_value) < opts.estimating_tol;
  return d;
}

}  // namespace

EstimationResult estimate(const TuningTriplet& t, const ModelFamily& family, const DiscreteDensity& g_hat,
                          const EstimateOptions& opts, std::optional<std::size_t> n) {
  require_estimable(t);
  check_data(g_hat);
  const double mean = g_hat.mean() / g_hat.total();
  const auto [lo, hi] = opts.box ? *opts.box : family.search_box(mean);
  if (!(lo < hi)) throw InputError("empty parameter search box");

  std::vector<double> starts{family.moment_start(mean)};
  const TuningTriplet l2(1.0, 0.0, 0.0);
  if (opts.use_l2_start && !(t == l2)) {
    EstimateOptions sub = opts;
    sub.use_l2_start = false;
    sub.compute_std_error = false;
    sub.extra_starts.clear();
    const auto l2_fit = estimate(l2, family, g_hat, sub);
    if (l2_fit.converged) starts.push_back(l2_fit.theta_hat);
  }
  starts.push_back(0.5 * (lo + hi));
  for (double s : opts.extra_starts) starts.push_back(s);

  Problem problem(t, family, g_hat, opts);
  EstimationResult result;
  result.triplet = t;
  std::vector<double> tried;
  for (double s : starts) {
    s = std::clamp(s, lo, hi);
    if (std::find(tried.begin(), tried.end(), s) != tried.end()) continue;
    tried.push_back(s);
    result.starts.push_back(run_start(problem, s, lo, hi, opts));
  }

  const StartDiagnostics* best = nullptr;
  auto better = [](const StartDiagnostics& x, const StartDiagnostics& y) {
    const double scale = std::max({1.0, std::abs(x.objective), std::abs(y.objective)});
    if (std::abs(x.objective - y.objective) <= 1e-12 * scale) return x.theta < y.theta;
    return x.objective < y.objective;
  };
  for (const auto& d : result.starts) {
    if (d.converged && (!best || better(d, *best))) best = &d;
  }
  result.converged = best != nullptr;
  if (!best) {
    for (const auto& d : result.starts) {
      if (!best || better(d, *best)) best = &d;
    }
    result.message = "no interior minimum found: every start ended on the search-box boundary or failed the "
                     "estimating-equation tolerance";
  }
  result.theta_hat = best->theta;
  result.objective_at_min = best->objective;
  result.estimating_value = best->estimating_value;
  result.iterations = problem.evals();

  if (result.converged && n && opts.compute_std_error) {
    try {
      const auto cov = model_JV(t, family, result.theta_hat);
      result.std_error = std_error(cov, *n)(0);
    } catch (const Error&) {
      result.std_error.reset();
    }
  }
  return result;
}

EstimationResult estimate(const TuningTriplet& t, const ModelFamily& family, const EmpiricalDensity& data,
                          const EstimateOptions& opts) {
  return estimate(t, family, data.density(), opts, data.n());
}

EstimationResult estimate(const TuningTriplet& t, const ModelFamily& family, std::span<const std::size_t> sample,
                          const EstimateOptions& opts) {
  return estimate(t, family, EmpiricalDensity::from_sample(sample), opts);
}

}  // namespace gsb
