#include "gsb/tuning.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>
#include <tuple>

#include "gsb/asymptotics.hpp"
#include "gsb/errors.hpp"

namespace gsb {

namespace {

std::vector<double> sorted_unique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

std::string describe_values(const char* name, const std::vector<double>& v) {
  std::ostringstream os;
  os << name << ": " << v.size() << " values";
  if (!v.empty()) os << " [" << v.front() << ", " << v.back() << "]";
  return os.str();
}

// Local refinement in one coordinate: the incumbent, plus midpoints towards
// its neighbours in the original list.
std::vector<double> refine_axis(const std::vector<double>& values, double x) {
  std::vector<double> out{x};
  auto it = std::lower_bound(values.begin(), values.end(), x);
  if (it != values.begin()) {
    const double lo = *std::prev(it);
    out.push_back(lo);
    out.push_back(0.5 * (lo + x));
  }
  auto hi = std::upper_bound(values.begin(), values.end(), x);
  if (hi != values.end()) {
    out.push_back(*hi);
    out.push_back(0.5 * (x + *hi));
  }
  return sorted_unique(out);
}

struct Candidate {
  double crit;
  double alpha;
  double neg_abs_beta;
  double lambda;
  auto key() const { return std::tie(crit, alpha, neg_abs_beta, lambda); }
};

}  // namespace

TuningGrid TuningGrid::make(std::vector<double> alphas, std::vector<double> lambdas, std::vector<double> betas) {
  TuningGrid g;
  g.alphas = sorted_unique(std::move(alphas));
  g.lambdas = sorted_unique(std::move(lambdas));
  g.betas = sorted_unique(std::move(betas));
  if (g.alphas.empty() || g.lambdas.empty() || g.betas.empty()) {
    throw InputError("tuning grid needs at least one alpha, lambda and beta");
  }
  for (double a : g.alphas) {
    for (double l : g.lambdas) {
      for (double b : g.betas) {
        TuningTriplet t(a, l, b);
        const std::string problem = estimability_problem(t);
        if (problem.empty()) {
          g.triplets.push_back(t);
        } else {
          g.excluded.push_back(t.to_string() + ": " + problem);
        }
      }
    }
  }
  return g;
}

TuningGrid TuningGrid::from_triplets(const std::vector<TuningTriplet>& triplets) {
  TuningGrid g;
  for (const auto& t : triplets) {
    const std::string problem = estimability_problem(t);
    if (!problem.empty()) {
      g.excluded.push_back(t.to_string() + ": " + problem);
      continue;
    }
    g.triplets.push_back(t);
    g.alphas.push_back(t.alpha());
    g.lambdas.push_back(t.lambda());
    g.betas.push_back(t.beta());
  }
  g.alphas = sorted_unique(g.alphas);
  g.lambdas = sorted_unique(g.lambdas);
  g.betas = sorted_unique(g.betas);
  return g;
}

std::string TuningGrid::resolution() const {
  std::ostringstream os;
  os << describe_values("alpha", alphas) << "; " << describe_values("lambda", lambdas) << "; "
     << describe_values("beta", betas) << "; " << triplets.size() << " triplets, " << excluded.size()
     << " excluded";
  return os.str();
}

TuningGrid default_tuning_grid() {
  std::vector<double> alphas{0.01};
  for (int i = 1; i <= 10; ++i) alphas.push_back(i / 10.0);
  std::vector<double> lambdas;
  for (int i = -4; i <= 4; ++i) lambdas.push_back(i / 4.0);
  std::vector<double> betas;
  for (int i = -8; i <= 0; ++i) betas.push_back(i);
  return TuningGrid::make(alphas, lambdas, betas);
}

TuningGrid refine_grid(const TuningGrid& grid, const TuningTriplet& incumbent) {
  return TuningGrid::make(refine_axis(grid.alphas, incumbent.alpha()), refine_axis(grid.lambdas, incumbent.lambda()),
                          refine_axis(grid.betas, incumbent.beta()));
}

namespace {

GridPoint evaluate_point(const TuningTriplet& t, const ModelFamily& family, const EmpiricalDensity& data,
                         const TuningOptions& opts) {
  GridPoint p;
  p.triplet = t;
  try {
    EstimateOptions eo = opts.estimate;
    eo.compute_std_error = false;
    const auto res = estimate(t, family, data, eo);
    if (!res.converged) {
      p.reason = "estimate did not converge: " + res.message;
      return p;
    }
    p.theta_hat = res.theta_hat;
    const AsymptoticCovariance cov = opts.variance == VariancePlugIn::kModel
                                         ? model_JV(t, family, res.theta_hat)
                                         : general_JV(t, family, res.theta_hat, data.density());
    if (!cov.sandwich) {
      p.reason = "sandwich unavailable (condition number " + std::to_string(cov.condition_number) + ")";
      return p;
    }
    p.variance = cov.sandwich->trace() / static_cast<double>(data.n());
    if (!std::isfinite(p.variance)) {
      p.reason = "variance is not finite";
      return p;
    }
    p.feasible = true;
  } catch (const Error& e) {
    p.reason = e.what();
  }
  return p;
}

}  // namespace

std::vector<GridPoint> evaluate_grid(const TuningGrid& grid, const ModelFamily& family, const EmpiricalDensity& data,
                                     const TuningOptions& opts) {
  const std::size_t N = grid.triplets.size();
  std::vector<GridPoint> points(N);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < N; i = next++) points[i] = evaluate_point(grid.triplets[i], family, data, opts);
  };
  std::size_t workers = opts.workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : opts.workers;
  workers = std::max<std::size_t>(1, std::min(workers, N));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return points;
}

double criterion_at(const GridPoint& point, double pilot, CriterionVariant variant) {
  if (variant == CriterionVariant::kHK) return point.variance;
  const double bias = point.theta_hat - pilot;
  return bias * bias + point.variance;
}

double mse_criterion(const TuningTriplet& t, const ModelFamily& family, const EmpiricalDensity& data,
                     double pilot_theta, CriterionVariant variant, const TuningOptions& opts) {
  const GridPoint p = evaluate_point(t, family, data, opts);
  if (!p.feasible) throw ConvergenceError(t.to_string() + " is infeasible: " + p.reason);
  return criterion_at(p, pilot_theta, variant);
}

std::optional<std::size_t> argmin_point(const std::vector<GridPoint>& points, double pilot,
                                        CriterionVariant variant) {
  std::optional<std::size_t> best;
  Candidate best_c{};
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    if (!p.feasible) continue;
    const Candidate c{criterion_at(p, pilot, variant), p.triplet.alpha(), -std::abs(p.triplet.beta()),
                      p.triplet.lambda()};
    if (!best || c.key() < best_c.key()) {
      best = i;
      best_c = c;
    }
  }
  return best;
}

double l2_pilot(const ModelFamily& family, const EmpiricalDensity& data, const EstimateOptions& opts) {
  EstimateOptions eo = opts;
  eo.compute_std_error = false;
  const auto res = estimate(TuningTriplet(1.0, 0.0, 0.0), family, data, eo);
  if (!res.converged) throw ConvergenceError("L2 pilot did not converge: " + res.message);
  return res.theta_hat;
}

TuningSelection select_from_points(const std::vector<GridPoint>& points, const std::string& method, double pilot,
                                   std::size_t max_iter, double tol) {
  TuningSelection sel;
  sel.method = method;
  for (const auto& p : points) {
    if (!p.feasible) sel.infeasible.push_back(p.triplet.to_string() + ": " + p.reason);
  }
  const CriterionVariant variant = method == "hk" ? CriterionVariant::kHK : CriterionVariant::kWJ;
  auto fail = [&] {
    return ConvergenceError("all " + std::to_string(points.size()) + " grid points are infeasible");
  };

  if (method != "iwj") {
    const auto best = argmin_point(points, pilot, variant);
    if (!best) throw fail();
    const auto& p = points[*best];
    sel.triplet = p.triplet;
    sel.theta_hat = p.theta_hat;
    sel.criterion_value = criterion_at(p, pilot, variant);
    sel.pilot_trace.push_back({pilot, p.triplet, p.theta_hat, sel.criterion_value});
    sel.converged = true;
    return sel;
  }

  if (max_iter == 0) throw InputError("max_iter must be at least 1");
  std::vector<std::size_t> chosen;
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    const auto best = argmin_point(points, pilot, variant);
    if (!best) throw fail();
    const auto& p = points[*best];
    const double crit = criterion_at(p, pilot, variant);
    if (!chosen.empty()) {
      const double prev_at_new = criterion_at(points[chosen.back()], pilot, variant);
      if (crit > prev_at_new) {
        sel.warnings.push_back("stage " + std::to_string(iter + 1) + " minimum exceeds the previous triplet's criterion");
      }
    }
    sel.pilot_trace.push_back({pilot, p.triplet, p.theta_hat, crit});
    sel.triplet = p.triplet;
    sel.theta_hat = p.theta_hat;
    sel.criterion_value = crit;

    const bool repeated = !chosen.empty() && chosen.back() == *best;
    const bool two_cycle = chosen.size() >= 2 && chosen[chosen.size() - 2] == *best && chosen.back() != *best;
    chosen.push_back(*best);
    if (repeated || std::abs(p.theta_hat - pilot) < tol) {
      sel.converged = true;
      return sel;
    }
    if (two_cycle) {
      const auto& prev = sel.pilot_trace[sel.pilot_trace.size() - 2];
      if (prev.criterion < crit) {
        sel.triplet = prev.triplet;
        sel.theta_hat = prev.theta_hat;
        sel.criterion_value = prev.criterion;
      }
      sel.warnings.push_back("pilot iteration entered a 2-cycle; returning the lower-criterion member");
      sel.converged = false;
      return sel;
    }
    pilot = p.theta_hat;
  }
  sel.warnings.push_back("max_iter reached before the pilot settled");
  sel.converged = false;
  return sel;
}

namespace {

TuningSelection run_selector(const TuningGrid& grid, const ModelFamily& family, const EmpiricalDensity& data,
                             const TuningOptions& opts, const std::string& method, std::optional<double> pilot) {
  if (grid.triplets.empty()) {
    std::string msg = "tuning grid has no estimable triplets";
    for (const auto& e : grid.excluded) msg += "\n  excluded " + e;
    throw InputError(msg);
  }
  const double p0 = method == "hk" ? 0.0 : (pilot ? *pilot : l2_pilot(family, data, opts.estimate));
  const auto points = evaluate_grid(grid, family, data, opts);
  TuningSelection sel = select_from_points(points, method, p0, opts.max_iter, opts.tol);
  sel.grid_resolution = grid.resolution();
  for (const auto& e : grid.excluded) sel.infeasible.push_back(e);
  return sel;
}

}  // namespace

TuningSelection select_hk(const TuningGrid& grid, const ModelFamily& family, const EmpiricalDensity& data,
                          const TuningOptions& opts) {
  return run_selector(grid, family, data, opts, "hk", std::nullopt);
}

TuningSelection select_owj(const TuningGrid& grid, const ModelFamily& family, const EmpiricalDensity& data,
                           const TuningOptions& opts, std::optional<double> pilot) {
  return run_selector(grid, family, data, opts, "owj", pilot);
}

TuningSelection select_iwj(const TuningGrid& grid, const ModelFamily& family, const EmpiricalDensity& data,
                           const TuningOptions& opts, std::optional<double> pilot) {
  return run_selector(grid, family, data, opts, "iwj", pilot);
}

}  // namespace gsb
