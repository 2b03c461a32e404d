#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "gsb/estimation.hpp"
#include "gsb/models.hpp"
#include "gsb/triplet.hpp"

namespace gsb {

/// Cross product of candidate alpha, lambda and beta values. Combinations
/// that cannot be estimated (A <= 0) are dropped and listed in `excluded`.
struct TuningGrid {
  std::vector<double> alphas;
  std::vector<double> lambdas;
  std::vector<double> betas;
  std::vector<TuningTriplet> triplets;
  std::vector<std::string> excluded;

  static TuningGrid make(std::vector<double> alphas, std::vector<double> lambdas, std::vector<double> betas);
  /// Explicit list of triplets (for example a single candidate).
  static TuningGrid from_triplets(const std::vector<TuningTriplet>& triplets);
  std::string resolution() const;
};

/// alpha {0.01, 0.1, ..., 1}, lambda {-1, -0.75, ..., 1}, beta {-8, -7, ..., 0}.
TuningGrid default_tuning_grid();

/// A finer grid around `incumbent`: half the local spacing in each
/// coordinate, clamped to the span of the original values.
TuningGrid refine_grid(const TuningGrid& grid, const TuningTriplet& incumbent);

enum class CriterionVariant { kHK, kWJ };
enum class VariancePlugIn { kModel, kGeneral };

struct TuningOptions {
  VariancePlugIn variance = VariancePlugIn::kModel;
  EstimateOptions estimate;
  std::size_t workers = 1;
  std::size_t max_iter = 50;
  double tol = 1e-8;
};

/// Per-triplet quantities that do not depend on the pilot.
struct GridPoint {
  TuningTriplet triplet;
  bool feasible = false;
  double theta_hat = 0.0;
  /// trace(sandwich) / n.
  double variance = 0.0;
  std::string reason;
};

std::vector<GridPoint> evaluate_grid(const TuningGrid& grid, const ModelFamily& family,
                                     const EmpiricalDensity& data, const TuningOptions& opts = {});

/// WJ: (theta_hat - pilot)^2 + variance; HK: variance.
double criterion_at(const GridPoint& point, double pilot, CriterionVariant variant);

/// Estimated MSE of triplet t on `data`. Throws when the estimate fails to
/// converge or the sandwich is unavailable.
double mse_criterion(const TuningTriplet& t, const ModelFamily& family, const EmpiricalDensity& data,
                     double pilot_theta, CriterionVariant variant, const TuningOptions& opts = {});

/// Index of the feasible point with the smallest criterion; ties go to
/// smaller alpha, then larger |beta|, then smaller lambda.
std::optional<std::size_t> argmin_point(const std::vector<GridPoint>& points, double pilot,
                                        CriterionVariant variant);

struct PilotStep {
  double pilot = 0.0;
  TuningTriplet triplet;
  double theta_hat = 0.0;
  double criterion = 0.0;
};

struct TuningSelection {
  std::string method;
  TuningTriplet triplet;
  double theta_hat = 0.0;
  double criterion_value = 0.0;
  std::vector<PilotStep> pilot_trace;
  bool converged = false;
  std::string grid_resolution;
  std::vector<std::string> infeasible;
  std::vector<std::string> warnings;
};

/// Minimum L2 estimate, the default pilot.
double l2_pilot(const ModelFamily& family, const EmpiricalDensity& data, const EstimateOptions& opts = {});

TuningSelection select_hk(const TuningGrid& grid, const ModelFamily& family, const EmpiricalDensity& data,
                          const TuningOptions& opts = {});
TuningSelection select_owj(const TuningGrid& grid, const ModelFamily& family, const EmpiricalDensity& data,
                           const TuningOptions& opts = {}, std::optional<double> pilot = std::nullopt);
/// Iterates the WJ selection, feeding each stage's estimate back as the next
/// pilot. Stops when the chosen triplet repeats, the pilot moves less than
/// opts.tol, or opts.max_iter stages have run. A 2-cycle stops with the
/// lower-criterion member and converged = false.
TuningSelection select_iwj(const TuningGrid& grid, const ModelFamily& family, const EmpiricalDensity& data,
                           const TuningOptions& opts = {}, std::optional<double> pilot = std::nullopt);

/// Same selectors over a precomputed evaluation.
TuningSelection select_from_points(const std::vector<GridPoint>& points, const std::string& method, double pilot,
                                   std::size_t max_iter, double tol);

}  // namespace gsb
