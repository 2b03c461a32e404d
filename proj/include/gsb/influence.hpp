#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gsb/density.hpp"
#include "gsb/models.hpp"
#include "gsb/triplet.hpp"

namespace gsb {

/// IF(y) = J^{-1} N(y) for a point contamination at y.
struct InfluenceEvaluation {
  std::size_t y = 0;
  Eigen::VectorXd value;
  bool at_model = true;
  Eigen::VectorXd numerator;
  Eigen::MatrixXd denominator;
};

enum class Region { kS1, kS2, kS3, kS4, kNone };

std::string region_name(Region r);

struct BoundednessVerdict {
  bool bounded = false;
  Region region = Region::kNone;
  /// For unbounded triplets, which factor escapes control as y grows.
  std::string witness;
};

/// Influence function of the minimum GSB functional at F_theta. J and the
/// centering term are computed once, so evaluating a whole curve is cheap.
class ModelInfluence {
 public:
  /// Throws SingularMatrixError when J is singular or ill-conditioned.
  ModelInfluence(const TuningTriplet& t, const ModelFamily& family, double theta);

  InfluenceEvaluation operator()(std::size_t y) const;
  const Eigen::MatrixXd& J() const noexcept { return J_; }
  const Eigen::VectorXd& zeta() const noexcept { return zeta_; }

 private:
  TuningTriplet t_;
  const ModelFamily* family_;
  double theta_;
  Eigen::MatrixXd J_;
  Eigen::MatrixXd J_inv_;
  Eigen::VectorXd zeta_;
};

InfluenceEvaluation influence_at_model(const TuningTriplet& t, const ModelFamily& family, double theta,
                                       std::size_t y);

/// IF(y) for values y = 0..y_max, sharing one J.
std::vector<InfluenceEvaluation> influence_curve(const TuningTriplet& t, const ModelFamily& family, double theta,
                                                 std::size_t y_max);

/// Influence function at a general G with best-fit theta_g. Needs A != 0,
/// and g(y) > 0 unless A >= 1.
InfluenceEvaluation influence_general(const TuningTriplet& t, const ModelFamily& family, double theta_g,
                                      const DiscreteDensity& g, std::size_t y);

/// Algebraic region test, S1 through S4 in order.
BoundednessVerdict classify_boundedness(const TuningTriplet& t);

struct BoundednessScan {
  std::vector<double> abs_if;       // |IF(y)| for y = 0..y_max (first coordinate norm)
  std::vector<double> running_sup;
  bool stabilized = false;
  /// Running-sup increase over the last tenth of the range.
  double last_decade_increase = 0.0;
};

/// Empirical |IF(y)| profile; stabilized when every value is finite and the
/// running supremum grows by less than 1e-6 * max(1, sup) over the last 10%
/// of the range. Requires y_max >= 50.
BoundednessScan boundedness_scan(const TuningTriplet& t, const ModelFamily& family, double theta,
                                 std::size_t y_max);

}  // namespace gsb
