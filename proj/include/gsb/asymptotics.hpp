#pragma once

#include <cstddef>
#include <optional>

#include <Eigen/Dense>

#include "gsb/density.hpp"
#include "gsb/models.hpp"
#include "gsb/triplet.hpp"

namespace gsb {

inline constexpr double kMaxConditionNumber = 1e12;

/// J, V and the sandwich J^{-1} V J^{-1} of the minimum GSB estimator.
/// The sandwich is absent when cond(J) exceeds kMaxConditionNumber.
struct AsymptoticCovariance {
  Eigen::MatrixXd J;
  Eigen::MatrixXd V;
  std::optional<Eigen::MatrixXd> sandwich;
  Eigen::VectorXd zeta;
  double condition_number = 1.0;
};

/// J and V when the data come from the model itself (g = f_theta). V is
/// assembled from its three weighted sums minus zeta zeta'.
AsymptoticCovariance model_JV(const TuningTriplet& t, const ModelFamily& family, double theta);

/// J_g and V_g for a general data density g with best-fit parameter theta_g.
/// Expectations under g only visit points with g(x) > 0.
AsymptoticCovariance general_JV(const TuningTriplet& t, const ModelFamily& family, double theta_g,
                                const DiscreteDensity& g);

/// sqrt(diag(sandwich) / n). Throws SingularMatrixError when the sandwich is
/// absent and DomainError when it is not finite.
Eigen::VectorXd std_error(const AsymptoticCovariance& cov, std::size_t n);

/// Shared by the influence module: fills `cov.sandwich` from J and V.
void finish_sandwich(AsymptoticCovariance& cov);

}  // namespace gsb
