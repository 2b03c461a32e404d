#include "gsb/influence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gsb/asymptotics.hpp"
#include "gsb/detail/support_sum.hpp"
#include "gsb/errors.hpp"

namespace gsb {

namespace {

constexpr double kZeroTol = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::MatrixXd checked_inverse(const Eigen::MatrixXd& J, const char* label) {
  if (!J.allFinite()) throw DomainError(std::string(label) + " is not finite");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
  const auto& s = svd.singularValues();
  const double cond = s.minCoeff() > 0.0 ? s.maxCoeff() / s.minCoeff() : kInf;
  if (!(cond <= kMaxConditionNumber)) {
    throw SingularMatrixError(std::string(label) + " is singular (condition number " + std::to_string(cond) + ")",
                              cond);
  }
  return J.inverse();
}

// (A+B) f^alpha + A^2 b^2 e^{b f^A} f^{2A-1}: the per-point weight of u in N_F.
double model_weight(const TuningTriplet& t, double lf) {
  // Vanishing coefficients are skipped so that f^alpha or f^{2A-1} cannot
  // overflow into 0 * inf.
  double w = t.AB_sum() == 0.0 ? 0.0 : t.AB_sum() * std::exp(t.alpha() * lf);
  if (t.beta() != 0.0 && t.A() != 0.0) {
    const double fA = std::exp(t.A() * lf);
    w += t.A() * t.A() * t.beta() * t.beta() * std::exp(t.beta() * fA + (2.0 * t.A() - 1.0) * lf);
  }
  return w;
}

}  // namespace

std::string region_name(Region r) {
  switch (r) {
    case Region::kS1: return "S1";
    case Region::kS2: return "S2";
    case Region::kS3: return "S3";
    case Region::kS4: return "S4";
    case Region::kNone: return "none";
  }
  return "none";
}

ModelInfluence::ModelInfluence(const TuningTriplet& t, const ModelFamily& family, double theta)
    : t_(t), family_(&family), theta_(theta) {
  family.validate(theta);
  const auto p = static_cast<Eigen::Index>(family.param_dim());
  J_ = Eigen::MatrixXd::Zero(p, p);
  zeta_ = Eigen::VectorXd::Zero(p);
  detail::for_each_support_point(family, theta, 0, {}, [&](std::size_t x) {
    const double lf = family.log_pmf(theta, x);
    Eigen::VectorXd u(p);
    u(0) = family.score(theta, x);
    // weight times f: (A+B) f^{A+B} + A^2 b^2 e^{b f^A} f^{2A}
    const double w = model_weight(t, lf) * std::exp(lf);
    J_ += w * u * u.transpose();
    zeta_ += w * u;
    return std::abs(w) * (u.squaredNorm() + u.norm());
  });
  J_inv_ = checked_inverse(J_, "J_F");
}

InfluenceEvaluation ModelInfluence::operator()(std::size_t y) const {
  const auto p = static_cast<Eigen::Index>(family_->param_dim());
  Eigen::VectorXd u(p);
  u(0) = family_->score(theta_, y);
  InfluenceEvaluation out;
  out.y = y;
  out.at_model = true;
  out.numerator = model_weight(t_, family_->log_pmf(theta_, y)) * u - zeta_;
  out.denominator = J_;
  out.value = J_inv_ * out.numerator;
  return out;
}

InfluenceEvaluation influence_at_model(const TuningTriplet& t, const ModelFamily& family, double theta,
                                       std::size_t y) {
  return ModelInfluence(t, family, theta)(y);
}

std::vector<InfluenceEvaluation> influence_curve(const TuningTriplet& t, const ModelFamily& family, double theta,
                                                 std::size_t y_max) {
  const ModelInfluence inf(t, family, theta);
  std::vector<InfluenceEvaluation> out;
  out.reserve(y_max + 1);
  for (std::size_t y = 0; y <= y_max; ++y) out.push_back(inf(y));
  return out;
}

InfluenceEvaluation influence_general(const TuningTriplet& t, const ModelFamily& family, double theta_g,
                                      const DiscreteDensity& g, std::size_t y) {
  family.validate(theta_g);
  const double A = t.A();
  const double B = t.B();
  const double c = t.AB_sum();
  const double beta = t.beta();
  if (std::abs(A) < kZeroTol) throw DomainError("influence_general needs A != 0");
  if (!(g[y] > 0.0) && A < 1.0) {
    throw DomainError("g^(A-1)(y) is undefined: g(" + std::to_string(y) + ") = 0 and A < 1");
  }
  const auto p = static_cast<Eigen::Index>(family.param_dim());
  const double ab2 = A * A * beta * beta;

  // W g^A with W = A^2 b^2 e^{b f^A} f^A + (A+B) f^B, in log space.
  auto W_gA = [&](double lf, double fA, double lg) {
    double v = c == 0.0 ? 0.0 : c * std::exp(B * lf + A * lg);
    if (beta != 0.0) v += ab2 * std::exp(beta * fA + A * lf + A * lg);
    return v;
  };

  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd center = Eigen::VectorXd::Zero(p);
  const std::size_t min_x = std::max(g.size(), y + 1) - 1;
  detail::for_each_support_point(family, theta_g, min_x, {}, [&](std::size_t x) {
    const double gx = g[x];
    if (!(gx > 0.0) && A < 0.0) throw DomainError("g has a zero mass point and A < 0");
    const double lg = gx > 0.0 ? std::log(gx) : -kInf;
    const double lf = family.log_pmf(theta_g, x);
    const double fA = std::exp(A * lf);
    Eigen::VectorXd u(p);
    u(0) = family.score(theta_g, x);
    Eigen::MatrixXd i(p, p);
    i(0, 0) = family.curvature(theta_g, x);

    const double wg = gx > 0.0 ? W_gA(lf, fA, lg) : 0.0;
    // W (f^A - g^A)
    const double gA_fB = gx > 0.0 && c != 0.0 ? std::exp(B * lf + A * lg) : 0.0;
    double W_diff = c * (std::exp(c * lf) - gA_fB);
    double uu_w = (c / A) * (c * std::exp(c * lf) - B * gA_fB);
    if (beta != 0.0) {
      const double e2A = std::exp(beta * fA + 2.0 * A * lf);
      const double eAg = gx > 0.0 ? std::exp(beta * fA + A * lf + A * lg) : 0.0;
      const double e3A = std::exp(beta * fA + 3.0 * A * lf);
      const double e2Ag = gx > 0.0 ? std::exp(beta * fA + 2.0 * A * lf + A * lg) : 0.0;
      W_diff += ab2 * (e2A - eAg);
      uu_w += ab2 * (2.0 * e2A - eAg) + ab2 * beta * (e3A - e2Ag);
    }
    J += uu_w * u * u.transpose() - (W_diff / A) * i;
    center += wg * u;
    return (std::abs(uu_w) + std::abs(wg)) * u.squaredNorm() + std::abs(W_diff / A) * i.norm() +
           std::abs(wg) * u.norm();
  });

  Eigen::VectorXd uy(p);
  uy(0) = family.score(theta_g, y);
  const double lf_y = family.log_pmf(theta_g, y);
  const double fA_y = std::exp(A * lf_y);
  double Wy = c == 0.0 ? 0.0 : c * std::exp(B * lf_y);
  if (beta != 0.0) Wy += ab2 * std::exp(beta * fA_y + A * lf_y);
  // g^{A-1}(y); with A >= 1 and g(y) = 0 this is 0, or 1 when A == 1.
  const double gy = g[y];
  const double g_pow = gy > 0.0 ? std::exp((A - 1.0) * std::log(gy)) : (A == 1.0 ? 1.0 : 0.0);

  InfluenceEvaluation out;
  out.y = y;
  out.at_model = false;
  out.numerator = Wy * g_pow * uy - center;
  out.denominator = J;
  out.value = checked_inverse(J, "J_G") * out.numerator;
  return out;
}

BoundednessVerdict classify_boundedness(const TuningTriplet& t) {
  const double alpha = t.alpha();
  const bool beta_nonzero = std::abs(t.beta()) > kZeroTol;
  const bool A_zero = std::abs(t.A()) <= kZeroTol;
  BoundednessVerdict v;
  if (alpha > 0.0 && !beta_nonzero) {
    v.region = Region::kS1;
  } else if (alpha > 0.0 && beta_nonzero && A_zero) {
    v.region = Region::kS2;
  } else if (std::abs(alpha + 1.0) <= kZeroTol && beta_nonzero && t.lambda() > -0.25) {
    v.region = Region::kS3;
  } else if (alpha > 0.0 && beta_nonzero && t.lambda() * (1.0 - alpha) > -0.5 && !A_zero &&
             std::abs(t.AB_sum()) > kZeroTol) {
    v.region = Region::kS4;
  }
  v.bounded = v.region != Region::kNone;
  if (v.bounded) return v;

  if (std::abs(alpha + 1.0) <= kZeroTol) {
    v.witness = beta_nonzero ? "alpha = -1 with lambda <= -1/4: e^{beta f^A} f^{2A-1} u(y) does not vanish"
                             : "alpha = -1 and beta = 0: the estimating equation degenerates";
  } else if (alpha <= 0.0) {
    v.witness = "alpha <= 0: (A+B) f^alpha u(y) grows without bound as y increases";
  } else {
    v.witness = "2A - 1 <= 0 with beta != 0: e^{beta f^A} f^{2A-1} u(y) is not damped";
  }
  return v;
}

BoundednessScan boundedness_scan(const TuningTriplet& t, const ModelFamily& family, double theta,
                                 std::size_t y_max) {
  if (y_max < 50) throw InputError("boundedness_scan needs y_max >= 50");
  const ModelInfluence inf(t, family, theta);
  BoundednessScan scan;
  scan.abs_if.reserve(y_max + 1);
  scan.running_sup.reserve(y_max + 1);
  bool finite = true;
  double sup = 0.0;
  for (std::size_t y = 0; y <= y_max; ++y) {
    const double a = inf(y).value.norm();
    if (!std::isfinite(a)) finite = false;
    sup = std::isfinite(a) ? std::max(sup, a) : kInf;
    scan.abs_if.push_back(a);
    scan.running_sup.push_back(sup);
  }
  const std::size_t start = (y_max * 9) / 10;
  scan.last_decade_increase = scan.running_sup.back() - scan.running_sup[start];
  scan.stabilized =
      finite && std::isfinite(sup) && scan.last_decade_increase < 1e-6 * std::max(1.0, sup);
  return scan;
}

}  // namespace gsb
