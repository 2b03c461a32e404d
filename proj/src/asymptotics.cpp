#include "gsb/asymptotics.hpp"

#include <cmath>
#include <limits>

#include "gsb/detail/support_sum.hpp"
#include "gsb/errors.hpp"

namespace gsb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd score_vector(const ModelFamily& family, double theta, std::size_t x) {
  Eigen::VectorXd u(family.param_dim());
  u(0) = family.score(theta, x);
  return u;
}

Eigen::MatrixXd curvature_matrix(const ModelFamily& family, double theta, std::size_t x) {
  Eigen::MatrixXd i(family.param_dim(), family.param_dim());
  i(0, 0) = family.curvature(theta, x);
  return i;
}

// A^2 beta^2 e^{beta f^A} f^{power}, zero when beta == 0 or A == 0 (where
// f^{power} may overflow in the far tail).
double exp_weight(const TuningTriplet& t, double fA, double lf, double power) {
  if (t.beta() == 0.0 || t.A() == 0.0) return 0.0;
  return t.A() * t.A() * t.beta() * t.beta() * std::exp(t.beta() * fA + power * lf);
}

}  // namespace

void finish_sandwich(AsymptoticCovariance& cov) {
  cov.sandwich.reset();
  if (!cov.J.allFinite()) {
    cov.condition_number = kInf;
    return;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(cov.J);
  const auto& s = svd.singularValues();
  const double smax = s.maxCoeff();
  const double smin = s.minCoeff();
  cov.condition_number = smin > 0.0 ? smax / smin : kInf;
  if (!(smin > 0.0) || !(cov.condition_number <= kMaxConditionNumber)) return;
  const Eigen::MatrixXd Jinv = cov.J.inverse();
  cov.sandwich = Jinv * cov.V * Jinv.transpose();
}

AsymptoticCovariance model_JV(const TuningTriplet& t, const ModelFamily& family, double theta) {
  family.validate(theta);
  const auto p = static_cast<Eigen::Index>(family.param_dim());
  const double A = t.A();
  const double alpha = t.alpha();
  const double c = t.AB_sum();
  const double beta = t.beta();

  AsymptoticCovariance cov;
  cov.J = Eigen::MatrixXd::Zero(p, p);
  cov.V = Eigen::MatrixXd::Zero(p, p);
  cov.zeta = Eigen::VectorXd::Zero(p);
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(p, p);

  detail::for_each_support_point(family, theta, 0, {}, [&](std::size_t x) {
    const double lf = family.log_pmf(theta, x);
    const double fA = std::exp(A * lf);
    const Eigen::VectorXd u = score_vector(family, theta, x);
    const Eigen::MatrixXd uu = u * u.transpose();
    // J and zeta share the weight (A+B) f^{A+B} + A^2 b^2 e^{b f^A} f^{2A}.
    const double w = c * std::exp(c * lf) + exp_weight(t, fA, lf, 2.0 * A);
    // The three V sums.
    double v = c == 0.0 ? 0.0 : c * c * std::exp((1.0 + 2.0 * alpha) * lf);
    if (beta != 0.0 && A != 0.0) {
      const double ab2 = A * A * beta * beta;
      v += ab2 * ab2 * std::exp(2.0 * beta * fA + (4.0 * A - 1.0) * lf);
      v += 2.0 * c * ab2 * std::exp(beta * fA + (2.0 * A + alpha) * lf);
    }
    cov.J += w * uu;
    cov.zeta += w * u;
    second += v * uu;
    return (std::abs(w) + std::abs(v)) * u.squaredNorm() + std::abs(w) * u.norm();
  });
  cov.V = second - cov.zeta * cov.zeta.transpose();
  finish_sandwich(cov);
  return cov;
}

AsymptoticCovariance general_JV(const TuningTriplet& t, const ModelFamily& family, double theta_g,
                                const DiscreteDensity& g) {
  family.validate(theta_g);
  const auto p = static_cast<Eigen::Index>(family.param_dim());
  const double A = t.A();
  const double B = t.B();
  const double alpha = t.alpha();
  const double c = t.AB_sum();
  const double beta = t.beta();
  if (A == 0.0) throw DomainError("general J_g needs A != 0 (K is undefined)");

  AsymptoticCovariance cov;
  cov.J = Eigen::MatrixXd::Zero(p, p);
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd first = Eigen::VectorXd::Zero(p);
  const std::size_t min_x = g.size() == 0 ? 0 : g.size() - 1;

  detail::for_each_support_point(family, theta_g, min_x, {}, [&](std::size_t x) {
    const double gx = g[x];
    if (!(gx > 0.0) && A <= 0.0) throw DomainError("g has a zero mass point and A <= 0");
    const double lg = gx > 0.0 ? std::log(gx) : -kInf;
    const double lf = family.log_pmf(theta_g, x);
    const double fA = std::exp(A * lf);
    const Eigen::VectorXd u = score_vector(family, theta_g, x);
    const Eigen::MatrixXd uu = u * u.transpose();
    const Eigen::MatrixXd i = curvature_matrix(family, theta_g, x);

    // H1 = (A+B) f^alpha + A^2 b^2 e^{b f^A} f^{2A-1}
    const double H1 = (c == 0.0 ? 0.0 : c * std::exp(alpha * lf)) + exp_weight(t, fA, lf, 2.0 * A - 1.0);
    // K(delta) f^{A+B} and K(delta) e^{b f^A} f^{2A}, with K = ((g/f)^A - 1)/A
    const double gA_fB = gx > 0.0 ? std::exp(A * lg + B * lf) : 0.0;
    const double K_fc = (gA_fB - std::exp(c * lf)) / A;
    double K_e_f2A = 0.0;
    if (beta != 0.0) {
      const double gA_fA = gx > 0.0 ? std::exp(beta * fA + A * (lg + lf)) : 0.0;
      K_e_f2A = (gA_fA - std::exp(beta * fA + 2.0 * A * lf)) / A;
    }
    const double ab2 = A * A * beta * beta;

    double magnitude = 0.0;
    if (gx > 0.0) {
      // E_g[u u' K'(delta) H1]: g K'(delta) = g^A f^{1-A}
      const double gKp = std::exp(A * lg + (1.0 - A) * lf);
      cov.J += gKp * H1 * uu;
      // influence summand m = u K'(delta) H1
      const double Kp = std::exp((A - 1.0) * (lg - lf));
      const Eigen::VectorXd m = Kp * H1 * u;
      first += gx * m;
      second += gx * m * m.transpose();
      magnitude += std::abs(gKp * H1) * u.squaredNorm() + gx * m.squaredNorm();
    }
    const double w_i = c * K_fc + ab2 * K_e_f2A;
    const double w_uu = c * c * K_fc + A * ab2 * (2.0 + beta * fA) * K_e_f2A;
    cov.J += w_i * i - w_uu * uu;
    magnitude += std::abs(w_i) * i.norm() + std::abs(w_uu) * u.squaredNorm();
    return magnitude;
  });
  cov.zeta = first;
  cov.V = second - first * first.transpose();
  finish_sandwich(cov);
  return cov;
}

Eigen::VectorXd std_error(const AsymptoticCovariance& cov, std::size_t n) {
  if (n == 0) throw InputError("sample size must be at least 1");
  if (!cov.sandwich) {
    throw SingularMatrixError("J is singular or ill-conditioned; no sandwich covariance", cov.condition_number);
  }
  if (!cov.sandwich->allFinite()) throw DomainError("sandwich covariance is not finite");
  Eigen::VectorXd se = (cov.sandwich->diagonal() / static_cast<double>(n)).cwiseMax(0.0).cwiseSqrt();
  return se;
}

}  // namespace gsb
