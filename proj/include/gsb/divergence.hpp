#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gsb/density.hpp"
#include "gsb/triplet.hpp"

namespace gsb {

/// Strictly convex psi on the nonnegative reals together with its derivative.
struct ConvexGenerator {
  std::function<double(double)> psi;
  std::function<double(double)> grad_psi;
  std::string label;

  static ConvexGenerator square();
  static ConvexGenerator x_log_x();
  /// (x^{1+alpha} - x) / alpha, alpha != 0.
  static ConvexGenerator density_power(double alpha);
  /// -log(x) / (2 pi).
  static ConvexGenerator itakura_saito();
  /// 2 (e^{beta x} - beta x - 1) / beta^2, evaluated through expm1.
  static ConvexGenerator bregman_exponential(double beta);
  /// x^{1 + B/A} / B, the power generator behind the S-divergence (A, B != 0).
  static ConvexGenerator s_power(double A, double B);
};

struct ExtendedBregmanSpec {
  ConvexGenerator generator;
  double exponent_k = 1.0;
};

/// sum_x psi(g^k) - psi(f^k) - (g^k - f^k) psi'(f^k) over the stored range of
/// both densities. Throws DomainError when psi or psi' is not finite at a
/// required argument and TruncationError when either tail bound exceeds
/// tail_tol.
double extended_bregman(const DiscreteDensity& g, const DiscreteDensity& f,
                        const ExtendedBregmanSpec& spec,
                        double tail_tol = kDefaultTailTolerance);

struct GsbOptions {
  /// |A| or |B| below this switches to the analytic limit branch.
  double branch_threshold = 1e-6;
  bool enable_limit_branches = true;
  double tail_tol = kDefaultTailTolerance;
};

/// The GSB divergence D*(g, f) for the triplet t.
double gsb_divergence(const DiscreteDensity& g, const DiscreteDensity& f, const TuningTriplet& t,
                      const GsbOptions& opts = {});

/// Pointwise GSB summand. `g` is the data mass and `log_f` the log model mass
/// (-inf allowed for f == 0). Used by the estimation objective so that model
/// masses can be kept in log space.
double gsb_summand(double g, double log_f, const TuningTriplet& t, const GsbOptions& opts = {});

enum class NamedDivergence {
  kLikelihoodDisparity,
  kKullbackLeibler,
  kHellinger,
  kL2,
  kPower,
  kDensityPower,
  kBregmanExponential,
  kSHellinger,
  kS,
  kItakuraSaito,
};

/// Accepts LD, KLD, HD, L2, PD, DPD, BED, SHD, SD, IS (case-insensitive).
NamedDivergence parse_divergence_name(std::string_view name);
std::string_view divergence_name(NamedDivergence d);

/// Direct-formula evaluation of a named member. `params` holds lambda for PD,
/// alpha for DPD and SHD, beta for BED, and (alpha, lambda) for SD.
///
/// HD follows the 1/2 * sum (sqrt f - sqrt g)^2 convention, so
/// PD(-1/2) == 4 * HD. PD at lambda in {0, -1} and DPD at alpha = 0 route to
/// LD and KLD; BED at beta = 0 routes to L2.
double named_divergence(NamedDivergence name, const DiscreteDensity& g, const DiscreteDensity& f,
                        const std::vector<double>& params = {},
                        double tail_tol = kDefaultTailTolerance);

/// Describes why the parameters fall outside the family's published range
/// (they are still evaluated). Empty when in range.
std::optional<std::string> published_range_note(NamedDivergence name,
                                                const std::vector<double>& params);

}  // namespace gsb
