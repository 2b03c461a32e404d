#include "gsb/divergence.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "gsb/errors.hpp"

namespace gsb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kExactZero = 1e-12;

// x^e with the conventions 0^e = 0 for e > 0 and 0^0 = 1, evaluated from log x.
double pow_from_log(double log_x, double e) {
  if (log_x == -kInf) {
    if (e > 0.0) return 0.0;
    if (e == 0.0) return 1.0;
    return kInf;
  }
  return std::exp(e * log_x);
}

double safe_log(double x) { return x > 0.0 ? std::log(x) : -kInf; }

void check_tails(const DiscreteDensity& g, const DiscreteDensity& f, double tail_tol) {
  if (g.tail_bound() > tail_tol || f.tail_bound() > tail_tol) {
    throw TruncationError("density tail bound " + std::to_string(std::max(g.tail_bound(), f.tail_bound())) +
                          " exceeds truncation tolerance " + std::to_string(tail_tol));
  }
}

double finite_or_throw(double v, std::size_t x, const char* what) {
  if (!std::isfinite(v)) {
    throw DomainError(std::string(what) + " is not finite at x = " + std::to_string(x));
  }
  return v;
}

template <typename Term>
double sum_support(const DiscreteDensity& g, const DiscreteDensity& f, const char* what, Term term) {
  const std::size_t n = std::max(g.size(), f.size());
  double sum = 0.0;
  double comp = 0.0;  // Neumaier compensation
  for (std::size_t x = 0; x < n; ++x) {
    const double v = finite_or_throw(term(g[x], f[x]), x, what);
    const double t = sum + v;
    comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  return sum + comp;
}

}  // namespace

// ---------------------------------------------------------------------------
// Generators

ConvexGenerator ConvexGenerator::square() {
  return {[](double x) { return x * x; }, [](double x) { return 2.0 * x; }, "x^2"};
}

ConvexGenerator ConvexGenerator::x_log_x() {
  return {[](double x) { return x > 0.0 ? x * std::log(x) : 0.0; },
          [](double x) { return std::log(x) + 1.0; }, "x log x"};
}

ConvexGenerator ConvexGenerator::density_power(double alpha) {
  if (alpha == 0.0) throw DomainError("density power generator needs alpha != 0");
  return {[alpha](double x) { return (std::pow(x, 1.0 + alpha) - x) / alpha; },
          [alpha](double x) { return ((1.0 + alpha) * std::pow(x, alpha) - 1.0) / alpha; },
          "(x^(1+a) - x)/a"};
}

ConvexGenerator ConvexGenerator::itakura_saito() {
  return {[](double x) { return -std::log(x) / (2.0 * std::numbers::pi); },
          [](double x) { return -1.0 / (2.0 * std::numbers::pi * x); }, "-log(x)/(2 pi)"};
}

ConvexGenerator ConvexGenerator::bregman_exponential(double beta) {
  if (beta == 0.0) throw DomainError("exponential generator needs beta != 0");
  return {[beta](double x) { return 2.0 * (std::expm1(beta * x) - beta * x) / (beta * beta); },
          [beta](double x) { return 2.0 * std::expm1(beta * x) / beta; }, "2(e^(bx) - bx - 1)/b^2"};
}

ConvexGenerator ConvexGenerator::s_power(double A, double B) {
  if (A == 0.0 || B == 0.0) throw DomainError("power generator needs A != 0 and B != 0");
  const double e = 1.0 + B / A;
  return {[e, B](double x) { return std::pow(x, e) / B; },
          [e, B](double x) { return e * std::pow(x, e - 1.0) / B; }, "x^(1+B/A)/B"};
}

double extended_bregman(const DiscreteDensity& g, const DiscreteDensity& f, const ExtendedBregmanSpec& spec,
                        double tail_tol) {
  if (!(spec.exponent_k > 0.0)) throw DomainError("extended Bregman exponent k must be positive");
  check_tails(g, f, tail_tol);
  const auto& psi = spec.generator.psi;
  const auto& dpsi = spec.generator.grad_psi;
  const double k = spec.exponent_k;
  return sum_support(g, f, "extended Bregman summand", [&](double gx, double fx) {
    if (gx == fx) return 0.0;
    const double gk = std::pow(gx, k);
    const double fk = std::pow(fx, k);
    return psi(gk) - psi(fk) - (gk - fk) * dpsi(fk);
  });
}

// ---------------------------------------------------------------------------
// GSB

double gsb_summand(double g, double log_f, const TuningTriplet& t, const GsbOptions& opts) {
  const double A = t.A();
  const double B = t.B();
  const double c = t.AB_sum();
  const double beta = t.beta();
  const bool g_zero = !(g > 0.0);
  const bool f_zero = log_f == -kInf;

  if (g_zero && f_zero) {
    if (A > 0.0) return 0.0;
    throw DomainError("g^A undefined at a zero mass point for A <= 0");
  }
  if (g_zero && A <= 0.0) throw DomainError("g has a zero mass point and A <= 0");

  const double log_g = safe_log(g);
  const double gA = pow_from_log(log_g, A);
  const double fA = pow_from_log(log_f, A);

  double exp_part = 0.0;
  if (beta != 0.0) {
    // e^{b fA}(b fA - b gA - 1) + e^{b gA} = e^{b fA}(expm1(d) - d), d = b(gA - fA)
    const double d = beta * (gA - fA);
    exp_part = std::exp(beta * fA) * (std::expm1(d) - d);
  }

  double s_part = 0.0;
  const bool near_B = std::abs(B) < opts.branch_threshold;
  const bool near_A = std::abs(A) < opts.branch_threshold;
  if (std::abs(c) < kExactZero) {
    s_part = 0.0;  // alpha = -1: the power part vanishes identically
  } else if ((near_B || near_A) && !opts.enable_limit_branches && (B == 0.0 || A == 0.0)) {
    throw DomainError("GSB power part is singular at A = 0 or B = 0 with limit branches disabled");
  } else if (near_B && opts.enable_limit_branches) {
    const double fc = pow_from_log(log_f, c);
    if (g_zero) {
      s_part = fc / c;
    } else {
      const double gc = pow_from_log(log_g, c);
      s_part = gc * (log_g - log_f) - (gc - fc) / c;
    }
  } else if (near_A && opts.enable_limit_branches) {
    if (g_zero || f_zero) throw DomainError("A ~ 0 branch needs strictly positive g and f");
    const double gc = pow_from_log(log_g, c);
    const double fc = pow_from_log(log_f, c);
    s_part = (gc - fc) / c - fc * (log_g - log_f);
  } else {
    const double gc = pow_from_log(log_g, c);
    const double fc = pow_from_log(log_f, c);
    // (g^A - f^A) f^B = g^A f^B - f^{A+B}
    const double gA_fB = g_zero ? 0.0 : std::exp(A * log_g + B * log_f);
    s_part = (gc - fc) / B - (gA_fB - fc) * c / (A * B);
  }
  const double v = exp_part + s_part;
  if (!std::isfinite(v)) throw DomainError("GSB summand is not finite");
  return v;
}

double gsb_divergence(const DiscreteDensity& g, const DiscreteDensity& f, const TuningTriplet& t,
                      const GsbOptions& opts) {
  check_tails(g, f, opts.tail_tol);
  return sum_support(g, f, "GSB summand",
                     [&](double gx, double fx) { return gsb_summand(gx, safe_log(fx), t, opts); });
}

// ---------------------------------------------------------------------------
// Named catalogue

NamedDivergence parse_divergence_name(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::toupper(ch); });
  if (s == "LD") return NamedDivergence::kLikelihoodDisparity;
  if (s == "KLD") return NamedDivergence::kKullbackLeibler;
  if (s == "HD") return NamedDivergence::kHellinger;
  if (s == "L2") return NamedDivergence::kL2;
  if (s == "PD") return NamedDivergence::kPower;
  if (s == "DPD") return NamedDivergence::kDensityPower;
  if (s == "BED") return NamedDivergence::kBregmanExponential;
  if (s == "SHD") return NamedDivergence::kSHellinger;
  if (s == "SD") return NamedDivergence::kS;
  if (s == "IS" || s == "ITAKURASAITO" || s == "ITAKURA-SAITO") return NamedDivergence::kItakuraSaito;
  throw InputError("unknown divergence '" + std::string(name) + "'");
}

std::string_view divergence_name(NamedDivergence d) {
  switch (d) {
    case NamedDivergence::kLikelihoodDisparity: return "LD";
    case NamedDivergence::kKullbackLeibler: return "KLD";
    case NamedDivergence::kHellinger: return "HD";
    case NamedDivergence::kL2: return "L2";
    case NamedDivergence::kPower: return "PD";
    case NamedDivergence::kDensityPower: return "DPD";
    case NamedDivergence::kBregmanExponential: return "BED";
    case NamedDivergence::kSHellinger: return "SHD";
    case NamedDivergence::kS: return "SD";
    case NamedDivergence::kItakuraSaito: return "IS";
  }
  return "?";
}

namespace {

std::size_t expected_params(NamedDivergence d) {
  switch (d) {
    case NamedDivergence::kPower:
    case NamedDivergence::kDensityPower:
    case NamedDivergence::kBregmanExponential:
    case NamedDivergence::kSHellinger:
      return 1;
    case NamedDivergence::kS:
      return 2;
    default:
      return 0;
  }
}

double ld(const DiscreteDensity& g, const DiscreteDensity& f) {
  return sum_support(g, f, "LD summand", [](double gx, double fx) {
    return gx > 0.0 ? gx * (std::log(gx) - safe_log(fx)) : 0.0;
  });
}

double kld(const DiscreteDensity& g, const DiscreteDensity& f) {
  return sum_support(g, f, "KLD summand", [](double gx, double fx) {
    return fx > 0.0 ? fx * (std::log(fx) - safe_log(gx)) : 0.0;
  });
}

double l2(const DiscreteDensity& g, const DiscreteDensity& f) {
  return sum_support(g, f, "L2 summand", [](double gx, double fx) { return (gx - fx) * (gx - fx); });
}

}  // namespace

double named_divergence(NamedDivergence name, const DiscreteDensity& g, const DiscreteDensity& f,
                        const std::vector<double>& params, double tail_tol) {
  if (params.size() != expected_params(name)) {
    throw InputError(std::string(divergence_name(name)) + " expects " +
                     std::to_string(expected_params(name)) + " parameter(s), got " +
                     std::to_string(params.size()));
  }
  for (double p : params) {
    if (!std::isfinite(p)) throw DomainError("divergence parameter must be finite");
  }
  check_tails(g, f, tail_tol);

  switch (name) {
    case NamedDivergence::kLikelihoodDisparity:
      return ld(g, f);
    case NamedDivergence::kKullbackLeibler:
      return kld(g, f);
    case NamedDivergence::kHellinger:
      return 0.5 * sum_support(g, f, "HD summand", [](double gx, double fx) {
               const double d = std::sqrt(fx) - std::sqrt(gx);
               return d * d;
             });
    case NamedDivergence::kL2:
      return l2(g, f);
    case NamedDivergence::kPower: {
      const double lam = params[0];
      if (std::abs(lam) < kExactZero) return ld(g, f);
      if (std::abs(lam + 1.0) < kExactZero) return kld(g, f);
      // Disparity form sum f C(delta).
      return sum_support(g, f, "PD summand", [lam](double gx, double fx) {
        if (gx == 0.0 && fx == 0.0) return 0.0;
        const double ratio_term = gx == 0.0 ? (lam + 1.0 > 0.0 ? 0.0 : kInf)
                                            : std::exp((lam + 1.0) * std::log(gx) - lam * safe_log(fx));
        return (ratio_term - gx) / (lam * (lam + 1.0)) - (gx - fx) / (lam + 1.0);
      });
    }
    case NamedDivergence::kDensityPower: {
      const double a = params[0];
      if (std::abs(a) < kExactZero) return ld(g, f);
      return sum_support(g, f, "DPD summand", [a](double gx, double fx) {
        return std::pow(fx, 1.0 + a) - (1.0 + 1.0 / a) * gx * std::pow(fx, a) + std::pow(gx, 1.0 + a) / a;
      });
    }
    case NamedDivergence::kBregmanExponential: {
      const double b = params[0];
      if (std::abs(b) < kExactZero) return l2(g, f);
      // e^{bf}(f - 1/b) - e^{bf} g + e^{bg}/b = e^{bf}(expm1(d) - d) / b with d = b(g - f),
      // which avoids the 1/b^2 cancellation for small beta.
      return 2.0 / (b * b) * sum_support(g, f, "BED summand", [b](double gx, double fx) {
               const double d = b * (gx - fx);
               return std::exp(b * fx) * (std::expm1(d) - d);
             });
    }
    case NamedDivergence::kSHellinger: {
      const double a = params[0];
      const double k = 0.5 * (1.0 + a);
      return 2.0 / (1.0 + a) * sum_support(g, f, "SHD summand", [k](double gx, double fx) {
               const double d = std::pow(gx, k) - std::pow(fx, k);
               return d * d;
             });
    }
    case NamedDivergence::kS: {
      const double a = params[0];
      const double lam = params[1];
      const double A = 1.0 + lam * (1.0 - a);
      const double B = a - lam * (1.0 - a);
      const double c = 1.0 + a;
      if (std::abs(B) < kExactZero) {
        return sum_support(g, f, "SD summand", [c](double gx, double fx) {
          const double gc = std::pow(gx, c);
          const double fc = std::pow(fx, c);
          return (gx > 0.0 ? gc * (std::log(gx) - safe_log(fx)) : 0.0) - (gc - fc) / c;
        });
      }
      if (std::abs(A) < kExactZero) {
        return sum_support(g, f, "SD summand", [c](double gx, double fx) {
          if (gx == 0.0 && fx == 0.0) return 0.0;
          const double gc = std::pow(gx, c);
          const double fc = std::pow(fx, c);
          return (gc - fc) / c - (fx > 0.0 ? fc * (std::log(gx) - std::log(fx)) : 0.0);
        });
      }
      return sum_support(g, f, "SD summand", [A, B, c](double gx, double fx) {
        if (gx == 0.0 && fx == 0.0) return 0.0;
        return (std::pow(gx, c) - std::pow(fx, c)) / B -
               (std::pow(gx, A) - std::pow(fx, A)) * c / (A * B) * std::pow(fx, B);
      });
    }
    case NamedDivergence::kItakuraSaito:
      return 1.0 / (2.0 * std::numbers::pi) * sum_support(g, f, "IS summand", [](double gx, double fx) {
               if (gx == fx) return 0.0;
               const double r = gx / fx;
               return r - std::log(r) - 1.0;
             });
  }
  throw InputError("unhandled divergence");
}

std::optional<std::string> published_range_note(NamedDivergence name, const std::vector<double>& params) {
  if (params.size() != expected_params(name)) return std::nullopt;
  switch (name) {
    case NamedDivergence::kDensityPower:
      if (params[0] < 0.0) return "DPD is published for alpha >= 0";
      break;
    case NamedDivergence::kSHellinger:
      if (!(params[0] > 0.0 && params[0] < 1.0)) return "SHD is published for alpha in (0, 1)";
      break;
    case NamedDivergence::kS:
      if (params[0] < 0.0) return "S-divergence is published for alpha >= 0";
      break;
    default:
      break;
  }
  return std::nullopt;
}

}  // namespace gsb
