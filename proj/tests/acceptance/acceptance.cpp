// Acceptance suite: one PASS/FAIL line per criterion; nonzero exit if any fail.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gsb/asymptotics.hpp"
#include "gsb/density.hpp"
#include "gsb/divergence.hpp"
#include "gsb/errors.hpp"
#include "gsb/estimation.hpp"
#include "gsb/influence.hpp"
#include "gsb/models.hpp"
#include "gsb/simulation.hpp"
#include "gsb/tuning.hpp"
#include "oracle_values.hpp"
#include "test_support.hpp"

using namespace gsb;

namespace {

constexpr std::uint64_t kSeed = 20240601;
const ModelFamily kPoisson = ModelFamily::poisson();
const ModelFamily kGeometric = ModelFamily::geometric();

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void fail(const std::string& why) {
    pass = false;
    detail << why << "; ";
  }
};

int failures = 0;

void report(int id, const char* title, const Outcome& o) {
  std::string d = o.detail.str();
  while (!d.empty() && (d.back() == ' ' || d.back() == ';')) d.pop_back();
  std::printf("criterion %2d: %s  %s%s%s\n", id, o.pass ? "PASS" : "FAIL", title, d.empty() ? "" : " | ",
              d.c_str());
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

std::string fmt(double v, int p = 6) {
  char b[64];
  std::snprintf(b, sizeof b, "%.*g", p, v);
  return b;
}

// ---------------------------------------------------------------------------
// 1 and 2 share one common-random-numbers run.

struct ReferenceRow {
  TuningTriplet t;
  double mse[4];
};

void mse_criteria() {
  const std::vector<ReferenceRow> published{{{0.5, -1, 0}, {0.0708, 0.0852, 0.1028, 0.2113}},
                                     {{0.1, 0, 0}, {0.0592, 0.1415, 0.3491, 1.3860}},
                                     {{1, 0, 0}, {0.0876, 0.0994, 0.1118, 0.2298}}};
  MseGridConfig cfg;
  for (const auto& r : published) cfg.triplets.push_back(r.t);
  cfg.triplets.push_back({0.1, -0.3, -4});
  cfg.triplets.push_back({0.1, -0.3, 0});
  cfg.epsilons = {0.0, 0.05, 0.1, 0.2};
  cfg.n = 50;
  cfg.reps = 1000;
  cfg.seed = kSeed;
  const MseGrid grid = run_mse_grid(cfg);

  Outcome o1;
  for (std::size_t ti = 0; ti < published.size(); ++ti) {
    for (std::size_t ei = 0; ei < 4; ++ei) {
      const MseCell& c = grid.at(ti, ei);
      const double ref = published[ti].mse[ei];
      // Pooled SE of two independent runs of the same size.
      const double tol = std::max(0.15 * ref, 3.0 * std::sqrt(2.0) * c.mc_se);
      o1.detail << published[ti].t.to_string() << "@" << cfg.epsilons[ei] << "=" << fmt(c.mse, 4) << " ";
      if (!c.valid || std::abs(c.mse - ref) > tol) {
        o1.fail(published[ti].t.to_string() + " eps " + fmt(cfg.epsilons[ei]) + ": " + fmt(c.mse) + " vs " +
                fmt(ref) + " (tol " + fmt(tol) + ")");
      }
    }
  }
  report(1, "published MSE cells within max(15%, 3 pooled MC SE)", o1);

  Outcome o2;
  const auto robust = grid.row(3);
  const auto plain = grid.row(4);
  const auto cmp = compare_cells(plain, robust, true);
  for (std::size_t ei = 0; ei < 4; ++ei) {
    const double a = plain[ei].mse, b = robust[ei].mse;
    o2.detail << "eps " << cfg.epsilons[ei] << ": " << fmt(b, 4) << " vs " << fmt(a, 4) << " (sign p "
              << fmt(cmp.sign_test_p[ei], 3) << ") ";
    if (ei == 0 ? std::abs(b - a) > 0.05 * a : b > a) o2.fail("eps " + fmt(cfg.epsilons[ei]) + " not improved");
  }
  report(2, "(0.1,-0.3,-4) improves on (0.1,-0.3,0) under CRN", o2);
}

// ---------------------------------------------------------------------------

void fisher_consistency() {
  Outcome o;
  std::mt19937_64 rng(kSeed + 3);
  std::uniform_real_distribution<double> ua(0.0, 1.2), ul(-1.0, 1.0), ub(-6.0, 2.0);
  int done = 0;
  double worst = 0.0;
  while (done < 30) {
    const TuningTriplet t(ua(rng), ul(rng), ub(rng));
    if (!(t.A() > 0.05)) continue;
    ++done;
    for (const auto* fam : {&kPoisson, &kGeometric}) {
      const double theta = fam == &kPoisson ? 3.0 : 0.4;
      // Exact to double precision: with small A the f^{2A} weights reach far into the tail.
      const auto f = DiscreteDensity::from_model(*fam, theta, 1e-300);
      try {
        const double err = std::abs(estimate(t, *fam, f).theta_hat - theta);
        worst = std::max(worst, err);
        if (err > 1e-6) o.fail(fam->name() + " " + t.to_string() + " error " + fmt(err));
      } catch (const Error& e) {
        o.fail(fam->name() + " " + t.to_string() + ": " + e.what());
      }
    }
  }
  o.detail << "60 fits, max |theta_hat - theta| = " << fmt(worst, 3);
  report(3, "Fisher consistency on exact pmfs", o);
}

void mle_reduction() {
  Outcome o;
  double worst = 0.0;
  for (std::size_t s = 0; s < 20; ++s) {
    auto rng = replication_stream(kSeed, 99, s);
    for (const auto* fam : {&kPoisson, &kGeometric}) {
      const auto x = fam->sample(fam == &kPoisson ? 3.0 : 0.35, 40 + s, rng);
      double mean = 0.0;
      for (auto v : x) mean += static_cast<double>(v);
      mean /= static_cast<double>(x.size());
      const double mle = fam == &kPoisson ? mean : 1.0 / (1.0 + mean);
      const double got = estimate(TuningTriplet(0, 0, 0), *fam, std::span<const std::size_t>(x)).theta_hat;
      worst = std::max(worst, std::abs(got - mle));
      if (std::abs(got - mle) > 1e-8) o.fail(fam->name() + " sample " + std::to_string(s) + ": " + fmt(got - mle));
    }
  }
  o.detail << "40 samples, max error " << fmt(worst, 3);
  report(4, "(0,0,0) equals the closed-form MLE", o);
}

void gradient_consistency() {
  Outcome o;
  const auto data = fixture::poisson_data().density();
  double worst = 0.0;
  int count = 0;
  for (double a : {0.1, 0.3, 0.5, 0.7, 1.0}) {
    for (double l : {-0.5, -0.25, 0.0, 0.5, 1.0}) {
      for (double b : {-4.0, 0.0, 1.0}) {
        const TuningTriplet t(a, l, b);
        for (double theta : {1.5, 2.5, 3.5, 4.5, 6.0}) {
          const double h = 1e-3 * theta;
          auto D = [&](double th) { return gsb_objective(t, kPoisson, th, data); };
          const double fd = (-D(theta + 2 * h) + 8 * D(theta + h) - 8 * D(theta - h) + D(theta - 2 * h)) / (12 * h);
          const double psi = estimating_function(t, kPoisson, theta, data);
          const double rel = std::abs(psi - t.A() * fd) / std::abs(t.A() * fd);
          worst = std::max(worst, rel);
          ++count;
          if (!(rel <= 1e-6)) o.fail(t.to_string() + " theta " + fmt(theta) + ": rel " + fmt(rel));
        }
      }
    }
  }
  o.detail << count << " points, max relative error " << fmt(worst, 3);
  report(5, "estimating function equals A x finite-difference gradient", o);
}

void sandwich_sanity() {
  Outcome o;
  for (double theta : {1.0, 3.0, 7.0}) {
    const auto cov = model_JV(TuningTriplet(0, 0, 0), kPoisson, theta);
    const double s = cov.sandwich ? (*cov.sandwich)(0, 0) : NAN;
    if (!(std::abs(s - theta) <= 1e-8)) o.fail("theta " + fmt(theta) + ": sandwich " + fmt(s, 12));
  }
  const TuningTriplet t(0.25, -0.5, 0);
  const std::size_t n = 500, reps = 2000;
  std::vector<double> est(reps);
  EstimateOptions eo;
  eo.compute_std_error = false;
  for (std::size_t r = 0; r < reps; ++r) {
    auto rng = replication_stream(kSeed, 6, r);
    const auto x = kPoisson.sample(3.0, n, rng);
    est[r] = estimate(t, kPoisson, std::span<const std::size_t>(x), eo).theta_hat;
  }
  double m = 0.0;
  for (double v : est) m += v;
  m /= reps;
  double var = 0.0;
  for (double v : est) var += (v - m) * (v - m);
  var /= reps - 1;
  const double sandwich = (*model_JV(t, kPoisson, 3.0).sandwich)(0, 0);
  const double ratio = n * var / sandwich;
  o.detail << "n Var(theta_hat) / sandwich = " << fmt(ratio, 4);
  if (std::abs(ratio - 1.0) > 0.10) o.fail("Monte Carlo variance off by more than 10%");
  report(6, "sandwich = theta at (0,0,0); Monte Carlo variance within 10%", o);
}

void influence_oracle() {
  Outcome o;
  const auto f = DiscreteDensity::from_model(kPoisson, 3.0, 1e-16);
  EstimateOptions eo;
  eo.compute_std_error = false;
  eo.theta_tol = 1e-14;
  eo.estimating_tol = 1e-15;
  double worst = 0.0;
  for (const auto& t : {TuningTriplet(0, 0, 0), TuningTriplet(0.5, -1, 0), TuningTriplet(0.65, -0.98, -8)}) {
    const ModelInfluence inf(t, kPoisson, 3.0);
    for (std::size_t y : {0u, 5u, 10u, 20u}) {
      auto d = [&](double eps) { return (estimate(t, kPoisson, f.contaminated(y, eps), eo).theta_hat - 3.0) / eps; };
      const double numeric = (10.0 * d(1e-4) - d(1e-3)) / 9.0;
      const double analytic = inf(y).value(0);
      const double rel = std::abs(analytic - numeric) / std::abs(numeric);
      worst = std::max(worst, rel);
      if (!(rel <= 1e-4)) {
        o.fail(t.to_string() + " y " + std::to_string(y) + ": " + fmt(analytic, 10) + " vs " + fmt(numeric, 10));
      }
    }
  }
  o.detail << "max relative error " << fmt(worst, 3);
  // The eps expansion at y has radius ~ f(y); 80-digit quotients at eps = 1e-25
  // sit inside it and confirm the formula.
  double hp = 0.0;
  const std::vector<TuningTriplet> hp_t{{0.5, -1, 0}, {0.65, -0.98, -8}};
  const std::size_t hp_y[] = {0, 5, 10, 20};
  for (std::size_t k = 0; k < 2; ++k) {
    const ModelInfluence inf(hp_t[k], kPoisson, 3.0);
    for (std::size_t j = 0; j < 4; ++j) {
      hp = std::max(hp, fixture::rel_err(inf(hp_y[j]).value(0), oracle::kInfluenceNumeric[k * 4 + j]));
    }
  }
  o.detail << "; vs 80-digit quotients at eps 1e-25: max relative error " << fmt(hp, 3);
  report(7, "influence function equals the contamination derivative", o);
}

void region_concordance() {
  Outcome o;
  auto scan_bounded = [](const TuningTriplet& t) {
    try {
      return boundedness_scan(t, kPoisson, 3.0, 500).stabilized;
    } catch (const Error&) {
      return false;
    }
  };
  std::mt19937_64 rng(kSeed);
  std::uniform_real_distribution<double> ua(-1.0, 1.5), ul(-2.0, 2.0);
  const double betas[] = {-4.0, 0.0, 1.0};
  int disagree = 0;
  for (int i = 0; i < 200; ++i) {
    const double a = ua(rng);
    const double l = ul(rng);
    const TuningTriplet t(a, l, betas[rng() % 3]);
    const bool cls = classify_boundedness(t).bounded;
    const bool scan = scan_bounded(t);
    if (cls != scan) {
      ++disagree;
      o.fail(t.to_string() + " A=" + fmt(t.A(), 3) + ": classifier " + (cls ? "bounded" : "unbounded") +
             ", scan " + (scan ? "stabilized" : "growing"));
    }
  }
  o.detail << disagree << " of 200 random triplets disagree; ";

  struct Example {
    TuningTriplet t;
    Region region;
  };
  const std::vector<Example> examples{{{0.5, -1, 0}, Region::kS1},   {{0.5, -2, 0.7}, Region::kS2},
                                      {{-1, 0, 1}, Region::kS3},     {{0.65, -0.98, -8}, Region::kS4},
                                      {{0, 0, 0}, Region::kNone},    {{-0.5, 0, 0}, Region::kNone},
                                      {{-1, -0.5, 1}, Region::kNone}, {{0.3, -0.98, -8}, Region::kNone}};
  for (const auto& e : examples) {
    const auto v = classify_boundedness(e.t);
    const bool scan = scan_bounded(e.t);
    if (v.region != e.region || scan != (e.region != Region::kNone)) {
      o.fail("example " + e.t.to_string() + ": region " + region_name(v.region) + ", scan " +
             (scan ? "stabilized" : "growing"));
    }
  }
  report(8, "classifier agrees with the y <= 500 scan", o);
}

// ---------------------------------------------------------------------------
// Direct formulas, written independently of the library.

double sum_over(const DiscreteDensity& g, const DiscreteDensity& f, const std::function<double(double, double)>& h) {
  double s = 0.0;
  for (std::size_t x = 0; x < std::max(g.size(), f.size()); ++x) s += h(g[x], f[x]);
  return s;
}

double direct_sd(const DiscreteDensity& g, const DiscreteDensity& f, double a, double l) {
  const double A = 1 + l * (1 - a), B = a - l * (1 - a), c = 1 + a;
  return sum_over(g, f, [&](double gx, double fx) {
    return std::pow(fx, c) / A - c / (A * B) * std::pow(fx, B) * std::pow(gx, A) + std::pow(gx, c) / B;
  });
}

double direct_dpd(const DiscreteDensity& g, const DiscreteDensity& f, double a) {
  return sum_over(g, f, [&](double gx, double fx) {
    return std::pow(fx, 1 + a) - (1 + 1 / a) * gx * std::pow(fx, a) + std::pow(gx, 1 + a) / a;
  });
}

double direct_pd(const DiscreteDensity& g, const DiscreteDensity& f, double l) {
  return sum_over(g, f, [&](double gx, double fx) { return gx * (std::pow(gx / fx, l) - 1) / (l * (l + 1)); });
}

double direct_l2(const DiscreteDensity& g, const DiscreteDensity& f) {
  return sum_over(g, f, [](double gx, double fx) { return (gx - fx) * (gx - fx); });
}

void reduction_lattice() {
  Outcome o;
  std::vector<std::pair<DiscreteDensity, DiscreteDensity>> pairs;
  for (const auto& p : fixture::pairs()) pairs.emplace_back(DiscreteDensity(p.g), DiscreteDensity(p.f));
  std::mt19937_64 rng(kSeed + 9);
  std::uniform_real_distribution<double> u(0.02, 1.0);
  while (pairs.size() < 10) {
    const std::size_t k = 3 + pairs.size();
    std::vector<double> g(k), f(k);
    double sg = 0, sf = 0;
    for (std::size_t i = 0; i < k; ++i) sg += g[i] = u(rng), sf += f[i] = u(rng);
    for (std::size_t i = 0; i < k; ++i) g[i] /= sg, f[i] /= sf;
    pairs.emplace_back(DiscreteDensity(g), DiscreteDensity(f));
  }
  double worst = 0.0;
  auto check = [&](const char* what, double got, double want) {
    const double err = std::abs(got - want) / std::max(1.0, std::abs(want));
    worst = std::max(worst, err);
    if (!(err <= 1e-10)) o.fail(std::string(what) + ": " + fmt(got, 15) + " vs " + fmt(want, 15));
  };
  for (const auto& [g, f] : pairs) {
    for (double a : {0.1, 0.5, 0.9}) {
      for (double l : {-0.5, 0.3, 0.8}) {
        check("GSB(beta=0) = SD", gsb_divergence(g, f, TuningTriplet(a, l, 0)), direct_sd(g, f, a, l));
        check("SD catalog", named_divergence(NamedDivergence::kS, g, f, {a, l}), direct_sd(g, f, a, l));
      }
      check("SD(lambda=0) = DPD", named_divergence(NamedDivergence::kS, g, f, {a, 0.0}), direct_dpd(g, f, a));
      check("DPD catalog", named_divergence(NamedDivergence::kDensityPower, g, f, {a}), direct_dpd(g, f, a));
    }
    for (double l : {-0.5, 0.5, 1.0}) {
      check("SD(alpha=0) = PD", named_divergence(NamedDivergence::kS, g, f, {0.0, l}), direct_pd(g, f, l));
      check("PD catalog", named_divergence(NamedDivergence::kPower, g, f, {l}), direct_pd(g, f, l));
    }
    check("DPD(alpha=1) = L2", named_divergence(NamedDivergence::kDensityPower, g, f, {1.0}), direct_l2(g, f));
  }
  o.detail << "10 pairs, max relative error " << fmt(worst, 3);
  report(9, "reduction lattice against direct formulas", o);
}

// ---------------------------------------------------------------------------

struct Rescan {
  TuningTriplet triplet;
  double theta_hat = 0.0;
};

// Independent exhaustive scan: every criterion recomputed from scratch.
Rescan rescan(const TuningGrid& grid, const EmpiricalDensity& data, double pilot, CriterionVariant v) {
  bool have = false;
  double best = 0.0;
  Rescan out;
  for (const auto& t : grid.triplets) {
    double c;
    try {
      c = mse_criterion(t, kPoisson, data, pilot, v);
    } catch (const Error&) {
      continue;
    }
    const auto key = std::make_tuple(c, t.alpha(), -std::abs(t.beta()), t.lambda());
    const auto bkey = std::make_tuple(best, out.triplet.alpha(), -std::abs(out.triplet.beta()), out.triplet.lambda());
    if (!have || key < bkey) {
      have = true;
      best = c;
      out.triplet = t;
      EstimateOptions eo;
      eo.compute_std_error = false;
      out.theta_hat = estimate(t, kPoisson, data, eo).theta_hat;
    }
  }
  return out;
}

void tuning_oracle() {
  Outcome o;
  const std::vector<TuningGrid> grids{
      TuningGrid::make({0.1, 0.5, 1.0}, {-0.5, 0.0, 0.5}, {-4.0, 0.0}),
      TuningGrid::make({0.2, 0.4, 0.6, 0.8}, {-1.0, -0.5, 0.0, 0.5}, {-2.0, 0.0}),
  };
  int checks = 0;
  for (std::size_t d = 0; d < 3; ++d) {
    ContaminationScheme s;
    s.epsilon = 0.1 * static_cast<double>(d);
    auto rng = replication_stream(kSeed, 10, d);
    const auto x = sample_mixture(s, 60, rng);
    const auto data = EmpiricalDensity::from_sample(std::span<const std::size_t>(x));
    const double pilot = l2_pilot(kPoisson, data);
    for (std::size_t gi = 0; gi < grids.size(); ++gi) {
      const auto& grid = grids[gi];
      const std::string tag = "data " + std::to_string(d) + " grid " + std::to_string(gi);
      const auto hk = select_hk(grid, kPoisson, data);
      const auto owj = select_owj(grid, kPoisson, data);
      const auto iwj = select_iwj(grid, kPoisson, data);
      TuningOptions one;
      one.max_iter = 1;
      const auto iwj1 = select_iwj(grid, kPoisson, data, one);

      if (!(hk.triplet == rescan(grid, data, 0.0, CriterionVariant::kHK).triplet)) o.fail(tag + ": HK");
      if (!(owj.triplet == rescan(grid, data, pilot, CriterionVariant::kWJ).triplet)) o.fail(tag + ": OWJ");
      // IWJ: replay the pilot iteration with the independent scan.
      double p = pilot;
      Rescan prev;
      bool first = true;
      for (int it = 0; it < 50; ++it) {
        const Rescan r = rescan(grid, data, p, CriterionVariant::kWJ);
        if ((!first && r.triplet == prev.triplet) || std::abs(r.theta_hat - p) < 1e-8) {
          prev = r;
          break;
        }
        first = false;
        prev = r;
        p = r.theta_hat;
      }
      if (!(iwj.triplet == prev.triplet)) o.fail(tag + ": IWJ");
      if (!(iwj1.triplet == owj.triplet && iwj1.theta_hat == owj.theta_hat &&
            iwj1.criterion_value == owj.criterion_value)) {
        o.fail(tag + ": IWJ(max_iter=1) differs from OWJ");
      }
      checks += 4;
    }
  }
  o.detail << checks << " selector checks";
  report(10, "selectors equal an exhaustive rescan", o);
}

}  // namespace

int main() {
  mse_criteria();
  fisher_consistency();
  mle_reduction();
  gradient_consistency();
  sandwich_sanity();
  influence_oracle();
  region_concordance();
  reduction_lattice();
  tuning_oracle();
  std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
