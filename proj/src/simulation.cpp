#include "gsb/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include <boost/math/distributions/binomial.hpp>

#include "gsb/errors.hpp"

namespace gsb {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v, int digits = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

}  // namespace

void ContaminationScheme::validate() const {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) {
    throw InputError("epsilon must lie in [0, 1), got " + std::to_string(epsilon));
  }
  base_family.validate(base_theta);
  contaminant_family.validate(contaminant_theta);
}

DiscreteDensity ContaminationScheme::pmf(double tail_tol) const {
  validate();
  return DiscreteDensity::mixture(DiscreteDensity::from_model(base_family, base_theta, tail_tol),
                                  DiscreteDensity::from_model(contaminant_family, contaminant_theta, tail_tol),
                                  epsilon);
}

std::vector<std::size_t> sample_mixture(const ContaminationScheme& scheme, std::size_t n, RngStream& rng) {
  if (n == 0) throw InputError("sample size must be at least 1");
  scheme.validate();
  std::vector<std::size_t> out(n);
  std::bernoulli_distribution pick(scheme.epsilon);
  for (auto& v : out) {
    const bool contaminated = scheme.epsilon > 0.0 && pick(rng);
    v = contaminated ? scheme.contaminant_family.draw(scheme.contaminant_theta, rng)
                     : scheme.base_family.draw(scheme.base_theta, rng);
  }
  return out;
}

RngStream replication_stream(std::uint64_t master_seed, std::size_t eps_index, std::size_t rep) {
  const auto rep64 = static_cast<std::uint64_t>(rep);
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(eps_index), static_cast<std::uint32_t>(rep64),
                    static_cast<std::uint32_t>(rep64 >> 32)};
  return RngStream(seq);
}

void MseGridConfig::validate() const {
  if (triplets.empty()) throw InputError("triplets: at least one triplet is required");
  if (epsilons.empty()) throw InputError("epsilons: at least one value is required");
  if (n == 0) throw InputError("n: sample size must be at least 1");
  if (reps < 2) throw InputError("reps: at least 2 replications are required");
  for (const auto& t : triplets) {
    const std::string problem = estimability_problem(t);
    if (!problem.empty()) throw InputError("triplets: " + t.to_string() + " " + problem);
  }
  for (double e : epsilons) {
    if (!(e >= 0.0 && e < 1.0)) throw InputError("epsilons: value " + std::to_string(e) + " outside [0, 1)");
  }
  ContaminationScheme s = scheme;
  s.epsilon = 0.0;
  s.validate();
}

const MseCell& MseGrid::at(std::size_t ti, std::size_t ei) const {
  return cells.at(ti * config.epsilons.size() + ei);
}

std::vector<MseCell> MseGrid::row(std::size_t ti) const {
  std::vector<MseCell> out;
  for (std::size_t ei = 0; ei < config.epsilons.size(); ++ei) out.push_back(at(ti, ei));
  return out;
}

std::optional<std::size_t> MseGrid::index_of(const TuningTriplet& t) const {
  for (std::size_t i = 0; i < config.triplets.size(); ++i) {
    if (config.triplets[i] == t) return i;
  }
  return std::nullopt;
}

void summarize_cell(MseCell& cell) {
  double sum = 0.0;
  std::size_t k = 0;
  cell.failures = 0;
  for (double s : cell.sq_errors) {
    if (std::isfinite(s)) {
      sum += s;
      ++k;
    } else {
      ++cell.failures;
    }
  }
  cell.mse = k > 0 ? sum / static_cast<double>(k) : kNaN;
  double ss = 0.0;
  for (double s : cell.sq_errors) {
    if (std::isfinite(s)) ss += (s - cell.mse) * (s - cell.mse);
  }
  cell.mc_se = k > 1 ? std::sqrt(ss / static_cast<double>(k - 1)) / std::sqrt(static_cast<double>(k)) : kNaN;
  cell.valid = k > 0 && static_cast<double>(cell.failures) <= 0.01 * static_cast<double>(cell.sq_errors.size());
}

MseGrid run_mse_grid(const MseGridConfig& config) {
  config.validate();
  const std::size_t T = config.triplets.size();
  const std::size_t E = config.epsilons.size();
  const std::size_t R = config.reps;

  MseGrid grid;
  grid.config = config;
  grid.cells.resize(T * E);
  for (std::size_t ti = 0; ti < T; ++ti) {
    for (std::size_t ei = 0; ei < E; ++ei) {
      MseCell& c = grid.cells[ti * E + ei];
      c.triplet = config.triplets[ti];
      c.epsilon = config.epsilons[ei];
      c.n = config.n;
      c.reps = R;
      c.seed = config.seed;
      c.sq_errors.assign(R, kNaN);
    }
  }

  EstimateOptions opts = config.estimate_options;
  opts.compute_std_error = false;

  // One work unit = one (epsilon, replication) sample, estimated under every triplet.
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t unit = next++; unit < E * R; unit = next++) {
      const std::size_t ei = unit / R;
      const std::size_t rep = unit % R;
      ContaminationScheme scheme = config.scheme;
      scheme.epsilon = config.epsilons[ei];
      RngStream rng = replication_stream(config.seed, ei, rep);
      const auto sample = sample_mixture(scheme, config.n, rng);
      const auto data = EmpiricalDensity::from_sample(std::span<const std::size_t>(sample));
      for (std::size_t ti = 0; ti < T; ++ti) {
        double sq = kNaN;
        try {
          const auto res = estimate(config.triplets[ti], scheme.base_family, data, opts);
          if (res.converged) sq = (res.theta_hat - config.target) * (res.theta_hat - config.target);
        } catch (const Error&) {
        }
        grid.cells[ti * E + ei].sq_errors[rep] = sq;
      }
    }
  };
  std::size_t workers = config.workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : config.workers;
  workers = std::min(workers, E * R);
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  for (auto& c : grid.cells) summarize_cell(c);
  return grid;
}

std::string improvement_name(Improvement v) {
  switch (v) {
    case Improvement::kImproved: return "improved";
    case Improvement::kEqual: return "equal";
    case Improvement::kNotImproved: return "not_improved";
  }
  return "not_improved";
}

double sign_test_p_value(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw InputError("sign test needs paired vectors of equal length");
  std::size_t plus = 0;
  std::size_t minus = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a[i]) || !std::isfinite(b[i])) continue;
    if (b[i] < a[i]) ++plus;
    if (b[i] > a[i]) ++minus;
  }
  const std::size_t m = plus + minus;
  if (m == 0) return 1.0;
  boost::math::binomial_distribution<double> bin(static_cast<double>(m), 0.5);
  const double k = static_cast<double>(std::min(plus, minus));
  return std::min(1.0, 2.0 * boost::math::cdf(bin, k));
}

CellComparison compare_cells(const std::vector<MseCell>& a, const std::vector<MseCell>& b, bool paired) {
  if (a.size() != b.size() || a.empty()) throw InputError("compare_cells: rows differ in epsilon count");
  CellComparison out;
  bool all_le = true;
  bool all_eq = true;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const MseCell& x = a[i];
    const MseCell& y = b[i];
    if (x.epsilon != y.epsilon || x.n != y.n || x.reps != y.reps) {
      throw InputError("compare_cells: protocol mismatch (epsilon, n or reps differ)");
    }
    if (paired && (x.seed != y.seed || x.sq_errors.size() != y.sq_errors.size())) {
      throw InputError("compare_cells: paired comparison needs identical seeds");
    }
    out.differences.push_back(y.mse - x.mse);
    if (!(y.mse <= x.mse)) all_le = false;
    if (y.mse != x.mse) all_eq = false;
    if (paired) out.sign_test_p.push_back(sign_test_p_value(x.sq_errors, y.sq_errors));
  }
  out.verdict = all_eq ? Improvement::kEqual : (all_le ? Improvement::kImproved : Improvement::kNotImproved);
  return out;
}

std::string mse_grid_csv(const MseGrid& grid) {
  std::ostringstream os;
  os << "alpha,lambda,beta,epsilon,mse,mc_se,failures\n";
  os << std::setprecision(17);
  for (const auto& c : grid.cells) {
    os << c.triplet.alpha() << ',' << c.triplet.lambda() << ',' << c.triplet.beta() << ',' << c.epsilon << ','
       << c.mse << ',' << c.mc_se << ',' << c.failures << '\n';
  }
  return os.str();
}

std::string mse_grid_table(const MseGrid& grid) {
  const auto& cfg = grid.config;
  std::set<double> betas_seen;
  std::vector<double> betas;
  for (const auto& t : cfg.triplets) {
    if (betas_seen.insert(t.beta()).second) betas.push_back(t.beta());
  }
  std::ostringstream os;
  const int width = 9;
  for (double beta : betas) {
    std::vector<double> alphas;
    std::vector<double> lambdas;
    std::map<std::pair<double, double>, std::size_t> where;
    for (std::size_t i = 0; i < cfg.triplets.size(); ++i) {
      const auto& t = cfg.triplets[i];
      if (t.beta() != beta) continue;
      if (std::find(alphas.begin(), alphas.end(), t.alpha()) == alphas.end()) alphas.push_back(t.alpha());
      if (std::find(lambdas.begin(), lambdas.end(), t.lambda()) == lambdas.end()) lambdas.push_back(t.lambda());
      where.emplace(std::make_pair(t.alpha(), t.lambda()), i);
    }
    std::sort(alphas.begin(), alphas.end());
    std::sort(lambdas.begin(), lambdas.end());
    os << "beta = " << beta << "  (eps: ";
    for (std::size_t e = 0; e < cfg.epsilons.size(); ++e) os << (e ? ", " : "") << cfg.epsilons[e];
    os << ")\n";
    os << std::setw(width) << "alpha";
    for (double l : lambdas) os << std::setw(width) << fmt(l, 2);
    os << '\n';
    for (double a : alphas) {
      for (std::size_t e = 0; e < cfg.epsilons.size(); ++e) {
        os << std::setw(width) << (e == 0 ? fmt(a, 2) : std::string());
        for (double l : lambdas) {
          auto it = where.find({a, l});
          if (it == where.end()) {
            os << std::setw(width) << "";
          } else {
            const MseCell& c = grid.at(it->second, e);
            os << std::setw(width) << (c.valid ? fmt(c.mse) : std::string("invalid"));
          }
        }
        os << '\n';
      }
    }
    os << '\n';
  }
  return os.str();
}

std::vector<TuningTriplet> default_simulation_triplets() {
  const double alphas[] = {0.1, 0.25, 0.4, 0.5, 0.6, 0.8, 1.0};
  const double lambdas[] = {-1.0, -0.7, -0.5, -0.3, 0.0, 0.2, 0.5, 0.8, 1.0};
  const double betas[] = {0.0, -4.0};
  std::vector<TuningTriplet> out;
  for (double b : betas) {
    for (double a : alphas) {
      for (double l : lambdas) {
        TuningTriplet t(a, l, b);
        if (estimability_problem(t).empty()) out.push_back(t);
      }
    }
  }
  return out;
}

}  // namespace gsb
