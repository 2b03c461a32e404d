#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gsb/density.hpp"
#include "gsb/estimation.hpp"
#include "gsb/models.hpp"
#include "gsb/triplet.hpp"

namespace gsb {

/// (1 - epsilon) * base + epsilon * contaminant.
struct ContaminationScheme {
  ModelFamily base_family = ModelFamily::poisson();
  double base_theta = 3.0;
  ModelFamily contaminant_family = ModelFamily::poisson();
  double contaminant_theta = 10.0;
  double epsilon = 0.0;

  /// Throws InputError unless epsilon is in [0, 1).
  void validate() const;
  DiscreteDensity pmf(double tail_tol = kDefaultTailTolerance) const;
};

/// Each draw picks the contaminant with probability epsilon. With epsilon == 0
/// no selector draws are consumed, so the output equals base sampling.
std::vector<std::size_t> sample_mixture(const ContaminationScheme& scheme, std::size_t n, RngStream& rng);

/// Deterministic stream for replication `rep` at epsilon index `eps_index`.
RngStream replication_stream(std::uint64_t master_seed, std::size_t eps_index, std::size_t rep);

struct MseGridConfig {
  std::vector<TuningTriplet> triplets;
  std::vector<double> epsilons{0.0, 0.05, 0.1, 0.2};
  std::size_t n = 50;
  std::size_t reps = 1000;
  double target = 3.0;
  std::uint64_t seed = 20240601;
  /// 0 = hardware concurrency.
  std::size_t workers = 0;
  ContaminationScheme scheme;  // epsilon field is overridden per column
  EstimateOptions estimate_options;

  void validate() const;
};

struct MseCell {
  TuningTriplet triplet;
  double epsilon = 0.0;
  double mse = 0.0;
  double mc_se = 0.0;
  std::size_t failures = 0;
  /// At most 1% of replications failed.
  bool valid = true;
  std::size_t n = 0;
  std::size_t reps = 0;
  std::uint64_t seed = 0;
  /// Per replication; NaN marks a failed estimation.
  std::vector<double> sq_errors;
};

struct MseGrid {
  MseGridConfig config;
  /// Triplet-major: cells[ti * epsilons.size() + ei].
  std::vector<MseCell> cells;

  const MseCell& at(std::size_t triplet_index, std::size_t eps_index) const;
  /// All epsilon columns of one triplet, in config order.
  std::vector<MseCell> row(std::size_t triplet_index) const;
  std::optional<std::size_t> index_of(const TuningTriplet& t) const;
};

/// Replications at a fixed (epsilon, rep) share one sample across triplets.
MseGrid run_mse_grid(const MseGridConfig& config);

/// Mean and Monte Carlo standard error of the finite squared errors.
void summarize_cell(MseCell& cell);

enum class Improvement { kImproved, kEqual, kNotImproved };

std::string improvement_name(Improvement v);

struct CellComparison {
  Improvement verdict = Improvement::kNotImproved;
  /// mse(b) - mse(a) per epsilon.
  std::vector<double> differences;
  /// Two-sided sign-test p-values per epsilon (paired only).
  std::vector<double> sign_test_p;
};

/// Is b an improvement over a? `a` and `b` are the epsilon rows of two
/// triplets. Throws InputError on a protocol mismatch.
CellComparison compare_cells(const std::vector<MseCell>& a, const std::vector<MseCell>& b, bool paired);

/// Two-sided exact binomial sign test on paired values (ties dropped).
double sign_test_p_value(const std::vector<double>& a, const std::vector<double>& b);

/// alpha,lambda,beta,epsilon,mse,mc_se,failures
std::string mse_grid_csv(const MseGrid& grid);

/// One block per beta: rows alpha, columns lambda, each cell stacks the
/// epsilon MSEs vertically.
std::string mse_grid_table(const MseGrid& grid);

/// The grid of the Poisson(3) / Poisson(10) study.
std::vector<TuningTriplet> default_simulation_triplets();

}  // namespace gsb
