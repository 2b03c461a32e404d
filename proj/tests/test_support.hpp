#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "gsb/density.hpp"
#include "gsb/estimation.hpp"
#include "gsb/triplet.hpp"

// Fixtures shared with tests/oracles/generate.py; keep the two in sync.
namespace fixture {

struct Pair {
  std::vector<double> g;
  std::vector<double> f;
};

inline const std::vector<Pair>& pairs() {
  static const std::vector<Pair> p{
      {{0.1, 0.2, 0.3, 0.25, 0.15}, {0.15, 0.25, 0.2, 0.2, 0.2}},
      {{0.5, 0.3, 0.15, 0.05}, {0.4, 0.3, 0.2, 0.1}},
      {{0.05, 0.05, 0.1, 0.8}, {0.25, 0.25, 0.25, 0.25}},
  };
  return p;
}

inline const std::vector<gsb::TuningTriplet>& gsb_triplets() {
  static const std::vector<gsb::TuningTriplet> t{
      {0.5, -0.3, -2.0}, {0.25, 0.5, 1.0}, {1.0, 0.7, -4.0}, {0.1, -0.3, -4.0}, {-0.5, 0.2, 0.5},
  };
  return t;
}

inline const std::vector<gsb::TuningTriplet>& estimate_triplets() {
  static const std::vector<gsb::TuningTriplet> t{
      {0.0, 0.0, 0.0}, {0.5, -1.0, 0.0}, {0.1, -0.3, -4.0}, {0.25, -0.5, 0.0}, {1.0, 0.0, 0.0}, {0.4, 0.5, -2.0},
  };
  return t;
}

inline gsb::EmpiricalDensity poisson_data() {
  static const std::vector<std::pair<long long, long long>> rows{
      {0, 3}, {1, 8}, {2, 11}, {3, 10}, {4, 8}, {5, 5}, {6, 3}, {7, 1}, {9, 1}, {15, 1}};
  return gsb::EmpiricalDensity::from_counts(rows);
}

inline gsb::EmpiricalDensity geometric_data() {
  static const std::vector<std::pair<long long, long long>> rows{
      {0, 12}, {1, 9}, {2, 6}, {3, 5}, {4, 3}, {5, 2}, {7, 2}, {10, 1}};
  return gsb::EmpiricalDensity::from_counts(rows);
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace fixture
