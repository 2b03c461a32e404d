#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace gsb::cli {

enum ExitCode : int {
  kOk = 0,
  kInputError = 2,
  kNumericalFailure = 3,
  kNotConverged = 4,
};

/// Everything needed to reproduce a run. Serialized with --save-config and
/// read back with --config; explicit flags override loaded values.
struct RunConfig {
  std::string command;
  std::string model = "poisson";
  std::optional<double> theta;
  double alpha = 0.0;
  double lambda = 0.0;
  double beta = 0.0;
  std::string data;
  std::string freq;
  /// Inline grid: {"triplets": [[a, l, b], ...]} or {"alpha": [...], "lambda": [...], "beta": [...]}.
  /// The string "default" selects the built-in grid of the command.
  nlohmann::json grid;
  std::vector<double> eps{0.0, 0.05, 0.1, 0.2};
  std::size_t n = 50;
  std::size_t reps = 1000;
  std::optional<std::uint64_t> seed;
  double target = 3.0;
  double base_theta = 3.0;
  double contaminant_theta = 10.0;
  std::size_t workers = 0;
  std::string out;
  std::string format;
  std::string method = "owj";
  std::size_t max_iter = 50;
  double tol = 1e-8;
  bool refine = false;
  std::string variance = "model";
  long long y_min = 0;
  long long y_max = 50;
  bool scan = false;
  long long scan_y_max = 500;
  std::string divergence;
  std::vector<double> params;
};

nlohmann::json to_json(const RunConfig& c);
/// Throws InputError naming the offending field.
RunConfig config_from_json(const nlohmann::json& j);

/// Entry point shared by the executable and the tests. Returns the exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gsb::cli
