#include "gsb/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <iomanip>
#include <memory>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "gsb/density.hpp"
#include "gsb/divergence.hpp"
#include "gsb/errors.hpp"
#include "gsb/estimation.hpp"
#include "gsb/influence.hpp"
#include "gsb/io.hpp"
#include "gsb/simulation.hpp"
#include "gsb/tuning.hpp"

namespace gsb::cli {

using nlohmann::json;

namespace {

constexpr std::uint64_t kDefaultSeed = 20240601;

json triplet_json(const TuningTriplet& t) {
  return {{"alpha", t.alpha()}, {"lambda", t.lambda()}, {"beta", t.beta()}, {"A", t.A()}, {"B", t.B()}};
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string fixed(double v, int digits = 6) {
  std::ostringstream os;
  os << std::setprecision(digits) << std::fixed << v;
  return os.str();
}

}  // namespace

json to_json(const RunConfig& c) {
  json j;
  j["command"] = c.command;
  j["model"] = c.model;
  j["theta"] = optional_json(c.theta);
  j["alpha"] = c.alpha;
  j["lambda"] = c.lambda;
  j["beta"] = c.beta;
  j["data"] = c.data;
  j["freq"] = c.freq;
  j["grid"] = c.grid;
  j["eps"] = c.eps;
  j["n"] = c.n;
  j["reps"] = c.reps;
  j["seed"] = c.seed ? json(*c.seed) : json(nullptr);
  j["target"] = c.target;
  j["base_theta"] = c.base_theta;
  j["contaminant_theta"] = c.contaminant_theta;
  j["workers"] = c.workers;
  j["out"] = c.out;
  j["format"] = c.format;
  j["method"] = c.method;
  j["max_iter"] = c.max_iter;
  j["tol"] = c.tol;
  j["refine"] = c.refine;
  j["variance"] = c.variance;
  j["y_min"] = c.y_min;
  j["y_max"] = c.y_max;
  j["scan"] = c.scan;
  j["scan_y_max"] = c.scan_y_max;
  j["divergence"] = c.divergence;
  j["params"] = c.params;
  return j;
}

RunConfig config_from_json(const json& j) {
  if (!j.is_object()) throw InputError("config: expected a JSON object");
  RunConfig c;
  const std::map<std::string, std::function<void(const json&)>> fields{
      {"command", [&](const json& v) { c.command = v.get<std::string>(); }},
      {"model", [&](const json& v) { c.model = v.get<std::string>(); }},
      {"theta", [&](const json& v) { c.theta = v.is_null() ? std::nullopt : std::optional<double>(v.get<double>()); }},
      {"alpha", [&](const json& v) { c.alpha = v.get<double>(); }},
      {"lambda", [&](const json& v) { c.lambda = v.get<double>(); }},
      {"beta", [&](const json& v) { c.beta = v.get<double>(); }},
      {"data", [&](const json& v) { c.data = v.get<std::string>(); }},
      {"freq", [&](const json& v) { c.freq = v.get<std::string>(); }},
      {"grid", [&](const json& v) { c.grid = v; }},
      {"eps", [&](const json& v) { c.eps = v.get<std::vector<double>>(); }},
      {"n", [&](const json& v) { c.n = v.get<std::size_t>(); }},
      {"reps", [&](const json& v) { c.reps = v.get<std::size_t>(); }},
      {"seed",
       [&](const json& v) {
         c.seed = v.is_null() ? std::nullopt : std::optional<std::uint64_t>(v.get<std::uint64_t>());
       }},
      {"target", [&](const json& v) { c.target = v.get<double>(); }},
      {"base_theta", [&](const json& v) { c.base_theta = v.get<double>(); }},
      {"contaminant_theta", [&](const json& v) { c.contaminant_theta = v.get<double>(); }},
      {"workers", [&](const json& v) { c.workers = v.get<std::size_t>(); }},
      {"out", [&](const json& v) { c.out = v.get<std::string>(); }},
      {"format", [&](const json& v) { c.format = v.get<std::string>(); }},
      {"method", [&](const json& v) { c.method = v.get<std::string>(); }},
      {"max_iter", [&](const json& v) { c.max_iter = v.get<std::size_t>(); }},
      {"tol", [&](const json& v) { c.tol = v.get<double>(); }},
      {"refine", [&](const json& v) { c.refine = v.get<bool>(); }},
      {"variance", [&](const json& v) { c.variance = v.get<std::string>(); }},
      {"y_min", [&](const json& v) { c.y_min = v.get<long long>(); }},
      {"y_max", [&](const json& v) { c.y_max = v.get<long long>(); }},
      {"scan", [&](const json& v) { c.scan = v.get<bool>(); }},
      {"scan_y_max", [&](const json& v) { c.scan_y_max = v.get<long long>(); }},
      {"divergence", [&](const json& v) { c.divergence = v.get<std::string>(); }},
      {"params", [&](const json& v) { c.params = v.get<std::vector<double>>(); }},
  };
  for (const auto& [key, value] : j.items()) {
    auto it = fields.find(key);
    if (it == fields.end()) throw InputError("config: unknown field '" + key + "'");
    try {
      it->second(value);
    } catch (const json::exception& e) {
      throw InputError("config field '" + key + "': " + e.what());
    }
  }
  return c;
}

namespace {

json load_json_file(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw InputError(std::string("cannot open ") + what + " '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(std::string(what) + " '" + path + "' is not valid JSON: " + e.what());
  }
}

std::uint64_t resolve_seed(const RunConfig& c) {
  if (c.seed) return *c.seed;
  if (const char* env = std::getenv("GSB_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw InputError(std::string("GSB_SEED is not an unsigned integer: '") + env + "'");
  }
  return kDefaultSeed;
}

ModelFamily family_of(const RunConfig& c) {
  try {
    return ModelFamily::by_name(c.model);
  } catch (const Error& e) {
    throw InputError(std::string("--model: ") + e.what());
  }
}

TuningTriplet checked_triplet(const RunConfig& c) {
  TuningTriplet t(c.alpha, c.lambda, c.beta);
  const std::string problem = estimability_problem(t);
  if (!problem.empty()) throw InputError("invalid triplet " + t.to_string() + ": " + problem);
  return t;
}

EmpiricalDensity load_data(const RunConfig& c) {
  if (c.data.empty() == c.freq.empty()) throw InputError("exactly one of --data or --freq is required");
  return c.data.empty() ? read_frequency_file(c.freq) : read_raw_sample_file(c.data);
}

double require_theta(const RunConfig& c) {
  if (!c.theta) throw InputError("--theta is required for the " + c.command + " command");
  return *c.theta;
}

std::vector<TuningTriplet> grid_triplets(const json& grid) {
  if (!grid.is_object()) throw InputError("grid: expected an object with 'triplets' or 'alpha'/'lambda'/'beta'");
  for (const auto& [key, value] : grid.items()) {
    static const std::set<std::string> known{"triplets", "alpha", "lambda", "beta"};
    if (!known.count(key)) throw InputError("grid: unknown field '" + key + "'");
  }
  std::vector<TuningTriplet> out;
  if (grid.contains("triplets")) {
    const auto& rows = grid["triplets"];
    if (!rows.is_array() || rows.empty()) throw InputError("grid.triplets: expected a non-empty array");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      if (!r.is_array() || r.size() != 3 || !r[0].is_number() || !r[1].is_number() || !r[2].is_number()) {
        throw InputError("grid.triplets[" + std::to_string(i) + "]: expected [alpha, lambda, beta]");
      }
      out.emplace_back(r[0].get<double>(), r[1].get<double>(), r[2].get<double>());
    }
    return out;
  }
  auto axis = [&](const char* name) {
    if (!grid.contains(name)) throw InputError(std::string("grid.") + name + ": missing");
    const auto& v = grid[name];
    if (!v.is_array() || v.empty()) throw InputError(std::string("grid.") + name + ": expected a non-empty array");
    std::vector<double> xs;
    for (const auto& x : v) {
      if (!x.is_number()) throw InputError(std::string("grid.") + name + ": values must be numbers");
      xs.push_back(x.get<double>());
    }
    return xs;
  };
  for (double a : axis("alpha")) {
    for (double l : axis("lambda")) {
      for (double b : axis("beta")) out.emplace_back(a, l, b);
    }
  }
  return out;
}

TuningGrid tuning_grid(const RunConfig& c) {
  if (c.grid.is_null() || c.grid == "default") return default_tuning_grid();
  if (c.grid.is_object() && !c.grid.contains("triplets")) {
    grid_triplets(c.grid);  // validates the fields
    return TuningGrid::make(c.grid["alpha"].get<std::vector<double>>(), c.grid["lambda"].get<std::vector<double>>(),
                            c.grid["beta"].get<std::vector<double>>());
  }
  return TuningGrid::from_triplets(grid_triplets(c.grid));
}

// Primary output goes to --out when given, else to stdout.
void emit(const RunConfig& c, std::ostream& out, const std::string& text) {
  if (c.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(c.out);
  if (!f) throw InputError("cannot write --out '" + c.out + "'");
  f << text;
}

std::string format_or(const RunConfig& c, const std::string& fallback) {
  return c.format.empty() ? fallback : c.format;
}

int cmd_estimate(const RunConfig& c, std::ostream& out) {
  const ModelFamily family = family_of(c);
  const TuningTriplet t = checked_triplet(c);
  const EmpiricalDensity data = load_data(c);
  const EstimationResult r = estimate(t, family, data);

  if (format_or(c, "json") == "json") {
    json j;
    j["model"] = family.name();
    j["triplet"] = triplet_json(t);
    j["n"] = data.n();
    j["theta_hat"] = r.theta_hat;
    j["std_error"] = optional_json(r.std_error);
    j["objective"] = r.objective_at_min;
    j["estimating_value"] = r.estimating_value;
    j["converged"] = r.converged;
    j["iterations"] = r.iterations;
    j["message"] = r.message;
    json starts = json::array();
    for (const auto& s : r.starts) {
      starts.push_back({{"start", s.start},
                        {"theta", s.theta},
                        {"objective", s.objective},
                        {"estimating_value", s.estimating_value},
                        {"converged", s.converged},
                        {"hit_boundary", s.hit_boundary}});
    }
    j["starts"] = starts;
    emit(c, out, j.dump(2) + "\n");
  } else {
    std::ostringstream os;
    os << "model       " << family.name() << "\n"
       << "triplet     " << t.to_string() << "  A = " << t.A() << "  B = " << t.B() << "\n"
       << "n           " << data.n() << "\n"
       << "theta_hat   " << fixed(r.theta_hat, 10) << "\n"
       << "std_error   " << (r.std_error ? fixed(*r.std_error, 10) : std::string("n/a")) << "\n"
       << "objective   " << std::setprecision(10) << r.objective_at_min << "\n"
       << "converged   " << (r.converged ? "yes" : "no") << "\n";
    if (!r.message.empty()) os << "message     " << r.message << "\n";
    emit(c, out, os.str());
  }
  return r.converged ? kOk : kNotConverged;
}

int cmd_divergence(const RunConfig& c, std::ostream& out) {
  const ModelFamily family = family_of(c);
  const double theta = require_theta(c);
  family.validate(theta);
  const EmpiricalDensity data = load_data(c);
  const DiscreteDensity g = data.density();
  const DiscreteDensity f = DiscreteDensity::from_model(family, theta, kDefaultTailTolerance, g.size());
  const TuningTriplet t(c.alpha, c.lambda, c.beta);
  json j;
  j["model"] = family.name();
  j["theta"] = theta;
  j["triplet"] = triplet_json(t);
  j["gsb"] = gsb_divergence(g, f, t);
  if (!c.divergence.empty()) {
    NamedDivergence name;
    try {
      name = parse_divergence_name(c.divergence);
    } catch (const Error& e) {
      throw InputError(std::string("--name: ") + e.what());
    }
    j["named"] = {{"name", std::string(divergence_name(name))},
                  {"params", c.params},
                  {"value", named_divergence(name, g, f, c.params)}};
    if (auto note = published_range_note(name, c.params)) j["named"]["note"] = *note;
  }
  if (format_or(c, "json") == "json") {
    emit(c, out, j.dump(2) + "\n");
  } else {
    std::ostringstream os;
    os << std::setprecision(12) << "gsb " << t.to_string() << "  " << j["gsb"].get<double>() << "\n";
    if (j.contains("named")) {
      os << j["named"]["name"].get<std::string>() << "  " << j["named"]["value"].get<double>() << "\n";
    }
    emit(c, out, os.str());
  }
  return kOk;
}

json verdict_json(const BoundednessVerdict& v) {
  return {{"bounded", v.bounded}, {"region", region_name(v.region)}, {"witness", v.witness}};
}

std::string verdict_line(const TuningTriplet& t, const BoundednessVerdict& v) {
  return "verdict " + t.to_string() + ": " + (v.bounded ? "bounded" : "unbounded") + " region=" +
         region_name(v.region) + (v.witness.empty() ? "" : " (" + v.witness + ")") + "\n";
}

int cmd_influence(const RunConfig& c, std::ostream& out) {
  const ModelFamily family = family_of(c);
  const double theta = require_theta(c);
  const TuningTriplet t(c.alpha, c.lambda, c.beta);
  const BoundednessVerdict v = classify_boundedness(t);
  if (c.y_min < 0) throw InputError("--y-min must be nonnegative");

  std::vector<std::pair<std::size_t, double>> curve;
  if (c.y_max >= c.y_min) {
    const ModelInfluence inf(t, family, theta);
    for (long long y = c.y_min; y <= c.y_max; ++y) {
      curve.emplace_back(static_cast<std::size_t>(y), inf(static_cast<std::size_t>(y)).value(0));
    }
  }
  const std::string fmt = format_or(c, "csv");
  if (fmt == "json") {
    json j;
    j["model"] = family.name();
    j["theta"] = theta;
    j["triplet"] = triplet_json(t);
    j["verdict"] = verdict_json(v);
    json rows = json::array();
    for (const auto& [y, val] : curve) rows.push_back({{"y", y}, {"if", val}});
    j["curve"] = rows;
    emit(c, out, j.dump(2) + "\n");
    return kOk;
  }
  std::ostringstream csv;
  if (!curve.empty()) {
    csv << "y,if\n" << std::setprecision(17);
    for (const auto& [y, val] : curve) csv << y << ',' << val << '\n';
  }
  if (c.out.empty()) {
    out << verdict_line(t, v) << csv.str();
  } else {
    out << verdict_line(t, v);
    if (!curve.empty()) emit(c, out, csv.str());
  }
  return kOk;
}

int cmd_region(const RunConfig& c, std::ostream& out) {
  const TuningTriplet t(c.alpha, c.lambda, c.beta);
  const BoundednessVerdict v = classify_boundedness(t);
  json j;
  j["triplet"] = triplet_json(t);
  j["verdict"] = verdict_json(v);
  if (c.scan) {
    const ModelFamily family = family_of(c);
    const double theta = require_theta(c);
    if (c.scan_y_max < 50) throw InputError("--scan-y-max must be at least 50");
    const BoundednessScan s = boundedness_scan(t, family, theta, static_cast<std::size_t>(c.scan_y_max));
    j["scan"] = {{"model", family.name()},
                 {"theta", theta},
                 {"y_max", c.scan_y_max},
                 {"stabilized", s.stabilized},
                 {"sup", s.running_sup.back()},
                 {"last_decade_increase", s.last_decade_increase}};
  }
  if (format_or(c, "json") == "json") {
    emit(c, out, j.dump(2) + "\n");
  } else {
    std::string text = verdict_line(t, v);
    if (c.scan) {
      text += std::string("scan: ") + (j["scan"]["stabilized"].get<bool>() ? "stabilized" : "growing") +
              ", sup |IF| = " + fixed(j["scan"]["sup"].get<double>()) + "\n";
    }
    emit(c, out, text);
  }
  return kOk;
}

json grid_json(const MseGrid& grid) {
  json cells = json::array();
  for (const auto& cell : grid.cells) {
    cells.push_back({{"alpha", cell.triplet.alpha()},
                     {"lambda", cell.triplet.lambda()},
                     {"beta", cell.triplet.beta()},
                     {"epsilon", cell.epsilon},
                     {"mse", cell.mse},
                     {"mc_se", cell.mc_se},
                     {"failures", cell.failures},
                     {"valid", cell.valid}});
  }
  return cells;
}

int cmd_simulate(const RunConfig& c, std::ostream& out) {
  MseGridConfig cfg;
  if (c.grid.is_null()) {
    cfg.triplets = {TuningTriplet(c.alpha, c.lambda, c.beta)};
  } else if (c.grid == "default") {
    cfg.triplets = default_simulation_triplets();
  } else {
    cfg.triplets = grid_triplets(c.grid);
  }
  cfg.epsilons = c.eps;
  cfg.n = c.n;
  cfg.reps = c.reps;
  cfg.target = c.target;
  cfg.seed = resolve_seed(c);
  cfg.workers = c.workers;
  cfg.scheme.base_family = family_of(c);
  cfg.scheme.contaminant_family = cfg.scheme.base_family;
  cfg.scheme.base_theta = c.base_theta;
  cfg.scheme.contaminant_theta = c.contaminant_theta;
  cfg.validate();

  const MseGrid grid = run_mse_grid(cfg);
  const std::string csv = mse_grid_csv(grid);
  const std::string fmt = format_or(c, "table");
  std::string text;
  if (fmt == "csv") {
    text = csv;
  } else if (fmt == "json") {
    json j;
    j["seed"] = cfg.seed;
    j["n"] = cfg.n;
    j["reps"] = cfg.reps;
    j["target"] = cfg.target;
    j["cells"] = grid_json(grid);
    text = j.dump(2) + "\n";
  } else {
    text = mse_grid_table(grid);
  }
  if (c.out.empty()) {
    out << text;
  } else {
    // CSV to the file, the chosen view to stdout.
    emit(c, out, csv);
    if (fmt != "csv") out << text;
  }
  bool all_valid = true;
  for (const auto& cell : grid.cells) all_valid = all_valid && cell.valid;
  return all_valid ? kOk : kNumericalFailure;
}

json selection_json(const TuningSelection& s) {
  json trace = json::array();
  for (const auto& step : s.pilot_trace) {
    trace.push_back({{"pilot", step.pilot},
                     {"triplet", triplet_json(step.triplet)},
                     {"theta_hat", step.theta_hat},
                     {"criterion", step.criterion}});
  }
  return {{"method", s.method},
          {"triplet", triplet_json(s.triplet)},
          {"theta_hat", s.theta_hat},
          {"criterion_value", s.criterion_value},
          {"converged", s.converged},
          {"grid_resolution", s.grid_resolution},
          {"pilot_trace", trace},
          {"infeasible", s.infeasible},
          {"warnings", s.warnings}};
}

int cmd_tune(const RunConfig& c, std::ostream& out) {
  const ModelFamily family = family_of(c);
  const EmpiricalDensity data = load_data(c);
  TuningOptions opts;
  opts.workers = c.workers;
  opts.max_iter = c.max_iter;
  opts.tol = c.tol;
  if (c.variance == "model") {
    opts.variance = VariancePlugIn::kModel;
  } else if (c.variance == "general") {
    opts.variance = VariancePlugIn::kGeneral;
  } else {
    throw InputError("--variance must be 'model' or 'general'");
  }
  auto select = [&](const TuningGrid& grid) {
    if (c.method == "hk") return select_hk(grid, family, data, opts);
    if (c.method == "owj") return select_owj(grid, family, data, opts);
    if (c.method == "iwj") return select_iwj(grid, family, data, opts);
    throw InputError("--method must be one of hk, owj, iwj");
  };
  const TuningGrid grid = tuning_grid(c);
  TuningSelection sel = select(grid);
  json j = selection_json(sel);
  if (c.refine) {
    const TuningGrid fine = refine_grid(grid, sel.triplet);
    sel = select(fine);
    json coarse = std::move(j);
    j = selection_json(sel);
    j["coarse"] = std::move(coarse);
  }
  j["model"] = family.name();
  j["n"] = data.n();
  if (format_or(c, "json") == "json") {
    emit(c, out, j.dump(2) + "\n");
  } else {
    std::ostringstream os;
    os << "method      " << sel.method << "\n"
       << "triplet     " << sel.triplet.to_string() << "\n"
       << "theta_hat   " << fixed(sel.theta_hat, 10) << "\n"
       << "criterion   " << std::setprecision(10) << sel.criterion_value << "\n"
       << "converged   " << (sel.converged ? "yes" : "no") << "\n"
       << "grid        " << sel.grid_resolution << "\n";
    for (const auto& w : sel.warnings) os << "warning     " << w << "\n";
    emit(c, out, os.str());
  }
  return sel.converged ? kOk : kNotConverged;
}

// Flags bound to RunConfig members; only flags given on the command line
// override values loaded from --config.
class Binder {
 public:
  template <typename T, typename M>
  CLI::Option* add(CLI::App* app, const std::string& flag, M RunConfig::*member, const std::string& desc) {
    auto holder = std::make_shared<T>();
    CLI::Option* opt = app->add_option(flag, *holder, desc);
    appliers_.push_back([opt, holder, member](RunConfig& c) {
      if (opt->count() > 0) c.*member = *holder;
    });
    return opt;
  }
  CLI::Option* flag(CLI::App* app, const std::string& name, bool RunConfig::*member, const std::string& desc) {
    CLI::Option* opt = app->add_flag(name, desc);
    appliers_.push_back([opt, member](RunConfig& c) {
      if (opt->count() > 0) c.*member = true;
    });
    return opt;
  }
  void apply(RunConfig& c) const {
    for (const auto& f : appliers_) f(c);
  }

 private:
  std::vector<std::function<void(RunConfig&)>> appliers_;
};

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Minimum GSB divergence estimation for discrete models", "gsb"};
  app.require_subcommand(1);

  struct Sub {
    CLI::App* app;
    std::shared_ptr<Binder> binder;
    std::shared_ptr<std::string> config_path;
    std::shared_ptr<std::string> save_path;
    std::shared_ptr<std::string> grid_arg;
    CLI::Option* grid_opt = nullptr;
  };
  std::vector<Sub> subs;

  auto make = [&](const std::string& name, const std::string& desc) -> Sub& {
    Sub s;
    s.app = app.add_subcommand(name, desc);
    s.binder = std::make_shared<Binder>();
    s.config_path = std::make_shared<std::string>();
    s.save_path = std::make_shared<std::string>();
    s.grid_arg = std::make_shared<std::string>();
    s.app->add_option("--config", *s.config_path, "Load a saved run config (flags override it)");
    s.app->add_option("--save-config", *s.save_path, "Write the resolved run config as JSON");
    auto& b = *s.binder;
    b.add<std::string>(s.app, "--format", &RunConfig::format, "json, csv or table")
        ->check(CLI::IsMember({"json", "csv", "table"}));
    b.add<std::string>(s.app, "--out", &RunConfig::out, "Output file");
    subs.push_back(s);
    return subs.back();
  };
  auto add_triplet = [](Sub& s) {
    s.binder->add<double>(s.app, "--alpha", &RunConfig::alpha, "alpha");
    s.binder->add<double>(s.app, "--lambda", &RunConfig::lambda, "lambda");
    s.binder->add<double>(s.app, "--beta", &RunConfig::beta, "beta");
  };
  auto add_model = [](Sub& s) {
    s.binder->add<std::string>(s.app, "--model", &RunConfig::model, "poisson or geometric");
  };
  auto add_theta = [](Sub& s) { s.binder->add<double>(s.app, "--theta", &RunConfig::theta, "Model parameter"); };
  auto add_data = [](Sub& s) {
    s.binder->add<std::string>(s.app, "--data", &RunConfig::data, "Raw sample, one integer per line");
    s.binder->add<std::string>(s.app, "--freq", &RunConfig::freq, "Frequency CSV: value,count");
  };
  auto add_grid = [](Sub& s) {
    s.grid_opt = s.app->add_option("--grid", *s.grid_arg, "Grid JSON file, or 'default'");
  };
  auto add_workers = [](Sub& s) {
    s.binder->add<std::size_t>(s.app, "--workers", &RunConfig::workers, "Worker threads (0 = all cores)");
  };

  {
    Sub& s = make("estimate", "Minimum GSB divergence estimate");
    add_model(s);
    add_triplet(s);
    add_data(s);
  }
  {
    Sub& s = make("divergence", "GSB (and optionally a named) divergence between data and f_theta");
    add_model(s);
    add_theta(s);
    add_triplet(s);
    add_data(s);
    s.binder->add<std::string>(s.app, "--name", &RunConfig::divergence, "Named divergence: LD, KLD, HD, L2, ...");
    s.binder->add<std::vector<double>>(s.app, "--params", &RunConfig::params, "Named divergence parameters")
        ->delimiter(',');
  }
  {
    Sub& s = make("influence", "Influence function curve at the model");
    add_model(s);
    add_theta(s);
    add_triplet(s);
    s.binder->add<long long>(s.app, "--y-min", &RunConfig::y_min, "First contamination point");
    s.binder->add<long long>(s.app, "--y-max", &RunConfig::y_max, "Last contamination point (< y-min: none)");
  }
  {
    Sub& s = make("region", "Classify a triplet by influence-function boundedness");
    add_model(s);
    add_theta(s);
    add_triplet(s);
    s.binder->flag(s.app, "--scan", &RunConfig::scan, "Corroborate with a sup|IF| scan");
    s.binder->add<long long>(s.app, "--scan-y-max", &RunConfig::scan_y_max, "Scan range");
  }
  {
    Sub& s = make("simulate", "Monte Carlo MSE grid under contaminated Poisson data");
    add_model(s);
    add_triplet(s);
    add_grid(s);
    add_workers(s);
    s.binder->add<std::vector<double>>(s.app, "--eps", &RunConfig::eps, "Contamination levels")->delimiter(',');
    s.binder->add<std::size_t>(s.app, "--n", &RunConfig::n, "Sample size");
    s.binder->add<std::size_t>(s.app, "--reps", &RunConfig::reps, "Replications");
    s.binder->add<std::uint64_t>(s.app, "--seed", &RunConfig::seed, "Master seed (fallback: GSB_SEED)");
    s.binder->add<double>(s.app, "--target", &RunConfig::target, "True parameter for the MSE");
    s.binder->add<double>(s.app, "--base-theta", &RunConfig::base_theta, "Base component parameter");
    s.binder->add<double>(s.app, "--contaminant-theta", &RunConfig::contaminant_theta, "Contaminant parameter");
  }
  {
    Sub& s = make("tune", "Select (alpha, lambda, beta) by HK, OWJ or IWJ");
    add_model(s);
    add_data(s);
    add_grid(s);
    add_workers(s);
    s.binder->add<std::string>(s.app, "--method", &RunConfig::method, "hk, owj or iwj")
        ->check(CLI::IsMember({"hk", "owj", "iwj"}));
    s.binder->add<std::size_t>(s.app, "--max-iter", &RunConfig::max_iter, "IWJ stage limit");
    s.binder->add<double>(s.app, "--tol", &RunConfig::tol, "IWJ pilot tolerance");
    s.binder->flag(s.app, "--refine", &RunConfig::refine, "Second pass on a finer grid around the optimum");
    s.binder->add<std::string>(s.app, "--variance", &RunConfig::variance, "model or general plug-in")
        ->check(CLI::IsMember({"model", "general"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  try {
    for (const Sub& s : subs) {
      if (!s.app->parsed()) continue;
      RunConfig cfg;
      if (!s.config_path->empty()) cfg = config_from_json(load_json_file(*s.config_path, "config"));
      if (!cfg.command.empty() && cfg.command != s.app->get_name()) {
        throw InputError("config was saved for '" + cfg.command + "', not '" + s.app->get_name() + "'");
      }
      cfg.command = s.app->get_name();
      s.binder->apply(cfg);
      if (s.grid_opt && s.grid_opt->count() > 0) {
        cfg.grid = *s.grid_arg == "default" ? json("default") : load_json_file(*s.grid_arg, "grid");
      }
      if (cfg.command == "simulate") cfg.seed = resolve_seed(cfg);
      if (!s.save_path->empty()) {
        std::ofstream f(*s.save_path);
        if (!f) throw InputError("cannot write --save-config '" + *s.save_path + "'");
        f << to_json(cfg).dump(2) << "\n";
      }
      const std::string& cmd = cfg.command;
      if (cmd == "estimate") return cmd_estimate(cfg, out);
      if (cmd == "divergence") return cmd_divergence(cfg, out);
      if (cmd == "influence") return cmd_influence(cfg, out);
      if (cmd == "region") return cmd_region(cfg, out);
      if (cmd == "simulate") return cmd_simulate(cfg, out);
      if (cmd == "tune") return cmd_tune(cfg, out);
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const SingularMatrixError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const ConvergenceError& e) {
    err << "not converged: " << e.what() << "\n";
    return kNotConverged;
  } catch (const Error& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kNumericalFailure;
  }
  return kInputError;
}

}  // namespace gsb::cli
