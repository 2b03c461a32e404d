#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gsb/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "gsb");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = gsb::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("gsb_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string write(const std::string& name, const std::string& body) {
  const auto p = scratch() / name;
  std::ofstream(p) << body;
  return p.string();
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("estimate: MLE of a raw file") {
  const auto r = run({"estimate", "--data", write("raw.txt", "2\n3\n4\n"), "--alpha", "0", "--lambda", "0"});
  CHECK(r.code == 0);
  CHECK(std::abs(json::parse(r.out)["theta_hat"].get<double>() - 3.0) < 1e-8);
}

TEST_CASE("estimate: frequency and raw inputs agree exactly") {
  const auto a = run({"estimate", "--freq", write("f.csv", "0,2\n1,1\n"), "--alpha", "0.5", "--lambda", "-1"});
  const auto b = run({"estimate", "--data", write("r.txt", "0\n0\n1\n"), "--alpha", "0.5", "--lambda", "-1"});
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
}

TEST_CASE("estimate: triplet validation") {
  const auto data = write("raw2.txt", "1\n2\n3\n5\n");
  CHECK(run({"estimate", "--data", data, "--alpha", "0.5", "--lambda", "2"}).code == 0);
  const auto bad = run({"estimate", "--data", data, "--alpha", "0.1", "--lambda", "-1.2"});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("A > 0") != std::string::npos);
  CHECK(run({"estimate", "--data", write("bad.txt", "1\nz\n")}).code == 2);
  CHECK(run({"estimate"}).code == 2);
  CHECK(run({"estimate", "--data", data, "--format", "xml"}).code == 2);
}

TEST_CASE("influence: verdict and curve") {
  const auto r = run({"influence", "--theta", "3", "--alpha", "0.5", "--lambda", "-1", "--y-max", "50"});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("verdict (0.5, -1, 0): bounded region=S1", 0) == 0);
  CHECK(lines(r.out) == 53);
  const auto mle = run({"influence", "--theta", "3", "--y-max", "10"});
  CHECK(mle.out.find("unbounded") != std::string::npos);
  const auto empty = run({"influence", "--theta", "3", "--y-min", "5", "--y-max", "4"});
  CHECK(lines(empty.out) == 1);
}

TEST_CASE("region with a scan") {
  const auto r = run({"region", "--theta", "3", "--alpha", "0.5", "--lambda", "-1", "--scan", "--scan-y-max", "100"});
  CHECK(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["verdict"]["region"] == "S1");
  CHECK(j["scan"]["stabilized"] == true);
}

TEST_CASE("divergence command") {
  const auto r = run({"divergence", "--theta", "3", "--freq", write("d.csv", "0,3\n1,4\n2,6\n3,5\n5,2\n"),
                      "--alpha", "1", "--name", "L2"});
  CHECK(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["gsb"].get<double>() == doctest::Approx(j["named"]["value"].get<double>()).epsilon(1e-10));
}

TEST_CASE("simulate: smoke, determinism and config round trip") {
  const auto grid = write("grid.json", R"({"triplets": [[0.5, -1, 0], [0.1, -0.3, -4]]})");
  const std::vector<std::string> base{"simulate", "--grid", grid, "--reps", "4", "--n", "20",
                                      "--eps", "0,0.1", "--seed", "7", "--format", "csv"};
  auto one = base, eight = base;
  one.insert(one.end(), {"--workers", "1"});
  eight.insert(eight.end(), {"--workers", "8"});
  const auto a = run(one);
  const auto b = run(eight);
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(lines(a.out) == 5);

  auto saving = one;
  const auto cfg = (scratch() / "sim.json").string();
  saving.insert(saving.end(), {"--save-config", cfg});
  CHECK(run(saving).out == a.out);
  const auto again = run({"simulate", "--config", cfg});
  CHECK(again.code == 0);
  CHECK(again.out == a.out);
  // Explicit flags override the loaded values.
  CHECK(run({"simulate", "--config", cfg, "--seed", "8"}).out != a.out);
  CHECK(run({"estimate", "--config", cfg}).code == 2);
}

TEST_CASE("simulate: seed falls back to GSB_SEED") {
  const std::vector<std::string> args{"simulate", "--reps", "3", "--n", "10", "--eps", "0", "--format", "csv",
                                      "--alpha", "0.5", "--lambda", "-1"};
  ::setenv("GSB_SEED", "7", 1);
  const auto env = run(args);
  ::unsetenv("GSB_SEED");
  auto explicit_seed = args;
  explicit_seed.insert(explicit_seed.end(), {"--seed", "7"});
  CHECK(env.out == run(explicit_seed).out);
  CHECK(env.out != run(args).out);
}

TEST_CASE("config validation names the field") {
  const auto bad = write("bad.json", R"({"command": "simulate", "reps": "many"})");
  const auto r = run({"simulate", "--config", bad});
  CHECK(r.code == 2);
  CHECK(r.err.find("reps") != std::string::npos);
  const auto unknown = write("unk.json", R"({"command": "simulate", "bogus": 1})");
  CHECK(run({"simulate", "--config", unknown}).err.find("bogus") != std::string::npos);
  CHECK(run({"simulate", "--reps", "1", "--alpha", "0.5"}).err.find("reps") != std::string::npos);
}

TEST_CASE("tune: single triplet, iwj with one stage equals owj") {
  const auto data = write("t.csv", "value,count\n0,3\n1,8\n2,11\n3,10\n4,8\n5,5\n6,3\n7,1\n9,1\n15,1\n");
  const auto single = write("single.json", R"({"triplets": [[0.3, 0.2, -2]]})");
  const auto r = run({"tune", "--freq", data, "--grid", single});
  CHECK(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["triplet"]["alpha"] == 0.3);
  CHECK(j["grid_resolution"].get<std::string>().find("1 triplets") != std::string::npos);

  const auto grid = write("axes.json", R"({"alpha": [0.1, 0.5, 1], "lambda": [-0.5, 0], "beta": [-4, 0]})");
  auto owj = json::parse(run({"tune", "--freq", data, "--grid", grid, "--method", "owj"}).out);
  auto iwj = json::parse(run({"tune", "--freq", data, "--grid", grid, "--method", "iwj", "--max-iter", "1"}).out);
  owj.erase("method");
  iwj.erase("method");
  iwj.erase("warnings");
  owj.erase("warnings");
  iwj.erase("converged");
  owj.erase("converged");
  CHECK(owj == iwj);

  const auto empty = write("empty.json", R"({"triplets": [[0.1, -1.2, 0]]})");
  const auto e = run({"tune", "--freq", data, "--grid", empty});
  CHECK(e.code == 2);
  CHECK(e.err.find("excluded") != std::string::npos);
}
