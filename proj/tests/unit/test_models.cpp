#include <doctest.h>

#include <cmath>
#include <numeric>

#include "gsb/density.hpp"
#include "gsb/errors.hpp"
#include "gsb/estimation.hpp"
#include "gsb/models.hpp"

using gsb::ModelFamily;

TEST_CASE("closed-form pmfs") {
  const auto p = ModelFamily::poisson();
  const auto g = ModelFamily::geometric();
  CHECK(p.pmf(3.0, 0) == doctest::Approx(std::exp(-3.0)).epsilon(1e-14));
  CHECK(g.pmf(0.5, 2) == doctest::Approx(0.125).epsilon(1e-14));
  CHECK(p.pmf(3.0, 4) == doctest::Approx(std::exp(-3.0) * 81.0 / 24.0).epsilon(1e-13));
}

TEST_CASE("score vanishes where expected") {
  CHECK(std::abs(ModelFamily::poisson().score(3.0, 3)) < 1e-15);
  CHECK(std::abs(ModelFamily::geometric().score(0.5, 1)) < 1e-15);
}

TEST_CASE("pmf sums to one and the score has mean zero") {
  for (const auto& fam : {ModelFamily::poisson(), ModelFamily::geometric()}) {
    const double theta = fam.name() == "poisson" ? 4.2 : 0.3;
    double total = 0.0, su = 0.0, info = 0.0, uu = 0.0;
    for (std::size_t x = 0; x < 400; ++x) {
      const double f = fam.pmf(theta, x);
      const auto b = fam.score_bundle(theta, x);
      total += f;
      su += f * b.u;
      info += f * b.i;
      uu += f * b.u * b.u;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(su) < 1e-10);
    // Information identity E[i] = E[u^2].
    CHECK(info == doctest::Approx(uu).epsilon(1e-10));
  }
}

TEST_CASE("score matches finite differences of the log pmf") {
  const auto p = ModelFamily::poisson();
  const double h = 1e-6;
  for (std::size_t x : {0u, 2u, 9u}) {
    const double fd = (p.log_pmf(3.0 + h, x) - p.log_pmf(3.0 - h, x)) / (2 * h);
    CHECK(p.score(3.0, x) == doctest::Approx(fd).epsilon(1e-7));
  }
}

TEST_CASE("custom family falls back to numeric derivatives") {
  ModelFamily::CustomSpec spec;
  spec.name = "poisson-custom";
  spec.lower = 0.0;
  spec.upper = 1e6;
  spec.log_pmf = [](double th, std::size_t x) {
    return static_cast<double>(x) * std::log(th) - th - std::lgamma(static_cast<double>(x) + 1.0);
  };
  const auto c = ModelFamily::custom(spec);
  const auto p = ModelFamily::poisson();
  CHECK(c.score(3.0, 7) == doctest::Approx(p.score(3.0, 7)).epsilon(1e-6));
  CHECK(c.curvature(3.0, 7) == doctest::Approx(p.curvature(3.0, 7)).epsilon(1e-3));
}

TEST_CASE("domain checks") {
  CHECK_THROWS_AS(ModelFamily::poisson().validate(0.0), gsb::DomainError);
  CHECK_THROWS_AS(ModelFamily::geometric().validate(1.0), gsb::DomainError);
  CHECK_THROWS_AS(ModelFamily::by_name("binomial"), gsb::InputError);
}

TEST_CASE("sampling") {
  const auto p = ModelFamily::poisson();
  gsb::RngStream rng(42);
  CHECK_THROWS_AS(p.sample(3.0, 0, rng), gsb::InputError);
  const auto s = p.sample(3.0, 20000, rng);
  const double mean = std::accumulate(s.begin(), s.end(), 0.0) / s.size();
  CHECK(mean == doctest::Approx(3.0).epsilon(0.03));
  const auto gs = ModelFamily::geometric().sample(0.25, 20000, rng);
  const double gm = std::accumulate(gs.begin(), gs.end(), 0.0) / gs.size();
  CHECK(gm == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("model density truncation and mixtures") {
  const auto p = ModelFamily::poisson();
  const auto f = gsb::DiscreteDensity::from_model(p, 3.0);
  CHECK(f.tail_bound() <= gsb::kDefaultTailTolerance);
  CHECK(f.total() == doctest::Approx(1.0).epsilon(1e-11));
  const auto h = gsb::DiscreteDensity::from_model(p, 10.0);
  const auto m = gsb::DiscreteDensity::mixture(f, h, 0.1);
  CHECK(m.mean() == doctest::Approx(0.9 * 3 + 0.1 * 10).epsilon(1e-10));
  const auto c = f.contaminated(12, 0.5);
  CHECK(c[12] == doctest::Approx(0.5 * f[12] + 0.5));
}

TEST_CASE("empirical density") {
  const std::vector<long long> a{0, 0, 1};
  const auto e = gsb::EmpiricalDensity::from_sample(std::span<const long long>(a));
  CHECK(e.r()[0] == doctest::Approx(2.0 / 3.0));
  CHECK(e.r()[1] == doctest::Approx(1.0 / 3.0));
  const std::vector<long long> b{5};
  const auto one = gsb::EmpiricalDensity::from_sample(std::span<const long long>(b));
  CHECK(one.n() == 1);
  CHECK(one.r()[5] == 1.0);
  const std::vector<long long> empty;
  CHECK_THROWS_AS(gsb::EmpiricalDensity::from_sample(std::span<const long long>(empty)), gsb::InputError);
  const std::vector<long long> neg{1, -2};
  CHECK_THROWS_AS(gsb::EmpiricalDensity::from_sample(std::span<const long long>(neg)), gsb::InputError);
}
