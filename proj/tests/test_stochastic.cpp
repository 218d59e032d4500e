#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "strata/point_process.hpp"
#include "strata/stochastic_density.hpp"

using namespace strata;

namespace {
ProcessModel bernoulli(double p, uint64_t seed = 1) {
  ProcessModel m;
  m.kind = ProcessModel::Kind::bernoulli_lattice;
  m.p = p;
  m.seed = seed;
  return m;
}
}  // namespace

TEST_CASE("bernoulli lattice degenerate probabilities") {
  SECTION("p = 1 keeps every interior site") {
    const auto s = sample_process(bernoulli(1.0), 0.0, 10.0);
    REQUIRE(s.points.size() == 9);
    for (int k = 0; k < 9; ++k) CHECK(s.points[k] == Catch::Approx(k + 1.0));
  }
  SECTION("p = 0 keeps nothing") {
    CHECK(sample_process(bernoulli(0.0), 0.0, 10.0).points.empty());
  }
  SECTION("bad parameters are rejected") {
    CHECK_THROWS_AS(sample_process(bernoulli(1.5), 0.0, 1.0), BadModelParams);
    ProcessModel m;
    m.kind = ProcessModel::Kind::shifted_lattice;
    m.min_gap = 0.8;
    m.jitter = 0.3;  // exceeds (1-d)/2 = 0.1
    CHECK_THROWS_AS(sample_process(m, 0.0, 1.0), BadModelParams);
  }
}

TEST_CASE("sampling is deterministic and statistically sane") {
  const auto m = bernoulli(0.5, 42);
  const auto a = sample_process(m, 0.0, 10000.0, 3);
  const auto b = sample_process(m, 0.0, 10000.0, 3);
  REQUIRE(a.points.size() == b.points.size());
  for (size_t i = 0; i < a.points.size(); ++i) CHECK(a.points[i] == b.points[i]);

  // about half of ~1e4 sites within 3 binomial sigmas
  const double n_sites = 9999.0;
  const double sigma = std::sqrt(0.25 * n_sites);
  CHECK(std::abs(static_cast<double>(a.points.size()) - 0.5 * n_sites) <= 3.0 * sigma);
}

TEST_CASE("hard-core gap never violated") {
  ProcessModel m;
  m.kind = ProcessModel::Kind::shifted_lattice;
  m.min_gap = 0.5;
  m.jitter = 0.25;
  m.seed = 7;
  int samples = 0;
  for (int rep = 0; rep < 10000; ++rep) {
    const auto s = sample_process(m, -3.0, 3.0, rep);
    for (size_t i = 0; i + 1 < s.points.size(); ++i)
      REQUIRE(s.points[i + 1] - s.points[i] >= m.min_gap - 1e-12);
    ++samples;
  }
  CHECK(samples == 10000);
}

TEST_CASE("restriction and scaling of a realization") {
  SECTION("integers at eps = 1/4 leave only the midpoint") {
    OmegaSample om;
    om.window_a = -1.0;
    om.window_b = 10.0;
    om.points = {0.0, 1.0, 2.0, 3.0, 4.0};
    const auto c = restrict_and_scale(om, 0.25, 1.0);
    REQUIRE(c.size() == 1);
    CHECK(c[0] == Catch::Approx(0.5));
  }
  SECTION("empty realization stays empty") {
    OmegaSample om;
    CHECK(restrict_and_scale(om, 0.25, 1.0).empty());
  }
  SECTION("direct scaling") {
    OmegaSample om;
    om.points = {2.0, 3.0};
    const auto c = restrict_and_scale(om, 0.1, 1.0);
    REQUIRE(c.size() == 2);
    CHECK(c[0] == Catch::Approx(0.2));
    CHECK(c[1] == Catch::Approx(0.3));
  }
}

TEST_CASE("unit cell count") {
  OmegaSample om;
  om.window_a = -2.0;
  om.window_b = 2.0;
  SECTION("half-open interval includes -1/2, excludes 1/2") {
    om.points = {-0.5, 0.49};
    CHECK(n0_count(om) == 2);
    om.points = {0.5};
    CHECK(n0_count(om) == 0);
    om.points = {0.0};
    CHECK(n0_count(om) == 1);
  }
  SECTION("window must contain the unit cell") {
    om.window_a = 0.0;
    CHECK_THROWS_AS(n0_count(om), WindowTooSmall);
  }
}

TEST_CASE("mean unit-cell count converges to p") {
  const int N = 4000;
  const double p = 0.3;
  const auto m = bernoulli(p, 11);
  double acc = 0.0;
  for (int rep = 0; rep < N; ++rep)
    acc += n0_count(sample_process(m, -1.0, 1.0, rep));
  const double mean = acc / N;
  CHECK(std::abs(mean - p) <= 4.0 * std::sqrt(p * (1 - p) / N));
}

TEST_CASE("law is invariant under integer shifts") {
  // chi-square on the count histogram over [z-1/2, z+1/2) at z = 0 and z = 17
  const int N = 4000;
  const auto m = bernoulli(0.5, 5);
  auto count_at = [](const OmegaSample& s, double z) {
    int c = 0;
    for (double x : s.points)
      if (x >= z - 0.5 && x < z + 0.5) ++c;
    return c;
  };
  int hist[2][2] = {};  // [shift][count in {0,1}]
  for (int rep = 0; rep < N; ++rep) {
    const auto s = sample_process(m, -25.0, 25.0, rep);
    ++hist[0][std::min(1, count_at(s, 0.0))];
    ++hist[1][std::min(1, count_at(s, 17.0))];
  }
  double chi2 = 0.0;
  for (int c = 0; c < 2; ++c) {
    const double expected = 0.5 * (hist[0][c] + hist[1][c]);
    for (int z = 0; z < 2; ++z) chi2 += (hist[z][c] - expected) * (hist[z][c] - expected) / expected;
  }
  CHECK(chi2 <= 10.83);  // 1 dof, p = 0.001
}

TEST_CASE("truncated Hausdorff distance") {
  auto mk = [](std::vector<double> pts) {
    OmegaSample s;
    s.points = std::move(pts);
    s.window_a = -10;
    s.window_b = 10;
    return s;
  };
  CHECK(omega_distance(mk({0.0, 1.0}), mk({0.0, 1.0})) == 0.0);
  CHECK(omega_distance(mk({0.0}), mk({0.3})) == Catch::Approx(0.3));
  CHECK(omega_distance(mk({0.0}), mk({5.0})) == 1.0);
  CHECK(omega_distance(mk({}), mk({})) == 0.0);
  CHECK(omega_distance(mk({}), mk({1.0})) == 1.0);

  SECTION("metric properties on random triples") {
    Rng rng(9);
    for (int trial = 0; trial < 200; ++trial) {
      auto draw = [&rng, &mk]() {
        std::vector<double> pts;
        const int n = 1 + static_cast<int>(rng.uniform() * 5);
        for (int k = 0; k < n; ++k) pts.push_back(rng.uniform(-3.0, 3.0));
        std::sort(pts.begin(), pts.end());
        return mk(pts);
      };
      const auto A = draw(), B = draw(), C = draw();
      const double ab = omega_distance(A, B), ba = omega_distance(B, A);
      CHECK(ab == Catch::Approx(ba));
      CHECK(omega_distance(A, C) <= ab + omega_distance(B, C) + 1e-12);
    }
  }
}

TEST_CASE("empirical density study tracks the analytic target") {
  SECTION("p = 1 gives exactly one per interior cell") {
    const auto rows = empirical_density_limit(bernoulli(1.0), {1.0 / 32}, 1.0, 2);
    for (const auto& r : rows) {
      CHECK(r.interior_mean == Catch::Approx(1.0));
      CHECK(r.target == 1.0);
    }
  }
  SECTION("bernoulli half within the CLT band") {
    const auto rows = empirical_density_limit(bernoulli(0.5, 123), {1.0 / 64}, 1.0, 4);
    for (const auto& r : rows) {
      // ~60 interior cells
      CHECK(r.abs_err <= 4.0 * std::sqrt(0.25 / 60.0));
    }
  }
  SECTION("mixture components separate; never near the blend mean") {
    ProcessModel m;
    m.kind = ProcessModel::Kind::mixture;
    m.p1 = 0.2;
    m.p2 = 0.8;
    m.mix_weight = 0.5;
    m.seed = 77;
    const auto rows = empirical_density_limit(m, {1.0 / 256}, 1.0, 8);
    bool saw1 = false, saw2 = false;
    for (const auto& r : rows) {
      CHECK((std::abs(r.target - 0.2) < 1e-12 || std::abs(r.target - 0.8) < 1e-12));
      CHECK(r.abs_err <= 4.0 * std::sqrt(0.25 / 250.0));
      CHECK(std::abs(r.interior_mean - 0.5) > 0.15);
      saw1 = saw1 || r.target == Catch::Approx(0.2);
      saw2 = saw2 || r.target == Catch::Approx(0.8);
    }
    CHECK(saw1);
    CHECK(saw2);
  }
  SECTION("eps list must decrease") {
    CHECK_THROWS_AS(empirical_density_limit(bernoulli(0.5), {0.1, 0.2}, 1.0, 1), BadModelParams);
  }
}
