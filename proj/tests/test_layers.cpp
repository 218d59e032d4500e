#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "strata/layers.hpp"

using namespace strata;

TEST_CASE("periodic construction places centers on the eps lattice") {
  const auto ls = build_layers(LayerMode::periodic, 0.25, 1.0 / 32, 1.0, 0.5);
  REQUIRE(ls.count() == 3);
  CHECK(ls.centers[0] == Catch::Approx(0.25));
  CHECK(ls.centers[1] == Catch::Approx(0.5));
  CHECK(ls.centers[2] == Catch::Approx(0.75));
  CHECK(ls.gap_exactly_epsilon);
  CHECK(ls.periodic);
  CHECK(ls.boundary_clearance > 0.125);
}

TEST_CASE("explicit sets are validated") {
  SECTION("minimal gap exactly eps is accepted") {
    const auto ls =
        build_layers(LayerMode::explicit_centers, 0.2, 0.02, 1.0, 0.5, {0.3, 0.5});
    REQUIRE(ls.count() == 2);
    CHECK(ls.gap_exactly_epsilon);
  }
  SECTION("wider gaps are accepted with the flag cleared") {
    const auto ls =
        build_layers(LayerMode::explicit_centers, 0.2, 0.02, 1.0, 0.5, {0.25, 0.7});
    CHECK_FALSE(ls.gap_exactly_epsilon);
  }
  SECTION("centers closer than eps are rejected") {
    CHECK_THROWS_AS(build_layers(LayerMode::explicit_centers, 0.2, 0.02, 1.0, 0.5, {0.3, 0.35}),
                    GapViolation);
  }
  SECTION("centers too close to the boundary are rejected") {
    CHECK_THROWS_AS(build_layers(LayerMode::explicit_centers, 0.2, 0.02, 1.0, 0.5, {0.05}),
                    BoundaryViolation);
  }
  SECTION("thickness must satisfy eps > r(1+delta)") {
    CHECK_THROWS_AS(build_layers(LayerMode::periodic, 0.1, 0.08, 1.0, 0.5), ThicknessViolation);
  }
}

TEST_CASE("count field matches the lattice cells") {
  SECTION("periodic sets count one per covered cell") {
    const auto ls = build_layers(LayerMode::periodic, 0.25, 1.0 / 32, 1.0, 0.5);
    const auto d = n_eps_field(ls);
    REQUIRE(d.values.size() == 3);
    for (int v : d.values) CHECK(v == 1);
    CHECK(d(0.25) == 1.0);
    CHECK(d(0.20) == 1.0);   // same cell, (1/8, 3/8]
    CHECK(d(0.05) == 0.0);   // outside the covered range
    CHECK(d.sup_value() == 1);
  }
  SECTION("empty center list gives all zeros") {
    const auto ls = build_layers(LayerMode::explicit_centers, 0.25, 1.0 / 32, 1.0, 0.5, {});
    const auto d = n_eps_field(ls);
    for (int v : d.values) CHECK(v == 0);
  }
  SECTION("sup bounded when the gap is exactly eps") {
    const auto ls =
        build_layers(LayerMode::explicit_centers, 0.2, 0.02, 1.0, 0.5, {0.3, 0.5, 0.7});
    CHECK(n_eps_field(ls).sup_value() <= 1);
  }
}

TEST_CASE("point queries of the layer geometry") {
  const auto ls = build_layers(LayerMode::periodic, 0.25, 1.0 / 32, 1.0, 0.5);
  const double r = ls.thickness;

  SECTION("layer center") {
    const auto q = layer_query(ls, 0.5);
    CHECK(q.in_stiff);
    CHECK(q.weight == Catch::Approx(0.25 / r));
    CHECK(q.y_local == Catch::Approx(0.0).margin(1e-15));
    CHECK(q.layer_index == 1);
  }
  SECTION("midway between layers") {
    const auto q = layer_query(ls, 0.375);
    CHECK_FALSE(q.in_stiff);
    CHECK(q.weight == 0.0);
    CHECK(q.y_local == 0.0);
  }
  SECTION("quarter thickness off center") {
    const auto q = layer_query(ls, 0.25 + r / 4.0);
    CHECK(q.in_stiff);
    CHECK(q.y_local == Catch::Approx(0.25));
  }
  SECTION("widened window carries the local coordinate without weight") {
    const auto q = layer_query(ls, 0.25 + r * 0.6);  // outside the layer, inside r(1+delta)/2
    CHECK_FALSE(q.in_stiff);
    CHECK(q.y_local == Catch::Approx(0.6));
  }
  SECTION("weight integrates to count * eps") {
    const int n = 200000;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += layer_query(ls, (i + 0.5) / n).weight / n;
    CHECK(acc == Catch::Approx(ls.count() * ls.epsilon).epsilon(1e-3));
  }
  SECTION("stiff volume fraction") {
    CHECK(ls.volume_fraction() == Catch::Approx(3.0 * r / 1.0));
  }
}

TEST_CASE("coarse averages of the count field") {
  SECTION("constants are preserved") {
    StepDensity d;
    d.epsilon = 0.1;
    d.domain_length = 1.0;
    d.i_min = 1;
    d.values.assign(9, 3);
    // windows kept inside the covered cell range (0.05, 0.95]
    const auto out = coarse_average(d, 0.3, {0.5, 0.2, 0.8});
    for (double v : out) CHECK(v == Catch::Approx(3.0));
  }
  SECTION("full periodic coverage averages to one in the interior") {
    const auto ls = build_layers(LayerMode::periodic, 1.0 / 16, 1.0 / 512, 1.0, 0.5);
    const auto d = n_eps_field(ls);
    const auto out = coarse_average(d, 4.0 / 16, {0.5, 0.4, 0.6});
    for (double v : out) CHECK(v == Catch::Approx(1.0));
  }
  SECTION("alternating cells average out") {
    StepDensity d;
    d.epsilon = 0.1;
    d.domain_length = 1.0;
    d.i_min = 1;
    d.values = {0, 2, 0, 2, 0, 2, 0, 2, 0};
    // window = 2 eps covers one 0-cell and one 2-cell in the interior
    const auto out = coarse_average(d, 0.2, {0.5});
    CHECK(out[0] == Catch::Approx(1.0));
  }
  SECTION("window below eps is rejected") {
    StepDensity d;
    d.epsilon = 0.1;
    d.domain_length = 1.0;
    d.i_min = 1;
    d.values.assign(9, 1);
    CHECK_THROWS_AS(coarse_average(d, 0.05, {0.5}), WindowTooSmall);
  }
  SECTION("averaging commutes with scaling") {
    StepDensity d;
    d.epsilon = 0.1;
    d.domain_length = 1.0;
    d.i_min = 1;
    d.values = {1, 0, 2, 5, 0, 1, 3, 0, 2};
    StepDensity d2 = d;
    for (auto& v : d2.values) v *= 4;
    const std::vector<double> where{0.3, 0.5, 0.7};
    const auto a = coarse_average(d, 0.25, where);
    const auto b = coarse_average(d2, 0.25, where);
    for (size_t i = 0; i < where.size(); ++i) CHECK(b[i] == Catch::Approx(4.0 * a[i]));
  }
}
