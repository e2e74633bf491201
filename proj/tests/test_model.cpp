#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "rsmfg/model.hpp"

using namespace rsmfg;

namespace {

std::vector<double> sample(const Grid1D& g, auto&& f) {
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = f(g.x(i));
  return out;
}

}  // namespace

TEST_CASE("grids expose uniform nodes and exact endpoints") {
  Grid1D g(-1.0, 1.0, 5);
  CHECK(g.dx() == doctest::Approx(0.5));
  CHECK(g.x(0) == -1.0);
  CHECK(g.x(4) == doctest::Approx(1.0));
  CHECK(g.nodes().size() == 5);
  TimeGrid t(0.3, 4);
  CHECK(t.t(3) == 0.3);
  CHECK(t.dt() == doctest::Approx(0.1));
  CHECK_THROWS_AS(Grid1D(1.0, 0.0, 5), std::invalid_argument);
  CHECK_THROWS_AS(Grid1D(0.0, 1.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(TimeGrid(0.0, 5), std::invalid_argument);
}

TEST_CASE("field rows, interpolation and dimension checks") {
  Grid1D g(0.0, 1.0, 3);
  TimeGrid t(1.0, 2);
  Field f(g, t, std::vector<double>{0, 1, 2, 10, 11, 12});
  CHECK(f.at(1, 2) == 12.0);
  CHECK(f.interpolate(0.5, 0.25) == doctest::Approx(5.5));
  CHECK(f.interpolate(2.0, 5.0) == doctest::Approx(12.0));
  CHECK_THROWS_AS(Field(g, t, std::vector<double>(5)), DimensionError);
  CHECK_THROWS_AS(f.row(2), std::out_of_range);
}

TEST_CASE("density_moments of a symmetric density has zero mean") {
  Grid1D g(-5.0, 5.0, 201);
  auto m = sample(g, [](double x) { return 1.0 + std::cos(x); });
  const auto mom = density_moments(g, m);
  CHECK(std::abs(mom.mean) < 1e-12);
  CHECK(mom.variance > 0.0);
}

TEST_CASE("density_moments of a sampled N(1,1)") {
  Grid1D g(-9.0, 11.0, 2001);
  auto m = sample(g, [](double x) { return fixture::gaussian(x, 1.0, 1.0); });
  const auto mom = density_moments(g, m);
  CHECK(mom.mean == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(mom.variance == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("density_moments of a two-bump mixture matches quadrature") {
  Grid1D g(-3.0, 3.0, 6001);
  auto bump = [](double x) { return 0.5 * fixture::gaussian(x, -1.0, 0.01) + 0.5 * fixture::gaussian(x, 1.0, 0.01); };
  auto m = sample(g, bump);
  const auto mom = density_moments(g, m);
  const auto [mean, var] = oracle::simpson_moments(bump, -3.0, 3.0);
  CHECK(std::abs(mom.mean - mean) < 1e-9);
  CHECK(mom.variance == doctest::Approx(var).epsilon(1e-6));
  CHECK(var == doctest::Approx(1.01).epsilon(1e-6));
}

TEST_CASE("density_moments mean is linear in mixtures") {
  Grid1D g(-6.0, 6.0, 241);
  auto m1 = sample(g, [](double x) { return fixture::gaussian(x, -1.0, 0.5); });
  auto m2 = sample(g, [](double x) { return fixture::gaussian(x, 2.0, 0.8); });
  for (double alpha : {0.0, 0.25, 0.6, 1.0}) {
    std::vector<double> mix(g.size());
    for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = alpha * m1[i] + (1 - alpha) * m2[i];
    const double expected = alpha * density_moments(g, m1).mean + (1 - alpha) * density_moments(g, m2).mean;
    CHECK(density_moments(g, mix).mean == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("density_moments rejects a bad row index") {
  Grid1D g(-1.0, 1.0, 11);
  TimeGrid t(1.0, 3);
  DensityTrajectory d{Field(g, t, 0.5)};
  CHECK_THROWS_AS(density_moments(d, 3), std::out_of_range);
}

TEST_CASE("initial density is renormalized to unit mass") {
  auto model = fixture::lq_model(1.0, 0.0, 1.0, 1.0, 1.0);
  Grid1D g(-3.0, 5.0, 81);
  const auto m0 = sample_initial_density(model, g);
  CHECK(density_mass(g, m0) == doctest::Approx(1.0).epsilon(1e-14));
  model.initial_density = [](double x) { return x; };
  CHECK_THROWS_AS(sample_initial_density(model, g), std::invalid_argument);
  model.initial_density = [](double) { return 0.0; };
  CHECK_THROWS_AS(sample_initial_density(model, g), std::invalid_argument);
}

TEST_CASE("frozen density rows all carry unit mass") {
  auto model = fixture::lq_model(1.0, 0.0, 1.0, 1.0, 1.0);
  Grid1D g(-4.0, 6.0, 51);
  TimeGrid t(1.0, 7);
  const auto d = frozen_density(model, g, t);
  for (std::size_t s = 0; s < t.size(); ++s) CHECK(std::abs(density_mass(g, d.row(s)) - 1.0) <= 1e-10);
}

TEST_CASE("validate_model accepts the frozen affine instance") {
  fixture::FrozenAffine inst;
  const auto report = validate_model(inst.model(), inst.grid, inst.times);
  CHECK(report.ok);
  CHECK(report.findings.empty());
  // dx^2 / (eps sigma^2 + |u|max dx) with dx = 0.2, eps sigma^2 = 20, |u|max = 10.
  CHECK(report.cfl_limit == doctest::Approx(0.04 / 22.0));
  CHECK(report.dt <= report.cfl_limit);
}

TEST_CASE("validate_model flags bad diffusion, NaN cost and CFL") {
  fixture::FrozenAffine inst;
  auto m = inst.model();
  m.diffusion = [](double, double) { return -1.0; };
  auto r = validate_model(m, inst.grid, inst.times);
  CHECK_FALSE(r.ok);
  CHECK(r.findings.front().find("diffusion") != std::string::npos);

  m = inst.model();
  m.running_cost = [](double, double x, double u, const CouplingFeatures&) {
    return x == 1.0 ? std::numeric_limits<double>::quiet_NaN() : u * u;
  };
  r = validate_model(m, inst.grid, inst.times);
  CHECK_FALSE(r.ok);
  CHECK(r.findings.front().find("running cost") != std::string::npos);

  r = validate_model(inst.model(), inst.grid, TimeGrid(5.0, 101));
  CHECK_FALSE(r.ok);
  CHECK(r.findings.back().find("CFL") != std::string::npos);
}

TEST_CASE("validate_model is deterministic") {
  fixture::FrozenAffine inst;
  const auto m = inst.model();
  CHECK(validate_model(m, inst.grid, TimeGrid(5.0, 101)) == validate_model(m, inst.grid, TimeGrid(5.0, 101)));
}

TEST_CASE("control minimization finds interior and boundary minima") {
  auto r = minimize_on_interval([](double u) { return (u - 0.3183) * (u - 0.3183); }, -1.0, 1.0, 129);
  CHECK(r.argmin == doctest::Approx(0.3183).epsilon(1e-8));
  r = minimize_on_interval([](double u) { return u; }, -2.0, 1.0, 129);
  CHECK(r.argmin == -2.0);
  CHECK_THROWS_AS(minimize_on_interval([](double u) { return u; }, 0.0, 1.0, 2), std::invalid_argument);
}
