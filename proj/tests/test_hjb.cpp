#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "rsmfg/hjb.hpp"
#include "rsmfg/riccati.hpp"

using namespace rsmfg;

namespace {

fixture::SmallLq small() {
  fixture::SmallLq inst;
  inst.delta = 8.0;
  return inst;
}

double max_abs_diff(const Field& a, const Field& b) {
  double gap = 0.0;
  for (std::size_t k = 0; k < a.values().size(); ++k) gap = std::max(gap, std::abs(a.values()[k] - b.values()[k]));
  return gap;
}

}  // namespace

TEST_CASE("stencils are exact for quadratics, boundaries reuse interior differences") {
  Grid1D g(-1.0, 1.0, 5);
  std::vector<double> row(5);
  for (std::size_t i = 0; i < 5; ++i) row[i] = g.x(i) * g.x(i);
  auto st = stencil_at(row, 2, g.dx());
  CHECK(st.central == doctest::Approx(0.0));
  CHECK(st.forward == doctest::Approx(0.5));
  CHECK(st.backward == doctest::Approx(-0.5));
  CHECK(st.second == doctest::Approx(2.0));
  st = stencil_at(row, 0, g.dx());
  CHECK(st.forward == st.backward);
  CHECK(st.second == doctest::Approx(2.0));
  st = stencil_at(row, 4, g.dx());
  CHECK(st.backward == doctest::Approx(1.5));
  CHECK(st.second == doctest::Approx(2.0));
}

TEST_CASE("constant terminal data with zero cost is preserved") {
  auto inst = small();
  auto m = inst.model();
  m.running_cost = [](double, double, double, const CouplingFeatures&) { return 0.0; };
  m.terminal_cost = [](double) { return 3.25; };
  m.drift = [](double, double x, double u, const CouplingFeatures&) { return u - 0.3 * x; };
  const auto d = frozen_density(m, inst.grid, inst.times);
  const auto v = solve_hjb(m, d, inst.grid, inst.times);
  for (double value : v.values.values()) CHECK(value == 3.25);
}

TEST_CASE("terminal row equals g exactly") {
  auto inst = small();
  const auto m = inst.model();
  const auto d = frozen_density(m, inst.grid, inst.times);
  for (auto mode : {HjbMode::risk_sensitive, HjbMode::risk_neutral, HjbMode::robust}) {
    const auto v = solve_hjb(m, d, inst.grid, inst.times, {kDefaultControlResolution, mode});
    const auto last = v.values.row(inst.times.size() - 1);
    for (std::size_t i = 0; i < inst.grid.size(); ++i) CHECK(last[i] == m.terminal_cost(inst.grid.x(i)));
  }
}

TEST_CASE("LQ value at t = 0 matches the Riccati value") {
  auto inst = small();
  inst.grid = Grid1D(-4.0, 4.0, 161);
  inst.times = TimeGrid(0.5, 401);
  const auto m = inst.model();
  const auto d = frozen_density(m, inst.grid, inst.times);
  const auto v = solve_hjb(m, d, inst.grid, inst.times);
  const auto spec = inst.lq();
  const auto z = solve_riccati_scalar(spec, inst.times);
  for (std::size_t i = 0; i < inst.grid.size(); ++i) {
    if (std::abs(inst.grid.x(i)) > 3.0) continue;
    const double ref = lq_value(spec, z, inst.grid.x(i), 0);
    CHECK(std::abs(v.values.at(0, i) - ref) <= 2e-2 * std::abs(ref));
  }
}

TEST_CASE("huge delta agrees with the risk-neutral solve") {
  auto inst = small();
  inst.delta = 1e8;
  const auto m = inst.model();
  const auto d = frozen_density(m, inst.grid, inst.times);
  const auto rs = solve_hjb(m, d, inst.grid, inst.times);
  const auto rn = solve_hjb(m, d, inst.grid, inst.times, {kDefaultControlResolution, HjbMode::risk_neutral});
  CHECK(max_abs_diff(rs.values, rn.values) <= 1e-4);
}

TEST_CASE("risk-sensitive value dominates the risk-neutral value") {
  auto inst = small();
  const auto m = inst.model();
  const auto d = frozen_density(m, inst.grid, inst.times);
  const auto rs = solve_hjb(m, d, inst.grid, inst.times);
  const auto rn = solve_hjb(m, d, inst.grid, inst.times, {kDefaultControlResolution, HjbMode::risk_neutral});
  for (std::size_t k = 0; k < rs.values.values().size(); ++k) {
    CHECK(rs.values.values()[k] - rn.values.values()[k] >= -1e-12);
  }
}

TEST_CASE("nonnegative data gives a nonnegative value") {
  auto inst = small();
  const auto m = inst.model();
  const auto d = frozen_density(m, inst.grid, inst.times);
  const auto v = solve_hjb(m, d, inst.grid, inst.times);
  for (double value : v.values.values()) CHECK(value >= 0.0);
}

TEST_CASE("value is monotone in terminal data") {
  auto inst = small();
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 4; ++trial) {
    const double a0 = unif(gen), a1 = unif(gen), w = 0.5 + unif(gen), lift = 0.01 + unif(gen);
    auto m1 = inst.model();
    auto m2 = inst.model();
    m1.terminal_cost = [=](double x) { return a0 * x * x + a1 * std::sin(w * x); };
    m2.terminal_cost = [=](double x) { return a0 * x * x + a1 * std::sin(w * x) + lift * (1.0 + std::cos(x)); };
    const auto d = frozen_density(m1, inst.grid, inst.times);
    const auto v1 = solve_hjb(m1, d, inst.grid, inst.times);
    const auto v2 = solve_hjb(m2, d, inst.grid, inst.times);
    for (std::size_t k = 0; k < v1.values.values().size(); ++k) CHECK(v1.values.values()[k] <= v2.values.values()[k]);
  }
}

TEST_CASE("CFL violation is a hard failure") {
  auto inst = small();
  const auto m = inst.model();
  const TimeGrid coarse(0.5, 11);
  const auto d = frozen_density(m, inst.grid, coarse);
  CHECK_THROWS_AS(solve_hjb(m, d, inst.grid, coarse), CflViolation);
}

TEST_CASE("coupling on the wrong grid is rejected") {
  auto inst = small();
  const auto m = inst.model();
  const auto d = frozen_density(m, Grid1D(-4.0, 4.0, 41), inst.times);
  CHECK_THROWS_AS(solve_hjb(m, d, inst.grid, inst.times), DimensionError);
}

TEST_CASE("robust solve with zero data is zero") {
  auto inst = small();
  auto m = inst.model();
  m.running_cost = [](double, double, double u, const CouplingFeatures&) { return 0.0 * u; };
  m.terminal_cost = [](double) { return 0.0; };
  const auto d = frozen_density(m, inst.grid, inst.times);
  const auto r = solve_hji_robust(m, d, inst.grid, inst.times);
  for (double v : r.value.values.values()) CHECK(v == 0.0);
  for (double z : r.disturbance.values()) CHECK(z == 0.0);
}

TEST_CASE("terminal disturbance is sigma g'(x) / (2 rho^2) up to one-sided error") {
  auto inst = small();
  const auto m = inst.model();
  const auto d = frozen_density(m, inst.grid, inst.times);
  const auto r = solve_hji_robust(m, d, inst.grid, inst.times);
  const double rho_sq = m.rho_sq();
  const double dx = inst.grid.dx();
  const std::size_t last = inst.times.size() - 1;
  for (std::size_t i = 1; i + 1 < inst.grid.size(); ++i) {
    const double exact = inst.sigma * 2.0 * inst.Q * inst.grid.x(i) / (2.0 * rho_sq);
    CHECK(std::abs(r.disturbance.at(last, i) - exact) <= inst.sigma * inst.Q * dx / (2.0 * rho_sq) + 1e-6);
  }
}

TEST_CASE("robust and risk-sensitive values are close on the small instance") {
  auto inst = small();
  inst.delta = 100.0;
  const auto m = inst.model();
  const auto d = frozen_density(m, inst.grid, inst.times);
  const auto rs = solve_hjb(m, d, inst.grid, inst.times);
  const auto rb = solve_hji_robust(m, d, inst.grid, inst.times);
  CHECK(max_abs_diff(rs.values, rb.value.values) <= 5e-3);
}

TEST_CASE("feedback of a constant value minimizes the running cost") {
  auto inst = small();
  auto m = inst.model();
  m.terminal_cost = [](double) { return 1.0; };
  m.running_cost = [](double, double, double u, const CouplingFeatures&) { return u * u; };
  const auto d = frozen_density(m, inst.grid, inst.times);
  const auto v = solve_hjb(m, d, inst.grid, inst.times);
  const auto fb = extract_feedback(v, 1.0);
  for (double u : fb.grid_argmin.values()) CHECK(std::abs(u) <= 1e-8);
  for (double u : fb.analytic->values()) CHECK(u == 0.0);
}

TEST_CASE("analytic and grid feedback agree within one control cell") {
  auto inst = small();
  const auto m = inst.model();
  const auto d = frozen_density(m, inst.grid, inst.times);
  const auto v = solve_hjb(m, d, inst.grid, inst.times);
  const auto fb = extract_feedback(v, m.control_gain);
  REQUIRE(fb.analytic);
  const double cell = (m.u_max - m.u_min) / (kDefaultControlResolution - 1);
  for (std::size_t s = 0; s < inst.times.size(); ++s) {
    for (std::size_t i = 1; i + 1 < inst.grid.size(); ++i) {
      CHECK(std::abs(fb.grid_argmin.at(s, i) - fb.analytic->at(s, i)) <= cell);
    }
  }
}

TEST_CASE("grid feedback follows -z(t) x away from the boundary") {
  auto inst = small();
  const auto m = inst.model();
  const auto d = frozen_density(m, inst.grid, inst.times);
  const auto v = solve_hjb(m, d, inst.grid, inst.times);
  const auto z = solve_riccati_scalar(inst.lq(), inst.times);
  for (std::size_t s = 0; s < inst.times.size(); s += 20) {
    for (std::size_t i = 0; i < inst.grid.size(); ++i) {
      const double x = inst.grid.x(i);
      if (std::abs(x) < 0.5 || std::abs(x) > 3.0) continue;
      const double ref = -z.z[s] * x;
      // one-sided differences of z x^2 are off by z dx
      CHECK(std::abs(v.control.at(s, i) - ref) <= 5e-2 * std::abs(ref) + 0.5 * z.z[s] * inst.grid.dx());
    }
  }
}
