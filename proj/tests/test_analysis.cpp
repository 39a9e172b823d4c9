#include <catch2/catch.hpp>

#include <cmath>

#include "psdc/analysis.hpp"

using namespace psdc;

namespace {

StabilityConfig make_stab(PrecondKind kind, int m, int sweeps) {
  StabilityConfig cfg;
  cfg.colloc = make_collocation(NodeFamily::RadauRight, m);
  cfg.precond = build_preconditioner(kind, cfg.colloc);
  cfg.sweeps = sweeps;
  return cfg;
}

double factorial(int k) { return k == 0 ? 1.0 : k * factorial(k - 1); }

}  // namespace

TEST_CASE("stability function is one at the origin", "[analysis]") {
  for (auto kind : {PrecondKind::Pic, PrecondKind::LU, PrecondKind::MinSrS, PrecondKind::MinSrFlex}) {
    const auto cfg = make_stab(kind, 4, 3);
    REQUIRE(std::abs(stability_function(Complex(0.0), cfg) - 1.0) <= 1e-14);
  }
}

TEST_CASE("picard stability equals the truncated exponential", "[analysis]") {
  for (int k = 1; k <= 4; ++k) {
    const auto cfg = make_stab(PrecondKind::Pic, 4, k);
    for (int gi = 0; gi < 10; ++gi)
      for (int gj = 0; gj < 10; ++gj) {
        const Complex z(-3.0 + 0.6 * gi, -3.0 + 0.6 * gj);
        Complex expect(0.0);
        for (int j = 0; j <= k; ++j) expect += std::pow(z, j) / factorial(j);
        REQUIRE(std::abs(stability_function(z, cfg) - expect) <= 1e-12);
      }
  }
}

TEST_CASE("one-node collocation mode is implicit Euler", "[analysis]") {
  StabilityConfig cfg;
  cfg.colloc = make_collocation(NodeFamily::RadauRight, 1);
  cfg.precond = collocation_preconditioner(cfg.colloc);
  cfg.sweeps = 1;
  for (const Complex z : {Complex(-2.0, 0.5), Complex(0.3, -0.4), Complex(-30.0, 10.0)})
    REQUIRE(std::abs(stability_function(z, cfg) - 1.0 / (1.0 - z)) <= 1e-13);
}

TEST_CASE("collocation stability matches the determinant formula", "[analysis]") {
  // with the b-update, R(z) = 1 + z b^T (I - zQ)^{-1} 1, which equals
  // det(I - zQ + z 1 b^T) / det(I - zQ)
  const int m = 4;
  StabilityConfig cfg;
  cfg.colloc = make_collocation(NodeFamily::RadauRight, m);
  cfg.precond = collocation_preconditioner(cfg.colloc);
  cfg.sweeps = 1;
  cfg.collocation_update = true;

  for (int gi = 0; gi < 8; ++gi)
    for (int gj = 0; gj < 8; ++gj) {
      const Complex z(-6.0 + 1.5 * gi, -6.0 + 1.5 * gj);
      ComplexMatrix num = ComplexMatrix::identity(m), den = ComplexMatrix::identity(m);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
          den(i, j) -= z * cfg.colloc.q(i, j);
          num(i, j) -= z * cfg.colloc.q(i, j) - z * cfg.colloc.b[static_cast<size_t>(j)];
        }
      const Complex expect = determinant(num) / determinant(den);
      REQUIRE(std::abs(stability_function(z, cfg) - expect) <= 1e-12 * std::max(1.0, std::abs(expect)));
    }
}

TEST_CASE("stability function commutes with conjugation", "[analysis]") {
  for (auto kind : {PrecondKind::LU, PrecondKind::MinSrNS, PrecondKind::MinSrFlex}) {
    const auto cfg = make_stab(kind, 4, 3);
    for (const Complex z : {Complex(-2.0, 1.3), Complex(-11.0, 7.5), Complex(0.5, 3.0)}) {
      const Complex a = stability_function(z, cfg);
      const Complex b = stability_function(std::conj(z), cfg);
      REQUIRE(std::abs(a - std::conj(b)) <= 1e-12 * std::max(1.0, std::abs(a)));
    }
  }
}

TEST_CASE("poles of the rational function are flagged", "[analysis]") {
  const auto cfg = make_stab(PrecondKind::IEPar, 2, 1);
  // (I - z diag(tau)) singular at z = 1/tau_1
  const Complex pole(1.0 / cfg.colloc.nodes.tau[0], 0.0);
  REQUIRE(std::isinf(std::abs(stability_function(pole, cfg))));
}

TEST_CASE("grid scans are independent of the worker count", "[analysis]") {
  const auto cfg = make_stab(PrecondKind::MinSrNS, 4, 2);
  StabilityGrid g;
  g.nx = 21;
  g.ny = 17;
  const auto serial = scan_stability(cfg, g, 1);
  const auto parallel = scan_stability(cfg, g, 4);
  REQUIRE(serial.abs_r == parallel.abs_r);
}

TEST_CASE("explicit RK4 real-axis stability limit shows up in the picard scan", "[analysis]") {
  const auto cfg = make_stab(PrecondKind::Pic, 4, 4);
  REQUIRE(std::abs(stability_function(Complex(-2.78, 0.0), cfg)) <= 1.0);
  REQUIRE(std::abs(stability_function(Complex(-3.0, 0.0), cfg)) > 1.0);
}

TEST_CASE("order estimation recovers synthetic exponents", "[analysis]") {
  std::vector<std::pair<double, double>> pts;
  for (double dt : {0.1, 0.05, 0.025, 0.0125}) pts.emplace_back(dt, 3.7 * dt * dt);
  REQUIRE(estimate_order(pts) == Approx(2.0).margin(1e-10));

  REQUIRE_THROWS_AS(estimate_order({{0.1, 1.0}, {0.05, 0.5}}), InvalidArgument);
  REQUIRE_THROWS_AS(estimate_order({{0.1, 1e-15}, {0.05, 1e-15}, {0.025, 1e-15}}), InvalidArgument);
}

TEST_CASE("cost model arithmetic", "[analysis]") {
  Counters c;
  c.rhs_evals = 100;
  c.newton_iters = 50;
  REQUIRE(cost_model(c, CostMode::Serial, 4).cost == Approx(150.0));
  REQUIRE(cost_model(c, CostMode::Parallel, 4).cost == Approx(46.875));
  REQUIRE(cost_model(c, CostMode::Serial, 4, ProblemWeight::AllenCahn).cost == Approx(200.0));
  REQUIRE_THROWS_AS(cost_model(c, CostMode::Parallel, 4, ProblemWeight::Standard, false),
                    InvalidArgument);
}

TEST_CASE("stability function agrees with the sweeper on the test equation", "[analysis]") {
  const Complex z(-1.3, 0.8);
  for (auto kind : {PrecondKind::LU, PrecondKind::MinSrS, PrecondKind::MinSrFlex}) {
    const auto cfg = make_stab(kind, 4, 3);
    SweepConfig sweep_cfg;
    sweep_cfg.colloc = cfg.colloc;
    sweep_cfg.precond = cfg.precond;
    sweep_cfg.sweeps = cfg.sweeps;
    const auto prob = dahlquist(z);
    const auto [u, counters] = step(0.0, 1.0, prob.initial_value(), sweep_cfg, prob);
    REQUIRE(std::abs(u[0] - stability_function(z, cfg)) <= 1e-12);
  }
}
