#include <catch2/catch.hpp>

#include <cmath>
#include <random>

#include "psdc/problems.hpp"

using namespace psdc;

namespace {

// directional finite-difference check of J_f against eval_rhs
template <class Problem>
void check_jacobian(const Problem& prob, const std::vector<typename Problem::Scalar>& u, double t) {
  using Scalar = typename Problem::Scalar;
  const int n = prob.dim();
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);

  std::vector<Scalar> dir(static_cast<size_t>(n));
  double scale = 0.0;
  for (int i = 0; i < n; ++i) {
    dir[static_cast<size_t>(i)] = Scalar(dist(rng));
    scale = std::max(scale, std::abs(u[static_cast<size_t>(i)]));
  }
  const double h = 1e-6 * std::max(scale, 1.0);

  std::vector<Scalar> up(u), um(u), fp(static_cast<size_t>(n)), fm(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    up[static_cast<size_t>(i)] += h * dir[static_cast<size_t>(i)];
    um[static_cast<size_t>(i)] -= h * dir[static_cast<size_t>(i)];
  }
  prob.eval_rhs(t, up, fp);
  prob.eval_rhs(t, um, fm);

  const auto jac = prob.jacobian(t, u);
  const auto jd = jac * dir;
  double num = 0.0, den = 0.0;
  for (int i = 0; i < n; ++i) {
    const Scalar fd = (fp[static_cast<size_t>(i)] - fm[static_cast<size_t>(i)]) / (2.0 * h);
    num = std::max(num, std::abs(fd - jd[static_cast<size_t>(i)]));
    den = std::max(den, std::abs(jd[static_cast<size_t>(i)]));
  }
  REQUIRE(num <= 1e-5 * std::max(den, 1.0));
}

}  // namespace

TEST_CASE("dahlquist basics", "[problems]") {
  const auto still = dahlquist(Complex(0.0));
  REQUIRE(std::abs(still.exact(3.7)[0] - 1.0) == 0.0);

  const auto osc = dahlquist(Complex(0.0, 1.0));
  REQUIRE(std::abs(osc.exact(2.0 * M_PI)[0] - 1.0) <= 1e-12);
  REQUIRE(std::abs(std::abs(osc.exact(2.0 * M_PI)[0]) - 1.0) <= 1e-12);

  const auto decay = dahlquist(Complex(-1.0));
  REQUIRE(std::abs(decay.exact(1.0)[0] - std::exp(-1.0)) <= 1e-15);
}

TEST_CASE("lorenz right-hand side at the unit state", "[problems]") {
  const auto prob = lorenz();
  std::vector<double> f(3);
  prob.eval_rhs(0.0, {1.0, 1.0, 1.0}, f);
  REQUIRE(f[0] == 0.0);
  REQUIRE(f[1] == 26.0);
  REQUIRE(f[2] == Approx(1.0 - 8.0 / 3.0));

  const auto j = prob.jacobian(0.0, {1.0, 1.0, 1.0});
  REQUIRE(j(1, 0) == Approx(28.0 - 1.0));  // d ydot / d x = rho - z
}

TEST_CASE("jacobians are consistent with the right-hand sides", "[problems]") {
  check_jacobian(lorenz(), {3.1, -2.2, 17.0}, 0.0);
  check_jacobian(prothero_robinson(1e-3), {0.7}, 0.4);
  check_jacobian(dahlquist(Complex(0.3, -1.2)), {Complex(0.4, 0.2)}, 0.0);
  const auto ac = allen_cahn_1d(0.04, 0.04, 127);
  check_jacobian(ac, ac.exact(0.0), 0.0);
}

TEST_CASE("prothero-robinson sits on the manifold", "[problems]") {
  const auto prob = prothero_robinson(1e-3);
  std::vector<double> f(1);
  for (double t : {0.0, 0.3, 2.0}) {
    prob.eval_rhs(t, {std::cos(t)}, f);
    REQUIRE(f[0] == Approx(-std::sin(t)).margin(1e-9));
  }
  REQUIRE(prob.initial_value()[0] == 1.0);
  REQUIRE(prob.exact(1.7)[0] == Approx(std::cos(1.7)));
  REQUIRE(std::abs(prob.jacobian(0.0, {1.0})(0, 0)) == Approx(1.0 / 1e-3));
  REQUIRE_THROWS_AS(prothero_robinson(-1.0), InvalidArgument);
}

TEST_CASE("allen-cahn reaction terms at constant states", "[problems]") {
  const auto prob = allen_cahn_1d(0.04, 0.05, 255);
  const int n = prob.dim();
  std::vector<double> f(static_cast<size_t>(n));

  // u = 0: the cubic and the drive vanish, only boundary coupling remains
  prob.eval_rhs(0.0, std::vector<double>(static_cast<size_t>(n), 0.0), f);
  for (int i = 2; i < n - 2; ++i) REQUIRE(f[static_cast<size_t>(i)] == 0.0);
  REQUIRE(f[static_cast<size_t>(n - 1)] != 0.0);  // right boundary feeds in the profile value

  // u = 1/2: cubic vanishes, drive gives -6 d_w /4 = -1.5 d_w away from the ends
  prob.eval_rhs(0.0, std::vector<double>(static_cast<size_t>(n), 0.5), f);
  for (int i = 2; i < n - 2; ++i) REQUIRE(f[static_cast<size_t>(i)] == Approx(-1.5 * 0.05).margin(1e-12));
}

TEST_CASE("allen-cahn spatial operator converges at second order on the wave", "[problems]") {
  // exact profile: du/dt = -v w'(x - v t); the discrete operator should
  // reproduce it to O(dx^2)
  std::vector<double> errs;
  for (int n : {127, 255, 511}) {
    const auto prob = allen_cahn_1d(0.04, 0.04, n);
    const double t = 0.7;
    const auto u = prob.exact(t);
    std::vector<double> f(static_cast<size_t>(n));
    prob.eval_rhs(t, u, f);
    const double v = prob.wave_speed();
    double err = 0.0;
    for (int i = 0; i < n; ++i) {
      const double y = (prob.grid_x(i) - v * t) / (std::sqrt(2.0) * 0.04);
      const double sech = 1.0 / std::cosh(y);
      const double dudt = -v * 0.5 * sech * sech / (std::sqrt(2.0) * 0.04);
      err = std::max(err, std::abs(f[static_cast<size_t>(i)] - dudt));
    }
    errs.push_back(err);
  }
  const double order1 = std::log2(errs[0] / errs[1]);
  const double order2 = std::log2(errs[1] / errs[2]);
  REQUIRE(order1 >= 1.8);
  REQUIRE(order2 >= 1.8);
}

TEST_CASE("lorenz reference is Richardson-consistent", "[problems]") {
  const auto prob = lorenz();
  prob.prepare_reference(LorenzProblem::kDefaultTEnd, 4096);
  const auto coarse = prob.exact(LorenzProblem::kDefaultTEnd);
  const auto fine = prob.reference_run(LorenzProblem::kDefaultTEnd, 8192).back();
  for (int i = 0; i < 3; ++i)
    REQUIRE(std::abs(coarse[static_cast<size_t>(i)] - fine[static_cast<size_t>(i)]) < 1e-10);
}

TEST_CASE("error metrics on synthetic data", "[problems]") {
  const auto prob = prothero_robinson(1e-3);
  Trajectory<double> traj;
  for (int n = 0; n <= 10; ++n) {
    const double t = 0.1 * n;
    traj.t.push_back(t);
    traj.u.push_back(prob.exact(t));
  }
  REQUIRE(error_metric(traj, prob, ErrorMetric::LinfTrajectory) == 0.0);
  REQUIRE(error_metric(traj, prob, ErrorMetric::L2Final) == 0.0);

  const double offset = 1e-3;
  const auto ac = allen_cahn_1d(0.04, 0.04, 255);
  Trajectory<double> shifted;
  shifted.t.push_back(0.0);
  auto u0 = ac.exact(0.0);
  for (auto& v : u0) v += offset;
  shifted.u.push_back(u0);
  const double l2 = error_metric(shifted, ac, ErrorMetric::L2Final);
  REQUIRE(l2 == Approx(offset * std::sqrt(255.0 * ac.cell_width())).margin(1e-12));
}

TEST_CASE("explicit Euler halves its error with the step size", "[problems]") {
  ButcherTableau t;
  t.name = "euler";
  t.a = DenseMatrix(1, 1);
  t.b = {1.0};
  t.c = {0.0};
  const auto [sys, pre] = butcher_preconditioner(t);
  SweepConfig cfg;
  cfg.colloc = sys;
  cfg.precond = pre;
  cfg.sweeps = 1;

  const auto prob = dahlquist(Complex(0.0, 1.0));
  const double t_end = 2.0 * M_PI;
  const auto e1 = error_metric(integrate(prob, cfg, 0.0, t_end, 512), prob, ErrorMetric::LinfTrajectory);
  const auto e2 = error_metric(integrate(prob, cfg, 0.0, t_end, 1024), prob, ErrorMetric::LinfTrajectory);
  REQUIRE(e1 / e2 == Approx(2.0).epsilon(0.05));
}
