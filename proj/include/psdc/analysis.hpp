#ifndef PSDC_ANALYSIS_HPP
#define PSDC_ANALYSIS_HPP

// Stability-function evaluation and region scanning for SDC configurations,
// convergence-order fits and the operation-count cost model.

#include <limits>
#include <random>
#include <thread>
#include <vector>

#include "psdc/problems.hpp"

namespace psdc {

struct StabilityConfig {
  CollocationSystem colloc;
  Preconditioner precond;
  int sweeps = 1;
  bool collocation_update = false;
};

/// R(z) for the scalar test equation with dt = 1, u0 = 1: K sweeps of
///   (I - z Qd) u^{k+1} = z (Q - Qd) u^k + 1,
/// read out at the last node (or through the b-weighted update). Poles of
/// the rational function are flagged as infinity.
inline Complex stability_function(Complex z, const StabilityConfig& cfg) {
  const int m = cfg.colloc.size();
  std::vector<Complex> u(static_cast<size_t>(m), Complex(1.0));

  for (int k = 1; k <= cfg.sweeps; ++k) {
    const DenseMatrix& qd = cfg.precond.for_sweep(k);
    std::vector<Complex> rhs(static_cast<size_t>(m), Complex(1.0));
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        const double w = cfg.colloc.q(i, j) - qd(i, j);
        if (w != 0.0) rhs[static_cast<size_t>(i)] += z * w * u[static_cast<size_t>(j)];
      }
    ComplexMatrix lhs = ComplexMatrix::identity(m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) lhs(i, j) -= z * qd(i, j);
    try {
      u = solve_dense(lhs, rhs);
    } catch (const NumericalFailure&) {
      const double inf = std::numeric_limits<double>::infinity();
      return {inf, inf};
    }
  }

  if (cfg.sweeps == 0) return Complex(1.0);
  if (cfg.collocation_update || cfg.colloc.butcher) {
    Complex r(1.0);
    for (int j = 0; j < m; ++j) r += z * cfg.colloc.b[static_cast<size_t>(j)] * u[static_cast<size_t>(j)];
    return r;
  }
  return u.back();
}

struct StabilityGrid {
  double re_min = -16.0, re_max = 4.0;
  double im_min = -16.0, im_max = 16.0;
  int nx = 400, ny = 400;
  std::vector<double> abs_r;  // ny rows by nx columns, |R| samples

  double re_at(int i) const { return re_min + (re_max - re_min) * i / (nx - 1); }
  double im_at(int j) const { return im_min + (im_max - im_min) * j / (ny - 1); }
  double sample(int i, int j) const { return abs_r[static_cast<size_t>(j) * nx + i]; }
};

/// Default window used by the stability plots, and the wider one for the
/// stiff preconditioners whose interesting features sit further out.
inline StabilityGrid default_grid() { return {}; }
inline StabilityGrid wide_grid() {
  StabilityGrid g;
  g.re_min = -80.0;
  g.re_max = 20.0;
  g.im_min = -80.0;
  g.im_max = 80.0;
  return g;
}

/// |R| sampled over the grid; rows are distributed over `workers` threads
/// into disjoint slots, so the result does not depend on the thread count.
inline StabilityGrid scan_stability(const StabilityConfig& cfg, StabilityGrid grid,
                                    int workers = 1) {
  if (grid.nx < 2 || grid.ny < 2) throw InvalidArgument("scan_stability: need at least a 2x2 grid");
  grid.abs_r.assign(static_cast<size_t>(grid.nx) * grid.ny, 0.0);

  auto run_rows = [&](int j_begin, int j_end) {
    for (int j = j_begin; j < j_end; ++j)
      for (int i = 0; i < grid.nx; ++i) {
        const Complex z(grid.re_at(i), grid.im_at(j));
        grid.abs_r[static_cast<size_t>(j) * grid.nx + i] = std::abs(stability_function(z, cfg));
      }
  };

  workers = std::max(1, std::min(workers, grid.ny));
  if (workers == 1) {
    run_rows(0, grid.ny);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    const int chunk = (grid.ny + workers - 1) / workers;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back(run_rows, w * chunk, std::min(grid.ny, (w + 1) * chunk));
    for (auto& th : pool) th.join();
  }
  return grid;
}

struct AStabilityReport {
  double max_abs_r = 0.0;
  Complex worst_z;
  long samples = 0;
};

/// Largest |R| over a grid of strictly negative real parts plus log-radius
/// random samples of the open left half-plane. This is evidence, not a
/// proof; the imaginary axis itself is boundary, not half-plane.
inline AStabilityReport check_a_stability(const StabilityConfig& cfg, int nx = 200, int ny = 200,
                                          int n_random = 1000, unsigned seed = 12345) {
  AStabilityReport rep;
  rep.worst_z = Complex(0.0, 0.0);

  const double re_min = -80.0, im_min = -80.0, im_max = 80.0;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const Complex z(re_min * (i + 1) / nx, im_min + (im_max - im_min) * j / (ny - 1));
      const double v = std::abs(stability_function(z, cfg));
      if (v > rep.max_abs_r) {
        rep.max_abs_r = v;
        rep.worst_z = z;
      }
    }
  rep.samples = static_cast<long>(nx) * ny;

  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> log_radius(std::log(1e-3), std::log(1e6));
  std::uniform_real_distribution<double> angle(0.5 * M_PI, 1.5 * M_PI);
  for (int s = 0; s < n_random; ++s) {
    const double r = std::exp(log_radius(rng));
    const double a = angle(rng);
    const Complex z(r * std::cos(a), r * std::sin(a));
    const double v = std::abs(stability_function(z, cfg));
    ++rep.samples;
    if (v > rep.max_abs_r) {
      rep.max_abs_r = v;
      rep.worst_z = z;
    }
  }
  return rep;
}

/// Least-squares slope of log(err) against log(dt).
inline double estimate_order(const std::vector<std::pair<double, double>>& dt_err) {
  if (dt_err.size() < 3) throw InvalidArgument("estimate_order: need at least three points");
  for (const auto& [dt, err] : dt_err)
    if (!(err > 1e-13))
      throw InvalidArgument("estimate_order: errors at the round-off floor, shrink the window");
  return fit_power_law(dt_err).beta;
}

// ---------------------------------------------------------------------------
// Cost model: Newton iterations plus right-hand-side evaluations, the Newton
// count doubled for Allen-Cahn where an iteration is costlier than an
// evaluation; diagonal sweeps divided by M * 0.8 in parallel mode.
// ---------------------------------------------------------------------------

enum class CostMode { Serial, Parallel };
enum class ProblemWeight { Standard, AllenCahn };

struct CostReport {
  long long rhs_evals = 0;
  long long newton_iters = 0;
  CostMode mode = CostMode::Serial;
  int m = 1;
  double parallel_efficiency = 0.8;
  ProblemWeight weight = ProblemWeight::Standard;
  double cost = 0.0;
};

inline CostReport cost_model(const Counters& counters, CostMode mode, int m,
                             ProblemWeight weight = ProblemWeight::Standard,
                             bool diagonal_precond = true) {
  if (mode == CostMode::Parallel && !diagonal_precond)
    throw InvalidArgument("cost_model: parallel mode needs a diagonal preconditioner");
  if (mode == CostMode::Parallel && m < 1) throw InvalidArgument("cost_model: bad node count");

  CostReport rep;
  rep.rhs_evals = counters.rhs_evals;
  rep.newton_iters = counters.newton_iters;
  rep.mode = mode;
  rep.m = m;
  rep.weight = weight;
  const double newton_weight = weight == ProblemWeight::AllenCahn ? 2.0 : 1.0;
  rep.cost = newton_weight * counters.newton_iters + counters.rhs_evals;
  if (mode == CostMode::Parallel) rep.cost /= m * rep.parallel_efficiency;
  return rep;
}

// ---------------------------------------------------------------------------
// Convergence-study driver shared by the CLI and the acceptance suite.
// ---------------------------------------------------------------------------

struct ConvergencePoint {
  double dt = 0.0;
  int n_steps = 0;
  double error = 0.0;
  Counters counters;
};

template <class Problem>
std::vector<ConvergencePoint> convergence_study(const Problem& prob, const SweepConfig& cfg,
                                                double t0, double t_end,
                                                const std::vector<int>& step_counts,
                                                ErrorMetric metric) {
  std::vector<ConvergencePoint> points;
  points.reserve(step_counts.size());
  for (int n : step_counts) {
    const auto traj = integrate(prob, cfg, t0, t_end, n);
    ConvergencePoint p;
    p.dt = (t_end - t0) / n;
    p.n_steps = n;
    p.error = error_metric(traj, prob, metric);
    p.counters = traj.counters;
    points.push_back(p);
  }
  return points;
}

}  // namespace psdc

#endif
