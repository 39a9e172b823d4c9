#ifndef PSDC_SWEEPER_HPP
#define PSDC_SWEEPER_HPP

// The SDC iteration engine. One sweep solves
//   u^{k+1} - dt Qd f(u^{k+1}) = u0 1 + dt (Q - Qd) f(u^k)
// node by node: independently for diagonal Qd (optionally on M threads),
// by forward substitution for lower-triangular Qd, and as one coupled Newton
// solve when Qd is dense (Butcher mode with Qd = Q, used for references).
//
// Right-hand-side values are cached per node and refreshed lazily, so the
// rhs_evals / newton_iters counters reflect exactly the work a careful
// implementation has to do.

#include <cmath>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "psdc/precond.hpp"

namespace psdc {

struct Counters {
  long long rhs_evals = 0;
  long long newton_iters = 0;

  Counters& operator+=(const Counters& o) {
    rhs_evals += o.rhs_evals;
    newton_iters += o.newton_iters;
    return *this;
  }
  bool operator==(const Counters&) const = default;
};

struct SweepConfig {
  CollocationSystem colloc;
  Preconditioner precond;
  int sweeps = 1;              // K
  double newton_tol = -1.0;    // negative: use the problem default
  int newton_max = 300;
  bool collocation_update = false;
  int workers = 1;             // 1 or M
};

template <class Scalar>
struct StepState {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<Scalar> u0;
  std::vector<std::vector<Scalar>> u;  // node values
  std::vector<std::vector<Scalar>> f;  // cached f(t_m, u_m)
  std::vector<char> fresh;             // f[m] matches u[m]
  Counters counters;
};

template <class Scalar>
struct Trajectory {
  std::vector<double> t;
  std::vector<std::vector<Scalar>> u;    // step end points, size N+1
  std::vector<Counters> counters_at;     // running totals at each end point
  Counters counters;                     // totals for the whole run
};

namespace detail {

inline bool finite(double x) { return std::isfinite(x); }
inline bool finite(const Complex& x) { return std::isfinite(x.real()) && std::isfinite(x.imag()); }

template <class Scalar>
bool all_finite(const std::vector<Scalar>& v) {
  for (const auto& x : v)
    if (!finite(x)) return false;
  return true;
}

template <class Problem, class Scalar>
void eval_rhs_counted(const Problem& prob, double t, const std::vector<Scalar>& u,
                      std::vector<Scalar>& out, Counters& counters) {
  prob.eval_rhs(t, u, out);
  ++counters.rhs_evals;
}

/// Newton solve of u - a f(t, u) = b starting from the passed iterate.
/// On success f_out holds f(t, u) at the solution.
template <class Problem, class Scalar>
void solve_node_system(const Problem& prob, double t, double a, const std::vector<Scalar>& b,
                       std::vector<Scalar>& u, std::vector<Scalar>& f_out, double tol,
                       int newton_max, Counters& counters) {
  const size_t dim = u.size();
  std::vector<Scalar> g(dim);
  for (int it = 0;; ++it) {
    eval_rhs_counted(prob, t, u, f_out, counters);
    double norm = 0.0;
    for (size_t i = 0; i < dim; ++i) {
      g[i] = u[i] - a * f_out[i] - b[i];
      norm = std::max(norm, std::abs(g[i]));
    }
    if (!all_finite(g)) throw NumericalFailure("node solve diverged (non-finite residual)");
    if (norm <= tol) return;
    if (it >= newton_max)
      throw NumericalFailure("node solve: Newton did not reach tolerance in " +
                             std::to_string(newton_max) + " iterations");
    ++counters.newton_iters;
    prob.solve_shifted(t, a, u, g);  // g := (I - a J)^{-1} g
    for (size_t i = 0; i < dim; ++i) u[i] -= g[i];
  }
}

// Coupled solve of the all-nodes system for dense Qd (collocation mode):
// U_m - dt sum_j Qd(m,j) f(t_j, U_j) = rhs_m for all m simultaneously.
template <class Problem, class Scalar>
void solve_coupled_system(const Problem& prob, double t0, double dt, const std::vector<double>& tau,
                          const DenseMatrix& qd, const std::vector<std::vector<Scalar>>& rhs,
                          std::vector<std::vector<Scalar>>& u, std::vector<std::vector<Scalar>>& f,
                          double tol, int newton_max, Counters& counters) {
  const int m = qd.rows();
  const int dim = static_cast<int>(rhs.front().size());
  const int n = m * dim;
  const auto node_time = [&](int j) { return t0 + dt * tau[static_cast<size_t>(j)]; };

  std::vector<Scalar> g(static_cast<size_t>(n));
  for (int it = 0;; ++it) {
    double norm = 0.0;
    for (int node = 0; node < m; ++node)
      eval_rhs_counted(prob, node_time(node), u[static_cast<size_t>(node)],
                       f[static_cast<size_t>(node)], counters);
    for (int node = 0; node < m; ++node)
      for (int i = 0; i < dim; ++i) {
        Scalar acc = u[static_cast<size_t>(node)][static_cast<size_t>(i)] -
                     rhs[static_cast<size_t>(node)][static_cast<size_t>(i)];
        for (int j = 0; j < m; ++j)
          if (qd(node, j) != 0.0)
            acc -= dt * qd(node, j) * f[static_cast<size_t>(j)][static_cast<size_t>(i)];
        g[static_cast<size_t>(node * dim + i)] = acc;
        norm = std::max(norm, std::abs(acc));
      }
    if (!all_finite(g)) throw NumericalFailure("coupled node solve diverged");
    if (norm <= tol) return;
    if (it >= newton_max) throw NumericalFailure("coupled node solve: Newton cap reached");
    counters.newton_iters += m;

    Matrix<Scalar> jac(n, n);
    for (int j = 0; j < m; ++j) {
      const Matrix<Scalar> block = prob.jacobian(node_time(j), u[static_cast<size_t>(j)]);
      for (int node = 0; node < m; ++node) {
        const double w = qd(node, j);
        for (int r = 0; r < dim; ++r)
          for (int c = 0; c < dim; ++c) {
            Scalar v = -dt * w * block(r, c);
            if (node == j && r == c) v += Scalar(1);
            jac(node * dim + r, j * dim + c) = v;
          }
      }
    }
    const auto delta = solve_dense(jac, g);
    for (int node = 0; node < m; ++node)
      for (int i = 0; i < dim; ++i)
        u[static_cast<size_t>(node)][static_cast<size_t>(i)] -=
            delta[static_cast<size_t>(node * dim + i)];
  }
}

}  // namespace detail

/// One SDC sweep, iteration index k (1-based; selects the MIN-SR-FLEX member).
template <class Problem>
void sweep(StepState<typename Problem::Scalar>& state, const SweepConfig& cfg, const Problem& prob,
           int k) {
  using Scalar = typename Problem::Scalar;
  const DenseMatrix& q = cfg.colloc.q;
  const DenseMatrix& qd = cfg.precond.for_sweep(k);
  const int m = cfg.colloc.size();
  const int dim = static_cast<int>(state.u0.size());
  const double dt = state.dt;
  const double tol = cfg.newton_tol >= 0.0 ? cfg.newton_tol : prob.default_newton_tol();
  const auto t_node = [&](int node) {
    return state.t0 + dt * cfg.colloc.nodes.tau[static_cast<size_t>(node)];
  };

  // refresh the cached f values this sweep actually reads
  std::vector<char> needed(static_cast<size_t>(m), 0);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m && !needed[static_cast<size_t>(j)]; ++i)
      if (q(i, j) != qd(i, j)) needed[static_cast<size_t>(j)] = 1;

  const bool parallel = cfg.workers > 1 && cfg.precond.diagonal;
  auto refresh = [&](int j, Counters& counters) {
    if (needed[static_cast<size_t>(j)] && !state.fresh[static_cast<size_t>(j)]) {
      detail::eval_rhs_counted(prob, t_node(j), state.u[static_cast<size_t>(j)],
                               state.f[static_cast<size_t>(j)], counters);
      state.fresh[static_cast<size_t>(j)] = 1;
    }
  };
  if (parallel) {
    std::vector<Counters> local(static_cast<size_t>(m));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(m));
    for (int j = 0; j < m; ++j)
      pool.emplace_back([&, j] { refresh(j, local[static_cast<size_t>(j)]); });
    for (auto& th : pool) th.join();
    for (int j = 0; j < m; ++j) state.counters += local[static_cast<size_t>(j)];
  } else {
    for (int j = 0; j < m; ++j) refresh(j, state.counters);
  }

  // explicit part of the right-hand side, u0 + dt (Q - Qd) f(u^k); fully
  // assembled from the previous iterate before any node value changes
  std::vector<std::vector<Scalar>> rhs(static_cast<size_t>(m),
                                       std::vector<Scalar>(static_cast<size_t>(dim)));
  for (int node = 0; node < m; ++node) {
    auto& r = rhs[static_cast<size_t>(node)];
    r = state.u0;
    for (int j = 0; j < m; ++j) {
      const double w = q(node, j) - qd(node, j);
      if (w == 0.0) continue;
      const auto& fj = state.f[static_cast<size_t>(j)];
      for (int i = 0; i < dim; ++i) r[static_cast<size_t>(i)] += dt * w * fj[static_cast<size_t>(i)];
    }
  }

  if (!cfg.precond.lower_triangular) {
    detail::solve_coupled_system(prob, state.t0, state.dt, cfg.colloc.nodes.tau, qd, rhs, state.u,
                                 state.f, tol, cfg.newton_max, state.counters);
    for (int node = 0; node < m; ++node) state.fresh[static_cast<size_t>(node)] = 1;
    return;
  }

  auto node_task = [&](int node, Counters& counters) {
    auto& r = rhs[static_cast<size_t>(node)];
    for (int j = 0; j < node; ++j) {
      const double w = qd(node, j);
      if (w == 0.0) continue;  // also keeps the parallel diagonal path race-free
      const auto& fj = state.f[static_cast<size_t>(j)];
      for (int i = 0; i < dim; ++i) r[static_cast<size_t>(i)] += dt * w * fj[static_cast<size_t>(i)];
    }
    const double a = dt * qd(node, node);
    auto& un = state.u[static_cast<size_t>(node)];
    if (a == 0.0) {
      un = r;
      if (!detail::all_finite(un)) throw NumericalFailure("explicit node update diverged");
      state.fresh[static_cast<size_t>(node)] = 0;
    } else {
      detail::solve_node_system(prob, t_node(node), a, r, un, state.f[static_cast<size_t>(node)],
                                tol, cfg.newton_max, counters);
      state.fresh[static_cast<size_t>(node)] = 1;
    }
  };

  if (parallel) {
    std::vector<Counters> local(static_cast<size_t>(m));
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<size_t>(m));
    pool.reserve(static_cast<size_t>(m));
    for (int node = 0; node < m; ++node)
      pool.emplace_back([&, node] {
        try {
          node_task(node, local[static_cast<size_t>(node)]);
        } catch (...) {
          errors[static_cast<size_t>(node)] = std::current_exception();
        }
      });
    for (auto& th : pool) th.join();
    for (int node = 0; node < m; ++node) state.counters += local[static_cast<size_t>(node)];
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  } else {
    // lower-triangular sweep: fold freshly computed nodes into later rows
    for (int node = 0; node < m; ++node) {
      for (int j = 0; j < node; ++j) {
        if (qd(node, j) == 0.0) continue;
        if (!state.fresh[static_cast<size_t>(j)]) {
          detail::eval_rhs_counted(prob, t_node(j), state.u[static_cast<size_t>(j)],
                                   state.f[static_cast<size_t>(j)], state.counters);
          state.fresh[static_cast<size_t>(j)] = 1;
        }
      }
      node_task(node, state.counters);
    }
  }
}

/// One time step of size dt from (t0, u0): K sweeps from the copied initial
/// value, then the u_M read-out or the b-weighted collocation update.
template <class Problem>
std::pair<std::vector<typename Problem::Scalar>, Counters> step(
    double t0, double dt, const std::vector<typename Problem::Scalar>& u0, const SweepConfig& cfg,
    const Problem& prob) {
  using Scalar = typename Problem::Scalar;
  const int m = cfg.colloc.size();
  if (cfg.sweeps < 0) throw InvalidArgument("step: sweep count must be >= 0");
  if (cfg.workers != 1 && cfg.workers != m)
    throw InvalidArgument("step: workers must be 1 or M");

  StepState<Scalar> state;
  state.t0 = t0;
  state.dt = dt;
  state.u0 = u0;
  state.u.assign(static_cast<size_t>(m), u0);
  state.f.assign(static_cast<size_t>(m), std::vector<Scalar>(u0.size()));
  state.fresh.assign(static_cast<size_t>(m), 0);

  for (int k = 1; k <= cfg.sweeps; ++k) sweep(state, cfg, prob, k);

  const bool b_update = cfg.collocation_update || cfg.colloc.butcher;
  std::vector<Scalar> out;
  if (cfg.sweeps == 0) {
    out = u0;
  } else if (b_update) {
    out = u0;
    for (int j = 0; j < m; ++j) {
      if (cfg.colloc.b[static_cast<size_t>(j)] == 0.0) continue;
      if (!state.fresh[static_cast<size_t>(j)]) {
        const double tj = t0 + dt * cfg.colloc.nodes.tau[static_cast<size_t>(j)];
        detail::eval_rhs_counted(prob, tj, state.u[static_cast<size_t>(j)],
                                 state.f[static_cast<size_t>(j)], state.counters);
        state.fresh[static_cast<size_t>(j)] = 1;
      }
      const double w = dt * cfg.colloc.b[static_cast<size_t>(j)];
      for (size_t i = 0; i < out.size(); ++i) out[i] += w * state.f[static_cast<size_t>(j)][i];
    }
  } else {
    if (!cfg.colloc.butcher && cfg.colloc.nodes.tau.back() != 1.0)
      throw InvalidArgument("step: u_M read-out needs tau_M = 1");
    out = state.u.back();
  }
  return {std::move(out), state.counters};
}

/// Uniform steps over [t0, t_end]; the trajectory stores every step end point.
template <class Problem>
Trajectory<typename Problem::Scalar> integrate(const Problem& prob, const SweepConfig& cfg,
                                               double t0, double t_end, int n_steps) {
  using Scalar = typename Problem::Scalar;
  if (n_steps < 1) throw InvalidArgument("integrate: need at least one step");
  const double dt = (t_end - t0) / n_steps;

  Trajectory<Scalar> traj;
  traj.t.reserve(static_cast<size_t>(n_steps) + 1);
  traj.u.reserve(static_cast<size_t>(n_steps) + 1);
  traj.counters_at.reserve(static_cast<size_t>(n_steps) + 1);
  traj.t.push_back(t0);
  traj.u.push_back(prob.initial_value());
  traj.counters_at.push_back({});

  for (int n = 0; n < n_steps; ++n) {
    const double t = t0 + n * dt;
    try {
      auto [next, counters] = step(t, dt, traj.u.back(), cfg, prob);
      traj.counters += counters;
      traj.u.push_back(std::move(next));
      traj.t.push_back(n + 1 == n_steps ? t_end : t + dt);
      traj.counters_at.push_back(traj.counters);
    } catch (const NumericalFailure& e) {
      throw NumericalFailure("integration failed at step " + std::to_string(n + 1) + " (t=" +
                             std::to_string(t) + "): " + e.what());
    }
  }
  return traj;
}

}  // namespace psdc

#endif
