#ifndef PSDC_OPTIMIZE_HPP
#define PSDC_OPTIMIZE_HPP

// Diagonal coefficients for the stiff limit: the determinant-residual system
// whose root makes I - Qd^{-1} Q nilpotent, a damped Newton solver for it and
// the power-law continuation that walks the node count up one at a time.

#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include "psdc/quadrature.hpp"

namespace psdc {

/// F_i(d) = det[(1 - tau_i) I + tau_i diag(d)^{-1} Q] - 1 for every node.
/// The residual is a degree-M polynomial in t sampled at the nodes; together
/// with the root it always has at t = 0 this pins all M+1 coefficients.
inline std::vector<double> min_sr_s_residual(const std::vector<double>& d,
                                             const CollocationSystem& sys) {
  const int m = sys.size();
  if (static_cast<int>(d.size()) != m)
    throw InvalidArgument("min_sr_s_residual: coefficient count must match node count");
  for (double v : d)
    if (!(v > 0.0)) throw InvalidArgument("min_sr_s_residual: coefficients must be positive");

  std::vector<double> f(static_cast<size_t>(m));
  DenseMatrix a(m, m);
  for (int i = 0; i < m; ++i) {
    const double t = sys.nodes.tau[static_cast<size_t>(i)];
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c)
        a(r, c) = (r == c ? 1.0 - t : 0.0) + t * sys.q(r, c) / d[static_cast<size_t>(r)];
    f[static_cast<size_t>(i)] = determinant(a) - 1.0;
  }
  return f;
}

struct MinSrSSolve {
  std::vector<double> d;
  double residual_norm = 0.0;
  bool converged = false;  // residual norm <= 1e-11
  bool ordered = false;    // strictly increasing coefficients
  int iterations = 0;
};

/// Damped Newton with a forward-difference Jacobian on the determinant
/// residual. Keeps the best iterate seen; convergence is declared on
/// ||F||_inf <= 1e-11 but the iteration polishes further while it can, which
/// pushes rho(K_S) of the result down to the eigenvalue floor.
inline MinSrSSolve solve_min_sr_s(const CollocationSystem& sys, std::vector<double> guess) {
  const int m = sys.size();
  if (static_cast<int>(guess.size()) != m) throw InvalidArgument("solve_min_sr_s: bad guess length");
  for (double v : guess)
    if (!(v > 0.0)) throw InvalidArgument("solve_min_sr_s: guess must be positive");

  const double accept_tol = 1e-11;
  const double polish_tol = 1e-15;
  const int max_iter = 200;

  MinSrSSolve out;
  std::vector<double> d = std::move(guess);
  std::vector<double> f = min_sr_s_residual(d, sys);
  out.d = d;
  out.residual_norm = inf_norm(f);

  for (int it = 0; it < max_iter; ++it) {
    const double fnorm = inf_norm(f);
    if (fnorm < out.residual_norm) {
      out.residual_norm = fnorm;
      out.d = d;
    }
    if (fnorm <= polish_tol) break;
    out.iterations = it + 1;

    DenseMatrix jac(m, m);
    for (int j = 0; j < m; ++j) {
      const double h = 1e-7 * std::max(std::abs(d[static_cast<size_t>(j)]), 1.0);
      std::vector<double> dp = d;
      dp[static_cast<size_t>(j)] += h;
      const auto fp = min_sr_s_residual(dp, sys);
      for (int i = 0; i < m; ++i) jac(i, j) = (fp[static_cast<size_t>(i)] - f[static_cast<size_t>(i)]) / h;
    }
    std::vector<double> step;
    try {
      step = solve_dense(jac, f);
    } catch (const NumericalFailure&) {
      break;  // singular Jacobian, keep best iterate
    }

    bool accepted = false;
    double lambda = 1.0;
    for (int half = 0; half <= 30; ++half, lambda *= 0.5) {
      std::vector<double> dn(static_cast<size_t>(m));
      bool positive = true;
      for (int i = 0; i < m; ++i) {
        dn[static_cast<size_t>(i)] = d[static_cast<size_t>(i)] - lambda * step[static_cast<size_t>(i)];
        positive = positive && dn[static_cast<size_t>(i)] > 0.0;
      }
      if (!positive) continue;
      const auto fn = min_sr_s_residual(dn, sys);
      if (inf_norm(fn) < fnorm) {
        d = std::move(dn);
        f = fn;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;  // no descent left at this scale
  }

  out.ordered = true;
  for (size_t i = 1; i < out.d.size(); ++i)
    if (!(out.d[i] > out.d[i - 1])) out.ordered = false;
  out.converged = out.residual_norm <= accept_tol;
  return out;
}

struct MinSrSCoefficients {
  std::vector<double> d;        // full-length diagonal; leading 0 for Lobatto
  double rho_stiff = 0.0;       // rho(K_S) of the (reduced) system
  double residual_norm = 0.0;
};

/// rho(Q - Q_delta), the non-stiff limit of the SDC iteration matrix.
inline double spectral_radius_nonstiff(const DenseMatrix& q_delta, const CollocationSystem& sys) {
  return spectral_radius(sys.q - q_delta);
}

/// rho(I - Q_delta^{-1} Q), the stiff limit. Kinds with a zero first
/// coefficient on a zero first node are evaluated on the reduced system.
inline double spectral_radius_stiff(const DenseMatrix& q_delta, const CollocationSystem& sys) {
  const int m = sys.size();
  DenseMatrix qd = q_delta;
  DenseMatrix q = sys.q;
  if (qd(0, 0) == 0.0) {
    if (!(sys.nodes.tau.front() == 0.0))
      throw NumericalFailure("spectral_radius_stiff: singular preconditioner without zero-node reduction");
    const auto red = reduce_zero_node(sys);
    q = red.reduced.q;
    DenseMatrix sub(m - 1, m - 1);
    for (int i = 1; i < m; ++i)
      for (int j = 1; j < m; ++j) sub(i - 1, j - 1) = q_delta(i, j);
    qd = sub;
  }
  const auto lu = lu_decompose(qd);
  if (lu.singular) throw NumericalFailure("spectral_radius_stiff: singular preconditioner");
  const int n = q.rows();
  DenseMatrix k = DenseMatrix::identity(n);
  std::vector<double> col(static_cast<size_t>(n));
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) col[static_cast<size_t>(i)] = q(i, j);
    const auto x = lu_solve(lu, col);
    for (int i = 0; i < n; ++i) k(i, j) -= x[static_cast<size_t>(i)];
  }
  return spectral_radius(k);
}

namespace detail {

// One continuation ladder on systems whose nodes are all positive (for
// Lobatto these are the reduced systems). Results are cached per family so
// repeated lookups and the k > M tail of MIN-SR-FLEX stay cheap.
inline MinSrSSolve continuation_step(const CollocationSystem& sys,
                                     const std::vector<double>& prev_tau,
                                     const std::vector<double>& prev_d) {
  const int m = sys.size();
  std::vector<double> guess(static_cast<size_t>(m));
  if (m == 1) {
    guess[0] = std::max(sys.q(0, 0), 1e-3);
  } else if (prev_d.empty()) {
    // MIN-SR-NS values seed the smallest genuine system
    for (int i = 0; i < m; ++i) guess[static_cast<size_t>(i)] = sys.nodes.tau[static_cast<size_t>(i)] / m;
  } else {
    std::vector<std::pair<double, double>> pts;
    pts.reserve(prev_d.size());
    const double mprev = static_cast<double>(prev_d.size());
    for (size_t i = 0; i < prev_d.size(); ++i) pts.emplace_back(prev_tau[i], mprev * prev_d[i]);
    const PowerFit fit = fit_power_law(pts);
    for (int i = 0; i < m; ++i)
      guess[static_cast<size_t>(i)] = fit.evaluate(sys.nodes.tau[static_cast<size_t>(i)]) / m;
  }
  return solve_min_sr_s(sys, guess);
}

}  // namespace detail

/// MIN-SR-S diagonal for (family, M), via incremental power-law continuation
/// in the node count. Deterministic and memoized; throws NumericalFailure
/// naming the node count at which the ladder broke down.
inline const MinSrSCoefficients& min_sr_s_coefficients(NodeFamily family, int m) {
  if (m < 1 || m > 16) throw InvalidArgument("min_sr_s_coefficients: M must be in [1, 16]");
  if (family == NodeFamily::Lobatto && m < 2)
    throw InvalidArgument("min_sr_s_coefficients: Lobatto needs M >= 2");

  static std::map<std::pair<NodeFamily, int>, MinSrSCoefficients> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);

  const auto key = std::make_pair(family, m);
  if (auto it = cache.find(key); it != cache.end()) return it->second;

  // ladder of strictly positive-node systems up to the requested size
  const bool lobatto = family == NodeFamily::Lobatto;
  const int top_size = lobatto ? m - 1 : m;
  std::vector<double> prev_tau, prev_d;
  MinSrSSolve solve;
  CollocationSystem sys;
  for (int size = std::min(top_size, 2); size <= top_size; ++size) {
    const int full_m = lobatto ? size + 1 : size;
    const CollocationSystem full = make_collocation(family, full_m);
    sys = lobatto ? reduce_zero_node(full).reduced : full;
    solve = detail::continuation_step(sys, prev_tau, prev_d);
    if (!solve.converged || !solve.ordered)
      throw NumericalFailure("min_sr_s_coefficients: solve failed at M=" + std::to_string(full_m) +
                             (solve.converged ? " (unordered solution)" : " (no convergence)"));
    prev_tau = sys.nodes.tau;
    prev_d = solve.d;
  }

  MinSrSCoefficients entry;
  entry.residual_norm = solve.residual_norm;
  entry.d = lobatto ? std::vector<double>{} : solve.d;
  if (lobatto) {
    entry.d.reserve(static_cast<size_t>(m));
    entry.d.push_back(0.0);
    entry.d.insert(entry.d.end(), solve.d.begin(), solve.d.end());
  }
  entry.rho_stiff = spectral_radius_stiff(DenseMatrix::diagonal(solve.d), sys);
  return cache.emplace(key, std::move(entry)).first->second;
}

}  // namespace psdc

#endif
