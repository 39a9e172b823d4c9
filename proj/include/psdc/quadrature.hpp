#ifndef PSDC_QUADRATURE_HPP
#define PSDC_QUADRATURE_HPP

// Collocation nodes from a Legendre distribution (Radau-Right and Lobatto
// families), the collocation matrix Q of integrated Lagrange polynomials and
// the end-point quadrature weights b.

#include <cmath>
#include <string>
#include <vector>

#include "psdc/linalg.hpp"

namespace psdc {

enum class NodeFamily { RadauRight, Lobatto };

inline std::string family_name(NodeFamily f) {
  return f == NodeFamily::RadauRight ? "radau-right" : "lobatto";
}

inline NodeFamily family_from_string(const std::string& s) {
  if (s == "radau-right" || s == "radau_right" || s == "radauright") return NodeFamily::RadauRight;
  if (s == "lobatto") return NodeFamily::Lobatto;
  throw InvalidArgument("unknown node family '" + s + "'");
}

struct NodeSet {
  NodeFamily family = NodeFamily::RadauRight;
  int count = 0;
  std::vector<double> tau;  // strictly increasing, tau.back() == 1
};

struct CollocationSystem {
  NodeSet nodes;
  DenseMatrix q;           // M x M, entries int_0^tau_i l_j(s) ds
  std::vector<double> b;   // end-point weights, int_0^1 l_j(s) ds
  bool butcher = false;    // true when built from a Butcher tableau

  int size() const { return static_cast<int>(nodes.tau.size()); }
};

namespace detail {

// Legendre P_n(x) and P_{n-1}(x) through the three-term recurrence.
inline std::pair<double, double> legendre_pair(int n, double x) {
  double p0 = 1.0, p1 = x;
  if (n == 0) return {1.0, 0.0};
  for (int k = 1; k < n; ++k) {
    const double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
    p0 = p1;
    p1 = p2;
  }
  return {p1, p0};
}

inline double legendre(int n, double x) { return legendre_pair(n, x).first; }

// Derivative for |x| < 1.
inline double legendre_deriv(int n, double x) {
  if (n == 0) return 0.0;
  const auto [pn, pn1] = legendre_pair(n, x);
  return n * (x * pn - pn1) / (x * x - 1.0);
}

// All roots of a function known to have `expected` simple roots inside
// (-1, 1): bracket on a fine grid, bisect, then polish with Newton.
template <class F, class DF>
std::vector<double> interior_roots(const F& f, const DF& df, int expected) {
  std::vector<double> roots;
  if (expected == 0) return roots;
  const auto sign_of = [](double v) { return (v > 0.0) - (v < 0.0); };
  const int cells = 4096;
  const double a = -1.0 + 1e-12, b = 1.0 - 1e-12;
  double xl = a, fl = f(a);
  int sl = sign_of(fl);
  for (int c = 1; c <= cells; ++c) {
    const double xr = a + (b - a) * c / cells;
    const double fr = f(xr);
    const int sr = sign_of(fr);
    if (sr == 0) {
      roots.push_back(xr);
    } else if (sl * sr < 0) {
      double lo = xl, hi = xr, flo = fl;
      for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) {
          lo = hi = mid;
          break;
        }
        if (flo * fm < 0.0) {
          hi = mid;
        } else {
          lo = mid;
          flo = fm;
        }
      }
      double x = 0.5 * (lo + hi);
      for (int it = 0; it < 3; ++it) {
        const double d = df(x);
        if (d == 0.0) break;
        const double step = f(x) / d;
        if (!std::isfinite(step) || std::abs(step) > 1e-6) break;
        x -= step;
      }
      roots.push_back(x);
    }
    xl = xr;
    fl = fr;
    sl = sr;
  }
  if (static_cast<int>(roots.size()) != expected)
    throw NumericalFailure("node computation: root count mismatch");
  return roots;
}

// Gauss-Legendre rule on [0, 1].
inline void gauss_rule_01(int n, std::vector<double>& x, std::vector<double>& w) {
  const auto roots = interior_roots([n](double t) { return legendre(n, t); },
                                    [n](double t) { return legendre_deriv(n, t); }, n);
  x.resize(static_cast<size_t>(n));
  w.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double r = roots[static_cast<size_t>(i)];
    const double d = legendre_deriv(n, r);
    x[static_cast<size_t>(i)] = 0.5 * (r + 1.0);
    w[static_cast<size_t>(i)] = 1.0 / ((1.0 - r * r) * d * d);
  }
}

}  // namespace detail

inline NodeSet make_nodes(NodeFamily family, int m) {
  if (m < 1 || m > 16) throw InvalidArgument("make_nodes: M must be in [1, 16]");
  NodeSet ns;
  ns.family = family;
  ns.count = m;

  std::vector<double> x;
  if (family == NodeFamily::RadauRight) {
    // interior roots of P_{M-1} - P_M, right end point appended
    x = detail::interior_roots(
        [m](double t) { return detail::legendre(m - 1, t) - detail::legendre(m, t); },
        [m](double t) { return detail::legendre_deriv(m - 1, t) - detail::legendre_deriv(m, t); },
        m - 1);
    x.push_back(1.0);
  } else {
    if (m < 2) throw InvalidArgument("make_nodes: Lobatto needs M >= 2");
    x = detail::interior_roots(
        [m](double t) { return detail::legendre_deriv(m - 1, t); },
        [m](double t) {
          // derivative of P'_{M-1} from the Legendre ODE
          const double p = detail::legendre(m - 1, t);
          const double dp = detail::legendre_deriv(m - 1, t);
          return (2.0 * t * dp - (m - 1.0) * m * p) / (1.0 - t * t);
        },
        m - 2);
    x.insert(x.begin(), -1.0);
    x.push_back(1.0);
  }

  ns.tau.resize(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i) ns.tau[static_cast<size_t>(i)] = 0.5 * (x[static_cast<size_t>(i)] + 1.0);
  ns.tau.back() = 1.0;
  if (family == NodeFamily::Lobatto) ns.tau.front() = 0.0;

  for (int i = 1; i < m; ++i)
    if (!(ns.tau[static_cast<size_t>(i)] > ns.tau[static_cast<size_t>(i - 1)]))
      throw NumericalFailure("make_nodes: nodes not strictly increasing");
  if (family == NodeFamily::RadauRight && !(ns.tau.front() > 0.0))
    throw NumericalFailure("make_nodes: Radau-Right first node must be positive");
  return ns;
}

inline CollocationSystem make_collocation(const NodeSet& nodes) {
  const int m = static_cast<int>(nodes.tau.size());
  CollocationSystem sys;
  sys.nodes = nodes;
  sys.q = DenseMatrix(m, m);
  sys.b.assign(static_cast<size_t>(m), 0.0);

  // barycentric weights of the node polynomial
  std::vector<double> bw(static_cast<size_t>(m), 1.0);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i)
      if (i != j) bw[static_cast<size_t>(j)] /= nodes.tau[static_cast<size_t>(j)] - nodes.tau[static_cast<size_t>(i)];

  auto lagrange = [&](int j, double s) {
    double p = bw[static_cast<size_t>(j)];
    for (int i = 0; i < m; ++i)
      if (i != j) p *= s - nodes.tau[static_cast<size_t>(i)];
    return p;
  };

  // Gauss rule exact for the degree M-1 basis polynomials
  std::vector<double> gx, gw;
  detail::gauss_rule_01((m + 2) / 2, gx, gw);

  auto integrate_to = [&](int j, double upper) {
    double s = 0.0;
    for (size_t g = 0; g < gx.size(); ++g) s += gw[g] * lagrange(j, upper * gx[g]);
    return upper * s;
  };

  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) sys.q(i, j) = integrate_to(j, nodes.tau[static_cast<size_t>(i)]);
  for (int j = 0; j < m; ++j) sys.b[static_cast<size_t>(j)] = integrate_to(j, 1.0);
  return sys;
}

inline CollocationSystem make_collocation(NodeFamily family, int m) {
  return make_collocation(make_nodes(family, m));
}

// Butcher-tableau view: Q = A, weights = b, node vector = c. Stage abscissae
// may repeat, so none of the NodeSet invariants are enforced here.
inline CollocationSystem collocation_from_butcher(const DenseMatrix& a, const std::vector<double>& b,
                                                  const std::vector<double>& c) {
  if (!a.square() || a.rows() != static_cast<int>(b.size()) || b.size() != c.size())
    throw InvalidArgument("collocation_from_butcher: inconsistent tableau sizes");
  CollocationSystem sys;
  sys.nodes.family = NodeFamily::RadauRight;
  sys.nodes.count = a.rows();
  sys.nodes.tau = c;
  sys.q = a;
  sys.b = b;
  sys.butcher = true;
  return sys;
}

/// Largest degree p such that sum_i b_i tau_i^k = 1/(k+1) for all k <= p.
inline int node_quadrature_exactness(const CollocationSystem& sys) {
  const int m = sys.size();
  int degree = -1;
  for (int k = 0; k <= 2 * m + 2; ++k) {
    double s = 0.0;
    for (int j = 0; j < m; ++j)
      s += sys.b[static_cast<size_t>(j)] * std::pow(sys.nodes.tau[static_cast<size_t>(j)], k);
    if (std::abs(s - 1.0 / (k + 1.0)) > 1e-12) break;
    degree = k;
  }
  return degree;
}

// ---------------------------------------------------------------------------
// Zero-first-node reduction. When tau_1 = 0 the first node value equals the
// initial value, so the collocation problem restricted to the remaining
// nodes uses the trailing (M-1) x (M-1) block of Q. Diagonal coefficient
// vectors built on the reduced system get a leading zero prepended.
// ---------------------------------------------------------------------------

struct ZeroNodeReduction {
  CollocationSystem reduced;

  std::vector<double> embed(const std::vector<double>& reduced_diag) const {
    std::vector<double> full;
    full.reserve(reduced_diag.size() + 1);
    full.push_back(0.0);
    full.insert(full.end(), reduced_diag.begin(), reduced_diag.end());
    return full;
  }
};

inline ZeroNodeReduction reduce_zero_node(const CollocationSystem& sys) {
  if (!(sys.nodes.tau.front() == 0.0))
    throw InvalidArgument("reduce_zero_node: first node must be zero");
  const int m = sys.size();
  if (m < 2) throw InvalidArgument("reduce_zero_node: need at least two nodes");

  ZeroNodeReduction red;
  red.reduced.nodes.family = sys.nodes.family;
  red.reduced.nodes.count = m - 1;
  red.reduced.nodes.tau.assign(sys.nodes.tau.begin() + 1, sys.nodes.tau.end());
  red.reduced.q = DenseMatrix(m - 1, m - 1);
  for (int i = 1; i < m; ++i)
    for (int j = 1; j < m; ++j) red.reduced.q(i - 1, j - 1) = sys.q(i, j);
  red.reduced.b.assign(sys.b.begin() + 1, sys.b.end());
  return red;
}

}  // namespace psdc

#endif
