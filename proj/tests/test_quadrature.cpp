#include <catch2/catch.hpp>

#include <cmath>
#include <functional>
#include <vector>

#include "psdc/quadrature.hpp"

using namespace psdc;

namespace {

// Test-local Legendre evaluation and plain bisection, kept independent of the
// library's Newton-polished path.
double legendre_ref(int n, double x) {
  double p0 = 1.0, p1 = x;
  if (n == 0) return p0;
  for (int k = 1; k < n; ++k) {
    const double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

double legendre_deriv_ref(int n, double x) {
  return n * (x * legendre_ref(n, x) - legendre_ref(n - 1, x)) / (x * x - 1.0);
}

std::vector<double> bisect_roots(const std::function<double(double)>& f, int expected) {
  std::vector<double> roots;
  const auto sign_of = [](double v) { return (v > 0.0) - (v < 0.0); };
  const int cells = 20000;
  double xl = -1.0 + 1e-12, fl = f(xl);
  int sl = sign_of(fl);
  for (int c = 1; c <= cells; ++c) {
    const double xr = -1.0 + 2.0 * c / cells;
    const double fr = f(std::min(xr, 1.0 - 1e-12));
    const int sr = sign_of(fr);
    if (sr == 0) {
      roots.push_back(xr);
    } else if (sl * sr < 0) {
      double lo = xl, hi = xr, flo = fl;
      for (int it = 0; it < 120; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (flo * fm <= 0.0)
          hi = mid;
        else {
          lo = mid;
          flo = fm;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    xl = xr;
    fl = fr;
    sl = sr;
  }
  REQUIRE(static_cast<int>(roots.size()) == expected);
  return roots;
}

}  // namespace

TEST_CASE("single Radau-Right node is the right end point", "[quadrature]") {
  const auto ns = make_nodes(NodeFamily::RadauRight, 1);
  REQUIRE(ns.tau.size() == 1);
  REQUIRE(ns.tau[0] == 1.0);
}

TEST_CASE("two Lobatto nodes are the end points", "[quadrature]") {
  const auto ns = make_nodes(NodeFamily::Lobatto, 2);
  REQUIRE(ns.tau[0] == 0.0);
  REQUIRE(ns.tau[1] == 1.0);
}

TEST_CASE("M=2 Radau-Right nodes are {1/3, 1}", "[quadrature]") {
  const auto ns = make_nodes(NodeFamily::RadauRight, 2);
  REQUIRE(ns.tau[0] == Approx(1.0 / 3.0).margin(1e-14));
  REQUIRE(ns.tau[1] == 1.0);
}

TEST_CASE("M=3 Lobatto nodes are {0, 1/2, 1}", "[quadrature]") {
  const auto ns = make_nodes(NodeFamily::Lobatto, 3);
  REQUIRE(ns.tau[0] == 0.0);
  REQUIRE(ns.tau[1] == Approx(0.5).margin(1e-14));
  REQUIRE(ns.tau[2] == 1.0);
}

TEST_CASE("unsupported family and size combinations are rejected", "[quadrature]") {
  REQUIRE_THROWS_AS(make_nodes(NodeFamily::Lobatto, 1), InvalidArgument);
  REQUIRE_THROWS_AS(make_nodes(NodeFamily::RadauRight, 0), InvalidArgument);
  REQUIRE_THROWS_AS(make_nodes(NodeFamily::RadauRight, 17), InvalidArgument);
}

TEST_CASE("nodes agree with a high-precision bisection oracle", "[quadrature]") {
  for (int m = 2; m <= 10; ++m) {
    const auto radau = make_nodes(NodeFamily::RadauRight, m);
    const auto rr = bisect_roots(
        [m](double x) { return legendre_ref(m - 1, x) - legendre_ref(m, x); }, m - 1);
    for (int i = 0; i < m - 1; ++i)
      REQUIRE(radau.tau[static_cast<size_t>(i)] == Approx(0.5 * (rr[static_cast<size_t>(i)] + 1.0)).margin(1e-13));

    if (m >= 3) {
      const auto lob = make_nodes(NodeFamily::Lobatto, m);
      const auto lr = bisect_roots([m](double x) { return legendre_deriv_ref(m - 1, x); }, m - 2);
      for (int i = 0; i < m - 2; ++i)
        REQUIRE(lob.tau[static_cast<size_t>(i + 1)] == Approx(0.5 * (lr[static_cast<size_t>(i)] + 1.0)).margin(1e-13));
    }
  }
}

TEST_CASE("M=1 Radau-Right collocation is the implicit Euler tableau", "[quadrature]") {
  const auto sys = make_collocation(NodeFamily::RadauRight, 1);
  REQUIRE(sys.q(0, 0) == Approx(1.0).margin(1e-14));
  REQUIRE(sys.b[0] == Approx(1.0).margin(1e-14));
}

TEST_CASE("M=2 Radau-Right collocation matrix matches the closed form", "[quadrature]") {
  const auto sys = make_collocation(NodeFamily::RadauRight, 2);
  REQUIRE(sys.q(0, 0) == Approx(5.0 / 12.0).margin(1e-14));
  REQUIRE(sys.q(0, 1) == Approx(-1.0 / 12.0).margin(1e-14));
  REQUIRE(sys.q(1, 0) == Approx(3.0 / 4.0).margin(1e-14));
  REQUIRE(sys.q(1, 1) == Approx(1.0 / 4.0).margin(1e-14));
  REQUIRE(sys.b[0] == Approx(3.0 / 4.0).margin(1e-14));
  REQUIRE(sys.b[1] == Approx(1.0 / 4.0).margin(1e-14));
}

TEST_CASE("Q integrates monomials exactly up to degree M-1", "[quadrature]") {
  for (NodeFamily fam : {NodeFamily::RadauRight, NodeFamily::Lobatto}) {
    for (int m = (fam == NodeFamily::Lobatto ? 2 : 1); m <= 10; ++m) {
      const auto sys = make_collocation(fam, m);
      for (int n = 0; n < m; ++n) {
        std::vector<double> tn(static_cast<size_t>(m)), expect(static_cast<size_t>(m));
        for (int i = 0; i < m; ++i) {
          tn[static_cast<size_t>(i)] = std::pow(sys.nodes.tau[static_cast<size_t>(i)], n);
          expect[static_cast<size_t>(i)] = std::pow(sys.nodes.tau[static_cast<size_t>(i)], n + 1) / (n + 1.0);
        }
        const auto got = sys.q * tn;
        for (int i = 0; i < m; ++i)
          REQUIRE(got[static_cast<size_t>(i)] == Approx(expect[static_cast<size_t>(i)]).margin(1e-13));
      }
      double bsum = 0.0;
      for (double w : sys.b) bsum += w;
      REQUIRE(bsum == Approx(1.0).margin(1e-13));
    }
  }
}

TEST_CASE("quadrature exactness degrees match the node families", "[quadrature]") {
  REQUIRE(node_quadrature_exactness(make_collocation(NodeFamily::RadauRight, 1)) == 0);
  REQUIRE(node_quadrature_exactness(make_collocation(NodeFamily::RadauRight, 4)) == 6);
  REQUIRE(node_quadrature_exactness(make_collocation(NodeFamily::Lobatto, 5)) == 7);
  for (int m = 1; m <= 10; ++m)
    REQUIRE(node_quadrature_exactness(make_collocation(NodeFamily::RadauRight, m)) == 2 * m - 2);
  for (int m = 2; m <= 10; ++m)
    REQUIRE(node_quadrature_exactness(make_collocation(NodeFamily::Lobatto, m)) == 2 * m - 3);
}

TEST_CASE("zero-node reduction drops the first Lobatto node", "[quadrature]") {
  const auto sys = make_collocation(NodeFamily::Lobatto, 3);
  const auto red = reduce_zero_node(sys);
  REQUIRE(red.reduced.size() == 2);
  REQUIRE(red.reduced.nodes.tau[0] == Approx(0.5).margin(1e-14));
  REQUIRE(red.reduced.nodes.tau[1] == 1.0);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) REQUIRE(red.reduced.q(i, j) == sys.q(i + 1, j + 1));

  const auto full = red.embed({0.25, 0.75});
  REQUIRE(full == std::vector<double>{0.0, 0.25, 0.75});
}

TEST_CASE("reduced block integrates vanishing-at-zero monomials", "[quadrature]") {
  for (int m = 3; m <= 8; ++m) {
    const auto red = reduce_zero_node(make_collocation(NodeFamily::Lobatto, m));
    const auto& tau = red.reduced.nodes.tau;
    for (int n = 1; n <= m - 2; ++n) {
      std::vector<double> tn(tau.size());
      for (size_t i = 0; i < tau.size(); ++i) tn[i] = std::pow(tau[i], n);
      const auto got = red.reduced.q * tn;
      for (size_t i = 0; i < tau.size(); ++i)
        REQUIRE(got[i] == Approx(std::pow(tau[i], n + 1) / (n + 1.0)).margin(1e-13));
    }
  }
}

TEST_CASE("zero-node reduction rejects positive first nodes", "[quadrature]") {
  REQUIRE_THROWS_AS(reduce_zero_node(make_collocation(NodeFamily::RadauRight, 3)), InvalidArgument);
}
