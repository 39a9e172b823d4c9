#include <catch2/catch.hpp>

#include <cmath>
#include <vector>

#include "psdc/precond.hpp"

using namespace psdc;

TEST_CASE("pic preconditioner is the zero matrix", "[precond]") {
  const auto sys = make_collocation(NodeFamily::RadauRight, 3);
  const auto p = build_preconditioner(PrecondKind::Pic, sys);
  REQUIRE(p.diagonal);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) REQUIRE(p.for_sweep(1)(i, j) == 0.0);
}

TEST_CASE("explicit Euler staircase", "[precond]") {
  const auto sys = make_collocation(NodeFamily::RadauRight, 4);
  const auto p = build_preconditioner(PrecondKind::EE, sys);
  const auto& q = p.for_sweep(1);
  const auto& tau = sys.nodes.tau;
  for (int j = 0; j < 4; ++j) REQUIRE(q(0, j) == 0.0);  // first row identically zero
  for (int r = 1; r < 4; ++r)
    for (int c = 0; c < 4; ++c) {
      if (c < r)
        REQUIRE(q(r, c) == Approx(tau[static_cast<size_t>(c + 1)] - tau[static_cast<size_t>(c)]));
      else
        REQUIRE(q(r, c) == 0.0);
    }
}

TEST_CASE("implicit Euler rows sum to the nodes", "[precond]") {
  const auto sys = make_collocation(NodeFamily::RadauRight, 4);
  const auto p = build_preconditioner(PrecondKind::IE, sys);
  for (int r = 0; r < 4; ++r) {
    double sum = 0.0;
    for (int c = 0; c < 4; ++c) {
      if (c > r) REQUIRE(p.for_sweep(1)(r, c) == 0.0);
      sum += p.for_sweep(1)(r, c);
    }
    REQUIRE(sum == Approx(sys.nodes.tau[static_cast<size_t>(r)]).margin(1e-14));
  }
}

TEST_CASE("ie-par equals diag(tau) and min-sr-flex k=1", "[precond]") {
  const auto sys = make_collocation(NodeFamily::RadauRight, 4);
  const auto iepar = build_preconditioner(PrecondKind::IEPar, sys);
  const auto flex1 = build_preconditioner(PrecondKind::MinSrFlex, sys, 1);
  for (int i = 0; i < 4; ++i) {
    REQUIRE(iepar.for_sweep(1)(i, i) == sys.nodes.tau[static_cast<size_t>(i)]);
    for (int j = 0; j < 4; ++j) REQUIRE(iepar.for_sweep(1)(i, j) == flex1.for_sweep(1)(i, j));
  }
}

TEST_CASE("lu preconditioner is lower triangular with the U diagonal", "[precond]") {
  const auto sys = make_collocation(NodeFamily::RadauRight, 4);
  const auto p = build_preconditioner(PrecondKind::LU, sys);
  const auto f = lu_decompose(sys.q.transposed());
  for (int i = 0; i < 4; ++i) {
    REQUIRE(p.for_sweep(1)(i, i) == f.upper()(i, i));
    for (int j = i + 1; j < 4; ++j) REQUIRE(p.for_sweep(1)(i, j) == 0.0);
  }
  REQUIRE(p.lower_triangular);
  REQUIRE_FALSE(p.diagonal);
}

TEST_CASE("literature tables are stored verbatim and guarded", "[precond]") {
  const auto sys = make_collocation(NodeFamily::RadauRight, 4);
  const auto p = build_preconditioner(PrecondKind::Vdhs, sys);
  REQUIRE(p.for_sweep(1)(0, 0) == 0.32049937);
  REQUIRE(p.for_sweep(1)(1, 1) == 0.08915379);
  REQUIRE(p.for_sweep(1)(2, 2) == 0.18173956);
  REQUIRE(p.for_sweep(1)(3, 3) == 0.2333628);

  const auto sys3 = make_collocation(NodeFamily::RadauRight, 3);
  REQUIRE_THROWS_AS(build_preconditioner(PrecondKind::Vdhs, sys3), InvalidArgument);
  const auto lob = make_collocation(NodeFamily::Lobatto, 4);
  REQUIRE_THROWS_AS(build_preconditioner(PrecondKind::Min3, lob), InvalidArgument);
}

TEST_CASE("min-sr-ns is diag(tau)/M", "[precond]") {
  const auto sys = make_collocation(NodeFamily::RadauRight, 4);
  const auto p = build_preconditioner(PrecondKind::MinSrNS, sys);
  REQUIRE(p.diagonal);
  for (int i = 0; i < 4; ++i)
    REQUIRE(p.for_sweep(1)(i, i) == Approx(sys.nodes.tau[static_cast<size_t>(i)] / 4.0));

  const auto sys1 = make_collocation(NodeFamily::RadauRight, 1);
  const auto p1 = build_preconditioner(PrecondKind::MinSrNS, sys1);
  REQUIRE(p1.for_sweep(1)(0, 0) == Approx(1.0));
  REQUIRE(std::abs(sys1.q(0, 0) - p1.for_sweep(1)(0, 0)) <= 1e-15);
}

TEST_CASE("min-sr-flex family walks diag(tau)/k into the min-sr-s tail", "[precond]") {
  const auto sys = make_collocation(NodeFamily::RadauRight, 4);
  const auto family = build_preconditioner(PrecondKind::MinSrFlex, sys);
  REQUIRE(family.iteration_indexed());
  for (int k = 1; k <= 4; ++k)
    for (int i = 0; i < 4; ++i)
      REQUIRE(family.for_sweep(k)(i, i) == Approx(sys.nodes.tau[static_cast<size_t>(i)] / k));

  const auto& tail = min_sr_s_coefficients(NodeFamily::RadauRight, 4).d;
  for (int k : {5, 9}) {
    const auto single = build_preconditioner(PrecondKind::MinSrFlex, sys, k);
    for (int i = 0; i < 4; ++i) {
      REQUIRE(family.for_sweep(k)(i, i) == tail[static_cast<size_t>(i)]);
      REQUIRE(single.for_sweep(1)(i, i) == tail[static_cast<size_t>(i)]);
    }
  }
}

TEST_CASE("min-sr diagonals on Lobatto keep the zero leading entry", "[precond]") {
  const auto sys = make_collocation(NodeFamily::Lobatto, 5);
  for (auto kind : {PrecondKind::MinSrNS, PrecondKind::MinSrS}) {
    const auto p = build_preconditioner(kind, sys);
    REQUIRE(p.for_sweep(1)(0, 0) == 0.0);
    for (int i = 1; i < 5; ++i) REQUIRE(p.for_sweep(1)(i, i) > 0.0);
  }
}

TEST_CASE("non-stiff nilpotency of diag(tau)/M", "[precond]") {
  for (int m = 1; m <= 10; ++m) {
    const auto sys = make_collocation(NodeFamily::RadauRight, m);
    DenseMatrix k = sys.q - build_preconditioner(PrecondKind::MinSrNS, sys).for_sweep(1);
    DenseMatrix p = DenseMatrix::identity(m);
    for (int s = 0; s < m; ++s) p = p * k;
    REQUIRE(p.inf_norm() <= 1e-9 * std::pow(sys.q.inf_norm(), m));
  }
}

TEST_CASE("each sweep of diag(tau)/M kills one more error order", "[precond]") {
  // (Q - diag(tau)/M) tau^n interpolates a polynomial with no coefficients
  // below degree n+1
  const int m = 5;
  const auto sys = make_collocation(NodeFamily::RadauRight, m);
  const DenseMatrix k = sys.q - build_preconditioner(PrecondKind::MinSrNS, sys).for_sweep(1);
  DenseMatrix vandermonde(m, m);
  for (int i = 0; i < m; ++i)
    for (int p = 0; p < m; ++p)
      vandermonde(i, p) = std::pow(sys.nodes.tau[static_cast<size_t>(i)], p);

  for (int n = 0; n <= m - 1; ++n) {
    std::vector<double> tn(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) tn[static_cast<size_t>(i)] = std::pow(sys.nodes.tau[static_cast<size_t>(i)], n);
    const auto w = k * tn;
    const auto coeffs = solve_dense(vandermonde, w);
    for (int p = 0; p <= n && p < m; ++p)
      REQUIRE(std::abs(coeffs[static_cast<size_t>(p)]) <= 1e-9);
  }
}

TEST_CASE("butcher preconditioner rejects dense tableaus", "[precond]") {
  ButcherTableau t;
  t.name = "bad";
  t.a = DenseMatrix(2, 2);
  t.a(0, 1) = 0.3;
  t.b = {0.5, 0.5};
  t.c = {0.0, 1.0};
  REQUIRE_THROWS_AS(butcher_preconditioner(t), InvalidArgument);
}

TEST_CASE("rk4 tableau is the classical one", "[precond]") {
  const auto t = rk4_tableau();
  const auto [sys, p] = butcher_preconditioner(t);
  REQUIRE(p.lower_triangular);
  REQUIRE_FALSE(p.diagonal);
  REQUIRE(sys.butcher);
  double bsum = 0.0;
  for (double w : t.b) bsum += w;
  REQUIRE(bsum == Approx(1.0));
}

TEST_CASE("esdirk43 satisfies the order conditions through order four", "[precond]") {
  const auto t = esdirk43_tableau();
  const int s = t.a.rows();
  for (int i = 0; i < s; ++i) {
    double row = 0.0;
    for (int j = 0; j < s; ++j) row += t.a(i, j);
    REQUIRE(row == Approx(t.c[static_cast<size_t>(i)]).margin(1e-14));
  }
  auto bsum = [&](auto&& weight) {
    double acc = 0.0;
    for (int i = 0; i < s; ++i) acc += t.b[static_cast<size_t>(i)] * weight(i);
    return acc;
  };
  std::vector<double> ac(static_cast<size_t>(s)), aac(static_cast<size_t>(s)), ac2(static_cast<size_t>(s));
  for (int i = 0; i < s; ++i) {
    for (int j = 0; j < s; ++j) {
      ac[static_cast<size_t>(i)] += t.a(i, j) * t.c[static_cast<size_t>(j)];
      ac2[static_cast<size_t>(i)] += t.a(i, j) * t.c[static_cast<size_t>(j)] * t.c[static_cast<size_t>(j)];
    }
  }
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j) aac[static_cast<size_t>(i)] += t.a(i, j) * ac[static_cast<size_t>(j)];

  REQUIRE(bsum([&](int) { return 1.0; }) == Approx(1.0).margin(1e-13));
  REQUIRE(bsum([&](int i) { return t.c[static_cast<size_t>(i)]; }) == Approx(0.5).margin(1e-13));
  REQUIRE(bsum([&](int i) { return t.c[static_cast<size_t>(i)] * t.c[static_cast<size_t>(i)]; }) ==
          Approx(1.0 / 3.0).margin(1e-13));
  REQUIRE(bsum([&](int i) { return ac[static_cast<size_t>(i)]; }) == Approx(1.0 / 6.0).margin(1e-13));
  REQUIRE(bsum([&](int i) { return std::pow(t.c[static_cast<size_t>(i)], 3); }) == Approx(0.25).margin(1e-13));
  REQUIRE(bsum([&](int i) { return t.c[static_cast<size_t>(i)] * ac[static_cast<size_t>(i)]; }) ==
          Approx(1.0 / 8.0).margin(1e-13));
  REQUIRE(bsum([&](int i) { return ac2[static_cast<size_t>(i)]; }) == Approx(1.0 / 12.0).margin(1e-13));
  REQUIRE(bsum([&](int i) { return aac[static_cast<size_t>(i)]; }) == Approx(1.0 / 24.0).margin(1e-13));
  // stiffly accurate: the b row equals the last stage row
  for (int j = 0; j < s; ++j) REQUIRE(t.a(s - 1, j) == t.b[static_cast<size_t>(j)]);
}
