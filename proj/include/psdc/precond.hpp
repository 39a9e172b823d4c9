#ifndef PSDC_PRECOND_HPP
#define PSDC_PRECOND_HPP

// Every SDC preconditioner used by the toolkit: the classical staircase and
// LU variants, the diagonal literature tables, the analytic MIN-SR families
// and Butcher-tableau mode where Q_delta = Q = A replays a Runge-Kutta
// method through the sweep machinery.

#include <string>
#include <vector>

#include "psdc/optimize.hpp"

namespace psdc {

enum class PrecondKind {
  Pic,
  EE,
  IE,
  IEPar,
  LU,
  Vdhs,
  Min,
  Min3,
  MinSrNS,
  MinSrS,
  MinSrFlex,
  Butcher,
};

inline std::string precond_name(PrecondKind k) {
  switch (k) {
    case PrecondKind::Pic: return "pic";
    case PrecondKind::EE: return "ee";
    case PrecondKind::IE: return "ie";
    case PrecondKind::IEPar: return "ie-par";
    case PrecondKind::LU: return "lu";
    case PrecondKind::Vdhs: return "vdhs";
    case PrecondKind::Min: return "min";
    case PrecondKind::Min3: return "min3";
    case PrecondKind::MinSrNS: return "min-sr-ns";
    case PrecondKind::MinSrS: return "min-sr-s";
    case PrecondKind::MinSrFlex: return "min-sr-flex";
    case PrecondKind::Butcher: return "butcher";
  }
  return "?";
}

inline PrecondKind precond_from_string(const std::string& s) {
  for (PrecondKind k : {PrecondKind::Pic, PrecondKind::EE, PrecondKind::IE, PrecondKind::IEPar,
                        PrecondKind::LU, PrecondKind::Vdhs, PrecondKind::Min, PrecondKind::Min3,
                        PrecondKind::MinSrNS, PrecondKind::MinSrS, PrecondKind::MinSrFlex})
    if (precond_name(k) == s) return k;
  if (s == "iepar") return PrecondKind::IEPar;
  throw InvalidArgument("unknown preconditioner '" + s + "'");
}

struct Preconditioner {
  PrecondKind kind = PrecondKind::Pic;
  std::vector<DenseMatrix> mats;  // one matrix, or the k-indexed MIN-SR-FLEX family
  bool diagonal = false;
  bool lower_triangular = false;  // diagonal counts as lower triangular

  /// Matrix used in sweep k (1-based). Stationary preconditioners ignore k;
  /// the FLEX family returns diag(tau)/k and falls back to its MIN-SR-S tail
  /// once k exceeds the node count.
  const DenseMatrix& for_sweep(int k) const {
    if (mats.size() == 1 || k < 1) return mats.front();
    return mats[std::min(static_cast<size_t>(k), mats.size()) - 1];
  }
  bool iteration_indexed() const { return mats.size() > 1; }
};

// Diagonal tables for M = 4 Radau-Right nodes, stored to the published
// precision.
inline const std::vector<double>& vdhs_table() {
  static const std::vector<double> d{0.32049937, 0.08915379, 0.18173956, 0.2333628};
  return d;
}
inline const std::vector<double>& min_table() {
  static const std::vector<double> d{0.17534868, 0.0619158, 0.1381934, 0.19617814};
  return d;
}
inline const std::vector<double>& min3_table() {
  static const std::vector<double> d{0.31987868, 0.08887606, 0.18123663, 0.23273925};
  return d;
}

namespace detail {

inline Preconditioner from_diagonal(PrecondKind kind, const std::vector<double>& d) {
  Preconditioner p;
  p.kind = kind;
  p.mats = {DenseMatrix::diagonal(d)};
  p.diagonal = true;
  p.lower_triangular = true;
  return p;
}

inline std::vector<double> scaled_nodes(const CollocationSystem& sys, double denom) {
  std::vector<double> d = sys.nodes.tau;
  for (double& v : d) v /= denom;
  return d;
}

}  // namespace detail

/// Build the preconditioner `kind` for a collocation system. `flex_k`
/// selects a single member of the MIN-SR-FLEX family; without it the whole
/// iteration-indexed family is returned.
inline Preconditioner build_preconditioner(PrecondKind kind, const CollocationSystem& sys,
                                           int flex_k = 0) {
  const int m = sys.size();
  const auto& tau = sys.nodes.tau;
  const bool table_ok =
      !sys.butcher && sys.nodes.family == NodeFamily::RadauRight && m == 4;

  switch (kind) {
    case PrecondKind::Pic: {
      Preconditioner p;
      p.kind = kind;
      p.mats = {DenseMatrix(m, m)};
      p.diagonal = true;
      p.lower_triangular = true;
      return p;
    }
    case PrecondKind::EE: {
      Preconditioner p;
      p.kind = kind;
      DenseMatrix q(m, m);
      for (int r = 1; r < m; ++r)
        for (int c = 0; c < r; ++c) q(r, c) = tau[static_cast<size_t>(c + 1)] - tau[static_cast<size_t>(c)];
      p.mats = {q};
      p.lower_triangular = true;
      return p;
    }
    case PrecondKind::IE: {
      Preconditioner p;
      p.kind = kind;
      DenseMatrix q(m, m);
      for (int r = 0; r < m; ++r)
        for (int c = 0; c <= r; ++c)
          q(r, c) = tau[static_cast<size_t>(c)] - (c > 0 ? tau[static_cast<size_t>(c - 1)] : 0.0);
      p.mats = {q};
      p.lower_triangular = true;
      return p;
    }
    case PrecondKind::IEPar:
      return detail::from_diagonal(kind, tau);
    case PrecondKind::LU: {
      const auto f = lu_decompose(sys.q.transposed());
      Preconditioner p;
      p.kind = kind;
      p.mats = {f.upper().transposed()};
      p.lower_triangular = true;
      return p;
    }
    case PrecondKind::Vdhs:
      if (!table_ok) throw InvalidArgument("vdhs table is only defined for M=4 Radau-Right");
      return detail::from_diagonal(kind, vdhs_table());
    case PrecondKind::Min:
      if (!table_ok) throw InvalidArgument("min table is only defined for M=4 Radau-Right");
      return detail::from_diagonal(kind, min_table());
    case PrecondKind::Min3:
      if (!table_ok) throw InvalidArgument("min3 table is only defined for M=4 Radau-Right");
      return detail::from_diagonal(kind, min3_table());
    case PrecondKind::MinSrNS:
      return detail::from_diagonal(kind, detail::scaled_nodes(sys, static_cast<double>(m)));
    case PrecondKind::MinSrS: {
      if (sys.butcher) throw InvalidArgument("min-sr-s needs a quadrature collocation system");
      return detail::from_diagonal(kind, min_sr_s_coefficients(sys.nodes.family, m).d);
    }
    case PrecondKind::MinSrFlex: {
      if (sys.butcher) throw InvalidArgument("min-sr-flex needs a quadrature collocation system");
      if (flex_k > 0) {
        if (flex_k <= m) return detail::from_diagonal(kind, detail::scaled_nodes(sys, flex_k));
        Preconditioner p = detail::from_diagonal(kind, min_sr_s_coefficients(sys.nodes.family, m).d);
        return p;
      }
      Preconditioner p;
      p.kind = kind;
      p.diagonal = true;
      p.lower_triangular = true;
      for (int k = 1; k <= m; ++k)
        p.mats.push_back(DenseMatrix::diagonal(detail::scaled_nodes(sys, k)));
      p.mats.push_back(DenseMatrix::diagonal(min_sr_s_coefficients(sys.nodes.family, m).d));
      return p;
    }
    case PrecondKind::Butcher:
      throw InvalidArgument("use butcher_preconditioner / collocation_preconditioner");
  }
  throw InvalidArgument("build_preconditioner: unhandled kind");
}

// ---------------------------------------------------------------------------
// Butcher mode.
// ---------------------------------------------------------------------------

struct ButcherTableau {
  std::string name;
  DenseMatrix a;
  std::vector<double> b;
  std::vector<double> c;
};

/// Classical explicit fourth-order method.
inline ButcherTableau rk4_tableau() {
  ButcherTableau t;
  t.name = "rk4";
  t.a = DenseMatrix(4, 4);
  t.a(1, 0) = 0.5;
  t.a(2, 1) = 0.5;
  t.a(3, 2) = 1.0;
  t.b = {1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0};
  t.c = {0.0, 0.5, 0.5, 1.0};
  return t;
}

/// ESDIRK4(3)6L[2]SA, the six-stage stiffly accurate L-stable method of
/// Kennedy & Carpenter. Coefficients are checked against the order-4
/// conditions in the test suite.
inline ButcherTableau esdirk43_tableau() {
  ButcherTableau t;
  t.name = "esdirk43";
  t.a = DenseMatrix(6, 6);
  const double g = 0.25;
  t.a(1, 0) = 0.25;                      t.a(1, 1) = g;
  t.a(2, 0) = 8611.0 / 62500.0;          t.a(2, 1) = -1743.0 / 31250.0;        t.a(2, 2) = g;
  t.a(3, 0) = 5012029.0 / 34652500.0;    t.a(3, 1) = -654441.0 / 2922500.0;    t.a(3, 2) = 174375.0 / 388108.0;      t.a(3, 3) = g;
  t.a(4, 0) = 15267082809.0 / 155376265600.0;
  t.a(4, 1) = -71443401.0 / 120774400.0;
  t.a(4, 2) = 730878875.0 / 902184768.0;
  t.a(4, 3) = 2285395.0 / 8070912.0;
  t.a(4, 4) = g;
  t.a(5, 0) = 82889.0 / 524892.0;        t.a(5, 1) = 0.0;                      t.a(5, 2) = 15625.0 / 83664.0;
  t.a(5, 3) = 69875.0 / 102672.0;        t.a(5, 4) = -2260.0 / 8211.0;         t.a(5, 5) = g;
  t.b = {82889.0 / 524892.0, 0.0, 15625.0 / 83664.0, 69875.0 / 102672.0, -2260.0 / 8211.0, g};
  t.c = {0.0, 0.5, 83.0 / 250.0, 31.0 / 50.0, 17.0 / 20.0, 1.0};
  return t;
}

/// Q_delta = Q = A for a lower-triangular tableau: one sweep reproduces the
/// Runge-Kutta stage equations regardless of the initial iterate.
inline std::pair<CollocationSystem, Preconditioner> butcher_preconditioner(const ButcherTableau& t) {
  const int s = t.a.rows();
  bool diagonal = true;
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j) {
      if (j > i && t.a(i, j) != 0.0)
        throw InvalidArgument("butcher_preconditioner: tableau must be lower triangular");
      if (i != j && t.a(i, j) != 0.0) diagonal = false;
    }
  CollocationSystem sys = collocation_from_butcher(t.a, t.b, t.c);
  Preconditioner p;
  p.kind = PrecondKind::Butcher;
  p.mats = {t.a};
  p.diagonal = diagonal;
  p.lower_triangular = true;
  return {sys, p};
}

/// Q_delta = Q for an arbitrary collocation system. The preconditioned
/// system is then the collocation problem itself, solved as one coupled
/// Newton iteration per sweep; used for reference solutions.
inline Preconditioner collocation_preconditioner(const CollocationSystem& sys) {
  Preconditioner p;
  p.kind = PrecondKind::Butcher;
  p.mats = {sys.q};
  p.diagonal = false;
  p.lower_triangular = false;
  return p;
}

}  // namespace psdc

#endif
