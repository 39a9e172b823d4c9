#ifndef PSDC_CLI_HPP
#define PSDC_CLI_HPP

// Command-line front end: nodes, coeffs, optimize, integrate, stability,
// convergence, cost and reproduce subcommands with deterministic CSV/JSON
// output. Every file starts with (or embeds) a manifest of the resolved
// parameters and a checksum of its data section.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "psdc/analysis.hpp"

namespace psdc_cli {

using json = nlohmann::ordered_json;
using namespace psdc;

// ---------------------------------------------------------------------------
// formatting and manifest helpers
// ---------------------------------------------------------------------------

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fnv1a64_hex(const std::string& data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct Manifest {
  std::string command;
  std::vector<std::pair<std::string, std::string>> params;

  void add(const std::string& key, const std::string& value) { params.emplace_back(key, value); }
  void add(const std::string& key, double value) { params.emplace_back(key, fmt17(value)); }
  void add(const std::string& key, int value) { params.emplace_back(key, std::to_string(value)); }
  void add(const std::string& key, long long value) { params.emplace_back(key, std::to_string(value)); }
};

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(const std::vector<double>& values) {
    std::vector<std::string> r;
    r.reserve(values.size());
    for (double v : values) r.push_back(fmt17(v));
    rows.push_back(std::move(r));
  }
};

inline void write_output(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot open output file '" + path + "'");
  out << text;
}

inline std::string render_csv(const Manifest& m, const CsvTable& table) {
  std::string data;
  {
    std::string header;
    for (size_t c = 0; c < table.columns.size(); ++c) {
      if (c) header += ',';
      header += table.columns[c];
    }
    data += header + "\n";
    for (const auto& row : table.rows) {
      std::string line;
      for (size_t c = 0; c < row.size(); ++c) {
        if (c) line += ',';
        line += row[c];
      }
      data += line + "\n";
    }
  }
  std::string out = "# psdc " PSDC_VERSION "\n# command: " + m.command + "\n";
  for (const auto& [k, v] : m.params) out += "# param " + k + "=" + v + "\n";
  out += "# checksum: fnv1a64:" + fnv1a64_hex(data) + "\n";
  out += data;
  return out;
}

inline std::string render_json(const Manifest& m, const json& data) {
  json params = json::object();
  for (const auto& [k, v] : m.params) params[k] = v;
  json root = {{"tool", "psdc"},
               {"version", PSDC_VERSION},
               {"command", m.command},
               {"params", params},
               {"checksum", "fnv1a64:" + fnv1a64_hex(data.dump())},
               {"data", data}};
  return root.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// shared option structures
// ---------------------------------------------------------------------------

inline Complex parse_complex(const std::string& text) {
  // accepts forms like "1", "-0.5", "0+1i", "2.5-0.3i", "1i"
  std::string s = text;
  if (s.empty()) throw InvalidArgument("empty complex literal");
  if (s.back() == 'i' || s.back() == 'j') {
    s.pop_back();
    size_t split = s.find_last_of("+-");
    if (split == std::string::npos || split == 0) {
      const std::string im = s.empty() || s == "+" || s == "-" ? s + "1" : s;
      return {0.0, std::stod(im)};
    }
    std::string re = s.substr(0, split);
    std::string im = s.substr(split);
    if (im == "+" || im == "-") im += "1";
    return {std::stod(re), std::stod(im)};
  }
  return {std::stod(s), 0.0};
}

struct SchemeOptions {
  std::string precond = "min-sr-s";
  std::string family = "radau-right";
  int m = 4;
  int sweeps = 4;
  bool collocation_update = false;
  int workers = 0;  // 0: resolve from PSDC_WORKERS / default 1
  double newton_tol = -1.0;
  int newton_max = 300;

  void attach(CLI::App* cmd, bool with_sweeps = true) {
    cmd->add_option("--precond", precond,
                    "preconditioner (pic, ee, ie, ie-par, lu, vdhs, min, min3, min-sr-ns, "
                    "min-sr-s, min-sr-flex, rk4, esdirk43)");
    cmd->add_option("--family", family, "node family (radau-right, lobatto)");
    cmd->add_option("--m", m, "number of collocation nodes");
    if (with_sweeps) cmd->add_option("--k", sweeps, "number of sweeps");
    if (with_sweeps) cmd->add_flag("--collocation-update", collocation_update, "use the b-weighted update");
    cmd->add_option("--workers", workers, "node-parallel workers (1 or M; default: PSDC_WORKERS or 1)");
    cmd->add_option("--newton-tol", newton_tol, "Newton residual tolerance (default: problem specific)");
    cmd->add_option("--newton-max", newton_max, "Newton iteration cap");
  }

  int resolved_workers() const {
    if (workers > 0) return workers;
    if (const char* env = std::getenv("PSDC_WORKERS")) {
      const int w = std::atoi(env);
      if (w > 0) return w;
    }
    return 1;
  }

  bool is_butcher() const { return precond == "rk4" || precond == "esdirk43"; }

  SweepConfig build() const {
    SweepConfig cfg;
    if (is_butcher()) {
      const ButcherTableau t = precond == "rk4" ? rk4_tableau() : esdirk43_tableau();
      auto [sys, pre] = butcher_preconditioner(t);
      cfg.colloc = sys;
      cfg.precond = pre;
      cfg.sweeps = 1;
    } else {
      cfg.colloc = make_collocation(family_from_string(family), m);
      cfg.precond = build_preconditioner(precond_from_string(precond), cfg.colloc);
      cfg.sweeps = sweeps;
    }
    cfg.collocation_update = collocation_update;
    cfg.newton_tol = newton_tol;
    cfg.newton_max = newton_max;
    cfg.workers = resolved_workers();
    return cfg;
  }

  void describe(Manifest& m_out) const {
    m_out.add("precond", precond);
    if (!is_butcher()) {
      m_out.add("family", family);
      m_out.add("m", m);
      m_out.add("k", sweeps);
    }
    m_out.add("collocation-update", collocation_update ? "true" : "false");
    m_out.add("workers", resolved_workers());
    if (newton_tol >= 0.0) m_out.add("newton-tol", newton_tol);
  }
};

struct ProblemOptions {
  std::string name = "dahlquist";
  std::string lambda_text = "0+1i";
  double eps_pr = 1e-3;
  double eps_ac = 0.04;
  double dw = 0.04;
  int npoints = 2047;

  void attach(CLI::App* cmd) {
    cmd->add_option("--problem", name, "dahlquist, lorenz, prothero-robinson, allen-cahn");
    cmd->add_option("--lambda", lambda_text, "dahlquist lambda, e.g. 0+1i");
    cmd->add_option("--eps", eps_pr, "prothero-robinson epsilon (also allen-cahn when set)");
    cmd->add_option("--ac-eps", eps_ac, "allen-cahn epsilon");
    cmd->add_option("--dw", dw, "allen-cahn driving-force coefficient");
    cmd->add_option("--npoints", npoints, "allen-cahn interior grid points");
  }

  void describe(Manifest& m) const {
    m.add("problem", name);
    if (name == "dahlquist") m.add("lambda", lambda_text);
    if (name == "prothero-robinson") m.add("eps", eps_pr);
    if (name == "allen-cahn") {
      m.add("eps", eps_ac);
      m.add("dw", dw);
      m.add("npoints", npoints);
    }
  }
};

// dispatch a callable over the concrete problem type
template <class Fn>
int with_problem(const ProblemOptions& opt, double t_end, Fn&& fn) {
  if (opt.name == "dahlquist") {
    return fn(dahlquist(parse_complex(opt.lambda_text)));
  }
  if (opt.name == "lorenz") {
    auto prob = lorenz();
    prob.prepare_reference(t_end, 8192);
    return fn(prob);
  }
  if (opt.name == "prothero-robinson") {
    return fn(prothero_robinson(opt.eps_pr));
  }
  if (opt.name == "allen-cahn") {
    return fn(allen_cahn_1d(opt.eps_ac, opt.dw, opt.npoints));
  }
  throw InvalidArgument("unknown problem '" + opt.name + "'");
}

inline double scalar_part(double v, bool) { return v; }
inline double scalar_part(const Complex& v, bool imag) { return imag ? v.imag() : v.real(); }

// ---------------------------------------------------------------------------
// subcommand implementations
// ---------------------------------------------------------------------------

struct OutputOptions {
  bool as_json = false;
  bool as_csv = false;
  std::string path;

  void attach(CLI::App* cmd) {
    cmd->add_flag("--json", as_json, "emit JSON");
    cmd->add_flag("--csv", as_csv, "emit CSV (default)");
    cmd->add_option("-o,--output", path, "output file (default: stdout)");
  }
};

inline int cmd_nodes(const std::string& family, int m, const OutputOptions& out) {
  const auto sys = make_collocation(family_from_string(family), m);
  Manifest man;
  man.command = "nodes";
  man.add("family", family);
  man.add("m", m);
  man.add("exactness-degree", node_quadrature_exactness(sys));

  if (out.as_json) {
    json data;
    data["tau"] = json::array();
    for (double t : sys.nodes.tau) data["tau"].push_back(t);
    data["b"] = json::array();
    for (double w : sys.b) data["b"].push_back(w);
    data["q"] = json::array();
    for (int i = 0; i < m; ++i) {
      json row = json::array();
      for (int j = 0; j < m; ++j) row.push_back(sys.q(i, j));
      data["q"].push_back(row);
    }
    write_output(render_json(man, data), out.path);
    return 0;
  }

  CsvTable table;
  table.columns = {"node", "tau", "b"};
  for (int j = 1; j <= m; ++j) table.columns.push_back("q_" + std::to_string(j));
  for (int i = 0; i < m; ++i) {
    std::vector<double> row{static_cast<double>(i + 1), sys.nodes.tau[static_cast<size_t>(i)],
                            sys.b[static_cast<size_t>(i)]};
    for (int j = 0; j < m; ++j) row.push_back(sys.q(i, j));
    table.add_row(row);
  }
  write_output(render_csv(man, table), out.path);
  return 0;
}

inline int cmd_coeffs(const std::string& kind_text, const std::string& family, int m, int flex_k,
                      const OutputOptions& out) {
  const PrecondKind kind = precond_from_string(kind_text);
  if (kind == PrecondKind::MinSrFlex && flex_k <= 0)
    throw InvalidArgument("min-sr-flex needs --k (the sweep index)");
  const auto sys = make_collocation(family_from_string(family), m);
  const auto pre = build_preconditioner(kind, sys, flex_k);
  const DenseMatrix& mat = pre.for_sweep(std::max(flex_k, 1));

  Manifest man;
  man.command = "coeffs";
  man.add("kind", kind_text);
  man.add("family", family);
  man.add("m", m);
  if (flex_k > 0) man.add("k", flex_k);
  man.add("diagonal", pre.diagonal ? "true" : "false");

  if (out.as_json) {
    json data;
    data["kind"] = kind_text;
    data["diagonal_flag"] = pre.diagonal;
    if (pre.diagonal) {
      json d = json::array();
      for (int i = 0; i < m; ++i) d.push_back(mat(i, i));
      data["diagonal"] = d;
    } else {
      json rows = json::array();
      for (int i = 0; i < m; ++i) {
        json row = json::array();
        for (int j = 0; j < m; ++j) row.push_back(mat(i, j));
        rows.push_back(row);
      }
      data["matrix"] = rows;
    }
    write_output(render_json(man, data), out.path);
    return 0;
  }

  CsvTable table;
  if (pre.diagonal) {
    table.columns = {"node", "d"};
    for (int i = 0; i < m; ++i) table.add_row({static_cast<double>(i + 1), mat(i, i)});
  } else {
    table.columns = {"row"};
    for (int j = 1; j <= m; ++j) table.columns.push_back("c_" + std::to_string(j));
    for (int i = 0; i < m; ++i) {
      std::vector<double> row{static_cast<double>(i + 1)};
      for (int j = 0; j < m; ++j) row.push_back(mat(i, j));
      table.add_row(row);
    }
  }
  write_output(render_csv(man, table), out.path);
  return 0;
}

inline int cmd_optimize(const std::string& family, int m, const std::string& cache_path,
                        const OutputOptions& out) {
  const NodeFamily fam = family_from_string(family);
  std::optional<MinSrSCoefficients> entry;

  json cache;
  if (!cache_path.empty()) {
    std::ifstream in(cache_path);
    if (in) {
      in >> cache;
      const std::string fkey = family_name(fam), mkey = std::to_string(m);
      if (cache.contains(fkey) && cache[fkey].contains(mkey)) {
        MinSrSCoefficients c;
        for (double v : cache[fkey][mkey]["d"]) c.d.push_back(v);
        c.rho_stiff = cache[fkey][mkey]["rho_stiff"];
        c.residual_norm = cache[fkey][mkey]["residual_norm"];
        entry = c;
      }
    }
  }
  if (!entry) {
    entry = min_sr_s_coefficients(fam, m);
    if (!cache_path.empty()) {
      json d = json::array();
      for (double v : entry->d) d.push_back(v);
      cache[family_name(fam)][std::to_string(m)] = {
          {"d", d}, {"rho_stiff", entry->rho_stiff}, {"residual_norm", entry->residual_norm}};
      std::ofstream outf(cache_path);
      outf << cache.dump(2) << "\n";
    }
  }

  Manifest man;
  man.command = "optimize";
  man.add("family", family);
  man.add("m", m);
  man.add("rho-stiff", entry->rho_stiff);
  man.add("residual-norm", entry->residual_norm);

  if (out.as_json) {
    json data;
    json d = json::array();
    for (double v : entry->d) d.push_back(v);
    data["d"] = d;
    data["rho_stiff"] = entry->rho_stiff;
    data["residual_norm"] = entry->residual_norm;
    write_output(render_json(man, data), out.path);
    return 0;
  }
  CsvTable table;
  table.columns = {"node", "d"};
  for (size_t i = 0; i < entry->d.size(); ++i)
    table.add_row({static_cast<double>(i + 1), entry->d[i]});
  write_output(render_csv(man, table), out.path);
  return 0;
}

inline int cmd_integrate(const ProblemOptions& prob_opt, SchemeOptions scheme, double t0,
                         double t_end, double dt, int n_steps, const std::string& metric_text,
                         const OutputOptions& out) {
  if (n_steps <= 0) {
    if (!(dt > 0.0)) throw InvalidArgument("provide --dt or --n-steps");
    const double span = t_end - t0;
    n_steps = static_cast<int>(std::lround(span / dt));
    if (n_steps < 1 || std::abs(n_steps * dt - span) > 1e-9 * std::abs(span))
      throw InvalidArgument("dt must divide the time interval");
  }

  return with_problem(prob_opt, t_end, [&](const auto& prob) {
    const SweepConfig cfg = scheme.build();
    const auto traj = integrate(prob, cfg, t0, t_end, n_steps);

    Manifest man;
    man.command = "integrate";
    prob_opt.describe(man);
    scheme.describe(man);
    man.add("t0", t0);
    man.add("t-end", t_end);
    man.add("n-steps", n_steps);
    man.add("dt", (t_end - t0) / n_steps);
    man.add("rhs-evals", traj.counters.rhs_evals);
    man.add("newton-iters", traj.counters.newton_iters);
    if (prob.has_exact()) {
      const ErrorMetric metric =
          metric_text == "l2" ? ErrorMetric::L2Final : ErrorMetric::LinfTrajectory;
      man.add("error-metric", metric_text == "l2" ? "l2-final" : "linf-trajectory");
      man.add("error", error_metric(traj, prob, metric));
    }

    using Scalar = typename std::decay_t<decltype(prob)>::Scalar;
    const bool complex_state = std::is_same_v<Scalar, Complex>;
    const int dim = prob.dim();

    if (out.as_json) {
      json data;
      data["t"] = json::array();
      for (double t : traj.t) data["t"].push_back(t);
      data["u"] = json::array();
      for (const auto& u : traj.u) {
        json row = json::array();
        for (const auto& v : u) {
          row.push_back(scalar_part(v, false));
          if (complex_state) row.push_back(scalar_part(v, true));
        }
        data["u"].push_back(row);
      }
      data["rhs_evals"] = json::array();
      data["newton_iters"] = json::array();
      for (const auto& c : traj.counters_at) {
        data["rhs_evals"].push_back(c.rhs_evals);
        data["newton_iters"].push_back(c.newton_iters);
      }
      write_output(render_json(man, data), out.path);
      return 0;
    }

    CsvTable table;
    table.columns = {"t"};
    for (int i = 0; i < dim; ++i) {
      if (complex_state) {
        table.columns.push_back("u" + std::to_string(i) + "_re");
        table.columns.push_back("u" + std::to_string(i) + "_im");
      } else {
        table.columns.push_back("u" + std::to_string(i));
      }
    }
    table.columns.push_back("rhs_evals");
    table.columns.push_back("newton_iters");
    // running cumulative counters at each step end point
    for (size_t n = 0; n < traj.t.size(); ++n) {
      std::vector<double> row{traj.t[n]};
      for (const auto& v : traj.u[n]) {
        row.push_back(scalar_part(v, false));
        if (complex_state) row.push_back(scalar_part(v, true));
      }
      row.push_back(static_cast<double>(traj.counters_at[n].rhs_evals));
      row.push_back(static_cast<double>(traj.counters_at[n].newton_iters));
      table.add_row(row);
    }
    write_output(render_csv(man, table), out.path);
    return 0;
  });
}

inline std::vector<int> parse_step_list(const std::string& text) {
  std::vector<int> steps;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    steps.push_back(std::stoi(item));
  }
  if (steps.empty()) throw InvalidArgument("empty step list");
  return steps;
}

inline int cmd_convergence(const ProblemOptions& prob_opt, SchemeOptions scheme, double t0,
                           double t_end, const std::string& steps_text,
                           const std::string& metric_text, const OutputOptions& out) {
  const auto steps = parse_step_list(steps_text);
  const ErrorMetric metric = metric_text == "l2" ? ErrorMetric::L2Final : ErrorMetric::LinfTrajectory;

  return with_problem(prob_opt, t_end, [&](const auto& prob) {
    const SweepConfig cfg = scheme.build();
    const auto points = convergence_study(prob, cfg, t0, t_end, steps, metric);

    Manifest man;
    man.command = "convergence";
    prob_opt.describe(man);
    scheme.describe(man);
    man.add("t0", t0);
    man.add("t-end", t_end);
    man.add("metric", metric_text == "l2" ? "l2-final" : "linf-trajectory");
    std::vector<std::pair<double, double>> fit;
    for (const auto& p : points)
      if (p.error > 1e-13) fit.emplace_back(p.dt, p.error);
    if (fit.size() >= 3) man.add("fitted-order", estimate_order(fit));

    const bool diag = cfg.precond.diagonal;
    const ProblemWeight weight =
        prob_opt.name == "allen-cahn" ? ProblemWeight::AllenCahn : ProblemWeight::Standard;

    if (out.as_json) {
      json rows = json::array();
      for (const auto& p : points) {
        json row = {{"dt", p.dt},
                    {"n_steps", p.n_steps},
                    {"error", p.error},
                    {"rhs_evals", p.counters.rhs_evals},
                    {"newton_iters", p.counters.newton_iters},
                    {"cost_serial", cost_model(p.counters, CostMode::Serial, cfg.colloc.size(), weight).cost}};
        if (diag)
          row["cost_parallel"] =
              cost_model(p.counters, CostMode::Parallel, cfg.colloc.size(), weight, true).cost;
        rows.push_back(row);
      }
      write_output(render_json(man, {{"points", rows}}), out.path);
      return 0;
    }

    CsvTable table;
    table.columns = {"dt", "n_steps", "error", "rhs_evals", "newton_iters", "cost_serial"};
    if (diag) table.columns.push_back("cost_parallel");
    for (const auto& p : points) {
      std::vector<double> row{p.dt,
                              static_cast<double>(p.n_steps),
                              p.error,
                              static_cast<double>(p.counters.rhs_evals),
                              static_cast<double>(p.counters.newton_iters),
                              cost_model(p.counters, CostMode::Serial, cfg.colloc.size(), weight).cost};
      if (diag)
        row.push_back(cost_model(p.counters, CostMode::Parallel, cfg.colloc.size(), weight, true).cost);
      table.add_row(row);
    }
    write_output(render_csv(man, table), out.path);
    return 0;
  });
}

inline int cmd_stability(SchemeOptions scheme, const std::string& grid_text, int res_x, int res_y,
                         bool wide, const OutputOptions& out) {
  StabilityConfig cfg;
  const SweepConfig sweep_cfg = scheme.build();
  cfg.colloc = sweep_cfg.colloc;
  cfg.precond = sweep_cfg.precond;
  cfg.sweeps = sweep_cfg.sweeps;
  cfg.collocation_update = sweep_cfg.collocation_update;

  StabilityGrid grid = wide ? wide_grid() : default_grid();
  if (!grid_text.empty()) {
    std::stringstream ss(grid_text);
    std::string part;
    std::vector<double> vals;
    while (std::getline(ss, part, ':')) vals.push_back(std::stod(part));
    if (vals.size() != 4) throw InvalidArgument("--grid expects re_min:re_max:im_min:im_max");
    grid.re_min = vals[0];
    grid.re_max = vals[1];
    grid.im_min = vals[2];
    grid.im_max = vals[3];
  }
  grid.nx = res_x;
  grid.ny = res_y > 0 ? res_y : res_x;

  const auto scanned = scan_stability(cfg, grid, scheme.resolved_workers());

  Manifest man;
  man.command = "stability";
  scheme.describe(man);
  man.add("grid", fmt17(grid.re_min) + ":" + fmt17(grid.re_max) + ":" + fmt17(grid.im_min) + ":" +
                      fmt17(grid.im_max));
  man.add("res", std::to_string(grid.nx) + "x" + std::to_string(grid.ny));
  man.add("readout", (scheme.collocation_update || sweep_cfg.colloc.butcher) ? "b-update" : "u_M");

  if (out.as_json) {
    json data;
    data["re"] = json::array();
    for (int i = 0; i < grid.nx; ++i) data["re"].push_back(scanned.re_at(i));
    data["im"] = json::array();
    for (int j = 0; j < grid.ny; ++j) data["im"].push_back(scanned.im_at(j));
    data["abs_r"] = json::array();
    for (int j = 0; j < grid.ny; ++j) {
      json row = json::array();
      for (int i = 0; i < grid.nx; ++i) row.push_back(scanned.sample(i, j));
      data["abs_r"].push_back(row);
    }
    write_output(render_json(man, data), out.path);
    return 0;
  }

  CsvTable table;
  table.columns = {"re", "im", "absR"};
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i)
      table.add_row({scanned.re_at(i), scanned.im_at(j), scanned.sample(i, j)});
  write_output(render_csv(man, table), out.path);
  return 0;
}

inline int cmd_cost(long long rhs, long long newton, bool parallel, int m,
                    const std::string& weight_text, const OutputOptions& out) {
  Counters c;
  c.rhs_evals = rhs;
  c.newton_iters = newton;
  const ProblemWeight weight =
      weight_text == "allen-cahn" ? ProblemWeight::AllenCahn : ProblemWeight::Standard;
  const auto rep = cost_model(c, parallel ? CostMode::Parallel : CostMode::Serial, m, weight, true);

  if (out.as_json) {
    Manifest man;
    man.command = "cost";
    man.add("rhs", rhs);
    man.add("newton", newton);
    man.add("mode", parallel ? "parallel" : "serial");
    man.add("m", m);
    man.add("weight", weight_text);
    json data = {{"cost", rep.cost}};
    write_output(render_json(man, data), out.path);
    return 0;
  }
  write_output(fmt17(rep.cost) + "\n", out.path);
  return 0;
}

// ---------------------------------------------------------------------------
// reproduce: the figure-family datasets at desk scale
// ---------------------------------------------------------------------------

inline std::vector<int> pow2_steps(int lo, int hi) {
  std::vector<int> v;
  for (int n = lo; n <= hi; ++n) v.push_back(1 << n);
  return v;
}

inline void reproduce_conv(const std::filesystem::path& dir, int) {
  const double t_end = 2.0 * M_PI;
  const auto prob = dahlquist(Complex(0.0, 1.0));
  for (const auto& [family, m] : {std::pair{NodeFamily::RadauRight, 4}, {NodeFamily::Lobatto, 5}}) {
    for (auto kind : {PrecondKind::MinSrNS, PrecondKind::MinSrS, PrecondKind::MinSrFlex}) {
      Manifest man;
      man.command = "reproduce fig1-conv";
      man.add("problem", "dahlquist");
      man.add("lambda", "0+1i");
      man.add("family", family_name(family));
      man.add("m", m);
      man.add("precond", precond_name(kind));
      man.add("newton-tol", 1e-14);

      CsvTable table;
      table.columns = {"dt"};
      for (int k = 1; k <= 4; ++k) table.columns.push_back("err_k" + std::to_string(k));
      const auto steps = pow2_steps(4, 9);
      std::vector<std::vector<double>> rows(steps.size());
      for (size_t s = 0; s < steps.size(); ++s) rows[s].push_back(t_end / steps[s]);
      for (int k = 1; k <= 4; ++k) {
        SweepConfig cfg;
        cfg.colloc = make_collocation(family, m);
        cfg.precond = build_preconditioner(kind, cfg.colloc);
        cfg.sweeps = k;
        cfg.newton_tol = 1e-14;
        const auto pts = convergence_study(prob, cfg, 0.0, t_end, steps, ErrorMetric::LinfTrajectory);
        for (size_t s = 0; s < steps.size(); ++s) rows[s].push_back(pts[s].error);
      }
      for (const auto& r : rows) table.add_row(r);
      write_output(render_csv(man, table),
                   (dir / ("fig1_conv_" + precond_name(kind) + "_" + family_name(family) + ".csv")).string());
    }
  }
}

inline void reproduce_stab(const std::filesystem::path& dir, int workers) {
  for (auto kind : {PrecondKind::Pic, PrecondKind::MinSrNS, PrecondKind::MinSrS,
                    PrecondKind::MinSrFlex, PrecondKind::LU, PrecondKind::Vdhs}) {
    const bool wide = kind == PrecondKind::MinSrS || kind == PrecondKind::MinSrFlex;
    for (int k = 1; k <= 4; ++k) {
      StabilityConfig cfg;
      cfg.colloc = make_collocation(NodeFamily::RadauRight, 4);
      cfg.precond = build_preconditioner(kind, cfg.colloc);
      cfg.sweeps = k;
      StabilityGrid grid = wide ? wide_grid() : default_grid();
      grid.nx = grid.ny = 201;
      const auto scanned = scan_stability(cfg, grid, workers);

      Manifest man;
      man.command = "reproduce fig2-stab";
      man.add("precond", precond_name(kind));
      man.add("m", 4);
      man.add("k", k);
      man.add("window", wide ? "wide" : "default");
      CsvTable table;
      table.columns = {"re", "im", "absR"};
      for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i)
          table.add_row({scanned.re_at(i), scanned.im_at(j), scanned.sample(i, j)});
      write_output(render_csv(man, table),
                   (dir / ("fig2_stab_" + precond_name(kind) + "_k" + std::to_string(k) + ".csv")).string());
    }
  }
}

template <class Problem>
void cost_rows(const Problem& prob, const std::string& label, const SweepConfig& cfg, double t_end,
               const std::vector<int>& steps, ErrorMetric metric, ProblemWeight weight,
               CsvTable& table) {
  const auto pts = convergence_study(prob, cfg, 0.0, t_end, steps, metric);
  for (const auto& p : pts) {
    const double serial = cost_model(p.counters, CostMode::Serial, cfg.colloc.size(), weight).cost;
    const double parallel = cfg.precond.diagonal
                                ? cost_model(p.counters, CostMode::Parallel, cfg.colloc.size(), weight).cost
                                : serial;
    // label is carried in a dedicated first column rendered as text
    std::vector<std::string> row{label, fmt17(p.dt), fmt17(p.error), fmt17(serial), fmt17(parallel)};
    table.rows.push_back(std::move(row));
  }
}

inline SweepConfig scheme_for(const std::string& name, int sweeps, double newton_tol) {
  SchemeOptions opt;
  opt.precond = name;
  opt.m = 4;
  opt.sweeps = sweeps;
  opt.newton_tol = newton_tol;
  return opt.build();
}

inline void reproduce_lorenz(const std::filesystem::path& dir, int) {
  auto prob = lorenz();
  const double t_end = LorenzProblem::kDefaultTEnd;
  prob.prepare_reference(t_end, 8192);

  // error vs dt for min-sr-ns and pic, K = 1..5
  for (const std::string name : {"min-sr-ns", "pic"}) {
    Manifest man;
    man.command = "reproduce fig3-lorenz";
    man.add("problem", "lorenz");
    man.add("precond", name);
    CsvTable table;
    table.columns = {"dt"};
    for (int k = 1; k <= 5; ++k) table.columns.push_back("err_k" + std::to_string(k));
    const auto steps = pow2_steps(5, 9);
    std::vector<std::vector<double>> rows(steps.size());
    for (size_t s = 0; s < steps.size(); ++s) rows[s].push_back(t_end / steps[s]);
    for (int k = 1; k <= 5; ++k) {
      const auto cfg = scheme_for(name, k, -1.0);
      const auto pts = convergence_study(prob, cfg, 0.0, t_end, steps, ErrorMetric::LinfTrajectory);
      for (size_t s = 0; s < steps.size(); ++s) rows[s].push_back(pts[s].error);
    }
    for (const auto& r : rows) table.add_row(r);
    write_output(render_csv(man, table), (dir / ("fig3_lorenz_conv_" + name + ".csv")).string());
  }

  // error vs cost at K = 4
  Manifest man;
  man.command = "reproduce fig3-lorenz";
  man.add("problem", "lorenz");
  man.add("k", 4);
  CsvTable table;
  table.columns = {"method", "dt", "error", "cost_serial", "cost_parallel"};
  const auto steps = pow2_steps(5, 11);
  for (const std::string name :
       {"min-sr-ns", "min-sr-s", "min-sr-flex", "vdhs", "pic", "lu", "ie", "rk4", "esdirk43"})
    cost_rows(prob, name, scheme_for(name, 4, -1.0), t_end, steps, ErrorMetric::LinfTrajectory,
              ProblemWeight::Standard, table);
  write_output(render_csv(man, table), (dir / "fig3_lorenz_cost_k4.csv").string());
}

inline void reproduce_prothero(const std::filesystem::path& dir, int) {
  const auto prob = prothero_robinson(1e-3);
  const double t_end = 2.0 * M_PI;
  for (int k : {4, 6}) {
    Manifest man;
    man.command = "reproduce fig4-prothero";
    man.add("problem", "prothero-robinson");
    man.add("eps", 1e-3);
    man.add("k", k);
    CsvTable table;
    table.columns = {"method", "dt", "error", "cost_serial", "cost_parallel"};
    const auto steps = pow2_steps(3, 13);
    for (const std::string name : {"min-sr-s", "min-sr-flex", "vdhs", "lu", "esdirk43"})
      cost_rows(prob, name, scheme_for(name, k, -1.0), t_end, steps, ErrorMetric::LinfTrajectory,
                ProblemWeight::Standard, table);
    write_output(render_csv(man, table),
                 (dir / ("fig4_prothero_k" + std::to_string(k) + ".csv")).string());
  }
}

inline void reproduce_allen_cahn(const std::filesystem::path& dir, int) {
  const auto prob = allen_cahn_1d(0.04, 0.04, 2047);
  const double t_end = 50.0;
  Manifest man;
  man.command = "reproduce fig5-allen-cahn";
  man.add("problem", "allen-cahn");
  man.add("eps", 0.04);
  man.add("dw", 0.04);
  man.add("npoints", 2047);
  man.add("k", 4);
  man.add("newton-tol", 1e-8);
  CsvTable table;
  table.columns = {"method", "dt", "error", "cost_serial", "cost_parallel"};
  const std::vector<int> steps{16, 32, 64, 128, 256};
  for (const std::string name : {"min-sr-flex", "min-sr-s", "ie-par", "lu", "esdirk43"})
    cost_rows(prob, name, scheme_for(name, 4, 1e-8), t_end, steps, ErrorMetric::L2Final,
              ProblemWeight::AllenCahn, table);
  write_output(render_csv(man, table), (dir / "fig5_allen_cahn_k4.csv").string());
}

inline int cmd_reproduce(const std::string& figure, const std::string& out_dir, int workers) {
  const std::filesystem::path dir = out_dir.empty() ? "." : out_dir;
  std::filesystem::create_directories(dir);
  if (figure == "fig1-conv") {
    reproduce_conv(dir, workers);
  } else if (figure == "fig2-stab") {
    reproduce_stab(dir, workers);
  } else if (figure == "fig3-lorenz") {
    reproduce_lorenz(dir, workers);
  } else if (figure == "fig4-prothero") {
    reproduce_prothero(dir, workers);
  } else if (figure == "fig5-allen-cahn") {
    reproduce_allen_cahn(dir, workers);
  } else {
    throw InvalidArgument("unknown figure id '" + figure +
                          "' (fig1-conv, fig2-stab, fig3-lorenz, fig4-prothero, fig5-allen-cahn)");
  }
  std::cout << "wrote " << figure << " datasets to " << dir.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// entry point
// ---------------------------------------------------------------------------

inline int run(int argc, const char* const* argv) {
  CLI::App app{"parallel spectral deferred corrections toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", PSDC_VERSION);

  // nodes
  std::string nodes_family = "radau-right";
  int nodes_m = 4;
  OutputOptions nodes_out;
  auto* nodes_cmd = app.add_subcommand("nodes", "collocation nodes, Q matrix and weights");
  nodes_cmd->add_option("--family", nodes_family, "node family");
  nodes_cmd->add_option("--m", nodes_m, "number of nodes");
  nodes_out.attach(nodes_cmd);

  // coeffs
  std::string coeffs_kind = "min-sr-ns", coeffs_family = "radau-right";
  int coeffs_m = 4, coeffs_k = 0;
  OutputOptions coeffs_out;
  auto* coeffs_cmd = app.add_subcommand("coeffs", "preconditioner coefficients");
  coeffs_cmd->add_option("--kind", coeffs_kind, "preconditioner kind");
  coeffs_cmd->add_option("--family", coeffs_family, "node family");
  coeffs_cmd->add_option("--m", coeffs_m, "number of nodes");
  coeffs_cmd->add_option("--k", coeffs_k, "sweep index (min-sr-flex)");
  coeffs_out.attach(coeffs_cmd);

  // optimize
  std::string opt_family = "radau-right", opt_cache;
  int opt_m = 4;
  OutputOptions opt_out;
  auto* opt_cmd = app.add_subcommand("optimize", "MIN-SR-S coefficients via continuation");
  opt_cmd->add_option("--family", opt_family, "node family");
  opt_cmd->add_option("--m", opt_m, "number of nodes");
  opt_cmd->add_option("--cache", opt_cache, "JSON coefficient cache file");
  opt_out.attach(opt_cmd);

  // integrate
  ProblemOptions int_prob;
  SchemeOptions int_scheme;
  double int_t0 = 0.0, int_tend = 1.0, int_dt = 0.0;
  int int_nsteps = 0;
  std::string int_metric = "linf";
  OutputOptions int_out;
  auto* int_cmd = app.add_subcommand("integrate", "run the SDC time stepper");
  int_prob.attach(int_cmd);
  int_scheme.attach(int_cmd);
  int_cmd->add_option("--t0", int_t0, "start time");
  int_cmd->add_option("--t-end", int_tend, "end time");
  int_cmd->add_option("--dt", int_dt, "step size (must divide the interval)");
  int_cmd->add_option("--n-steps", int_nsteps, "number of steps (alternative to --dt)");
  int_cmd->add_option("--metric", int_metric, "error metric (linf, l2)");
  int_out.attach(int_cmd);

  // convergence
  ProblemOptions conv_prob;
  SchemeOptions conv_scheme;
  double conv_t0 = 0.0, conv_tend = 1.0;
  std::string conv_steps = "16,32,64,128", conv_metric = "linf";
  OutputOptions conv_out;
  auto* conv_cmd = app.add_subcommand("convergence", "error vs step size study");
  conv_prob.attach(conv_cmd);
  conv_scheme.attach(conv_cmd);
  conv_cmd->add_option("--t0", conv_t0, "start time");
  conv_cmd->add_option("--t-end", conv_tend, "end time");
  conv_cmd->add_option("--steps", conv_steps, "comma-separated step counts");
  conv_cmd->add_option("--metric", conv_metric, "error metric (linf, l2)");
  conv_out.attach(conv_cmd);

  // stability
  SchemeOptions stab_scheme;
  std::string stab_grid;
  int stab_res = 400, stab_res_y = 0;
  bool stab_wide = false;
  OutputOptions stab_out;
  auto* stab_cmd = app.add_subcommand("stability", "sample |R(z)| on a complex grid");
  stab_scheme.attach(stab_cmd);
  stab_cmd->add_option("--grid", stab_grid, "window re_min:re_max:im_min:im_max");
  stab_cmd->add_option("--res", stab_res, "grid resolution (nx)");
  stab_cmd->add_option("--res-y", stab_res_y, "grid resolution ny (default: nx)");
  stab_cmd->add_flag("--wide", stab_wide, "use the wide window preset");
  stab_out.attach(stab_cmd);

  // cost
  long long cost_rhs = 0, cost_newton = 0;
  bool cost_parallel = false;
  int cost_m = 4;
  std::string cost_weight = "standard";
  OutputOptions cost_out;
  auto* cost_cmd = app.add_subcommand("cost", "evaluate the cost model");
  cost_cmd->add_option("--rhs", cost_rhs, "right-hand-side evaluations")->required();
  cost_cmd->add_option("--newton", cost_newton, "Newton iterations")->required();
  cost_cmd->add_flag("--parallel", cost_parallel, "divide by M * 0.8");
  cost_cmd->add_option("--m", cost_m, "number of nodes");
  cost_cmd->add_option("--weight", cost_weight, "standard or allen-cahn");
  cost_out.attach(cost_cmd);

  // reproduce
  std::string rep_figure, rep_dir;
  int rep_workers = 0;
  auto* rep_cmd = app.add_subcommand("reproduce", "regenerate figure datasets");
  rep_cmd->add_option("--figure", rep_figure, "fig1-conv ... fig5-allen-cahn")->required();
  rep_cmd->add_option("--out-dir", rep_dir, "output directory");
  rep_cmd->add_option("--workers", rep_workers, "worker threads for grid scans");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (nodes_cmd->parsed()) return cmd_nodes(nodes_family, nodes_m, nodes_out);
    if (coeffs_cmd->parsed()) return cmd_coeffs(coeffs_kind, coeffs_family, coeffs_m, coeffs_k, coeffs_out);
    if (opt_cmd->parsed()) return cmd_optimize(opt_family, opt_m, opt_cache, opt_out);
    if (int_cmd->parsed())
      return cmd_integrate(int_prob, int_scheme, int_t0, int_tend, int_dt, int_nsteps, int_metric, int_out);
    if (conv_cmd->parsed())
      return cmd_convergence(conv_prob, conv_scheme, conv_t0, conv_tend, conv_steps, conv_metric, conv_out);
    if (stab_cmd->parsed()) return cmd_stability(stab_scheme, stab_grid, stab_res, stab_res_y, stab_wide, stab_out);
    if (cost_cmd->parsed()) return cmd_cost(cost_rhs, cost_newton, cost_parallel, cost_m, cost_weight, cost_out);
    if (rep_cmd->parsed()) {
      int workers = rep_workers;
      if (workers <= 0) {
        if (const char* env = std::getenv("PSDC_WORKERS")) workers = std::atoi(env);
        if (workers <= 0) workers = 1;
      }
      return cmd_reproduce(rep_figure, rep_dir, workers);
    }
  } catch (const InvalidArgument& e) {
    std::cerr << "psdc: " << e.what() << "\n";
    return 2;
  } catch (const NumericalFailure& e) {
    std::cerr << "psdc: numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "psdc: " << e.what() << "\n";
    return 3;
  }
  return 2;
}

inline int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("psdc");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace psdc_cli

#endif
