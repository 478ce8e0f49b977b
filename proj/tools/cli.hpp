#pragma once

// Command-line front end: solve, sweep and verify.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "rsb/solver.hpp"
#include "suites.hpp"

namespace rsb::cli {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitFailure = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ModelFlags {
  std::string model = "sk";
  int k = 0;
  double beta = 1.0;
  double j0 = 0.0;
  double j = 1.0;
  double alpha = 0.0;
  std::string theta;
  bool extremize = false;
  int nodes = 0;
  double damping = 0.5;
  double tol = 1e-10;
  int max_iter = 20000;
  std::uint64_t seed = 0;
};

struct SweepAxis {
  std::string name;
  double start = 0.0;
  double stop = 0.0;
  int steps = 1;

  std::vector<double> values() const {
    std::vector<double> v(steps);
    for (int i = 0; i < steps; ++i) v[i] = steps == 1 ? start : start + (stop - start) * i / (steps - 1);
    return v;
  }
};

inline double parse_double(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw UsageError("cannot parse " + what + " '" + s + "'");
  }
  if (used != s.size()) throw UsageError("cannot parse " + what + " '" + s + "'");
  return v;
}

inline std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(item, "theta"));
  return out;
}

inline SweepAxis parse_axis(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() != 4) throw UsageError("sweep axis must be name:start:stop:steps, got '" + spec + "'");
  SweepAxis a;
  a.name = parts[0];
  a.start = parse_double(parts[1], "sweep start");
  a.stop = parse_double(parts[2], "sweep stop");
  const double steps = parse_double(parts[3], "sweep steps");
  if (steps < 1 || steps != std::floor(steps) || steps > 1e6) throw UsageError("sweep steps must be an integer >= 1");
  a.steps = static_cast<int>(steps);
  if (!(a.stop >= a.start)) throw UsageError("sweep stop must be >= start");
  return a;
}

inline QuadratureSpec quadrature_from(int nodes_flag) {
  QuadratureSpec q;
  if (const char* env = std::getenv("RSB_NODES"); env && *env) {
    const double v = parse_double(env, "RSB_NODES");
    if (v != std::floor(v) || v < 2 || v > 1e6) throw UsageError("RSB_NODES must be an integer >= 2");
    q.nodes_per_level = static_cast<int>(v);
  }
  if (nodes_flag != 0) {
    if (nodes_flag < 2) throw UsageError("--nodes must be at least 2");
    q.nodes_per_level = nodes_flag;
  }
  return q;
}

// Validated model and solver settings built from the flags.
struct Problem {
  ModelSpec spec;
  int k = 0;
  std::vector<double> thetas;
  bool extremize = false;
  SolverOptions opts;
  QuadratureSpec quad;
};

inline void set_parameter(ModelSpec& ms, const std::string& name, double v) {
  if (name == "beta") {
    ms.sk.beta = v;
    ms.hop.beta = v;
  } else if (name == "j0" && ms.model == Model::sk) {
    ms.sk.j0 = v;
  } else if (name == "j" && ms.model == Model::sk) {
    ms.sk.j = v;
  } else if (name == "alpha" && ms.model == Model::hopfield) {
    ms.hop.alpha = v;
  } else {
    throw UsageError("parameter '" + name + "' does not apply to the " + std::string(to_string(ms.model)) +
                     " model");
  }
}

inline void validate_parameters(const ModelSpec& ms) {
  try {
    if (ms.model == Model::sk) ms.sk.validate(); else ms.hop.validate();
  } catch (const ValidationError& e) {
    throw UsageError(e.what());
  }
}

inline Problem make_problem(const ModelFlags& f) {
  Problem p;
  try {
    p.spec.model = parse_model(f.model);
  } catch (const ValidationError& e) {
    throw UsageError(e.what());
  }
  p.spec.sk = {f.beta, f.j0, f.j};
  p.spec.hop = {f.beta, f.alpha};
  validate_parameters(p.spec);
  if (f.k < 0 || f.k > 8) throw UsageError("--k must lie in [0, 8]");
  p.k = f.k;
  p.extremize = f.extremize;
  if (!f.theta.empty() && f.extremize) throw UsageError("--theta and --extremize-theta are exclusive");
  if (!f.theta.empty()) p.thetas = parse_list(f.theta);
  if (!f.extremize) {
    if (p.thetas.size() != static_cast<std::size_t>(p.k))
      throw UsageError(fmt::format("--theta needs {} values for k={} (or use --extremize-theta)", p.k, p.k));
    try {
      detail::check_thetas(p.thetas);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
  } else if (p.k == 0) {
    throw UsageError("--extremize-theta needs k >= 1");
  }
  p.opts.damping = f.damping;
  p.opts.tol = f.tol;
  p.opts.max_iter = f.max_iter;
  try {
    p.opts.validate();
  } catch (const ValidationError& e) {
    throw UsageError(e.what());
  }
  p.quad = quadrature_from(f.nodes);
  return p;
}

inline double best_pressure(const std::vector<BranchOutcome>& branches) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& b : branches)
    if (b.report && b.report->converged) best = std::max(best, b.report->pressure);
  return best;
}

// Thetas maximizing the best converged pressure, or the fixed thetas.
inline std::vector<double> resolve_thetas(const Problem& p, const ModelSpec& ms) {
  if (!p.extremize) return p.thetas;
  auto objective = [&](const std::vector<double>& th) {
    try {
      detail::check_thetas(th);
      return best_pressure(solve_branches(ms, p.k, th, p.opts, p.quad));
    } catch (const Error&) {
      return -std::numeric_limits<double>::infinity();
    }
  };
  const std::vector<std::pair<double, double>> bracket(p.k, {0.01, 0.99});
  auto res = extremize_theta(objective, bracket, 1e-3);
  // A degenerate objective leaves every coordinate at the bracket midpoint.
  if (res.degenerate) res.thetas = suites::even_thetas(p.k);
  return res.thetas;
}

inline nlohmann::json parameters_json(const ModelSpec& ms) {
  if (ms.model == Model::sk) return {{"beta", ms.sk.beta}, {"j0", ms.sk.j0}, {"j", ms.sk.j}};
  return {{"beta", ms.hop.beta}, {"alpha", ms.hop.alpha}};
}

inline void add_model_flags(CLI::App* sub, ModelFlags& f) {
  sub->add_option("--model", f.model, "sk or hopfield")->check(CLI::IsMember({"sk", "hopfield"}));
  sub->add_option("--k", f.k, "replica-symmetry-breaking level");
  sub->add_option("--beta", f.beta, "inverse temperature");
  sub->add_option("--j0", f.j0, "SK ferromagnetic coupling");
  sub->add_option("--j", f.j, "SK disorder strength");
  sub->add_option("--alpha", f.alpha, "Hopfield load P/N");
  sub->add_option("--theta", f.theta, "comma-separated Parisi parameters");
  sub->add_flag("--extremize-theta", f.extremize, "maximize the pressure over the Parisi parameters");
  sub->add_option("--nodes", f.nodes, "quadrature nodes per level (overrides RSB_NODES)");
  sub->add_option("--damping", f.damping, "fixed-point damping in (0, 1]");
  sub->add_option("--tol", f.tol, "fixed-point tolerance");
  sub->add_option("--max-iter", f.max_iter, "fixed-point iteration cap");
  sub->add_option("--seed", f.seed, "random seed");
}

inline int cmd_solve(const ModelFlags& f, std::ostream& out, std::ostream& err) {
  const Problem p = make_problem(f);
  const std::vector<double> thetas = resolve_thetas(p, p.spec);
  const auto branches = solve_branches(p.spec, p.k, thetas, p.opts, p.quad);

  std::vector<const BranchOutcome*> converged;
  for (const auto& b : branches) {
    if (b.report && b.report->converged) {
      converged.push_back(&b);
    } else if (b.report) {
      err << fmt::format("branch {}: not converged after {} iterations (residual {:.3g})\n", b.branch,
                         b.report->iterations, b.report->residual);
    } else {
      err << fmt::format("branch {}: {}\n", b.branch, b.error);
    }
  }
  std::stable_sort(converged.begin(), converged.end(), [](const BranchOutcome* a, const BranchOutcome* b) {
    return a->report->pressure > b->report->pressure;
  });

  nlohmann::json doc{{"model", to_string(p.spec.model)}, {"parameters", parameters_json(p.spec)},
                     {"k", p.k}, {"thetas", thetas}, {"reports", nlohmann::json::array()}};
  for (const auto* b : converged) {
    nlohmann::json r = *b->report;
    r["branch"] = b->branch;
    doc["reports"].push_back(std::move(r));
  }
  out << doc.dump(2) << "\n";
  return converged.empty() ? kExitFailure : kExitOk;
}

// CSV for one grid point, one row per branch.
inline std::string sweep_rows(const Problem& p, const ModelSpec& ms) {
  const auto num = [](double v) { return fmt::format("{:.17g}", v); };
  const std::size_t levels = static_cast<std::size_t>(p.k) + 1;
  const bool hop = ms.model == Model::hopfield;
  std::string params = hop ? fmt::format("{},{}", num(ms.hop.beta), num(ms.hop.alpha))
                           : fmt::format("{},{},{}", num(ms.sk.beta), num(ms.sk.j0), num(ms.sk.j));
  std::vector<double> thetas;
  std::vector<BranchOutcome> branches;
  try {
    validate_parameters(ms);
    thetas = resolve_thetas(p, ms);
    branches = solve_branches(ms, p.k, thetas, p.opts, p.quad);
  } catch (const std::exception& e) {
    BranchOutcome b;
    b.error = e.what();
    branches = {b};
  }
  std::string theta_cols;
  for (int a = 0; a < p.k; ++a)
    theta_cols += "," + (static_cast<std::size_t>(a) < thetas.size() ? num(thetas[a]) : std::string());

  std::string out;
  for (const auto& b : branches) {
    out += params + "," + std::to_string(p.k) + theta_cols + "," + std::to_string(b.branch);
    const std::size_t numeric = 1 + levels * (hop ? 2 : 1) + 2;
    if (!b.report) {
      out += std::string(numeric, ',') + ",false\n";
      continue;
    }
    const SolveReport& r = *b.report;
    out += "," + num(r.ansatz.m);
    for (double q : r.ansatz.qs) out += "," + num(q);
    if (hop)
      for (double v : r.ansatz.ps) out += "," + num(v);
    out += "," + num(r.pressure) + "," + num(r.residual) + (r.converged ? ",true\n" : ",false\n");
  }
  return out;
}

inline std::string sweep_header(const Problem& p) {
  const bool hop = p.spec.model == Model::hopfield;
  std::string h = hop ? "beta,alpha,k" : "beta,j0,j,k";
  for (int a = 1; a <= p.k; ++a) h += fmt::format(",theta{}", a);
  h += ",branch,m";
  for (int a = 1; a <= p.k + 1; ++a) h += fmt::format(",q{}", a);
  if (hop)
    for (int a = 1; a <= p.k + 1; ++a) h += fmt::format(",p{}", a);
  return h + ",pressure,residual,converged\n";
}

inline int cmd_sweep(const ModelFlags& f, const std::vector<std::string>& axes_spec, int jobs,
                     const std::string& out_path, std::ostream& out) {
  const Problem p = make_problem(f);
  if (axes_spec.empty() || axes_spec.size() > 2) throw UsageError("--sweep takes one or two axes");
  if (jobs < 1) throw UsageError("--jobs must be at least 1");
  std::vector<SweepAxis> axes;
  for (const auto& s : axes_spec) {
    axes.push_back(parse_axis(s));
    ModelSpec probe = p.spec;
    set_parameter(probe, axes.back().name, axes.back().start);
  }
  if (axes.size() == 2 && axes[0].name == axes[1].name) throw UsageError("sweep axes must differ");

  std::vector<ModelSpec> grid;
  const std::vector<double> outer = axes[0].values();
  const std::vector<double> inner = axes.size() == 2 ? axes[1].values() : std::vector<double>{0.0};
  for (double u : outer)
    for (double v : inner) {
      ModelSpec ms = p.spec;
      set_parameter(ms, axes[0].name, u);
      if (axes.size() == 2) set_parameter(ms, axes[1].name, v);
      grid.push_back(ms);
    }

  std::vector<std::string> rows(grid.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++) rows[i] = sweep_rows(p, grid[i]);
  };
  std::vector<std::thread> pool;
  const int threads = std::min<int>(jobs, static_cast<int>(grid.size()));
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::string csv = sweep_header(p);
  for (const auto& r : rows) csv += r;
  if (out_path.empty()) {
    out << csv;
  } else {
    std::ofstream file(out_path, std::ios::binary);
    if (!file) throw UsageError("cannot open '" + out_path + "' for writing");
    file << csv;
  }
  return kExitOk;
}

struct VerifyFlags {
  std::string suite;
  int n = 0;
  int n_hopfield = 14;
  int samples = 0;
  int sweeps = 2000;
  int glass_sweeps = suites::kGlassSweeps;
  int bins = 41;
  int points = 10;
  int max_k = 2;
  int grid = 5;
  int nodes = 0;
  std::uint64_t seed = 0;
};

inline std::vector<suites::Check> run_suite(const VerifyFlags& f) {
  const QuadratureSpec quad = quadrature_from(f.nodes);
  if (f.suite == "collapse") return suites::collapse(quad, f.grid);
  if (f.suite == "stationarity") return suites::stationarity(quad, f.points, f.max_k);
  if (f.suite == "enumeration")
    return suites::enumeration(f.n ? f.n : 12, f.n_hopfield, f.samples ? f.samples : 200, f.seed, quad);
  if (f.suite == "lemmas") return suites::lemmas(f.n ? f.n : 6, f.samples ? f.samples : 5000, f.seed);
  if (f.suite == "histogram") return suites::histogram(f.sweeps, f.bins, f.seed, f.glass_sweeps);
  throw UsageError("unknown suite '" + f.suite + "'");
}

inline int cmd_verify(const VerifyFlags& f, std::ostream& out) {
  const auto checks = run_suite(f);
  out << suites::format_checks(checks);
  const auto passed = std::count_if(checks.begin(), checks.end(), [](const suites::Check& c) { return c.pass; });
  out << fmt::format("{}: {}/{} checks passed\n", f.suite, passed, checks.size());
  return suites::all_pass(checks) ? kExitOk : kExitFailure;
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Replica-symmetric and K-step RSB solver for the SK and Hopfield models", "rsb"};
  app.require_subcommand(1);

  ModelFlags solve_flags, sweep_flags;
  auto* solve = app.add_subcommand("solve", "solve the self-consistency equations");
  add_model_flags(solve, solve_flags);

  auto* sweep = app.add_subcommand("sweep", "solve over a one- or two-axis parameter grid, CSV output");
  add_model_flags(sweep, sweep_flags);
  std::vector<std::string> axes;
  int jobs = 1;
  std::string out_path;
  sweep->add_option("--sweep", axes, "axis as name:start:stop:steps (repeat for a second axis)")->required();
  sweep->add_option("--jobs", jobs, "grid points solved concurrently");
  sweep->add_option("--out", out_path, "write the CSV here instead of standard output");

  VerifyFlags vf;
  auto* verify = app.add_subcommand("verify", "run a verification suite");
  verify->add_option("--suite", vf.suite, "collapse, stationarity, enumeration, lemmas or histogram")->required();
  verify->add_option("--n", vf.n, "system size (enumeration: SK size, lemmas: N)");
  verify->add_option("--n-hopfield", vf.n_hopfield, "Hopfield size for the enumeration suite");
  verify->add_option("--samples", vf.samples, "disorder samples");
  verify->add_option("--sweeps", vf.sweeps, "Metropolis sweeps per chain");
  verify->add_option("--glass-sweeps", vf.glass_sweeps, "Metropolis sweeps for the beta = 2 spin-glass histogram");
  verify->add_option("--bins", vf.bins, "histogram bins");
  verify->add_option("--points", vf.points, "parameter points per model for the stationarity suite");
  verify->add_option("--max-k", vf.max_k, "highest breaking level for the stationarity suite");
  verify->add_option("--grid", vf.grid, "grid size per axis for the collapse suite");
  verify->add_option("--nodes", vf.nodes, "quadrature nodes per level (overrides RSB_NODES)");
  verify->add_option("--seed", vf.seed, "random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (solve->parsed()) return cmd_solve(solve_flags, out, err);
    if (sweep->parsed()) return cmd_sweep(sweep_flags, axes, jobs, out_path, out);
    return cmd_verify(vf, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"rsb"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace rsb::cli
