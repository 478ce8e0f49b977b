// Acceptance runner: one PASS/FAIL line per criterion, exit 0 iff all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "cli.hpp"
#include "random_ansatz.hpp"
#include "reference_forms.hpp"
#include "suites.hpp"

using namespace rsb;

namespace {

// Tolerances and budgets.
constexpr double kClosedFormTol = 1e-9;
constexpr int kRandomAnsatze = 20;
constexpr double kCurieWeissTol = 1e-12;
constexpr double kOnsetTol = 0.01;
constexpr double kRetrievalTol = 0.05;
constexpr double kCollapseSeconds = 30;
constexpr double kClosedFormSeconds = 60;
constexpr double kStationaritySeconds = 300;
constexpr double kEnumerationSeconds = 120;
constexpr double kLemmaSeconds = 300;
constexpr double kRetrievalSeconds = 120;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, double budget, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::string timing = fmt::format("{:.1f} s", secs);
  if (budget > 0) {
    timing += fmt::format(" (limit {:.0f} s)", budget);
    if (secs > budget) o.pass = false;
  }
  if (!o.pass) ++failures;
  std::cout << fmt::format("{} {} {}: {}; {}", o.pass ? "PASS" : "FAIL", id, title, o.detail, timing) << std::endl;
}

Outcome from_checks(const std::vector<suites::Check>& checks) {
  std::string failed;
  std::size_t passed = 0;
  for (const auto& c : checks) {
    if (c.pass) ++passed;
    else failed += fmt::format(" [{} = {:.6g} vs {:.3g}]", c.name, c.measured, c.bound);
  }
  return {passed == checks.size(), fmt::format("{}/{} checks{}", passed, checks.size(), failed)};
}

Outcome closed_forms() {
  std::mt19937_64 eng(2024);
  std::uniform_real_distribution<double> ub(0.2, 2.5), uj0(0.0, 1.5), uj(0.5, 1.5), ua(0.0, 0.15);
  const QuadratureSpec spec;
  double worst = 0.0;
  for (int i = 0; i < kRandomAnsatze; ++i) {
    const SkParams sp{ub(eng), uj0(eng), uj(eng)};
    const RsbAnsatz a1 = fixtures::random_sk_ansatz(eng, 1), a2 = fixtures::random_sk_ansatz(eng, 2);
    worst = std::max(worst, std::fabs(sk_pressure_krsb(sp, a1, spec).pressure -
                                      reference::sk_1rsb(sp.beta, sp.j0, sp.j, a1.m, a1.qs[0], a1.qs[1], a1.thetas[0])));
    worst = std::max(worst, std::fabs(sk_pressure_krsb(sp, a2, spec).pressure -
                                      reference::sk_2rsb(sp.beta, sp.j0, sp.j, a2.m, a2.qs[0], a2.qs[1], a2.qs[2],
                                                         a2.thetas[0], a2.thetas[1])));
    const HopfieldParams hp{ub(eng), ua(eng)};
    const RsbAnsatz h1 = fixtures::random_hopfield_ansatz(eng, hp, 1), h2 = fixtures::random_hopfield_ansatz(eng, hp, 2);
    worst = std::max(worst, std::fabs(hop_pressure_krsb(hp, h1, spec) -
                                      reference::hop_1rsb(hp.beta, hp.alpha, h1.m, h1.qs[0], h1.qs[1], h1.ps[0],
                                                          h1.ps[1], h1.thetas[0])));
    worst = std::max(worst, std::fabs(hop_pressure_krsb(hp, h2, spec) -
                                      reference::hop_2rsb(hp.beta, hp.alpha, h2.m, h2.qs[0], h2.qs[1], h2.qs[2],
                                                          h2.ps[0], h2.ps[1], h2.ps[2], h2.thetas[0], h2.thetas[1])));
  }
  return {worst <= kClosedFormTol,
          fmt::format("{} ansaetze per form, max |diff| {:.3g} (tol {:.0e})", kRandomAnsatze, worst, kClosedFormTol)};
}

Outcome curie_weiss() {
  const QuadratureSpec spec;
  double worst = 0.0;
  for (double beta : {0.3, 0.9, 1.0, 1.7, 3.0})
    for (double m : {-0.9, -0.2, 0.0, 0.4, 0.95}) {
      const double exact = std::log(2.0) + std::log(std::cosh(beta * m)) - 0.5 * beta * m * m;
      worst = std::max(worst, std::fabs(hop_pressure_rs({beta, 0.0}, m, 0.5, 0.0, spec) - exact));
    }
  const double onset = suites::curie_weiss_onset(0.5, 1.5, kOnsetTol / 2, spec);
  const bool pass = worst <= kCurieWeissTol && std::fabs(onset - 1.0) <= kOnsetTol;
  return {pass, fmt::format("identity max |diff| {:.3g} (tol {:.0e}), onset beta {:.4f} (1 +- {})", worst,
                            kCurieWeissTol, onset, kOnsetTol)};
}

Outcome retrieval() {
  ModelSpec ms;
  ms.model = Model::hopfield;
  ms.hop = {2.0, 0.05};
  const SolveReport rs = solve(ms, make_rs(1.0, 1.0, 0.0), SolverOptions{}, QuadratureSpec{});
  if (!rs.converged) return {false, "RS retrieval solve did not converge"};
  const auto sample = make_hopfield_sample(2000, 0.05, 7, 0);
  const MetropolisResult mc = metropolis_run(sample, 2.0, 2000, InitPolicy::aligned, 7);
  const double gap = std::fabs(mc.overlap_mean - rs.ansatz.m) + 3 * mc.overlap_se;
  return {gap <= kRetrievalTol, fmt::format("MC m {:.4f} +- {:.4f}, RS m {:.6f}, |diff| + 3 SE {:.4f} (tol {})",
                                            mc.overlap_mean, mc.overlap_se, rs.ansatz.m, gap, kRetrievalTol)};
}

Outcome domain_guard() {
  std::mt19937_64 eng(99);
  std::uniform_real_distribution<double> ub(1.0, 8.0);
  const QuadratureSpec spec;
  int points = 0, guarded = 0;
  while (points < 200) {
    const HopfieldParams p{ub(eng), 0.05};
    RsbAnsatz a = fixtures::random_sk_ansatz(eng, static_cast<int>(eng() % 3));
    double q = 1.0 - p.beta * (1.0 - a.qs.back());
    bool outside = q <= 0.0;
    for (int i = a.k - 1; i >= 0; --i) {
      q -= p.beta * a.thetas[i] * (a.qs[i + 1] - a.qs[i]);
      outside = outside || q <= 0.0;
    }
    if (!outside) continue;
    ++points;
    a.ps = fixtures::sorted_uniform(eng, a.k + 1, 0.0, 3.0);
    int raised = 0;
    auto expect = [&](const std::function<void()>& f) {
      try {
        f();
      } catch (const SusceptibilityDivergence&) {
        ++raised;
      }
    };
    expect([&] { hop_q_denominators(p, a); });
    expect([&] { hop_p_closed_form(p, a); });
    expect([&] { hop_pressure_krsb(p, a, spec); });
    expect([&] { hop_sce_krsb(p, a, spec); });
    guarded += raised == 4;
  }

  std::ostringstream out, err;
  const int code = cli::run({"sweep", "--model", "hopfield", "--alpha", "0.05", "--sweep", "beta:0.5:3:11"}, out, err);
  const std::string csv = out.str();
  int error_rows = 0;
  std::stringstream lines(csv);
  std::string line;
  while (std::getline(lines, line))
    if (line.size() >= 6 && line.compare(line.size() - 6, 6, ",false") == 0) ++error_rows;
  const bool clean = csv.find("nan") == std::string::npos && csv.find("inf") == std::string::npos;
  const bool pass = guarded == points && code == 0 && error_rows > 0 && clean;
  return {pass, fmt::format("{}/{} points outside the domain raised; sweep exit {}, {} converged=false rows, {}",
                            guarded, points, code, error_rows, clean ? "no nan/inf" : "nan/inf present")};
}

std::string capture(const std::string& cmd) {
  std::string out;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) throw std::runtime_error("cannot run " + cmd);
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  const int status = pclose(pipe);
  return fmt::format("status {}\n", status) + out;
}

Outcome determinism() {
  const std::string cli = RSB_CLI_PATH;
  const std::vector<std::string> commands{
      cli + " verify --suite enumeration --n 10 --n-hopfield 10 --samples 40 --seed 5",
      cli + " verify --suite histogram --sweeps 400 --glass-sweeps 400 --seed 5",
      cli + " sweep --model sk --k 1 --theta 0.5 --sweep beta:0.5:2:4 --sweep j0:0:1:3 --jobs 4",
      cli + " sweep --model hopfield --alpha 0.05 --sweep beta:0.5:3:6 --jobs 3"};
  int identical = 0;
  for (const auto& c : commands) identical += capture(c) == capture(c);
  return {identical == static_cast<int>(commands.size()),
          fmt::format("{}/{} commands byte-identical across two runs", identical, commands.size())};
}

}  // namespace

int main() {
  const QuadratureSpec spec;
  report(1, "collapse hierarchy", kCollapseSeconds, [&] { return from_checks(suites::collapse(spec)); });
  report(2, "closed-form anchoring", kClosedFormSeconds, closed_forms);
  report(3, "fixed points are stationary", kStationaritySeconds,
         [&] { return from_checks(suites::stationarity(spec, 10, 2)); });
  report(4, "finite-N enumeration vs RS", kEnumerationSeconds,
         [&] { return from_checks(suites::enumeration(12, 14, 200, 7, spec)); });
  report(5, "interpolation derivative identities", kLemmaSeconds,
         [&] { return from_checks(suites::lemmas(6, 5000, 7)); });
  report(6, "Curie-Weiss limit", 0, curie_weiss);
  report(7, "Monte Carlo retrieval", kRetrievalSeconds, retrieval);
  report(8, "susceptibility domain guard", 0, domain_guard);
  report(9, "determinism", 0, determinism);
  std::cout << fmt::format("{}/9 criteria passed", 9 - failures) << std::endl;
  return failures == 0 ? 0 : 1;
}
