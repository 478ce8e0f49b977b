// Replica-symmetric SK solutions across temperature, both starting branches.

#include <cstdio>

#include "rsb/solver.hpp"

int main() {
  rsb::ModelSpec ms;
  const rsb::QuadratureSpec quad;
  std::printf("%6s %6s %7s %12s %12s %14s\n", "beta", "j0", "branch", "m", "q", "pressure");
  for (double j0 : {0.0, 1.3}) {
    for (double beta : {0.5, 1.0, 1.5, 2.0}) {
      ms.sk = {beta, j0, 1.0};
      for (const auto& b : rsb::solve_branches(ms, 0, {}, rsb::SolverOptions{}, quad)) {
        if (!b.report || !b.report->converged) {
          std::printf("%6.2f %6.2f %7d  no fixed point\n", beta, j0, b.branch);
          continue;
        }
        const auto& a = b.report->ansatz;
        std::printf("%6.2f %6.2f %7d %12.8f %12.8f %14.10f\n", beta, j0, b.branch, a.m, a.qs[0], b.report->pressure);
      }
    }
  }
}
