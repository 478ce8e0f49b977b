// Hopfield network without stored noise (alpha = 0): the retrieval
// magnetization switches on at beta = 1, located here by bisection.

#include <cmath>
#include <cstdio>

#include "rsb/solver.hpp"

namespace {

double retrieval_m(double beta) {
  rsb::ModelSpec ms;
  ms.model = rsb::Model::hopfield;
  ms.hop = {beta, 0.0};
  const auto r = rsb::solve(ms, rsb::make_rs(0.999, 0.99, 0.0), rsb::SolverOptions{}, rsb::QuadratureSpec{});
  return r.converged ? std::fabs(r.ansatz.m) : 0.0;
}

}  // namespace

int main() {
  for (double beta = 0.6; beta <= 1.61; beta += 0.1) std::printf("beta %.2f  m %.6f\n", beta, retrieval_m(beta));
  double lo = 0.5, hi = 1.5;
  while (hi - lo > 1e-3) {
    const double mid = 0.5 * (lo + hi);
    (retrieval_m(mid) > 1e-3 ? hi : lo) = mid;
  }
  std::printf("onset at beta = %.4f\n", 0.5 * (lo + hi));
}
