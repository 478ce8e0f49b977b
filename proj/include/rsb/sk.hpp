#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "rsb/quadrature.hpp"
#include "rsb/types.hpp"

namespace rsb {

struct SkEvaluation {
  double pressure = 0.0;
  double entropy = 0.0;  // nested log 2cosh term
  double source = 0.0;   // polynomial terms in the order parameters
};

inline FieldArgument sk_field(const SkParams& p, const RsbAnsatz& a) {
  FieldArgument f;
  f.offset = p.beta * p.j0 * a.m;
  double prev = 0.0;
  for (double q : a.qs) {
    f.coeffs.push_back(p.beta * p.j * std::sqrt(std::max(0.0, q - prev)));
    prev = q;
  }
  return f;
}

// (b^2 J^2 / 4) [1 - 2 q_{K+1} + sum_a (theta_a - theta_{a-1}) q_a^2] - (b J0 / 2) m^2,
// with theta_0 = 0 and theta_{K+1} = 1.
inline double sk_source(const SkParams& p, const RsbAnsatz& a) {
  const std::size_t levels = a.qs.size();
  double bracket = 1.0 - 2.0 * a.qs.back();
  double prev_theta = 0.0;
  for (std::size_t i = 0; i < levels; ++i) {
    const double theta = i < a.thetas.size() ? a.thetas[i] : 1.0;
    bracket += (theta - prev_theta) * a.qs[i] * a.qs[i];
    prev_theta = theta;
  }
  const double b = p.beta;
  return 0.25 * b * b * p.j * p.j * bracket - 0.5 * b * p.j0 * a.m * a.m;
}

inline SkEvaluation sk_pressure_krsb(const SkParams& p, const RsbAnsatz& a,
                                     const QuadratureSpec& spec) {
  p.validate();
  validate_ansatz(a, Model::sk);
  SkEvaluation e;
  e.entropy = nested_log_cosh_expect(sk_field(p, a), a.thetas, spec);
  e.source = sk_source(p, a);
  e.pressure = e.entropy + e.source;
  return e;
}

inline SkEvaluation sk_pressure_rs(const SkParams& p, double m, double q,
                                   const QuadratureSpec& spec) {
  return sk_pressure_krsb(p, make_rs(m, q), spec);
}

// Fixed-point map: m' and every q_a' from the telescopic tanh averages.
inline RsbAnsatz sk_sce_krsb(const SkParams& p, const RsbAnsatz& a, const QuadratureSpec& spec) {
  p.validate();
  validate_ansatz(a, Model::sk);
  const NestedResult r = nested_moments(sk_field(p, a), a.thetas, spec);
  RsbAnsatz out = a;
  out.m = r.mean;
  out.qs = r.squares;
  return out;
}

inline std::pair<double, double> sk_sce_rs(const SkParams& p, double m, double q,
                                           const QuadratureSpec& spec) {
  const RsbAnsatz out = sk_sce_krsb(p, make_rs(m, q), spec);
  return {out.m, out.qs[0]};
}

}  // namespace rsb
