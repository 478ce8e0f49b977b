#pragma once

#include <cmath>
#include <string>
#include <tuple>
#include <vector>

#include "rsb/quadrature.hpp"
#include "rsb/types.hpp"

namespace rsb {

struct QDenominators {
  std::vector<double> values;  // Q_1..Q_{K+1}
};

namespace detail {

// Validates everything but the conjugate overlaps.
inline void validate_q_part(const RsbAnsatz& a) {
  RsbAnsatz copy = a;
  copy.ps.clear();
  validate_ansatz(copy, Model::sk);
}

}  // namespace detail

// Q_{K+1} = 1 - b(1 - q_{K+1});  Q_a = Q_{a+1} - b theta_a (q_{a+1} - q_a).
inline QDenominators hop_q_denominators(const HopfieldParams& p, const RsbAnsatz& a) {
  p.validate();
  detail::validate_q_part(a);
  const std::size_t levels = a.qs.size();
  QDenominators d;
  d.values.assign(levels, 0.0);
  d.values[levels - 1] = 1.0 - p.beta * (1.0 - a.qs[levels - 1]);
  for (std::size_t i = levels - 1; i-- > 0;)
    d.values[i] = d.values[i + 1] - p.beta * a.thetas[i] * (a.qs[i + 1] - a.qs[i]);
  for (std::size_t i = 0; i < levels; ++i)
    if (!(d.values[i] > 0.0))
      throw SusceptibilityDivergence("denominator Q_" + std::to_string(i + 1) +
                                     " is not positive (" + std::to_string(d.values[i]) + ")");
  return d;
}

// p_1 = b q_1 / Q_1^2;  p_h = p_{h-1} + b (q_h - q_{h-1}) / (Q_h Q_{h-1}).
// Without stored patterns (alpha = 0) there is no noise layer and p = 0.
inline std::vector<double> hop_p_closed_form(const HopfieldParams& p, const RsbAnsatz& a) {
  if (p.alpha == 0.0) {
    p.validate();
    detail::validate_q_part(a);
    return std::vector<double>(a.qs.size(), 0.0);
  }
  const auto& q = a.qs;
  const auto& Q = hop_q_denominators(p, a).values;
  std::vector<double> ps(q.size());
  ps[0] = p.beta * q[0] / (Q[0] * Q[0]);
  for (std::size_t h = 1; h < q.size(); ++h)
    ps[h] = ps[h - 1] + p.beta * (q[h] - q[h - 1]) / (Q[h] * Q[h - 1]);
  return ps;
}

inline FieldArgument hop_field(const HopfieldParams& p, double m, const std::vector<double>& ps) {
  FieldArgument f;
  f.offset = p.beta * m;
  double prev = 0.0;
  for (double pv : ps) {
    f.coeffs.push_back(std::sqrt(p.alpha * p.beta * std::max(0.0, pv - prev)));
    prev = pv;
  }
  return f;
}

// Terms depending on Q: sum_a alpha/(2 theta_a) log(Q_{a+1}/Q_a)
// - (alpha/2) log Q_{K+1} + (alpha b / 2) q_1 / Q_1.
inline double hop_alpha_sector(const HopfieldParams& p, const RsbAnsatz& a) {
  if (p.alpha == 0.0) return 0.0;
  const auto& Q = hop_q_denominators(p, a).values;
  const std::size_t levels = Q.size();
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < levels; ++i)
    s += p.alpha / (2.0 * a.thetas[i]) * std::log(Q[i + 1] / Q[i]);
  s -= 0.5 * p.alpha * std::log(Q[levels - 1]);
  s += 0.5 * p.alpha * p.beta * a.qs[0] / Q[0];
  return s;
}

// -(b/2) m^2 - (alpha b/2) p_{K+1}(1 - q_{K+1}) - (alpha b/2) sum_a theta_a (p_{a+1}q_{a+1} - p_a q_a).
inline double hop_source(const HopfieldParams& p, const RsbAnsatz& a) {
  const std::size_t levels = a.qs.size();
  const double ab = p.alpha * p.beta;
  double s = -0.5 * p.beta * a.m * a.m - 0.5 * ab * a.ps[levels - 1] * (1.0 - a.qs[levels - 1]);
  for (std::size_t i = 0; i + 1 < levels; ++i)
    s -= 0.5 * ab * a.thetas[i] * (a.ps[i + 1] * a.qs[i + 1] - a.ps[i] * a.qs[i]);
  return s;
}

inline double hop_pressure_krsb(const HopfieldParams& p, const RsbAnsatz& a,
                                const QuadratureSpec& spec) {
  p.validate();
  validate_ansatz(a, Model::hopfield);
  const double sector = hop_alpha_sector(p, a);
  const double entropy = nested_log_cosh_expect(hop_field(p, a.m, a.ps), a.thetas, spec);
  return entropy + sector + hop_source(p, a);
}

inline double hop_pressure_rs(const HopfieldParams& p, double m, double q, double pp,
                              const QuadratureSpec& spec) {
  return hop_pressure_krsb(p, make_rs(m, q, pp), spec);
}

// m' and q' with the conjugate overlaps taken from the closed form at the
// input q; the returned ps are left as given.
inline RsbAnsatz hop_sce_moments(const HopfieldParams& p, const RsbAnsatz& a,
                                 const QuadratureSpec& spec) {
  p.validate();
  detail::validate_q_part(a);
  const std::vector<double> ps = hop_p_closed_form(p, a);
  const NestedResult r = nested_moments(hop_field(p, a.m, ps), a.thetas, spec);
  RsbAnsatz out = a;
  out.m = r.mean;
  out.qs = r.squares;
  return out;
}

// Full map: new m and q, and p from the closed form at the new q.
inline RsbAnsatz hop_sce_krsb(const HopfieldParams& p, const RsbAnsatz& a,
                              const QuadratureSpec& spec) {
  validate_ansatz(a, Model::hopfield);
  RsbAnsatz out = hop_sce_moments(p, a, spec);
  out.ps = hop_p_closed_form(p, out);
  return out;
}

// (m', q', p') with p' = b q / (1 - b(1-q))^2 at the input q.
inline std::tuple<double, double, double> hop_sce_rs(const HopfieldParams& p, double m, double q,
                                                     const QuadratureSpec& spec) {
  const RsbAnsatz in = make_rs(m, q);
  const double pp = hop_p_closed_form(p, in)[0];
  const RsbAnsatz out = hop_sce_moments(p, in, spec);
  return {out.m, out.qs[0], pp};
}

}  // namespace rsb
