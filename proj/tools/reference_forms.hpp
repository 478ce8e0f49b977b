#pragma once

// Closed-form RS, 1-RSB and 2-RSB pressures written out level by level, with
// their own trapezoid rule. Used to cross-check the generic-K evaluators.

#include <cmath>
#include <vector>

namespace rsb::reference {

struct Rule {
  std::vector<double> x;
  std::vector<double> w;
};

// Trapezoid nodes on [-10, 10] with standard normal weights normalized to 1.
inline const Rule& rule() {
  static const Rule r = [] {
    Rule out;
    const int n = 201;
    const double lo = -10.0, h = 20.0 / (n - 1);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = lo + i * h;
      out.x.push_back(x);
      out.w.push_back(std::exp(-0.5 * x * x));
      total += out.w.back();
    }
    for (double& w : out.w) w /= total;
    return out;
  }();
  return r;
}

inline double log_cosh(double x) {
  const double a = std::fabs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
}

// E log cosh(c0 + c1 z).
inline double rs_entropy(double c0, double c1) {
  const Rule& r = rule();
  double s = 0.0;
  for (std::size_t i = 0; i < r.x.size(); ++i) s += r.w[i] * log_cosh(c0 + c1 * r.x[i]);
  return s;
}

// (1/theta) E_1 log E_2 cosh^theta(c0 + c1 z1 + c2 z2).
inline double one_step_entropy(double c0, double c1, double c2, double theta) {
  const Rule& r = rule();
  const std::size_t n = r.x.size();
  double outer = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double inner = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      inner += r.w[j] * std::exp(theta * log_cosh(c0 + c1 * r.x[i] + c2 * r.x[j]));
    outer += r.w[i] * std::log(inner);
  }
  return outer / theta;
}

// (1/t1) E_1 log E_2 [E_3 cosh^t2(c0 + c1 z1 + c2 z2 + c3 z3)]^(t1/t2).
inline double two_step_entropy(double c0, double c1, double c2, double c3, double t1, double t2) {
  const Rule& r = rule();
  const std::size_t n = r.x.size();
  double outer = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double middle = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double base = c0 + c1 * r.x[i] + c2 * r.x[j];
      double inner = 0.0;
      for (std::size_t k = 0; k < n; ++k) inner += r.w[k] * std::exp(t2 * log_cosh(base + c3 * r.x[k]));
      middle += r.w[j] * std::pow(inner, t1 / t2);
    }
    outer += r.w[i] * std::log(middle);
  }
  return outer / t1;
}

// SK with signal.

inline double sk_rs(double beta, double j0, double j, double m, double q) {
  return std::log(2.0) + rs_entropy(beta * j0 * m, beta * j * std::sqrt(q)) +
         0.25 * beta * beta * j * j * (1.0 - q) * (1.0 - q) - 0.5 * beta * j0 * m * m;
}

inline double sk_1rsb(double beta, double j0, double j, double m, double q1, double q2, double theta) {
  const double bj = beta * j;
  return std::log(2.0) +
         one_step_entropy(beta * j0 * m, bj * std::sqrt(q1), bj * std::sqrt(q2 - q1), theta) +
         0.25 * bj * bj * ((1.0 - q2) * (1.0 - q2) - theta * (q2 * q2 - q1 * q1)) -
         0.5 * beta * j0 * m * m;
}

inline double sk_2rsb(double beta, double j0, double j, double m, double q1, double q2, double q3,
                      double t1, double t2) {
  const double bj = beta * j;
  return std::log(2.0) +
         two_step_entropy(beta * j0 * m, bj * std::sqrt(q1), bj * std::sqrt(q2 - q1),
                          bj * std::sqrt(q3 - q2), t1, t2) +
         0.25 * bj * bj *
             ((1.0 - q3) * (1.0 - q3) - t1 * (q2 * q2 - q1 * q1) - t2 * (q3 * q3 - q2 * q2)) -
         0.5 * beta * j0 * m * m;
}

// Hopfield.

inline double hop_rs(double beta, double alpha, double m, double q, double p) {
  const double d = 1.0 - beta * (1.0 - q);
  return std::log(2.0) + rs_entropy(beta * m, std::sqrt(alpha * beta * p)) -
         0.5 * beta * (alpha * p * (1.0 - q) + m * m) + 0.5 * alpha * beta * q / d -
         0.5 * alpha * std::log(d);
}

inline double hop_1rsb(double beta, double alpha, double m, double q1, double q2, double p1, double p2,
                       double theta) {
  const double top = 1.0 - beta * (1.0 - q2);
  const double low = top - theta * beta * (q2 - q1);
  const double ab = alpha * beta;
  return one_step_entropy(beta * m, std::sqrt(ab * p1), std::sqrt(ab * (p2 - p1)), theta) +
         std::log(2.0) + alpha / (2.0 * theta) * std::log(1.0 + beta * theta * (q2 - q1) / low) -
         0.5 * alpha * std::log(top) + 0.5 * ab * q1 / low - 0.5 * beta * m * m -
         0.5 * ab * p2 * (1.0 - q2) - 0.5 * ab * theta * (p2 * q2 - p1 * q1);
}

inline double hop_2rsb(double beta, double alpha, double m, double q1, double q2, double q3, double p1,
                       double p2, double p3, double t1, double t2) {
  const double ab = alpha * beta;
  const double top = 1.0 - beta * (1.0 - q3);
  const double mid = 1.0 - beta * ((1.0 - q3) + t2 * (q3 - q2));
  const double low = 1.0 - beta * ((1.0 - q3) + t1 * (q2 - q1) + t2 * (q3 - q2));
  return std::log(2.0) +
         two_step_entropy(beta * m, std::sqrt(ab * p1), std::sqrt(ab * (p2 - p1)),
                          std::sqrt(ab * (p3 - p2)), t1, t2) +
         alpha / (2.0 * t2) * std::log(1.0 + beta * t2 * (q3 - q2) / mid) +
         alpha / (2.0 * t1) * std::log(1.0 + beta * t1 * (q2 - q1) / low) -
         0.5 * alpha * std::log(top) + 0.5 * ab * q1 / low - 0.5 * beta * m * m -
         0.5 * ab * p3 * (1.0 - q3) - 0.5 * ab * t2 * (p3 * q3 - p2 * q2) -
         0.5 * ab * t1 * (p2 * q2 - p1 * q1);
}

}  // namespace rsb::reference
