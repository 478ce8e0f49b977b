#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rsb/errors.hpp"

namespace rsb {

enum class Model { sk, hopfield };

inline std::string_view to_string(Model m) {
  return m == Model::sk ? "sk" : "hopfield";
}

inline Model parse_model(std::string_view s) {
  if (s == "sk") return Model::sk;
  if (s == "hopfield") return Model::hopfield;
  throw RangeViolation("unknown model '" + std::string(s) + "'");
}

namespace detail {

inline void require_nonneg_finite(double v, const char* name) {
  if (!std::isfinite(v) || v < 0.0)
    throw RangeViolation(std::string(name) + " must be finite and non-negative");
}

}  // namespace detail

struct SkParams {
  double beta = 1.0;
  double j0 = 0.0;
  double j = 1.0;

  void validate() const {
    detail::require_nonneg_finite(beta, "beta");
    detail::require_nonneg_finite(j0, "j0");
    detail::require_nonneg_finite(j, "j");
  }
};

struct HopfieldParams {
  double beta = 1.0;
  double alpha = 0.0;

  void validate() const {
    detail::require_nonneg_finite(beta, "beta");
    detail::require_nonneg_finite(alpha, "alpha");
  }
};

// Model selector with the parameters of the selected model.
struct ModelSpec {
  Model model = Model::sk;
  SkParams sk;
  HopfieldParams hop;

  double beta() const { return model == Model::sk ? sk.beta : hop.beta; }
};

// Order parameters at breaking level k. The boundary Parisi parameters
// theta_0 = 0 and theta_{k+1} = 1 are implicit.
struct RsbAnsatz {
  int k = 0;
  double m = 0.0;
  std::vector<double> qs{0.0};
  std::vector<double> ps;
  std::vector<double> thetas;

  bool operator==(const RsbAnsatz&) const = default;
};

inline RsbAnsatz make_rs(double m, double q) {
  return RsbAnsatz{0, m, {q}, {}, {}};
}

inline RsbAnsatz make_rs(double m, double q, double p) {
  return RsbAnsatz{0, m, {q}, {p}, {}};
}

inline RsbAnsatz validate_ansatz(const RsbAnsatz& a, Model model) {
  if (a.k < 0) throw ShapeMismatch("k must be non-negative");
  const auto levels = static_cast<std::size_t>(a.k) + 1;
  if (a.qs.size() != levels)
    throw ShapeMismatch("qs must have k+1 entries");
  if (a.thetas.size() != levels - 1)
    throw ShapeMismatch("thetas must have k entries");
  if (model == Model::hopfield && a.ps.size() != levels)
    throw ShapeMismatch("ps must have k+1 entries for the Hopfield model");
  if (model == Model::sk && !a.ps.empty())
    throw ShapeMismatch("ps must be empty for the SK model");

  if (!std::isfinite(a.m) || a.m < -1.0 || a.m > 1.0)
    throw RangeViolation("m must lie in [-1, 1]");
  for (double q : a.qs)
    if (!std::isfinite(q) || q < 0.0 || q > 1.0)
      throw RangeViolation("each q must lie in [0, 1]");
  for (double p : a.ps)
    if (!std::isfinite(p) || p < 0.0)
      throw RangeViolation("each p must be finite and non-negative");
  for (double t : a.thetas)
    if (!std::isfinite(t) || t <= 0.0 || t >= 1.0)
      throw RangeViolation("each theta must lie in (0, 1)");

  for (std::size_t i = 1; i < levels; ++i) {
    if (a.qs[i] < a.qs[i - 1]) throw OrderingViolation("qs must be non-decreasing");
    if (!a.ps.empty() && a.ps[i] < a.ps[i - 1])
      throw OrderingViolation("ps must be non-decreasing");
  }
  for (std::size_t i = 1; i < a.thetas.size(); ++i)
    if (a.thetas[i] <= a.thetas[i - 1])
      throw OrderingViolation("thetas must be strictly increasing");
  return a;
}

// Quadrature controls. Each nesting level uses a Gaussian-weighted uniform
// grid whose spacing shrinks with the level's field coefficient; the count of
// nodes spanning the unit-coefficient grid is nodes_per_level.
struct QuadratureSpec {
  int nodes_per_level = 64;
  std::size_t mc_samples = 32;
  std::size_t max_tensor_points = std::size_t{1} << 24;

  void validate() const {
    if (nodes_per_level < 2) throw RangeViolation("nodes_per_level must be at least 2");
    if (max_tensor_points == 0) throw RangeViolation("max_tensor_points must be positive");
  }
};

struct SolveReport {
  RsbAnsatz ansatz;
  double pressure = 0.0;
  double residual = 0.0;
  std::vector<double> stationarity;
  int iterations = 0;
  bool converged = false;
  // Displacements of the final iterations, oldest first (at most 128).
  std::vector<double> recent_residuals;
};

inline void to_json(nlohmann::json& j, const RsbAnsatz& a) {
  j = nlohmann::json{{"k", a.k}, {"m", a.m}, {"qs", a.qs}, {"ps", a.ps}, {"thetas", a.thetas}};
}

inline void from_json(const nlohmann::json& j, RsbAnsatz& a) {
  try {
    j.at("k").get_to(a.k);
    j.at("m").get_to(a.m);
    j.at("qs").get_to(a.qs);
    a.ps = j.contains("ps") ? j.at("ps").get<std::vector<double>>() : std::vector<double>{};
    j.at("thetas").get_to(a.thetas);
  } catch (const nlohmann::json::exception& e) {
    throw ShapeMismatch(std::string("malformed ansatz JSON: ") + e.what());
  }
}

inline void to_json(nlohmann::json& j, const SolveReport& r) {
  j = nlohmann::json{{"ansatz", r.ansatz},
                     {"pressure", r.pressure},
                     {"residual", r.residual},
                     {"stationarity", r.stationarity},
                     {"iterations", r.iterations},
                     {"converged", r.converged}};
}

inline void from_json(const nlohmann::json& j, SolveReport& r) {
  try {
    j.at("ansatz").get_to(r.ansatz);
    j.at("pressure").get_to(r.pressure);
    j.at("residual").get_to(r.residual);
    j.at("stationarity").get_to(r.stationarity);
    j.at("iterations").get_to(r.iterations);
    j.at("converged").get_to(r.converged);
  } catch (const nlohmann::json::exception& e) {
    throw ShapeMismatch(std::string("malformed report JSON: ") + e.what());
  }
}

}  // namespace rsb
