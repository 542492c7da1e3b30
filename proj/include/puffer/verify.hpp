// Copyright 2026 The Puffer Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "puffer/distribution.hpp"
#include "puffer/error.hpp"
#include "puffer/mechanisms.hpp"
#include "puffer/pair.hpp"
#include "puffer/transport.hpp"

namespace puffer {

// θ = 0 makes Y = X atomic; there is no density to evaluate.
class DegenerateScaleError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

namespace detail {

inline void require_density_family(const MechanismSpec& spec, const char* who) {
  if (spec.family == NoiseFamily::exponential) {
    throw ValidationError(std::string(who) + ": only laplace and gaussian noise are supported");
  }
  if (spec.theta == 0.0) {
    throw DegenerateScaleError(std::string(who) + ": theta = 0, output is atomic");
  }
}

inline double log_noise_density(const MechanismSpec& spec, double z) {
  if (spec.family == NoiseFamily::laplace) return -std::abs(z) / spec.theta - std::log(2.0 * spec.theta);
  const double u = z / spec.theta;
  return -0.5 * u * u - std::log(std::sqrt(2.0 * std::numbers::pi) * spec.theta);
}

}  // namespace detail

// log P_Y(y) = log Σ_x P_N(y - x) P_X(x), via log-sum-exp.
inline double log_output_density(const DiscreteDistribution& dist, const MechanismSpec& spec, double y) {
  detail::require_density_family(spec, "output_density");
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist.mass()[i] <= 0.0) continue;
    peak = std::max(peak, std::log(dist.mass()[i]) + detail::log_noise_density(spec, y - dist.support()[i]));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist.mass()[i] <= 0.0) continue;
    acc += std::exp(std::log(dist.mass()[i]) + detail::log_noise_density(spec, y - dist.support()[i]) - peak);
  }
  return peak + std::log(acc);
}

inline double output_density(const DiscreteDistribution& dist, const MechanismSpec& spec, double y) {
  return std::exp(log_output_density(dist, spec, y));
}

struct GridConfig {
  double extent = 10.0;           // grid reaches this many θ beyond the support hull
  double steps_per_scale = 50.0;  // step = θ / steps_per_scale
  std::size_t max_points = 400000;
  double tolerance = 1e-6;
  double log_floor = -700.0;      // densities below e^{log_floor} are not trusted
};

struct GridSpec {
  double lo = 0.0;
  double hi = 0.0;
  double step = 0.0;
  std::size_t points = 0;
};

struct PairVerification {
  std::string first_secret;
  std::string second_secret;
  std::string prior;
  double worst_log_ratio = 0.0;
  double argmax_y = 0.0;
  bool pass = true;
  GridSpec grid;
  std::vector<std::pair<double, double>> unverified_tail;
  std::string note;
};

struct VerificationReport {
  double epsilon = 0.0;
  double tolerance = 0.0;
  std::vector<PairVerification> pairs;

  bool pass() const {
    return std::all_of(pairs.begin(), pairs.end(), [](const auto& p) { return p.pass; });
  }
  double worst_log_ratio() const {
    double w = 0.0;
    for (const auto& p : pairs) w = std::max(w, p.worst_log_ratio);
    return w;
  }
};

namespace detail {

// Support points of both distributions plus a uniform grid around them.
inline std::vector<double> evaluation_points(const DiscreteDistribution& p, const DiscreteDistribution& q,
                                             double theta, const GridConfig& cfg, GridSpec& grid,
                                             std::string& note) {
  std::vector<double> ys;
  for (double x : p.support()) ys.push_back(x);
  for (double x : q.support()) ys.push_back(x);
  grid.lo = std::min(p.min(), q.min()) - cfg.extent * theta;
  grid.hi = std::max(p.max(), q.max()) + cfg.extent * theta;
  grid.step = theta / cfg.steps_per_scale;
  if ((grid.hi - grid.lo) / grid.step + 1.0 > static_cast<double>(cfg.max_points)) {
    grid.step = (grid.hi - grid.lo) / static_cast<double>(cfg.max_points - 1);
    note += "grid coarsened to max_points; ";
  }
  grid.points = static_cast<std::size_t>(std::floor((grid.hi - grid.lo) / grid.step)) + 1;
  for (std::size_t k = 0; k < grid.points; ++k) ys.push_back(grid.lo + static_cast<double>(k) * grid.step);
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  return ys;
}

}  // namespace detail

// Worst |log P_Y(y|s_i) / P_Y(y|s_j)| over support points and a grid. For
// Laplace noise the log-density is piecewise linear between atoms, so the
// extrema sit on support points and that part of the check is exact; the
// grid matters for Gaussian noise.
inline PairVerification verify_pair(const DiscriminativePair& pair, const MechanismSpec& spec,
                                    double epsilon, const GridConfig& cfg = {}) {
  PairVerification out;
  out.first_secret = pair.first_secret;
  out.second_secret = pair.second_secret;
  out.prior = pair.prior;
  const auto p = pair.first.pruned();
  const auto q = pair.second.pruned();
  if (spec.family == NoiseFamily::exponential) {
    throw ValidationError("verify: only laplace and gaussian noise are supported");
  }
  if (spec.theta == 0.0) {
    if (p == q) {
      out.note = "theta = 0: outputs are atomic and identical";
    } else {
      out.worst_log_ratio = std::numeric_limits<double>::infinity();
      out.pass = false;
      out.note = "theta = 0 with distinct distributions: released values reveal the secret";
    }
    return out;
  }
  const auto ys = detail::evaluation_points(p, q, spec.theta, cfg, out.grid, out.note);
  std::optional<std::pair<double, double>> tail;
  for (double y : ys) {
    const double lp = log_output_density(p, spec, y);
    const double lq = log_output_density(q, spec, y);
    if (lp < cfg.log_floor || lq < cfg.log_floor) {
      if (tail) {
        tail->second = y;
      } else {
        tail = std::pair{y, y};
      }
      continue;
    }
    if (tail) {
      out.unverified_tail.push_back(*tail);
      tail.reset();
    }
    const double r = std::abs(lp - lq);
    if (r > out.worst_log_ratio) {
      out.worst_log_ratio = r;
      out.argmax_y = y;
    }
  }
  if (tail) out.unverified_tail.push_back(*tail);
  if (spec.family == NoiseFamily::laplace) out.note += "laplace: support-point check is exact";
  out.pass = out.worst_log_ratio <= epsilon + cfg.tolerance;
  return out;
}

inline VerificationReport verify_pufferfish(std::span<const DiscriminativePair> pairs,
                                            const MechanismSpec& spec, double epsilon,
                                            const GridConfig& cfg = {}) {
  if (pairs.empty()) throw ValidationError("verify: empty discriminative pair set");
  VerificationReport report{epsilon, cfg.tolerance, {}};
  for (const auto& pair : pairs) report.pairs.push_back(verify_pair(pair, spec, epsilon, cfg));
  return report;
}

// ---------------------------------------------------------------------------
// Gaussian δ-approximation

struct DeltaApproxPair {
  std::string first_secret;
  std::string second_secret;
  std::string prior;
  double sensitivity = 0.0;
  // Noise mass of {|N|/θ > t}, t = c - ε/(2c), c = θε/Δ: where the density
  // ratio bound can fail.
  double violation_mass = 0.0;
  double threshold = std::numeric_limits<double>::infinity();
  // sup_y max(P(y|s_i) - e^ε P(y|s_j), P(y|s_j) - e^ε P(y|s_i)) on the grid.
  std::optional<double> density_excess;
  bool tail_pass = true;
  bool density_pass = true;
  GridSpec grid;
};

struct DeltaApproxReport {
  double epsilon = 0.0;
  double delta = 0.0;
  std::vector<DeltaApproxPair> pairs;

  bool pass() const {
    return std::all_of(pairs.begin(), pairs.end(), [](const auto& p) { return p.tail_pass; });
  }
  double worst_violation_mass() const {
    double w = 0.0;
    for (const auto& p : pairs) w = std::max(w, p.violation_mass);
    return w;
  }
};

// Standard normal two-sided tail P(|Z| > t).
inline double normal_two_sided_tail(double t) {
  if (t <= 0.0) return 1.0;
  return std::erfc(t / std::numbers::sqrt2);
}

inline DeltaApproxReport verify_delta_approx(std::span<const DiscriminativePair> pairs,
                                             const MechanismSpec& spec, double epsilon, double delta,
                                             const GridConfig& cfg = {}) {
  if (spec.family != NoiseFamily::gaussian) {
    throw ValidationError("verify_delta_approx: needs a gaussian mechanism");
  }
  if (pairs.empty()) throw ValidationError("verify_delta_approx: empty discriminative pair set");
  if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("verify_delta_approx: delta must lie in (0, 1)");
  DeltaApproxReport report{epsilon, delta, {}};
  for (const auto& pair : pairs) {
    DeltaApproxPair out;
    out.first_secret = pair.first_secret;
    out.second_secret = pair.second_secret;
    out.prior = pair.prior;
    out.sensitivity = plan_sensitivity(optimal_plan(pair.first, pair.second), Metric::absolute());
    if (out.sensitivity > 0.0) {
      if (spec.theta == 0.0) {
        out.violation_mass = 1.0;
        out.threshold = -std::numeric_limits<double>::infinity();
      } else {
        const double c = spec.theta * epsilon / out.sensitivity;
        out.threshold = c - epsilon / (2.0 * c);
        out.violation_mass = normal_two_sided_tail(out.threshold);
      }
    }
    out.tail_pass = out.violation_mass <= delta;

    if (spec.theta > 0.0) {
      const auto p = pair.first.pruned();
      const auto q = pair.second.pruned();
      std::string note;
      double excess = -std::numeric_limits<double>::infinity();
      const double scale = std::exp(epsilon);
      for (double y : detail::evaluation_points(p, q, spec.theta, cfg, out.grid, note)) {
        const double a = output_density(p, spec, y);
        const double b = output_density(q, spec, y);
        excess = std::max({excess, a - scale * b, b - scale * a});
      }
      out.density_excess = excess;
      out.density_pass = excess <= delta;
    }
    report.pairs.push_back(std::move(out));
  }
  return report;
}

// ---------------------------------------------------------------------------
// JSON

inline void to_json(nlohmann::json& j, const GridSpec& g) {
  j = nlohmann::json{{"lo", g.lo}, {"hi", g.hi}, {"step", g.step}, {"points", g.points}};
}

inline nlohmann::json finite_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

inline void to_json(nlohmann::json& j, const VerificationReport& r) {
  auto pairs = nlohmann::json::array();
  for (const auto& p : r.pairs) {
    auto tail = nlohmann::json::array();
    for (const auto& [lo, hi] : p.unverified_tail) tail.push_back({lo, hi});
    pairs.push_back({{"s_i", p.first_secret},
                     {"s_j", p.second_secret},
                     {"prior", p.prior},
                     {"worst_log_ratio", finite_or_null(p.worst_log_ratio)},
                     {"argmax_y", p.argmax_y},
                     {"pass", p.pass},
                     {"grid", p.grid},
                     {"unverified_tail", std::move(tail)},
                     {"note", p.note}});
  }
  j = nlohmann::json{{"epsilon", r.epsilon},
                     {"tolerance", r.tolerance},
                     {"pass", r.pass()},
                     {"worst_log_ratio", finite_or_null(r.worst_log_ratio())},
                     {"pairs", std::move(pairs)}};
}

inline void to_json(nlohmann::json& j, const DeltaApproxReport& r) {
  auto pairs = nlohmann::json::array();
  for (const auto& p : r.pairs) {
    pairs.push_back({{"s_i", p.first_secret},
                     {"s_j", p.second_secret},
                     {"prior", p.prior},
                     {"sensitivity", p.sensitivity},
                     {"threshold", finite_or_null(p.threshold)},
                     {"violation_mass", p.violation_mass},
                     {"tail_pass", p.tail_pass},
                     {"density_excess", p.density_excess ? finite_or_null(*p.density_excess)
                                                         : nlohmann::json(nullptr)},
                     {"density_pass", p.density_pass},
                     {"grid", p.grid}});
  }
  j = nlohmann::json{{"epsilon", r.epsilon},
                     {"delta", r.delta},
                     {"pass", r.pass()},
                     {"worst_violation_mass", r.worst_violation_mass()},
                     {"pairs", std::move(pairs)}};
}

}  // namespace puffer
