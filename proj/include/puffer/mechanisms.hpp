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
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "puffer/distribution.hpp"
#include "puffer/error.hpp"
#include "puffer/metric.hpp"
#include "puffer/pair.hpp"
#include "puffer/root_finding.hpp"
#include "puffer/transport.hpp"

namespace puffer {

// Rate η(θ) of an exponential-family noise density ∝ exp(-η(θ) d(z)).
// Callers declare η nonincreasing and supply its inverse.
class RateFunction {
 public:
  RateFunction(std::string name, std::function<double(double)> rate,
               std::function<double(double)> inverse)
      : name_(std::move(name)), rate_(std::move(rate)), inverse_(std::move(inverse)) {
    if (!rate_ || !inverse_) throw ValidationError("rate function: missing rate or inverse");
  }

  // η(θ) = 1/θ, the Laplace / scale-family default.
  static RateFunction inverse_scale() {
    return RateFunction(
        "1/theta", [](double theta) { return 1.0 / theta; }, [](double a) { return 1.0 / a; });
  }

  double operator()(double theta) const { return rate_(theta); }
  double inverse(double a) const { return inverse_(a); }
  const std::string& name() const { return name_; }

 private:
  std::string name_;
  std::function<double(double)> rate_;
  std::function<double(double)> inverse_;
};

enum class NoiseFamily { laplace, gaussian, exponential };

inline std::string to_string(NoiseFamily f) {
  switch (f) {
    case NoiseFamily::laplace: return "laplace";
    case NoiseFamily::gaussian: return "gaussian";
    case NoiseFamily::exponential: return "exponential";
  }
  return "unknown";
}

// Additive noise N_θ together with the budget it was calibrated for.
struct MechanismSpec {
  NoiseFamily family = NoiseFamily::laplace;
  double theta = 0.0;
  double epsilon = 1.0;
  std::optional<double> delta;
  std::optional<Metric> metric;       // exponential family only
  std::optional<RateFunction> rate;   // exponential family only

  static MechanismSpec laplace(double theta, double epsilon) {
    MechanismSpec s{NoiseFamily::laplace, theta, epsilon, std::nullopt, std::nullopt, std::nullopt};
    s.validate();
    return s;
  }

  static MechanismSpec gaussian(double theta, double epsilon, double delta) {
    MechanismSpec s{NoiseFamily::gaussian, theta, epsilon, delta, std::nullopt, std::nullopt};
    s.validate();
    return s;
  }

  static MechanismSpec exponential(double theta, double epsilon, Metric metric, RateFunction rate) {
    MechanismSpec s{NoiseFamily::exponential, theta, epsilon, std::nullopt, std::move(metric),
                    std::move(rate)};
    s.validate();
    return s;
  }

  void validate() const {
    if (!(theta >= 0.0) || !std::isfinite(theta)) {
      throw ValidationError("mechanism: theta must be finite and >= 0");
    }
    if (!(epsilon > 0.0)) throw ValidationError("mechanism: epsilon must be > 0");
    if (family == NoiseFamily::gaussian) {
      if (!delta || !(*delta > 0.0 && *delta < 1.0)) {
        throw ValidationError("mechanism: gaussian noise needs delta in (0, 1)");
      }
    } else if (delta) {
      throw ValidationError("mechanism: delta only applies to gaussian noise");
    }
    if (family == NoiseFamily::exponential && (!metric || !rate)) {
      throw ValidationError("mechanism: exponential family needs a metric and a rate function");
    }
  }

  // VAR[N_θ]; unknown for a general exponential family.
  std::optional<double> variance() const {
    switch (family) {
      case NoiseFamily::laplace: return 2.0 * theta * theta;
      case NoiseFamily::gaussian: return theta * theta;
      case NoiseFamily::exponential: return std::nullopt;
    }
    return std::nullopt;
  }
};

// ---------------------------------------------------------------------------
// Calibration

// θ = η⁻¹(ε / sensitivity); zero sensitivity needs no noise.
inline double calibrate_exponential(double sensitivity, double epsilon,
                                    const RateFunction& eta = RateFunction::inverse_scale()) {
  if (!(epsilon > 0.0)) throw ValidationError("calibrate: epsilon must be > 0");
  if (!(sensitivity >= 0.0)) throw ValidationError("calibrate: sensitivity must be >= 0");
  if (sensitivity == 0.0) return 0.0;
  return eta.inverse(epsilon / sensitivity);
}

enum class GaussianVariant { a, b };

inline constexpr double kGaussianStrictSlack = 1e-9;

// Gaussian scale for the δ-approximate guarantee. Variant a is the boundary
// θ = sqrt(2 ln(1.25/δ)) Δ/ε (needs ε <= 1); variant b sits just above the
// strict bound c > 0.41 δ^{-1/3} + sqrt((0.41 δ^{-1/3})² + ε/2), θ = cΔ/ε.
inline double calibrate_gaussian(double sensitivity, double epsilon, double delta,
                                 GaussianVariant variant) {
  if (!(epsilon > 0.0)) throw ValidationError("calibrate_gaussian: epsilon must be > 0");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw ValidationError("calibrate_gaussian: delta must lie in (0, 1)");
  }
  if (!(sensitivity >= 0.0)) throw ValidationError("calibrate_gaussian: sensitivity must be >= 0");
  if (variant == GaussianVariant::a && epsilon > 1.0) {
    throw ValidationError("calibrate_gaussian: variant a requires epsilon <= 1");
  }
  if (sensitivity == 0.0) return 0.0;
  if (variant == GaussianVariant::a) {
    return std::sqrt(2.0 * std::log(1.25 / delta)) * sensitivity / epsilon;
  }
  const double half_b = 0.41 * std::cbrt(1.0 / delta);
  const double c = half_b + std::sqrt(half_b * half_b + epsilon / 2.0) + kGaussianStrictSlack;
  return sensitivity / epsilon * c;
}

// One relaxed constraint: the entries of a single row or column of the plan.
struct RelaxedConstraint {
  enum class Axis { row, col } axis;
  std::size_t index;
  double marginal;                                // p(x) or q(x')
  std::vector<std::pair<double, double>> terms;   // (distance, plan mass)
};

struct RelaxedSolution {
  double theta = 0.0;
  std::optional<RelaxedConstraint> binding;  // constraint attaining the max
  std::size_t constraints_solved = 0;
};

namespace detail {

// log Σ m e^{η d} - ε - log(marginal), evaluated at θ = e^{log_theta}.
inline double relaxed_gap(const RelaxedConstraint& c, double log_theta, double epsilon,
                          const RateFunction& eta) {
  const double rate = eta(std::exp(log_theta));
  double peak = -std::numeric_limits<double>::infinity();
  std::vector<double> logs;
  logs.reserve(c.terms.size());
  for (const auto& [dist, m] : c.terms) {
    const double v = std::log(m) + (dist == 0.0 ? 0.0 : rate * dist);
    logs.push_back(v);
    peak = std::max(peak, v);
  }
  if (std::isinf(peak)) return peak;
  double acc = 0.0;
  for (double v : logs) acc += std::exp(v - peak);
  return peak + std::log(acc) - epsilon - std::log(c.marginal);
}

inline std::vector<RelaxedConstraint> relaxed_constraints(const TransportPlan& plan,
                                                          const DiscreteDistribution& p,
                                                          const DiscreteDistribution& q,
                                                          const Metric& d) {
  std::vector<RelaxedConstraint> out;
  for (std::size_t j = 0; j < q.size(); ++j) {
    if (q.mass()[j] > 0.0) out.push_back({RelaxedConstraint::Axis::col, j, q.mass()[j], {}});
  }
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p.mass()[i] > 0.0) out.push_back({RelaxedConstraint::Axis::row, i, p.mass()[i], {}});
  }
  std::vector<RelaxedConstraint*> by_col(q.size(), nullptr);
  std::vector<RelaxedConstraint*> by_row(p.size(), nullptr);
  for (auto& c : out) (c.axis == RelaxedConstraint::Axis::col ? by_col : by_row)[c.index] = &c;
  for (const auto& e : plan.entries()) {
    const double dist = d(plan.row_value(e) - plan.col_value(e));
    if (by_col[e.col]) by_col[e.col]->terms.emplace_back(dist, e.mass);
    if (by_row[e.row]) by_row[e.row]->terms.emplace_back(dist, e.mass);
  }
  return out;
}

}  // namespace detail

// Relaxed calibration on a discrete plan. For every column x' with q(x') > 0
// solve Σ_x e^{η(θ) d(x-x')} π(x,x') = e^ε q(x'), likewise for every row
// against p(x), and keep the largest root. Constraints whose entries all sit
// at distance zero hold for any θ and contribute nothing.
inline RelaxedSolution relaxed_solve(const TransportPlan& plan, const DiscreteDistribution& p,
                                     const DiscreteDistribution& q, double epsilon,
                                     const Metric& d = Metric::absolute(),
                                     const RateFunction& eta = RateFunction::inverse_scale()) {
  if (!(epsilon > 0.0)) throw ValidationError("relaxed_theta: epsilon must be > 0");
  if (plan.row_support().size() != p.size() || plan.col_support().size() != q.size()) {
    throw ValidationError("relaxed_theta: plan does not match the given distributions");
  }
  RelaxedSolution best;
  for (auto& c : detail::relaxed_constraints(plan, p, q, d)) {
    double max_dist = 0.0;
    for (const auto& t : c.terms) max_dist = std::max(max_dist, t.first);
    if (max_dist == 0.0) continue;
    // At the strict scale every term obeys e^{ηd} <= e^ε, so the gap is <= 0
    // there; that is the upper end of the bracket.
    const double hi = std::log(eta.inverse(epsilon / max_dist));
    auto gap = [&](double lt) { return detail::relaxed_gap(c, lt, epsilon, eta); };
    RootResult r;
    try {
      r = bisect_decreasing(gap, hi - 1.0, hi);
    } catch (const NumericError& e) {
      throw NumericError(std::string(e.what()) + " [" +
                         (c.axis == RelaxedConstraint::Axis::col ? "column " : "row ") +
                         std::to_string(c.index) + ", marginal " + std::to_string(c.marginal) +
                         "]");
    }
    ++best.constraints_solved;
    // The strict scale always satisfies the constraint; rounding can push
    // the bracket a hair above it when the root sits exactly there.
    const double theta = std::min(std::exp(r.root), std::exp(hi));
    if (theta > best.theta) {
      best.theta = theta;
      best.binding = std::move(c);
    }
  }
  return best;
}

inline double relaxed_theta(const TransportPlan& plan, const DiscreteDistribution& p,
                            const DiscreteDistribution& q, double epsilon,
                            const Metric& d = Metric::absolute(),
                            const RateFunction& eta = RateFunction::inverse_scale()) {
  return relaxed_solve(plan, p, q, epsilon, d, eta).theta;
}

// Which calibration rule produced θ. The tags are the report's wire format.
enum class Calibration { laplace_w1, strict, relaxed, gaussian_a, gaussian_b };

inline std::string method_tag(Calibration m) {
  switch (m) {
    case Calibration::laplace_w1: return "lemma-1";
    case Calibration::strict: return "theorem-1";
    case Calibration::relaxed: return "theorem-2";
    case Calibration::gaussian_a: return "gaussian-a";
    case Calibration::gaussian_b: return "gaussian-b";
  }
  return "unknown";
}

// Accepts both the tag ("theorem-1") and the CLI spelling ("theorem1").
inline Calibration parse_calibration(const std::string& s) {
  if (s == "lemma-1" || s == "lemma1") return Calibration::laplace_w1;
  if (s == "theorem-1" || s == "theorem1") return Calibration::strict;
  if (s == "theorem-2" || s == "theorem2") return Calibration::relaxed;
  if (s == "gaussian-a") return Calibration::gaussian_a;
  if (s == "gaussian-b") return Calibration::gaussian_b;
  throw ValidationError("unknown calibration method '" + s + "'");
}

struct PairCalibration {
  std::string first_secret;
  std::string second_secret;
  std::string prior;
  double sensitivity;
  double theta;
};

struct PrivacyReport {
  Calibration method;
  double epsilon;
  std::optional<double> delta;
  double theta;
  std::optional<double> variance;
  std::vector<PairCalibration> pairs;
  NoiseFamily family;
  std::optional<nlohmann::json> verification;

  MechanismSpec mechanism() const {
    return family == NoiseFamily::gaussian ? MechanismSpec::gaussian(theta, epsilon, *delta)
                                           : MechanismSpec::laplace(theta, epsilon);
  }
};

struct CalibrationOptions {
  Calibration method = Calibration::strict;
  Metric metric = Metric::absolute();
  RateFunction rate = RateFunction::inverse_scale();
  std::optional<double> delta;
};

// θ for a whole discriminative set: one plan per pair (and per prior), the
// per-pair θ by the selected rule, then the maximum.
inline PrivacyReport calibrate_pufferfish(std::span<const DiscriminativePair> pairs,
                                          double epsilon, const CalibrationOptions& opts = {}) {
  if (pairs.empty()) throw ValidationError("calibrate: empty discriminative pair set");
  if (!(epsilon > 0.0)) throw ValidationError("calibrate: epsilon must be > 0");
  const bool gaussian =
      opts.method == Calibration::gaussian_a || opts.method == Calibration::gaussian_b;
  if (gaussian && !opts.delta) throw ValidationError("calibrate: gaussian methods need delta");
  if (!gaussian && opts.delta) throw ValidationError("calibrate: delta only applies to gaussian methods");

  PrivacyReport report{opts.method, epsilon, opts.delta, 0.0, std::nullopt, {},
                       gaussian ? NoiseFamily::gaussian : NoiseFamily::laplace, std::nullopt};
  const bool laplace_rate = opts.rate.name() == "1/theta" && opts.metric.name() == "l1";
  if (!gaussian && !laplace_rate) report.family = NoiseFamily::exponential;

  for (const auto& pair : pairs) {
    const auto plan = optimal_plan(pair.first, pair.second);
    PairCalibration pc{pair.first_secret, pair.second_secret, pair.prior, 0.0, 0.0};
    switch (opts.method) {
      case Calibration::laplace_w1:
        pc.sensitivity = plan_sensitivity(plan, Metric::absolute());
        pc.theta = calibrate_exponential(pc.sensitivity, epsilon);
        break;
      case Calibration::strict:
        pc.sensitivity = plan_sensitivity(plan, opts.metric);
        pc.theta = calibrate_exponential(pc.sensitivity, epsilon, opts.rate);
        break;
      case Calibration::relaxed:
        pc.sensitivity = plan_sensitivity(plan, opts.metric);
        pc.theta = relaxed_theta(plan, pair.first, pair.second, epsilon, opts.metric, opts.rate);
        break;
      case Calibration::gaussian_a:
      case Calibration::gaussian_b:
        pc.sensitivity = plan_sensitivity(plan, Metric::absolute());
        pc.theta = calibrate_gaussian(
            pc.sensitivity, epsilon, *opts.delta,
            opts.method == Calibration::gaussian_a ? GaussianVariant::a : GaussianVariant::b);
        break;
    }
    report.theta = std::max(report.theta, pc.theta);
    report.pairs.push_back(std::move(pc));
  }
  if (opts.method == Calibration::laplace_w1) report.family = NoiseFamily::laplace;
  switch (report.family) {
    case NoiseFamily::laplace: report.variance = 2.0 * report.theta * report.theta; break;
    case NoiseFamily::gaussian: report.variance = report.theta * report.theta; break;
    case NoiseFamily::exponential: break;
  }
  return report;
}

inline void to_json(nlohmann::json& j, const PrivacyReport& r) {
  auto pairs = nlohmann::json::array();
  for (const auto& p : r.pairs) {
    pairs.push_back({{"s_i", p.first_secret},
                     {"s_j", p.second_secret},
                     {"prior", p.prior},
                     {"sensitivity", p.sensitivity},
                     {"theta", p.theta}});
  }
  j = nlohmann::json{{"method", method_tag(r.method)},
                     {"family", to_string(r.family)},
                     {"epsilon", r.epsilon},
                     {"delta", r.delta ? nlohmann::json(*r.delta) : nlohmann::json(nullptr)},
                     {"theta", r.theta},
                     {"variance", r.variance ? nlohmann::json(*r.variance) : nlohmann::json(nullptr)},
                     {"pairs", std::move(pairs)}};
  if (r.verification) j["verification"] = *r.verification;
}

// ---------------------------------------------------------------------------
// Sampling and release

namespace detail {

// Uniform on the open interval (0, 1) from the top 53 bits.
inline double open_unit(std::mt19937_64& gen) {
  return (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace detail

// n i.i.d. draws of N_θ. The generator and transforms are fixed (mt19937_64,
// inverse-CDF Laplace, Box-Muller Gaussian), so output depends only on
// (spec, n, seed).
inline std::vector<double> sample_noise(const MechanismSpec& spec, std::size_t n,
                                        std::uint64_t seed) {
  spec.validate();
  if (spec.family == NoiseFamily::exponential) {
    throw ValidationError("sample_noise: only laplace and gaussian noise can be sampled");
  }
  std::vector<double> out(n, 0.0);
  if (spec.theta == 0.0) return out;
  std::mt19937_64 gen(seed);
  if (spec.family == NoiseFamily::laplace) {
    for (auto& v : out) {
      const double u = detail::open_unit(gen) - 0.5;
      v = -spec.theta * std::copysign(1.0, u) * std::log1p(-2.0 * std::abs(u));
    }
    return out;
  }
  for (std::size_t i = 0; i < n; i += 2) {
    const double r = std::sqrt(-2.0 * std::log(detail::open_unit(gen)));
    const double phi = 2.0 * std::numbers::pi * detail::open_unit(gen);
    out[i] = spec.theta * r * std::cos(phi);
    if (i + 1 < n) out[i + 1] = spec.theta * r * std::sin(phi);
  }
  return out;
}

// Y = X + N, elementwise.
inline std::vector<double> release(std::span<const double> values, const MechanismSpec& spec,
                                   std::uint64_t seed) {
  auto noise = sample_noise(spec, values.size(), seed);
  for (std::size_t i = 0; i < values.size(); ++i) noise[i] += values[i];
  return noise;
}

inline std::vector<double> release(const std::vector<double>& values, const MechanismSpec& spec,
                                   std::uint64_t seed) {
  return release(std::span<const double>(values), spec, seed);
}

}  // namespace puffer
