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

// Command-line front end: plan, calibrate, release, verify, scenario,
// figure4 and tables. Errors print a JSON record on stderr and exit with
// 2 (validation) or 3 (numeric).

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "puffer/puffer.hpp"

namespace {

using nlohmann::json;
using puffer::DiscriminativePair;
using puffer::ValidationError;

constexpr std::uint64_t kDefaultSeed = 20240917;
constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitInternal = 1;

struct Options {
  std::string out;
  // Pair sources.
  std::string pairs;
  std::string table;
  std::string secret_col;
  std::string data_col;
  std::string mapping;
  bool skip_unmapped = false;
  char delimiter = ',';
  // Mechanism.
  std::optional<double> epsilon;
  std::optional<double> delta;
  std::optional<double> theta;
  std::string method = "theorem1";
  std::string metric = "l1";
  std::uint64_t seed = kDefaultSeed;
  bool verify = false;
  // plan
  std::string p_file;
  std::string q_file;
  // scenario
  std::string scenario;
  std::size_t user = 0;
  std::string mode = "values";
  // figure4
  std::string counts;
  std::string first = "White";
  std::string second = "Asian-Pac-Islander";
  double eps_min = 0.8;
  double eps_max = 5.8;
  double eps_step = 0.5;
};

std::string format_number(double v, int digits = 17) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError("'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_output(const Options& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(o.out, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + o.out + "'");
  out << text;
}

void write_json(const Options& o, const json& j) { write_output(o, j.dump(2) + "\n"); }

puffer::Metric parse_metric(const std::string& name) {
  if (name == "l1") return puffer::Metric::absolute();
  throw ValidationError("unknown metric '" + name + "' (supported: l1)");
}

puffer::AttributeMapping load_mapping(const std::string& path) {
  return puffer::AttributeMapping::from_json(read_json_file(path));
}

puffer::LoadOptions load_options(const Options& o) {
  puffer::LoadOptions lo;
  lo.csv.delimiter = o.delimiter;
  lo.skip_unmapped = o.skip_unmapped;
  return lo;
}

std::optional<std::vector<std::pair<std::string, std::string>>> listed_pairs(const json& j) {
  if (!j.contains("listed")) return std::nullopt;
  try {
    return j.at("listed").get<std::vector<std::pair<std::string, std::string>>>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("\"listed\" must be an array of [s_i, s_j] pairs: ") + e.what());
  }
}

// Accepted layouts: an array of pairs, {"pairs": [...]}, a count table
// {"categories", "counts"}, or {"conditionals": {secret: distribution}}.
// The last two take an optional "listed" array and "prior" tag.
std::vector<DiscriminativePair> pairs_from_json(const json& j) {
  if (j.is_array()) {
    std::vector<DiscriminativePair> out;
    for (const auto& item : j) out.push_back(puffer::pair_from_json(item));
    return out;
  }
  if (!j.is_object()) throw ValidationError("pairs file must be a JSON object or array");
  if (j.contains("pairs")) return pairs_from_json(j.at("pairs"));
  const auto prior = j.value("prior", std::string("dataset"));
  if (j.contains("counts")) {
    return puffer::enumerate_pairs(puffer::empirical_conditionals(puffer::count_table_from_json(j)), prior,
                                   listed_pairs(j));
  }
  if (j.contains("conditionals")) {
    std::map<std::string, puffer::DiscreteDistribution> cond;
    for (const auto& [secret, dist] : j.at("conditionals").items()) {
      cond.emplace(secret, puffer::distribution_from_json(dist));
    }
    return puffer::enumerate_pairs(cond, prior, listed_pairs(j));
  }
  throw ValidationError("pairs file needs \"pairs\", \"counts\" or \"conditionals\"");
}

std::vector<DiscriminativePair> load_pairs(const Options& o) {
  if (!o.pairs.empty()) return pairs_from_json(read_json_file(o.pairs));
  if (!o.table.empty() && !o.secret_col.empty()) {
    if (o.data_col.empty() || o.mapping.empty()) {
      throw ValidationError("--table pairs need --secret-col, --data-col and --mapping");
    }
    const auto table = puffer::load_table(o.table, o.secret_col, o.data_col, load_mapping(o.mapping),
                                          load_options(o));
    return puffer::enumerate_pairs(puffer::empirical_conditionals(table), o.table);
  }
  throw ValidationError("no discriminative pairs: give --pairs, or --table with --secret-col");
}

double require_epsilon(const Options& o) {
  if (!o.epsilon) throw ValidationError("--epsilon is required");
  return *o.epsilon;
}

puffer::PrivacyReport calibrate(const Options& o, const std::vector<DiscriminativePair>& pairs) {
  puffer::CalibrationOptions co;
  co.method = puffer::parse_calibration(o.method);
  co.metric = parse_metric(o.metric);
  co.delta = o.delta;
  return puffer::calibrate_pufferfish(pairs, require_epsilon(o), co);
}

bool gaussian_method(const Options& o) {
  const auto m = puffer::parse_calibration(o.method);
  return m == puffer::Calibration::gaussian_a || m == puffer::Calibration::gaussian_b;
}

// --theta fixes the scale directly; otherwise it is calibrated from the pairs.
puffer::MechanismSpec mechanism(const Options& o, const std::vector<DiscriminativePair>* pairs) {
  if (o.theta) {
    const double eps = o.epsilon.value_or(std::numeric_limits<double>::infinity());
    if (gaussian_method(o)) {
      if (!o.delta) throw ValidationError("gaussian noise needs --delta");
      return puffer::MechanismSpec::gaussian(*o.theta, eps, *o.delta);
    }
    if (o.delta) throw ValidationError("--delta only applies to gaussian methods");
    return puffer::MechanismSpec::laplace(*o.theta, eps);
  }
  if (!pairs) throw ValidationError("give --theta, or pairs to calibrate from");
  const auto report = calibrate(o, *pairs);
  if (report.family == puffer::NoiseFamily::exponential) {
    throw ValidationError("only laplace and gaussian mechanisms can be applied");
  }
  return report.mechanism();
}

// ---------------------------------------------------------------------------

void run_plan(const Options& o) {
  const auto p = puffer::distribution_from_json(read_json_file(o.p_file));
  const auto q = puffer::distribution_from_json(read_json_file(o.q_file));
  const auto d = parse_metric(o.metric);
  const auto plan = puffer::optimal_plan(p, q);
  json j{{"metric", d.name()},
         {"plan", plan},
         {"plan_sensitivity", puffer::plan_sensitivity(plan, d)},
         {"support_sensitivity", puffer::support_sensitivity(p, q, d)},
         {"transport_cost", puffer::transport_cost(plan, d)}};
  j["w1"] = d.convex() ? json(puffer::w1_distance(p, q, d)) : json(nullptr);
  write_json(o, j);
}

void run_calibrate(const Options& o) {
  const auto pairs = load_pairs(o);
  auto report = calibrate(o, pairs);
  if (o.verify && report.family != puffer::NoiseFamily::exponential) {
    const auto spec = report.mechanism();
    json v = puffer::verify_pufferfish(pairs, spec, report.epsilon);
    if (report.family == puffer::NoiseFamily::gaussian) {
      v["delta_approx"] = puffer::verify_delta_approx(pairs, spec, report.epsilon, *report.delta);
    }
    report.verification = std::move(v);
  }
  write_json(o, report);
}

void run_release(const Options& o) {
  if (o.table.empty() || o.data_col.empty()) throw ValidationError("release needs --table and --data-col");
  std::optional<std::vector<DiscriminativePair>> pairs;
  if (!o.theta) pairs = load_pairs(o);
  const auto spec = mechanism(o, pairs ? &*pairs : nullptr);
  std::optional<puffer::AttributeMapping> map;
  if (!o.mapping.empty()) map = load_mapping(o.mapping);

  std::ifstream in(o.table);
  if (!in) throw ValidationError("csv: cannot open '" + o.table + "'");
  const puffer::CsvOptions csv{o.delimiter, false};
  std::vector<std::string> header;
  if (!puffer::read_csv_record(in, header, csv)) throw ValidationError("csv: empty file");
  const auto col = puffer::column_index(header, o.data_col);

  std::vector<std::vector<std::string>> rows;
  std::vector<double> values;
  std::vector<std::string> fields;
  std::size_t row = 0;
  while (puffer::read_csv_record(in, fields, csv)) {
    if (fields.size() == 1 && fields.front().empty()) continue;
    ++row;
    if (fields.size() <= col) {
      throw ValidationError("csv: row " + std::to_string(row) + " has " + std::to_string(fields.size()) +
                            " fields");
    }
    const auto raw = puffer::detail::trim(fields[col]);
    double v = 0.0;
    if (map) {
      const auto idx = map->index_of(raw);
      if (!idx) {
        if (o.skip_unmapped) continue;
        throw ValidationError("csv: row " + std::to_string(row) + ": label '" + raw + "' is not in the mapping");
      }
      v = static_cast<double>(*idx);
    } else {
      std::size_t used = 0;
      try {
        v = std::stod(raw, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != raw.size() || !std::isfinite(v)) {
        throw ValidationError("csv: row " + std::to_string(row) + ": '" + raw + "' is not a number");
      }
    }
    values.push_back(v);
    rows.push_back(fields);
  }
  const auto noised = puffer::release(values, spec, o.seed);
  std::ostringstream out;
  puffer::write_csv_record(out, header, o.delimiter);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    // Zero noise leaves the field untouched, so θ = 0 is an exact identity.
    if (noised[i] != values[i]) rows[i][col] = format_number(noised[i]);
    puffer::write_csv_record(out, rows[i], o.delimiter);
  }
  write_output(o, out.str());
}

void run_verify(const Options& o) {
  const auto pairs = load_pairs(o);
  const auto spec = mechanism(o, &pairs);
  const double eps = require_epsilon(o);
  json j{{"mechanism", {{"family", puffer::to_string(spec.family)}, {"theta", spec.theta}}},
         {"pufferfish", puffer::verify_pufferfish(pairs, spec, eps)}};
  if (spec.family == puffer::NoiseFamily::gaussian) {
    j["delta_approx"] = puffer::verify_delta_approx(pairs, spec, eps, *spec.delta);
  }
  write_json(o, j);
}

void run_scenario(const Options& o) {
  if (o.scenario.empty()) throw ValidationError("scenario needs --scenario");
  const auto sys = puffer::user_system_from_json(read_json_file(o.scenario));
  puffer::PairMode mode;
  if (o.mode == "values") {
    mode = puffer::PairMode::values;
  } else if (o.mode == "absence") {
    mode = puffer::PairMode::absence;
  } else {
    throw ValidationError("unknown --mode '" + o.mode + "' (values|absence)");
  }
  const auto d = parse_metric(o.metric);
  const auto pairs = puffer::discriminative_pairs(sys, o.user, mode, o.scenario);
  json sens = json::array();
  json conditionals = json::object();
  for (const auto& p : pairs) {
    sens.push_back(puffer::plan_sensitivity(puffer::optimal_plan(p.first, p.second), d));
    conditionals[p.first_secret] = p.first;
    conditionals[p.second_secret] = p.second;
  }
  json j{{"user", o.user},
         {"mode", o.mode},
         {"query_sensitivity", puffer::query_sensitivity(sys, o.user, d, mode)},
         {"plan_sensitivity", std::move(sens)},
         {"conditionals", std::move(conditionals)},
         {"pairs", pairs}};
  if (o.epsilon) j["calibration"] = calibrate(o, pairs);
  write_json(o, j);
}

void run_figure4(const Options& o) {
  if (!(o.eps_step > 0.0) || !(o.eps_min > 0.0) || o.eps_max < o.eps_min) {
    throw ValidationError("figure4 needs 0 < --eps-min <= --eps-max and --eps-step > 0");
  }
  const auto path = o.counts.empty() ? std::string(PUFFER_DATA_DIR) + "/adult_education_by_race.json" : o.counts;
  const auto cond = puffer::empirical_conditionals(puffer::count_table_from_json(read_json_file(path)));
  const auto pairs = puffer::enumerate_pairs(cond, path, std::vector<std::pair<std::string, std::string>>{{o.first, o.second}});
  std::ostringstream out;
  out << "epsilon,theorem-1,theorem-2\n";
  const auto steps = static_cast<long>(std::floor((o.eps_max - o.eps_min) / o.eps_step + 1e-9));
  for (long k = 0; k <= steps; ++k) {
    const double eps = o.eps_min + static_cast<double>(k) * o.eps_step;
    puffer::CalibrationOptions co;
    const auto strict = puffer::calibrate_pufferfish(pairs, eps, co);
    co.method = puffer::Calibration::relaxed;
    const auto relaxed = puffer::calibrate_pufferfish(pairs, eps, co);
    out << format_number(eps, 12) << ',' << format_number(*strict.variance, 15) << ','
        << format_number(*relaxed.variance, 15) << '\n';
  }
  write_output(o, out.str());
}

json dense_tables(const DiscriminativePair& pair, double epsilon) {
  const auto& p = pair.first;
  const auto& q = pair.second;
  const auto plan = puffer::optimal_plan(p, q);
  json cmf = json::array();
  json pmf = json::array();
  for (double x : p.support()) {
    json cmf_row = json::array();
    json pmf_row = json::array();
    for (double xp : q.support()) {
      cmf_row.push_back(std::min(puffer::cdf(p, x), puffer::cdf(q, xp)));
      pmf_row.push_back(plan.mass_at(x, xp));
    }
    cmf.push_back(std::move(cmf_row));
    pmf.push_back(std::move(pmf_row));
  }
  const double sens = puffer::plan_sensitivity(plan);
  return json{{"p", p},
              {"q", q},
              {"x", p.support()},
              {"x_prime", q.support()},
              {"joint_cmf", std::move(cmf)},
              {"joint_pmf", std::move(pmf)},
              {"plan_sensitivity", sens},
              {"epsilon", epsilon},
              {"theta", puffer::calibrate_exponential(sens, epsilon)}};
}

void run_tables(const Options& o) {
  const double eps = o.epsilon.value_or(1.0);
  write_json(o, json{{"example_1", dense_tables(puffer::reference::four_point_pair(), eps)},
                     {"example_2", dense_tables(puffer::reference::five_point_pair(), eps)}});
}

// ---------------------------------------------------------------------------

int fail(const std::string& kind, const std::string& message, int code) {
  std::cerr << json{{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}}.dump() << "\n";
  return code;
}

void add_pair_source(CLI::App* cmd, Options& o) {
  cmd->add_option("--pairs", o.pairs, "Pairs JSON (pairs, count table or conditionals)");
  cmd->add_option("--table", o.table, "CSV table");
  cmd->add_option("--secret-col", o.secret_col, "Secret column of --table");
  cmd->add_option("--data-col", o.data_col, "Data column of --table");
  cmd->add_option("--mapping", o.mapping, "JSON array of data labels in index order");
  cmd->add_flag("--skip-unmapped", o.skip_unmapped, "Drop rows whose label is not in the mapping");
  cmd->add_option("--delimiter", o.delimiter, "CSV delimiter");
}

void add_mechanism(CLI::App* cmd, Options& o) {
  cmd->add_option("--epsilon", o.epsilon, "Privacy budget");
  cmd->add_option("--delta", o.delta, "Approximation slack (gaussian methods)");
  cmd->add_option("--method", o.method, "theorem1 | theorem2 | gaussian-a | gaussian-b | lemma1")
      ->capture_default_str();
  cmd->add_option("--metric", o.metric, "Distance on outputs")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Pufferfish privacy by optimal transport"};
  app.require_subcommand(1);
  app.add_option("--out", o.out, "Write output here instead of stdout");

  auto* plan = app.add_subcommand("plan", "Optimal transport plan between two distributions");
  plan->add_option("--p", o.p_file, "Row distribution JSON")->required();
  plan->add_option("--q", o.q_file, "Column distribution JSON")->required();
  plan->add_option("--metric", o.metric)->capture_default_str();

  auto* cal = app.add_subcommand("calibrate", "Noise scale for a discriminative pair set");
  add_pair_source(cal, o);
  add_mechanism(cal, o);
  cal->add_flag("--verify", o.verify, "Attach a numerical verification report");

  auto* rel = app.add_subcommand("release", "Add calibrated noise to a CSV column");
  add_pair_source(rel, o);
  add_mechanism(rel, o);
  rel->add_option("--theta", o.theta, "Use this noise scale instead of calibrating");
  rel->add_option("--seed", o.seed, "Random seed")->capture_default_str();

  auto* ver = app.add_subcommand("verify", "Check the log-ratio bound numerically");
  add_pair_source(ver, o);
  add_mechanism(ver, o);
  ver->add_option("--theta", o.theta, "Verify this noise scale instead of the calibrated one");

  auto* sc = app.add_subcommand("scenario", "Conditional distributions and pairs of a user system");
  sc->add_option("--scenario", o.scenario, "Scenario JSON")->required();
  sc->add_option("--user", o.user, "User index")->capture_default_str();
  sc->add_option("--mode", o.mode, "values | absence")->capture_default_str();
  add_mechanism(sc, o);

  auto* fig = app.add_subcommand("figure4", "Laplace variance against epsilon, strict and relaxed");
  fig->add_option("--counts", o.counts, "Count table JSON (default: bundled Adult fixture)");
  fig->add_option("--first", o.first, "First secret")->capture_default_str();
  fig->add_option("--second", o.second, "Second secret")->capture_default_str();
  fig->add_option("--eps-min", o.eps_min)->capture_default_str();
  fig->add_option("--eps-max", o.eps_max)->capture_default_str();
  fig->add_option("--eps-step", o.eps_step)->capture_default_str();

  auto* tab = app.add_subcommand("tables", "Joint CMF and PMF of the two worked examples");
  tab->add_option("--epsilon", o.epsilon, "Budget for the reported theta (default 1)");

  for (auto* sub : {plan, cal, rel, ver, sc, fig, tab}) sub->add_option("--out", o.out, "Output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), kExitValidation);
  }

  try {
    if (*plan) run_plan(o);
    if (*cal) run_calibrate(o);
    if (*rel) run_release(o);
    if (*ver) run_verify(o);
    if (*sc) run_scenario(o);
    if (*fig) run_figure4(o);
    if (*tab) run_tables(o);
  } catch (const puffer::NumericError& e) {
    return fail("numeric", e.what(), kExitNumeric);
  } catch (const puffer::ValidationError& e) {
    return fail("validation", e.what(), kExitValidation);
  } catch (const puffer::Error& e) {
    return fail("validation", e.what(), kExitValidation);
  } catch (const json::exception& e) {
    return fail("validation", e.what(), kExitValidation);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), kExitInternal);
  }
  return 0;
}
