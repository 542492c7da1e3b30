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
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "puffer/distribution.hpp"
#include "puffer/error.hpp"
#include "puffer/pair.hpp"

namespace puffer {

// Category labels in index order; label k (0-based) maps to index k + 1.
// The order defines the geometry the metric sees.
class AttributeMapping {
 public:
  explicit AttributeMapping(std::vector<std::string> labels) : labels_(std::move(labels)) {
    if (labels_.empty()) throw ValidationError("mapping: no labels");
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (!index_.emplace(labels_[i], i + 1).second) {
        throw ValidationError("mapping: duplicate label '" + labels_[i] + "'");
      }
    }
  }

  static AttributeMapping from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw ValidationError("mapping JSON must be an array of labels");
    return AttributeMapping(j.get<std::vector<std::string>>());
  }

  std::optional<std::size_t> index_of(const std::string& label) const {
    auto it = index_.find(label);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& label(std::size_t index) const { return labels_.at(index - 1); }
  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t size() const { return labels_.size(); }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::size_t> index_;
};

// ---------------------------------------------------------------------------
// Delimited text

struct CsvOptions {
  char delimiter = ',';
  bool trim = true;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace detail

// Reads one record; quoted fields may contain delimiters, doubled quotes and
// newlines. Returns false at end of input.
inline bool read_csv_record(std::istream& in, std::vector<std::string>& fields,
                            const CsvOptions& opts = {}) {
  fields.clear();
  std::string line;
  auto next_line = [&] {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };
  if (!next_line()) return false;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0;; ++i) {
    if (i == line.size()) {
      if (quoted) {
        field.push_back('\n');
        if (!next_line()) throw ValidationError("csv: unterminated quoted field");
        i = static_cast<std::size_t>(-1);
        continue;
      }
      break;
    }
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
      was_quoted = true;
    } else if (c == opts.delimiter) {
      fields.push_back(opts.trim && !was_quoted ? detail::trim(field) : field);
      field.clear();
      was_quoted = false;
    } else {
      field.push_back(c);
    }
  }
  fields.push_back(opts.trim && !was_quoted ? detail::trim(field) : field);
  return true;
}

inline void write_csv_record(std::ostream& out, const std::vector<std::string>& fields,
                             char delimiter = ',') {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << delimiter;
    const auto& f = fields[i];
    if (f.find_first_of(std::string{delimiter, '"', '\n', '\r'}) == std::string::npos) {
      out << f;
      continue;
    }
    out << '"';
    for (char c : f) {
      if (c == '"') out << '"';
      out << c;
    }
    out << '"';
  }
  out << '\n';
}

inline std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw ValidationError("csv: missing column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

// ---------------------------------------------------------------------------
// Counting

struct RejectedRow {
  std::size_t row;  // 1-based data row, header excluded
  std::string label;
};

struct CountTable {
  std::vector<std::string> categories;                        // mapping labels
  std::map<std::string, std::vector<std::uint64_t>> counts;   // secret -> per-index counts
  std::size_t rows_read = 0;
  std::vector<RejectedRow> rejected;
};

struct LoadOptions {
  CsvOptions csv;
  bool skip_unmapped = false;  // otherwise the first unmapped label is an error
};

inline CountTable tally_table(std::istream& in, const std::string& secret_column,
                              const std::string& data_column, const AttributeMapping& mapping,
                              const LoadOptions& opts = {}) {
  std::vector<std::string> header;
  if (!read_csv_record(in, header, opts.csv)) throw ValidationError("csv: empty file");
  const auto s_col = column_index(header, secret_column);
  const auto x_col = column_index(header, data_column);

  CountTable table;
  table.categories = mapping.labels();
  std::vector<std::string> fields;
  std::size_t row = 0;
  while (read_csv_record(in, fields, opts.csv)) {
    if (fields.size() == 1 && fields.front().empty()) continue;
    ++row;
    if (fields.size() <= std::max(s_col, x_col)) {
      throw ValidationError("csv: row " + std::to_string(row) + " has " +
                            std::to_string(fields.size()) + " fields");
    }
    const auto index = mapping.index_of(fields[x_col]);
    if (!index) {
      if (!opts.skip_unmapped) {
        throw ValidationError("csv: row " + std::to_string(row) + ": label '" + fields[x_col] +
                              "' is not in the mapping");
      }
      table.rejected.push_back({row, fields[x_col]});
      continue;
    }
    auto& c = table.counts[fields[s_col]];
    if (c.empty()) c.assign(mapping.size(), 0);
    ++c[*index - 1];
    ++table.rows_read;
  }
  if (row == 0) throw ValidationError("csv: no data rows");
  return table;
}

inline CountTable load_table(const std::string& path, const std::string& secret_column,
                             const std::string& data_column, const AttributeMapping& mapping,
                             const LoadOptions& opts = {}) {
  std::ifstream in(path);
  if (!in) throw ValidationError("csv: cannot open '" + path + "'");
  return tally_table(in, secret_column, data_column, mapping, opts);
}

// Per-secret empirical P(X | S = s) on the index support {1, ..., K}.
inline std::map<std::string, DiscreteDistribution> empirical_conditionals(const CountTable& table) {
  std::map<std::string, DiscreteDistribution> out;
  for (const auto& [secret, counts] : table.counts) {
    std::uint64_t total = 0;
    for (auto c : counts) total += c;
    if (total == 0) throw ValidationError("conditionals: secret '" + secret + "' has no rows");
    std::vector<double> support(counts.size());
    std::vector<double> weights(counts.size());
    for (std::size_t k = 0; k < counts.size(); ++k) {
      support[k] = static_cast<double>(k + 1);
      weights[k] = static_cast<double>(counts[k]);
    }
    out.emplace(secret, DiscreteDistribution::from_weights(support, weights));
  }
  return out;
}

// All unordered secret pairs, or just `listed` when given.
inline std::vector<DiscriminativePair> enumerate_pairs(
    const std::map<std::string, DiscreteDistribution>& conditionals, const std::string& prior_tag,
    const std::optional<std::vector<std::pair<std::string, std::string>>>& listed = std::nullopt) {
  std::vector<DiscriminativePair> out;
  if (listed) {
    for (const auto& [a, b] : *listed) {
      auto ia = conditionals.find(a);
      auto ib = conditionals.find(b);
      if (ia == conditionals.end()) throw ValidationError("pairs: unknown secret '" + a + "'");
      if (ib == conditionals.end()) throw ValidationError("pairs: unknown secret '" + b + "'");
      out.emplace_back(a, b, ia->second, ib->second, prior_tag);
    }
    return out;
  }
  if (conditionals.size() < 2) throw ValidationError("pairs: need at least two secrets");
  for (auto i = conditionals.begin(); i != conditionals.end(); ++i) {
    for (auto j = std::next(i); j != conditionals.end(); ++j) {
      out.emplace_back(i->first, j->first, i->second, j->second, prior_tag);
    }
  }
  return out;
}

inline void to_json(nlohmann::json& j, const CountTable& t) {
  j = nlohmann::json{{"categories", t.categories}, {"counts", t.counts}, {"rows_read", t.rows_read}};
  auto rej = nlohmann::json::array();
  for (const auto& r : t.rejected) rej.push_back({{"row", r.row}, {"label", r.label}});
  j["rejected"] = std::move(rej);
}

inline CountTable count_table_from_json(const nlohmann::json& j) {
  try {
    CountTable t;
    t.categories = j.at("categories").get<std::vector<std::string>>();
    t.counts = j.at("counts").get<std::map<std::string, std::vector<std::uint64_t>>>();
    for (const auto& [secret, c] : t.counts) {
      if (c.size() != t.categories.size()) {
        throw ValidationError("count table: secret '" + secret + "' has " +
                              std::to_string(c.size()) + " counts for " +
                              std::to_string(t.categories.size()) + " categories");
      }
      for (auto v : c) t.rows_read += v;
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("count table JSON: ") + e.what());
  }
}

}  // namespace puffer
