#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mmo/errors.hpp"

namespace mmo {

enum class Direction { minimize, maximize };

/// How cell means are rounded before ranking and printed afterwards.
struct Rounding {
  enum class Mode { decimals, significant } mode = Mode::decimals;
  int digits = 2;

  static Rounding decimals(int d) { return {Mode::decimals, d}; }
  static Rounding significant(int d) { return {Mode::significant, d}; }
};

/// Display text of a value under `r`: fixed decimals, or scientific with
/// `digits` significant figures ("8.02E-03").
inline std::string format_rounded(double v, Rounding r) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  if (r.mode == Rounding::Mode::decimals) {
    std::snprintf(buf, sizeof buf, "%.*f", r.digits, v);
  } else {
    std::snprintf(buf, sizeof buf, "%.*E", std::max(r.digits - 1, 0), v);
  }
  std::string s(buf);
  if (s == "-0" || s.find_first_not_of("-0.") == std::string::npos) {
    if (!s.empty() && s[0] == '-') s.erase(0, 1);
  }
  return s;
}

/// The value as displayed, parsed back; ties are ties of displayed values.
inline double round_for_ranking(double v, Rounding r) {
  if (!std::isfinite(v)) return v;
  return std::strtod(format_rounded(v, r).c_str(), nullptr);
}

/// Dense ranking (1 = best) over rounded values: equal rounded values share a
/// rank and the next distinct value gets the next integer.
inline std::vector<int> rank_dense(const std::vector<double>& values, Direction dir, Rounding r) {
  if (values.empty()) throw ContractViolation("rank_dense: no values");
  std::vector<double> rounded;
  rounded.reserve(values.size());
  for (double v : values) rounded.push_back(round_for_ranking(v, r));
  std::vector<double> distinct = rounded;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (dir == Direction::maximize) std::reverse(distinct.begin(), distinct.end());
  std::vector<int> ranks;
  ranks.reserve(values.size());
  for (double v : rounded) {
    const auto it = std::find(distinct.begin(), distinct.end(), v);
    ranks.push_back(static_cast<int>(it - distinct.begin()) + 1);
  }
  return ranks;
}

/// Dense ranking over exact values.
inline std::vector<int> rank_dense_exact(const std::vector<double>& values, Direction dir) {
  if (values.empty()) throw ContractViolation("rank_dense: no values");
  std::vector<double> distinct = values;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (dir == Direction::maximize) std::reverse(distinct.begin(), distinct.end());
  std::vector<int> ranks;
  for (double v : values) {
    ranks.push_back(static_cast<int>(std::find(distinct.begin(), distinct.end(), v) - distinct.begin()) + 1);
  }
  return ranks;
}

/// Column means of a rows x columns rank matrix.
inline std::vector<double> average_ranks(const std::vector<std::vector<int>>& per_dataset) {
  if (per_dataset.empty()) throw ContractViolation("average_ranks: no rows");
  std::vector<double> avg(per_dataset.front().size(), 0.0);
  for (const auto& row : per_dataset) {
    if (row.size() != avg.size()) throw ContractViolation("average_ranks: ragged rank matrix");
    for (std::size_t a = 0; a < row.size(); ++a) avg[a] += row[a];
  }
  for (double& v : avg) v /= static_cast<double>(per_dataset.size());
  return avg;
}

/// Rows = datasets, columns = algorithms.
struct RankTable {
  std::string metric;
  Direction direction = Direction::minimize;
  Rounding rounding;
  std::vector<std::string> datasets;
  std::vector<std::string> algorithms;
  std::vector<std::vector<double>> means;
  std::vector<std::vector<int>> ranks;
  std::vector<double> average_rank;
  std::vector<int> average_rank_rank;
};

/// One metric observation: the value of `algorithm` on `dataset` in one run.
struct Observation {
  std::string algorithm;
  std::string dataset;
  double value = 0.0;
};

/// Cell means over runs, per-dataset dense ranks, then the mean rank of each
/// algorithm, itself dense-ranked. Row/column order follows the given orders;
/// names absent from them are appended alphabetically.
inline RankTable aggregate_rank_table(const std::vector<Observation>& obs, std::string metric, Direction dir,
                                      Rounding rounding, const std::vector<std::string>& algorithm_order = {},
                                      const std::vector<std::string>& dataset_order = {}) {
  if (obs.empty()) throw AggregationError("no observations for metric '" + metric + "'");
  std::map<std::pair<std::string, std::string>, std::pair<double, std::size_t>> cells;
  std::set<std::string> algs, dsets;
  for (const auto& o : obs) {
    auto& c = cells[{o.dataset, o.algorithm}];
    c.first += o.value;
    ++c.second;
    algs.insert(o.algorithm);
    dsets.insert(o.dataset);
  }
  auto ordered = [](const std::set<std::string>& present, const std::vector<std::string>& hint) {
    std::vector<std::string> out;
    for (const auto& h : hint) {
      if (present.count(h) && std::find(out.begin(), out.end(), h) == out.end()) out.push_back(h);
    }
    for (const auto& p : present) {
      if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
    }
    return out;
  };

  RankTable t;
  t.metric = std::move(metric);
  t.direction = dir;
  t.rounding = rounding;
  t.algorithms = ordered(algs, algorithm_order);
  t.datasets = ordered(dsets, dataset_order);
  for (const auto& d : t.datasets) {
    std::vector<double> row;
    for (const auto& a : t.algorithms) {
      const auto it = cells.find({d, a});
      if (it == cells.end()) {
        throw AggregationError("metric '" + t.metric + "': no records for algorithm '" + a + "' on dataset '" + d + "'");
      }
      row.push_back(it->second.first / static_cast<double>(it->second.second));
    }
    t.ranks.push_back(rank_dense(row, dir, rounding));
    t.means.push_back(std::move(row));
  }
  t.average_rank = average_ranks(t.ranks);
  t.average_rank_rank = rank_dense_exact(t.average_rank, Direction::minimize);
  return t;
}

enum class TableFormat { csv, markdown };

namespace detail {

inline std::string format_average(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace detail

/// Cells read "mean(rank)"; the best cell of each row is bold in markdown and
/// carries a trailing '*' in CSV.
inline std::string render_table(const RankTable& t, TableFormat fmt) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"Dataset"};
  header.insert(header.end(), t.algorithms.begin(), t.algorithms.end());
  rows.push_back(header);
  for (std::size_t d = 0; d < t.datasets.size(); ++d) {
    std::vector<std::string> row{t.datasets[d]};
    for (std::size_t a = 0; a < t.algorithms.size(); ++a) {
      std::string cell = format_rounded(t.means[d][a], t.rounding) + "(" + std::to_string(t.ranks[d][a]) + ")";
      if (t.ranks[d][a] == 1) cell = fmt == TableFormat::markdown ? "**" + cell + "**" : cell + "*";
      row.push_back(std::move(cell));
    }
    rows.push_back(std::move(row));
  }
  std::vector<std::string> last{"average ranking"};
  for (std::size_t a = 0; a < t.algorithms.size(); ++a) {
    last.push_back(detail::format_average(t.average_rank[a]) + "(" + std::to_string(t.average_rank_rank[a]) + ")");
  }
  rows.push_back(std::move(last));

  std::string out;
  if (fmt == TableFormat::csv) {
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out += ',';
        out += detail::csv_escape(row[i]);
      }
      out += '\n';
    }
    return out;
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out += '|';
    for (const auto& c : rows[r]) out += ' ' + c + " |";
    out += '\n';
    if (r == 0) {
      out += '|';
      for (std::size_t i = 0; i < rows[r].size(); ++i) out += "---|";
      out += '\n';
    }
  }
  return out;
}

}  // namespace mmo
