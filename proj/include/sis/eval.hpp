#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "sis/error.hpp"
#include "sis/features.hpp"
#include "sis/index.hpp"
#include "sis/io.hpp"
#include "sis/metrics.hpp"
#include "sis/retrieval.hpp"
#include "sis/scoring.hpp"

namespace sis {

// Queries are re-timed this many times and the minimum taken, to damp
// scheduler noise at small database sizes.
inline constexpr std::size_t kTimingReps = 3;

template <typename F>
double time_min_of(std::size_t reps, F&& fn) {
  using clock = std::chrono::steady_clock;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < reps; ++r) {
    const auto t0 = clock::now();
    fn();
    const auto t1 = clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

inline std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

// Configuration echo carried by every report; compare() keys off it.
struct RunConfig {
  std::string index_kind;  // "linear" | "sis" | "ivf"
  std::string detector;    // scorer label, e.g. "dense-l2"
  bool adjust = false;
  std::optional<std::size_t> alpha;
  std::optional<std::size_t> beta;
  std::optional<std::size_t> b_total;    // N_p or nlist
  std::optional<std::size_t> b_selected; // beta or nprobe
  std::string dataset_id;
  std::size_t n_d = 0;
};

struct QueryEval {
  std::string query_id;
  double ap = 0.0;
  double ap_standard = 0.0;
  double recall = 0.0;
  std::size_t s_real = 0;
  double t_idx = 0.0;
  double t_whl = 0.0;
};

struct EvalReport {
  RunConfig config;
  std::vector<QueryEval> per_query;
  std::size_t n_t = 0;
  // Aggregates are the arithmetic means of the per-query columns.
  double map = 0.0;
  double map_standard = 0.0;
  double mean_recall = 0.0;
  double mean_ratio_scope = 0.0;
  double mean_ratio_time = 0.0;
};

// Combines rankings, optional scopes, and ground truth into a report.
// Without scopes (linear scan) every query covers the full database:
// s_real = N_d and recall = 1 by construction. t_whl comes from
// whole_scan_times keyed by query id; when absent, t_whl = t_idx.
inline EvalReport evaluate(
    const RunConfig& config, const std::vector<RankedResult>& results,
    const std::vector<Scope>& scopes, const GroundTruth& gt,
    const std::unordered_map<std::string, double>& whole_scan_times = {}) {
  if (results.empty()) throw Error(errc::empty_input, "evaluate: no queries");
  if (config.n_d == 0) throw Error(errc::range, "evaluate: n_d must be > 0");
  if (!scopes.empty() && scopes.size() != results.size()) {
    throw Error(errc::length_mismatch,
                "evaluate: scope count differs from result count");
  }
  std::unordered_map<std::string, const Scope*> scope_by_query;
  for (const Scope& scope : scopes) scope_by_query[scope.query_id] = &scope;

  EvalReport report;
  report.config = config;
  report.n_t = results.size();
  report.per_query.reserve(results.size());

  for (const RankedResult& result : results) {
    const GroundTruth::Grades& grades = gt.for_query(result.query_id);
    QueryEval qe;
    qe.query_id = result.query_id;
    qe.ap = average_precision(result, grades);
    qe.ap_standard = standard_average_precision(result, grades);
    qe.t_idx = result.time_seconds;
    if (!scopes.empty()) {
      auto it = scope_by_query.find(result.query_id);
      if (it == scope_by_query.end()) {
        throw Error(errc::missing_scope,
                    "no scope record for query '" + result.query_id + "'");
      }
      qe.s_real = it->second->s_real();
      qe.recall = recalled_fraction(*it->second, grades);
    } else {
      qe.s_real = config.n_d;
      qe.recall = 1.0;
    }
    auto wt = whole_scan_times.find(result.query_id);
    qe.t_whl = wt == whole_scan_times.end() ? qe.t_idx : wt->second;
    report.per_query.push_back(std::move(qe));
  }

  std::vector<double> aps, aps_std, recalls, t_idx, t_whl;
  std::vector<std::size_t> s_real;
  for (const QueryEval& qe : report.per_query) {
    aps.push_back(qe.ap);
    aps_std.push_back(qe.ap_standard);
    recalls.push_back(qe.recall);
    s_real.push_back(qe.s_real);
    t_idx.push_back(qe.t_idx);
    t_whl.push_back(qe.t_whl);
  }
  report.map = mean_ap(aps);
  report.map_standard = mean_ap(aps_std);
  report.mean_recall = detail::mean_of(recalls);
  report.mean_ratio_scope = ratio_scope(s_real, config.n_d);
  // ratio_time is only meaningful when times were measured; untimed inputs
  // leave it at 0.
  const bool timed = std::all_of(t_whl.begin(), t_whl.end(),
                                 [](double t) { return t > 0.0; });
  report.mean_ratio_time = timed ? ratio_time(t_idx, t_whl) : 0.0;
  return report;
}

// --- report document -------------------------------------------------------

inline json run_config_to_json(const RunConfig& config) {
  json doc;
  doc["index_kind"] = config.index_kind;
  doc["detector"] = config.detector;
  doc["adjust"] = config.adjust;
  if (config.alpha) doc["alpha"] = *config.alpha;
  if (config.beta) doc["beta"] = *config.beta;
  if (config.b_total) doc["b_total"] = *config.b_total;
  if (config.b_selected) doc["b_selected"] = *config.b_selected;
  doc["dataset_id"] = config.dataset_id;
  doc["n_d"] = config.n_d;
  return doc;
}

inline RunConfig run_config_from_json(const json& doc) {
  RunConfig config;
  config.index_kind = require_field(doc, "index_kind", "report").get<std::string>();
  config.detector = require_field(doc, "detector", "report").get<std::string>();
  config.adjust = require_field(doc, "adjust", "report").get<bool>();
  if (doc.contains("alpha")) config.alpha = doc["alpha"].get<std::size_t>();
  if (doc.contains("beta")) config.beta = doc["beta"].get<std::size_t>();
  if (doc.contains("b_total")) config.b_total = doc["b_total"].get<std::size_t>();
  if (doc.contains("b_selected")) {
    config.b_selected = doc["b_selected"].get<std::size_t>();
  }
  config.dataset_id = require_field(doc, "dataset_id", "report").get<std::string>();
  config.n_d = require_field(doc, "n_d", "report").get<std::size_t>();
  return config;
}

inline std::string save_report(const EvalReport& report) {
  json doc;
  doc["config"] = run_config_to_json(report.config);
  doc["n_t"] = report.n_t;
  json aggregates;
  aggregates["map"] = report.map;
  aggregates["map_standard"] = report.map_standard;
  aggregates["recall"] = report.mean_recall;
  aggregates["ratio_scope"] = report.mean_ratio_scope;
  aggregates["ratio_time"] = report.mean_ratio_time;
  doc["aggregates"] = std::move(aggregates);
  json per_query = json::array();
  for (const QueryEval& qe : report.per_query) {
    json q;
    q["query_id"] = qe.query_id;
    q["ap"] = qe.ap;
    q["ap_standard"] = qe.ap_standard;
    q["recall"] = qe.recall;
    q["s_real"] = qe.s_real;
    q["t_idx"] = qe.t_idx;
    q["t_whl"] = qe.t_whl;
    per_query.push_back(std::move(q));
  }
  doc["per_query"] = std::move(per_query);
  return doc.dump();
}

inline EvalReport load_report(const std::string& document) {
  const json doc = parse_json(document, "report");
  EvalReport report;
  try {
    report.config = run_config_from_json(require_field(doc, "config", "report"));
    report.n_t = require_field(doc, "n_t", "report").get<std::size_t>();
    const json& agg = require_field(doc, "aggregates", "report");
    report.map = require_field(agg, "map", "report").get<double>();
    report.map_standard = require_field(agg, "map_standard", "report").get<double>();
    report.mean_recall = require_field(agg, "recall", "report").get<double>();
    report.mean_ratio_scope =
        require_field(agg, "ratio_scope", "report").get<double>();
    report.mean_ratio_time =
        require_field(agg, "ratio_time", "report").get<double>();
    for (const json& q : require_field(doc, "per_query", "report")) {
      QueryEval qe;
      qe.query_id = require_field(q, "query_id", "report").get<std::string>();
      qe.ap = require_field(q, "ap", "report").get<double>();
      qe.ap_standard = require_field(q, "ap_standard", "report").get<double>();
      qe.recall = require_field(q, "recall", "report").get<double>();
      qe.s_real = require_field(q, "s_real", "report").get<std::size_t>();
      qe.t_idx = require_field(q, "t_idx", "report").get<double>();
      qe.t_whl = require_field(q, "t_whl", "report").get<double>();
      report.per_query.push_back(std::move(qe));
    }
  } catch (const json::exception& e) {
    throw Error(errc::parse, std::string("report: ") + e.what());
  }
  return report;
}

namespace detail {

inline std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

inline std::string render_table(const std::vector<std::string>& header,
                                const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      width[c] = std::max(width[c], row[c].size());
    }
  }
  std::string out;
  const auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out += row[c];
      if (c + 1 < row.size()) {
        out.append(width[c] - row[c].size() + 2, ' ');
      }
    }
    out += '\n';
  };
  emit(header);
  for (const auto& row : rows) emit(row);
  return out;
}

}  // namespace detail

// Aligned plain-text rendering of a report, for human diffing.
inline std::string render_report_text(const EvalReport& report) {
  std::string out;
  out += "index_kind: " + report.config.index_kind + "\n";
  out += "detector: " + report.config.detector + "\n";
  out += "adjust: " + std::string(report.config.adjust ? "on" : "off") + "\n";
  if (report.config.alpha) out += "alpha: " + std::to_string(*report.config.alpha) + "\n";
  if (report.config.beta) out += "beta: " + std::to_string(*report.config.beta) + "\n";
  if (report.config.b_total) {
    out += "b_total: " + std::to_string(*report.config.b_total) + "\n";
  }
  if (report.config.b_selected) {
    out += "b_selected: " + std::to_string(*report.config.b_selected) + "\n";
  }
  out += "dataset: " + report.config.dataset_id + "\n";
  out += "n_d: " + std::to_string(report.config.n_d) + "\n";
  out += "n_t: " + std::to_string(report.n_t) + "\n";
  out += "mAP: " + format_double(report.map) + "\n";
  out += "mAP_standard: " + format_double(report.map_standard) + "\n";
  out += "Recall: " + format_double(report.mean_recall) + "\n";
  out += "Ratio_scope: " + format_double(report.mean_ratio_scope) + "\n";
  out += "Ratio_time: " + format_double(report.mean_ratio_time) + "\n\n";

  std::vector<std::vector<std::string>> rows;
  for (const QueryEval& qe : report.per_query) {
    rows.push_back({qe.query_id, detail::fixed3(qe.ap), detail::fixed3(qe.recall),
                    std::to_string(qe.s_real), format_double(qe.t_idx),
                    format_double(qe.t_whl)});
  }
  out += detail::render_table({"query_id", "AP", "Recall", "s_real", "t_idx", "t_whl"},
                              rows);
  return out;
}

// --- alpha/beta sweep -------------------------------------------------------

struct SweepRow {
  std::size_t alpha = 0;
  std::size_t beta = 0;
  double map = 0.0;
  double recall = 0.0;
  double ratio_scope = 0.0;
  double ratio_time = 0.0;
};

// Full grid over alpha x beta. One index build per alpha; per query the
// whole-scan time is measured once up front and reused across the grid.
inline std::vector<SweepRow> sweep(
    const std::vector<ClassProbabilities>& db_probs,
    const std::vector<ClassProbabilities>& query_probs,
    const FeatureStore& db_features,
    const std::vector<FeatureRecord>& query_features, const GroundTruth& gt,
    const std::vector<std::size_t>& alphas, const std::vector<std::size_t>& betas,
    const ScorerConfig& scorer, bool adjust = false) {
  if (alphas.empty() || betas.empty()) {
    throw Error(errc::empty_input, "sweep: empty alpha or beta grid");
  }
  if (query_probs.size() != query_features.size()) {
    throw Error(errc::length_mismatch,
                "sweep: query probability and feature counts differ");
  }
  const std::size_t n_d = db_features.size();
  if (n_d == 0) throw Error(errc::empty_input, "sweep: empty database");

  std::vector<double> t_whl(query_probs.size());
  for (std::size_t q = 0; q < query_features.size(); ++q) {
    t_whl[q] = time_min_of(kTimingReps, [&] {
      linear_scan(query_features[q], db_features, scorer);
    });
  }

  std::vector<SweepRow> rows;
  rows.reserve(alphas.size() * betas.size());
  for (std::size_t alpha : alphas) {
    const SisIndex index = build_index(db_probs, alpha);
    for (std::size_t beta : betas) {
      std::vector<double> aps, recalls, t_idx;
      std::vector<std::size_t> s_real;
      for (std::size_t q = 0; q < query_probs.size(); ++q) {
        Scope scope;
        RankedResult ranking;
        const double t = time_min_of(kTimingReps, [&] {
          scope = select_scope(query_probs[q], beta, index);
          ranking = rank_scope(query_features[q], scope, db_features, scorer,
                               adjust);
        });
        const GroundTruth::Grades& grades = gt.for_query(query_probs[q].item_id);
        aps.push_back(average_precision(ranking, grades));
        recalls.push_back(recalled_fraction(scope, grades));
        s_real.push_back(scope.s_real());
        t_idx.push_back(t);
      }
      SweepRow row;
      row.alpha = alpha;
      row.beta = beta;
      row.map = mean_ap(aps);
      row.recall = mean_ap(recalls);
      row.ratio_scope = ratio_scope(s_real, n_d);
      row.ratio_time = ratio_time(t_idx, t_whl);
      rows.push_back(row);
    }
  }
  return rows;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "alpha,beta,map,recall,ratio_scope,ratio_time\n";
  for (const SweepRow& row : rows) {
    out += std::to_string(row.alpha) + ',' + std::to_string(row.beta) + ',' +
           format_double(row.map) + ',' + format_double(row.recall) + ',' +
           format_double(row.ratio_scope) + ',' + format_double(row.ratio_time) +
           '\n';
  }
  return out;
}

// --- comparison across runs -------------------------------------------------

struct ComparisonRow {
  std::string name;
  std::string detector;
  std::optional<std::size_t> b_total;
  std::optional<std::size_t> b_selected;
  double map = 0.0;
  double recall = 0.0;
  double ratio_scope = 0.0;
  double ratio_time = 0.0;
};

// Side-by-side rows for named runs over one dataset. Rejects runs whose
// dataset identity, database size, or query count differ.
inline std::vector<ComparisonRow> make_comparison(
    const std::vector<std::pair<std::string, EvalReport>>& runs) {
  if (runs.empty()) throw Error(errc::empty_input, "compare: no runs");
  const RunConfig& first = runs.front().second.config;
  for (const auto& [name, report] : runs) {
    if (report.config.dataset_id != first.dataset_id ||
        report.config.n_d != first.n_d || report.n_t != runs.front().second.n_t) {
      throw Error(errc::dataset_mismatch,
                  "compare: run '" + name + "' was evaluated on a different dataset");
    }
  }
  std::vector<ComparisonRow> rows;
  rows.reserve(runs.size());
  for (const auto& [name, report] : runs) {
    ComparisonRow row;
    row.name = name;
    row.detector = report.config.detector;
    row.b_total = report.config.b_total;
    row.b_selected = report.config.b_selected;
    row.map = report.map;
    row.recall = report.mean_recall;
    row.ratio_scope = report.mean_ratio_scope;
    row.ratio_time = report.mean_ratio_time;
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string comparison_table(const std::vector<ComparisonRow>& rows) {
  std::vector<std::vector<std::string>> cells;
  for (const ComparisonRow& row : rows) {
    cells.push_back({row.name, row.detector,
                     row.b_total ? std::to_string(*row.b_total) : "-",
                     row.b_selected ? std::to_string(*row.b_selected) : "-",
                     detail::fixed3(row.map), detail::fixed3(row.recall),
                     detail::fixed3(row.ratio_scope),
                     detail::fixed3(row.ratio_time)});
  }
  return detail::render_table({"Index", "Detector", "b_total", "b_selected", "mAP",
                               "Recall", "Ratio_scope", "Ratio_time"},
                              cells);
}

inline json comparison_to_json(const std::vector<ComparisonRow>& rows) {
  json out = json::array();
  for (const ComparisonRow& row : rows) {
    json doc;
    doc["index"] = row.name;
    doc["detector"] = row.detector;
    if (row.b_total) doc["b_total"] = *row.b_total;
    if (row.b_selected) doc["b_selected"] = *row.b_selected;
    doc["map"] = row.map;
    doc["recall"] = row.recall;
    doc["ratio_scope"] = row.ratio_scope;
    doc["ratio_time"] = row.ratio_time;
    out.push_back(std::move(doc));
  }
  return out;
}

}  // namespace sis
