#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sis/error.hpp"
#include "sis/features.hpp"
#include "sis/index.hpp"
#include "sis/io.hpp"
#include "sis/scoring.hpp"

namespace sis {

struct RankedEntry {
  std::string item_id;
  double score = 0.0;                      // raw score S
  std::optional<double> adjusted;          // S_C when adjustment is on
  std::optional<double> confidence;        // block confidence C

  double effective() const { return adjusted.value_or(score); }

  bool operator==(const RankedEntry&) const = default;
};

struct RankedResult {
  std::string query_id;
  ScoreKind score_kind = ScoreKind::distance;
  std::vector<RankedEntry> entries;
  // Scoring wall-clock for this query (scope selection included for indexed
  // runs, file I/O excluded). Filled by the harness, not by the rankers.
  double time_seconds = 0.0;
};

namespace detail {

inline void sort_entries(std::vector<RankedEntry>& entries, ScoreKind kind) {
  const bool descending = kind == ScoreKind::similarity;
  std::sort(entries.begin(), entries.end(),
            [descending](const RankedEntry& a, const RankedEntry& b) {
              const double ea = a.effective();
              const double eb = b.effective();
              if (ea != eb) return descending ? ea > eb : ea < eb;
              return a.item_id < b.item_id;
            });
}

inline void truncate(std::vector<RankedEntry>& entries, std::size_t top_k) {
  if (top_k != 0 && entries.size() > top_k) entries.resize(top_k);
}

}  // namespace detail

// Scores every scope member exactly once and returns the ranking. top_k = 0
// keeps the full ranking (evaluation consumes the whole list).
inline RankedResult rank_scope(const FeatureRecord& query, const Scope& scope,
                               const FeatureStore& features,
                               const ScorerConfig& config, bool adjust,
                               std::size_t top_k = 0) {
  RankedResult result;
  result.query_id = scope.query_id.empty() ? query.item_id : scope.query_id;
  result.entries.reserve(scope.members.size());
  bool kind_set = false;
  for (const ScopeMember& member : scope.members) {
    const FeatureRecord& candidate = features.at(member.item_id);
    const ScoreValue scored = score_features(query, candidate, config);
    if (!kind_set) {
      result.score_kind = scored.kind;
      kind_set = true;
    }
    RankedEntry entry;
    entry.item_id = member.item_id;
    entry.score = scored.value;
    if (adjust) {
      entry.confidence = member.confidence;
      entry.adjusted = adjust_score(scored.value, member.confidence, scored.kind);
    }
    result.entries.push_back(std::move(entry));
  }
  detail::sort_entries(result.entries, result.score_kind);
  detail::truncate(result.entries, top_k);
  return result;
}

// Exhaustive ranking over the whole store; the accuracy and timing oracle.
inline RankedResult linear_scan(const FeatureRecord& query,
                                const FeatureStore& features,
                                const ScorerConfig& config,
                                std::size_t top_k = 0) {
  RankedResult result;
  result.query_id = query.item_id;
  result.entries.reserve(features.size());
  bool kind_set = false;
  for (const FeatureRecord& candidate : features.records()) {
    const ScoreValue scored = score_features(query, candidate, config);
    if (!kind_set) {
      result.score_kind = scored.kind;
      kind_set = true;
    }
    result.entries.push_back({candidate.item_id, scored.value, {}, {}});
  }
  detail::sort_entries(result.entries, result.score_kind);
  detail::truncate(result.entries, top_k);
  return result;
}

struct SemanticHit {
  std::uint32_t block_id = 0;
  std::string item_id;
  double confidence = 0.0;

  bool operator==(const SemanticHit&) const = default;
};

// One representative per selected block, in block-confidence order: the
// posting with the highest stored confidence (ties already resolved by the
// block ordering). Empty blocks yield no entry.
inline std::vector<SemanticHit> semantic_retrieve(
    const ClassProbabilities& query_probs, std::size_t beta,
    const SisIndex& index) {
  if (beta == 0 || beta > index.num_blocks) {
    throw Error(errc::range, "beta = " + std::to_string(beta) +
                                 " out of range [1, " +
                                 std::to_string(index.num_blocks) + "]");
  }
  std::vector<SemanticHit> hits;
  hits.reserve(beta);
  for (const ScoredClass& pick : top_k(query_probs, beta)) {
    const auto& block = index.blocks[pick.id];
    if (block.empty()) continue;
    hits.push_back({pick.id, block.front().item_id, block.front().confidence});
  }
  return hits;
}

// --- ranked results (one JSON object per line) ----------------------------

inline json ranked_result_to_json(const RankedResult& result) {
  json doc;
  doc["query_id"] = result.query_id;
  doc["score_kind"] = to_string(result.score_kind);
  doc["time_seconds"] = result.time_seconds;
  json entries = json::array();
  for (const RankedEntry& entry : result.entries) {
    json e;
    e["item_id"] = entry.item_id;
    e["score"] = entry.score;
    if (entry.adjusted) e["adjusted"] = *entry.adjusted;
    if (entry.confidence) e["confidence"] = *entry.confidence;
    entries.push_back(std::move(e));
  }
  doc["entries"] = std::move(entries);
  return doc;
}

inline RankedResult ranked_result_from_json(const json& doc) {
  RankedResult result;
  try {
    result.query_id = require_field(doc, "query_id", "result").get<std::string>();
    const std::string kind =
        require_field(doc, "score_kind", "result").get<std::string>();
    if (kind == "similarity") {
      result.score_kind = ScoreKind::similarity;
    } else if (kind == "distance") {
      result.score_kind = ScoreKind::distance;
    } else {
      throw Error(errc::parse, "result: unknown score_kind '" + kind + "'");
    }
    if (doc.contains("time_seconds")) {
      result.time_seconds = doc["time_seconds"].get<double>();
    }
    for (const json& e : require_field(doc, "entries", "result")) {
      RankedEntry entry;
      entry.item_id = require_field(e, "item_id", "result entry").get<std::string>();
      entry.score = require_field(e, "score", "result entry").get<double>();
      if (e.contains("adjusted")) entry.adjusted = e["adjusted"].get<double>();
      if (e.contains("confidence")) entry.confidence = e["confidence"].get<double>();
      result.entries.push_back(std::move(entry));
    }
  } catch (const json::exception& e) {
    throw Error(errc::parse, std::string("result: ") + e.what());
  }
  return result;
}

inline std::string save_results(const std::vector<RankedResult>& results) {
  std::vector<json> docs;
  docs.reserve(results.size());
  for (const RankedResult& r : results) docs.push_back(ranked_result_to_json(r));
  return join_jsonl(docs);
}

inline std::vector<RankedResult> load_results(const std::string& text) {
  std::vector<RankedResult> out;
  for (const json& doc : parse_jsonl(text, "results")) {
    out.push_back(ranked_result_from_json(doc));
  }
  return out;
}

}  // namespace sis
