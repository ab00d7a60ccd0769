#pragma once

#include <map>
#include <string>
#include <vector>

#include "sis/error.hpp"
#include "sis/index.hpp"
#include "sis/io.hpp"
#include "sis/retrieval.hpp"

namespace sis {

// Graded relevance per query: item id -> grade in [0, 1]. Every evaluated
// query must carry positive total grade mass.
class GroundTruth {
public:
  using Grades = std::map<std::string, double>;

  void add(const std::string& query_id, const std::string& item_id, double grade) {
    if (!(grade >= 0.0 && grade <= 1.0)) {
      throw Error(errc::range, query_id + ": grade for '" + item_id +
                                   "' outside [0, 1]");
    }
    queries_[query_id][item_id] = grade;
  }

  bool has(const std::string& query_id) const {
    return queries_.count(query_id) != 0;
  }

  const Grades& for_query(const std::string& query_id) const {
    auto it = queries_.find(query_id);
    if (it == queries_.end()) {
      throw Error(errc::missing_ground_truth,
                  "no ground truth for query '" + query_id + "'");
    }
    return it->second;
  }

  // N_gt: total grade mass of a query.
  double total_mass(const std::string& query_id) const {
    double mass = 0.0;
    for (const auto& [item, grade] : for_query(query_id)) mass += grade;
    return mass;
  }

  const std::map<std::string, Grades>& queries() const { return queries_; }

  void validate() const {
    for (const auto& [query_id, grades] : queries_) {
      double mass = 0.0;
      for (const auto& [item, grade] : grades) mass += grade;
      if (!(mass > 0.0)) {
        throw Error(errc::zero_mass,
                    "query '" + query_id + "' has zero ground-truth mass");
      }
    }
  }

private:
  std::map<std::string, Grades> queries_;
};

inline double grade_of(const GroundTruth::Grades& grades, const std::string& item) {
  auto it = grades.find(item);
  return it == grades.end() ? 0.0 : it->second;
}

// Mean grade of the first k ranked entries.
inline double precision_at_k(const RankedResult& ranked,
                             const GroundTruth::Grades& grades, std::size_t k) {
  if (k == 0) throw Error(errc::range, "precision_at_k: k = 0");
  if (k > ranked.entries.size()) {
    throw Error(errc::range, "precision_at_k: k = " + std::to_string(k) +
                                 " exceeds ranked list of " +
                                 std::to_string(ranked.entries.size()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sum += grade_of(grades, ranked.entries[i].item_id);
  }
  return sum / static_cast<double>(k);
}

// AP = (1/N_gt) * sum of precision@k for every k [1, N_rs], where N_rs is
// the full ranked-list length. Summing over all ranks rather than relevant
// ranks only means the value is not clamped to [0, 1]; see
// standard_average_precision for the classic definition.
inline double average_precision(const RankedResult& ranked,
                                const GroundTruth::Grades& grades) {
  double n_gt = 0.0;
  for (const auto& [item, grade] : grades) n_gt += grade;
  if (!(n_gt > 0.0)) {
    throw Error(errc::zero_mass, ranked.query_id + ": zero ground-truth mass");
  }
  if (ranked.entries.empty()) return 0.0;
  double running = 0.0;
  double ap_sum = 0.0;
  for (std::size_t i = 0; i < ranked.entries.size(); ++i) {
    running += grade_of(grades, ranked.entries[i].item_id);
    ap_sum += running / static_cast<double>(i + 1);
  }
  return ap_sum / n_gt;
}

// Classic binary AP (precision summed at relevant ranks only, normalized by
// the number of relevant items). Sanity companion to average_precision.
inline double standard_average_precision(const RankedResult& ranked,
                                         const GroundTruth::Grades& grades) {
  std::size_t n_relevant = 0;
  for (const auto& [item, grade] : grades) {
    if (grade > 0.0) ++n_relevant;
  }
  if (n_relevant == 0) {
    throw Error(errc::zero_mass, ranked.query_id + ": no relevant items");
  }
  std::size_t hits = 0;
  double ap_sum = 0.0;
  for (std::size_t i = 0; i < ranked.entries.size(); ++i) {
    if (grade_of(grades, ranked.entries[i].item_id) > 0.0) {
      ++hits;
      ap_sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
  }
  return ap_sum / static_cast<double>(n_relevant);
}

inline double mean_ap(const std::vector<double>& per_query_aps) {
  if (per_query_aps.empty()) throw Error(errc::empty_input, "mean_ap: no queries");
  double sum = 0.0;
  for (double ap : per_query_aps) sum += ap;
  return sum / static_cast<double>(per_query_aps.size());
}

// Recalled fraction for one query: grade mass inside the scope over total
// grade mass.
inline double recalled_fraction(const Scope& scope,
                                const GroundTruth::Grades& grades) {
  double total = 0.0;
  double recalled = 0.0;
  for (const auto& [item, grade] : grades) {
    total += grade;
    if (scope.contains(item)) recalled += grade;
  }
  if (!(total > 0.0)) {
    throw Error(errc::zero_mass, scope.query_id + ": zero ground-truth mass");
  }
  return recalled / total;
}

// Mean recalled ground-truth fraction over all queries; the ground-truth
// loss rate of the narrowed scope is 1 minus this.
inline double recall(const std::vector<Scope>& scopes, const GroundTruth& gt) {
  if (scopes.empty()) throw Error(errc::empty_input, "recall: no scopes");
  double sum = 0.0;
  for (const Scope& scope : scopes) {
    sum += recalled_fraction(scope, gt.for_query(scope.query_id));
  }
  return sum / static_cast<double>(scopes.size());
}

// Mean per-query s_real / N_d.
inline double ratio_scope(const std::vector<std::size_t>& s_real,
                          std::size_t n_items) {
  if (s_real.empty()) throw Error(errc::empty_input, "ratio_scope: no queries");
  double sum = 0.0;
  for (std::size_t s : s_real) sum += scope_ratio(s, n_items);
  return sum / static_cast<double>(s_real.size());
}

// Mean per-query t_idx / t_whl.
inline double ratio_time(const std::vector<double>& t_idx,
                         const std::vector<double>& t_whl) {
  if (t_idx.empty()) throw Error(errc::empty_input, "ratio_time: no queries");
  if (t_idx.size() != t_whl.size()) {
    throw Error(errc::length_mismatch, "ratio_time: per-query lists differ in length");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < t_idx.size(); ++i) {
    if (!(t_whl[i] > 0.0)) {
      throw Error(errc::zero_time, "ratio_time: whole-scan time must be > 0");
    }
    sum += t_idx[i] / t_whl[i];
  }
  return sum / static_cast<double>(t_idx.size());
}

// --- ground-truth records (one JSON object per line) ----------------------
//
// {"query_id":"q1","relevant":{"item_a":1.0,"item_b":0.5}}

inline std::string save_ground_truth(const GroundTruth& gt) {
  std::vector<json> docs;
  for (const auto& [query_id, grades] : gt.queries()) {
    json doc;
    doc["query_id"] = query_id;
    json rel = json::object();
    for (const auto& [item, grade] : grades) rel[item] = grade;
    doc["relevant"] = std::move(rel);
    docs.push_back(std::move(doc));
  }
  return join_jsonl(docs);
}

inline GroundTruth load_ground_truth(const std::string& text) {
  GroundTruth gt;
  for (const json& doc : parse_jsonl(text, "ground truth")) {
    try {
      const std::string query_id =
          require_field(doc, "query_id", "ground truth").get<std::string>();
      const json& rel = require_field(doc, "relevant", "ground truth");
      if (!rel.is_object()) {
        throw Error(errc::parse, query_id + ": 'relevant' must be an object");
      }
      for (const auto& [item, grade] : rel.items()) {
        gt.add(query_id, item, grade.get<double>());
      }
    } catch (const json::exception& e) {
      throw Error(errc::parse, std::string("ground truth: ") + e.what());
    }
  }
  gt.validate();
  return gt;
}

}  // namespace sis
