#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "sis/error.hpp"
#include "sis/io.hpp"

namespace sis {

inline constexpr std::uint32_t kTaxonomyFormatVersion = 1;

// Surjective map from child-class ids onto Big-Class ids. Immutable after
// construction; validate() enforces totality and surjectivity.
struct BigClassMap {
  std::size_t num_child = 0;
  std::size_t num_big = 0;
  std::vector<std::uint32_t> assignment;  // child id -> Big-Class id

  void validate() const {
    if (num_child == 0 || num_big == 0) {
      throw Error(errc::range, "taxonomy requires num_child and num_big > 0");
    }
    if (assignment.size() != num_child) {
      throw Error(errc::length_mismatch,
                  "assignment length " + std::to_string(assignment.size()) +
                      " != num_child " + std::to_string(num_child));
    }
    std::vector<bool> used(num_big, false);
    for (std::size_t child = 0; child < assignment.size(); ++child) {
      const std::uint32_t big = assignment[child];
      if (big >= num_big) {
        throw Error(errc::range, "child " + std::to_string(child) +
                                     " maps to Big Class " + std::to_string(big) +
                                     " >= num_big " + std::to_string(num_big));
      }
      used[big] = true;
    }
    for (std::size_t big = 0; big < num_big; ++big) {
      if (!used[big]) {
        throw Error(errc::unused_big_class,
                    "Big Class " + std::to_string(big) + " has no child classes");
      }
    }
  }

  // Children per Big Class.
  std::vector<std::size_t> children_per_big() const {
    std::vector<std::size_t> counts(num_big, 0);
    for (std::uint32_t big : assignment) counts[big]++;
    return counts;
  }
};

enum class ProbSpace { child, big };

inline const char* to_string(ProbSpace space) {
  return space == ProbSpace::child ? "child" : "big";
}

// Per-item confidence vector over child classes or Big Classes. Values are
// unitless nonnegative confidences; they need not sum to one unless the
// caller asks for strict validation.
struct ClassProbabilities {
  std::string item_id;
  ProbSpace space = ProbSpace::child;
  std::vector<double> values;
};

inline void validate_probabilities(const ClassProbabilities& probs,
                                   std::size_t expected_length,
                                   bool require_normalized = false) {
  if (probs.values.size() != expected_length) {
    throw Error(errc::length_mismatch,
                probs.item_id + ": vector length " +
                    std::to_string(probs.values.size()) + " != expected " +
                    std::to_string(expected_length));
  }
  double sum = 0.0;
  for (double v : probs.values) {
    if (!(v >= 0.0)) {
      throw Error(errc::negative_value,
                  probs.item_id + ": negative or NaN confidence");
    }
    sum += v;
  }
  if (require_normalized && std::abs(sum - 1.0) > 1e-6) {
    throw Error(errc::not_normalized,
                probs.item_id + ": confidences sum to " + std::to_string(sum));
  }
}

// Big-Class confidence: sum of the item's child confidences within each
// Big Class, accumulated in ascending child-id order for determinism.
inline ClassProbabilities aggregate(const ClassProbabilities& probs,
                                    const BigClassMap& map) {
  if (probs.space != ProbSpace::child) {
    throw Error(errc::space_mismatch,
                probs.item_id + ": aggregate expects child-space probabilities");
  }
  if (probs.values.size() != map.num_child) {
    throw Error(errc::length_mismatch,
                probs.item_id + ": vector length " +
                    std::to_string(probs.values.size()) + " != num_child " +
                    std::to_string(map.num_child));
  }
  ClassProbabilities out;
  out.item_id = probs.item_id;
  out.space = ProbSpace::big;
  out.values.assign(map.num_big, 0.0);
  for (std::size_t child = 0; child < probs.values.size(); ++child) {
    out.values[map.assignment[child]] += probs.values[child];
  }
  return out;
}

// Converts to big space if necessary; big-space input passes through.
inline ClassProbabilities to_big_space(const ClassProbabilities& probs,
                                       const BigClassMap& map) {
  if (probs.space == ProbSpace::big) return probs;
  return aggregate(probs, map);
}

struct ScoredClass {
  std::uint32_t id = 0;
  double confidence = 0.0;

  bool operator==(const ScoredClass&) const = default;
};

// Top-k ids by confidence, descending; ties broken by ascending id so the
// selection is deterministic.
inline std::vector<ScoredClass> top_k(std::span<const double> values,
                                      std::size_t k) {
  if (k == 0 || k > values.size()) {
    throw Error(errc::range, "top_k: k = " + std::to_string(k) +
                                 " out of range [1, " +
                                 std::to_string(values.size()) + "]");
  }
  std::vector<std::uint32_t> ids(values.size());
  std::iota(ids.begin(), ids.end(), 0u);
  const auto better = [&](std::uint32_t a, std::uint32_t b) {
    if (values[a] != values[b]) return values[a] > values[b];
    return a < b;
  };
  std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(k),
                    ids.end(), better);
  std::vector<ScoredClass> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    out.push_back({ids[i], values[ids[i]]});
  }
  return out;
}

inline std::vector<ScoredClass> top_k(const ClassProbabilities& probs,
                                      std::size_t k) {
  if (probs.space != ProbSpace::big) {
    throw Error(errc::space_mismatch,
                probs.item_id + ": top_k expects big-space probabilities");
  }
  return top_k(std::span<const double>(probs.values), k);
}

// --- taxonomy document -------------------------------------------------
//
// {"format_version":1,"num_child":3,"num_big":2,"assignment":[0,0,1]}

inline BigClassMap load_taxonomy(const std::string& document) {
  const json doc = parse_json(document, "taxonomy");
  if (!doc.is_object()) throw Error(errc::parse, "taxonomy: not a JSON object");
  const json& version = require_field(doc, "format_version", "taxonomy");
  if (!version.is_number_unsigned() ||
      version.get<std::uint32_t>() != kTaxonomyFormatVersion) {
    throw Error(errc::format_version,
                "taxonomy: unsupported format_version " + version.dump());
  }
  BigClassMap map;
  try {
    map.num_child = require_field(doc, "num_child", "taxonomy").get<std::size_t>();
    map.num_big = require_field(doc, "num_big", "taxonomy").get<std::size_t>();
    map.assignment =
        require_field(doc, "assignment", "taxonomy").get<std::vector<std::uint32_t>>();
  } catch (const json::exception& e) {
    throw Error(errc::parse, std::string("taxonomy: ") + e.what());
  }
  map.validate();
  return map;
}

inline std::string save_taxonomy(const BigClassMap& map) {
  map.validate();
  json doc;
  doc["format_version"] = kTaxonomyFormatVersion;
  doc["num_child"] = map.num_child;
  doc["num_big"] = map.num_big;
  doc["assignment"] = map.assignment;
  return doc.dump();
}

// --- class-probability records (one JSON object per line) --------------

inline json probabilities_to_json(const ClassProbabilities& probs) {
  json doc;
  doc["item_id"] = probs.item_id;
  doc["space"] = to_string(probs.space);
  doc["values"] = probs.values;
  return doc;
}

inline ClassProbabilities probabilities_from_json(const json& doc) {
  ClassProbabilities probs;
  try {
    probs.item_id = require_field(doc, "item_id", "probabilities").get<std::string>();
    const std::string space =
        require_field(doc, "space", "probabilities").get<std::string>();
    if (space == "child") {
      probs.space = ProbSpace::child;
    } else if (space == "big") {
      probs.space = ProbSpace::big;
    } else {
      throw Error(errc::parse, probs.item_id + ": unknown space '" + space + "'");
    }
    probs.values =
        require_field(doc, "values", "probabilities").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw Error(errc::parse, std::string("probabilities: ") + e.what());
  }
  return probs;
}

inline std::vector<ClassProbabilities> load_probabilities(const std::string& text) {
  std::vector<ClassProbabilities> out;
  for (const json& doc : parse_jsonl(text, "probabilities")) {
    out.push_back(probabilities_from_json(doc));
  }
  return out;
}

inline std::string save_probabilities(const std::vector<ClassProbabilities>& records) {
  std::vector<json> docs;
  docs.reserve(records.size());
  for (const auto& rec : records) docs.push_back(probabilities_to_json(rec));
  return join_jsonl(docs);
}

}  // namespace sis
