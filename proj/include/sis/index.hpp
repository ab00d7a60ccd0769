#pragma once

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "sis/error.hpp"
#include "sis/io.hpp"
#include "sis/taxonomy.hpp"

namespace sis {

inline constexpr std::uint32_t kIndexFormatVersion = 1;

struct Posting {
  std::string item_id;
  double confidence = 0.0;

  bool operator==(const Posting&) const = default;
};

// The Semantic Indexing Structure: one posting block per Big Class, each
// holding the (item, confidence) pairs of every item whose top-alpha Big
// Classes include that block. Immutable once built; reads are thread-safe.
struct SisIndex {
  std::size_t num_blocks = 0;  // N_p
  std::size_t alpha = 0;       // blocks each item is recorded in
  std::size_t item_count = 0;  // N_d
  // Per block, sorted by confidence descending, then item_id ascending.
  std::vector<std::vector<Posting>> blocks;

  bool operator==(const SisIndex&) const = default;

  std::size_t total_postings() const {
    std::size_t n = 0;
    for (const auto& block : blocks) n += block.size();
    return n;
  }

  void validate() const {
    if (num_blocks == 0) throw Error(errc::range, "index has no blocks");
    if (blocks.size() != num_blocks) {
      throw Error(errc::corrupt, "index block count mismatch");
    }
    if (alpha == 0 || alpha > num_blocks) {
      throw Error(errc::corrupt, "index alpha out of range");
    }
    if (total_postings() != alpha * item_count) {
      throw Error(errc::corrupt,
                  "posting count " + std::to_string(total_postings()) +
                      " != alpha * item_count " +
                      std::to_string(alpha * item_count));
    }
    for (const auto& block : blocks) {
      std::unordered_set<std::string> seen;
      for (std::size_t i = 0; i < block.size(); ++i) {
        if (!seen.insert(block[i].item_id).second) {
          throw Error(errc::corrupt,
                      "duplicate item '" + block[i].item_id + "' in a block");
        }
        if (i > 0) {
          const Posting& prev = block[i - 1];
          const Posting& cur = block[i];
          const bool ordered = prev.confidence > cur.confidence ||
                               (prev.confidence == cur.confidence &&
                                prev.item_id < cur.item_id);
          if (!ordered) {
            throw Error(errc::corrupt, "block posting order violated");
          }
        }
      }
    }
  }
};

// Builds the index by posting every item to its top-alpha blocks with the
// per-block confidence. alpha greater than the block count is clamped (with
// a warning when a sink is given).
inline SisIndex build_index(const std::vector<ClassProbabilities>& items,
                            std::size_t alpha,
                            std::ostream* warnings = nullptr) {
  if (items.empty()) throw Error(errc::empty_input, "build_index: no items");
  if (alpha == 0) throw Error(errc::range, "build_index: alpha must be >= 1");

  const std::size_t num_big = items.front().values.size();
  if (num_big == 0) {
    throw Error(errc::length_mismatch, "build_index: empty probability vectors");
  }
  if (alpha > num_big) {
    if (warnings) {
      *warnings << "warning: alpha " << alpha << " exceeds block count "
                << num_big << "; clamping to " << num_big << "\n";
    }
    alpha = num_big;
  }

  SisIndex index;
  index.num_blocks = num_big;
  index.alpha = alpha;
  index.item_count = items.size();
  index.blocks.assign(num_big, {});

  std::unordered_set<std::string> seen;
  seen.reserve(items.size());
  for (const ClassProbabilities& item : items) {
    if (item.space != ProbSpace::big) {
      throw Error(errc::space_mismatch,
                  item.item_id + ": build_index expects big-space probabilities");
    }
    if (item.values.size() != num_big) {
      throw Error(errc::length_mismatch,
                  item.item_id + ": vector length " +
                      std::to_string(item.values.size()) + " != " +
                      std::to_string(num_big));
    }
    if (!seen.insert(item.item_id).second) {
      throw Error(errc::duplicate_item, "duplicate item id '" + item.item_id + "'");
    }
    for (const ScoredClass& top : top_k(item, alpha)) {
      index.blocks[top.id].push_back({item.item_id, top.confidence});
    }
  }

  for (auto& block : index.blocks) {
    std::sort(block.begin(), block.end(), [](const Posting& a, const Posting& b) {
      if (a.confidence != b.confidence) return a.confidence > b.confidence;
      return a.item_id < b.item_id;
    });
  }
  return index;
}

struct ScopeMember {
  std::string item_id;
  // Highest query-side confidence among the selected blocks containing the
  // item; feeds the optional score adjustment.
  double confidence = 0.0;

  bool operator==(const ScopeMember&) const = default;
};

// Deduplicated union of the selected blocks, with per-member provenance
// confidence. Members are kept sorted by item id.
struct Scope {
  std::string query_id;
  std::vector<ScoredClass> selected;  // beta blocks with query confidences
  std::vector<ScopeMember> members;

  std::size_t s_real() const { return members.size(); }

  bool contains(const std::string& item_id) const {
    auto it = std::lower_bound(
        members.begin(), members.end(), item_id,
        [](const ScopeMember& m, const std::string& id) { return m.item_id < id; });
    return it != members.end() && it->item_id == item_id;
  }

  bool operator==(const Scope&) const = default;
};

inline Scope select_scope(const ClassProbabilities& query_probs,
                          std::size_t beta, const SisIndex& index) {
  if (beta == 0 || beta > index.num_blocks) {
    throw Error(errc::range, "beta = " + std::to_string(beta) +
                                 " out of range [1, " +
                                 std::to_string(index.num_blocks) + "]");
  }
  if (query_probs.space != ProbSpace::big) {
    throw Error(errc::space_mismatch,
                query_probs.item_id + ": select_scope expects big-space probabilities");
  }
  if (query_probs.values.size() != index.num_blocks) {
    throw Error(errc::length_mismatch,
                query_probs.item_id + ": vector length " +
                    std::to_string(query_probs.values.size()) + " != num_blocks " +
                    std::to_string(index.num_blocks));
  }

  Scope scope;
  scope.query_id = query_probs.item_id;
  scope.selected = top_k(query_probs, beta);

  std::unordered_map<std::string, double> best;
  for (const ScoredClass& pick : scope.selected) {
    for (const Posting& post : index.blocks[pick.id]) {
      auto [it, inserted] = best.emplace(post.item_id, pick.confidence);
      if (!inserted && pick.confidence > it->second) {
        it->second = pick.confidence;
      }
    }
  }
  scope.members.reserve(best.size());
  for (auto& [id, conf] : best) scope.members.push_back({id, conf});
  std::sort(scope.members.begin(), scope.members.end(),
            [](const ScopeMember& a, const ScopeMember& b) {
              return a.item_id < b.item_id;
            });
  return scope;
}

// Idealized expected scope size under an even distribution: beta/N_p * N_d.
inline double expected_scope(std::size_t n_items, std::size_t num_blocks,
                             std::size_t beta) {
  if (num_blocks == 0) throw Error(errc::range, "expected_scope: num_blocks = 0");
  return static_cast<double>(beta) * static_cast<double>(n_items) /
         static_cast<double>(num_blocks);
}

inline double scope_ratio(std::size_t s_real, std::size_t n_items) {
  if (n_items == 0) throw Error(errc::range, "scope_ratio: n_items = 0");
  if (s_real > n_items) {
    throw Error(errc::range, "scope_ratio: s_real " + std::to_string(s_real) +
                                 " > n_items " + std::to_string(n_items));
  }
  return static_cast<double>(s_real) / static_cast<double>(n_items);
}

// --- index document -----------------------------------------------------
//
// {"format_version":1,"num_blocks":3,"alpha":2,"item_count":1,
//  "blocks":[[["item",0.6]],[["item",0.3]],[]]}
// Confidences round-trip exactly (shortest representation).

inline std::string save_index(const SisIndex& index) {
  index.validate();
  json doc;
  doc["format_version"] = kIndexFormatVersion;
  doc["num_blocks"] = index.num_blocks;
  doc["alpha"] = index.alpha;
  doc["item_count"] = index.item_count;
  json blocks = json::array();
  for (const auto& block : index.blocks) {
    json entries = json::array();
    for (const Posting& post : block) {
      entries.push_back(json::array({post.item_id, post.confidence}));
    }
    blocks.push_back(std::move(entries));
  }
  doc["blocks"] = std::move(blocks);
  return doc.dump();
}

inline SisIndex load_index(const std::string& document) {
  const json doc = parse_json(document, "index");
  if (!doc.is_object()) throw Error(errc::parse, "index: not a JSON object");
  const json& version = require_field(doc, "format_version", "index");
  if (!version.is_number_unsigned() ||
      version.get<std::uint32_t>() != kIndexFormatVersion) {
    throw Error(errc::format_version,
                "index: unsupported format_version " + version.dump());
  }
  SisIndex index;
  try {
    index.num_blocks = require_field(doc, "num_blocks", "index").get<std::size_t>();
    index.alpha = require_field(doc, "alpha", "index").get<std::size_t>();
    index.item_count = require_field(doc, "item_count", "index").get<std::size_t>();
    const json& blocks = require_field(doc, "blocks", "index");
    if (!blocks.is_array()) throw Error(errc::parse, "index: blocks not an array");
    index.blocks.reserve(blocks.size());
    for (const json& block : blocks) {
      std::vector<Posting> postings;
      postings.reserve(block.size());
      for (const json& entry : block) {
        if (!entry.is_array() || entry.size() != 2) {
          throw Error(errc::parse, "index: posting entry must be [item_id, confidence]");
        }
        postings.push_back({entry[0].get<std::string>(), entry[1].get<double>()});
      }
      index.blocks.push_back(std::move(postings));
    }
  } catch (const json::exception& e) {
    throw Error(errc::parse, std::string("index: ") + e.what());
  }
  index.validate();
  return index;
}

// --- scope records (one JSON object per line) ----------------------------

inline json scope_to_json(const Scope& scope) {
  json doc;
  doc["query_id"] = scope.query_id;
  json selected = json::array();
  for (const ScoredClass& pick : scope.selected) {
    selected.push_back(json::array({pick.id, pick.confidence}));
  }
  doc["selected"] = std::move(selected);
  json members = json::array();
  for (const ScopeMember& member : scope.members) {
    members.push_back(json::array({member.item_id, member.confidence}));
  }
  doc["members"] = std::move(members);
  doc["s_real"] = scope.s_real();
  return doc;
}

inline Scope scope_from_json(const json& doc) {
  Scope scope;
  try {
    scope.query_id = require_field(doc, "query_id", "scope").get<std::string>();
    for (const json& entry : require_field(doc, "selected", "scope")) {
      scope.selected.push_back(
          {entry.at(0).get<std::uint32_t>(), entry.at(1).get<double>()});
    }
    for (const json& entry : require_field(doc, "members", "scope")) {
      scope.members.push_back(
          {entry.at(0).get<std::string>(), entry.at(1).get<double>()});
    }
  } catch (const json::exception& e) {
    throw Error(errc::parse, std::string("scope: ") + e.what());
  }
  return scope;
}

inline std::string save_scopes(const std::vector<Scope>& scopes) {
  std::vector<json> docs;
  docs.reserve(scopes.size());
  for (const Scope& scope : scopes) docs.push_back(scope_to_json(scope));
  return join_jsonl(docs);
}

inline std::vector<Scope> load_scopes(const std::string& text) {
  std::vector<Scope> out;
  for (const json& doc : parse_jsonl(text, "scopes")) {
    out.push_back(scope_from_json(doc));
  }
  return out;
}

}  // namespace sis
