#pragma once

#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "sis/error.hpp"
#include "sis/io.hpp"

namespace sis {

struct DenseFeature {
  std::vector<double> values;

  bool operator==(const DenseFeature&) const = default;
};

// Variable-size descriptor set; the count may differ per item, only the
// descriptor dimension is shared across a dataset.
struct KeypointFeature {
  std::vector<std::vector<double>> descriptors;

  bool operator==(const KeypointFeature&) const = default;
};

struct FeatureRecord {
  std::string item_id;
  std::variant<DenseFeature, KeypointFeature> payload;

  bool is_dense() const { return std::holds_alternative<DenseFeature>(payload); }
  const DenseFeature& dense() const { return std::get<DenseFeature>(payload); }
  const KeypointFeature& keypoints() const {
    return std::get<KeypointFeature>(payload);
  }

  bool operator==(const FeatureRecord&) const = default;
};

// Read-only lookup over feature records. Enforces unique ids and, per
// payload kind, a single dimension across the whole store.
class FeatureStore {
public:
  FeatureStore() = default;

  static FeatureStore from_records(std::vector<FeatureRecord> records) {
    FeatureStore store;
    store.records_ = std::move(records);
    store.by_id_.reserve(store.records_.size());
    std::size_t dense_dim = 0;
    std::size_t descriptor_dim = 0;
    for (std::size_t i = 0; i < store.records_.size(); ++i) {
      const FeatureRecord& rec = store.records_[i];
      if (!store.by_id_.emplace(rec.item_id, i).second) {
        throw Error(errc::duplicate_item,
                    "duplicate feature record '" + rec.item_id + "'");
      }
      if (rec.is_dense()) {
        const std::size_t dim = rec.dense().values.size();
        if (dim == 0) {
          throw Error(errc::dimension_mismatch,
                      rec.item_id + ": empty dense vector");
        }
        if (dense_dim == 0) dense_dim = dim;
        if (dim != dense_dim) {
          throw Error(errc::dimension_mismatch,
                      rec.item_id + ": dense dimension " + std::to_string(dim) +
                          " != " + std::to_string(dense_dim));
        }
      } else {
        for (const auto& desc : rec.keypoints().descriptors) {
          if (desc.empty()) {
            throw Error(errc::dimension_mismatch,
                        rec.item_id + ": empty descriptor");
          }
          if (descriptor_dim == 0) descriptor_dim = desc.size();
          if (desc.size() != descriptor_dim) {
            throw Error(errc::dimension_mismatch,
                        rec.item_id + ": descriptor dimension " +
                            std::to_string(desc.size()) + " != " +
                            std::to_string(descriptor_dim));
          }
        }
      }
    }
    store.dense_dim_ = dense_dim;
    store.descriptor_dim_ = descriptor_dim;
    return store;
  }

  std::size_t size() const { return records_.size(); }
  const std::vector<FeatureRecord>& records() const { return records_; }
  std::size_t dense_dim() const { return dense_dim_; }
  std::size_t descriptor_dim() const { return descriptor_dim_; }

  const FeatureRecord* find(const std::string& item_id) const {
    auto it = by_id_.find(item_id);
    return it == by_id_.end() ? nullptr : &records_[it->second];
  }

  const FeatureRecord& at(const std::string& item_id) const {
    const FeatureRecord* rec = find(item_id);
    if (!rec) {
      throw Error(errc::missing_feature, "no feature for item '" + item_id + "'");
    }
    return *rec;
  }

  bool all_dense() const {
    for (const auto& rec : records_) {
      if (!rec.is_dense()) return false;
    }
    return true;
  }

private:
  std::vector<FeatureRecord> records_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::size_t dense_dim_ = 0;
  std::size_t descriptor_dim_ = 0;
};

// --- feature records (one JSON object per line) --------------------------
//
// {"item_id":"a","kind":"dense","values":[0.1,0.2]}
// {"item_id":"b","kind":"keypoints","descriptors":[[0.1,0.2],[0.3,0.4]]}

inline json feature_to_json(const FeatureRecord& rec) {
  json doc;
  doc["item_id"] = rec.item_id;
  if (rec.is_dense()) {
    doc["kind"] = "dense";
    doc["values"] = rec.dense().values;
  } else {
    doc["kind"] = "keypoints";
    doc["descriptors"] = rec.keypoints().descriptors;
  }
  return doc;
}

inline FeatureRecord feature_from_json(const json& doc) {
  FeatureRecord rec;
  try {
    rec.item_id = require_field(doc, "item_id", "feature").get<std::string>();
    const std::string kind = require_field(doc, "kind", "feature").get<std::string>();
    if (kind == "dense") {
      rec.payload =
          DenseFeature{require_field(doc, "values", "feature").get<std::vector<double>>()};
    } else if (kind == "keypoints") {
      rec.payload = KeypointFeature{require_field(doc, "descriptors", "feature")
                                        .get<std::vector<std::vector<double>>>()};
    } else {
      throw Error(errc::parse, rec.item_id + ": unknown payload kind '" + kind + "'");
    }
  } catch (const json::exception& e) {
    throw Error(errc::parse, std::string("feature: ") + e.what());
  }
  return rec;
}

inline FeatureStore load_feature_store(const std::string& text) {
  std::vector<FeatureRecord> records;
  for (const json& doc : parse_jsonl(text, "features")) {
    records.push_back(feature_from_json(doc));
  }
  return FeatureStore::from_records(std::move(records));
}

inline std::string save_features(const std::vector<FeatureRecord>& records) {
  std::vector<json> docs;
  docs.reserve(records.size());
  for (const auto& rec : records) docs.push_back(feature_to_json(rec));
  return join_jsonl(docs);
}

}  // namespace sis
