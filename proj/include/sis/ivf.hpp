#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "sis/error.hpp"
#include "sis/features.hpp"
#include "sis/io.hpp"
#include "sis/retrieval.hpp"
#include "sis/rng.hpp"
#include "sis/scoring.hpp"

namespace sis {

inline constexpr std::uint32_t kIvfFormatVersion = 1;
inline constexpr std::size_t kKmeansDefaultIters = 25;
inline constexpr double kKmeansShiftTolerance = 1e-4;

namespace detail {

inline std::size_t nearest_centroid(std::span<const double> point,
                                    const std::vector<std::vector<double>>& centroids) {
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = squared_l2(point, centroids[c]);
    if (d < best_dist) {  // strict: ties stay with the smaller id
      best_dist = d;
      best = c;
    }
  }
  return best;
}

}  // namespace detail

// Lloyd k-means with k-means++ seeding. Deterministic given the seed: all
// randomness is drawn through sis::Rng. Empty clusters keep their previous
// centroid. Stops at max_iters or when the largest relative centroid shift
// drops below kKmeansShiftTolerance.
inline std::vector<std::vector<double>> kmeans(
    const std::vector<std::vector<double>>& vectors, std::size_t k,
    std::size_t max_iters, std::uint64_t seed) {
  if (vectors.empty()) throw Error(errc::empty_input, "kmeans: no input vectors");
  if (max_iters == 0) throw Error(errc::range, "kmeans: max_iters must be >= 1");
  const std::size_t dim = vectors.front().size();
  for (const auto& v : vectors) {
    if (v.size() != dim) {
      throw Error(errc::dimension_mismatch, "kmeans: ragged input vectors");
    }
  }
  {
    std::vector<std::vector<double>> sorted = vectors;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t distinct =
        static_cast<std::size_t>(std::unique(sorted.begin(), sorted.end()) -
                                 sorted.begin());
    if (k == 0 || k > distinct) {
      throw Error(errc::distinct_vectors,
                  "kmeans: k = " + std::to_string(k) + " exceeds " +
                      std::to_string(distinct) + " distinct vectors");
    }
  }

  Rng rng(seed);
  std::vector<std::vector<double>> centroids;
  centroids.reserve(k);

  // k-means++ seeding: D^2-weighted draws via explicit CDF inversion.
  centroids.push_back(vectors[rng.below(vectors.size())]);
  std::vector<double> dist2(vectors.size());
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    dist2[i] = squared_l2(vectors[i], centroids.front());
  }
  while (centroids.size() < k) {
    const double total = std::accumulate(dist2.begin(), dist2.end(), 0.0);
    std::size_t pick;
    if (total <= 0.0) {
      pick = rng.below(vectors.size());
    } else {
      const double target = rng.uniform01() * total;
      double run = 0.0;
      pick = vectors.size() - 1;
      for (std::size_t i = 0; i < vectors.size(); ++i) {
        run += dist2[i];
        if (run > target) {
          pick = i;
          break;
        }
      }
    }
    // A zero D^2 means the draw landed on an already-chosen centroid
    // (possible via rounding at the CDF tail); fall back to the farthest point.
    if (dist2[pick] == 0.0) {
      auto it = std::max_element(dist2.begin(), dist2.end());
      pick = static_cast<std::size_t>(it - dist2.begin());
    }
    centroids.push_back(vectors[pick]);
    for (std::size_t i = 0; i < vectors.size(); ++i) {
      dist2[i] = std::min(dist2[i], squared_l2(vectors[i], centroids.back()));
    }
  }

  std::vector<std::size_t> assignment(vectors.size(), 0);
  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    for (std::size_t i = 0; i < vectors.size(); ++i) {
      assignment[i] = detail::nearest_centroid(vectors[i], centroids);
    }
    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < vectors.size(); ++i) {
      counts[assignment[i]]++;
      for (std::size_t d = 0; d < dim; ++d) sums[assignment[i]][d] += vectors[i][d];
    }
    double max_shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      std::vector<double> updated(dim);
      for (std::size_t d = 0; d < dim; ++d) {
        updated[d] = sums[c][d] / static_cast<double>(counts[c]);
      }
      const double shift = std::sqrt(squared_l2(updated, centroids[c]));
      double norm2 = 0.0;
      for (double v : updated) norm2 += v * v;
      max_shift = std::max(max_shift, shift / (std::sqrt(norm2) + 1e-12));
      centroids[c] = std::move(updated);
    }
    if (max_shift <= kKmeansShiftTolerance) break;
  }
  return centroids;
}

// Inverted-file index over dense features: k-means cells as partitions.
struct IvfIndex {
  std::size_t nlist = 0;        // b_total
  std::uint64_t seed = 0;       // training seed
  std::vector<std::vector<double>> centroids;
  std::vector<std::vector<std::string>> cells;  // item ids, insertion order

  bool operator==(const IvfIndex&) const = default;

  std::size_t item_count() const {
    std::size_t n = 0;
    for (const auto& cell : cells) n += cell.size();
    return n;
  }

  void validate() const {
    if (nlist == 0) throw Error(errc::range, "ivf index has no cells");
    if (centroids.size() != nlist || cells.size() != nlist) {
      throw Error(errc::corrupt, "ivf index cell/centroid count mismatch");
    }
    const std::size_t dim = centroids.front().size();
    for (const auto& c : centroids) {
      if (c.size() != dim) throw Error(errc::corrupt, "ivf centroid dims differ");
    }
  }
};

// Assigns every dense feature to its nearest centroid (ties to the smaller
// centroid id). Keypoint payloads are unsupported here.
inline IvfIndex ivf_build(const FeatureStore& features, std::size_t nlist,
                          std::uint64_t seed,
                          std::size_t max_iters = kKmeansDefaultIters) {
  if (features.size() == 0) throw Error(errc::empty_input, "ivf_build: empty store");
  if (!features.all_dense()) {
    throw Error(errc::unsupported_payload,
                "ivf_build supports fixed-size dense features only");
  }
  std::vector<std::vector<double>> vectors;
  vectors.reserve(features.size());
  for (const FeatureRecord& rec : features.records()) {
    vectors.push_back(rec.dense().values);
  }

  IvfIndex index;
  index.nlist = nlist;
  index.seed = seed;
  index.centroids = kmeans(vectors, nlist, max_iters, seed);
  index.cells.assign(nlist, {});
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    const std::size_t cell = detail::nearest_centroid(vectors[i], index.centroids);
    index.cells[cell].push_back(features.records()[i].item_id);
  }
  index.validate();
  return index;
}

struct IvfQueryResult {
  RankedResult ranking;
  std::vector<std::string> scanned;  // scope member ids, ascending

  std::size_t s_real() const { return scanned.size(); }
};

// Scans the union of the nprobe non-empty cells nearest to the query by
// centroid L2 distance. Empty cells are never probed.
inline IvfQueryResult ivf_query(const FeatureRecord& query,
                                const IvfIndex& index,
                                const FeatureStore& features,
                                std::size_t nprobe, Metric metric,
                                std::size_t top_k = 0) {
  if (nprobe == 0 || nprobe > index.nlist) {
    throw Error(errc::range, "nprobe = " + std::to_string(nprobe) +
                                 " out of range [1, " +
                                 std::to_string(index.nlist) + "]");
  }
  if (!query.is_dense()) {
    throw Error(errc::unsupported_payload, "ivf_query requires a dense query");
  }

  std::vector<std::size_t> order;
  order.reserve(index.nlist);
  for (std::size_t c = 0; c < index.nlist; ++c) {
    if (!index.cells[c].empty()) order.push_back(c);
  }
  std::vector<double> dist(index.nlist, 0.0);
  for (std::size_t c : order) {
    dist[c] = squared_l2(query.dense().values, index.centroids[c]);
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (dist[a] != dist[b]) return dist[a] < dist[b];
    return a < b;
  });
  if (order.size() > nprobe) order.resize(nprobe);

  IvfQueryResult result;
  for (std::size_t c : order) {
    result.scanned.insert(result.scanned.end(), index.cells[c].begin(),
                          index.cells[c].end());
  }
  std::sort(result.scanned.begin(), result.scanned.end());

  ScorerConfig config;
  config.metric = metric;
  result.ranking.query_id = query.item_id;
  result.ranking.entries.reserve(result.scanned.size());
  bool kind_set = false;
  for (const std::string& item_id : result.scanned) {
    const ScoreValue scored = score_features(query, features.at(item_id), config);
    if (!kind_set) {
      result.ranking.score_kind = scored.kind;
      kind_set = true;
    }
    result.ranking.entries.push_back({item_id, scored.value, {}, {}});
  }
  detail::sort_entries(result.ranking.entries, result.ranking.score_kind);
  detail::truncate(result.ranking.entries, top_k);
  return result;
}

// --- ivf index document ---------------------------------------------------

inline std::string save_ivf_index(const IvfIndex& index) {
  index.validate();
  json doc;
  doc["format_version"] = kIvfFormatVersion;
  doc["nlist"] = index.nlist;
  doc["seed"] = index.seed;
  doc["centroids"] = index.centroids;
  doc["cells"] = index.cells;
  return doc.dump();
}

inline IvfIndex load_ivf_index(const std::string& document) {
  const json doc = parse_json(document, "ivf index");
  if (!doc.is_object()) throw Error(errc::parse, "ivf index: not a JSON object");
  const json& version = require_field(doc, "format_version", "ivf index");
  if (!version.is_number_unsigned() ||
      version.get<std::uint32_t>() != kIvfFormatVersion) {
    throw Error(errc::format_version,
                "ivf index: unsupported format_version " + version.dump());
  }
  IvfIndex index;
  try {
    index.nlist = require_field(doc, "nlist", "ivf index").get<std::size_t>();
    index.seed = require_field(doc, "seed", "ivf index").get<std::uint64_t>();
    index.centroids = require_field(doc, "centroids", "ivf index")
                          .get<std::vector<std::vector<double>>>();
    index.cells = require_field(doc, "cells", "ivf index")
                      .get<std::vector<std::vector<std::string>>>();
  } catch (const json::exception& e) {
    throw Error(errc::parse, std::string("ivf index: ") + e.what());
  }
  index.validate();
  return index;
}

}  // namespace sis
