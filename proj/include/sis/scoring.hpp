#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <string>

#include "sis/error.hpp"
#include "sis/features.hpp"

namespace sis {

enum class Metric { l2, cosine };

enum class ScoreKind { similarity, distance };

inline const char* to_string(ScoreKind kind) {
  return kind == ScoreKind::similarity ? "similarity" : "distance";
}

inline const char* to_string(Metric metric) {
  return metric == Metric::l2 ? "l2" : "cosine";
}

struct ScoreValue {
  double value = 0.0;
  ScoreKind kind = ScoreKind::distance;
};

inline double squared_l2(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

// L2 distance or cosine similarity between equal-dimension dense vectors.
inline ScoreValue score_dense(std::span<const double> a,
                              std::span<const double> b, Metric metric) {
  if (a.size() != b.size()) {
    throw Error(errc::dimension_mismatch,
                "dense dimensions differ: " + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()));
  }
  if (metric == Metric::l2) {
    return {std::sqrt(squared_l2(a, b)), ScoreKind::distance};
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) {
    throw Error(errc::zero_vector, "cosine similarity undefined for zero vector");
  }
  return {dot / (std::sqrt(na) * std::sqrt(nb)), ScoreKind::similarity};
}

// Ratio-test matcher over variable-size descriptor sets: counts query
// descriptors whose nearest neighbor in the candidate set is closer than
// ratio_threshold times the second-nearest. Candidate sets with fewer than
// two descriptors degenerate to exact-match counting (single descriptor) or
// zero (empty set). Matching is query-sided and intentionally asymmetric.
inline double score_keypoints(const KeypointFeature& query,
                              const KeypointFeature& candidate,
                              double ratio_threshold = 0.8) {
  if (ratio_threshold <= 0.0 || ratio_threshold > 1.0) {
    throw Error(errc::range, "ratio_threshold must be in (0, 1]");
  }
  if (candidate.descriptors.empty() || query.descriptors.empty()) return 0.0;

  const std::size_t dim = query.descriptors.front().size();
  for (const auto& desc : candidate.descriptors) {
    if (desc.size() != dim) {
      throw Error(errc::dimension_mismatch,
                  "descriptor dimensions differ: " + std::to_string(dim) + " vs " +
                      std::to_string(desc.size()));
    }
  }

  std::size_t matches = 0;
  if (candidate.descriptors.size() == 1) {
    for (const auto& q : query.descriptors) {
      if (q.size() != dim) {
        throw Error(errc::dimension_mismatch, "query descriptor dimension differs");
      }
      if (squared_l2(q, candidate.descriptors.front()) == 0.0) ++matches;
    }
    return static_cast<double>(matches);
  }

  for (const auto& q : query.descriptors) {
    if (q.size() != dim) {
      throw Error(errc::dimension_mismatch, "query descriptor dimension differs");
    }
    double best = std::numeric_limits<double>::infinity();
    double second = std::numeric_limits<double>::infinity();
    for (const auto& x : candidate.descriptors) {
      const double d = squared_l2(q, x);
      if (d < best) {
        second = best;
        best = d;
      } else if (d < second) {
        second = d;
      }
    }
    // Ratio test on true distances; compare squares to avoid the sqrt.
    if (best < ratio_threshold * ratio_threshold * second) ++matches;
  }
  return static_cast<double>(matches);
}

// Confidence adjustment: similarity scores scale with the block confidence,
// distances scale against it.
inline double adjust_score(double score, double confidence, ScoreKind kind) {
  if (!(confidence > 0.0)) {
    throw Error(errc::range, "adjust_score requires confidence > 0");
  }
  return kind == ScoreKind::similarity ? score * confidence : score / confidence;
}

struct ScorerConfig {
  Metric metric = Metric::l2;       // dense payloads
  double ratio_threshold = 0.8;     // keypoint payloads

  std::string detector_name(bool dense) const {
    if (dense) {
      return std::string("dense-") + sis::to_string(metric);
    }
    return "keypoints-ratio";
  }
};

// Scores a query feature against a candidate of the same payload kind.
inline ScoreValue score_features(const FeatureRecord& query,
                                 const FeatureRecord& candidate,
                                 const ScorerConfig& config) {
  if (query.is_dense() != candidate.is_dense()) {
    throw Error(errc::payload_kind,
                "payload kinds differ between '" + query.item_id + "' and '" +
                    candidate.item_id + "'");
  }
  if (query.is_dense()) {
    return score_dense(query.dense().values, candidate.dense().values,
                       config.metric);
  }
  return {score_keypoints(query.keypoints(), candidate.keypoints(),
                          config.ratio_threshold),
          ScoreKind::similarity};
}

}  // namespace sis
