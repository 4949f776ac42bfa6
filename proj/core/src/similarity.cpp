#include "hiertask/similarity.hpp"

#include <cmath>

#include "hiertask/errors.hpp"

namespace hiertask {

double cosine(const FeatureVector& a, const FeatureVector& b) {
  if (a.dim != b.dim) {
    throw ContractError("cosine: dimension mismatch (" + std::to_string(a.dim) +
                        " vs " + std::to_string(b.dim) + ")");
  }
  if (a.is_zero() || b.is_zero()) return 0.0;

  double dot = 0.0;
  const auto& small = a.entries.size() <= b.entries.size() ? a : b;
  const auto& large = a.entries.size() <= b.entries.size() ? b : a;
  for (const auto& [d, w] : small.entries) {
    auto it = large.entries.find(d);
    if (it != large.entries.end()) dot += w * it->second;
  }
  const double na = a.l2_norm();
  const double nb = b.l2_norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (na * nb);
}

SimilarityMatrix pairwise_matrix(std::span<const FeatureVector> vectors) {
  const std::size_t n = vectors.size();
  SimilarityMatrix m{n, n, std::vector<double>(n * n, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double s = cosine(vectors[i], vectors[j]);
      m.at(i, j) = s;
      m.at(j, i) = s;
    }
  }
  return m;
}

SimilarityMatrix alignment_matrix(std::span<const FeatureVector> subtasks,
                                  std::span<const FeatureVector> skills) {
  SimilarityMatrix m{subtasks.size(), skills.size(),
                     std::vector<double>(subtasks.size() * skills.size(), 0.0)};
  for (std::size_t i = 0; i < subtasks.size(); ++i) {
    for (std::size_t j = 0; j < skills.size(); ++j) {
      m.at(i, j) = cosine(subtasks[i], skills[j]);
    }
  }
  return m;
}

DecisionMatrix decide(const SimilarityMatrix& matrix, double threshold) {
  DecisionMatrix d{matrix.rows, matrix.cols,
                   std::vector<std::uint8_t>(matrix.values.size(), 0)};
  for (std::size_t k = 0; k < matrix.values.size(); ++k) {
    d.flags[k] = matrix.values[k] < threshold ? 1 : 0;
  }
  return d;
}

AlignmentReport report(
    std::span<const FeatureVector> subtasks,
    std::span<const std::pair<std::string, FeatureVector>> skills,
    double threshold) {
  if (skills.empty()) {
    throw ConfigError("report: skill registry is empty");
  }
  AlignmentReport rep;
  rep.threshold = threshold;
  rep.rows.reserve(subtasks.size());
  for (const auto& sub : subtasks) {
    AlignmentRow row;
    row.best_score = -1.0;
    for (const auto& [id, vec] : skills) {
      const double s = cosine(sub, vec);
      if (s > row.best_score ||
          (s == row.best_score && id < row.best_skill_id)) {
        row.best_score = s;
        row.best_skill_id = id;
      }
    }
    row.needs_decomposition = row.best_score < threshold;
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

}  // namespace hiertask
