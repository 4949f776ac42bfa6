#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hiertask/vectorizer.hpp"

namespace hiertask {

/// Dense row-major n x m matrix of cosine similarities.
struct SimilarityMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
  double& at(std::size_t i, std::size_t j) { return values[i * cols + j]; }
};

/// Boolean matrix; flags[i][j] is true exactly when the similarity value was
/// strictly below the threshold.
struct DecisionMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> flags;

  bool at(std::size_t i, std::size_t j) const {
    return flags[i * cols + j] != 0;
  }
};

/// Per-subtask best skill match.
struct AlignmentRow {
  std::string best_skill_id;
  double best_score = 0.0;
  bool needs_decomposition = true;
};

struct AlignmentReport {
  double threshold = 0.0;
  std::vector<AlignmentRow> rows;
};

/// Cosine similarity (a.b)/(|a||b|). Defined as 0.0 when either vector is
/// the zero vector. Throws ContractError when dimensions differ.
double cosine(const FeatureVector& a, const FeatureVector& b);

/// n x n matrix of cosine(v_i, v_j). The upper triangle is computed once and
/// mirrored, so the result is symmetric bit-for-bit.
SimilarityMatrix pairwise_matrix(std::span<const FeatureVector> vectors);

/// n x m matrix of cosine(subtask_i, skill_j).
SimilarityMatrix alignment_matrix(std::span<const FeatureVector> subtasks,
                                  std::span<const FeatureVector> skills);

/// flags[i][j] = values[i][j] < threshold (strict).
DecisionMatrix decide(const SimilarityMatrix& matrix, double threshold);

/// Row-maximum alignment report: per subtask, the argmax skill (ties broken
/// by lowest skill id) and whether the best score falls below the threshold.
/// Throws ConfigError when `skills` is empty.
AlignmentReport report(
    std::span<const FeatureVector> subtasks,
    std::span<const std::pair<std::string, FeatureVector>> skills,
    double threshold);

}  // namespace hiertask
