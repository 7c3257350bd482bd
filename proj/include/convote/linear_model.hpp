#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "convote/features.hpp"

namespace convote {

struct LabeledVector {
  FeatureVector features;
  int label = 1;  // +1 or -1
};

struct TrainingMeta {
  std::uint64_t seed = 0;
  int epochs = 0;
  // Dual objective recorded once per pass; non-increasing by construction.
  std::vector<double> objective_trace;
  double final_primal_objective = 0.0;
};

struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;
  double regularization_c = 1.0;
  TrainingMeta training_meta;

  double decision_value(const FeatureVector& v) const;
  int predict(const FeatureVector& v) const;  // sign of decision value, 0 -> +1

  void save(const std::filesystem::path& path) const;
  static LinearModel load(const std::filesystem::path& path);
};

// Minimizes (1/2)||w||^2 + C * sum max(0, 1 - y_i (w.x_i + b)) with an
// unregularized bias, via pairwise coordinate ascent on the dual.
// Deterministic: the pair selection is maximal-violation with lowest-index
// tie-breaking, so the seed only gets recorded in training_meta.
LinearModel train_linear(const std::vector<LabeledVector>& examples,
                         std::size_t dim, double c, std::uint64_t seed);

double primal_objective(const LinearModel& model,
                        const std::vector<LabeledVector>& examples);

}  // namespace convote
