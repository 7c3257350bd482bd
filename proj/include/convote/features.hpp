#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "convote/corpus.hpp"

namespace convote {

// Lowercases and splits on maximal runs of non-alphanumeric characters.
std::vector<std::string> tokenize(std::string_view text);

class Vocabulary {
 public:
  Vocabulary() = default;

  // Indices are assigned in lexicographic term order.
  static Vocabulary from_token_lists(
      const std::vector<std::vector<std::string>>& token_lists);

  int index_of(const std::string& term) const {
    auto it = term_to_index_.find(term);
    return it == term_to_index_.end() ? -1 : it->second;
  }
  std::size_t size() const { return term_to_index_.size(); }

  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

 private:
  std::unordered_map<std::string, int> term_to_index_;
};

Vocabulary build_vocabulary(const std::vector<SpeechSegment>& train_segments);

// Sparse L2-normalized presence vector. All nonzero values are equal and the
// Euclidean norm is 1, except the all-zero vector for fully out-of-vocabulary
// input.
struct FeatureVector {
  std::vector<std::pair<int, double>> entries;  // sorted by index
  double norm = 0.0;
};

FeatureVector vectorize_presence(const std::vector<std::string>& tokens,
                                 const Vocabulary& vocab);

double dot(const FeatureVector& a, const FeatureVector& b);

}  // namespace convote
