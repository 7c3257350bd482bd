#include "convote/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "convote/errors.hpp"

namespace convote {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char ch : text) {
    if (std::isalnum(ch)) {
      current.push_back(static_cast<char>(std::tolower(ch)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

Vocabulary Vocabulary::from_token_lists(
    const std::vector<std::vector<std::string>>& token_lists) {
  std::set<std::string> terms;
  for (const auto& list : token_lists) terms.insert(list.begin(), list.end());
  Vocabulary vocab;
  int index = 0;
  for (const auto& term : terms) vocab.term_to_index_.emplace(term, index++);
  return vocab;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::vector<std::pair<int, std::string>> by_index;
  by_index.reserve(term_to_index_.size());
  for (const auto& [term, index] : term_to_index_) by_index.emplace_back(index, term);
  std::sort(by_index.begin(), by_index.end());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write vocabulary file: " + path.string());
  for (const auto& [index, term] : by_index) out << term << '\t' << index << '\n';
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read vocabulary file: " + path.string());
  Vocabulary vocab;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": expected term<TAB>index");
    vocab.term_to_index_.emplace(line.substr(0, tab),
                                 std::stoi(line.substr(tab + 1)));
  }
  return vocab;
}

Vocabulary build_vocabulary(const std::vector<SpeechSegment>& train_segments) {
  std::vector<std::vector<std::string>> lists;
  lists.reserve(train_segments.size());
  for (const auto& segment : train_segments) lists.push_back(segment.tokens);
  return Vocabulary::from_token_lists(lists);
}

FeatureVector vectorize_presence(const std::vector<std::string>& tokens,
                                 const Vocabulary& vocab) {
  std::set<int> present;
  for (const auto& token : tokens) {
    int index = vocab.index_of(token);
    if (index >= 0) present.insert(index);
  }
  FeatureVector v;
  if (present.empty()) return v;
  const double value = 1.0 / std::sqrt(static_cast<double>(present.size()));
  v.entries.reserve(present.size());
  for (int index : present) v.entries.emplace_back(index, value);
  v.norm = 1.0;
  return v;
}

double dot(const FeatureVector& a, const FeatureVector& b) {
  double sum = 0.0;
  auto ia = a.entries.begin();
  auto ib = b.entries.begin();
  while (ia != a.entries.end() && ib != b.entries.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      sum += ia->second * ib->second;
      ++ia;
      ++ib;
    }
  }
  return sum;
}

}  // namespace convote
