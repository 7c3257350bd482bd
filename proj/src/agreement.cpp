#include "convote/agreement.hpp"

#include <algorithm>
#include <map>

#include "convote/errors.hpp"

namespace convote {
namespace {

constexpr std::size_t kWindowBefore = 30;
constexpr std::size_t kWindowAfter = 20;

// speaker id -> name token sequences, restricted to speakers with segments
std::map<std::string, std::vector<std::vector<std::string>>> speaking_names(
    const Debate& debate) {
  std::map<std::string, bool> spoke;
  for (const auto& segment : debate.segments) spoke[segment.speaker_id] = true;
  std::map<std::string, std::vector<std::vector<std::string>>> names;
  for (const auto& [speaker, name_list] : debate.speaker_names)
    if (spoke.count(speaker)) names[speaker] = name_list;
  return names;
}

std::map<std::string, Vote> speaker_votes(const Debate& debate) {
  std::map<std::string, Vote> votes;
  for (const auto& segment : debate.segments)
    if (segment.vote) votes.emplace(segment.speaker_id, *segment.vote);
  return votes;
}

bool matches_at(const std::vector<std::string>& tokens, std::size_t pos,
                const std::vector<std::string>& name) {
  if (name.empty() || pos + name.size() > tokens.size()) return false;
  for (std::size_t k = 0; k < name.size(); ++k)
    if (tokens[pos + k] != name[k]) return false;
  return true;
}

}  // namespace

std::vector<ReferenceInstance> extract_references(const Debate& debate) {
  const auto names = speaking_names(debate);
  const auto votes = speaker_votes(debate);

  std::vector<ReferenceInstance> instances;
  for (const auto& segment : debate.segments) {
    const auto& tokens = segment.tokens;
    std::size_t pos = 0;
    while (pos < tokens.size()) {
      // longest match over every speaking speaker's surface names
      std::size_t best_len = 0;
      const std::string* best_speaker = nullptr;
      for (const auto& [speaker, name_list] : names) {
        for (const auto& name : name_list) {
          if (name.size() > best_len && matches_at(tokens, pos, name)) {
            best_len = name.size();
            best_speaker = &speaker;
          }
        }
      }
      if (best_len == 0) {
        ++pos;
        continue;
      }
      if (*best_speaker != segment.speaker_id) {
        ReferenceInstance instance;
        instance.debate_id = debate.debate_id;
        instance.source_segment_index = segment.segment_index;
        instance.source_speaker_id = segment.speaker_id;
        instance.target_speaker_id = *best_speaker;
        const std::size_t window_start = pos >= kWindowBefore ? pos - kWindowBefore : 0;
        const std::size_t window_end =
            std::min(tokens.size(), pos + best_len + kWindowAfter);
        instance.window_tokens.assign(tokens.begin() + window_start,
                                      tokens.begin() + window_end);
        auto source_vote = votes.find(segment.speaker_id);
        auto target_vote = votes.find(*best_speaker);
        if (source_vote != votes.end() && target_vote != votes.end())
          instance.gold_same_vote =
              label_reference(source_vote->second, target_vote->second);
        instances.push_back(std::move(instance));
      }
      pos += best_len;  // overlapping matches resolved left-to-right
    }
  }
  return instances;
}

bool label_reference(Vote source_vote, Vote target_vote) {
  return source_vote == target_vote;
}

Vocabulary build_reference_vocabulary(const std::vector<Debate>& train_debates) {
  std::vector<std::vector<std::string>> windows;
  for (const auto& debate : train_debates) {
    const Debate filtered =
        filter_segments(debate, FilterPolicy::AgreementTrainingWithAmendments);
    for (auto& instance : extract_references(filtered))
      windows.push_back(std::move(instance.window_tokens));
  }
  return Vocabulary::from_token_lists(windows);
}

LinearModel train_agreement_classifier(const std::vector<Debate>& train_debates,
                                       const Vocabulary& vocab_ref, double c,
                                       std::uint64_t seed) {
  std::vector<LabeledVector> examples;
  for (const auto& debate : train_debates) {
    const Debate filtered =
        filter_segments(debate, FilterPolicy::AgreementTrainingWithAmendments);
    for (const auto& instance : extract_references(filtered)) {
      if (!instance.gold_same_vote) continue;
      LabeledVector example;
      example.features = vectorize_presence(instance.window_tokens, vocab_ref);
      example.label = *instance.gold_same_vote ? 1 : -1;
      examples.push_back(std::move(example));
    }
  }
  if (examples.empty())
    throw TrainingError("no labeled references available for agreement training");
  return train_linear(examples, vocab_ref.size(), c, seed);
}

double resolve_theta(const AgreementScore& score, ThetaMode mode) {
  return mode == ThetaMode::Zero ? 0.0 : score.mu_debate;
}

double agr_weight(const AgreementScore& score, double alpha, ThetaMode mode) {
  if (alpha <= 0.0) throw ConfigError("alpha must be positive");
  if (score.sigma_r_debate < 0.0)
    throw IntegrityError("sigma_r must be non-negative");
  const double theta = resolve_theta(score, mode);
  const double d = score.d_r;
  if (d < theta) return 0.0;
  if (score.sigma_r_debate == 0.0) return alpha;  // limit of the upper clamp
  if (d > 4.0 * score.sigma_r_debate) return alpha;
  return std::clamp(alpha * d / (4.0 * score.sigma_r_debate), 0.0, alpha);
}

}  // namespace convote
