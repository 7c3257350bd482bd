#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace convote {

enum class Vote { Yea, Nay };

inline char vote_char(Vote v) { return v == Vote::Yea ? 'Y' : 'N'; }

/// One uninterrupted utterance by a single speaker within a debate.
struct SpeechSegment {
  std::string debate_id;
  int segment_index = 0;   // contiguous within the (possibly filtered) debate
  int original_index = 0;  // index in the unfiltered debate, kept as provenance
  std::string speaker_id;
  std::vector<std::string> tokens;  // tokenize(raw_text)
  std::string raw_text;
  std::optional<Vote> vote;
};

struct Debate {
  std::string debate_id;
  std::vector<SpeechSegment> segments;
  // speaker id -> surface-name token sequences used to detect by-name references
  std::map<std::string, std::vector<std::vector<std::string>>> speaker_names;
};

struct CorpusSplit {
  std::vector<Debate> train;
  std::vector<Debate> test;
  std::vector<Debate> dev;
};

enum class FilterPolicy {
  Evaluation,                      // drop yield segments and amendment segments
  AgreementMining,                 // drop amendment segments, keep yield segments
  AgreementTrainingWithAmendments  // keep both
};

// Reads one <debate_id>.jsonl file per debate from root. Each line:
//   {"segment_index": int, "speaker_id": str, "speaker_names": [str...],
//    "vote": "Y"|"N"|null, "text": str}
std::vector<Debate> parse_corpus(const std::filesystem::path& root);

Debate filter_segments(const Debate& debate, FilterPolicy policy);

// Whole-debate split; deterministic given seed. Test and dev counts are
// floored quotas, train takes the leftover (53 @ 0.7/0.2/0.1 -> 38/10/5).
CorpusSplit split_debates(std::vector<Debate> debates,
                          std::array<double, 3> ratios, std::uint64_t seed);

struct SyntheticSpec {
  int speakers = 4;
  int segments_per_speaker = 2;
  int tokens_per_segment = 30;
  double yea_fraction = 0.5;
  // class-conditional unigram distributions (term, relative weight)
  std::vector<std::pair<std::string, double>> yea_unigrams;
  std::vector<std::pair<std::string, double>> nay_unigrams;
  double cue_rate = 0.0;               // P(segment embeds an agreement-cue reference)
  double cue_noise = 0.0;              // fraction of those aimed at an opposite-vote speaker
  double disagreement_cue_rate = 0.0;  // P(segment embeds a disagreement-cue reference)
  double neutral_mention_rate = 0.0;   // P(segment embeds a cue-free mention)
  int debates = 1;
};

SyntheticSpec default_synthetic_spec();
SyntheticSpec load_synthetic_spec(const std::filesystem::path& config_path);
SyntheticSpec parse_synthetic_spec_json(const std::string& json_text);

Debate generate_synthetic_debate(const SyntheticSpec& spec, std::uint64_t seed,
                                 const std::string& debate_id = "synthetic");
std::vector<Debate> generate_synthetic_corpus(const SyntheticSpec& spec,
                                              std::uint64_t seed);

void write_corpus(const std::vector<Debate>& debates,
                  const std::filesystem::path& out_dir);

}  // namespace convote
