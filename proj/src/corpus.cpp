#include "convote/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "convote/errors.hpp"
#include "convote/features.hpp"

namespace convote {
namespace {

using nlohmann::json;

bool has_token_with_prefix(const std::vector<std::string>& tokens,
                           std::string_view prefix) {
  for (const auto& token : tokens)
    if (token.size() >= prefix.size() &&
        token.compare(0, prefix.size(), prefix) == 0)
      return true;
  return false;
}

Debate parse_debate_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());

  Debate debate;
  debate.debate_id = path.stem().string();

  std::map<std::string, Vote> speaker_votes;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);

    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(where + ": " + e.what());
    }
    if (!record.contains("segment_index") || !record.contains("speaker_id") ||
        !record.contains("speaker_names") || !record.contains("vote") ||
        !record.contains("text"))
      throw ParseError(where + ": missing required field");

    SpeechSegment segment;
    segment.debate_id = debate.debate_id;
    try {
      segment.segment_index = record["segment_index"].get<int>();
      segment.speaker_id = record["speaker_id"].get<std::string>();
      segment.raw_text = record["text"].get<std::string>();
      if (!record["vote"].is_null()) {
        const auto vote = record["vote"].get<std::string>();
        if (vote == "Y")
          segment.vote = Vote::Yea;
        else if (vote == "N")
          segment.vote = Vote::Nay;
        else
          throw ParseError(where + ": vote must be \"Y\", \"N\", or null");
      }
      auto& names = debate.speaker_names[segment.speaker_id];
      for (const auto& name : record["speaker_names"]) {
        auto name_tokens = tokenize(name.get<std::string>());
        if (!name_tokens.empty() &&
            std::find(names.begin(), names.end(), name_tokens) == names.end())
          names.push_back(std::move(name_tokens));
      }
    } catch (const json::exception& e) {
      throw ParseError(where + ": " + e.what());
    }
    segment.original_index = segment.segment_index;
    segment.tokens = tokenize(segment.raw_text);

    if (segment.vote) {
      auto [it, inserted] = speaker_votes.emplace(segment.speaker_id, *segment.vote);
      if (!inserted && it->second != *segment.vote)
        throw IntegrityError(where + ": speaker " + segment.speaker_id +
                             " has conflicting votes in debate " + debate.debate_id);
    }
    debate.segments.push_back(std::move(segment));
  }

  std::sort(debate.segments.begin(), debate.segments.end(),
            [](const SpeechSegment& a, const SpeechSegment& b) {
              return a.segment_index < b.segment_index;
            });
  for (std::size_t i = 0; i < debate.segments.size(); ++i) {
    if (i > 0 && debate.segments[i].segment_index == debate.segments[i - 1].segment_index)
      throw IntegrityError(path.string() + ": duplicate segment_index " +
                           std::to_string(debate.segments[i].segment_index));
    if (debate.segments[i].segment_index != static_cast<int>(i))
      throw IntegrityError(path.string() + ": segment indices not contiguous from 0");
  }
  return debate;
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>(rng() % n);
}

// Categorical sampler over (term, weight) pairs.
class UnigramSampler {
 public:
  explicit UnigramSampler(const std::vector<std::pair<std::string, double>>& dist) {
    double total = 0.0;
    for (const auto& [term, weight] : dist) {
      if (weight < 0.0) throw ConfigError("negative unigram weight for " + term);
      total += weight;
      cumulative_.push_back(total);
      terms_.push_back(term);
    }
    if (total <= 0.0) throw ConfigError("unigram distribution has zero total weight");
    total_ = total;
  }

  const std::string& sample(std::mt19937_64& rng) const {
    const double target = uniform01(rng) * total_;
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
    std::size_t i = static_cast<std::size_t>(it - cumulative_.begin());
    if (i >= terms_.size()) i = terms_.size() - 1;
    return terms_[i];
  }

 private:
  std::vector<std::string> terms_;
  std::vector<double> cumulative_;
  double total_ = 0.0;
};

const std::vector<std::string>& surname_pool() {
  static const std::vector<std::string> pool = {
      "adams",  "baker",  "carter", "davis",  "ellis",  "foster",
      "greene", "harris", "irwin",  "jordan", "keller", "lawson",
      "mercer", "norton", "owens",  "parker", "quinn",  "ramsey",
      "sutton", "turner", "vance",  "walsh",  "xavier", "york",
      "zimmer", "abbott", "barnes", "cohen",  "dalton", "fulton"};
  return pool;
}

const std::vector<std::string>& agreement_cues() {
  static const std::vector<std::string> cues = {"agree", "concur", "second",
                                                "commend", "echo"};
  return cues;
}

const std::vector<std::string>& disagreement_cues() {
  static const std::vector<std::string> cues = {"disagree", "dispute", "differ",
                                                "rebut"};
  return cues;
}

void validate_spec(const SyntheticSpec& spec) {
  if (spec.speakers < 2) throw ConfigError("synthetic spec needs >= 2 speakers");
  if (spec.segments_per_speaker < 1)
    throw ConfigError("synthetic spec needs >= 1 segment per speaker");
  if (spec.tokens_per_segment < 1)
    throw ConfigError("synthetic spec needs >= 1 token per segment");
  if (spec.yea_fraction < 0.0 || spec.yea_fraction > 1.0)
    throw ConfigError("yea_fraction must be in [0, 1]");
  for (double rate : {spec.cue_rate, spec.cue_noise, spec.disagreement_cue_rate,
                      spec.neutral_mention_rate})
    if (rate < 0.0 || rate > 1.0) throw ConfigError("rates must be in [0, 1]");
  if (spec.yea_unigrams.empty() || spec.nay_unigrams.empty())
    throw ConfigError("both class-conditional unigram distributions are required");
  if (spec.debates < 1) throw ConfigError("debates must be >= 1");

  const int n_yea =
      static_cast<int>(std::lround(spec.yea_fraction * spec.speakers));
  if (spec.yea_fraction > 0.0 && spec.yea_fraction < 1.0 &&
      (n_yea == 0 || n_yea == spec.speakers))
    throw ConfigError("vote split requests both classes but rounding yields one");
}

}  // namespace

std::vector<Debate> parse_corpus(const std::filesystem::path& root) {
  if (!std::filesystem::is_directory(root))
    throw ParseError("corpus root is not a directory: " + root.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(root))
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  std::vector<Debate> debates;
  debates.reserve(files.size());
  for (const auto& file : files) debates.push_back(parse_debate_file(file));
  return debates;
}

Debate filter_segments(const Debate& debate, FilterPolicy policy) {
  const bool drop_yield = policy == FilterPolicy::Evaluation;
  const bool drop_amendment = policy != FilterPolicy::AgreementTrainingWithAmendments;

  Debate out;
  out.debate_id = debate.debate_id;
  out.speaker_names = debate.speaker_names;
  for (const auto& segment : debate.segments) {
    if (drop_yield && has_token_with_prefix(segment.tokens, "yield")) continue;
    if (drop_amendment && has_token_with_prefix(segment.tokens, "amendment")) continue;
    SpeechSegment kept = segment;
    kept.segment_index = static_cast<int>(out.segments.size());
    out.segments.push_back(std::move(kept));
  }
  return out;
}

CorpusSplit split_debates(std::vector<Debate> debates,
                          std::array<double, 3> ratios, std::uint64_t seed) {
  double sum = 0.0;
  for (double r : ratios) {
    if (r < 0.0) throw ConfigError("split ratios must be non-negative");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("split ratios must sum to 1");

  int nonzero = 0;
  for (double r : ratios)
    if (r > 0.0) ++nonzero;
  if (static_cast<int>(debates.size()) < nonzero)
    throw ConfigError("fewer debates than nonzero split buckets");

  std::mt19937_64 rng(seed);
  for (std::size_t i = debates.size(); i > 1; --i)
    std::swap(debates[i - 1], debates[uniform_index(rng, i)]);

  const std::size_t n = debates.size();
  std::array<std::size_t, 3> counts = {0, 0, 0};
  counts[1] = static_cast<std::size_t>(std::floor(ratios[1] * n));
  counts[2] = static_cast<std::size_t>(std::floor(ratios[2] * n));
  counts[0] = static_cast<std::size_t>(std::floor(ratios[0] * n));
  std::size_t leftover = n - counts[0] - counts[1] - counts[2];
  // Leftover debates go to the first bucket with a nonzero ratio, train
  // first; this reproduces the published 38/10/5 split of 53 debates.
  for (int b : {0, 1, 2}) {
    if (leftover == 0) break;
    if (ratios[b] > 0.0) {
      counts[b] += leftover;
      leftover = 0;
    }
  }

  CorpusSplit split;
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < counts[0]; ++i) split.train.push_back(std::move(debates[cursor++]));
  for (std::size_t i = 0; i < counts[1]; ++i) split.test.push_back(std::move(debates[cursor++]));
  for (std::size_t i = 0; i < counts[2]; ++i) split.dev.push_back(std::move(debates[cursor++]));
  return split;
}

SyntheticSpec default_synthetic_spec() {
  SyntheticSpec spec;
  spec.speakers = 15;
  spec.segments_per_speaker = 4;
  spec.tokens_per_segment = 25;
  spec.yea_fraction = 0.5;
  spec.debates = 20;

  static const std::vector<std::string> shared = {
      "the",      "of",        "to",      "and",       "in",        "that",
      "we",       "this",      "bill",    "house",     "for",       "is",
      "it",       "our",       "on",      "my",        "time",      "will",
      "be",       "have",      "as",      "with",      "members",   "congress",
      "people",   "country",   "measure", "speaker",   "today",     "issue",
      "debate",   "important", "floor",   "question",  "american",  "states",
      "federal",  "program",   "policy",  "funding",   "budget",    "committee",
      "year",     "act",       "law",     "need",      "would",     "make",
      "state",    "work"};
  static const std::vector<std::string> yea_words = {
      "favor",   "benefit",   "progress", "improve", "strengthen", "protect",
      "vital",   "necessary", "urge",     "passage", "forward",    "wise"};
  static const std::vector<std::string> nay_words = {
      "against", "flawed",    "wasteful", "burden",  "mistake",    "harm",
      "costly",  "object",    "defeat",   "unwise",  "damaging",   "failure"};

  for (const auto& w : shared) {
    spec.yea_unigrams.emplace_back(w, 1.0);
    spec.nay_unigrams.emplace_back(w, 1.0);
  }
  for (const auto& w : yea_words) {
    spec.yea_unigrams.emplace_back(w, 0.30);
    spec.nay_unigrams.emplace_back(w, 0.18);
  }
  for (const auto& w : nay_words) {
    spec.yea_unigrams.emplace_back(w, 0.18);
    spec.nay_unigrams.emplace_back(w, 0.30);
  }
  return spec;
}

SyntheticSpec load_synthetic_spec(const std::filesystem::path& config_path) {
  std::ifstream in(config_path);
  if (!in) throw ConfigError("cannot open synthetic config: " + config_path.string());
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_synthetic_spec_json(text.str());
  } catch (const ParseError& e) {
    throw ParseError(config_path.string() + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(config_path.string() + ": " + e.what());
  }
}

SyntheticSpec parse_synthetic_spec_json(const std::string& json_text) {
  json config;
  try {
    config = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what());
  }

  SyntheticSpec spec = default_synthetic_spec();
  auto read_dist = [&](const char* key,
                       std::vector<std::pair<std::string, double>>& out) {
    if (!config.contains(key)) return;
    out.clear();
    for (auto it = config[key].begin(); it != config[key].end(); ++it)
      out.emplace_back(it.key(), it.value().get<double>());
  };
  try {
    if (config.contains("speakers")) spec.speakers = config["speakers"].get<int>();
    if (config.contains("segments_per_speaker"))
      spec.segments_per_speaker = config["segments_per_speaker"].get<int>();
    if (config.contains("tokens_per_segment"))
      spec.tokens_per_segment = config["tokens_per_segment"].get<int>();
    if (config.contains("yea_fraction"))
      spec.yea_fraction = config["yea_fraction"].get<double>();
    if (config.contains("cue_rate")) spec.cue_rate = config["cue_rate"].get<double>();
    if (config.contains("cue_noise")) spec.cue_noise = config["cue_noise"].get<double>();
    if (config.contains("disagreement_cue_rate"))
      spec.disagreement_cue_rate = config["disagreement_cue_rate"].get<double>();
    if (config.contains("neutral_mention_rate"))
      spec.neutral_mention_rate = config["neutral_mention_rate"].get<double>();
    if (config.contains("debates")) spec.debates = config["debates"].get<int>();
    read_dist("yea_unigrams", spec.yea_unigrams);
    read_dist("nay_unigrams", spec.nay_unigrams);
  } catch (const json::exception& e) {
    throw ConfigError(e.what());
  }
  validate_spec(spec);
  return spec;
}

Debate generate_synthetic_debate(const SyntheticSpec& spec, std::uint64_t seed,
                                 const std::string& debate_id) {
  validate_spec(spec);
  std::mt19937_64 rng(seed);

  const int n = spec.speakers;
  const int n_yea = static_cast<int>(std::lround(spec.yea_fraction * n));

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[uniform_index(rng, i)]);

  std::vector<Vote> votes(n, Vote::Nay);
  for (int i = 0; i < n_yea; ++i) votes[order[i]] = Vote::Yea;

  Debate debate;
  debate.debate_id = debate_id;

  std::vector<std::string> speaker_ids(n);
  std::vector<std::vector<std::string>> names(n);
  const auto& pool = surname_pool();
  for (int i = 0; i < n; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "spk%02d", i);
    speaker_ids[i] = buf;
    std::string surname = pool[i % pool.size()];
    if (i >= static_cast<int>(pool.size()))
      surname += std::to_string(i / pool.size() + 1);
    names[i] = {"mr", surname};
    debate.speaker_names[speaker_ids[i]] = {names[i]};
  }

  UnigramSampler yea_sampler(spec.yea_unigrams);
  UnigramSampler nay_sampler(spec.nay_unigrams);

  auto pick_other = [&](int self, std::optional<Vote> want) -> int {
    std::vector<int> candidates;
    for (int j = 0; j < n; ++j) {
      if (j == self) continue;
      if (want && votes[j] != *want) continue;
      candidates.push_back(j);
    }
    if (candidates.empty()) return -1;
    return candidates[uniform_index(rng, candidates.size())];
  };

  auto insert_at = [&](std::vector<std::string>& tokens,
                       const std::vector<std::string>& phrase) {
    const std::size_t pos = uniform_index(rng, tokens.size() + 1);
    tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(pos),
                  phrase.begin(), phrase.end());
  };

  for (int round = 0; round < spec.segments_per_speaker; ++round) {
    for (int speaker = 0; speaker < n; ++speaker) {
      const UnigramSampler& sampler =
          votes[speaker] == Vote::Yea ? yea_sampler : nay_sampler;
      std::vector<std::string> tokens;
      tokens.reserve(static_cast<std::size_t>(spec.tokens_per_segment));
      for (int t = 0; t < spec.tokens_per_segment; ++t)
        tokens.push_back(sampler.sample(rng));

      if (uniform01(rng) < spec.cue_rate) {
        std::optional<Vote> want = votes[speaker];
        if (uniform01(rng) < spec.cue_noise)
          want = votes[speaker] == Vote::Yea ? Vote::Nay : Vote::Yea;
        int target = pick_other(speaker, want);
        if (target < 0) target = pick_other(speaker, std::nullopt);
        if (target >= 0) {
          const auto& cues = agreement_cues();
          std::vector<std::string> phrase = {
              "i", cues[uniform_index(rng, cues.size())], "with", "the",
              "gentleman"};
          phrase.insert(phrase.end(), names[target].begin(), names[target].end());
          phrase.push_back("and");
          phrase.push_back(cues[uniform_index(rng, cues.size())]);
          phrase.push_back("his");
          phrase.push_back("position");
          insert_at(tokens, phrase);
        }
      }
      if (uniform01(rng) < spec.disagreement_cue_rate) {
        const Vote opposite = votes[speaker] == Vote::Yea ? Vote::Nay : Vote::Yea;
        int target = pick_other(speaker, opposite);
        if (target >= 0) {
          const auto& cues = disagreement_cues();
          std::vector<std::string> phrase = {
              "i", cues[uniform_index(rng, cues.size())], "with", "the",
              "gentleman"};
          phrase.insert(phrase.end(), names[target].begin(), names[target].end());
          phrase.push_back("on");
          phrase.push_back("this");
          insert_at(tokens, phrase);
        }
      }
      if (uniform01(rng) < spec.neutral_mention_rate) {
        int target = pick_other(speaker, std::nullopt);
        if (target >= 0) {
          std::vector<std::string> phrase = {"the", "gentleman"};
          phrase.insert(phrase.end(), names[target].begin(), names[target].end());
          phrase.push_back("spoke");
          phrase.push_back("earlier");
          insert_at(tokens, phrase);
        }
      }

      SpeechSegment segment;
      segment.debate_id = debate_id;
      segment.segment_index = static_cast<int>(debate.segments.size());
      segment.original_index = segment.segment_index;
      segment.speaker_id = speaker_ids[speaker];
      segment.vote = votes[speaker];
      std::ostringstream text;
      for (std::size_t t = 0; t < tokens.size(); ++t) {
        if (t > 0) text << ' ';
        text << tokens[t];
      }
      segment.raw_text = text.str();
      segment.tokens = std::move(tokens);
      debate.segments.push_back(std::move(segment));
    }
  }
  return debate;
}

std::vector<Debate> generate_synthetic_corpus(const SyntheticSpec& spec,
                                              std::uint64_t seed) {
  validate_spec(spec);
  std::vector<Debate> debates;
  debates.reserve(static_cast<std::size_t>(spec.debates));
  for (int i = 0; i < spec.debates; ++i) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "synth_%03d", i);
    debates.push_back(generate_synthetic_debate(spec, seed + 1000003u * i, buf));
  }
  return debates;
}

void write_corpus(const std::vector<Debate>& debates,
                  const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  for (const auto& debate : debates) {
    std::ofstream out(out_dir / (debate.debate_id + ".jsonl"));
    if (!out)
      throw ConfigError("cannot write debate file for " + debate.debate_id);
    for (const auto& segment : debate.segments) {
      json record;
      record["segment_index"] = segment.segment_index;
      record["speaker_id"] = segment.speaker_id;
      json names = json::array();
      auto it = debate.speaker_names.find(segment.speaker_id);
      if (it != debate.speaker_names.end()) {
        for (const auto& name_tokens : it->second) {
          std::string name;
          for (const auto& token : name_tokens) {
            if (!name.empty()) name += ' ';
            name += token;
          }
          names.push_back(name);
        }
      }
      record["speaker_names"] = names;
      if (segment.vote)
        record["vote"] = std::string(1, vote_char(*segment.vote));
      else
        record["vote"] = nullptr;
      record["text"] = segment.raw_text;
      out << record.dump() << '\n';
    }
  }
}

}  // namespace convote
