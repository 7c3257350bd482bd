#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "convote/agreement.hpp"
#include "convote/corpus.hpp"
#include "convote/mincut.hpp"

namespace convote {

enum class Variant {
  Majority,
  Lexical,
  SvmSegment,
  SvmSegmentSameSpeaker,
  SvmSegmentSameSpeakerAgr,
  SvmSpeaker,
  SvmSpeakerAgr,
  HardAgr
};

const char* variant_name(Variant v);
Variant parse_variant(const std::string& name);
bool variant_uses_agreement(Variant v);

struct ExperimentConfig {
  Variant variant = Variant::SvmSegment;
  std::optional<ThetaMode> theta_mode;  // only meaningful for agreement variants
  std::optional<double> alpha;          // unset + tune==false -> default 1.0
  bool tune = false;                    // alpha = TUNE: grid search on dev
  double c = 1.0;
  std::uint64_t seed = 0;

  void validate() const;  // throws ConfigError on variant/parameter mismatch
};

struct ConfusionCounts {
  long yea_as_yea = 0;
  long yea_as_nay = 0;
  long nay_as_yea = 0;
  long nay_as_nay = 0;
};

struct DebateBreakdown {
  std::string debate_id;
  long n_segments = 0;
  long n_correct = 0;
};

struct ReferenceAuditRecord {
  std::string debate_id;
  std::string source_speaker;
  std::string target_speaker;
  double d_r = 0.0;
  double theta = 0.0;
  double weight = 0.0;
  std::optional<bool> gold_same_vote;
};

struct SplitEval {
  std::string split_name;
  long n_segments = 0;
  long n_correct = 0;
  double accuracy_percent = 0.0;
  ConfusionCounts confusion;
  std::vector<DebateBreakdown> per_debate;
  // agreement diagnostics; absent for variants without an agreement model
  std::optional<double> agreement_accuracy_percent;
  long links_emitted = 0;
  long links_correct = 0;
  std::optional<double> link_precision_percent;  // absent when no links emitted
  std::vector<ReferenceAuditRecord> reference_audit;
  std::vector<std::string> warnings;
};

struct EvalReport {
  ExperimentConfig config;
  double chosen_alpha = 1.0;
  SplitEval dev;
  SplitEval test;
};

EvalReport run_pipeline(const ExperimentConfig& config, const CorpusSplit& split);

// Grid {0.25, 0.5, 1, 2, 4, 8}; dev-accuracy argmax, ties -> smallest alpha.
std::pair<double, EvalReport> tune_alpha(ExperimentConfig config,
                                         const CorpusSplit& split);

Vote train_majority_class(const std::vector<Debate>& train);

// #(tokens with prefix "support") - #(tokens with prefix "oppos"); the sign
// decides, 0 falls back to the training-majority class.
Vote baseline_lexical(const SpeechSegment& segment, Vote train_majority);

double evaluate_accuracy(const std::vector<Vote>& predictions,
                         const std::vector<Vote>& gold);

// Fraction of emitted links whose endpoints voted alike; nullopt when no
// links were emitted.
std::optional<double> agreement_precision(const std::vector<bool>& link_gold_same_vote);

// One record per (variant, theta, alpha, split):
// variant \t theta_mode \t alpha \t split \t accuracy_percent \t n_segments \t seed
void write_result_records(std::ostream& os, const EvalReport& report);
void write_reference_audit(std::ostream& os, const std::vector<ReferenceAuditRecord>& records);

// Debate-level parallel map helper; honors CONVOTE_THREADS.
unsigned configured_thread_count();

}  // namespace convote
