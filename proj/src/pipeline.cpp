#include "convote/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>

#include "convote/errors.hpp"
#include "convote/linear_model.hpp"

namespace convote {
namespace {

template <typename F>
void parallel_for(std::size_t n, F&& body) {
  const std::size_t threads =
      std::min<std::size_t>(configured_thread_count(), n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& thread : pool) thread.join();
  if (failure) std::rethrow_exception(failure);
}

struct TrainedModels {
  Vote majority = Vote::Yea;
  Vocabulary vocab;
  LinearModel segment_model;
  bool has_segment_model = false;
  Vocabulary ref_vocab;
  LinearModel agreement_model;
  bool has_agreement_model = false;
};

bool is_speaker_variant(Variant v) {
  return v == Variant::SvmSpeaker || v == Variant::SvmSpeakerAgr;
}

bool is_svm_variant(Variant v) {
  return v != Variant::Majority && v != Variant::Lexical;
}

bool has_same_speaker_links(Variant v) {
  switch (v) {
    case Variant::SvmSegmentSameSpeaker:
    case Variant::SvmSegmentSameSpeakerAgr:
    case Variant::SvmSpeaker:
    case Variant::SvmSpeakerAgr:
    case Variant::HardAgr:
      return true;
    default:
      return false;
  }
}

TrainedModels train_models(const ExperimentConfig& config,
                           const CorpusSplit& split) {
  TrainedModels models;

  std::vector<SpeechSegment> train_segments;
  for (const auto& debate : split.train) {
    const Debate filtered = filter_segments(debate, FilterPolicy::Evaluation);
    train_segments.insert(train_segments.end(), filtered.segments.begin(),
                          filtered.segments.end());
  }
  models.majority = train_majority_class(split.train);

  if (is_svm_variant(config.variant)) {
    models.vocab = build_vocabulary(train_segments);
    std::vector<LabeledVector> examples;
    if (is_speaker_variant(config.variant)) {
      // one document per (debate, speaker): all of that speaker's segments
      for (const auto& debate : split.train) {
        const Debate filtered = filter_segments(debate, FilterPolicy::Evaluation);
        std::map<std::string, std::vector<std::string>> concatenated;
        std::map<std::string, std::optional<Vote>> votes;
        for (const auto& segment : filtered.segments) {
          auto& tokens = concatenated[segment.speaker_id];
          tokens.insert(tokens.end(), segment.tokens.begin(), segment.tokens.end());
          votes[segment.speaker_id] = segment.vote;
        }
        for (const auto& [speaker, tokens] : concatenated) {
          if (!votes[speaker]) continue;
          LabeledVector example;
          example.features = vectorize_presence(tokens, models.vocab);
          example.label = *votes[speaker] == Vote::Yea ? 1 : -1;
          examples.push_back(std::move(example));
        }
      }
    } else {
      for (const auto& segment : train_segments) {
        if (!segment.vote) continue;
        LabeledVector example;
        example.features = vectorize_presence(segment.tokens, models.vocab);
        example.label = *segment.vote == Vote::Yea ? 1 : -1;
        examples.push_back(std::move(example));
      }
    }
    models.segment_model =
        train_linear(examples, models.vocab.size(), config.c, config.seed);
    models.has_segment_model = true;
  }

  if (variant_uses_agreement(config.variant)) {
    models.ref_vocab = build_reference_vocabulary(split.train);
    models.agreement_model = train_agreement_classifier(
        split.train, models.ref_vocab, config.c, config.seed + 1);
    models.has_agreement_model = true;
  }
  return models;
}

struct DebateEval {
  DebateBreakdown breakdown;
  ConfusionCounts confusion;
  long refs_with_gold = 0;
  long refs_correct = 0;
  long links_emitted = 0;
  long links_correct = 0;
  std::vector<ReferenceAuditRecord> audit;
  std::vector<std::string> warnings;
  bool skipped = false;
};

DebateEval evaluate_debate(const TrainedModels& models, Variant variant,
                           ThetaMode theta_mode, double alpha,
                           const Debate& raw_debate) {
  DebateEval result;
  result.breakdown.debate_id = raw_debate.debate_id;

  const Debate debate = filter_segments(raw_debate, FilterPolicy::Evaluation);
  if (debate.segments.empty()) {
    result.skipped = true;
    return result;
  }
  const std::size_t n = debate.segments.size();

  std::vector<Vote> predictions;
  predictions.reserve(n);

  if (variant == Variant::Majority) {
    predictions.assign(n, models.majority);
  } else if (variant == Variant::Lexical) {
    for (const auto& segment : debate.segments)
      predictions.push_back(baseline_lexical(segment, models.majority));
  } else {
    std::vector<double> decisions(n, 0.0);
    if (is_speaker_variant(variant)) {
      std::map<std::string, std::vector<std::string>> concatenated;
      for (const auto& segment : debate.segments) {
        auto& tokens = concatenated[segment.speaker_id];
        tokens.insert(tokens.end(), segment.tokens.begin(), segment.tokens.end());
      }
      std::map<std::string, double> speaker_decision;
      for (const auto& [speaker, tokens] : concatenated)
        speaker_decision[speaker] = models.segment_model.decision_value(
            vectorize_presence(tokens, models.vocab));
      for (std::size_t i = 0; i < n; ++i)
        decisions[i] = speaker_decision[debate.segments[i].speaker_id];
    } else {
      for (std::size_t i = 0; i < n; ++i)
        decisions[i] = models.segment_model.decision_value(
            vectorize_presence(debate.segments[i].tokens, models.vocab));
    }

    const IndScores ind = normalize_ind(decisions);

    std::vector<std::string> speakers;
    if (has_same_speaker_links(variant))
      for (const auto& segment : debate.segments)
        speakers.push_back(segment.speaker_id);

    std::vector<SpeakerAgreementWeight> weights;
    if (variant_uses_agreement(variant)) {
      const Debate mined = filter_segments(raw_debate, FilterPolicy::AgreementMining);
      const auto references = extract_references(mined);
      if (!references.empty()) {
        std::vector<double> d_r(references.size());
        for (std::size_t r = 0; r < references.size(); ++r)
          d_r[r] = models.agreement_model.decision_value(
              vectorize_presence(references[r].window_tokens, models.ref_vocab));
        double mu = 0.0;
        for (double d : d_r) mu += d;
        mu /= static_cast<double>(d_r.size());
        double variance = 0.0;
        for (double d : d_r) variance += (d - mu) * (d - mu);
        variance /= static_cast<double>(d_r.size());
        const double sigma = std::sqrt(variance);

        std::map<std::string, bool> speaks_here;
        for (const auto& segment : debate.segments)
          speaks_here[segment.speaker_id] = true;
        std::map<std::pair<std::string, std::string>, double> pair_total;
        std::map<std::pair<std::string, std::string>, bool> pair_gold;
        for (std::size_t r = 0; r < references.size(); ++r) {
          AgreementScore score{d_r[r], sigma, mu};
          const double weight = agr_weight(score, alpha, theta_mode);
          const auto& ref = references[r];
          weights.push_back({ref.source_speaker_id, ref.target_speaker_id, weight});

          ReferenceAuditRecord record;
          record.debate_id = ref.debate_id;
          record.source_speaker = ref.source_speaker_id;
          record.target_speaker = ref.target_speaker_id;
          record.d_r = d_r[r];
          record.theta = resolve_theta(score, theta_mode);
          record.weight = weight;
          record.gold_same_vote = ref.gold_same_vote;
          result.audit.push_back(std::move(record));

          if (ref.gold_same_vote) {
            ++result.refs_with_gold;
            if ((d_r[r] >= 0.0) == *ref.gold_same_vote) ++result.refs_correct;
          }
          // a link is emitted when the pair's total weight ends up positive
          // and both endpoints survive evaluation filtering
          if (weight > 0.0 && speaks_here.count(ref.source_speaker_id) &&
              speaks_here.count(ref.target_speaker_id) && ref.gold_same_vote) {
            auto key = std::minmax(ref.source_speaker_id, ref.target_speaker_id);
            pair_total[{key.first, key.second}] += weight;
            pair_gold[{key.first, key.second}] = *ref.gold_same_vote;
          }
        }
        for (const auto& [pair, total] : pair_total) {
          if (total <= 0.0) continue;
          ++result.links_emitted;
          if (pair_gold[pair]) ++result.links_correct;
        }
      }
    }

    const DebateGraph graph =
        build_debate_graph(ind, speakers, weights, variant == Variant::HardAgr,
                           &result.warnings);
    const Assignment assignment = max_flow_min_cut(graph);
    predictions = assignment.labels;
  }

  for (std::size_t i = 0; i < n; ++i) {
    const auto& gold = debate.segments[i].vote;
    if (!gold) continue;
    ++result.breakdown.n_segments;
    const bool correct = predictions[i] == *gold;
    if (correct) ++result.breakdown.n_correct;
    if (*gold == Vote::Yea) {
      if (predictions[i] == Vote::Yea)
        ++result.confusion.yea_as_yea;
      else
        ++result.confusion.yea_as_nay;
    } else {
      if (predictions[i] == Vote::Yea)
        ++result.confusion.nay_as_yea;
      else
        ++result.confusion.nay_as_nay;
    }
  }
  return result;
}

SplitEval evaluate_split(const TrainedModels& models, Variant variant,
                         ThetaMode theta_mode, double alpha,
                         const std::vector<Debate>& debates,
                         const std::string& split_name) {
  std::vector<DebateEval> evals(debates.size());
  parallel_for(debates.size(), [&](std::size_t i) {
    evals[i] = evaluate_debate(models, variant, theta_mode, alpha, debates[i]);
  });

  SplitEval split;
  split.split_name = split_name;
  long refs_with_gold = 0, refs_correct = 0;
  for (auto& eval : evals) {
    if (eval.skipped) continue;
    split.n_segments += eval.breakdown.n_segments;
    split.n_correct += eval.breakdown.n_correct;
    split.confusion.yea_as_yea += eval.confusion.yea_as_yea;
    split.confusion.yea_as_nay += eval.confusion.yea_as_nay;
    split.confusion.nay_as_yea += eval.confusion.nay_as_yea;
    split.confusion.nay_as_nay += eval.confusion.nay_as_nay;
    split.per_debate.push_back(eval.breakdown);
    refs_with_gold += eval.refs_with_gold;
    refs_correct += eval.refs_correct;
    split.links_emitted += eval.links_emitted;
    split.links_correct += eval.links_correct;
    for (auto& record : eval.audit)
      split.reference_audit.push_back(std::move(record));
    for (auto& warning : eval.warnings)
      split.warnings.push_back(std::move(warning));
  }
  if (split.n_segments > 0)
    split.accuracy_percent =
        100.0 * static_cast<double>(split.n_correct) /
        static_cast<double>(split.n_segments);
  if (variant_uses_agreement(variant)) {
    if (refs_with_gold > 0)
      split.agreement_accuracy_percent =
          100.0 * static_cast<double>(refs_correct) /
          static_cast<double>(refs_with_gold);
    if (split.links_emitted > 0)
      split.link_precision_percent =
          100.0 * static_cast<double>(split.links_correct) /
          static_cast<double>(split.links_emitted);
  }
  return split;
}

const std::vector<double>& alpha_grid() {
  static const std::vector<double> grid = {0.25, 0.5, 1.0, 2.0, 4.0, 8.0};
  return grid;
}

}  // namespace

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::Majority: return "MAJORITY";
    case Variant::Lexical: return "LEXICAL";
    case Variant::SvmSegment: return "SVM_SEGMENT";
    case Variant::SvmSegmentSameSpeaker: return "SVM_SEGMENT_SAMESPEAKER";
    case Variant::SvmSegmentSameSpeakerAgr: return "SVM_SEGMENT_SAMESPEAKER_AGR";
    case Variant::SvmSpeaker: return "SVM_SPEAKER";
    case Variant::SvmSpeakerAgr: return "SVM_SPEAKER_AGR";
    case Variant::HardAgr: return "HARD_AGR";
  }
  return "UNKNOWN";
}

Variant parse_variant(const std::string& name) {
  for (Variant v : {Variant::Majority, Variant::Lexical, Variant::SvmSegment,
                    Variant::SvmSegmentSameSpeaker,
                    Variant::SvmSegmentSameSpeakerAgr, Variant::SvmSpeaker,
                    Variant::SvmSpeakerAgr, Variant::HardAgr})
    if (name == variant_name(v)) return v;
  throw ConfigError("unknown variant: " + name);
}

bool variant_uses_agreement(Variant v) {
  return v == Variant::SvmSegmentSameSpeakerAgr || v == Variant::SvmSpeakerAgr ||
         v == Variant::HardAgr;
}

void ExperimentConfig::validate() const {
  if (c <= 0.0) throw ConfigError("regularization C must be positive");
  if (!variant_uses_agreement(variant)) {
    if (theta_mode || alpha || tune)
      throw ConfigError(std::string("theta/alpha are only meaningful for "
                                    "agreement variants, got ") +
                        variant_name(variant));
  }
  if (tune && alpha) throw ConfigError("alpha cannot be both fixed and TUNE");
}

Vote train_majority_class(const std::vector<Debate>& train) {
  long yea = 0, nay = 0;
  for (const auto& debate : train) {
    const Debate filtered = filter_segments(debate, FilterPolicy::Evaluation);
    for (const auto& segment : filtered.segments) {
      if (!segment.vote) continue;
      if (*segment.vote == Vote::Yea)
        ++yea;
      else
        ++nay;
    }
  }
  return yea >= nay ? Vote::Yea : Vote::Nay;  // tie goes to the positive class
}

Vote baseline_lexical(const SpeechSegment& segment, Vote train_majority) {
  long diff = 0;
  for (const auto& token : segment.tokens) {
    if (token.rfind("support", 0) == 0) ++diff;
    if (token.rfind("oppos", 0) == 0) --diff;
  }
  if (diff > 0) return Vote::Yea;
  if (diff < 0) return Vote::Nay;
  return train_majority;
}

double evaluate_accuracy(const std::vector<Vote>& predictions,
                         const std::vector<Vote>& gold) {
  if (gold.empty()) throw ConfigError("cannot compute accuracy on empty gold set");
  if (predictions.size() != gold.size())
    throw IntegrityError("prediction/gold size mismatch");
  long correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i)
    if (predictions[i] == gold[i]) ++correct;
  return 100.0 * static_cast<double>(correct) / static_cast<double>(gold.size());
}

std::optional<double> agreement_precision(const std::vector<bool>& link_gold_same_vote) {
  if (link_gold_same_vote.empty()) return std::nullopt;
  long correct = 0;
  for (bool same : link_gold_same_vote)
    if (same) ++correct;
  return 100.0 * static_cast<double>(correct) /
         static_cast<double>(link_gold_same_vote.size());
}

EvalReport run_pipeline(const ExperimentConfig& config, const CorpusSplit& split) {
  config.validate();
  if (config.tune) return tune_alpha(config, split).second;

  const ThetaMode theta = config.theta_mode.value_or(ThetaMode::Zero);
  const double alpha = config.alpha.value_or(1.0);
  const TrainedModels models = train_models(config, split);

  EvalReport report;
  report.config = config;
  report.chosen_alpha = alpha;
  report.dev = evaluate_split(models, config.variant, theta, alpha, split.dev, "dev");
  report.test = evaluate_split(models, config.variant, theta, alpha, split.test, "test");
  return report;
}

std::pair<double, EvalReport> tune_alpha(ExperimentConfig config,
                                         const CorpusSplit& split) {
  config.tune = true;
  config.alpha.reset();
  config.validate();
  if (split.dev.empty()) throw ConfigError("alpha tuning requires a dev split");

  const ThetaMode theta = config.theta_mode.value_or(ThetaMode::Zero);
  const TrainedModels models = train_models(config, split);

  double best_alpha = alpha_grid().front();
  double best_accuracy = -1.0;
  for (double alpha : alpha_grid()) {
    const SplitEval dev =
        evaluate_split(models, config.variant, theta, alpha, split.dev, "dev");
    if (dev.accuracy_percent > best_accuracy) {  // ties keep the smaller alpha
      best_accuracy = dev.accuracy_percent;
      best_alpha = alpha;
    }
  }

  EvalReport report;
  report.config = config;
  report.config.alpha = best_alpha;
  report.chosen_alpha = best_alpha;
  report.dev = evaluate_split(models, config.variant, theta, best_alpha,
                              split.dev, "dev");
  report.test = evaluate_split(models, config.variant, theta, best_alpha,
                               split.test, "test");
  return {best_alpha, report};
}

unsigned configured_thread_count() {
  if (const char* env = std::getenv("CONVOTE_THREADS")) {
    const long value = std::strtol(env, nullptr, 10);
    if (value >= 1) return static_cast<unsigned>(value);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

void write_result_records(std::ostream& os, const EvalReport& report) {
  const bool agr = variant_uses_agreement(report.config.variant);
  char alpha_buf[32] = "-";
  char theta_buf[8] = "-";
  if (agr) {
    std::snprintf(alpha_buf, sizeof alpha_buf, "%g", report.chosen_alpha);
    std::snprintf(theta_buf, sizeof theta_buf, "%s",
                  report.config.theta_mode.value_or(ThetaMode::Zero) ==
                          ThetaMode::Zero
                      ? "ZERO"
                      : "MEAN");
  }
  for (const SplitEval* split : {&report.dev, &report.test}) {
    char line[256];
    std::snprintf(line, sizeof line, "%s\t%s\t%s\t%s\t%.4f\t%ld\t%llu",
                  variant_name(report.config.variant), theta_buf, alpha_buf,
                  split->split_name.c_str(), split->accuracy_percent,
                  split->n_segments,
                  static_cast<unsigned long long>(report.config.seed));
    os << line << '\n';
  }
}

void write_reference_audit(std::ostream& os,
                           const std::vector<ReferenceAuditRecord>& records) {
  for (const auto& record : records) {
    char line[512];
    std::snprintf(line, sizeof line, "%s\t%s\t%s\t%.6f\t%.6f\t%.6f\t%s",
                  record.debate_id.c_str(), record.source_speaker.c_str(),
                  record.target_speaker.c_str(), record.d_r, record.theta,
                  record.weight,
                  record.gold_same_vote ? (*record.gold_same_vote ? "1" : "0")
                                        : "?");
    os << line << '\n';
  }
}

}  // namespace convote
