#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "convote/corpus.hpp"
#include "convote/linear_model.hpp"

namespace convote {

/// A by-name reference from one speaker's segment to another in-debate
/// speaker, with its surrounding context window.
struct ReferenceInstance {
  std::string debate_id;
  int source_segment_index = 0;  // index within the filtered debate
  std::string source_speaker_id;
  std::string target_speaker_id;
  // up to 30 tokens before the match, the name tokens, up to 20 after
  std::vector<std::string> window_tokens;
  std::optional<bool> gold_same_vote;
};

// The debate must already be filtered under the policy appropriate for the
// caller (AgreementMining for link emission, AgreementTrainingWithAmendments
// for classifier training). Matching is longest-match, left-to-right, over
// the declared surface names of speakers who actually speak in the debate.
// Self-references and references to non-speakers produce no instance.
std::vector<ReferenceInstance> extract_references(const Debate& debate);

bool label_reference(Vote source_vote, Vote target_vote);

Vocabulary build_reference_vocabulary(const std::vector<Debate>& train_debates);

// Trains on instances mined under AgreementTrainingWithAmendments; positive
// class = same vote. Instances without both gold votes are skipped.
LinearModel train_agreement_classifier(const std::vector<Debate>& train_debates,
                                       const Vocabulary& vocab_ref, double c,
                                       std::uint64_t seed);

enum class ThetaMode { Zero, Mean };

struct AgreementScore {
  double d_r = 0.0;             // decision value of the agreement classifier
  double sigma_r_debate = 0.0;  // population std dev of d over the debate's references
  double mu_debate = 0.0;       // population mean of d over the debate's references
};

//   0                      d < theta
//   alpha * d / (4 sigma)  theta <= d <= 4 sigma   (clamped to [0, alpha])
//   alpha                  d > 4 sigma
// sigma == 0 degenerates to alpha if d >= theta, else 0.
double agr_weight(const AgreementScore& score, double alpha, ThetaMode mode);

double resolve_theta(const AgreementScore& score, ThetaMode mode);

}  // namespace convote
