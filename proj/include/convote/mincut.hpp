#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "convote/corpus.hpp"

namespace convote {

/// Per-debate normalized preferences; ind_nay(s) = 1 - ind_yea(s).
struct IndScores {
  std::vector<double> ind_yea;
  double sigma_s = 0.0;  // population std dev of d over the debate's segments

  double ind_nay(std::size_t i) const { return 1.0 - ind_yea[i]; }
  std::size_t size() const { return ind_yea.size(); }
};

//   1                       d > 2 sigma
//   (1 + d / (2 sigma)) / 2 |d| <= 2 sigma
//   0                       d < -2 sigma
// sigma == 0 degenerates to 1 if d > 0, 0 if d < 0, 0.5 if d == 0.
IndScores normalize_ind(const std::vector<double>& decision_values);

struct PairLink {
  int u = 0;
  int v = 0;
  double strength = 0.0;  // ignored when hard
  bool hard = false;
};

struct SpeakerAgreementWeight {
  std::string source_speaker;
  std::string target_speaker;
  double weight = 0.0;
};

/// s-t network: SOURCE->s carries ind(s,Y), s->SINK carries ind(s,N), so a
/// segment placed on the NAY (sink) side pays ind(s,Y) and vice versa.
struct DebateGraph {
  std::vector<double> source_cap;
  std::vector<double> sink_cap;
  std::vector<PairLink> links;

  std::size_t size() const { return source_cap.size(); }
  // Finite stand-in for an "infinite" link: 1 + the sum of every non-hard
  // capacity in the graph, so no minimum cut ever severs it.
  double hard_value() const;
};

// segment_speakers: speaker id per segment; same-speaker segments are chained
// with hard links. Pass an empty vector to omit same-speaker links (then
// agreement must be empty too). Agreement weights are summed per unordered
// speaker pair and attached between the two speakers' earliest segments.
// Weights naming a speaker with no segments are dropped into `warnings`.
DebateGraph build_debate_graph(const IndScores& ind,
                               const std::vector<std::string>& segment_speakers,
                               const std::vector<SpeakerAgreementWeight>& agreement,
                               bool hard_agreement,
                               std::vector<std::string>* warnings = nullptr);

struct Assignment {
  std::vector<Vote> labels;
  double achieved_cost = 0.0;  // always equals assignment_cost(labels, graph)
};

// Exact minimum s-t cut (Dinic). Segments that cannot reach the sink in the
// residual network land on the YEA side, so an exact ind tie goes to YEA.
Assignment max_flow_min_cut(const DebateGraph& graph);

// The cost function evaluated literally: each segment pays the ind of the
// class it was NOT assigned, plus the strength of every link whose endpoints
// received different classes.
double assignment_cost(const std::vector<Vote>& labels, const DebateGraph& graph);

// Debug dump / reload: "n", then "i<TAB>src<TAB>sink" per node, then
// "u<TAB>v<TAB>strength" per link ("HARD" for hard links).
void write_graph(std::ostream& os, const DebateGraph& graph);
DebateGraph read_graph(std::istream& is);

}  // namespace convote
