#include "convote/mincut.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <queue>
#include <sstream>

#include "convote/errors.hpp"

namespace convote {
namespace {

constexpr double kFlowEpsilon = 1e-12;

struct FlowNetwork {
  struct Edge {
    int to;
    double cap;
    int rev;
  };
  std::vector<std::vector<Edge>> adj;

  explicit FlowNetwork(int n) : adj(static_cast<std::size_t>(n)) {}

  void add_edge(int u, int v, double cap_uv, double cap_vu) {
    adj[static_cast<std::size_t>(u)].push_back(
        {v, cap_uv, static_cast<int>(adj[static_cast<std::size_t>(v)].size())});
    adj[static_cast<std::size_t>(v)].push_back(
        {u, cap_vu, static_cast<int>(adj[static_cast<std::size_t>(u)].size()) - 1});
  }

  double max_flow(int s, int t) {
    double flow = 0.0;
    std::vector<int> level(adj.size());
    std::vector<std::size_t> iter(adj.size());
    while (bfs(s, t, level)) {
      std::fill(iter.begin(), iter.end(), 0);
      while (true) {
        const double pushed = dfs(s, t, std::numeric_limits<double>::infinity(),
                                  level, iter);
        if (pushed <= kFlowEpsilon) break;
        flow += pushed;
      }
    }
    return flow;
  }

  bool bfs(int s, int t, std::vector<int>& level) {
    std::fill(level.begin(), level.end(), -1);
    std::queue<int> queue;
    level[static_cast<std::size_t>(s)] = 0;
    queue.push(s);
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop();
      for (const auto& edge : adj[static_cast<std::size_t>(u)]) {
        if (edge.cap > kFlowEpsilon && level[static_cast<std::size_t>(edge.to)] < 0) {
          level[static_cast<std::size_t>(edge.to)] =
              level[static_cast<std::size_t>(u)] + 1;
          queue.push(edge.to);
        }
      }
    }
    return level[static_cast<std::size_t>(t)] >= 0;
  }

  double dfs(int u, int t, double limit, const std::vector<int>& level,
             std::vector<std::size_t>& iter) {
    if (u == t) return limit;
    for (auto& i = iter[static_cast<std::size_t>(u)];
         i < adj[static_cast<std::size_t>(u)].size(); ++i) {
      Edge& edge = adj[static_cast<std::size_t>(u)][i];
      if (edge.cap <= kFlowEpsilon ||
          level[static_cast<std::size_t>(edge.to)] !=
              level[static_cast<std::size_t>(u)] + 1)
        continue;
      const double pushed =
          dfs(edge.to, t, std::min(limit, edge.cap), level, iter);
      if (pushed > kFlowEpsilon) {
        edge.cap -= pushed;
        adj[static_cast<std::size_t>(edge.to)][static_cast<std::size_t>(edge.rev)]
            .cap += pushed;
        return pushed;
      }
    }
    return 0.0;
  }

  // nodes that can still reach t through positive residual capacity
  std::vector<bool> co_reachable(int t) const {
    std::vector<bool> seen(adj.size(), false);
    std::queue<int> queue;
    seen[static_cast<std::size_t>(t)] = true;
    queue.push(t);
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop();
      // an edge v->u with residual capacity lets v reach u
      for (const auto& edge : adj[static_cast<std::size_t>(u)]) {
        const auto& reverse =
            adj[static_cast<std::size_t>(edge.to)][static_cast<std::size_t>(edge.rev)];
        if (reverse.cap > kFlowEpsilon && !seen[static_cast<std::size_t>(edge.to)]) {
          seen[static_cast<std::size_t>(edge.to)] = true;
          queue.push(edge.to);
        }
      }
    }
    return seen;
  }
};

}  // namespace

IndScores normalize_ind(const std::vector<double>& decision_values) {
  if (decision_values.empty())
    throw IntegrityError("normalize_ind requires at least one segment");

  const double n = static_cast<double>(decision_values.size());
  double mean = 0.0;
  for (double d : decision_values) mean += d;
  mean /= n;
  double variance = 0.0;
  for (double d : decision_values) variance += (d - mean) * (d - mean);
  variance /= n;  // population convention
  const double sigma = std::sqrt(variance);

  IndScores scores;
  scores.sigma_s = sigma;
  scores.ind_yea.reserve(decision_values.size());
  for (double d : decision_values) {
    double ind;
    if (sigma == 0.0) {
      ind = d > 0.0 ? 1.0 : (d < 0.0 ? 0.0 : 0.5);
    } else if (d > 2.0 * sigma) {
      ind = 1.0;
    } else if (d < -2.0 * sigma) {
      ind = 0.0;
    } else {
      ind = (1.0 + d / (2.0 * sigma)) / 2.0;
    }
    scores.ind_yea.push_back(ind);
  }
  return scores;
}

double DebateGraph::hard_value() const {
  double total = 1.0;
  for (double cap : source_cap) total += cap;
  for (double cap : sink_cap) total += cap;
  for (const auto& link : links)
    if (!link.hard) total += link.strength;
  return total;
}

DebateGraph build_debate_graph(const IndScores& ind,
                               const std::vector<std::string>& segment_speakers,
                               const std::vector<SpeakerAgreementWeight>& agreement,
                               bool hard_agreement,
                               std::vector<std::string>* warnings) {
  const std::size_t n = ind.size();
  if (!segment_speakers.empty() && segment_speakers.size() != n)
    throw IntegrityError("speaker grouping size does not match segment count");
  if (!agreement.empty() && segment_speakers.empty())
    throw IntegrityError("agreement links require a speaker grouping");

  DebateGraph graph;
  graph.source_cap.reserve(n);
  graph.sink_cap.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    graph.source_cap.push_back(ind.ind_yea[i]);
    graph.sink_cap.push_back(ind.ind_nay(i));
  }

  std::map<std::string, std::vector<int>> by_speaker;
  for (std::size_t i = 0; i < segment_speakers.size(); ++i)
    by_speaker[segment_speakers[i]].push_back(static_cast<int>(i));

  // hard chains over consecutive same-speaker segments
  for (const auto& [speaker, indices] : by_speaker)
    for (std::size_t k = 1; k < indices.size(); ++k)
      graph.links.push_back({indices[k - 1], indices[k], 0.0, true});

  // sum agreement weights per unordered speaker pair
  std::map<std::pair<std::string, std::string>, double> pair_weights;
  for (const auto& entry : agreement) {
    if (entry.weight < 0.0)
      throw IntegrityError("agreement weights must be non-negative");
    if (entry.weight == 0.0) continue;
    auto source = by_speaker.find(entry.source_speaker);
    auto target = by_speaker.find(entry.target_speaker);
    if (source == by_speaker.end() || target == by_speaker.end()) {
      if (warnings)
        warnings->push_back("dropped agreement weight " + entry.source_speaker +
                            " -> " + entry.target_speaker +
                            ": speaker has no segments");
      continue;
    }
    if (entry.source_speaker == entry.target_speaker)
      throw IntegrityError("agreement weight with identical endpoints");
    auto key = std::minmax(entry.source_speaker, entry.target_speaker);
    pair_weights[{key.first, key.second}] += entry.weight;
  }
  for (const auto& [pair, weight] : pair_weights) {
    const int u = by_speaker[pair.first].front();  // earliest segments
    const int v = by_speaker[pair.second].front();
    if (hard_agreement)
      graph.links.push_back({u, v, 0.0, true});
    else
      graph.links.push_back({u, v, weight, false});
  }
  return graph;
}

double assignment_cost(const std::vector<Vote>& labels, const DebateGraph& graph) {
  if (labels.size() != graph.size())
    throw IntegrityError("assignment size does not match graph size");
  const double hard = graph.hard_value();
  double cost = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i)
    cost += labels[i] == Vote::Yea ? graph.sink_cap[i] : graph.source_cap[i];
  for (const auto& link : graph.links) {
    if (labels[static_cast<std::size_t>(link.u)] !=
        labels[static_cast<std::size_t>(link.v)])
      cost += link.hard ? hard : link.strength;
  }
  return cost;
}

Assignment max_flow_min_cut(const DebateGraph& graph) {
  const int n = static_cast<int>(graph.size());
  const int source = n;
  const int sink = n + 1;
  const double hard = graph.hard_value();

  FlowNetwork network(n + 2);
  for (int i = 0; i < n; ++i) {
    network.add_edge(source, i, graph.source_cap[static_cast<std::size_t>(i)], 0.0);
    network.add_edge(i, sink, graph.sink_cap[static_cast<std::size_t>(i)], 0.0);
  }
  for (const auto& link : graph.links) {
    const double strength = link.hard ? hard : link.strength;
    network.add_edge(link.u, link.v, strength, strength);
  }

  network.max_flow(source, sink);
  const auto sink_side = network.co_reachable(sink);

  Assignment assignment;
  assignment.labels.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    assignment.labels.push_back(sink_side[static_cast<std::size_t>(i)] ? Vote::Nay
                                                                       : Vote::Yea);
  assignment.achieved_cost = assignment_cost(assignment.labels, graph);
  return assignment;
}

void write_graph(std::ostream& os, const DebateGraph& graph) {
  os << graph.size() << '\n';
  char buf[64];
  for (std::size_t i = 0; i < graph.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu\t%.17g\t%.17g", i, graph.source_cap[i],
                  graph.sink_cap[i]);
    os << buf << '\n';
  }
  for (const auto& link : graph.links) {
    if (link.hard) {
      os << link.u << '\t' << link.v << "\tHARD\n";
    } else {
      std::snprintf(buf, sizeof buf, "%d\t%d\t%.17g", link.u, link.v,
                    link.strength);
      os << buf << '\n';
    }
  }
}

DebateGraph read_graph(std::istream& is) {
  std::size_t n = 0;
  if (!(is >> n)) throw ParseError("graph dump: missing node count");
  DebateGraph graph;
  graph.source_cap.assign(n, 0.0);
  graph.sink_cap.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t index = 0;
    double src = 0.0, snk = 0.0;
    if (!(is >> index >> src >> snk) || index >= n)
      throw ParseError("graph dump: malformed node record");
    graph.source_cap[index] = src;
    graph.sink_cap[index] = snk;
  }
  int u = 0, v = 0;
  std::string strength;
  while (is >> u >> v >> strength) {
    if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= n ||
        static_cast<std::size_t>(v) >= n)
      throw ParseError("graph dump: link endpoint out of range");
    if (strength == "HARD")
      graph.links.push_back({u, v, 0.0, true});
    else
      graph.links.push_back({u, v, std::stod(strength), false});
  }
  return graph;
}

}  // namespace convote
