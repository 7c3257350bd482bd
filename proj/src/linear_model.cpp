#include "convote/linear_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "convote/errors.hpp"

namespace convote {
namespace {

constexpr double kKktTolerance = 1e-6;
constexpr double kRelativeObjectiveTolerance = 1e-6;
constexpr int kStallEpochs = 3;  // consecutive stalled passes before stopping
constexpr int kMaxEpochs = 1000;

struct Solver {
  const std::vector<LabeledVector>& examples;
  std::size_t dim;
  double c;

  std::vector<double> alpha;
  std::vector<double> scores;  // w . x_i, maintained incrementally
  std::vector<double> w;
  std::vector<double> sq_norm;
  // feature -> (example, value), for cheap score propagation
  std::vector<std::vector<std::pair<int, double>>> inverted;
  double sum_alpha = 0.0;

  explicit Solver(const std::vector<LabeledVector>& ex, std::size_t d, double cc)
      : examples(ex), dim(d), c(cc) {
    const std::size_t n = examples.size();
    alpha.assign(n, 0.0);
    scores.assign(n, 0.0);
    w.assign(dim, 0.0);
    sq_norm.assign(n, 0.0);
    inverted.resize(dim);
    for (std::size_t i = 0; i < n; ++i) {
      for (const auto& [index, value] : examples[i].features.entries) {
        if (index < 0 || static_cast<std::size_t>(index) >= dim)
          throw IntegrityError("feature index out of range for model dimension");
        sq_norm[i] += value * value;
        inverted[static_cast<std::size_t>(index)].emplace_back(
            static_cast<int>(i), value);
      }
    }
  }

  bool in_up(std::size_t i) const {
    return (examples[i].label > 0 && alpha[i] < c) ||
           (examples[i].label < 0 && alpha[i] > 0.0);
  }
  bool in_low(std::size_t i) const {
    return (examples[i].label < 0 && alpha[i] < c) ||
           (examples[i].label > 0 && alpha[i] > 0.0);
  }
  // KKT violation score; b cancels out of the m - M gap.
  double violation(std::size_t i) const {
    return static_cast<double>(examples[i].label) - scores[i];
  }

  void apply_delta(std::size_t i, double delta_alpha) {
    if (delta_alpha == 0.0) return;
    const double y = examples[i].label;
    for (const auto& [index, value] : examples[i].features.entries) {
      const double dw = y * delta_alpha * value;
      w[static_cast<std::size_t>(index)] += dw;
      for (const auto& [k, vk] : inverted[static_cast<std::size_t>(index)])
        scores[static_cast<std::size_t>(k)] += dw * vk;
    }
    sum_alpha += delta_alpha;
  }

  bool take_step(std::size_t i, std::size_t j) {
    if (i == j) return false;
    const double yi = examples[i].label;
    const double yj = examples[j].label;
    const double kii = sq_norm[i];
    const double kjj = sq_norm[j];
    const double kij = dot(examples[i].features, examples[j].features);
    const double ei = scores[i] - yi;
    const double ej = scores[j] - yj;
    const double s = yi * yj;

    double lo, hi;
    if (yi != yj) {
      lo = std::max(0.0, alpha[j] - alpha[i]);
      hi = std::min(c, c + alpha[j] - alpha[i]);
    } else {
      lo = std::max(0.0, alpha[i] + alpha[j] - c);
      hi = std::min(c, alpha[i] + alpha[j]);
    }
    if (hi - lo < 1e-15) return false;

    const double eta = kii + kjj - 2.0 * kij;
    double aj_new;
    if (eta > 1e-12) {
      aj_new = std::clamp(alpha[j] + yj * (ei - ej) / eta, lo, hi);
    } else {
      // flat direction: evaluate the dual at both ends and take the better
      const double f1 = yi * ei - alpha[i] * kii - s * alpha[j] * kij;
      const double f2 = yj * ej - alpha[j] * kjj - s * alpha[i] * kij;
      const double l1 = alpha[i] + s * (alpha[j] - lo);
      const double h1 = alpha[i] + s * (alpha[j] - hi);
      const double psi_lo = l1 * f1 + lo * f2 + 0.5 * l1 * l1 * kii +
                            0.5 * lo * lo * kjj + s * lo * l1 * kij;
      const double psi_hi = h1 * f1 + hi * f2 + 0.5 * h1 * h1 * kii +
                            0.5 * hi * hi * kjj + s * hi * h1 * kij;
      if (psi_lo < psi_hi - 1e-12)
        aj_new = lo;
      else if (psi_hi < psi_lo - 1e-12)
        aj_new = hi;
      else
        return false;
    }
    const double daj = aj_new - alpha[j];
    if (std::abs(daj) < 1e-12) return false;
    const double dai = -s * daj;

    alpha[i] += dai;
    alpha[j] = aj_new;
    apply_delta(i, dai);
    apply_delta(j, daj);
    return true;
  }

  double dual_objective() const {
    double wnorm2 = 0.0;
    for (double wi : w) wnorm2 += wi * wi;
    return 0.5 * wnorm2 - sum_alpha;
  }

  double solve_bias() const {
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    double free_sum = 0.0;
    long free_count = 0;
    const double edge = std::min(1e-9, c * 1e-9);
    for (std::size_t i = 0; i < examples.size(); ++i) {
      const double target = violation(i);  // y_i - w.x_i
      const bool at_zero = alpha[i] <= edge;
      const bool at_c = alpha[i] >= c - edge;
      if (!at_zero && !at_c) {
        free_sum += target;
        ++free_count;
      } else if ((examples[i].label > 0 && at_zero) ||
                 (examples[i].label < 0 && at_c)) {
        lower = std::max(lower, target);
      } else {
        upper = std::min(upper, target);
      }
    }
    if (free_count > 0) return free_sum / static_cast<double>(free_count);
    if (std::isinf(lower) && std::isinf(upper)) return 0.0;
    if (std::isinf(lower)) return upper;
    if (std::isinf(upper)) return lower;
    return 0.5 * (lower + upper);
  }
};

}  // namespace

double LinearModel::decision_value(const FeatureVector& v) const {
  double sum = bias;
  for (const auto& [index, value] : v.entries) {
    if (index < 0 || static_cast<std::size_t>(index) >= weights.size())
      throw IntegrityError("feature index out of range for model dimension");
    sum += weights[static_cast<std::size_t>(index)] * value;
  }
  return sum;
}

int LinearModel::predict(const FeatureVector& v) const {
  return decision_value(v) >= 0.0 ? 1 : -1;
}

LinearModel train_linear(const std::vector<LabeledVector>& examples,
                         std::size_t dim, double c, std::uint64_t seed) {
  if (c <= 0.0) throw ConfigError("regularization C must be positive");
  bool has_pos = false, has_neg = false;
  for (const auto& example : examples) {
    if (example.label == 1)
      has_pos = true;
    else if (example.label == -1)
      has_neg = true;
    else
      throw TrainingError("labels must be +1 or -1");
  }
  if (!has_pos || !has_neg)
    throw TrainingError("training requires at least one example of each label");

  Solver solver(examples, dim, c);
  const std::size_t n = examples.size();

  LinearModel model;
  model.regularization_c = c;
  model.training_meta.seed = seed;

  double prev_objective = solver.dual_objective();
  model.training_meta.objective_trace.push_back(prev_objective);

  bool done = false;
  int stalled = 0;
  for (int epoch = 0; epoch < kMaxEpochs && !done; ++epoch) {
    for (std::size_t iter = 0; iter < n; ++iter) {
      // maximal-violating pair, lowest index on ties
      double m = -std::numeric_limits<double>::infinity();
      double mm = std::numeric_limits<double>::infinity();
      std::size_t best_i = n, best_j = n;
      for (std::size_t k = 0; k < n; ++k) {
        const double v = solver.violation(k);
        if (solver.in_up(k) && v > m) {
          m = v;
          best_i = k;
        }
        if (solver.in_low(k) && v < mm) {
          mm = v;
          best_j = k;
        }
      }
      if (best_i == n || best_j == n || m - mm < kKktTolerance) {
        done = true;
        break;
      }
      if (!solver.take_step(best_i, best_j)) {
        // the top pair is stuck; try any other partner that still moves
        bool moved = false;
        for (std::size_t k = 0; k < n && !moved; ++k)
          if (solver.in_low(k)) moved = solver.take_step(best_i, k);
        for (std::size_t k = 0; k < n && !moved; ++k)
          if (solver.in_up(k)) moved = solver.take_step(k, best_j);
        if (!moved) {
          done = true;
          break;
        }
      }
    }
    const double objective = solver.dual_objective();
    model.training_meta.objective_trace.push_back(objective);
    model.training_meta.epochs = epoch + 1;
    if (std::abs(prev_objective - objective) <
        kRelativeObjectiveTolerance * std::max(1.0, std::abs(objective)))
      ++stalled;
    else
      stalled = 0;
    if (stalled >= kStallEpochs) done = true;
    prev_objective = objective;
  }

  model.weights = std::move(solver.w);
  model.bias = solver.solve_bias();
  model.training_meta.final_primal_objective = primal_objective(model, examples);
  return model;
}

double primal_objective(const LinearModel& model,
                        const std::vector<LabeledVector>& examples) {
  double wnorm2 = 0.0;
  for (double wi : model.weights) wnorm2 += wi * wi;
  double hinge = 0.0;
  for (const auto& example : examples) {
    const double margin =
        static_cast<double>(example.label) * model.decision_value(example.features);
    hinge += std::max(0.0, 1.0 - margin);
  }
  return 0.5 * wnorm2 + model.regularization_c * hinge;
}

void LinearModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write model file: " + path.string());
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g\t%.17g", bias, regularization_c);
  out << weights.size() << '\t' << buf << '\n';
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] == 0.0) continue;
    std::snprintf(buf, sizeof buf, "%.17g", weights[i]);
    out << i << '\t' << buf << '\n';
  }
}

LinearModel LinearModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read model file: " + path.string());
  LinearModel model;
  std::string line;
  if (!std::getline(in, line))
    throw ParseError(path.string() + ": missing model header");
  {
    std::istringstream header(line);
    std::size_t dim = 0;
    if (!(header >> dim >> model.bias >> model.regularization_c))
      throw ParseError(path.string() + ": malformed model header");
    model.weights.assign(dim, 0.0);
  }
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream record(line);
    std::size_t index = 0;
    double weight = 0.0;
    if (!(record >> index >> weight) || index >= model.weights.size())
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": malformed weight record");
    model.weights[index] = weight;
  }
  return model;
}

}  // namespace convote
