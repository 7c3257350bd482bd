#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "convote/errors.hpp"
#include "convote/linear_model.hpp"

using namespace convote;

namespace {

FeatureVector dense2(double x, double y) {
  FeatureVector v;
  if (x != 0.0) v.entries.emplace_back(0, x);
  if (y != 0.0) v.entries.emplace_back(1, y);
  v.norm = std::sqrt(x * x + y * y);
  return v;
}

struct Point2 {
  double x, y;
  int label;
};

// Exhaustive hard-margin oracle for separable 2-D data: the optimal
// separator is supported by either one point of each class (midpoint
// construction) or two points of one class and one of the other.
double hard_margin_oracle(const std::vector<Point2>& points) {
  double best = -1.0;
  auto feasible = [&](double wx, double wy, double b) {
    for (const auto& p : points)
      if (p.label * (wx * p.x + wy * p.y + b) < 1.0 - 1e-9) return false;
    return true;
  };
  auto consider = [&](double wx, double wy, double b) {
    const double norm = std::sqrt(wx * wx + wy * wy);
    if (norm < 1e-12) return;
    if (feasible(wx, wy, b)) best = std::max(best, 1.0 / norm);
  };
  const std::size_t n = points.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (points[i].label <= points[j].label || i == j) continue;
      // i positive, j negative: w along the difference, margin boundary at each
      const double ux = points[i].x - points[j].x;
      const double uy = points[i].y - points[j].y;
      const double uu = ux * ux + uy * uy;
      if (uu < 1e-18) continue;
      const double wx = 2.0 * ux / uu, wy = 2.0 * uy / uu;
      consider(wx, wy, 1.0 - (wx * points[i].x + wy * points[i].y));
      // two support points on one side, one on the other; the separating
      // direction is perpendicular to the same-class pair
      for (std::size_t k = 0; k < n; ++k) {
        if (k == i || k == j) continue;
        const std::size_t anchor = points[k].label == points[i].label ? i : j;
        const std::size_t other = anchor == i ? j : i;
        const double y = points[anchor].label;
        double dx = points[k].x - points[anchor].x;
        double dy = points[k].y - points[anchor].y;
        double nx = -dy, ny = dx;
        const double denom = nx * (points[anchor].x - points[other].x) +
                             ny * (points[anchor].y - points[other].y);
        if (std::abs(denom) < 1e-12) continue;
        const double t = 2.0 * y / denom;
        consider(t * nx, t * ny,
                 y - t * (nx * points[anchor].x + ny * points[anchor].y));
      }
    }
  }
  return best;
}

}  // namespace

TEST_CASE("separable axis points get correctly signed decisions") {
  std::vector<LabeledVector> data = {{dense2(1, 0), +1}, {dense2(0, 1), -1}};
  LinearModel model = train_linear(data, 2, 1.0, 0);
  CHECK(model.decision_value(dense2(1, 0)) > 0.0);
  CHECK(model.decision_value(dense2(0, 1)) < 0.0);
}

TEST_CASE("identical vectors with both labels stay bounded") {
  std::vector<LabeledVector> data;
  for (int i = 0; i < 4; ++i) {
    data.push_back({dense2(0.5, 0.5), +1});
    data.push_back({dense2(0.5, 0.5), -1});
  }
  LinearModel model = train_linear(data, 2, 1.0, 0);
  CHECK(std::abs(model.decision_value(dense2(0.5, 0.5))) <= 1.0 + 1e-6);
}

TEST_CASE("single-class input and dimension mismatch are errors") {
  std::vector<LabeledVector> one_class = {{dense2(1, 0), +1}, {dense2(0, 1), +1}};
  CHECK_THROWS_AS(train_linear(one_class, 2, 1.0, 0), TrainingError);

  std::vector<LabeledVector> data = {{dense2(1, 0), +1}, {dense2(0, 1), -1}};
  LinearModel model = train_linear(data, 2, 1.0, 0);
  FeatureVector wide;
  wide.entries.emplace_back(5, 1.0);
  CHECK_THROWS_AS(model.decision_value(wide), IntegrityError);
}

TEST_CASE("random separable sets match the hard-margin oracle within 1e-3") {
  std::mt19937_64 rng(2024);
  auto uniform = [&](double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
  };
  for (int trial = 0; trial < 20; ++trial) {
    // random separating direction with a comfortable margin band
    const double angle = uniform(0, 2 * M_PI);
    const double nx = std::cos(angle), ny = std::sin(angle);
    const double offset = uniform(-0.5, 0.5);
    std::vector<Point2> points;
    std::vector<LabeledVector> data;
    for (int i = 0; i < 14; ++i) {
      const int label = i % 2 == 0 ? +1 : -1;
      const double along = uniform(0.4, 2.0) * label;  // >= 0.4 off the plane
      const double across = uniform(-2.0, 2.0);
      const double x = nx * (along + offset) - ny * across;
      const double y = ny * (along + offset) + nx * across;
      points.push_back({x, y, label});
      data.push_back({dense2(x, y), label});
    }
    const double oracle_margin = hard_margin_oracle(points);
    REQUIRE(oracle_margin > 0.0);

    LinearModel model = train_linear(data, 2, 1000.0, 0);
    // C * hinge; a KKT gap of 1e-6 leaves at most ~1e-3 here at C = 1000
    const double penalty =
        primal_objective(model, data) -
        0.5 * (model.weights[0] * model.weights[0] +
               model.weights[1] * model.weights[1]);
    CHECK(penalty <= 0.05);
    const double norm = std::sqrt(model.weights[0] * model.weights[0] +
                                  model.weights[1] * model.weights[1]);
    CHECK(std::abs(1.0 / norm - oracle_margin) <= 1e-3);
  }
}

TEST_CASE("decision value is linear and negation flips it") {
  std::vector<LabeledVector> data = {{dense2(1, 0.2), +1}, {dense2(-0.3, 1), -1}};
  LinearModel model = train_linear(data, 2, 2.0, 0);
  LinearModel negated = model;
  for (double& w : negated.weights) w = -w;
  negated.bias = -negated.bias;
  for (double x : {-1.0, 0.0, 0.7})
    for (double y : {-0.5, 0.0, 1.3})
      CHECK(model.decision_value(dense2(x, y)) ==
            doctest::Approx(-negated.decision_value(dense2(x, y))));

  LinearModel zero;
  zero.weights = {0.0, 0.0};
  CHECK(zero.decision_value(dense2(0, 0)) == 0.0);
  LinearModel scaled;
  scaled.weights = {2.0, 0.0};
  CHECK(scaled.decision_value(dense2(1, 0)) == doctest::Approx(2.0));
}

TEST_CASE("predict maps sign to labels with zero going positive") {
  LinearModel model;
  model.weights = {1.0};
  FeatureVector pos, neg, zero;
  pos.entries.emplace_back(0, 0.7);
  neg.entries.emplace_back(0, -0.7);
  CHECK(model.predict(pos) == +1);
  CHECK(model.predict(neg) == -1);
  CHECK(model.predict(zero) == +1);
}

TEST_CASE("training is deterministic and the objective trace never increases") {
  std::mt19937_64 rng(5);
  std::vector<LabeledVector> data;
  for (int i = 0; i < 60; ++i) {
    const double x = static_cast<double>(rng() % 200) / 100.0 - 1.0;
    const double y = static_cast<double>(rng() % 200) / 100.0 - 1.0;
    data.push_back({dense2(x, y), x + 0.3 * y > 0.1 ? +1 : -1});
  }
  LinearModel a = train_linear(data, 2, 1.0, 7);
  LinearModel b = train_linear(data, 2, 1.0, 7);
  CHECK(a.weights == b.weights);
  CHECK(a.bias == b.bias);

  const auto& trace = a.training_meta.objective_trace;
  REQUIRE(trace.size() >= 2);
  for (std::size_t i = 1; i < trace.size(); ++i)
    CHECK(trace[i] <= trace[i - 1] + 1e-9);
}

TEST_CASE("model persistence round-trip") {
  std::vector<LabeledVector> data = {{dense2(1, 0), +1}, {dense2(0, 1), -1}};
  LinearModel model = train_linear(data, 2, 3.0, 0);
  const auto path = std::filesystem::temp_directory_path() / "convote_model_test.tsv";
  model.save(path);
  LinearModel loaded = LinearModel::load(path);
  CHECK(loaded.weights == model.weights);
  CHECK(loaded.bias == model.bias);
  CHECK(loaded.regularization_c == model.regularization_c);
  std::filesystem::remove(path);
}
