#include <cmath>
#include <random>

#include "doctest.h"
#include "predaspect/error.hpp"
#include "predaspect/model.hpp"

using namespace predaspect;

namespace {

FeatureMatrix matrix(const std::vector<std::vector<double>>& rows) {
  FeatureMatrix x(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) x.row(i)[j] = rows[i][j];
  }
  return x;
}

// Direct transcription of the objective, used as the oracle.
double objective_oracle(const FeatureMatrix& x, const std::vector<double>& y, double c,
                        const std::vector<double>& p) {
  const std::size_t d = x.cols();
  double reg = 0.0;
  for (std::size_t j = 0; j < d; ++j) reg += p[j] * p[j];
  double loss = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double z = p[d];
    for (std::size_t j = 0; j < d; ++j) z += p[j] * x.row(i)[j];
    loss += std::log(1.0 + std::exp(-y[i] * z));
  }
  return 0.5 * reg + c * loss;
}

const std::vector<std::string> kAB{"A", "B"};

}  // namespace

TEST_CASE("objective value matches the formula") {
  std::mt19937 rng(1);
  std::normal_distribution<double> g;
  const auto x = matrix({{g(rng), g(rng)}, {g(rng), g(rng)}, {g(rng), g(rng)}});
  const std::vector<double> y{1, -1, 1};
  BinaryLogisticObjective obj(x, y, 0.7);
  const std::vector<double> p{0.3, -1.2, 0.4};
  CHECK(obj.value(p) == doctest::Approx(objective_oracle(x, y, 0.7, p)).epsilon(1e-12));
}

TEST_CASE("gradient matches central differences") {
  std::mt19937 rng(2);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 3 + rng() % 10;
    const std::size_t d = 1 + rng() % 6;
    FeatureMatrix x(n, d);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (auto& v : x.row(i)) v = g(rng);
      y[i] = (rng() % 2) ? 1.0 : -1.0;
    }
    BinaryLogisticObjective obj(x, y, 1.0);
    std::vector<double> p(d + 1), grad(d + 1);
    for (auto& v : p) v = g(rng);
    obj.value_and_gradient(p, grad);
    for (std::size_t j = 0; j <= d; ++j) {
      auto hi = p, lo = p;
      hi[j] += 1e-5;
      lo[j] -= 1e-5;
      const double fd = (obj.value(hi) - obj.value(lo)) / 2e-5;
      CHECK(std::abs(fd - grad[j]) <= 1e-5 * std::max(1.0, std::abs(grad[j])));
    }
  }
}

TEST_CASE("four separable points") {
  const auto x = matrix({{0, 0}, {0, 1}, {2, 0}, {2, 1}});
  const std::vector<std::size_t> y{0, 0, 1, 1};
  const auto m = train(x, y, kAB, TrainConfig{});
  CHECK(m.all_converged());
  REQUIRE(m.traces.size() == 1);
  CHECK(m.traces[0].final_gradient_norm <= 1e-4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(predict(m, x.row(i)).predicted == y[i]);
  const std::vector<double> probe{2, 0.5};
  CHECK(predict(m, probe).predicted == 1);

  // Objective history never increases.
  const auto& h = m.traces[0].objective;
  for (std::size_t i = 1; i < h.size(); ++i) CHECK(h[i] <= h[i - 1]);

  // Brute-force grid over (w1, w2, b): the optimizer must do at least as well.
  const std::vector<double> ypm{-1, -1, 1, 1};
  double best = std::numeric_limits<double>::infinity();
  for (double w1 = -4; w1 <= 4; w1 += 0.05) {
    for (double w2 = -1; w2 <= 1; w2 += 0.05) {
      for (double b = -6; b <= 4; b += 0.05) best = std::min(best, objective_oracle(x, ypm, 1.0, {w1, w2, b}));
    }
  }
  const std::vector<double> solved{m.weights[1][0], m.weights[1][1], m.biases[1]};
  const double got = objective_oracle(x, ypm, 1.0, solved);
  CHECK(got <= best + 1e-9);
  CHECK(got >= best - 0.01);
  // class 0 carries the negated parameters
  CHECK(m.weights[0][0] == -m.weights[1][0]);
  CHECK(m.biases[0] == -m.biases[1]);
}

TEST_CASE("three classes train one problem each") {
  const auto x = matrix({{0, 0}, {0, 0.2}, {3, 0}, {3, 0.2}, {0, 3}, {0.2, 3}});
  const std::vector<std::size_t> y{0, 0, 1, 1, 2, 2};
  const auto m = train(x, y, {"A", "B", "C"}, TrainConfig{});
  CHECK(m.traces.size() == 3);
  for (std::size_t i = 0; i < 6; ++i) CHECK(predict(m, x.row(i)).predicted == y[i]);
}

TEST_CASE("sigmoid probability of score 2") {
  LinearModel m;
  m.labels = kAB;
  m.dimension = 1;
  m.weights = {{-1.0}, {1.0}};
  m.biases = {-1.0, 1.0};
  const std::vector<double> x{1.0};
  const auto s = predict(m, x);
  CHECK(s.scores[1] == 2.0);
  CHECK(s.probabilities[1] == doctest::Approx(0.8808).epsilon(1e-4));
  CHECK(s.predicted == 1);
}

TEST_CASE("ties go to the first label") {
  const std::vector<double> v{0.5, 0.5, 0.1};
  CHECK(argmax_first(v) == 0);
  LinearModel m;
  m.labels = kAB;
  m.dimension = 1;
  m.weights = {{0.0}, {0.0}};
  m.biases = {0.0, 0.0};
  const std::vector<double> x{3.0};
  CHECK(predict(m, x).predicted == 0);
}

TEST_CASE("training errors") {
  const auto x = matrix({{0}, {1}, {2}});
  const std::vector<std::size_t> same{0, 0, 0};
  CHECK_THROWS_AS(train(x, same, kAB, TrainConfig{}), DataError);
  const auto one = matrix({{0}});
  const std::vector<std::size_t> y1{0};
  CHECK_THROWS_AS(train(one, y1, kAB, TrainConfig{}), DataError);
  auto bad = matrix({{0}, {NAN}});
  const std::vector<std::size_t> y2{0, 1};
  CHECK_THROWS_AS(train(bad, y2, kAB, TrainConfig{}), DataError);
  CHECK_THROWS_AS(validate(TrainConfig{0.0, 1e-4, 100, 0}), ConfigError);
  CHECK_THROWS_AS(validate(TrainConfig{1.0, 1e-4, 0, 0}), ConfigError);
}

TEST_CASE("predict rejects a wrong dimension") {
  const auto x = matrix({{0, 0}, {1, 1}});
  const std::vector<std::size_t> y{0, 1};
  const auto m = train(x, y, kAB, TrainConfig{});
  const std::vector<double> wrong{1, 2, 3};
  CHECK_THROWS_AS(predict(m, wrong), DataError);
}

TEST_CASE("model JSON round trip") {
  const auto x = matrix({{0, 1}, {1, 0}, {1, 1}});
  const std::vector<std::size_t> y{0, 1, 1};
  const auto m = train(x, y, kAB, TrainConfig{0.5, 1e-6, 50, 7});
  const auto back = model_from_json(to_json(m));
  CHECK(back.labels == m.labels);
  CHECK(back.weights == m.weights);
  CHECK(back.biases == m.biases);
  CHECK(back.config.c == 0.5);
  CHECK(train_config_from_json(to_json(m.config)).max_iterations == 50);
  CHECK_THROWS_AS(model_from_json(nlohmann::json::object()), FormatError);
}

TEST_CASE("max_iter cap is reported as non-convergence") {
  const auto x = matrix({{0, 0}, {0, 1}, {2, 0}, {2, 1}});
  const std::vector<std::size_t> y{0, 0, 1, 1};
  const auto m = train(x, y, kAB, TrainConfig{1.0, 1e-12, 1, 0});
  CHECK_FALSE(m.all_converged());
}

TEST_CASE("majority baseline and closed forms") {
  const std::vector<std::size_t> y{1, 0, 1, 1};
  const auto b = majority_baseline(y, kAB);
  CHECK(b.majority == 1);
  CHECK(b.counts == std::vector<std::size_t>{1, 3});
  const std::vector<std::size_t> tie{0, 1};
  CHECK(majority_baseline(tie, kAB).majority == 0);

  auto pct = [](double v) { return std::round(1000.0 * v) / 10.0; };
  const auto tel = majority_closed_form(0.82);
  CHECK(pct(tel.accuracy) == 82.0);
  CHECK(pct(tel.majority_f1) == 90.1);
  CHECK(pct(tel.minority_f1) == 0.0);
  CHECK(pct(majority_closed_form(0.78).majority_f1) == 87.6);
  CHECK(pct(majority_closed_form(527.0 / 927.0).majority_f1) == 72.5);
  CHECK(pct(majority_closed_form(279.0 / 527.0).accuracy) == 52.9);
  // F1 of the majority class is 2p / (1 + p)
  for (double p : {0.5, 0.6, 0.9}) CHECK(majority_closed_form(p).majority_f1 == doctest::Approx(2 * p / (1 + p)));
}
