#include "predaspect/model.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

#include "predaspect/error.hpp"

namespace predaspect {

void validate(const TrainConfig& config) {
  if (!(config.c > 0.0) || !std::isfinite(config.c)) {
    throw ConfigError("regularization C must be a positive finite number");
  }
  if (!(config.tolerance > 0.0)) throw ConfigError("tolerance must be positive");
  if (config.max_iterations == 0) throw ConfigError("max_iterations must be positive");
}

nlohmann::json to_json(const TrainConfig& config) {
  return {{"c", config.c},
          {"tol", config.tolerance},
          {"max_iter", config.max_iterations},
          {"seed", config.seed}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  if (j.contains("c")) c.c = j.at("c").get<double>();
  if (j.contains("tol")) c.tolerance = j.at("tol").get<double>();
  if (j.contains("max_iter")) c.max_iterations = j.at("max_iter").get<std::size_t>();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::int64_t>();
  validate(c);
  return c;
}

FeatureMatrix FeatureMatrix::from_composed(std::span<const ComposedInstance> composed,
                                           std::span<const std::size_t> rows) {
  const std::size_t cols = composed.empty() ? 0 : composed.front().vector.size();
  FeatureMatrix m(rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& v = composed[rows[r]].vector;
    if (v.size() != cols) throw DataError("composed vectors have inconsistent dimensions");
    std::copy(v.begin(), v.end(), m.row(r).begin());
  }
  return m;
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// log(1 + exp(-m)) without overflow.
double log_loss(double m) { return m > 0.0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m)); }

// 1 / (1 + exp(m)).
double sigmoid_neg(double m) {
  if (m > 0.0) {
    const double e = std::exp(-m);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(m));
}

double sigmoid(double z) { return sigmoid_neg(-z); }

}  // namespace

BinaryLogisticObjective::BinaryLogisticObjective(const FeatureMatrix& x, std::vector<double> y,
                                                 double c)
    : x_(x), y_(std::move(y)), c_(c) {
  if (y_.size() != x_.rows()) throw DataError("label count does not match feature rows");
}

double BinaryLogisticObjective::value(std::span<const double> params) const {
  const std::size_t d = x_.cols();
  const auto w = params.first(d);
  const double b = params[d];
  double loss = 0.0;
  for (std::size_t i = 0; i < x_.rows(); ++i) {
    loss += log_loss(y_[i] * (dot(w, x_.row(i)) + b));
  }
  return 0.5 * dot(w, w) + c_ * loss;
}

double BinaryLogisticObjective::value_and_gradient(std::span<const double> params,
                                                   std::span<double> grad) const {
  const std::size_t d = x_.cols();
  const auto w = params.first(d);
  const double b = params[d];
  std::copy(w.begin(), w.end(), grad.begin());
  grad[d] = 0.0;
  double loss = 0.0;
  for (std::size_t i = 0; i < x_.rows(); ++i) {
    const auto xi = x_.row(i);
    const double m = y_[i] * (dot(w, xi) + b);
    loss += log_loss(m);
    const double coef = -c_ * y_[i] * sigmoid_neg(m);
    for (std::size_t k = 0; k < d; ++k) grad[k] += coef * xi[k];
    grad[d] += coef;
  }
  return 0.5 * dot(w, w) + c_ * loss;
}

std::vector<double> minimize_lbfgs(const BinaryLogisticObjective& objective, double tolerance,
                                   std::size_t max_iterations, OptimizerTrace* trace) {
  constexpr std::size_t kMemory = 10;
  constexpr double kArmijo = 1e-4;
  constexpr int kMaxBacktracks = 60;

  const std::size_t n = objective.num_params();
  std::vector<double> x(n, 0.0), g(n), d(n), xn(n), gn(n);
  double f = objective.value_and_gradient(x, g);

  struct Pair {
    std::vector<double> s, y;
    double rho;
  };
  std::deque<Pair> history;
  std::vector<double> alpha(kMemory);

  OptimizerTrace local;
  local.objective.push_back(f);

  while (local.iterations < max_iterations) {
    if (inf_norm(g) <= tolerance) break;

    // Two-loop recursion: d = -H g.
    for (std::size_t k = 0; k < n; ++k) d[k] = -g[k];
    for (std::size_t j = history.size(); j-- > 0;) {
      alpha[j] = history[j].rho * dot(history[j].s, d);
      for (std::size_t k = 0; k < n; ++k) d[k] -= alpha[j] * history[j].y[k];
    }
    if (!history.empty()) {
      const auto& last = history.back();
      const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
      for (auto& v : d) v *= gamma;
    }
    for (std::size_t j = 0; j < history.size(); ++j) {
      const double beta = history[j].rho * dot(history[j].y, d);
      for (std::size_t k = 0; k < n; ++k) d[k] += (alpha[j] - beta) * history[j].s[k];
    }

    double gd = dot(g, d);
    if (!(gd < 0.0)) {
      history.clear();
      for (std::size_t k = 0; k < n; ++k) d[k] = -g[k];
      gd = dot(g, d);
    }

    double step = history.empty() ? std::min(1.0, 1.0 / std::sqrt(dot(g, g))) : 1.0;
    double fn = 0.0;
    bool accepted = false;
    for (int bt = 0; bt < kMaxBacktracks; ++bt) {
      for (std::size_t k = 0; k < n; ++k) xn[k] = x[k] + step * d[k];
      fn = objective.value_and_gradient(xn, gn);
      if (std::isfinite(fn) && fn <= f + kArmijo * step * gd) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    Pair p{std::vector<double>(n), std::vector<double>(n), 0.0};
    for (std::size_t k = 0; k < n; ++k) {
      p.s[k] = xn[k] - x[k];
      p.y[k] = gn[k] - g[k];
    }
    const double sy = dot(p.s, p.y);
    if (sy > 1e-10 * dot(p.y, p.y)) {
      p.rho = 1.0 / sy;
      if (history.size() == kMemory) history.pop_front();
      history.push_back(std::move(p));
    }
    x.swap(xn);
    g.swap(gn);
    f = fn;
    ++local.iterations;
    local.objective.push_back(f);
  }
  local.final_gradient_norm = inf_norm(g);
  local.converged = local.final_gradient_norm <= tolerance;
  if (trace) *trace = std::move(local);
  return x;
}

bool LinearModel::all_converged() const {
  return std::all_of(traces.begin(), traces.end(), [](const OptimizerTrace& t) { return t.converged; });
}

LinearModel train(const FeatureMatrix& x, std::span<const std::size_t> y,
                  const std::vector<std::string>& labels, const TrainConfig& config) {
  validate(config);
  if (labels.size() < 2) throw DataError("training needs at least 2 class labels");
  if (x.rows() != y.size()) throw DataError("feature rows and labels differ in length");
  if (x.rows() < 2) throw DataError("training needs at least 2 instances");
  std::set<std::size_t> distinct;
  for (auto yi : y) {
    if (yi >= labels.size()) throw DataError("label index out of range");
    distinct.insert(yi);
  }
  if (distinct.size() < 2) {
    throw DataError("training data contains a single distinct label ('" + labels[*distinct.begin()] +
                    "')");
  }
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (double v : x.row(i)) {
      if (!std::isfinite(v)) throw DataError("non-finite feature in training row " + std::to_string(i));
    }
  }

  LinearModel model;
  model.labels = labels;
  model.config = config;
  model.dimension = x.cols();
  model.weights.assign(labels.size(), std::vector<double>(x.cols(), 0.0));
  model.biases.assign(labels.size(), 0.0);

  auto solve = [&](std::size_t positive) {
    std::vector<double> signs(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) signs[i] = y[i] == positive ? 1.0 : -1.0;
    BinaryLogisticObjective obj(x, std::move(signs), config.c);
    OptimizerTrace trace;
    auto params = minimize_lbfgs(obj, config.tolerance, config.max_iterations, &trace);
    model.traces.push_back(std::move(trace));
    return params;
  };

  const std::size_t d = x.cols();
  if (labels.size() == 2) {
    const auto p = solve(1);
    for (std::size_t k = 0; k < d; ++k) {
      model.weights[1][k] = p[k];
      model.weights[0][k] = -p[k];
    }
    model.biases[1] = p[d];
    model.biases[0] = -p[d];
  } else {
    for (std::size_t c = 0; c < labels.size(); ++c) {
      const auto p = solve(c);
      std::copy(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(d), model.weights[c].begin());
      model.biases[c] = p[d];
    }
  }
  return model;
}

LinearModel train(std::span<const ComposedInstance> composed, std::span<const std::string> y,
                  const std::vector<std::string>& labels, const TrainConfig& config) {
  if (composed.size() != y.size()) throw DataError("instances and labels differ in length");
  std::vector<std::size_t> rows(composed.size());
  std::vector<std::size_t> yi(y.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i] = i;
    auto it = std::find(labels.begin(), labels.end(), y[i]);
    if (it == labels.end()) throw DataError("label '" + y[i] + "' is not in the label set");
    yi[i] = static_cast<std::size_t>(it - labels.begin());
  }
  return train(FeatureMatrix::from_composed(composed, rows), yi, labels, config);
}

std::size_t argmax_first(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

Scores predict(const LinearModel& model, std::span<const double> x) {
  if (x.size() != model.dimension) {
    throw DataError("feature vector has " + std::to_string(x.size()) +
                    " components, model expects " + std::to_string(model.dimension));
  }
  Scores s;
  s.scores.resize(model.labels.size());
  s.probabilities.resize(model.labels.size());
  for (std::size_t c = 0; c < model.labels.size(); ++c) {
    s.scores[c] = dot(model.weights[c], x) + model.biases[c];
    s.probabilities[c] = sigmoid(s.scores[c]);
  }
  s.predicted = argmax_first(s.scores);
  return s;
}

nlohmann::json to_json(const LinearModel& model) {
  nlohmann::json j;
  j["labels"] = model.labels;
  j["dimension"] = model.dimension;
  j["weights"] = model.weights;
  j["biases"] = model.biases;
  j["config"] = to_json(model.config);
  nlohmann::json traces = nlohmann::json::array();
  for (const auto& t : model.traces) {
    traces.push_back({{"iterations", t.iterations},
                      {"converged", t.converged},
                      {"gradient_inf_norm", t.final_gradient_norm}});
  }
  j["optimizer"] = traces;
  return j;
}

LinearModel model_from_json(const nlohmann::json& j) {
  LinearModel m;
  try {
    m.labels = j.at("labels").get<std::vector<std::string>>();
    m.dimension = j.at("dimension").get<std::size_t>();
    m.weights = j.at("weights").get<std::vector<std::vector<double>>>();
    m.biases = j.at("biases").get<std::vector<double>>();
    m.config = train_config_from_json(j.at("config"));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed model JSON: ") + e.what());
  }
  if (m.labels.size() < 2 || m.weights.size() != m.labels.size() ||
      m.biases.size() != m.labels.size()) {
    throw FormatError("model JSON needs one weight row and bias per label (at least 2 labels)");
  }
  for (const auto& w : m.weights) {
    if (w.size() != m.dimension) throw FormatError("model weight row has the wrong dimension");
    for (double v : w) {
      if (!std::isfinite(v)) throw FormatError("model JSON contains a non-finite weight");
    }
  }
  return m;
}

MajorityBaseline majority_baseline(std::span<const std::size_t> train_labels,
                                   const std::vector<std::string>& labels) {
  if (train_labels.empty()) throw DataError("majority baseline needs at least one training label");
  MajorityBaseline b;
  b.labels = labels;
  b.counts.assign(labels.size(), 0);
  for (auto y : train_labels) {
    if (y >= labels.size()) throw DataError("label index out of range");
    ++b.counts[y];
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < b.counts.size(); ++c) {
    if (b.counts[c] > b.counts[best]) best = c;
  }
  b.majority = best;
  return b;
}

MajorityClosedForm majority_closed_form(double p) {
  return {p, 2.0 * p / (1.0 + p), 0.0};
}

}  // namespace predaspect
