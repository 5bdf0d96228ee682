#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "predaspect/compose.hpp"

namespace predaspect {

struct TrainConfig {
  double c = 1.0;  // inverse regularization strength
  double tolerance = 1e-4;
  std::size_t max_iterations = 100;
  std::int64_t seed = 0;
};

void validate(const TrainConfig& config);
nlohmann::json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& j);

// Dense row-major design matrix.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  static FeatureMatrix from_composed(std::span<const ComposedInstance> composed,
                                     std::span<const std::size_t> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(data_).subspan(i * cols_, cols_);
  }
  std::span<double> row(std::size_t i) { return std::span<double>(data_).subspan(i * cols_, cols_); }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Binary L2-regularised logistic loss over parameters [w_1..w_d, b]:
//   0.5 * |w|^2 + C * sum_i log(1 + exp(-y_i (w . x_i + b))),  y_i in {-1, +1}.
// The bias is not regularised.
class BinaryLogisticObjective {
 public:
  BinaryLogisticObjective(const FeatureMatrix& x, std::vector<double> y, double c);

  std::size_t num_params() const noexcept { return x_.cols() + 1; }

  double value(std::span<const double> params) const;
  // Returns the value and writes the gradient into `grad`.
  double value_and_gradient(std::span<const double> params, std::span<double> grad) const;

 private:
  const FeatureMatrix& x_;
  std::vector<double> y_;
  double c_;
};

struct OptimizerTrace {
  std::size_t iterations = 0;
  bool converged = false;
  double final_gradient_norm = 0.0;  // infinity norm
  std::vector<double> objective;     // one value per accepted iterate, starting at 0
};

// Deterministic L-BFGS (memory 10) with Armijo backtracking, started from
// the zero vector. Stops once the gradient infinity norm drops to
// `tolerance` or after `max_iterations` updates.
std::vector<double> minimize_lbfgs(const BinaryLogisticObjective& objective, double tolerance,
                                   std::size_t max_iterations, OptimizerTrace* trace = nullptr);

struct LinearModel {
  std::vector<std::string> labels;
  std::vector<std::vector<double>> weights;  // one row per label
  std::vector<double> biases;
  TrainConfig config;
  std::size_t dimension = 0;
  std::vector<OptimizerTrace> traces;  // one per trained binary problem

  bool all_converged() const;
};

// One-vs-rest training. `y` holds indices into `labels`. For two labels a
// single binary problem is solved and the first class gets the negated
// parameters, which is what per-class training would produce as well.
LinearModel train(const FeatureMatrix& x, std::span<const std::size_t> y,
                  const std::vector<std::string>& labels, const TrainConfig& config);

LinearModel train(std::span<const ComposedInstance> composed, std::span<const std::string> y,
                  const std::vector<std::string>& labels, const TrainConfig& config);

struct Scores {
  std::vector<double> scores;
  std::vector<double> probabilities;  // per-class sigmoid, for logging only
  std::size_t predicted = 0;          // argmax of scores, first label on ties
};

Scores predict(const LinearModel& model, std::span<const double> x);

std::size_t argmax_first(std::span<const double> values);

nlohmann::json to_json(const LinearModel& model);
LinearModel model_from_json(const nlohmann::json& j);

// Constant classifier predicting the most frequent training label.
struct MajorityBaseline {
  std::vector<std::string> labels;
  std::size_t majority = 0;
  std::vector<std::size_t> counts;
};

MajorityBaseline majority_baseline(std::span<const std::size_t> train_labels,
                                   const std::vector<std::string>& labels);

struct MajorityClosedForm {
  double accuracy = 0.0;
  double majority_f1 = 0.0;
  double minority_f1 = 0.0;
};

// Expected metrics of the majority classifier when the majority class makes
// up fraction p of the test data.
MajorityClosedForm majority_closed_form(double p);

}  // namespace predaspect
