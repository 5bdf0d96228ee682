#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "predaspect/compose.hpp"
#include "predaspect/corpus.hpp"
#include "predaspect/embeddings.hpp"
#include "predaspect/model.hpp"

namespace predaspect {

struct Prediction {
  std::string instance_id;
  std::size_t dataset_index = 0;
  std::string verb_lemma;
  std::string gold;
  std::string predicted;
  std::vector<double> scores;  // aligned with the run's label order
  bool correct = false;
  bool degenerate = false;  // fold fell back to the majority baseline
  std::vector<Contributor> contributors;
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct Metrics {
  std::vector<std::string> labels;
  std::size_t total = 0;
  double accuracy = 0.0;
  std::vector<ClassMetrics> per_class;
  std::vector<std::vector<std::size_t>> confusion;  // [gold][predicted]
};

// Confusion matrix, accuracy and per-class P/R/F1 with 0/0 taken as 0.
// Throws DataError for an empty log or a label outside `labels`.
Metrics compute_metrics(std::span<const Prediction> predictions,
                        const std::vector<std::string>& labels);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample (n - 1) standard deviation; 0 for a single value
};

MeanStd mean_and_sample_std(std::span<const double> values);

struct Protocol {
  enum class Kind { kLoo, kKFold, kDocCv, kFixed, kVerbHoldout };
  Kind kind = Kind::kLoo;
  std::size_t k = 10;  // folds, for kKFold and kDocCv
};

// `loo`, `kfold:K`, `doc-cv:K`, `fixed`, `verb-holdout`; a bare `kfold` or
// `doc-cv` takes `default_k`.
Protocol parse_protocol(std::string_view text, std::size_t default_k = 10);
std::string to_string(const Protocol& protocol);

enum class ClassifierKind { kLogistic, kMajority };

struct EvalOptions {
  ClassifierKind classifier = ClassifierKind::kLogistic;
  std::uint64_t seed = 0;
  bool stratified = true;
  std::size_t threads = 1;
};

struct FoldResult {
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  bool degenerate = false;
  bool converged = true;
  std::optional<Metrics> metrics;
};

struct GroupResult {
  std::string key;
  Metrics metrics;
};

struct EvalReport {
  std::string protocol;
  std::vector<std::string> labels;
  Metrics pooled;
  std::vector<FoldResult> folds;
  // Present for kfold and doc-cv: fold-level accuracy and per-class
  // precision/recall/F1 summaries.
  std::optional<MeanStd> fold_accuracy;
  std::vector<MeanStd> fold_precision;
  std::vector<MeanStd> fold_recall;
  std::vector<MeanStd> fold_f1;
  std::vector<GroupResult> groups;  // verb holdout: one row per held-out lemma
  std::vector<Prediction> predictions;  // dataset order
  std::size_t degenerate_folds = 0;
  std::size_t unconverged_models = 0;
  std::vector<std::string> warnings;
};

// Fold layouts. Each returns the test-index sets; training sets are their
// complements (except for the fixed split).
std::vector<std::vector<std::size_t>> loo_folds(const Dataset& dataset);
std::vector<std::vector<std::size_t>> kfold_folds(const Dataset& dataset, std::size_t k,
                                                  std::uint64_t seed, bool stratified,
                                                  std::vector<std::string>* warnings = nullptr);
std::vector<std::vector<std::size_t>> document_folds(const Dataset& dataset, std::size_t k,
                                                     std::uint64_t seed);
// Lemmas in sorted order, with the matching test sets.
std::vector<std::pair<std::string, std::vector<std::size_t>>> verb_groups(const Dataset& dataset);

// Per-fold, per-class test counts for stratified k-fold: every entry is the
// floor or ceiling of class_count * fold_size / n, rows sum to the fold
// sizes and columns to the class counts. Result is [fold][class].
std::vector<std::vector<std::size_t>> stratified_fold_counts(std::span<const std::size_t> class_counts,
                                                             std::size_t k);

// `composed` must be aligned with the dataset; it may be empty when the
// classifier is the majority baseline.
EvalReport loo_cv(const Dataset& dataset, std::span<const ComposedInstance> composed,
                  const TrainConfig& config, const EvalOptions& options = {});
EvalReport kfold_cv(const Dataset& dataset, std::span<const ComposedInstance> composed,
                    const TrainConfig& config, std::size_t k, const EvalOptions& options = {});
EvalReport document_cv(const Dataset& dataset, std::span<const ComposedInstance> composed,
                       const TrainConfig& config, std::size_t k, const EvalOptions& options = {});
EvalReport fixed_split(const Dataset& dataset, std::span<const ComposedInstance> composed,
                       const TrainConfig& config, const EvalOptions& options = {});
EvalReport verb_holdout(const Dataset& dataset, std::span<const ComposedInstance> composed,
                        const TrainConfig& config, const EvalOptions& options = {});

EvalReport evaluate(const Dataset& dataset, std::span<const ComposedInstance> composed,
                    const Protocol& protocol, const TrainConfig& config,
                    const EvalOptions& options = {});

// Composes the dataset under `spec` first.
EvalReport evaluate(const Dataset& dataset, const ContextSpec& spec, const EmbeddingTable& table,
                    const Protocol& protocol, const TrainConfig& config,
                    const EvalOptions& options = {});

nlohmann::json to_json(const Metrics& metrics);
nlohmann::json to_json(const EvalReport& report);

// Prediction log TSV. Columns: instance_id, verb_lemma, gold, predicted,
// correct, degenerate, one score:<label> column per label, contributors.
// Contributors are `index:form:pos:in_vocab` records joined by ';', with
// form and pos percent-escaped. Lines starting with '#' are comments.
void write_prediction_log(std::ostream& out, const std::vector<std::string>& labels,
                          std::span<const Prediction> predictions,
                          const std::string& input_hash = "");

struct PredictionLog {
  std::vector<std::string> labels;
  std::vector<Prediction> predictions;
};

PredictionLog read_prediction_log(std::istream& in, const std::string& source = "<log>");
PredictionLog read_prediction_log(const std::filesystem::path& path);

}  // namespace predaspect
