#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "predaspect/analysis.hpp"
#include "predaspect/context.hpp"
#include "predaspect/embeddings.hpp"
#include "predaspect/evaluation.hpp"
#include "predaspect/model.hpp"

namespace predaspect::cli {

// Experiment configuration. JSON layout:
//   {"embeddings": {"path", "format", "utf8"},
//    "corpus": {"conllu", "index", "label_set", "name", "merge", "keep"},
//    "context", "protocol", "k", "seed", "stratified", "average",
//    "train": {"c", "tol", "max_iter"}, "out_dir", "threads"}
struct RunConfig {
  std::filesystem::path embeddings;
  EmbeddingFormat embeddings_format = EmbeddingFormat::kWord2VecBinary;
  Utf8Policy utf8 = Utf8Policy::kReject;

  std::filesystem::path conllu;
  std::filesystem::path index;
  std::vector<std::string> label_set;
  std::string name = "dataset";
  std::map<std::string, std::string> merge;
  std::vector<std::string> keep;

  std::string context = "verb";
  std::string protocol = "loo";
  std::size_t k = 10;
  std::uint64_t seed = 0;
  bool stratified = true;
  bool average = false;
  TrainConfig train;

  std::filesystem::path out_dir = "out";
  std::size_t threads = 0;  // 0 = all cores; never changes results
};

RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

// Everything that can influence results; out_dir and threads are left out.
nlohmann::json config_echo(const RunConfig& config);

struct RunResult {
  EvalReport report;
  OovCounts oov;
  std::string input_hash;
  std::filesystem::path report_path;
  std::filesystem::path log_path;
  std::filesystem::path manifest_path;
};

// load -> compose -> protocol -> report.json, predictions.tsv, manifest.json.
RunResult cmd_run(const RunConfig& config);

struct SweepResult {
  std::vector<SweepRow> rows;
  std::filesystem::path tsv_path;
};

SweepResult cmd_sweep(const RunConfig& config, const std::vector<ContextSpec>& contexts);

struct SubsampleOutput {
  std::size_t before = 0;
  std::size_t after = 0;
  std::filesystem::path index_path;
  std::filesystem::path manifest_path;
};

SubsampleOutput cmd_subsample(const RunConfig& config, double max_majority_fraction);

// Statistics of the configured corpus. `profile` names a reference corpus
// to compare against; `contexts` adds PoS distributions of extracted
// contexts (needs the treebank).
nlohmann::json cmd_stats(const RunConfig& config, const std::optional<std::string>& profile,
                         const std::vector<ContextSpec>& contexts);

struct AnalyzeOutput {
  PosAccuracyTable pos;
  GroupAccuracy groups;
  GroupAccuracy groups_weighted;
  std::map<std::string, Metrics> per_verb;
};

AnalyzeOutput cmd_analyze(const std::filesystem::path& log_path,
                          const std::optional<std::filesystem::path>& partition_path,
                          const std::filesystem::path& out_dir);

struct BaselineOutput {
  EvalReport report;
  MajorityClosedForm closed_form;  // from the majority label's share of the evaluated instances
};

// Majority-class baseline under the configured protocol; needs only the index.
BaselineOutput cmd_baseline(const RunConfig& config);

// Loads the configured dataset, applying merge and keep.
Dataset load_configured_dataset(const RunConfig& config, bool need_sentences);

}  // namespace predaspect::cli
