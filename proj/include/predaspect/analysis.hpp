#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "predaspect/context.hpp"
#include "predaspect/evaluation.hpp"

namespace predaspect {

struct PosParticipation {
  std::size_t correct = 0;
  std::size_t incorrect = 0;
  double accuracy = 0.0;  // correct / (correct + incorrect)
};

// Tags that never took part in a classification are absent.
using PosAccuracyTable = std::map<std::string, PosParticipation>;

// Counts every context-token occurrence by PoS tag, split by whether the
// instance it belonged to was classified correctly.
PosAccuracyTable pos_accuracy(std::span<const Prediction> log);

struct TagClassPartition {
  std::set<std::string> closed;
  std::set<std::string> open;

  // Penn Treebank function-word / content-word tags.
  static TagClassPartition penn_treebank();
  // penn_treebank() plus the UPOS tags it maps to: ADP, AUX, CCONJ, DET,
  // INTJ, PART, PRON, SCONJ closed; ADJ, ADV, NOUN, NUM, PROPN, VERB open.
  static TagClassPartition with_upos_fallback();
  static TagClassPartition from_json(const nlohmann::json& j);
  static TagClassPartition load(const std::filesystem::path& path);
};

struct GroupAccuracy {
  std::optional<double> closed;
  std::optional<double> open;
};

// Unweighted mean of per-tag accuracies within each group.
GroupAccuracy class_group_accuracy(const PosAccuracyTable& table, const TagClassPartition& partition);
// Occurrence-weighted variant: pooled correct / pooled participations.
GroupAccuracy class_group_accuracy_weighted(const PosAccuracyTable& table,
                                            const TagClassPartition& partition);

std::map<std::string, std::size_t> pos_distribution(const Dataset& dataset, const ContextSpec& spec);

std::map<std::string, Metrics> per_verb_report(std::span<const Prediction> log,
                                               const std::vector<std::string>& labels);

// "1,2,3,5,10,verb,sentence" -> window specs plus the verb-only and
// full-sentence end points.
std::vector<ContextSpec> parse_sweep_points(std::string_view text);

struct SweepRow {
  ContextSpec context;
  EvalReport report;
};

// One evaluation per context, all with the same protocol, config and seed.
std::vector<SweepRow> window_sweep(const Dataset& dataset, const std::vector<ContextSpec>& contexts,
                                   const Protocol& protocol, const EmbeddingTable& table,
                                   const TrainConfig& config, const EvalOptions& options = {});

// Columns: context_kind, size, accuracy, f1:<label>...
void write_sweep_tsv(std::ostream& out, const std::vector<std::string>& labels,
                     const std::vector<SweepRow>& rows, const std::string& input_hash = "");

void write_pos_accuracy_tsv(std::ostream& out, const PosAccuracyTable& table,
                            const TagClassPartition& partition);
void write_per_verb_tsv(std::ostream& out, const std::vector<std::string>& labels,
                        const std::map<std::string, Metrics>& report);

}  // namespace predaspect
