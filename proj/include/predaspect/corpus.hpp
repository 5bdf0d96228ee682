#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace predaspect {

struct Token {
  std::size_t index = 0;           // 0-based position in the sentence
  std::string form;
  std::string pos;                 // XPOS when present, else UPOS
  std::optional<std::size_t> head; // absent for the root
  std::string deprel;

  // Remaining CoNLL-U columns, kept verbatim for re-serialization.
  std::string lemma;
  std::string upos;
  std::string xpos;
  std::string feats;
  std::string deps;
  std::string misc;
};

struct Sentence {
  std::string sent_id;
  std::string doc_id;
  std::vector<Token> tokens;

  std::size_t size() const noexcept { return tokens.size(); }
  std::optional<std::size_t> root() const;
  std::vector<std::size_t> children(std::size_t index) const;
};

// Reads CoNLL-U. Multiword ranges ("3-4") and empty nodes ("5.1") are
// skipped. Every sentence is checked to form a single tree.
std::vector<Sentence> parse_conllu(const std::filesystem::path& path);
std::vector<Sentence> parse_conllu(std::istream& in, const std::string& source_name);

// Writes word lines (plus sent_id / newdoc comments) back out as CoNLL-U.
void write_conllu(std::ostream& out, const std::vector<Sentence>& sentences);

enum class Split { kTrain, kTest };

std::string to_string(Split split);

struct Instance {
  std::string doc_id;
  std::string sent_id;
  std::size_t target = 0;
  std::string label;
  std::string verb_lemma;
  std::optional<Split> split;
  // Null only for datasets loaded from an index without a treebank.
  std::shared_ptr<const Sentence> sentence;

  // "doc_id:sent_id:target".
  std::string id() const;
  const std::vector<Token>& tokens() const;
  const Token& target_token() const { return tokens().at(target); }
};

struct Dataset {
  std::string name;
  std::vector<std::string> label_set;
  std::vector<Instance> instances;

  std::size_t size() const noexcept { return instances.size(); }
  bool empty() const noexcept { return instances.empty(); }
  bool has_sentences() const;
  std::size_t label_index(std::string_view label) const;
};

// Throws DataError unless every label is declared and the
// (doc_id, sent_id, target) triples are unique.
void validate(const Dataset& dataset);

// Header of the instance index TSV, tab-separated.
inline constexpr std::string_view kIndexHeader =
    "doc_id\tsent_id\ttarget_index\tlabel\tverb_lemma\tsplit";

// Joins the index rows with the parsed treebank. An empty `label_set` is
// inferred from the index in first-appearance order.
Dataset load_dataset(const std::filesystem::path& conllu_path,
                     const std::filesystem::path& index_path, std::string name,
                     std::vector<std::string> label_set);

Dataset load_dataset(const std::vector<Sentence>& sentences, std::istream& index,
                     std::string name, std::vector<std::string> label_set,
                     const std::string& index_name = "<index>");

// Index-only dataset: instances carry no sentence, which is enough for
// baselines, subsampling and label statistics.
Dataset load_index(const std::filesystem::path& index_path, std::string name,
                   std::vector<std::string> label_set);

void write_index(std::ostream& out, const Dataset& dataset);
void write_index(const std::filesystem::path& path, const Dataset& dataset);

Dataset merge_labels(const Dataset& dataset, const std::map<std::string, std::string>& mapping);
Dataset filter_labels(const Dataset& dataset, const std::set<std::string>& keep);

// Parses "telic=event,atelic=event".
std::map<std::string, std::string> parse_label_mapping(std::string_view spec);

struct LengthStats {
  double mean = 0.0;
  double median = 0.0;
  std::size_t min = 0;
  std::size_t max = 0;
};

struct DatasetStats {
  std::size_t instances = 0;
  std::vector<std::string> labels;
  std::map<std::string, std::size_t> label_counts;
  std::map<std::string, double> label_fractions;
  // Empty when the dataset has no sentences.
  std::map<std::string, LengthStats> length_by_label;
  std::optional<LengthStats> length_overall;
  std::map<std::string, std::size_t> lemma_counts;
  std::map<std::string, std::map<std::string, std::size_t>> lemma_labels;
  std::size_t lemmas_with_multiple_labels = 0;
  double balance_threshold = 0.6;
  std::size_t lemmas_balanced = 0;  // majority fraction <= balance_threshold
  std::map<std::string, std::size_t> split_counts;
};

DatasetStats dataset_stats(const Dataset& dataset, double balance_threshold = 0.6);

nlohmann::json to_json(const DatasetStats& stats);

// Reference corpus counts used to sanity-check a local copy.
struct DatasetProfile {
  std::string name;
  std::optional<std::size_t> instances;
  std::map<std::string, std::size_t> label_counts;
  std::map<std::string, LengthStats> length_by_label;
  std::optional<std::size_t> train_size;
  std::optional<std::size_t> test_size;
};

const std::vector<DatasetProfile>& known_profiles();
const DatasetProfile& find_profile(std::string_view name);

// Human-readable discrepancies between `stats` and `profile`; empty when the
// dataset matches. Means are compared at two decimals.
std::vector<std::string> check_profile(const DatasetStats& stats, const DatasetProfile& profile);

}  // namespace predaspect
