#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "predaspect/corpus.hpp"

namespace predaspect {

struct LemmaResampleRecord {
  std::string split;  // "train", "test" or "" for untagged instances
  std::string lemma;
  std::map<std::string, std::size_t> before;
  std::map<std::string, std::size_t> after;
};

struct SubsampleResult {
  Dataset dataset;
  double max_majority_fraction = 0.6;
  std::uint64_t seed = 0;
  std::vector<LemmaResampleRecord> lemmas;  // sorted by (split, lemma)
};

// Largest majority count allowed next to `minority` instances:
// floor(f / (1 - f) * minority + 1e-9).
std::size_t majority_cap(std::size_t minority, double max_majority_fraction);

// Keeps only lemmas that occur with both labels and randomly drops
// majority-label instances of each lemma until the majority count is at most
// majority_cap(minority). Splits are handled independently. Surviving
// instances keep their original order.
SubsampleResult subsample_ambiguous(const Dataset& dataset, double max_majority_fraction = 0.6,
                                    std::uint64_t seed = 0);

nlohmann::json manifest_json(const SubsampleResult& result);

}  // namespace predaspect
