#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "predaspect/context.hpp"
#include "predaspect/corpus.hpp"
#include "predaspect/embeddings.hpp"

namespace predaspect {

struct Contributor {
  std::size_t index = 0;
  std::string form;
  std::string pos;
  bool in_vocabulary = false;

  friend bool operator==(const Contributor&, const Contributor&) = default;
};

// The verb vector plus the sum of its context vectors, with a record of every
// context token that was extracted (in vocabulary or not).
struct ComposedInstance {
  std::vector<double> vector;
  std::string instance_id;
  std::size_t dataset_index = 0;
  std::vector<Contributor> contributors;
  bool target_in_vocabulary = false;
};

struct ComposeOptions {
  // Divide the sum by the number of in-vocabulary vectors. Off by default.
  bool average = false;
};

// Summation runs in double precision: the target vector first, then context
// vectors in ascending token order. Out-of-vocabulary tokens add nothing.
ComposedInstance compose(const Instance& instance, const ContextSpec& spec,
                         const EmbeddingTable& table, const ComposeOptions& options = {});

std::vector<ComposedInstance> compose_batch(const Dataset& dataset, const ContextSpec& spec,
                                            const EmbeddingTable& table,
                                            const ComposeOptions& options = {},
                                            std::size_t threads = 1);

struct OovCounts {
  std::size_t targets_oov = 0;
  std::size_t context_tokens = 0;
  std::size_t context_oov = 0;
};

OovCounts count_oov(const std::vector<ComposedInstance>& composed);

// Debug dump: instance id followed by the vector components.
void write_composed_tsv(std::ostream& out, const std::vector<ComposedInstance>& composed);

}  // namespace predaspect
