#include "predaspect/compose.hpp"

#include <iomanip>
#include <ostream>

#include "predaspect/error.hpp"
#include "predaspect/parallel.hpp"

namespace predaspect {
namespace {

void accumulate(std::vector<double>& acc, std::span<const float> v) {
  if (v.size() != acc.size()) {
    throw DataError("embedding dimension mismatch: vector has " + std::to_string(v.size()) +
                    " components, expected " + std::to_string(acc.size()));
  }
  for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += static_cast<double>(v[k]);
}

}  // namespace

ComposedInstance compose(const Instance& instance, const ContextSpec& spec,
                         const EmbeddingTable& table, const ComposeOptions& options) {
  ComposedInstance out;
  out.instance_id = instance.id();
  out.vector.assign(table.dimension(), 0.0);
  std::size_t used = 0;

  const auto& tokens = instance.tokens();
  if (auto x = table.lookup(instance.target_token().form)) {
    accumulate(out.vector, *x);
    out.target_in_vocabulary = true;
    ++used;
  }
  for (auto i : extract_context(tokens, instance.target, spec)) {
    const auto& tok = tokens[i];
    Contributor c{i, tok.form, tok.pos, false};
    if (auto v = table.lookup(tok.form)) {
      accumulate(out.vector, *v);
      c.in_vocabulary = true;
      ++used;
    }
    out.contributors.push_back(std::move(c));
  }
  if (options.average && used > 1) {
    for (auto& x : out.vector) x /= static_cast<double>(used);
  }
  return out;
}

std::vector<ComposedInstance> compose_batch(const Dataset& dataset, const ContextSpec& spec,
                                            const EmbeddingTable& table,
                                            const ComposeOptions& options, std::size_t threads) {
  std::vector<ComposedInstance> out(dataset.size());
  parallel_for(dataset.size(), threads, [&](std::size_t i) {
    out[i] = compose(dataset.instances[i], spec, table, options);
    out[i].dataset_index = i;
  });
  return out;
}

OovCounts count_oov(const std::vector<ComposedInstance>& composed) {
  OovCounts c;
  for (const auto& ci : composed) {
    if (!ci.target_in_vocabulary) ++c.targets_oov;
    c.context_tokens += ci.contributors.size();
    for (const auto& k : ci.contributors) {
      if (!k.in_vocabulary) ++c.context_oov;
    }
  }
  return c;
}

void write_composed_tsv(std::ostream& out, const std::vector<ComposedInstance>& composed) {
  const auto old = out.precision(17);
  for (const auto& ci : composed) {
    out << ci.instance_id;
    for (double x : ci.vector) out << '\t' << x;
    out << '\n';
  }
  out.precision(old);
}

}  // namespace predaspect
