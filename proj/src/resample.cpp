#include "predaspect/resample.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "predaspect/error.hpp"
#include "predaspect/random.hpp"

namespace predaspect {

std::size_t majority_cap(std::size_t minority, double f) {
  const double ratio = f / (1.0 - f);
  return static_cast<std::size_t>(std::floor(ratio * static_cast<double>(minority) + 1e-9));
}

SubsampleResult subsample_ambiguous(const Dataset& dataset, double max_majority_fraction,
                                    std::uint64_t seed) {
  if (dataset.label_set.size() != 2) {
    throw DataError("subsampling needs a 2-class dataset, " + dataset.name + " has " +
                    std::to_string(dataset.label_set.size()) + " labels");
  }
  if (!(max_majority_fraction >= 0.5 && max_majority_fraction < 1.0)) {
    throw ConfigError("max majority fraction must lie in [0.5, 1)");
  }

  // (split, lemma) -> per-label member indices, in dataset order.
  std::map<std::pair<std::string, std::string>, std::array<std::vector<std::size_t>, 2>> groups;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& inst = dataset.instances[i];
    const std::string split = inst.split ? to_string(*inst.split) : "";
    groups[{split, inst.verb_lemma}][dataset.label_index(inst.label)].push_back(i);
  }

  SubsampleResult result;
  result.max_majority_fraction = max_majority_fraction;
  result.seed = seed;
  SeededRng rng(seed);
  std::vector<char> keep(dataset.size(), 0);
  const auto& labels = dataset.label_set;

  for (auto& [key, members] : groups) {
    LemmaResampleRecord rec;
    rec.split = key.first;
    rec.lemma = key.second;
    for (std::size_t c = 0; c < 2; ++c) {
      if (!members[c].empty()) rec.before[labels[c]] = members[c].size();
    }
    if (!members[0].empty() && !members[1].empty()) {
      const std::size_t major = members[0].size() >= members[1].size() ? 0 : 1;
      const std::size_t minor = 1 - major;
      const auto cap = majority_cap(members[minor].size(), max_majority_fraction);
      if (members[major].size() > cap) {
        auto chosen = members[major];
        rng.shuffle(chosen);
        chosen.resize(cap);
        members[major] = std::move(chosen);
      }
      for (const auto& m : members) {
        for (auto i : m) keep[i] = 1;
      }
      for (std::size_t c = 0; c < 2; ++c) rec.after[labels[c]] = members[c].size();
    }
    result.lemmas.push_back(std::move(rec));
  }

  result.dataset.name = dataset.name;
  result.dataset.label_set = dataset.label_set;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (keep[i]) result.dataset.instances.push_back(dataset.instances[i]);
  }
  if (result.dataset.empty()) {
    throw DataError("subsampling " + dataset.name + " left no instances (no lemma has both labels)");
  }
  return result;
}

nlohmann::json manifest_json(const SubsampleResult& result) {
  nlohmann::json j;
  j["seed"] = result.seed;
  j["max_majority_fraction"] = result.max_majority_fraction;
  j["instances_after"] = result.dataset.size();
  nlohmann::json lemmas = nlohmann::json::array();
  for (const auto& r : result.lemmas) {
    lemmas.push_back({{"split", r.split}, {"lemma", r.lemma}, {"before", r.before}, {"after", r.after}});
  }
  j["lemmas"] = lemmas;
  return j;
}

}  // namespace predaspect
