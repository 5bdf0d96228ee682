#include <map>
#include <random>
#include <set>

#include "doctest.h"
#include "predaspect/error.hpp"
#include "predaspect/resample.hpp"

using namespace predaspect;

namespace {

struct Group {
  std::string lemma;
  std::size_t event;
  std::size_t state;
  std::optional<Split> split;
};

Dataset build(const std::vector<Group>& groups) {
  Dataset ds;
  ds.name = "syn";
  ds.label_set = {"event", "state"};
  std::size_t n = 0;
  for (const auto& g : groups) {
    for (std::size_t i = 0; i < g.event + g.state; ++i, ++n) {
      Instance inst;
      inst.doc_id = "d";
      inst.sent_id = "s" + std::to_string(n);
      inst.label = i < g.event ? "event" : "state";
      inst.verb_lemma = g.lemma;
      inst.split = g.split;
      ds.instances.push_back(inst);
    }
  }
  return ds;
}

std::map<std::string, std::map<std::string, std::size_t>> counts(const Dataset& ds) {
  std::map<std::string, std::map<std::string, std::size_t>> out;
  for (const auto& inst : ds.instances) {
    const std::string key = (inst.split ? to_string(*inst.split) : "") + "/" + inst.verb_lemma;
    out[key][inst.label]++;
  }
  return out;
}

}  // namespace

TEST_CASE("be, run and look") {
  const auto ds = build({{"be", 0, 7, {}}, {"run", 5, 1, {}}, {"look", 3, 2, {}}});
  const auto r = subsample_ambiguous(ds, 0.6, 1);
  const auto c = counts(r.dataset);
  CHECK(c.count("/be") == 0);
  CHECK(c.at("/run").at("event") == 1);
  CHECK(c.at("/run").at("state") == 1);
  CHECK(c.at("/look").at("event") == 3);
  CHECK(c.at("/look").at("state") == 2);
  CHECK(r.dataset.size() == 7);
  REQUIRE(r.lemmas.size() == 3);
  CHECK(r.lemmas[0].lemma == "be");
  CHECK(r.lemmas[0].after.empty());
}

TEST_CASE("majority cap") {
  CHECK(majority_cap(1, 0.6) == 1);
  CHECK(majority_cap(2, 0.6) == 3);
  CHECK(majority_cap(4, 0.6) == 6);
  CHECK(majority_cap(3, 0.5) == 3);
  CHECK(majority_cap(1, 0.75) == 3);
}

TEST_CASE("splits are handled independently") {
  const auto ds = build({{"go", 4, 0, Split::kTrain}, {"go", 1, 1, Split::kTest}});
  const auto r = subsample_ambiguous(ds, 0.6, 0);
  const auto c = counts(r.dataset);
  CHECK(c.count("train/go") == 0);
  CHECK(c.at("test/go").at("event") == 1);
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(subsample_ambiguous(build({{"be", 0, 3, {}}}), 0.6, 0), DataError);
  auto three = build({{"a", 2, 2, {}}});
  three.label_set.push_back("other");
  CHECK_THROWS_AS(subsample_ambiguous(three, 0.6, 0), DataError);
  CHECK_THROWS_AS(subsample_ambiguous(build({{"a", 2, 2, {}}}), 0.4, 0), ConfigError);
  CHECK_THROWS_AS(subsample_ambiguous(build({{"a", 2, 2, {}}}), 1.0, 0), ConfigError);
}

TEST_CASE("random datasets keep the invariants") {
  std::mt19937 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Group> groups;
    const int lemmas = 2 + rng() % 8;
    for (int l = 0; l < lemmas; ++l) {
      groups.push_back({"v" + std::to_string(l), rng() % 9, rng() % 9,
                        rng() % 2 ? std::optional<Split>(Split::kTrain) : std::optional<Split>(Split::kTest)});
    }
    groups.push_back({"anchor", 2, 2, Split::kTrain});
    const auto ds = build(groups);
    const auto r = subsample_ambiguous(ds, 0.6, trial);
    std::set<std::string> input_ids;
    for (const auto& i : ds.instances) input_ids.insert(i.id());
    for (const auto& i : r.dataset.instances) CHECK(input_ids.count(i.id()) == 1);
    for (const auto& [key, c] : counts(r.dataset)) {
      REQUIRE(c.size() == 2);
      const auto big = std::max(c.at("event"), c.at("state"));
      const auto small = std::min(c.at("event"), c.at("state"));
      CHECK(big <= (3 * small) / 2);
    }
    const auto again = subsample_ambiguous(ds, 0.6, trial);
    CHECK(nlohmann::json(manifest_json(again)).dump() == manifest_json(r).dump());
    const auto twice = subsample_ambiguous(r.dataset, 0.6, trial + 100);
    CHECK(twice.dataset.size() == r.dataset.size());
  }
}

TEST_CASE("manifest lists threshold and seed") {
  const auto r = subsample_ambiguous(build({{"run", 5, 1, {}}}), 0.6, 42);
  const auto j = manifest_json(r);
  CHECK(j.at("seed").get<std::uint64_t>() == 42);
  CHECK(j.at("max_majority_fraction").get<double>() == 0.6);
}
