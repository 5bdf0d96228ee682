#include <algorithm>
#include <random>
#include <sstream>

#include "doctest.h"
#include "predaspect/analysis.hpp"
#include "predaspect/error.hpp"
#include "support.hpp"

using namespace predaspect;

namespace {

Prediction row(bool correct, std::vector<std::string> tags, std::string lemma = "v") {
  Prediction p;
  p.gold = "a";
  p.predicted = correct ? "a" : "b";
  p.correct = correct;
  p.verb_lemma = lemma;
  for (std::size_t i = 0; i < tags.size(); ++i) p.contributors.push_back({i, "w", tags[i], true});
  return p;
}

Dataset jane_dataset() {
  static const auto sentences = parse_conllu(testing::data_path("jane.conllu"));
  std::istringstream index(std::string(kIndexHeader) + "\njane\tjane-1\t1\tevent\tdecide\t\n");
  return load_dataset(sentences, index, "jane", {"event", "state"});
}

}  // namespace

TEST_CASE("IN in 8 correct and 2 incorrect contexts") {
  std::vector<Prediction> log;
  for (int i = 0; i < 8; ++i) log.push_back(row(true, {"IN"}));
  for (int i = 0; i < 2; ++i) log.push_back(row(false, {"IN", "NN"}));
  const auto t = pos_accuracy(log);
  CHECK(t.at("IN").correct == 8);
  CHECK(t.at("IN").incorrect == 2);
  CHECK(t.at("IN").accuracy == 0.8);
  CHECK(t.at("NN").accuracy == 0.0);
  CHECK(t.count("VB") == 0);
}

TEST_CASE("occurrences, not instances, are counted") {
  const std::vector<Prediction> log{row(true, {"DT", "DT"})};
  CHECK(pos_accuracy(log).at("DT").correct == 2);
}

TEST_CASE("random logs match a brute-force recount and ignore row order") {
  std::mt19937 rng(17);
  const std::vector<std::string> tags{"IN", "DT", "NN", "VB", "RB", "TO"};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Prediction> log;
    std::map<std::string, std::pair<std::size_t, std::size_t>> oracle;
    std::size_t occurrences = 0;
    for (int r = 0; r < 50; ++r) {
      const bool ok = rng() % 2;
      std::vector<std::string> ctx;
      for (std::size_t j = rng() % 5; j > 0; --j) {
        ctx.push_back(tags[rng() % tags.size()]);
        (ok ? oracle[ctx.back()].first : oracle[ctx.back()].second)++;
        ++occurrences;
      }
      log.push_back(row(ok, ctx));
    }
    const auto t = pos_accuracy(log);
    REQUIRE(t.size() == oracle.size());
    std::size_t total = 0;
    for (const auto& [tag, c] : oracle) {
      CHECK(t.at(tag).correct == c.first);
      CHECK(t.at(tag).incorrect == c.second);
      CHECK(t.at(tag).accuracy == static_cast<double>(c.first) / static_cast<double>(c.first + c.second));
      total += c.first + c.second;
    }
    CHECK(total == occurrences);
    std::shuffle(log.begin(), log.end(), rng);
    const auto u = pos_accuracy(log);
    for (const auto& [tag, p] : t) {
      CHECK(u.at(tag).correct == p.correct);
      CHECK(u.at(tag).incorrect == p.incorrect);
    }
  }
}

TEST_CASE("closed/open group averages") {
  PosAccuracyTable t;
  t["TO"] = {9, 1, 0.9};
  t["IN"] = {7, 3, 0.7};
  const auto g = class_group_accuracy(t, TagClassPartition::penn_treebank());
  REQUIRE(g.closed);
  CHECK(*g.closed == doctest::Approx(0.8));
  CHECK_FALSE(g.open);

  t["NN"] = {1, 3, 0.25};
  t["VB"] = {3, 1, 0.75};
  t["IN"] = {70, 30, 0.7};
  const auto u = class_group_accuracy(t, TagClassPartition::penn_treebank());
  CHECK(*u.closed == doctest::Approx(0.8));
  CHECK(*u.open == doctest::Approx(0.5));
  const auto w = class_group_accuracy_weighted(t, TagClassPartition::penn_treebank());
  CHECK(*w.closed == doctest::Approx(79.0 / 110.0));
  CHECK(*w.open == doctest::Approx(0.5));

  PosAccuracyTable only_open;
  only_open["NN"] = {1, 1, 0.5};
  CHECK_FALSE(class_group_accuracy(only_open, TagClassPartition::penn_treebank()).closed);
}

TEST_CASE("partitions") {
  const auto ptb = TagClassPartition::penn_treebank();
  CHECK(ptb.closed.count("IN"));
  CHECK(ptb.open.count("NN"));
  const auto up = TagClassPartition::with_upos_fallback();
  CHECK(up.closed.count("ADP"));
  CHECK(up.open.count("NOUN"));
  const auto custom = TagClassPartition::from_json({{"closed", {"X"}}, {"open", {"Y"}}});
  CHECK(custom.closed == std::set<std::string>{"X"});
  CHECK_THROWS_AS(TagClassPartition::from_json({{"closed", {"X"}}, {"open", {"X"}}}), ConfigError);
  CHECK_THROWS_AS(TagClassPartition::from_json({{"closed", 3}}), ConfigError);
}

TEST_CASE("PoS distribution of extracted contexts") {
  const auto ds = jane_dataset();
  CHECK(pos_distribution(ds, ContextSpec::window_of(1)) == std::map<std::string, std::size_t>{{"NNP", 1}, {"TO", 1}});
  CHECK(pos_distribution(ds, ContextSpec::dep_full()) == std::map<std::string, std::size_t>{{"NNP", 1}, {"VB", 1}});
  CHECK(pos_distribution(ds, ContextSpec::verb_only()).empty());
}

TEST_CASE("per-verb report") {
  std::vector<Prediction> log{row(true, {}, "go"), row(true, {}, "go"), row(false, {}, "be"), row(true, {}, "be"),
                              row(false, {}, "be")};
  const auto r = per_verb_report(log, {"a", "b"});
  CHECK(r.at("go").accuracy == 1.0);
  std::size_t support = 0;
  double weighted = 0.0;
  for (const auto& [lemma, m] : r) {
    support += m.total;
    weighted += m.accuracy * static_cast<double>(m.total);
  }
  CHECK(support == log.size());
  CHECK(weighted / static_cast<double>(support) == doctest::Approx(compute_metrics(log, {"a", "b"}).accuracy));
}

TEST_CASE("sweep points") {
  const auto p = parse_sweep_points("1,2,3,5,10");
  CHECK(p.size() == 5);
  CHECK(p[3] == ContextSpec::window_of(5));
  const auto q = parse_sweep_points("verb,1,sentence");
  CHECK(q.front() == ContextSpec::verb_only());
  CHECK(q.back() == ContextSpec::full_sentence());
  CHECK(parse_sweep_points("0") == std::vector<ContextSpec>{ContextSpec::verb_only()});
  CHECK_THROWS_AS(parse_sweep_points("x"), ConfigError);
  CHECK_THROWS_AS(parse_sweep_points("-1"), ConfigError);
  CHECK_THROWS_AS(parse_sweep_points(""), ConfigError);
}

TEST_CASE("sweep rows equal direct runs and do not depend on each other") {
  const auto ds = load_dataset(testing::data_path("fixture.conllu"), testing::data_path("fixture_index.tsv"),
                               "fixture", {"state", "event"});
  const auto table = load_glove_text(testing::data_path("fixture_vectors.txt"));
  const auto proto = parse_protocol("kfold:4");
  const TrainConfig cfg;
  const EvalOptions opts{ClassifierKind::kLogistic, 3, true, 2};
  const auto rows = window_sweep(ds, parse_sweep_points("1,2,sentence"), proto, table, cfg, opts);
  REQUIRE(rows.size() == 3);
  const auto direct1 = evaluate(ds, ContextSpec::window_of(1), table, proto, cfg, opts);
  CHECK(to_json(rows[0].report).dump() == to_json(direct1).dump());
  const auto direct_s = evaluate(ds, ContextSpec::full_sentence(), table, proto, cfg, opts);
  CHECK(to_json(rows[2].report).dump() == to_json(direct_s).dump());
  const auto fewer = window_sweep(ds, parse_sweep_points("2"), proto, table, cfg, opts);
  CHECK(to_json(fewer[0].report).dump() == to_json(rows[1].report).dump());

  std::ostringstream out;
  write_sweep_tsv(out, ds.label_set, rows);
  std::istringstream in(out.str());
  std::string header, first, second, third;
  std::getline(in, header);
  std::getline(in, first);
  std::getline(in, second);
  std::getline(in, third);
  CHECK(header == "context_kind\tsize\taccuracy\tf1:state\tf1:event");
  CHECK(first.rfind("window\t1\t", 0) == 0);
  CHECK(third.rfind("sentence\tinf\t", 0) == 0);
}

TEST_CASE("TSV writers") {
  std::vector<Prediction> log{row(true, {"IN", "NN"}, "go"), row(false, {"IN"}, "be")};
  std::ostringstream pos, verbs;
  write_pos_accuracy_tsv(pos, pos_accuracy(log), TagClassPartition::penn_treebank());
  CHECK(pos.str().find("IN") != std::string::npos);
  write_per_verb_tsv(verbs, {"a", "b"}, per_verb_report(log, {"a", "b"}));
  CHECK(verbs.str().find("go") != std::string::npos);
}
