#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "predaspect/error.hpp"
#include "predaspect/evaluation.hpp"
#include "support.hpp"

using namespace predaspect;

namespace {

std::vector<Prediction> log_of(const std::string& gold, const std::string& pred) {
  std::vector<Prediction> out;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    Prediction p;
    p.instance_id = std::to_string(i);
    p.gold = std::string(1, gold[i]);
    p.predicted = std::string(1, pred[i]);
    p.correct = p.gold == p.predicted;
    out.push_back(p);
  }
  return out;
}

Dataset synthetic(std::size_t n, std::size_t docs, std::size_t lemmas, std::uint32_t seed) {
  std::mt19937 rng(seed);
  Dataset ds;
  ds.name = "syn";
  ds.label_set = {"a", "b", "c"};
  for (std::size_t i = 0; i < n; ++i) {
    Instance inst;
    inst.doc_id = "doc" + std::to_string(rng() % docs);
    inst.sent_id = "s" + std::to_string(i);
    inst.label = ds.label_set[rng() % 3 == 0 ? 0 : (rng() % 2 ? 1 : 2)];
    inst.verb_lemma = "v" + std::to_string(rng() % lemmas);
    inst.split = (i % 4 == 0) ? Split::kTest : Split::kTrain;
    ds.instances.push_back(inst);
  }
  return ds;
}

std::vector<ComposedInstance> features(const Dataset& ds) {
  std::vector<ComposedInstance> out;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    ComposedInstance c;
    const auto li = ds.label_index(ds.instances[i].label);
    c.vector = {li == 0 ? 1.0 : 0.0, li == 1 ? 1.0 : 0.0, 0.1 * static_cast<double>(i % 5)};
    c.instance_id = ds.instances[i].id();
    c.dataset_index = i;
    out.push_back(c);
  }
  return out;
}

void check_exact_cover(const std::vector<std::vector<std::size_t>>& folds, std::size_t n) {
  std::vector<int> seen(n, 0);
  for (const auto& f : folds) {
    for (auto i : f) seen.at(i)++;
  }
  for (auto s : seen) CHECK(s == 1);
}

}  // namespace

TEST_CASE("metrics on a five-row log") {
  const auto m = compute_metrics(log_of("AAABB", "ABABA"), {"A", "B"});
  CHECK(m.accuracy == doctest::Approx(0.6));
  CHECK(m.per_class[0].precision == doctest::Approx(2.0 / 3.0));
  CHECK(m.per_class[0].recall == doctest::Approx(2.0 / 3.0));
  CHECK(m.per_class[0].f1 == doctest::Approx(2.0 / 3.0));
  CHECK(m.per_class[1].precision == doctest::Approx(0.5));
  CHECK(m.per_class[1].recall == doctest::Approx(0.5));
  CHECK(m.per_class[1].f1 == doctest::Approx(0.5));
  CHECK(m.confusion == std::vector<std::vector<std::size_t>>{{2, 1}, {1, 1}});
}

TEST_CASE("never-predicted class has zero precision and F1") {
  const auto m = compute_metrics(log_of("AAB", "AAA"), {"A", "B"});
  CHECK(m.per_class[1].precision == 0.0);
  CHECK(m.per_class[1].f1 == 0.0);
  CHECK(m.per_class[1].support == 1);
}

TEST_CASE("metrics errors") {
  CHECK_THROWS_AS(compute_metrics(std::vector<Prediction>{}, {"A"}), DataError);
  CHECK_THROWS_AS(compute_metrics(log_of("AC", "AA"), {"A", "B"}), DataError);
}

TEST_CASE("sample standard deviation") {
  const std::vector<double> v{0.5, 0.7};
  const auto ms = mean_and_sample_std(v);
  CHECK(ms.mean == doctest::Approx(0.6));
  CHECK(ms.std == doctest::Approx(0.1414).epsilon(1e-3));
  const std::vector<double> one{0.3};
  CHECK(mean_and_sample_std(one).std == 0.0);
}

TEST_CASE("protocol parsing") {
  CHECK(parse_protocol("loo").kind == Protocol::Kind::kLoo);
  CHECK(parse_protocol("kfold:5").k == 5);
  CHECK(parse_protocol("kfold", 7).k == 7);
  CHECK(parse_protocol("doc-cv:10").kind == Protocol::Kind::kDocCv);
  CHECK(parse_protocol("fixed").kind == Protocol::Kind::kFixed);
  CHECK(parse_protocol("verb-holdout").kind == Protocol::Kind::kVerbHoldout);
  CHECK(to_string(parse_protocol("kfold:3")) == "kfold:3");
  CHECK_THROWS_AS(parse_protocol("kfold:x"), ConfigError);
  CHECK_THROWS_AS(parse_protocol("bootstrap"), ConfigError);
}

TEST_CASE("stratified fold counts obey floor/ceil bounds") {
  std::mt19937 rng(9);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t classes = 2 + rng() % 3;
    std::vector<std::size_t> counts(classes);
    std::size_t n = 0;
    for (auto& c : counts) n += (c = 1 + rng() % 40);
    const std::size_t k = 2 + rng() % std::min<std::size_t>(9, n - 1);
    if (k > n) continue;
    const auto m = stratified_fold_counts(counts, k);
    REQUIRE(m.size() == k);
    std::vector<std::size_t> col(classes, 0);
    for (std::size_t f = 0; f < k; ++f) {
      const std::size_t size = n / k + (f < n % k ? 1 : 0);
      std::size_t row = 0;
      for (std::size_t c = 0; c < classes; ++c) {
        const double ideal = static_cast<double>(counts[c]) * size / n;
        CHECK(static_cast<double>(m[f][c]) >= std::floor(ideal));
        CHECK(static_cast<double>(m[f][c]) <= std::ceil(ideal));
        row += m[f][c];
        col[c] += m[f][c];
      }
      CHECK(row == size);
    }
    CHECK(col == counts);
  }
}

TEST_CASE("fold layouts cover every instance once") {
  const auto ds = synthetic(103, 11, 6, 4);
  check_exact_cover(loo_folds(ds), ds.size());
  check_exact_cover(kfold_folds(ds, 10, 1, true), ds.size());
  check_exact_cover(kfold_folds(ds, 7, 1, false), ds.size());
  const auto doc = document_folds(ds, 5, 2);
  check_exact_cover(doc, ds.size());
  std::map<std::string, std::set<std::size_t>> doc_fold;
  for (std::size_t f = 0; f < doc.size(); ++f) {
    for (auto i : doc[f]) doc_fold[ds.instances[i].doc_id].insert(f);
  }
  for (const auto& [d, fs] : doc_fold) CHECK(fs.size() == 1);
  std::vector<std::vector<std::size_t>> groups;
  for (const auto& [lemma, idx] : verb_groups(ds)) {
    for (auto i : idx) CHECK(ds.instances[i].verb_lemma == lemma);
    groups.push_back(idx);
  }
  check_exact_cover(groups, ds.size());
}

TEST_CASE("fold layouts depend only on the seed") {
  const auto ds = synthetic(60, 8, 5, 6);
  CHECK(kfold_folds(ds, 5, 3, true) == kfold_folds(ds, 5, 3, true));
  CHECK(document_folds(ds, 4, 3) == document_folds(ds, 4, 3));
  CHECK(kfold_folds(ds, 5, 3, true) != kfold_folds(ds, 5, 4, true));
}

TEST_CASE("too few documents or instances") {
  const auto ds = synthetic(10, 2, 3, 1);
  CHECK_THROWS_AS(document_folds(ds, 3, 0), DataError);
  CHECK_THROWS_AS(kfold_folds(ds, 11, 0, true), DataError);
}

TEST_CASE("small class warns under stratified k-fold") {
  auto ds = synthetic(40, 5, 3, 2);
  for (auto& inst : ds.instances) inst.label = "b";
  ds.instances[0].label = "a";
  std::vector<std::string> warnings;
  kfold_folds(ds, 5, 0, true, &warnings);
  CHECK_FALSE(warnings.empty());
}

TEST_CASE("protocol runners predict each instance once, in dataset order") {
  const auto ds = synthetic(48, 6, 4, 8);
  const auto x = features(ds);
  const TrainConfig cfg;
  for (const auto& proto : {"loo", "kfold:4", "doc-cv:3", "verb-holdout"}) {
    CAPTURE(proto);
    const auto r = evaluate(ds, x, parse_protocol(proto), cfg);
    REQUIRE(r.predictions.size() == ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
      CHECK(r.predictions[i].dataset_index == i);
      CHECK(r.predictions[i].gold == ds.instances[i].label);
    }
    CHECK(r.pooled.total == ds.size());
  }
  const auto fixed = fixed_split(ds, x, cfg);
  CHECK(fixed.predictions.size() == 12);
  for (const auto& p : fixed.predictions) CHECK(ds.instances[p.dataset_index].split == Split::kTest);
}

TEST_CASE("separable features are learned") {
  const auto ds = synthetic(60, 6, 4, 3);
  const auto r = kfold_cv(ds, features(ds), TrainConfig{}, 5);
  CHECK(r.pooled.accuracy == 1.0);
  REQUIRE(r.fold_accuracy);
  CHECK(r.fold_accuracy->mean == 1.0);
  CHECK(r.fold_f1.size() == 3);
}

TEST_CASE("thread count does not change results") {
  const auto ds = synthetic(50, 6, 4, 12);
  auto x = features(ds);
  std::mt19937 rng(1);
  for (auto& c : x) c.vector[2] += std::normal_distribution<double>()(rng);
  const auto a = loo_cv(ds, x, TrainConfig{}, EvalOptions{ClassifierKind::kLogistic, 0, true, 1});
  const auto b = loo_cv(ds, x, TrainConfig{}, EvalOptions{ClassifierKind::kLogistic, 0, true, 6});
  CHECK(to_json(a).dump() == to_json(b).dump());
}

TEST_CASE("degenerate verb-holdout fold falls back to the majority class") {
  Dataset ds;
  ds.name = "deg";
  ds.label_set = {"a", "b"};
  // lemma x: only label a; lemma y: only label b -> each training set has one label
  for (int i = 0; i < 4; ++i) {
    Instance inst;
    inst.doc_id = "d";
    inst.sent_id = "s" + std::to_string(i);
    inst.label = i < 2 ? "a" : "b";
    inst.verb_lemma = i < 2 ? "x" : "y";
    ds.instances.push_back(inst);
  }
  const auto r = verb_holdout(ds, features(ds), TrainConfig{});
  CHECK(r.degenerate_folds == 2);
  for (const auto& p : r.predictions) CHECK(p.degenerate);
  CHECK(r.groups.size() == 2);
  CHECK(r.pooled.accuracy == 0.0);
}

TEST_CASE("majority classifier on a fixed split") {
  Dataset ds;
  ds.name = "maj";
  ds.label_set = {"telic", "atelic"};
  for (int i = 0; i < 100; ++i) {
    Instance inst;
    inst.doc_id = "d";
    inst.sent_id = "s" + std::to_string(i);
    inst.label = (i % 50) < 41 ? "telic" : "atelic";
    inst.verb_lemma = "v";
    inst.split = i < 50 ? Split::kTrain : Split::kTest;
    ds.instances.push_back(inst);
  }
  const auto r = fixed_split(ds, {}, TrainConfig{}, EvalOptions{ClassifierKind::kMajority});
  const auto cf = majority_closed_form(0.82);
  CHECK(r.pooled.accuracy == doctest::Approx(cf.accuracy));
  CHECK(r.pooled.per_class[0].f1 == doctest::Approx(cf.majority_f1));
  CHECK(r.pooled.per_class[1].f1 == doctest::Approx(cf.minority_f1));
}

TEST_CASE("prediction log round trip") {
  auto preds = log_of("AB", "AA");
  preds[0].verb_lemma = "go";
  preds[0].scores = {0.25, -0.25};
  preds[0].contributors = {{0, "a:b", "N;N", true}, {2, "x%", "V", false}};
  preds[1].verb_lemma = "be";
  preds[1].scores = {1.0, 0.0};
  preds[1].degenerate = true;
  std::stringstream ss;
  write_prediction_log(ss, {"A", "B"}, preds, "abc123");
  CHECK(ss.str().rfind("# input_hash=abc123\n", 0) == 0);
  const auto back = read_prediction_log(ss);
  CHECK(back.labels == std::vector<std::string>{"A", "B"});
  REQUIRE(back.predictions.size() == 2);
  CHECK(back.predictions[0].contributors == preds[0].contributors);
  CHECK(back.predictions[0].scores == preds[0].scores);
  CHECK(back.predictions[1].degenerate);
  CHECK_FALSE(back.predictions[1].correct);

  std::istringstream empty("");
  CHECK_THROWS_WITH_AS(read_prediction_log(empty), doctest::Contains("empty prediction log"), DataError);
}
