#include "predaspect/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <queue>
#include <set>

#include "predaspect/error.hpp"
#include "predaspect/parallel.hpp"
#include "predaspect/random.hpp"
#include "predaspect/text.hpp"

namespace predaspect {

Metrics compute_metrics(std::span<const Prediction> predictions,
                        const std::vector<std::string>& labels) {
  if (predictions.empty()) throw DataError("cannot compute metrics on an empty prediction log");
  const std::size_t k = labels.size();
  auto index_of = [&](const std::string& label) {
    auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) throw DataError("prediction uses unknown label '" + label + "'");
    return static_cast<std::size_t>(it - labels.begin());
  };
  Metrics m;
  m.labels = labels;
  m.total = predictions.size();
  m.confusion.assign(k, std::vector<std::size_t>(k, 0));
  for (const auto& p : predictions) ++m.confusion[index_of(p.gold)][index_of(p.predicted)];

  std::size_t correct = 0;
  m.per_class.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    correct += m.confusion[c][c];
    std::size_t gold = 0;
    std::size_t predicted = 0;
    for (std::size_t o = 0; o < k; ++o) {
      gold += m.confusion[c][o];
      predicted += m.confusion[o][c];
    }
    auto& cm = m.per_class[c];
    const double tp = static_cast<double>(m.confusion[c][c]);
    cm.support = gold;
    cm.precision = predicted ? tp / static_cast<double>(predicted) : 0.0;
    cm.recall = gold ? tp / static_cast<double>(gold) : 0.0;
    cm.f1 = (cm.precision + cm.recall) > 0.0
                ? 2.0 * cm.precision * cm.recall / (cm.precision + cm.recall)
                : 0.0;
  }
  m.accuracy = static_cast<double>(correct) / static_cast<double>(m.total);
  return m;
}

MeanStd mean_and_sample_std(std::span<const double> values) {
  MeanStd r;
  if (values.empty()) return r;
  r.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() < 2) return r;
  double ss = 0.0;
  for (double v : values) ss += (v - r.mean) * (v - r.mean);
  r.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  return r;
}

Protocol parse_protocol(std::string_view text, std::size_t default_k) {
  auto with_k = [&](std::string_view prefix, Protocol::Kind kind) -> std::optional<Protocol> {
    if (text == prefix) return Protocol{kind, default_k};
    if (!text.starts_with(prefix) || text.size() <= prefix.size() + 1 ||
        text[prefix.size()] != ':') {
      return std::nullopt;
    }
    const auto num = text.substr(prefix.size() + 1);
    std::size_t k = 0;
    auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), k);
    if (ec != std::errc() || ptr != num.data() + num.size() || k < 2) {
      throw ConfigError("invalid fold count in protocol '" + std::string(text) + "'");
    }
    return Protocol{kind, k};
  };
  if (text == "loo") return {Protocol::Kind::kLoo, default_k};
  if (text == "fixed") return {Protocol::Kind::kFixed, default_k};
  if (text == "verb-holdout") return {Protocol::Kind::kVerbHoldout, default_k};
  if (auto p = with_k("kfold", Protocol::Kind::kKFold)) return *p;
  if (auto p = with_k("doc-cv", Protocol::Kind::kDocCv)) return *p;
  throw ConfigError("invalid protocol '" + std::string(text) +
                    "' (expected loo, kfold:K, doc-cv:K, fixed or verb-holdout)");
}

std::string to_string(const Protocol& protocol) {
  switch (protocol.kind) {
    case Protocol::Kind::kLoo:
      return "loo";
    case Protocol::Kind::kKFold:
      return "kfold:" + std::to_string(protocol.k);
    case Protocol::Kind::kDocCv:
      return "doc-cv:" + std::to_string(protocol.k);
    case Protocol::Kind::kFixed:
      return "fixed";
    case Protocol::Kind::kVerbHoldout:
      return "verb-holdout";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Fold layouts

std::vector<std::vector<std::size_t>> loo_folds(const Dataset& dataset) {
  if (dataset.size() < 2) throw DataError("leave-one-out needs at least 2 instances");
  std::vector<std::vector<std::size_t>> folds(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) folds[i] = {i};
  return folds;
}

namespace {

std::vector<std::size_t> fold_sizes(std::size_t n, std::size_t k) {
  std::vector<std::size_t> sizes(k, n / k);
  for (std::size_t f = 0; f < n % k; ++f) ++sizes[f];
  return sizes;
}

// Edmonds-Karp on a dense capacity matrix; returns the flow matrix.
std::vector<std::vector<long>> max_flow(std::vector<std::vector<long>> cap, std::size_t source,
                                        std::size_t sink) {
  const std::size_t n = cap.size();
  std::vector<std::vector<long>> flow(n, std::vector<long>(n, 0));
  for (;;) {
    std::vector<std::size_t> parent(n, n);
    parent[source] = source;
    std::queue<std::size_t> q;
    q.push(source);
    while (!q.empty() && parent[sink] == n) {
      const auto u = q.front();
      q.pop();
      for (std::size_t v = 0; v < n; ++v) {
        if (parent[v] == n && cap[u][v] - flow[u][v] > 0) {
          parent[v] = u;
          q.push(v);
        }
      }
    }
    if (parent[sink] == n) return flow;
    long push = std::numeric_limits<long>::max();
    for (auto v = sink; v != source; v = parent[v]) {
      push = std::min(push, cap[parent[v]][v] - flow[parent[v]][v]);
    }
    for (auto v = sink; v != source; v = parent[v]) {
      flow[parent[v]][v] += push;
      flow[v][parent[v]] -= push;
    }
  }
}

}  // namespace

std::vector<std::vector<std::size_t>> stratified_fold_counts(std::span<const std::size_t> class_counts,
                                                             std::size_t k) {
  const std::size_t n = std::accumulate(class_counts.begin(), class_counts.end(), std::size_t{0});
  if (k < 2) throw DataError("k-fold needs k >= 2");
  if (n < k) throw DataError("k-fold needs at least k instances");
  const auto sizes = fold_sizes(n, k);
  const std::size_t classes = class_counts.size();

  // Start from the floor of each ideal count; distribute the remainders with a
  // flow where each fractional cell may take one extra instance.
  std::vector<std::vector<std::size_t>> counts(k, std::vector<std::size_t>(classes, 0));
  const std::size_t source = 0;
  const std::size_t sink = 1;
  const std::size_t class_base = 2;
  const std::size_t fold_base = 2 + classes;
  std::vector<std::vector<long>> cap(fold_base + k, std::vector<long>(fold_base + k, 0));
  std::vector<long> class_rest(classes);
  std::vector<long> fold_rest(k);
  for (std::size_t c = 0; c < classes; ++c) class_rest[c] = static_cast<long>(class_counts[c]);
  for (std::size_t f = 0; f < k; ++f) fold_rest[f] = static_cast<long>(sizes[f]);
  for (std::size_t f = 0; f < k; ++f) {
    for (std::size_t c = 0; c < classes; ++c) {
      const std::size_t num = class_counts[c] * sizes[f];
      counts[f][c] = num / n;
      class_rest[c] -= static_cast<long>(counts[f][c]);
      fold_rest[f] -= static_cast<long>(counts[f][c]);
      if (num % n != 0) cap[class_base + c][fold_base + f] = 1;
    }
  }
  for (std::size_t c = 0; c < classes; ++c) cap[source][class_base + c] = class_rest[c];
  for (std::size_t f = 0; f < k; ++f) cap[fold_base + f][sink] = fold_rest[f];
  const auto flow = max_flow(cap, source, sink);
  for (std::size_t f = 0; f < k; ++f) {
    for (std::size_t c = 0; c < classes; ++c) {
      if (flow[class_base + c][fold_base + f] > 0) ++counts[f][c];
    }
  }
  // The rounding always exists; verify the margins anyway.
  for (std::size_t f = 0; f < k; ++f) {
    std::size_t s = 0;
    for (auto v : counts[f]) s += v;
    if (s != sizes[f]) throw std::logic_error("stratified rounding failed to match fold sizes");
  }
  return counts;
}

std::vector<std::vector<std::size_t>> kfold_folds(const Dataset& dataset, std::size_t k,
                                                  std::uint64_t seed, bool stratified,
                                                  std::vector<std::string>* warnings) {
  const std::size_t n = dataset.size();
  if (k < 2) throw DataError("k-fold needs k >= 2");
  if (n < k) {
    throw DataError("k-fold with k=" + std::to_string(k) + " needs at least k instances, got " +
                    std::to_string(n));
  }
  SeededRng rng(seed);
  std::vector<std::vector<std::size_t>> folds(k);
  if (!stratified) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    const auto sizes = fold_sizes(n, k);
    std::size_t pos = 0;
    for (std::size_t f = 0; f < k; ++f) {
      folds[f].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                      order.begin() + static_cast<std::ptrdiff_t>(pos + sizes[f]));
      pos += sizes[f];
    }
  } else {
    const std::size_t classes = dataset.label_set.size();
    std::vector<std::vector<std::size_t>> members(classes);
    for (std::size_t i = 0; i < n; ++i) {
      members[dataset.label_index(dataset.instances[i].label)].push_back(i);
    }
    std::vector<std::size_t> class_counts(classes);
    for (std::size_t c = 0; c < classes; ++c) {
      class_counts[c] = members[c].size();
      if (warnings && !members[c].empty() && members[c].size() < k) {
        warnings->push_back("class '" + dataset.label_set[c] + "' has " +
                            std::to_string(members[c].size()) + " instances, fewer than k=" +
                            std::to_string(k) + "; some folds contain none of it");
      }
      rng.shuffle(members[c]);
    }
    const auto counts = stratified_fold_counts(class_counts, k);
    std::vector<std::size_t> taken(classes, 0);
    for (std::size_t f = 0; f < k; ++f) {
      for (std::size_t c = 0; c < classes; ++c) {
        for (std::size_t j = 0; j < counts[f][c]; ++j) folds[f].push_back(members[c][taken[c]++]);
      }
    }
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

std::vector<std::vector<std::size_t>> document_folds(const Dataset& dataset, std::size_t k,
                                                     std::uint64_t seed) {
  if (k < 2) throw DataError("document cross-validation needs k >= 2");
  std::vector<std::string> docs;
  std::map<std::string, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& doc = dataset.instances[i].doc_id;
    auto& m = members[doc];
    if (m.empty()) docs.push_back(doc);
    m.push_back(i);
  }
  if (docs.size() < k) {
    throw DataError("document cross-validation with k=" + std::to_string(k) + " needs at least " +
                    std::to_string(k) + " documents, found " + std::to_string(docs.size()));
  }
  SeededRng rng(seed);
  rng.shuffle(docs);
  std::stable_sort(docs.begin(), docs.end(), [&](const std::string& a, const std::string& b) {
    return members[a].size() > members[b].size();
  });
  std::vector<std::vector<std::size_t>> folds(k);
  for (const auto& doc : docs) {
    std::size_t smallest = 0;
    for (std::size_t f = 1; f < k; ++f) {
      if (folds[f].size() < folds[smallest].size()) smallest = f;
    }
    const auto& m = members[doc];
    folds[smallest].insert(folds[smallest].end(), m.begin(), m.end());
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

std::vector<std::pair<std::string, std::vector<std::size_t>>> verb_groups(const Dataset& dataset) {
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    groups[dataset.instances[i].verb_lemma].push_back(i);
  }
  if (groups.size() < 2) throw DataError("verb holdout needs at least 2 verb lemmas");
  return {groups.begin(), groups.end()};
}

// ---------------------------------------------------------------------------
// Running folds

namespace {

struct FoldPlan {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

std::vector<FoldPlan> complement_plans(std::size_t n,
                                       const std::vector<std::vector<std::size_t>>& tests) {
  std::vector<FoldPlan> plans;
  plans.reserve(tests.size());
  for (const auto& test : tests) {
    FoldPlan p;
    p.test = test;
    std::vector<char> held(n, 0);
    for (auto t : test) held[t] = 1;
    for (std::size_t i = 0; i < n; ++i) {
      if (!held[i]) p.train.push_back(i);
    }
    plans.push_back(std::move(p));
  }
  return plans;
}

EvalReport run_plans(const Dataset& dataset, std::span<const ComposedInstance> composed,
                     const std::vector<FoldPlan>& plans, const TrainConfig& config,
                     const EvalOptions& options, std::string protocol_name) {
  validate(dataset);
  const bool logistic = options.classifier == ClassifierKind::kLogistic;
  if (logistic) {
    validate(config);
    if (composed.size() != dataset.size()) {
      throw DataError("composed instances (" + std::to_string(composed.size()) +
                      ") are not aligned with the dataset (" + std::to_string(dataset.size()) + ")");
    }
  }
  const auto& labels = dataset.label_set;
  if (labels.size() < 2) throw DataError("evaluation needs at least 2 labels");
  std::vector<std::size_t> y(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) y[i] = dataset.label_index(dataset.instances[i].label);

  std::vector<std::optional<Prediction>> slots(dataset.size());
  EvalReport report;
  report.protocol = std::move(protocol_name);
  report.labels = labels;
  report.folds.resize(plans.size());

  parallel_for(plans.size(), options.threads, [&](std::size_t f) {
    const auto& plan = plans[f];
    if (plan.train.empty()) throw DataError("fold " + std::to_string(f) + " has no training data");
    std::vector<std::size_t> ytrain(plan.train.size());
    std::set<std::size_t> distinct;
    for (std::size_t j = 0; j < plan.train.size(); ++j) {
      ytrain[j] = y[plan.train[j]];
      distinct.insert(ytrain[j]);
    }
    FoldResult& fr = report.folds[f];
    fr.train_size = plan.train.size();
    fr.test_size = plan.test.size();
    fr.degenerate = logistic && distinct.size() < 2;

    std::optional<LinearModel> model;
    std::optional<MajorityBaseline> baseline;
    if (logistic && !fr.degenerate) {
      model = train(FeatureMatrix::from_composed(composed, plan.train), ytrain, labels, config);
      fr.converged = model->all_converged();
    } else {
      baseline = majority_baseline(ytrain, labels);
    }

    std::vector<Prediction> local;
    local.reserve(plan.test.size());
    for (auto t : plan.test) {
      const auto& inst = dataset.instances[t];
      Prediction p;
      p.instance_id = inst.id();
      p.dataset_index = t;
      p.verb_lemma = inst.verb_lemma;
      p.gold = inst.label;
      p.degenerate = fr.degenerate;
      std::size_t predicted = 0;
      if (model) {
        auto s = predict(*model, composed[t].vector);
        p.scores = std::move(s.scores);
        predicted = s.predicted;
      } else {
        const double total = static_cast<double>(ytrain.size());
        for (auto c : baseline->counts) p.scores.push_back(static_cast<double>(c) / total);
        predicted = baseline->majority;
      }
      p.predicted = labels[predicted];
      p.correct = predicted == y[t];
      if (!composed.empty()) p.contributors = composed[t].contributors;
      local.push_back(p);
      slots[t] = std::move(p);
    }
    if (!local.empty()) fr.metrics = compute_metrics(local, labels);
  });

  for (auto& s : slots) {
    if (s) report.predictions.push_back(std::move(*s));
  }
  for (const auto& fr : report.folds) {
    if (fr.degenerate) ++report.degenerate_folds;
    if (!fr.converged) ++report.unconverged_models;
  }
  if (report.degenerate_folds > 0) {
    report.warnings.push_back(std::to_string(report.degenerate_folds) +
                              " fold(s) had a single training label and used the majority baseline");
  }
  report.pooled = compute_metrics(report.predictions, labels);
  return report;
}

void summarize_folds(EvalReport& report) {
  std::vector<double> acc;
  const std::size_t k = report.labels.size();
  std::vector<std::vector<double>> p(k), r(k), f1(k);
  for (const auto& fr : report.folds) {
    if (!fr.metrics) continue;
    acc.push_back(fr.metrics->accuracy);
    for (std::size_t c = 0; c < k; ++c) {
      p[c].push_back(fr.metrics->per_class[c].precision);
      r[c].push_back(fr.metrics->per_class[c].recall);
      f1[c].push_back(fr.metrics->per_class[c].f1);
    }
  }
  report.fold_accuracy = mean_and_sample_std(acc);
  for (std::size_t c = 0; c < k; ++c) {
    report.fold_precision.push_back(mean_and_sample_std(p[c]));
    report.fold_recall.push_back(mean_and_sample_std(r[c]));
    report.fold_f1.push_back(mean_and_sample_std(f1[c]));
  }
}

}  // namespace

EvalReport loo_cv(const Dataset& dataset, std::span<const ComposedInstance> composed,
                  const TrainConfig& config, const EvalOptions& options) {
  return run_plans(dataset, composed, complement_plans(dataset.size(), loo_folds(dataset)), config,
                   options, "loo");
}

EvalReport kfold_cv(const Dataset& dataset, std::span<const ComposedInstance> composed,
                    const TrainConfig& config, std::size_t k, const EvalOptions& options) {
  std::vector<std::string> warnings;
  const auto tests = kfold_folds(dataset, k, options.seed, options.stratified, &warnings);
  auto report = run_plans(dataset, composed, complement_plans(dataset.size(), tests), config,
                          options, "kfold:" + std::to_string(k));
  report.warnings.insert(report.warnings.begin(), warnings.begin(), warnings.end());
  summarize_folds(report);
  return report;
}

EvalReport document_cv(const Dataset& dataset, std::span<const ComposedInstance> composed,
                       const TrainConfig& config, std::size_t k, const EvalOptions& options) {
  const auto tests = document_folds(dataset, k, options.seed);
  auto report = run_plans(dataset, composed, complement_plans(dataset.size(), tests), config,
                          options, "doc-cv:" + std::to_string(k));
  summarize_folds(report);
  return report;
}

EvalReport fixed_split(const Dataset& dataset, std::span<const ComposedInstance> composed,
                       const TrainConfig& config, const EvalOptions& options) {
  FoldPlan plan;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& split = dataset.instances[i].split;
    if (!split) throw DataError("fixed split: instance " + dataset.instances[i].id() + " has no split tag");
    (*split == Split::kTrain ? plan.train : plan.test).push_back(i);
  }
  if (plan.train.empty() || plan.test.empty()) {
    throw DataError("fixed split needs nonempty train and test portions");
  }
  return run_plans(dataset, composed, {plan}, config, options, "fixed");
}

EvalReport verb_holdout(const Dataset& dataset, std::span<const ComposedInstance> composed,
                        const TrainConfig& config, const EvalOptions& options) {
  const auto groups = verb_groups(dataset);
  std::vector<std::vector<std::size_t>> tests;
  for (const auto& [lemma, members] : groups) tests.push_back(members);
  auto report = run_plans(dataset, composed, complement_plans(dataset.size(), tests), config,
                          options, "verb-holdout");
  for (std::size_t g = 0; g < groups.size(); ++g) {
    report.groups.push_back({groups[g].first, *report.folds[g].metrics});
  }
  return report;
}

EvalReport evaluate(const Dataset& dataset, std::span<const ComposedInstance> composed,
                    const Protocol& protocol, const TrainConfig& config,
                    const EvalOptions& options) {
  switch (protocol.kind) {
    case Protocol::Kind::kLoo:
      return loo_cv(dataset, composed, config, options);
    case Protocol::Kind::kKFold:
      return kfold_cv(dataset, composed, config, protocol.k, options);
    case Protocol::Kind::kDocCv:
      return document_cv(dataset, composed, config, protocol.k, options);
    case Protocol::Kind::kFixed:
      return fixed_split(dataset, composed, config, options);
    case Protocol::Kind::kVerbHoldout:
      return verb_holdout(dataset, composed, config, options);
  }
  throw ConfigError("unsupported protocol");
}

EvalReport evaluate(const Dataset& dataset, const ContextSpec& spec, const EmbeddingTable& table,
                    const Protocol& protocol, const TrainConfig& config,
                    const EvalOptions& options) {
  const auto composed = compose_batch(dataset, spec, table, {}, options.threads);
  return evaluate(dataset, composed, protocol, config, options);
}

// ---------------------------------------------------------------------------
// Serialization

nlohmann::json to_json(const Metrics& m) {
  nlohmann::json per = nlohmann::json::object();
  for (std::size_t c = 0; c < m.labels.size(); ++c) {
    const auto& cm = m.per_class[c];
    per[m.labels[c]] = {{"precision", cm.precision},
                        {"recall", cm.recall},
                        {"f1", cm.f1},
                        {"support", cm.support}};
  }
  return {{"total", m.total}, {"accuracy", m.accuracy}, {"per_class", per}, {"confusion", m.confusion}};
}

namespace {
nlohmann::json to_json(const MeanStd& s) { return {{"mean", s.mean}, {"std", s.std}}; }
}  // namespace

nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json j;
  j["protocol"] = r.protocol;
  j["labels"] = r.labels;
  j["pooled"] = to_json(r.pooled);
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& f : r.folds) {
    nlohmann::json fj = {{"train_size", f.train_size},
                         {"test_size", f.test_size},
                         {"degenerate", f.degenerate},
                         {"converged", f.converged}};
    if (f.metrics && r.folds.size() <= 100) {
      fj["accuracy"] = f.metrics->accuracy;
      nlohmann::json f1 = nlohmann::json::object();
      for (std::size_t c = 0; c < r.labels.size(); ++c) f1[r.labels[c]] = f.metrics->per_class[c].f1;
      fj["f1"] = f1;
    }
    folds.push_back(std::move(fj));
  }
  // LOO produces one fold per instance; only the count is informative.
  if (r.folds.size() <= 100) {
    j["folds"] = folds;
  } else {
    j["fold_count"] = r.folds.size();
  }
  if (r.fold_accuracy) {
    nlohmann::json summary;
    summary["accuracy"] = to_json(*r.fold_accuracy);
    nlohmann::json per = nlohmann::json::object();
    for (std::size_t c = 0; c < r.labels.size(); ++c) {
      per[r.labels[c]] = {{"precision", to_json(r.fold_precision[c])},
                          {"recall", to_json(r.fold_recall[c])},
                          {"f1", to_json(r.fold_f1[c])}};
    }
    summary["per_class"] = per;
    j["fold_summary"] = summary;
  }
  if (!r.groups.empty()) {
    nlohmann::json groups = nlohmann::json::array();
    for (const auto& g : r.groups) {
      auto gj = to_json(g.metrics);
      gj["key"] = g.key;
      groups.push_back(std::move(gj));
    }
    j["groups"] = groups;
  }
  j["degenerate_folds"] = r.degenerate_folds;
  j["unconverged_models"] = r.unconverged_models;
  j["warnings"] = r.warnings;
  return j;
}

namespace {

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

void write_prediction_log(std::ostream& out, const std::vector<std::string>& labels,
                          std::span<const Prediction> predictions, const std::string& input_hash) {
  if (!input_hash.empty()) out << "# input_hash=" << input_hash << '\n';
  out << "instance_id\tverb_lemma\tgold\tpredicted\tcorrect\tdegenerate";
  for (const auto& l : labels) out << "\tscore:" << l;
  out << "\tcontributors\n";
  for (const auto& p : predictions) {
    out << p.instance_id << '\t' << p.verb_lemma << '\t' << p.gold << '\t' << p.predicted << '\t'
        << (p.correct ? 1 : 0) << '\t' << (p.degenerate ? 1 : 0);
    for (std::size_t c = 0; c < labels.size(); ++c) {
      out << '\t' << (c < p.scores.size() ? format_double(p.scores[c]) : "");
    }
    out << '\t';
    for (std::size_t i = 0; i < p.contributors.size(); ++i) {
      const auto& c = p.contributors[i];
      if (i) out << ';';
      out << c.index << ':' << text::escape_field(c.form) << ':' << text::escape_field(c.pos) << ':'
          << (c.in_vocabulary ? 1 : 0);
    }
    out << '\n';
  }
}

PredictionLog read_prediction_log(std::istream& in, const std::string& source) {
  PredictionLog log;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  auto fail = [&](const std::string& msg) {
    throw FormatError(source + ":" + std::to_string(line_no) + ": " + msg);
  };
  auto parse_flag = [&](const std::string& f) {
    if (f == "1") return true;
    if (f == "0") return false;
    fail("expected 0 or 1, got '" + f + "'");
    return false;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto f = text::split(line, '\t');
    if (!have_header) {
      if (f.size() < 7 || f[0] != "instance_id" || f.back() != "contributors") {
        fail("not a prediction log header");
      }
      for (std::size_t c = 6; c + 1 < f.size(); ++c) {
        if (!f[c].starts_with("score:")) fail("unexpected column '" + f[c] + "'");
        log.labels.push_back(f[c].substr(6));
      }
      have_header = true;
      continue;
    }
    if (f.size() != 7 + log.labels.size()) {
      fail("expected " + std::to_string(7 + log.labels.size()) + " columns, found " +
           std::to_string(f.size()));
    }
    Prediction p;
    p.instance_id = f[0];
    p.dataset_index = log.predictions.size();
    p.verb_lemma = f[1];
    p.gold = f[2];
    p.predicted = f[3];
    p.correct = parse_flag(f[4]);
    p.degenerate = parse_flag(f[5]);
    for (std::size_t c = 0; c < log.labels.size(); ++c) {
      const auto& s = f[6 + c];
      if (s.empty()) continue;
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || ptr != s.data() + s.size()) fail("bad score '" + s + "'");
      p.scores.push_back(v);
    }
    const auto& contrib = f.back();
    if (!contrib.empty()) {
      for (const auto& rec : text::split(contrib, ';')) {
        const auto parts = text::split(rec, ':');
        if (parts.size() != 4) fail("bad contributor record '" + rec + "'");
        Contributor c;
        auto [ptr, ec] = std::from_chars(parts[0].data(), parts[0].data() + parts[0].size(), c.index);
        if (ec != std::errc() || ptr != parts[0].data() + parts[0].size()) {
          fail("bad contributor index '" + parts[0] + "'");
        }
        c.form = text::unescape_field(parts[1]);
        c.pos = text::unescape_field(parts[2]);
        c.in_vocabulary = parse_flag(parts[3]);
        p.contributors.push_back(std::move(c));
      }
    }
    log.predictions.push_back(std::move(p));
  }
  if (!have_header || log.predictions.empty()) throw DataError("empty prediction log");
  return log;
}

PredictionLog read_prediction_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open prediction log " + path.string());
  return read_prediction_log(in, path.string());
}

}  // namespace predaspect
