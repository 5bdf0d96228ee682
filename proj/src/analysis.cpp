#include "predaspect/analysis.hpp"

#include <charconv>
#include <fstream>
#include <ostream>

#include "predaspect/error.hpp"
#include "predaspect/text.hpp"

namespace predaspect {

PosAccuracyTable pos_accuracy(std::span<const Prediction> log) {
  PosAccuracyTable table;
  for (const auto& p : log) {
    for (const auto& c : p.contributors) {
      auto& e = table[c.pos];
      (p.correct ? e.correct : e.incorrect) += 1;
    }
  }
  for (auto& [tag, e] : table) {
    e.accuracy = static_cast<double>(e.correct) / static_cast<double>(e.correct + e.incorrect);
  }
  return table;
}

TagClassPartition TagClassPartition::penn_treebank() {
  return {{"DT", "IN", "TO", "CC", "MD", "RP", "EX", "PDT", "POS", "PRP", "PRP$", "WDT", "WP",
           "WP$", "WRB", "UH"},
          {"NN", "NNS", "NNP", "NNPS", "VB", "VBD", "VBG", "VBN", "VBP", "VBZ", "JJ", "JJR", "JJS",
           "RB", "RBR", "RBS", "CD", "FW"}};
}

TagClassPartition TagClassPartition::with_upos_fallback() {
  auto p = penn_treebank();
  p.closed.insert({"ADP", "AUX", "CCONJ", "DET", "INTJ", "PART", "PRON", "SCONJ"});
  p.open.insert({"ADJ", "ADV", "NOUN", "NUM", "PROPN", "VERB"});
  return p;
}

TagClassPartition TagClassPartition::from_json(const nlohmann::json& j) {
  TagClassPartition p;
  try {
    p.closed = j.at("closed").get<std::set<std::string>>();
    p.open = j.at("open").get<std::set<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("tag partition needs 'closed' and 'open' string lists: ") + e.what());
  }
  for (const auto& t : p.closed) {
    if (p.open.count(t)) throw ConfigError("tag '" + t + "' is listed as both closed and open class");
  }
  return p;
}

TagClassPartition TagClassPartition::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open tag partition " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

GroupAccuracy class_group_accuracy(const PosAccuracyTable& table, const TagClassPartition& partition) {
  auto mean_over = [&](const std::set<std::string>& tags) -> std::optional<double> {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& [tag, e] : table) {
      if (tags.count(tag)) {
        sum += e.accuracy;
        ++n;
      }
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
  };
  return {mean_over(partition.closed), mean_over(partition.open)};
}

GroupAccuracy class_group_accuracy_weighted(const PosAccuracyTable& table,
                                            const TagClassPartition& partition) {
  auto pooled = [&](const std::set<std::string>& tags) -> std::optional<double> {
    std::size_t correct = 0;
    std::size_t total = 0;
    for (const auto& [tag, e] : table) {
      if (tags.count(tag)) {
        correct += e.correct;
        total += e.correct + e.incorrect;
      }
    }
    if (total == 0) return std::nullopt;
    return static_cast<double>(correct) / static_cast<double>(total);
  };
  return {pooled(partition.closed), pooled(partition.open)};
}

std::map<std::string, std::size_t> pos_distribution(const Dataset& dataset, const ContextSpec& spec) {
  std::map<std::string, std::size_t> out;
  for (const auto& inst : dataset.instances) {
    const auto& tokens = inst.tokens();
    for (auto i : extract_context(tokens, inst.target, spec)) ++out[tokens[i].pos];
  }
  return out;
}

std::map<std::string, Metrics> per_verb_report(std::span<const Prediction> log,
                                               const std::vector<std::string>& labels) {
  std::map<std::string, std::vector<Prediction>> groups;
  for (const auto& p : log) groups[p.verb_lemma].push_back(p);
  std::map<std::string, Metrics> out;
  for (const auto& [lemma, preds] : groups) out.emplace(lemma, compute_metrics(preds, labels));
  return out;
}

std::vector<ContextSpec> parse_sweep_points(std::string_view text) {
  std::vector<ContextSpec> out;
  for (const auto& raw : text::split(text, ',')) {
    const auto item = text::trim(raw);
    if (item.empty()) continue;
    if (item == "verb" || item == "0") {
      out.push_back(ContextSpec::verb_only());
    } else if (item == "sentence" || item == "inf") {
      out.push_back(ContextSpec::full_sentence());
    } else if (item.starts_with("dep-")) {
      out.push_back(parse_context_spec(item));
    } else {
      std::size_t k = 0;
      auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), k);
      if (ec != std::errc() || ptr != item.data() + item.size()) {
        throw ConfigError("invalid sweep size '" + std::string(item) + "'");
      }
      out.push_back(ContextSpec::window_of(k));
    }
  }
  if (out.empty()) throw ConfigError("sweep needs at least one size");
  return out;
}

std::vector<SweepRow> window_sweep(const Dataset& dataset, const std::vector<ContextSpec>& contexts,
                                   const Protocol& protocol, const EmbeddingTable& table,
                                   const TrainConfig& config, const EvalOptions& options) {
  if (contexts.empty()) throw ConfigError("sweep needs at least one context");
  std::vector<SweepRow> rows;
  rows.reserve(contexts.size());
  for (const auto& spec : contexts) {
    rows.push_back({spec, evaluate(dataset, spec, table, protocol, config, options)});
  }
  return rows;
}

namespace {

std::pair<std::string, std::string> kind_and_size(const ContextSpec& spec) {
  switch (spec.kind) {
    case ContextSpec::Kind::kVerbOnly:
      return {"verb", "0"};
    case ContextSpec::Kind::kWindow:
      return {"window", std::to_string(spec.window)};
    case ContextSpec::Kind::kFullSentence:
      return {"sentence", "inf"};
    default:
      return {to_string(spec), "-"};
  }
}

std::string num(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

void write_sweep_tsv(std::ostream& out, const std::vector<std::string>& labels,
                     const std::vector<SweepRow>& rows, const std::string& input_hash) {
  if (!input_hash.empty()) out << "# input_hash=" << input_hash << '\n';
  out << "context_kind\tsize\taccuracy";
  for (const auto& l : labels) out << "\tf1:" << l;
  out << '\n';
  for (const auto& row : rows) {
    const auto [kind, size] = kind_and_size(row.context);
    out << kind << '\t' << size << '\t' << num(row.report.pooled.accuracy);
    for (const auto& cm : row.report.pooled.per_class) out << '\t' << num(cm.f1);
    out << '\n';
  }
}

void write_pos_accuracy_tsv(std::ostream& out, const PosAccuracyTable& table,
                            const TagClassPartition& partition) {
  out << "pos\tgroup\tcorrect\tincorrect\taccuracy\n";
  for (const auto& [tag, e] : table) {
    const char* group = partition.closed.count(tag) ? "closed" : partition.open.count(tag) ? "open" : "other";
    out << tag << '\t' << group << '\t' << e.correct << '\t' << e.incorrect << '\t' << num(e.accuracy)
        << '\n';
  }
}

void write_per_verb_tsv(std::ostream& out, const std::vector<std::string>& labels,
                        const std::map<std::string, Metrics>& report) {
  out << "verb_lemma\tsupport\taccuracy";
  for (const auto& l : labels) out << "\tf1:" << l;
  out << '\n';
  for (const auto& [lemma, m] : report) {
    out << lemma << '\t' << m.total << '\t' << num(m.accuracy);
    for (const auto& cm : m.per_class) out << '\t' << num(cm.f1);
    out << '\n';
  }
}

}  // namespace predaspect
