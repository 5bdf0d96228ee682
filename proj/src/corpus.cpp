#include "predaspect/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "predaspect/error.hpp"
#include "predaspect/text.hpp"

namespace predaspect {

std::optional<std::size_t> Sentence::root() const {
  for (const auto& t : tokens) {
    if (!t.head) return t.index;
  }
  return std::nullopt;
}

std::vector<std::size_t> Sentence::children(std::size_t index) const {
  std::vector<std::size_t> out;
  for (const auto& t : tokens) {
    if (t.head && *t.head == index) out.push_back(t.index);
  }
  return out;
}

namespace {

std::string where(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line) + ": ";
}

bool is_range_or_empty_node(std::string_view id) {
  return id.find('-') != std::string_view::npos || id.find('.') != std::string_view::npos;
}

std::string column_value(const std::string& field) { return field == "_" ? std::string() : field; }

// Checks the head pointers: one root, no self loops, and every token reaches
// the root without revisiting a node.
void check_tree(const Sentence& s, const std::string& source, std::size_t line) {
  std::size_t roots = 0;
  for (const auto& t : s.tokens) {
    if (!t.head) {
      ++roots;
      continue;
    }
    if (*t.head >= s.size()) {
      throw FormatError(where(source, line) + "sentence '" + s.sent_id + "': head of token " +
                        std::to_string(t.index + 1) + " is out of range");
    }
    if (*t.head == t.index) {
      throw FormatError(where(source, line) + "sentence '" + s.sent_id + "': token " +
                        std::to_string(t.index + 1) + " is its own head");
    }
  }
  if (roots != 1) {
    throw FormatError(where(source, line) + "sentence '" + s.sent_id + "' has " +
                      std::to_string(roots) + " root tokens, expected exactly 1");
  }
  // 0 = unvisited, 1 = on current path, 2 = known to reach the root.
  std::vector<int> state(s.size(), 0);
  for (std::size_t start = 0; start < s.size(); ++start) {
    std::vector<std::size_t> path;
    std::size_t cur = start;
    while (state[cur] == 0) {
      state[cur] = 1;
      path.push_back(cur);
      if (!s.tokens[cur].head) break;
      cur = *s.tokens[cur].head;
    }
    if (state[cur] == 1 && s.tokens[cur].head) {
      throw FormatError(where(source, line) + "sentence '" + s.sent_id +
                        "': head pointers contain a cycle through token " +
                        std::to_string(cur + 1));
    }
    for (auto p : path) state[p] = 2;
  }
}

}  // namespace

std::vector<Sentence> parse_conllu(std::istream& in, const std::string& source_name) {
  std::vector<Sentence> out;
  Sentence current;
  std::string doc_id;
  std::string line;
  std::size_t line_no = 0;
  std::size_t sentence_start = 0;

  auto flush = [&]() {
    if (!current.tokens.empty()) {
      current.doc_id = doc_id;
      check_tree(current, source_name, sentence_start);
      out.push_back(std::move(current));
    }
    current = Sentence{};
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    if (line.front() == '#') {
      const auto body = text::trim(std::string_view(line).substr(1));
      const auto eq = body.find('=');
      const auto key = text::trim(body.substr(0, eq));
      const auto value = eq == std::string_view::npos ? std::string_view()
                                                      : text::trim(body.substr(eq + 1));
      if (key == "sent_id") {
        current.sent_id = std::string(value);
      } else if (key == "newdoc id" || key == "newdoc") {
        doc_id = std::string(value);
      }
      continue;
    }
    auto fields = text::split(line, '\t');
    if (fields.size() != 10) {
      throw FormatError(where(source_name, line_no) + "expected 10 tab-separated columns, found " +
                        std::to_string(fields.size()));
    }
    if (is_range_or_empty_node(fields[0])) continue;
    if (current.tokens.empty()) sentence_start = line_no;

    std::size_t id = 0;
    {
      const auto& f = fields[0];
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), id);
      if (ec != std::errc() || ptr != f.data() + f.size() || id == 0) {
        throw FormatError(where(source_name, line_no) + "bad token id '" + f + "'");
      }
    }
    if (id != current.tokens.size() + 1) {
      throw FormatError(where(source_name, line_no) + "token id " + std::to_string(id) +
                        " out of sequence (expected " + std::to_string(current.tokens.size() + 1) +
                        ")");
    }
    long head = -1;
    {
      const auto& f = fields[6];
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), head);
      if (ec != std::errc() || ptr != f.data() + f.size() || head < 0) {
        throw FormatError(where(source_name, line_no) + "non-integer HEAD '" + f + "'");
      }
    }

    Token t;
    t.index = id - 1;
    t.form = fields[1];
    t.lemma = fields[2];
    t.upos = fields[3];
    t.xpos = fields[4];
    t.feats = fields[5];
    t.deprel = column_value(fields[7]);
    t.deps = fields[8];
    t.misc = fields[9];
    const auto xpos = column_value(t.xpos);
    t.pos = xpos.empty() ? column_value(t.upos) : xpos;
    if (head > 0) t.head = static_cast<std::size_t>(head - 1);
    current.tokens.push_back(std::move(t));
  }
  flush();
  return out;
}

std::vector<Sentence> parse_conllu(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open CoNLL-U file " + path.string());
  return parse_conllu(in, path.string());
}

void write_conllu(std::ostream& out, const std::vector<Sentence>& sentences) {
  std::string last_doc;
  bool first = true;
  for (const auto& s : sentences) {
    if (first || s.doc_id != last_doc) {
      if (!s.doc_id.empty()) out << "# newdoc id = " << s.doc_id << '\n';
      last_doc = s.doc_id;
      first = false;
    }
    if (!s.sent_id.empty()) out << "# sent_id = " << s.sent_id << '\n';
    for (const auto& t : s.tokens) {
      out << (t.index + 1) << '\t' << t.form << '\t' << t.lemma << '\t' << t.upos << '\t' << t.xpos
          << '\t' << t.feats << '\t' << (t.head ? *t.head + 1 : 0) << '\t'
          << (t.deprel.empty() ? "_" : t.deprel) << '\t' << t.deps << '\t' << t.misc << '\n';
    }
    out << '\n';
  }
}

std::string to_string(Split split) { return split == Split::kTrain ? "train" : "test"; }

std::string Instance::id() const {
  return doc_id + ":" + sent_id + ":" + std::to_string(target);
}

const std::vector<Token>& Instance::tokens() const {
  if (!sentence) throw DataError("instance " + id() + " has no sentence attached");
  return sentence->tokens;
}

bool Dataset::has_sentences() const {
  return std::all_of(instances.begin(), instances.end(),
                     [](const Instance& i) { return i.sentence != nullptr; });
}

std::size_t Dataset::label_index(std::string_view label) const {
  auto it = std::find(label_set.begin(), label_set.end(), label);
  if (it == label_set.end()) {
    throw DataError("label '" + std::string(label) + "' is not in the label set of " + name);
  }
  return static_cast<std::size_t>(it - label_set.begin());
}

void validate(const Dataset& dataset) {
  std::set<std::string> labels(dataset.label_set.begin(), dataset.label_set.end());
  if (labels.size() != dataset.label_set.size()) {
    throw DataError(dataset.name + ": label set contains duplicates");
  }
  std::set<std::tuple<std::string, std::string, std::size_t>> seen;
  for (const auto& inst : dataset.instances) {
    if (!labels.count(inst.label)) {
      throw DataError(dataset.name + ": instance " + inst.id() + " has label '" + inst.label +
                      "' outside the label set");
    }
    if (!seen.emplace(inst.doc_id, inst.sent_id, inst.target).second) {
      throw DataError(dataset.name + ": duplicate instance " + inst.id());
    }
    if (inst.sentence && inst.target >= inst.sentence->size()) {
      throw DataError(dataset.name + ": instance " + inst.id() + " target out of range");
    }
  }
}

namespace {

struct IndexRow {
  std::size_t line = 0;
  std::string doc_id;
  std::string sent_id;
  std::size_t target = 0;
  std::string label;
  std::string verb_lemma;
  std::optional<Split> split;
};

std::vector<IndexRow> read_index(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw FormatError(source + ": empty index file");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kIndexHeader) {
    throw FormatError(where(source, line_no) + "unexpected index header '" + line + "'");
  }
  std::vector<IndexRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto f = text::split(line, '\t');
    if (f.size() == 5) f.emplace_back();
    if (f.size() != 6) {
      throw FormatError(where(source, line_no) + "expected 6 columns, found " +
                        std::to_string(f.size()));
    }
    IndexRow row;
    row.line = line_no;
    row.doc_id = f[0];
    row.sent_id = f[1];
    auto [ptr, ec] = std::from_chars(f[2].data(), f[2].data() + f[2].size(), row.target);
    if (ec != std::errc() || ptr != f[2].data() + f[2].size()) {
      throw FormatError(where(source, line_no) + "bad target_index '" + f[2] + "'");
    }
    row.label = f[3];
    row.verb_lemma = f[4];
    if (f[5] == "train") {
      row.split = Split::kTrain;
    } else if (f[5] == "test") {
      row.split = Split::kTest;
    } else if (!f[5].empty()) {
      throw FormatError(where(source, line_no) + "split must be train, test or empty, got '" +
                        f[5] + "'");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<std::string> resolve_labels(const std::vector<IndexRow>& rows,
                                        std::vector<std::string> label_set,
                                        const std::string& source) {
  if (label_set.empty()) {
    for (const auto& r : rows) {
      if (std::find(label_set.begin(), label_set.end(), r.label) == label_set.end()) {
        label_set.push_back(r.label);
      }
    }
    return label_set;
  }
  for (const auto& r : rows) {
    if (std::find(label_set.begin(), label_set.end(), r.label) == label_set.end()) {
      throw DataError(where(source, r.line) + "label '" + r.label +
                      "' is outside the declared label set");
    }
  }
  return label_set;
}

Instance to_instance(IndexRow row) {
  Instance inst;
  inst.doc_id = std::move(row.doc_id);
  inst.sent_id = std::move(row.sent_id);
  inst.target = row.target;
  inst.label = std::move(row.label);
  inst.verb_lemma = std::move(row.verb_lemma);
  inst.split = row.split;
  return inst;
}

}  // namespace

Dataset load_dataset(const std::vector<Sentence>& sentences, std::istream& index, std::string name,
                     std::vector<std::string> label_set, const std::string& index_name) {
  std::unordered_map<std::string, std::shared_ptr<const Sentence>> by_id;
  for (const auto& s : sentences) {
    if (s.sent_id.empty()) continue;
    if (!by_id.emplace(s.sent_id, std::make_shared<const Sentence>(s)).second) {
      throw DataError("duplicate sent_id '" + s.sent_id + "' in treebank");
    }
  }
  auto rows = read_index(index, index_name);
  Dataset ds;
  ds.name = std::move(name);
  ds.label_set = resolve_labels(rows, std::move(label_set), index_name);
  ds.instances.reserve(rows.size());
  for (auto& row : rows) {
    auto it = by_id.find(row.sent_id);
    if (it == by_id.end()) {
      throw DataError(where(index_name, row.line) + "unknown sent_id '" + row.sent_id + "'");
    }
    if (row.target >= it->second->size()) {
      throw DataError(where(index_name, row.line) + "target_index " + std::to_string(row.target) +
                      " out of range for sentence '" + row.sent_id + "' with " +
                      std::to_string(it->second->size()) + " tokens");
    }
    auto inst = to_instance(std::move(row));
    inst.sentence = it->second;
    ds.instances.push_back(std::move(inst));
  }
  validate(ds);
  return ds;
}

Dataset load_dataset(const std::filesystem::path& conllu_path,
                     const std::filesystem::path& index_path, std::string name,
                     std::vector<std::string> label_set) {
  const auto sentences = parse_conllu(conllu_path);
  std::ifstream in(index_path);
  if (!in) throw IoError("cannot open index file " + index_path.string());
  return load_dataset(sentences, in, std::move(name), std::move(label_set), index_path.string());
}

Dataset load_index(const std::filesystem::path& index_path, std::string name,
                   std::vector<std::string> label_set) {
  std::ifstream in(index_path);
  if (!in) throw IoError("cannot open index file " + index_path.string());
  auto rows = read_index(in, index_path.string());
  Dataset ds;
  ds.name = std::move(name);
  ds.label_set = resolve_labels(rows, std::move(label_set), index_path.string());
  for (auto& row : rows) ds.instances.push_back(to_instance(std::move(row)));
  validate(ds);
  return ds;
}

void write_index(std::ostream& out, const Dataset& dataset) {
  out << kIndexHeader << '\n';
  for (const auto& i : dataset.instances) {
    out << i.doc_id << '\t' << i.sent_id << '\t' << i.target << '\t' << i.label << '\t'
        << i.verb_lemma << '\t' << (i.split ? to_string(*i.split) : "") << '\n';
  }
}

void write_index(const std::filesystem::path& path, const Dataset& dataset) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write index file " + path.string());
  write_index(out, dataset);
}

Dataset merge_labels(const Dataset& dataset, const std::map<std::string, std::string>& mapping) {
  for (const auto& [from, to] : mapping) {
    if (std::find(dataset.label_set.begin(), dataset.label_set.end(), from) ==
        dataset.label_set.end()) {
      throw DataError("cannot merge '" + from + "': not in the label set of " + dataset.name);
    }
  }
  auto remap = [&](const std::string& label) {
    auto it = mapping.find(label);
    return it == mapping.end() ? label : it->second;
  };
  Dataset out;
  out.name = dataset.name;
  for (const auto& label : dataset.label_set) {
    auto mapped = remap(label);
    if (std::find(out.label_set.begin(), out.label_set.end(), mapped) == out.label_set.end()) {
      out.label_set.push_back(std::move(mapped));
    }
  }
  if (out.label_set.empty()) throw DataError("label merge produced an empty label set");
  out.instances = dataset.instances;
  for (auto& inst : out.instances) inst.label = remap(inst.label);
  return out;
}

Dataset filter_labels(const Dataset& dataset, const std::set<std::string>& keep) {
  if (keep.empty()) throw DataError("filter_labels: keep set is empty");
  for (const auto& label : keep) {
    if (std::find(dataset.label_set.begin(), dataset.label_set.end(), label) ==
        dataset.label_set.end()) {
      throw DataError("cannot keep '" + label + "': not in the label set of " + dataset.name);
    }
  }
  Dataset out;
  out.name = dataset.name;
  for (const auto& label : dataset.label_set) {
    if (keep.count(label)) out.label_set.push_back(label);
  }
  for (const auto& inst : dataset.instances) {
    if (keep.count(inst.label)) out.instances.push_back(inst);
  }
  if (out.instances.empty()) throw DataError("filter_labels: no instances left in " + dataset.name);
  return out;
}

std::map<std::string, std::string> parse_label_mapping(std::string_view spec) {
  std::map<std::string, std::string> out;
  if (text::trim(spec).empty()) return out;
  for (const auto& item : text::split(spec, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("label mapping entry '" + item + "' must look like from=to");
    }
    auto from = std::string(text::trim(std::string_view(item).substr(0, eq)));
    auto to = std::string(text::trim(std::string_view(item).substr(eq + 1)));
    if (from.empty() || to.empty()) {
      throw ConfigError("label mapping entry '" + item + "' has an empty side");
    }
    out[from] = to;
  }
  return out;
}

namespace {

LengthStats length_stats(std::vector<std::size_t> lengths) {
  LengthStats s;
  if (lengths.empty()) return s;
  std::sort(lengths.begin(), lengths.end());
  double sum = 0.0;
  for (auto l : lengths) sum += static_cast<double>(l);
  s.mean = sum / static_cast<double>(lengths.size());
  const auto n = lengths.size();
  s.median = n % 2 == 1 ? static_cast<double>(lengths[n / 2])
                        : 0.5 * static_cast<double>(lengths[n / 2 - 1] + lengths[n / 2]);
  s.min = lengths.front();
  s.max = lengths.back();
  return s;
}

nlohmann::json to_json(const LengthStats& s) {
  return {{"mean", s.mean}, {"median", s.median}, {"min", s.min}, {"max", s.max}};
}

}  // namespace

DatasetStats dataset_stats(const Dataset& dataset, double balance_threshold) {
  DatasetStats st;
  st.instances = dataset.size();
  st.labels = dataset.label_set;
  st.balance_threshold = balance_threshold;
  for (const auto& label : dataset.label_set) st.label_counts[label] = 0;

  const bool lengths = dataset.has_sentences() && !dataset.empty();
  std::map<std::string, std::vector<std::size_t>> by_label;
  std::vector<std::size_t> all;
  for (const auto& inst : dataset.instances) {
    ++st.label_counts[inst.label];
    ++st.lemma_counts[inst.verb_lemma];
    ++st.lemma_labels[inst.verb_lemma][inst.label];
    if (inst.split) ++st.split_counts[to_string(*inst.split)];
    if (lengths) {
      by_label[inst.label].push_back(inst.sentence->size());
      all.push_back(inst.sentence->size());
    }
  }
  for (const auto& [label, count] : st.label_counts) {
    st.label_fractions[label] =
        st.instances ? static_cast<double>(count) / static_cast<double>(st.instances) : 0.0;
  }
  if (lengths) {
    for (auto& [label, ls] : by_label) st.length_by_label[label] = length_stats(std::move(ls));
    st.length_overall = length_stats(std::move(all));
  }
  for (const auto& [lemma, dist] : st.lemma_labels) {
    std::size_t total = 0;
    std::size_t majority = 0;
    for (const auto& [label, c] : dist) {
      total += c;
      majority = std::max(majority, c);
    }
    if (dist.size() >= 2) ++st.lemmas_with_multiple_labels;
    if (static_cast<double>(majority) <= balance_threshold * static_cast<double>(total)) {
      ++st.lemmas_balanced;
    }
  }
  return st;
}

nlohmann::json to_json(const DatasetStats& st) {
  nlohmann::json j;
  j["instances"] = st.instances;
  j["labels"] = st.labels;
  j["label_counts"] = st.label_counts;
  j["label_fractions"] = st.label_fractions;
  if (st.length_overall) {
    j["length_overall"] = to_json(*st.length_overall);
    nlohmann::json per = nlohmann::json::object();
    for (const auto& [label, ls] : st.length_by_label) per[label] = to_json(ls);
    j["length_by_label"] = per;
  }
  j["lemma_count"] = st.lemma_counts.size();
  j["lemma_counts"] = st.lemma_counts;
  j["lemma_labels"] = st.lemma_labels;
  j["lemmas_with_multiple_labels"] = st.lemmas_with_multiple_labels;
  j["balance_threshold"] = st.balance_threshold;
  j["lemmas_balanced"] = st.lemmas_balanced;
  if (!st.split_counts.empty()) j["split_counts"] = st.split_counts;
  return j;
}

const std::vector<DatasetProfile>& known_profiles() {
  static const std::vector<DatasetProfile> profiles = [] {
    std::vector<DatasetProfile> p;
    DatasetProfile diaspora;
    diaspora.name = "diaspora";
    diaspora.instances = 927;
    diaspora.label_counts = {{"state", 400}, {"telic", 279}, {"atelic", 248}};
    diaspora.length_by_label = {{"state", {16.34, 13, 4, 94}},
                                {"telic", {14.65, 11, 3, 80}},
                                {"atelic", {15.38, 12, 2, 74}}};
    p.push_back(diaspora);

    DatasetProfile asp;
    asp.name = "asp-ambig";
    asp.instances = 2760;
    p.push_back(asp);

    DatasetProfile sitent_ambig;
    sitent_ambig.name = "sitent-ambig";
    sitent_ambig.train_size = 6547;
    sitent_ambig.test_size = 1402;
    p.push_back(sitent_ambig);

    DatasetProfile captions;
    captions.name = "captions";
    captions.instances = 2687;
    captions.label_counts = {{"state", 595}, {"telic", 800}, {"atelic", 1292}};
    p.push_back(captions);

    DatasetProfile telicity;
    telicity.name = "telicity";
    telicity.instances = 1863;
    p.push_back(telicity);
    return p;
  }();
  return profiles;
}

const DatasetProfile& find_profile(std::string_view name) {
  for (const auto& p : known_profiles()) {
    if (p.name == name) return p;
  }
  throw ConfigError("unknown dataset profile '" + std::string(name) + "'");
}

std::vector<std::string> check_profile(const DatasetStats& stats, const DatasetProfile& profile) {
  std::vector<std::string> issues;
  auto mismatch = [&](const std::string& what, auto expected, auto actual) {
    std::ostringstream os;
    os << profile.name << ": " << what << " expected " << expected << ", found " << actual;
    issues.push_back(os.str());
  };
  if (profile.instances && *profile.instances != stats.instances) {
    mismatch("instance count", *profile.instances, stats.instances);
  }
  for (const auto& [label, expected] : profile.label_counts) {
    auto it = stats.label_counts.find(label);
    const std::size_t actual = it == stats.label_counts.end() ? 0 : it->second;
    if (actual != expected) mismatch("count of '" + label + "'", expected, actual);
  }
  auto split_count = [&](const std::string& split) -> std::size_t {
    auto it = stats.split_counts.find(split);
    return it == stats.split_counts.end() ? 0 : it->second;
  };
  if (profile.train_size && *profile.train_size != split_count("train")) {
    mismatch("train split size", *profile.train_size, split_count("train"));
  }
  if (profile.test_size && *profile.test_size != split_count("test")) {
    mismatch("test split size", *profile.test_size, split_count("test"));
  }
  for (const auto& [label, expected] : profile.length_by_label) {
    auto it = stats.length_by_label.find(label);
    if (it == stats.length_by_label.end()) {
      if (!stats.length_by_label.empty()) mismatch("length stats of '" + label + "'", "present", "absent");
      continue;
    }
    const auto& got = it->second;
    if (std::round(got.mean * 100.0) != std::round(expected.mean * 100.0)) {
      mismatch("mean length of '" + label + "'", expected.mean, got.mean);
    }
    if (got.median != expected.median) mismatch("median length of '" + label + "'", expected.median, got.median);
    if (got.min != expected.min) mismatch("min length of '" + label + "'", expected.min, got.min);
    if (got.max != expected.max) mismatch("max length of '" + label + "'", expected.max, got.max);
  }
  return issues;
}

}  // namespace predaspect
