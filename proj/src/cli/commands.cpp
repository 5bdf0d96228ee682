#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "predaspect/cli.hpp"
#include "predaspect/error.hpp"
#include "predaspect/hash.hpp"
#include "predaspect/resample.hpp"

namespace predaspect::cli {
namespace {

template <typename T>
void read_if(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("failed writing " + path.string());
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

void require_file(const std::filesystem::path& path, const std::string& what) {
  if (path.empty()) throw ConfigError(what + " path is not configured");
  if (!std::filesystem::exists(path)) throw IoError(what + " not found: " + path.string());
}

struct Inputs {
  nlohmann::json files = nlohmann::json::object();
  std::string hash;
};

Inputs hash_inputs(const RunConfig& config, const std::vector<std::filesystem::path>& paths) {
  Inputs in;
  std::string material = config_echo(config).dump();
  for (const auto& p : paths) {
    const auto h = file_sha256(p);
    in.files[p.string()] = h;
    material += "\n" + p.string() + "=" + h;
  }
  in.hash = sha256_hex(material);
  return in;
}

EvalOptions eval_options(const RunConfig& config, ClassifierKind classifier) {
  EvalOptions o;
  o.classifier = classifier;
  o.seed = config.seed;
  o.stratified = config.stratified;
  o.threads = config.threads;
  return o;
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

}  // namespace

RunConfig config_from_json(const nlohmann::json& j) {
  RunConfig c;
  try {
    if (j.contains("embeddings")) {
      const auto& e = j.at("embeddings");
      std::string path, format, utf8;
      read_if(e, "path", path);
      read_if(e, "format", format);
      read_if(e, "utf8", utf8);
      c.embeddings = path;
      if (!format.empty()) c.embeddings_format = parse_embedding_format(format);
      if (utf8 == "replace") {
        c.utf8 = Utf8Policy::kReplace;
      } else if (!utf8.empty() && utf8 != "reject") {
        throw ConfigError("embeddings.utf8 must be 'reject' or 'replace'");
      }
    }
    if (j.contains("corpus")) {
      const auto& co = j.at("corpus");
      std::string conllu, index;
      read_if(co, "conllu", conllu);
      read_if(co, "index", index);
      c.conllu = conllu;
      c.index = index;
      read_if(co, "label_set", c.label_set);
      read_if(co, "name", c.name);
      read_if(co, "merge", c.merge);
      read_if(co, "keep", c.keep);
    }
    read_if(j, "context", c.context);
    read_if(j, "protocol", c.protocol);
    read_if(j, "k", c.k);
    read_if(j, "seed", c.seed);
    read_if(j, "stratified", c.stratified);
    read_if(j, "average", c.average);
    if (j.contains("train")) c.train = train_config_from_json(j.at("train"));
    std::string out_dir;
    read_if(j, "out_dir", out_dir);
    if (!out_dir.empty()) c.out_dir = out_dir;
    read_if(j, "threads", c.threads);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  try {
    return config_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

nlohmann::json config_echo(const RunConfig& c) {
  nlohmann::json j;
  j["embeddings"] = {{"path", c.embeddings.string()},
                     {"format", to_string(c.embeddings_format)},
                     {"utf8", c.utf8 == Utf8Policy::kReplace ? "replace" : "reject"}};
  j["corpus"] = {{"conllu", c.conllu.string()},
                 {"index", c.index.string()},
                 {"label_set", c.label_set},
                 {"name", c.name},
                 {"merge", c.merge},
                 {"keep", c.keep}};
  j["context"] = c.context;
  j["protocol"] = c.protocol;
  j["k"] = c.k;
  j["seed"] = c.seed;
  j["stratified"] = c.stratified;
  j["average"] = c.average;
  j["train"] = to_json(c.train);
  return j;
}

Dataset load_configured_dataset(const RunConfig& config, bool need_sentences) {
  require_file(config.index, "index file");
  Dataset ds;
  if (need_sentences || !config.conllu.empty()) {
    require_file(config.conllu, "CoNLL-U file");
    ds = load_dataset(config.conllu, config.index, config.name, config.label_set);
  } else {
    ds = load_index(config.index, config.name, config.label_set);
  }
  if (!config.merge.empty()) ds = merge_labels(ds, config.merge);
  if (!config.keep.empty()) ds = filter_labels(ds, {config.keep.begin(), config.keep.end()});
  return ds;
}

RunResult cmd_run(const RunConfig& config) {
  const auto spec = parse_context_spec(config.context);
  const auto protocol = parse_protocol(config.protocol, config.k);
  validate(config.train);
  require_file(config.embeddings, "embedding file");

  const auto dataset = load_configured_dataset(config, true);
  const auto table = load_embeddings(config.embeddings, config.embeddings_format, {config.utf8});
  const auto composed =
      compose_batch(dataset, spec, table, ComposeOptions{config.average}, config.threads);

  RunResult result;
  result.oov = count_oov(composed);
  result.report = evaluate(dataset, composed, protocol, config.train,
                           eval_options(config, ClassifierKind::kLogistic));
  const auto inputs = hash_inputs(config, {config.embeddings, config.conllu, config.index});
  result.input_hash = inputs.hash;

  ensure_dir(config.out_dir);
  result.report_path = config.out_dir / "report.json";
  result.log_path = config.out_dir / "predictions.tsv";
  result.manifest_path = config.out_dir / "manifest.json";

  auto report = to_json(result.report);
  report["input_hash"] = inputs.hash;
  report["dataset"] = dataset.name;
  report["context"] = to_string(spec);
  report["instances"] = dataset.size();
  write_text(result.report_path, dump(report));

  std::ostringstream log;
  write_prediction_log(log, dataset.label_set, result.report.predictions, inputs.hash);
  write_text(result.log_path, log.str());

  nlohmann::json manifest;
  manifest["input_hash"] = inputs.hash;
  manifest["config"] = config_echo(config);
  manifest["files"] = inputs.files;
  manifest["embedding"] = {{"entries", table.size()},
                           {"dimension", table.dimension()},
                           {"duplicates_dropped", table.duplicates_dropped()}};
  manifest["oov"] = {{"targets_oov", result.oov.targets_oov},
                     {"context_tokens", result.oov.context_tokens},
                     {"context_oov", result.oov.context_oov}};
  manifest["degenerate_folds"] = result.report.degenerate_folds;
  manifest["unconverged_models"] = result.report.unconverged_models;
  manifest["outputs"] = {result.report_path.filename().string(), result.log_path.filename().string()};
  manifest["created_at"] = utc_timestamp();
  write_text(result.manifest_path, dump(manifest));
  return result;
}

SweepResult cmd_sweep(const RunConfig& config, const std::vector<ContextSpec>& contexts) {
  const auto protocol = parse_protocol(config.protocol, config.k);
  validate(config.train);
  require_file(config.embeddings, "embedding file");
  const auto dataset = load_configured_dataset(config, true);
  const auto table = load_embeddings(config.embeddings, config.embeddings_format, {config.utf8});

  SweepResult result;
  result.rows = window_sweep(dataset, contexts, protocol, table, config.train,
                             eval_options(config, ClassifierKind::kLogistic));
  const auto inputs = hash_inputs(config, {config.embeddings, config.conllu, config.index});

  ensure_dir(config.out_dir);
  result.tsv_path = config.out_dir / "sweep.tsv";
  std::ostringstream tsv;
  write_sweep_tsv(tsv, dataset.label_set, result.rows, inputs.hash);
  write_text(result.tsv_path, tsv.str());

  nlohmann::json manifest;
  manifest["input_hash"] = inputs.hash;
  manifest["config"] = config_echo(config);
  manifest["files"] = inputs.files;
  nlohmann::json points = nlohmann::json::array();
  for (const auto& row : result.rows) {
    auto rj = to_json(row.report);
    rj["context"] = to_string(row.context);
    points.push_back(std::move(rj));
  }
  manifest["points"] = points;
  manifest["created_at"] = utc_timestamp();
  write_text(config.out_dir / "sweep_manifest.json", dump(manifest));
  return result;
}

SubsampleOutput cmd_subsample(const RunConfig& config, double max_majority_fraction) {
  const auto dataset = load_configured_dataset(config, false);
  const auto result = subsample_ambiguous(dataset, max_majority_fraction, config.seed);
  std::vector<std::filesystem::path> files{config.index};
  if (!config.conllu.empty()) files.push_back(config.conllu);
  const auto inputs = hash_inputs(config, files);

  ensure_dir(config.out_dir);
  SubsampleOutput out;
  out.before = dataset.size();
  out.after = result.dataset.size();
  out.index_path = config.out_dir / "index.subsampled.tsv";
  out.manifest_path = config.out_dir / "subsample_manifest.json";
  std::ostringstream index;
  write_index(index, result.dataset);
  write_text(out.index_path, index.str());

  auto manifest = manifest_json(result);
  manifest["input_hash"] = inputs.hash;
  manifest["files"] = inputs.files;
  manifest["instances_before"] = dataset.size();
  write_text(out.manifest_path, dump(manifest));
  return out;
}

nlohmann::json cmd_stats(const RunConfig& config, const std::optional<std::string>& profile,
                         const std::vector<ContextSpec>& contexts) {
  const auto dataset = load_configured_dataset(config, !contexts.empty());
  auto j = to_json(dataset_stats(dataset));
  j["dataset"] = dataset.name;
  if (!contexts.empty()) {
    nlohmann::json dist = nlohmann::json::object();
    for (const auto& spec : contexts) dist[to_string(spec)] = pos_distribution(dataset, spec);
    j["pos_distribution"] = dist;
  }
  if (profile) {
    const auto issues = check_profile(dataset_stats(dataset), find_profile(*profile));
    j["profile"] = {{"name", *profile}, {"matches", issues.empty()}, {"issues", issues}};
  }
  return j;
}

AnalyzeOutput cmd_analyze(const std::filesystem::path& log_path,
                          const std::optional<std::filesystem::path>& partition_path,
                          const std::filesystem::path& out_dir) {
  const auto log = read_prediction_log(log_path);
  const auto partition =
      partition_path ? TagClassPartition::load(*partition_path) : TagClassPartition::with_upos_fallback();
  AnalyzeOutput out;
  out.pos = pos_accuracy(log.predictions);
  out.groups = class_group_accuracy(out.pos, partition);
  out.groups_weighted = class_group_accuracy_weighted(out.pos, partition);
  out.per_verb = per_verb_report(log.predictions, log.labels);

  const auto log_hash = file_sha256(log_path);
  ensure_dir(out_dir);
  std::ostringstream pos;
  pos << "# input_hash=" << log_hash << '\n';
  write_pos_accuracy_tsv(pos, out.pos, partition);
  write_text(out_dir / "pos_accuracy.tsv", pos.str());

  std::ostringstream verbs;
  verbs << "# input_hash=" << log_hash << '\n';
  write_per_verb_tsv(verbs, log.labels, out.per_verb);
  write_text(out_dir / "per_verb.tsv", verbs.str());

  auto opt = [](const std::optional<double>& v) -> nlohmann::json {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  nlohmann::json j;
  j["input_hash"] = log_hash;
  j["instances"] = log.predictions.size();
  j["closed_class_accuracy"] = opt(out.groups.closed);
  j["open_class_accuracy"] = opt(out.groups.open);
  j["closed_class_accuracy_weighted"] = opt(out.groups_weighted.closed);
  j["open_class_accuracy_weighted"] = opt(out.groups_weighted.open);
  write_text(out_dir / "analysis.json", dump(j));
  return out;
}

BaselineOutput cmd_baseline(const RunConfig& config) {
  const auto protocol = parse_protocol(config.protocol, config.k);
  const auto dataset = load_configured_dataset(config, false);
  BaselineOutput out;
  out.report = evaluate(dataset, std::span<const ComposedInstance>{}, protocol, config.train,
                        eval_options(config, ClassifierKind::kMajority));
  // p: share of the predicted label among evaluated instances.
  const bool fixed = protocol.kind == Protocol::Kind::kFixed;
  std::map<std::string, std::size_t> train_counts;
  for (const auto& inst : dataset.instances) {
    if (!fixed || inst.split == Split::kTrain) train_counts[inst.label]++;
  }
  std::string majority;
  std::size_t best = 0;
  for (const auto& label : dataset.label_set) {
    if (train_counts[label] > best) {
      best = train_counts[label];
      majority = label;
    }
  }
  std::size_t hits = 0;
  for (const auto& p : out.report.predictions) hits += p.gold == majority;
  out.closed_form = majority_closed_form(static_cast<double>(hits) /
                                         static_cast<double>(out.report.predictions.size()));
  return out;
}

}  // namespace predaspect::cli
