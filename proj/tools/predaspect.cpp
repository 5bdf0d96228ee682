// Command-line driver: run, sweep, subsample, stats, analyze, baseline.

#include <cstdio>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "predaspect/cli.hpp"
#include "predaspect/error.hpp"
#include "predaspect/text.hpp"

namespace {

using namespace predaspect;

struct Overrides {
  std::optional<std::string> config;
  std::optional<std::string> embeddings;
  std::optional<std::string> embeddings_format;
  std::optional<std::string> utf8;
  std::optional<std::string> conllu;
  std::optional<std::string> index;
  std::optional<std::string> label_set;
  std::optional<std::string> name;
  std::optional<std::string> merge;
  std::optional<std::string> keep;
  std::optional<std::string> context;
  std::optional<std::string> protocol;
  std::optional<std::size_t> k;
  std::optional<std::uint64_t> seed;
  std::optional<double> c;
  std::optional<double> tol;
  std::optional<std::size_t> max_iter;
  std::optional<std::string> out_dir;
  std::optional<std::size_t> threads;
  bool no_stratify = false;
  bool average = false;
};

void add_common(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config, "JSON experiment config");
  app->add_option("--embeddings", o.embeddings, "embedding file");
  app->add_option("--embeddings-format", o.embeddings_format, "word2vec-binary | glove-text");
  app->add_option("--utf8", o.utf8, "invalid UTF-8 tokens: reject | replace");
  app->add_option("--conllu", o.conllu, "CoNLL-U treebank");
  app->add_option("--index", o.index, "instance index TSV");
  app->add_option("--label-set", o.label_set, "comma-separated label order");
  app->add_option("--name", o.name, "dataset name");
  app->add_option("--merge", o.merge, "label merge, e.g. telic=event,atelic=event");
  app->add_option("--keep", o.keep, "comma-separated labels to keep");
  app->add_option("--context", o.context, "verb | window:K | dep-head | dep-children | dep-full | sentence");
  app->add_option("--protocol", o.protocol, "loo | kfold:K | doc-cv:K | fixed | verb-holdout");
  app->add_option("--k", o.k, "default fold count");
  app->add_option("--seed", o.seed, "seed for folds and subsampling");
  app->add_option("--c", o.c, "inverse L2 regularisation strength");
  app->add_option("--tol", o.tol, "gradient tolerance");
  app->add_option("--max-iter", o.max_iter, "optimizer iteration cap");
  app->add_option("--out-dir", o.out_dir, "output directory");
  app->add_option("--threads", o.threads, "worker threads (0 = all cores)");
  app->add_flag("--no-stratify", o.no_stratify, "plain (unstratified) k-fold");
  app->add_flag("--average", o.average, "average instead of sum when composing");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  for (const auto& item : text::split(s, ',')) {
    auto t = std::string(text::trim(item));
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

cli::RunConfig resolve(const Overrides& o) {
  auto c = o.config ? cli::load_config(*o.config) : cli::RunConfig{};
  if (o.embeddings) c.embeddings = *o.embeddings;
  if (o.embeddings_format) c.embeddings_format = parse_embedding_format(*o.embeddings_format);
  if (o.utf8) {
    if (*o.utf8 == "replace") {
      c.utf8 = Utf8Policy::kReplace;
    } else if (*o.utf8 == "reject") {
      c.utf8 = Utf8Policy::kReject;
    } else {
      throw ConfigError("--utf8 must be reject or replace");
    }
  }
  if (o.conllu) c.conllu = *o.conllu;
  if (o.index) c.index = *o.index;
  if (o.label_set) c.label_set = split_list(*o.label_set);
  if (o.name) c.name = *o.name;
  if (o.merge) c.merge = parse_label_mapping(*o.merge);
  if (o.keep) c.keep = split_list(*o.keep);
  if (o.context) c.context = *o.context;
  if (o.protocol) c.protocol = *o.protocol;
  if (o.k) c.k = *o.k;
  if (o.seed) c.seed = *o.seed;
  if (o.c) c.train.c = *o.c;
  if (o.tol) c.train.tolerance = *o.tol;
  if (o.max_iter) c.train.max_iterations = *o.max_iter;
  if (o.out_dir) c.out_dir = *o.out_dir;
  if (o.threads) c.threads = *o.threads;
  if (o.no_stratify) c.stratified = false;
  if (o.average) c.average = true;
  return c;
}

void print_metrics(const Metrics& m) {
  std::printf("accuracy %.1f", 100.0 * m.accuracy);
  for (std::size_t c = 0; c < m.labels.size(); ++c) {
    std::printf("  F1(%s) %.1f", m.labels[c].c_str(), 100.0 * m.per_class[c].f1);
  }
  std::printf("  (n=%zu)\n", m.total);
}

void print_fold_summary(const EvalReport& r) {
  if (!r.fold_accuracy) return;
  std::printf("fold accuracy %.4f (+- %.4f)", r.fold_accuracy->mean, r.fold_accuracy->std);
  for (std::size_t c = 0; c < r.labels.size(); ++c) {
    std::printf("  F1(%s) %.4f (+- %.4f)", r.labels[c].c_str(), r.fold_f1[c].mean, r.fold_f1[c].std);
  }
  std::printf("\n");
}

int fail(const std::string& kind, const std::string& message) {
  nlohmann::json j = {{"error", {{"kind", kind}, {"message", message}}}};
  std::cerr << j.dump() << std::endl;
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Predicational aspect classification experiments"};
  app.require_subcommand(1);

  Overrides run_o, sweep_o, sub_o, stats_o, base_o;
  auto* run = app.add_subcommand("run", "compose, evaluate and write report/log/manifest");
  add_common(run, run_o);

  auto* sweep = app.add_subcommand("sweep", "evaluate a range of context windows");
  add_common(sweep, sweep_o);
  std::string sizes = "1,2,3,5,10";
  bool with_dep = false;
  sweep->add_option("--sizes", sizes, "window sizes, plus 'verb' and 'sentence'");
  sweep->add_flag("--dep", with_dep, "also evaluate dep-head, dep-children and dep-full");

  auto* subsample = app.add_subcommand("subsample", "build an ambiguity-focused subsample");
  add_common(subsample, sub_o);
  double threshold = 0.6;
  subsample->add_option("--max-majority", threshold, "largest allowed per-lemma majority fraction");

  auto* stats = app.add_subcommand("stats", "corpus statistics as JSON");
  add_common(stats, stats_o);
  std::optional<std::string> profile;
  std::optional<std::string> pos_contexts;
  stats->add_option("--profile", profile, "compare with reference corpus counts (diaspora, asp-ambig, ...)");
  stats->add_option("--pos-contexts", pos_contexts, "comma-separated contexts for PoS distributions");

  auto* analyze = app.add_subcommand("analyze", "PoS accuracy and per-verb breakdown of a log");
  std::string log_path;
  std::optional<std::string> partition;
  std::string analyze_out = "analysis";
  analyze->add_option("--log", log_path, "prediction log TSV")->required();
  analyze->add_option("--partition", partition, "closed/open tag partition JSON");
  analyze->add_option("--out-dir", analyze_out, "output directory");

  auto* baseline = app.add_subcommand("baseline", "majority-class baseline");
  add_common(baseline, base_o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*run) {
      const auto r = cli::cmd_run(resolve(run_o));
      print_metrics(r.report.pooled);
      print_fold_summary(r.report);
      std::printf("target OOV %zu, context OOV %zu/%zu, degenerate folds %zu, unconverged models %zu\n",
                  r.oov.targets_oov, r.oov.context_oov, r.oov.context_tokens,
                  r.report.degenerate_folds, r.report.unconverged_models);
      for (const auto& w : r.report.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
      std::printf("wrote %s\n", r.report_path.c_str());
    } else if (*sweep) {
      auto points = parse_sweep_points(sizes);
      if (with_dep) {
        points.push_back(ContextSpec::dep_head());
        points.push_back(ContextSpec::dep_children());
        points.push_back(ContextSpec::dep_full());
      }
      const auto r = cli::cmd_sweep(resolve(sweep_o), points);
      for (const auto& row : r.rows) {
        std::printf("%-14s ", to_string(row.context).c_str());
        print_metrics(row.report.pooled);
      }
      std::printf("wrote %s\n", r.tsv_path.c_str());
    } else if (*subsample) {
      const auto r = cli::cmd_subsample(resolve(sub_o), threshold);
      std::printf("%zu -> %zu instances\nwrote %s\n", r.before, r.after, r.index_path.c_str());
    } else if (*stats) {
      std::vector<ContextSpec> contexts;
      if (pos_contexts) {
        for (const auto& c : split_list(*pos_contexts)) contexts.push_back(parse_context_spec(c));
      }
      const auto j = cli::cmd_stats(resolve(stats_o), profile, contexts);
      std::cout << j.dump(2) << std::endl;
      if (j.contains("profile") && !j["profile"]["matches"].get<bool>()) return 2;
    } else if (*analyze) {
      const auto r = cli::cmd_analyze(log_path, partition, analyze_out);
      auto show = [](const char* name, const std::optional<double>& v) {
        if (v) {
          std::printf("%s %.4f\n", name, *v);
        } else {
          std::printf("%s n/a\n", name);
        }
      };
      show("closed-class accuracy", r.groups.closed);
      show("open-class accuracy", r.groups.open);
      std::printf("wrote %s\n", (std::filesystem::path(analyze_out) / "pos_accuracy.tsv").c_str());
    } else if (*baseline) {
      const auto r = cli::cmd_baseline(resolve(base_o));
      print_metrics(r.report.pooled);
      print_fold_summary(r.report);
      std::printf("closed form: accuracy %.1f  F1(majority) %.1f  F1(minority) %.1f\n",
                  100.0 * r.closed_form.accuracy, 100.0 * r.closed_form.majority_f1,
                  100.0 * r.closed_form.minority_f1);
    }
  } catch (const Error& e) {
    return fail(e.kind(), e.what());
  } catch (const std::exception& e) {
    return fail("internal", e.what());
  }
  return 0;
}
