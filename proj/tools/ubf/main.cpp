// ubf: command-line front end of the unrelated-build-failure pipeline.
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 internal error.

#include <filesystem>
#include <functional>
#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "config.hpp"
#include "ubf/error.hpp"

namespace {

using namespace ubf::cli;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

struct Flags {
  PipelineConfig config;
  Options opt;
  std::string config_file;
  std::uint64_t seed = 0;
  double pi_hat = 0.0;
  std::vector<CLI::Option*> seed_options;
  std::vector<CLI::Option*> pi_options;
};

void add_config(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config_file, "JSON pipeline config; its values override flags");
  sub->add_option("--output-dir", f.config.output_dir, "Directory for relative output paths");
}

void add_corpus(CLI::App* sub, Flags& f) {
  sub->add_option("--corpus", f.config.corpus, "Issue export (one JSON record per line)");
  sub->add_option("--project", f.config.project, "Project key, e.g. HIVE");
  sub->add_option("--bot", f.config.bot, "QA bot author name (detected when omitted)");
  sub->add_option("--keyword", f.config.keywords, "Unrelated-failure phrase (repeatable)");
}

void add_seed(CLI::App* sub, Flags& f) {
  f.seed_options.push_back(sub->add_option("--seed", f.seed, "Random seed (required)"));
}

void add_model(CLI::App* sub, Flags& f) {
  auto& m = f.config.model;
  sub->add_option("--mode", m.mode, "PU variant: classic or weighted")->capture_default_str();
  sub->add_option("--trees", m.n_trees, "Trees per forest")->capture_default_str();
  sub->add_option("--max-depth", m.max_depth, "Maximum tree depth")->capture_default_str();
  sub->add_option("--min-leaf-weight", m.min_leaf_weight, "Minimum sample weight per leaf")
      ->capture_default_str();
  sub->add_option("--feature-subsample", m.feature_subsample,
                  "Share of features tried per split (0: 1/sqrt(p))");
  sub->add_option("--holdout", m.holdout_fraction, "Share of P held out to estimate c")
      ->capture_default_str();
  sub->add_option("--threshold", m.threshold, "Decision threshold")->capture_default_str();
}

void add_eval(CLI::App* sub, Flags& f) {
  sub->add_option("--folds", f.config.eval.folds, "Cross-validation folds")->capture_default_str();
  sub->add_option("--runs", f.config.eval.runs, "Repeated runs")->capture_default_str();
}

void add_inputs(CLI::App* sub, Flags& f, bool with_labels = true) {
  sub->add_option("--features", f.opt.features, "Feature matrix CSV");
  sub->add_option("--selection", f.opt.selection, "Selection report restricting the features");
  if (with_labels) sub->add_option("--labels", f.config.labels, "Manual labels CSV (P/Q/N)");
}

int classify(const std::exception& e) {
  if (const auto* u = dynamic_cast<const ubf::Error*>(&e)) {
    return u->kind() == ubf::ErrorKind::Data ? kExitData : kExitInternal;
  }
  if (dynamic_cast<const UsageError*>(&e)) return kExitUsage;
  if (dynamic_cast<const std::filesystem::filesystem_error*>(&e)) return kExitData;
  if (dynamic_cast<const nlohmann::json::exception*>(&e)) return kExitData;
  return kExitInternal;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Identify CI build failures unrelated to the triggering push"};
  app.require_subcommand(1);
  Flags f;
  std::map<CLI::App*, std::function<void()>> actions;
  auto command = [&](const char* name, const char* help, void (*fn)(const PipelineConfig&, const Options&)) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_config(sub, f);
    actions[sub] = [fn, &f] { fn(f.config, f.opt); };
    return sub;
  };

  auto* ingest = command("ingest", "Validate and normalize an issue export", run_ingest);
  add_corpus(ingest, f);
  ingest->add_option("--out", f.opt.out, "Normalized corpus");
  ingest->add_option("--violations", f.opt.violations, "CSV of invariant violations");
  ingest->add_flag("--lenient", f.opt.lenient, "Drop violating issues instead of failing");

  auto* label = command("label", "Heuristically flag potentially unrelated failures", run_label);
  add_corpus(label, f);
  label->add_option("--out", f.opt.out, "One JSON record per failure event");
  label->add_option("--summary", f.opt.summary, "Prevalence and time-misspent summary");

  auto* features = command("features", "Extract the 33 features per failure event", run_features);
  add_corpus(features, f);
  features->add_option("--similar-failures", f.config.similar_failures, "count or sum")
      ->capture_default_str();
  features->add_option("--out", f.opt.out, "Feature matrix CSV");

  auto* select = command("select", "Correlation and redundancy feature filter", run_select);
  select->add_option("--features", f.opt.features, "Feature matrix CSV");
  select->add_option("--rho", f.opt.rho, "Spearman |rho| threshold")->capture_default_str();
  select->add_option("--r2", f.opt.r2, "Redundancy R^2 threshold")->capture_default_str();
  select->add_option("--priority", f.config.selection_priority, "Preferred survivors, in order");
  select->add_option("--out", f.opt.out, "Selection report (JSON)");
  select->add_option("--dendrogram", f.opt.dendrogram, "Text dendrogram");

  auto* train = command("train", "Fit a PU model", run_train);
  add_inputs(train, f);
  add_model(train, f);
  add_seed(train, f);
  train->add_option("--out", f.opt.out, "Model file (JSON)");

  auto* predict = command("predict", "Score failure events with a fitted model", run_predict);
  predict->add_option("--model", f.opt.model_file, "Model file");
  predict->add_option("--input,--features", f.opt.features, "Feature matrix CSV");
  predict->add_option("--out", f.opt.out, "Predictions CSV");

  auto* eval = command("eval", "Cross-validated comparison against the baselines", run_eval);
  add_inputs(eval, f);
  add_model(eval, f);
  add_eval(eval, f);
  add_seed(eval, f);
  eval->add_option("--model", f.opt.models,
                   "weighted, classic, random, constant, hpem or all (repeatable)");
  eval->add_option("--out", f.opt.out, "Evaluation report (JSON)");
  eval->add_option("--scores", f.opt.scores_out, "Out-of-fold scores of the first run (CSV)");

  auto* scar = command("scar-test", "Bootstrap test of the SCAR assumption", run_scar_test);
  add_inputs(scar, f);
  add_seed(scar, f);
  scar->add_option("--bootstrap,-B", f.opt.bootstrap, "Null replicates")->capture_default_str();
  scar->add_option("--alpha", f.opt.alpha, "Significance level")->capture_default_str();
  f.pi_options.push_back(scar->add_option("--pi-hat", f.pi_hat, "Class prior of U"));
  scar->add_option("--out", f.opt.out, "Test result (JSON)");
  scar->add_option("--null", f.opt.null_out, "Null distribution (CSV)");

  auto* importance = command("importance", "Permutation feature importance per project", run_importance);
  add_inputs(importance, f);
  add_model(importance, f);
  add_eval(importance, f);
  add_seed(importance, f);
  importance->add_option("--dataset", f.opt.datasets, "NAME:FEATURES[:LABELS] (repeatable)");
  importance->add_option("--project", f.config.project, "Name when --features is used");
  importance->add_option("--metric", f.opt.metric, "recall, f1 or auc")->capture_default_str();
  importance->add_option("--repeats", f.opt.repeats, "Shuffles per feature")->capture_default_str();
  importance->add_option("--top", f.opt.top_k, "Annotate the top k features")->capture_default_str();
  importance->add_option("--out", f.opt.out, "Importance table (CSV)");

  auto* cross = command("crossproject", "Leave-one-project-out validation", run_crossproject);
  add_model(cross, f);
  add_eval(cross, f);
  add_seed(cross, f);
  cross->add_option("--selection", f.opt.selection, "Selection report restricting the features");
  cross->add_option("--dataset", f.opt.datasets, "NAME:FEATURES[:LABELS] (repeatable)");
  cross->add_option("--model", f.opt.models, "classic and/or weighted (repeatable)");
  cross->add_option("--out", f.opt.out, "Per-project table (CSV)");

  auto* synth = command("synth", "Generate a synthetic PU dataset", run_synth);
  auto& g = f.opt.synth;
  synth->add_option("--n", g.n, "Rows")->capture_default_str();
  synth->add_option("--pi", g.pi, "Class prior")->capture_default_str();
  synth->add_option("--c", g.c_true, "Label frequency")->capture_default_str();
  synth->add_option("--dim", g.dim, "Feature count")->capture_default_str();
  synth->add_option("--separation", g.separation, "Distance between class means")->capture_default_str();
  synth->add_option("--bias", g.labeling_bias, "Labeling bias (0 = SCAR)")->capture_default_str();
  add_seed(synth, f);
  synth->add_option("--out", f.opt.out, "Feature matrix CSV with s and y_true");

  auto* report = command("report", "Collate outputs into a markdown summary", run_report);
  add_corpus(report, f);
  report->add_option("--label-summary", f.opt.label_summary, "Output of label --summary");
  report->add_option("--selection", f.opt.selection, "Output of select");
  report->add_option("--eval", f.opt.eval_report, "Output of eval");
  report->add_option("--importance", f.opt.importance_csv, "Output of importance");
  report->add_option("--scar", f.opt.scar_report, "Output of scar-test");
  report->add_option("--crossproject", f.opt.crossproject_csv, "Output of crossproject");
  report->add_option("--out", f.opt.out, "Markdown report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    for (const CLI::Option* o : f.seed_options) {
      if (o->count() > 0) f.config.eval.seed = f.seed;
    }
    for (const CLI::Option* o : f.pi_options) {
      if (o->count() > 0) f.opt.pi_hat = f.pi_hat;
    }
    if (!f.config_file.empty()) apply_config_file(f.config, f.config_file);
    for (auto& [sub, action] : actions) {
      if (sub->parsed()) action();
    }
  } catch (const std::exception& e) {
    std::cerr << "ubf: " << e.what() << "\n";
    return classify(e);
  }
  return 0;
}
