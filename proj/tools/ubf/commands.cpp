#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ubf/ci_events.hpp"
#include "ubf/corpus.hpp"
#include "ubf/csv.hpp"
#include "ubf/error.hpp"
#include "ubf/evaluation.hpp"
#include "ubf/feature_table.hpp"
#include "ubf/features.hpp"
#include "ubf/heuristics.hpp"
#include "ubf/importance.hpp"
#include "ubf/io.hpp"
#include "ubf/random.hpp"
#include "ubf/scar.hpp"
#include "ubf/selection.hpp"

namespace ubf::cli {

namespace {

using nlohmann::json;

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json read_json(const std::filesystem::path& path) {
  try {
    return json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void check_format(const json& j, const char* format, const std::filesystem::path& path) {
  if (!j.is_object() || j.value("format", std::string()) != format) {
    throw ParseError(path.string() + " is not a " + format + " file");
  }
}

std::string require_out(const Options& opt) {
  if (opt.out.empty()) throw UsageError("missing --out");
  return opt.out;
}

CiConfig ci_config(const PipelineConfig& config) {
  CiConfig ci;
  if (!config.bot.empty()) ci.qa_bot_override = config.bot;
  return ci;
}

const std::vector<std::string>& keywords(const PipelineConfig& config) {
  return config.keywords.empty() ? default_unrelated_keywords() : config.keywords;
}

Corpus load_input_corpus(const PipelineConfig& config) {
  return load_corpus(input_path(config.corpus, "--corpus"), config.project);
}

std::vector<std::string> read_retained(const std::string& path) {
  const auto p = input_path(path, "--selection");
  const json j = read_json(p);
  check_format(j, "ubf-selection", p);
  return j.at("retained").get<std::vector<std::string>>();
}

// Feature table restricted to the selection's retained columns, if any.
FeatureTable load_table(const std::string& features, const std::string& selection) {
  FeatureTable t = load_feature_table(input_path(features, "--features"));
  if (!selection.empty()) {
    const auto retained = read_retained(selection);
    t = t.with_features(retained);
  }
  return t;
}

// Manual labels when given, otherwise generator truth when the table has it,
// otherwise heuristic P against everything else.
PQNSplit load_split(const FeatureTable& table, const std::string& labels) {
  if (!labels.empty()) {
    const auto manual = load_manual_labels(input_path(labels, "--labels"));
    return build_pqn(table, manual);
  }
  if (table.y_true) return build_pqn_from_truth(table);
  return build_pqn(table, {});
}

bool has_confirmed_sample(const FeatureTable& table, const std::string& labels) {
  return !labels.empty() || table.y_true.has_value();
}

Matrix unlabeled_of(const PQNSplit& split) { return Matrix::vstack(split.q.x, split.n.x); }

ModelKind model_kind(const std::string& name) {
  if (name == "constant") return ModelKind::ConstantPositive;
  const auto k = parse_model_kind(name);
  if (!k) throw UsageError("unknown model: " + name);
  return *k;
}

// "all" expands to every model the data supports; HPEM needs hpem_match.
std::vector<ModelKind> model_list(const std::vector<std::string>& names,
                                  const std::vector<std::string>& fallback, bool has_hpem = false) {
  const auto& src = names.empty() ? fallback : names;
  std::vector<ModelKind> out;
  for (const auto& n : src) {
    if (n == "all") {
      out = {ModelKind::Weighted, ModelKind::Classic, ModelKind::Random,
             ModelKind::ConstantPositive};
      if (has_hpem) out.push_back(ModelKind::Hpem);
      return out;
    }
    out.push_back(model_kind(n));
  }
  return out;
}

json metrics_json(const MetricSet& m) {
  return {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"auc", m.auc}};
}

json summary_json(const MetricSummary& s) {
  return {{"median", s.median}, {"mean", s.mean}, {"std", s.std}};
}

json confusion_json(const CombinedConfusion& c) {
  return {{"a", c.a}, {"b", c.b}, {"c", c.c_fp}, {"d", c.d}};
}

json run_summary_json(const RunSummary& s) {
  return {{"precision", summary_json(s.precision)},
          {"recall", summary_json(s.recall)},
          {"f1", summary_json(s.f1)},
          {"auc", summary_json(s.auc)}};
}

struct Dataset {
  std::string name;
  std::string features;
  std::string labels;
};

std::vector<Dataset> parse_datasets(const PipelineConfig& config, const Options& opt) {
  std::vector<Dataset> out;
  for (const auto& spec : opt.datasets) {
    Dataset d;
    std::stringstream ss(spec);
    std::getline(ss, d.name, ':');
    std::getline(ss, d.features, ':');
    std::getline(ss, d.labels);
    if (d.name.empty() || d.features.empty()) {
      throw UsageError("--dataset expects NAME:FEATURES[:LABELS], got " + spec);
    }
    out.push_back(std::move(d));
  }
  if (out.empty() && !opt.features.empty()) {
    out.push_back({config.project.empty() ? "project" : config.project, opt.features,
                   config.labels});
  }
  return out;
}

std::vector<ProjectData> load_projects(const std::vector<Dataset>& datasets,
                                       const std::string& selection) {
  std::vector<ProjectData> projects;
  for (const auto& d : datasets) {
    const FeatureTable t = load_table(d.features, selection);
    projects.push_back({d.name, load_split(t, d.labels)});
  }
  return align_to_common_features(projects);
}

std::string fmt(double v) { return format_double(v); }

}  // namespace

void run_ingest(const PipelineConfig& config, const Options& opt) {
  const auto in = input_path(config.corpus, "--corpus");
  Corpus corpus = read_corpus_records(in, config.project);
  for (auto& issue : corpus.issues) {
    std::stable_sort(issue.comments.begin(), issue.comments.end(),
                     [](const Comment& a, const Comment& b) { return a.posted_at < b.posted_at; });
  }
  const auto violations = validate_corpus(corpus);
  if (!opt.violations.empty()) {
    std::string csv = "#schema=ubf-violations-v1\n" + join_csv({"issue_id", "rule", "detail"}) + "\n";
    for (const auto& v : violations) csv += join_csv({v.issue_id, v.rule, v.detail}) + "\n";
    write_file_atomic(output_path(config, opt.violations), csv);
  }
  std::size_t comments = 0;
  for (const auto& issue : corpus.issues) comments += issue.comments.size();
  std::cout << json{{"issues", corpus.issues.size()},
                    {"comments", comments},
                    {"violations", violations.size()}}
                   .dump()
            << "\n";
  if (!violations.empty()) {
    if (!opt.lenient) {
      throw DataError(std::to_string(violations.size()) + " corpus violations, first: " +
                      violations.front().issue_id + " " + violations.front().rule);
    }
    std::vector<std::string> bad;
    for (const auto& v : violations) bad.push_back(v.issue_id);
    std::erase_if(corpus.issues, [&](const IssueReport& i) {
      return std::find(bad.begin(), bad.end(), i.issue_id) != bad.end();
    });
  }
  if (corpus.issues.empty()) throw EmptyCorpus("no valid issues to write");
  save_corpus(corpus, output_path(config, require_out(opt)));
}

void run_label(const PipelineConfig& config, const Options& opt) {
  const Corpus corpus = load_input_corpus(config);
  const CorpusLabeling labeling = label_corpus(corpus, ci_config(config), keywords(config));

  std::map<std::pair<std::string, std::size_t>, double> hours;
  for (const auto& t : labeling.time_misspent) hours[{t.issue_id, t.comment_index}] = t.hours;

  std::string lines;
  for (const auto& l : labeling.labels) {
    json rec{{"issue_id", l.issue_id},
             {"event_index", l.comment_index},
             {"flagged", l.flagged},
             {"keyword", l.matched_keyword ? json(*l.matched_keyword) : json(nullptr)}};
    if (const auto it = hours.find({l.issue_id, l.comment_index}); it != hours.end()) {
      rec["hours_misspent"] = it->second;
    }
    lines += rec.dump() + "\n";
  }
  write_file_atomic(output_path(config, require_out(opt)), lines);

  const auto tm = summarize_time_misspent(labeling.time_misspent);
  const json summary{
      {"format", "ubf-label-summary"},
      {"version", 1},
      {"project", corpus.project},
      {"bot", labeling.bot},
      {"failures", labeling.failure_count()},
      {"flagged", labeling.flagged_count()},
      {"prevalence", prevalence(labeling.flagged_count(), labeling.failure_count())},
      {"time_misspent",
       {{"n", tm.n}, {"median", tm.median}, {"mean", tm.mean}, {"total", tm.total},
        {"stddev", tm.stddev}}}};
  if (!opt.summary.empty()) write_file_atomic(output_path(config, opt.summary), dump(summary));
  std::cout << summary.dump() << "\n";
}

void run_features(const PipelineConfig& config, const Options& opt) {
  const Corpus corpus = load_input_corpus(config);
  const CorpusLabeling labeling = label_corpus(corpus, ci_config(config), keywords(config));
  const auto rows = extract_corpus_features(corpus, labeling, feature_config(config));
  const FeatureTable table = make_feature_table(rows);
  save_feature_table(table, output_path(config, require_out(opt)));
  std::cout << json{{"rows", table.rows()}, {"features", table.feature_names.size()}}.dump()
            << "\n";
}

void run_select(const PipelineConfig& config, const Options& opt) {
  const FeatureTable table = load_table(opt.features, "");
  const auto priority =
      config.selection_priority.empty() ? default_selection_priority() : config.selection_priority;
  const SelectionReport report =
      select_features(table.x, table.feature_names, opt.rho, opt.r2, priority);

  json removed = json::array();
  for (const auto& r : report.removed) {
    removed.push_back({{"feature", r.feature},
                       {"reason", r.reason == RemovedFeature::Reason::CorrelatedWith
                                      ? "correlated_with"
                                      : "redundant"},
                       {"kept", r.kept},
                       {"value", r.value},
                       {"describe", r.describe()}});
  }
  json rho = json::array();
  for (std::size_t i = 0; i < report.rho.rows(); ++i) {
    const auto row = report.rho.row(i);
    rho.push_back(std::vector<double>(row.begin(), row.end()));
  }
  json linkage = json::array();
  for (const auto& s : report.linkage) {
    linkage.push_back({{"left", s.left}, {"right", s.right}, {"distance", s.distance}, {"size", s.size}});
  }
  const json j{{"format", "ubf-selection"},
               {"version", 1},
               {"rho_threshold", opt.rho},
               {"r2_threshold", opt.r2},
               {"features", report.features},
               {"retained", report.retained},
               {"removed", removed},
               {"rho", rho},
               {"linkage", linkage}};
  write_file_atomic(output_path(config, require_out(opt)), dump(j));
  if (!opt.dendrogram.empty()) {
    write_file_atomic(output_path(config, opt.dendrogram), render_dendrogram(report));
  }
  std::cout << json{{"retained", report.retained.size()}, {"removed", report.removed.size()}}.dump()
            << "\n";
}

void run_train(const PipelineConfig& config, const Options& opt) {
  const std::uint64_t seed = require_seed(config);
  const auto mode = parse_pu_mode(config.model.mode);
  if (!mode) throw UsageError("--mode must be classic or weighted");
  const FeatureTable table = load_table(opt.features, opt.selection);
  const PQNSplit split = load_split(table, config.labels);
  PUModel model = fit_pu(*mode, split.p.x, unlabeled_of(split), pu_params(config, seed));
  model.features = table.feature_names;
  write_file_atomic(output_path(config, require_out(opt)), dump(model.to_json()));
  std::cout << json{{"mode", to_string(*mode)},
                    {"c_hat", model.c_hat},
                    {"positives", split.size_p()},
                    {"unlabeled", split.size_q() + split.size_n()}}
                   .dump()
            << "\n";
}

void run_predict(const PipelineConfig& config, const Options& opt) {
  const PUModel model = PUModel::from_json(read_json(input_path(opt.model_file, "--model")));
  const FeatureTable table = load_table(opt.features, "").with_features(model.features);
  const auto scores = model.predict(table.x);
  std::string csv = "#schema=ubf-predictions-v1\n" +
                    join_csv({"issue_id", "event_index", "score", "verdict"}) + "\n";
  for (std::size_t r = 0; r < table.rows(); ++r) {
    const Verdict v = scores[r] >= model.threshold ? Verdict::Unrelated : Verdict::NotFlagged;
    csv += join_csv({table.issue_ids[r], std::to_string(table.event_indices[r]), fmt(scores[r]),
                     std::string(to_string(v))}) +
           "\n";
  }
  write_file_atomic(output_path(config, require_out(opt)), csv);
}

void run_eval(const PipelineConfig& config, const Options& opt) {
  const std::uint64_t seed = require_seed(config);
  if (config.eval.runs == 0) throw UsageError("--runs must be positive");
  const FeatureTable table = load_table(opt.features, opt.selection);
  const PQNSplit split = load_split(table, config.labels);
  const EvalParams params = eval_params(config, seed);

  json models = json::array();
  std::string scores_csv = "#schema=ubf-scores-v1\n" + join_csv({"model", "score", "actual"}) + "\n";
  for (ModelKind kind : model_list(opt.models, {"weighted"}, table.hpem_match.has_value())) {
    // Run 0 of repeat_runs uses derive_seed(seed, 0); its matrices are shown.
    const CvResult first = run_cv(split, kind, params, derive_seed(seed, 0));
    const RunSummary summary = repeat_runs(split, kind, params, config.eval.runs, seed);
    json per_fold = json::array();
    for (const auto& c : first.per_fold) per_fold.push_back(confusion_json(c));
    models.push_back({{"model", to_string(kind)},
                      {"combined", confusion_json(first.combined)},
                      {"per_fold", per_fold},
                      {"metrics", metrics_json(first.metrics)},
                      {"summary", run_summary_json(summary)}});
    for (std::size_t i = 0; i < first.scores.size(); ++i) {
      scores_csv += join_csv({std::string(to_string(kind)), fmt(first.scores[i]),
                              std::to_string(first.actual[i])}) +
                    "\n";
    }
  }
  const json j{{"format", "ubf-eval"},
               {"version", 1},
               {"provenance", split.provenance},
               {"sizes", {{"p", split.size_p()}, {"q", split.size_q()}, {"n", split.size_n()}}},
               {"folds", params.folds},
               {"runs", config.eval.runs},
               {"seed", seed},
               {"threshold", params.pu.threshold},
               {"models", models}};
  write_file_atomic(output_path(config, require_out(opt)), dump(j));
  if (!opt.scores_out.empty()) write_file_atomic(output_path(config, opt.scores_out), scores_csv);
}

void run_scar_test(const PipelineConfig& config, const Options& opt) {
  const std::uint64_t seed = require_seed(config);
  if (opt.bootstrap == 0) throw UsageError("--bootstrap must be positive");
  const FeatureTable table = load_table(opt.features, opt.selection);
  const PQNSplit split = load_split(table, config.labels);

  ScarParams params;
  params.bootstrap = opt.bootstrap;
  params.alpha = opt.alpha;
  params.seed = seed;
  params.pi_hat = opt.pi_hat;
  if (has_confirmed_sample(table, config.labels)) params.q_count = split.size_q();
  const ScarTestResult r = scar_test(split.p.x, unlabeled_of(split), params);
  const std::string verdict = r.reject ? "SCAR rejected" : "SCAR not rejected";

  const json j{{"format", "ubf-scar-test"},
               {"version", 1},
               {"statistic", r.statistic},
               {"p_value", r.p_value},
               {"pi_hat", r.pi_hat},
               {"pi_source", r.pi_source},
               {"B", r.bootstrap},
               {"alpha", r.alpha},
               {"c_hat_emp", r.c_hat_emp},
               {"n_positive", r.n_positive},
               {"n_unlabeled", r.n_unlabeled},
               {"n_estimated_positive", r.n_estimated_positive},
               {"reject", r.reject},
               {"verdict", verdict},
               {"notes", r.notes}};
  if (!opt.out.empty()) write_file_atomic(output_path(config, opt.out), dump(j));
  if (!opt.null_out.empty()) {
    std::string csv = "#schema=ubf-scar-null-v1\n" + join_csv({"replicate", "auc"}) + "\n";
    for (std::size_t i = 0; i < r.null_distribution.size(); ++i) {
      csv += std::to_string(i) + "," + fmt(r.null_distribution[i]) + "\n";
    }
    write_file_atomic(output_path(config, opt.null_out), csv);
  }
  std::cout << json{{"statistic", r.statistic},
                    {"p_value", r.p_value},
                    {"pi_hat", r.pi_hat},
                    {"B", r.bootstrap},
                    {"verdict", verdict}}
                   .dump()
            << "\n";
}

void run_importance(const PipelineConfig& config, const Options& opt) {
  const std::uint64_t seed = require_seed(config);
  const auto metric = parse_importance_metric(opt.metric);
  if (!metric) throw UsageError("--metric must be recall, f1 or auc");
  const auto mode = parse_pu_mode(config.model.mode);
  if (!mode) throw UsageError("--mode must be classic or weighted");
  if (opt.repeats == 0) throw UsageError("--repeats must be positive");
  const auto datasets = parse_datasets(config, opt);
  if (datasets.empty()) throw UsageError("importance needs --dataset or --features");
  const auto projects = load_projects(datasets, opt.selection);
  const EvalParams params = eval_params(config, seed);

  std::vector<ImportanceReport> reports;
  for (std::size_t k = 0; k < projects.size(); ++k) {
    reports.push_back(cv_importance(projects[k].split, *mode, params, *metric, opt.repeats,
                                    derive_seed(seed, k)));
  }

  std::vector<std::string> header{"feature"};
  for (const auto& p : projects) {
    for (const char* col : {"mean", "std", "median", "rank", "top"}) header.push_back(p.name + ":" + col);
  }
  std::string csv = "#schema=ubf-importance-v1 metric=" + opt.metric + "\n" + join_csv(header) + "\n";
  for (const auto& name : projects.front().split.p.feature_names) {
    std::vector<std::string> row{name};
    for (const auto& rep : reports) {
      const auto it = std::find_if(rep.features.begin(), rep.features.end(),
                                   [&](const FeatureImportance& f) { return f.feature == name; });
      if (it == rep.features.end()) throw InternalError("importance report lacks " + name);
      row.push_back(fmt(it->mean));
      row.push_back(fmt(it->std));
      row.push_back(fmt(it->median));
      row.push_back(std::to_string(it->rank));
      row.push_back(it->rank <= opt.top_k ? "Top " + std::to_string(it->rank) : "");
    }
    csv += join_csv(row) + "\n";
  }
  write_file_atomic(output_path(config, require_out(opt)), csv);
}

void run_crossproject(const PipelineConfig& config, const Options& opt) {
  const std::uint64_t seed = require_seed(config);
  if (config.eval.runs == 0) throw UsageError("--runs must be positive");
  const auto datasets = parse_datasets(config, opt);
  if (datasets.size() < 2) throw UsageError("crossproject needs at least two --dataset entries");
  const auto projects = load_projects(datasets, opt.selection);
  const EvalParams params = eval_params(config, seed);

  std::vector<std::string> header{"project", "model"};
  for (const char* m : {"precision", "recall", "f1", "auc"}) {
    for (const char* s : {"median", "mean", "std"}) header.push_back(std::string(m) + "_" + s);
  }
  std::string csv = "#schema=ubf-crossproject-v1\n" + join_csv(header) + "\n";
  for (ModelKind kind : model_list(opt.models, {"classic", "weighted"})) {
    const auto rows = cross_project_validate(projects, kind, params, config.eval.runs, seed);
    for (const auto& r : rows) {
      std::vector<std::string> fields{r.project, std::string(to_string(kind))};
      for (const MetricSummary* s : {&r.summary.precision, &r.summary.recall, &r.summary.f1, &r.summary.auc}) {
        fields.push_back(fmt(s->median));
        fields.push_back(fmt(s->mean));
        fields.push_back(fmt(s->std));
      }
      csv += join_csv(fields) + "\n";
    }
  }
  write_file_atomic(output_path(config, require_out(opt)), csv);
}

void run_synth(const PipelineConfig& config, const Options& opt) {
  GeneratorSpec spec = opt.synth;
  spec.seed = require_seed(config);
  const SyntheticData data = generate(spec);
  save_feature_table(to_feature_table(data), output_path(config, require_out(opt)), "s");
  std::size_t labeled = 0;
  for (int s : data.s) labeled += static_cast<std::size_t>(s);
  std::cout << json{{"rows", spec.n}, {"labeled", labeled}, {"oracle_auc", oracle_auc(spec)}}.dump()
            << "\n";
}

}  // namespace ubf::cli
