#include "ubf/evaluation.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "ubf/csv.hpp"
#include "ubf/error.hpp"
#include "ubf/io.hpp"
#include "ubf/parallel.hpp"
#include "ubf/random.hpp"
#include "ubf/stats.hpp"

namespace ubf {

namespace {

double safe_ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

MetricSummary summarize(const std::vector<double>& v) {
  return {median(v), mean(v), sample_stddev(v)};
}

std::vector<std::size_t> rows_in_fold(const std::vector<std::size_t>& assignment, std::size_t fold,
                                      bool inside) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if ((assignment[i] == fold) == inside) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> deal(std::size_t n, std::size_t folds, Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<std::size_t> fold_of(n);
  for (std::size_t pos = 0; pos < n; ++pos) fold_of[order[pos]] = pos % folds;
  return fold_of;
}

bool has_hpem(const PQNSplit& s) {
  return s.p.hpem_match.has_value() && s.q.hpem_match.has_value() && s.n.hpem_match.has_value();
}

// Scores and hard predictions of one model on one test set.
struct Scored {
  std::vector<double> scores;
  std::vector<int> predicted;
};

Scored score_fold(const PQNSplit& split, const FoldAssignment& folds, std::size_t fold,
                  const FoldTestSet& test, ModelKind kind, const EvalParams& params,
                  std::uint64_t seed) {
  Scored out;
  const std::size_t m = test.actual.size();
  switch (kind) {
    case ModelKind::Classic:
    case ModelKind::Weighted: {
      PUParams pu = params.pu;
      pu.seed = derive_seed(seed, 1000 + fold);
      const PUMode mode = kind == ModelKind::Classic ? PUMode::Classic : PUMode::Weighted;
      const PUModel model = fit_fold_model(split, folds, fold, mode, pu);
      out.scores = model.ranking_scores(test.x);
      const auto probs = model.predict(test.x);
      for (double p : probs) out.predicted.push_back(p >= model.threshold ? 1 : 0);
      break;
    }
    case ModelKind::Random: {
      Rng rng(derive_seed(seed, 2000 + fold));
      for (std::size_t i = 0; i < m; ++i) {
        const double u = rng.uniform();
        out.scores.push_back(u);
        out.predicted.push_back(u < 0.5 ? 1 : 0);
      }
      break;
    }
    case ModelKind::ConstantPositive:
      out.scores.assign(m, 1.0);
      out.predicted.assign(m, 1);
      break;
    case ModelKind::Hpem:
      if (test.hpem.size() != m) {
        throw MissingEventLinkage("HPEM needs the hpem_match column linking rows to build events");
      }
      for (int h : test.hpem) {
        out.scores.push_back(h ? 1.0 : 0.0);
        out.predicted.push_back(h ? 1 : 0);
      }
      break;
  }
  return out;
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Classic: return "classic";
    case ModelKind::Weighted: return "weighted";
    case ModelKind::Random: return "random";
    case ModelKind::ConstantPositive: return "constant_positive";
    case ModelKind::Hpem: return "hpem";
  }
  return "unknown";
}

std::optional<ModelKind> parse_model_kind(std::string_view text) {
  for (ModelKind k : {ModelKind::Classic, ModelKind::Weighted, ModelKind::Random,
                      ModelKind::ConstantPositive, ModelKind::Hpem}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

std::vector<ManualLabel> read_manual_labels(std::string_view csv_text) {
  const CsvDocument doc = parse_csv(csv_text);
  std::vector<ManualLabel> out;
  if (doc.header.empty()) return out;
  auto col = [&](std::string_view name) {
    const auto it = std::find(doc.header.begin(), doc.header.end(), name);
    if (it == doc.header.end()) {
      throw ParseError("manual labels need column '" + std::string(name) + "'");
    }
    return static_cast<std::size_t>(it - doc.header.begin());
  };
  const std::size_t id = col("issue_id");
  const std::size_t ev = col("event_index");
  const std::size_t lab = col("label");
  for (const auto& rec : doc.records) {
    ManualLabel l;
    l.issue_id = rec[id];
    const double e = parse_number(rec[ev], "event_index");
    if (e < 0 || e != static_cast<double>(static_cast<std::size_t>(e))) {
      throw ParseError("event_index must be a non-negative integer");
    }
    l.event_index = static_cast<std::size_t>(e);
    if (rec[lab] != "P" && rec[lab] != "Q" && rec[lab] != "N") {
      throw ParseError("manual label must be P, Q or N, got '" + rec[lab] + "'");
    }
    l.label = rec[lab][0];
    out.push_back(std::move(l));
  }
  return out;
}

std::vector<ManualLabel> load_manual_labels(const std::filesystem::path& path) {
  return read_manual_labels(read_text_file(path));
}

PQNSplit build_pqn(const FeatureTable& table, std::span<const ManualLabel> labels) {
  table.check_shape();
  std::map<std::string, std::size_t> index;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    if (!index.emplace(row_key(table.issue_ids[r], table.event_indices[r]), r).second) {
      throw DataError("feature table has two rows for " + table.issue_ids[r] + " event " +
                      std::to_string(table.event_indices[r]));
    }
  }

  std::map<std::size_t, char> tag;
  for (const auto& l : labels) {
    const auto it = index.find(row_key(l.issue_id, l.event_index));
    if (it == index.end()) {
      throw DataError("manual label for unknown row " + l.issue_id + " event " +
                      std::to_string(l.event_index));
    }
    const auto [pos, inserted] = tag.emplace(it->second, l.label);
    if (!inserted && pos->second != l.label) {
      throw OverlapError("row " + l.issue_id + " event " + std::to_string(l.event_index) +
                         " is labeled both " + pos->second + " and " + l.label);
    }
  }

  const bool manual_p = std::any_of(tag.begin(), tag.end(), [](const auto& t) { return t.second == 'P'; });
  const bool sample = std::any_of(tag.begin(), tag.end(), [](const auto& t) { return t.second != 'P'; });

  std::vector<std::size_t> p, q, n;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    const auto t = tag.find(r);
    const char label = t == tag.end() ? 0 : t->second;
    const bool in_p = manual_p ? label == 'P' : table.heuristic_flag[r] == 1;
    const bool in_u = sample ? (label == 'Q' || label == 'N') : !in_p;
    if (in_p && in_u) {
      throw OverlapError("row " + table.issue_ids[r] + " event " +
                         std::to_string(table.event_indices[r]) +
                         " is in both P and the evaluation sample");
    }
    if (in_p) p.push_back(r);
    if (in_u) (label == 'Q' ? q : n).push_back(r);
  }

  PQNSplit split;
  split.p = table.select_rows(p);
  split.q = table.select_rows(q);
  split.n = table.select_rows(n);
  split.provenance = std::string("P=") + (manual_p ? "manual" : "heuristic_flag") +
                     "; U=" + (sample ? "manual_sample" : "all_unlabeled");
  return split;
}

PQNSplit build_pqn_from_truth(const FeatureTable& table) {
  table.check_shape();
  if (!table.y_true) throw DataError("table has no y_true column");
  std::vector<std::size_t> p, q, n;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    if (table.heuristic_flag[r]) {
      p.push_back(r);
    } else {
      ((*table.y_true)[r] ? q : n).push_back(r);
    }
  }
  PQNSplit split;
  split.p = table.select_rows(p);
  split.q = table.select_rows(q);
  split.n = table.select_rows(n);
  split.provenance = "P=labeled; Q/N=y_true";
  return split;
}

CombinedConfusion& CombinedConfusion::operator+=(const CombinedConfusion& o) {
  a += o.a;
  b += o.b;
  c_fp += o.c_fp;
  d += o.d;
  return *this;
}

MetricSet metrics_from_confusion(const CombinedConfusion& m, double auc) {
  MetricSet s;
  s.precision = safe_ratio(static_cast<double>(m.a), static_cast<double>(m.a + m.c_fp));
  s.recall = safe_ratio(static_cast<double>(m.a), static_cast<double>(m.a + m.b));
  s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  s.auc = auc;
  return s;
}

CombinedConfusion confusion_from_predictions(std::span<const int> predicted,
                                             std::span<const int> actual) {
  if (predicted.size() != actual.size()) throw LengthMismatch("confusion: length mismatch");
  CombinedConfusion m;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (actual[i]) {
      (predicted[i] ? m.a : m.b) += 1;
    } else {
      (predicted[i] ? m.c_fp : m.d) += 1;
    }
  }
  return m;
}

FoldAssignment assign_folds(const PQNSplit& split, std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw FoldTooSmall("cross-validation needs at least 2 folds");
  auto check = [&](std::size_t rows, const char* name, bool may_be_empty) {
    if ((rows == 0 && may_be_empty) || rows >= folds) return;
    throw FoldTooSmall(std::string(name) + " has " + std::to_string(rows) + " rows, fewer than " +
                       std::to_string(folds) + " folds");
  };
  check(split.size_p(), "P", false);
  check(split.size_q(), "Q", true);
  check(split.size_n(), "N", false);
  Rng rng(derive_seed(seed, 0));
  FoldAssignment f;
  f.p = deal(split.size_p(), folds, rng);
  f.q = deal(split.size_q(), folds, rng);
  f.n = deal(split.size_n(), folds, rng);
  return f;
}

PUModel fit_fold_model(const PQNSplit& split, const FoldAssignment& folds, std::size_t fold,
                       PUMode mode, const PUParams& params) {
  const auto p_train = rows_in_fold(folds.p, fold, false);
  const auto q_train = rows_in_fold(folds.q, fold, false);
  const auto n_train = rows_in_fold(folds.n, fold, false);
  const Matrix positives = split.p.x.select_rows(p_train);
  const Matrix unlabeled =
      Matrix::vstack(split.q.x.select_rows(q_train), split.n.x.select_rows(n_train));
  PUModel model = fit_pu(mode, positives, unlabeled, params);
  model.features = split.p.feature_names;
  return model;
}

FoldTestSet fold_test_set(const PQNSplit& split, const FoldAssignment& folds, std::size_t fold) {
  const auto p_test = rows_in_fold(folds.p, fold, true);
  const auto q_test = rows_in_fold(folds.q, fold, true);
  const auto n_test = rows_in_fold(folds.n, fold, true);
  FoldTestSet t;
  t.x = Matrix::vstack(Matrix::vstack(split.p.x.select_rows(p_test), split.q.x.select_rows(q_test)),
                       split.n.x.select_rows(n_test));
  if (t.x.rows() == 0) t.x = Matrix(0, split.p.feature_names.size());
  t.actual.assign(p_test.size() + q_test.size(), 1);
  t.actual.insert(t.actual.end(), n_test.size(), 0);
  if (has_hpem(split)) {
    for (std::size_t i : p_test) t.hpem.push_back((*split.p.hpem_match)[i]);
    for (std::size_t i : q_test) t.hpem.push_back((*split.q.hpem_match)[i]);
    for (std::size_t i : n_test) t.hpem.push_back((*split.n.hpem_match)[i]);
  }
  return t;
}

CvResult run_cv(const PQNSplit& split, ModelKind kind, const EvalParams& params,
                std::uint64_t seed) {
  if (kind == ModelKind::Hpem && !has_hpem(split)) {
    throw MissingEventLinkage("HPEM needs the hpem_match column linking rows to build events");
  }
  const FoldAssignment folds = assign_folds(split, params.folds, seed);

  std::vector<FoldTestSet> tests(params.folds);
  std::vector<Scored> scored(params.folds);
  parallel_for(params.folds, [&](std::size_t i) {
    tests[i] = fold_test_set(split, folds, i);
    scored[i] = score_fold(split, folds, i, tests[i], kind, params, seed);
  });

  CvResult r;
  for (std::size_t i = 0; i < params.folds; ++i) {
    const auto m = confusion_from_predictions(scored[i].predicted, tests[i].actual);
    r.per_fold.push_back(m);
    r.combined += m;
    r.scores.insert(r.scores.end(), scored[i].scores.begin(), scored[i].scores.end());
    r.actual.insert(r.actual.end(), tests[i].actual.begin(), tests[i].actual.end());
  }
  r.metrics = metrics_from_confusion(r.combined, roc_auc(r.scores, r.actual));
  return r;
}

CvResult baseline_random(const PQNSplit& split, std::size_t folds, std::uint64_t seed) {
  EvalParams p;
  p.folds = folds;
  return run_cv(split, ModelKind::Random, p, seed);
}

CvResult baseline_constant_positive(const PQNSplit& split, std::size_t folds) {
  EvalParams p;
  p.folds = folds;
  return run_cv(split, ModelKind::ConstantPositive, p, 0);
}

CvResult baseline_hpem(const PQNSplit& split, std::size_t folds) {
  EvalParams p;
  p.folds = folds;
  return run_cv(split, ModelKind::Hpem, p, 0);
}

RunSummary summarize_runs(std::vector<MetricSet> runs) {
  RunSummary s;
  std::vector<double> pr, re, f1, auc;
  for (const auto& m : runs) {
    pr.push_back(m.precision);
    re.push_back(m.recall);
    f1.push_back(m.f1);
    auc.push_back(m.auc);
  }
  s.precision = summarize(pr);
  s.recall = summarize(re);
  s.f1 = summarize(f1);
  s.auc = summarize(auc);
  s.runs = std::move(runs);
  return s;
}

RunSummary repeat_runs(const PQNSplit& split, ModelKind kind, const EvalParams& params,
                       std::size_t n_runs, std::uint64_t master_seed) {
  if (n_runs == 0) throw DataError("repeat_runs: n_runs must be positive");
  std::vector<MetricSet> runs(n_runs);
  parallel_for(n_runs, [&](std::size_t r) {
    runs[r] = run_cv(split, kind, params, derive_seed(master_seed, r)).metrics;
  });
  return summarize_runs(std::move(runs));
}

std::vector<CrossProjectRow> cross_project_validate(std::span<const ProjectData> projects,
                                                    ModelKind kind, const EvalParams& params,
                                                    std::size_t n_runs, std::uint64_t seed) {
  if (projects.size() < 2) {
    throw DataError("cross-project validation needs at least 2 projects");
  }
  if (n_runs == 0) throw DataError("cross-project validation: n_runs must be positive");
  const auto& names = projects.front().split.p.feature_names;
  for (const auto& pd : projects) {
    for (const FeatureTable* t : {&pd.split.p, &pd.split.q, &pd.split.n}) {
      if (t->feature_names != names) {
        throw FeatureSchemaMismatch("project " + pd.name +
                                    " does not share the feature columns of " +
                                    projects.front().name);
      }
    }
  }
  if (kind == ModelKind::Hpem) {
    for (const auto& pd : projects) {
      if (!has_hpem(pd.split)) throw MissingEventLinkage("project " + pd.name + " lacks hpem_match");
    }
  }

  std::vector<CrossProjectRow> rows(projects.size());
  for (std::size_t h = 0; h < projects.size(); ++h) {
    const PQNSplit& held = projects[h].split;
    Matrix positives(0, names.size());
    Matrix unlabeled(0, names.size());
    for (std::size_t o = 0; o < projects.size(); ++o) {
      if (o == h) continue;
      positives = Matrix::vstack(positives, projects[o].split.p.x);
      unlabeled = Matrix::vstack(unlabeled, Matrix::vstack(projects[o].split.q.x, projects[o].split.n.x));
    }
    const Matrix test = Matrix::vstack(Matrix::vstack(held.p.x, held.q.x), held.n.x);
    std::vector<int> actual(held.size_p() + held.size_q(), 1);
    actual.insert(actual.end(), held.size_n(), 0);
    std::vector<int> hpem;
    if (kind == ModelKind::Hpem) {
      for (const FeatureTable* t : {&held.p, &held.q, &held.n}) {
        hpem.insert(hpem.end(), t->hpem_match->begin(), t->hpem_match->end());
      }
    }

    std::vector<MetricSet> runs(n_runs);
    parallel_for(n_runs, [&](std::size_t r) {
      const std::uint64_t run_seed = derive_seed(derive_seed(seed, r), h);
      std::vector<double> scores;
      std::vector<int> predicted;
      switch (kind) {
        case ModelKind::Classic:
        case ModelKind::Weighted: {
          PUParams pu = params.pu;
          pu.seed = run_seed;
          const PUModel model = fit_pu(kind == ModelKind::Classic ? PUMode::Classic : PUMode::Weighted,
                                       positives, unlabeled, pu);
          scores = model.ranking_scores(test);
          for (double p : model.predict(test)) predicted.push_back(p >= model.threshold ? 1 : 0);
          break;
        }
        case ModelKind::Random: {
          Rng rng(run_seed);
          for (std::size_t i = 0; i < actual.size(); ++i) {
            scores.push_back(rng.uniform());
            predicted.push_back(scores.back() < 0.5 ? 1 : 0);
          }
          break;
        }
        case ModelKind::ConstantPositive:
          scores.assign(actual.size(), 1.0);
          predicted.assign(actual.size(), 1);
          break;
        case ModelKind::Hpem:
          for (int v : hpem) {
            scores.push_back(v);
            predicted.push_back(v);
          }
          break;
      }
      runs[r] = metrics_from_confusion(confusion_from_predictions(predicted, actual),
                                       roc_auc(scores, actual));
    });
    rows[h] = {projects[h].name, summarize_runs(std::move(runs))};
  }
  return rows;
}

std::vector<ProjectData> align_to_common_features(std::span<const ProjectData> projects) {
  if (projects.empty()) return {};
  std::vector<std::string> common;
  for (const auto& name : projects.front().split.p.feature_names) {
    const bool everywhere = std::all_of(projects.begin(), projects.end(), [&](const ProjectData& pd) {
      return pd.split.p.feature_index(name).has_value();
    });
    if (everywhere) common.push_back(name);
  }
  std::vector<ProjectData> out;
  for (const auto& pd : projects) {
    ProjectData aligned{pd.name, pd.split};
    aligned.split.p = pd.split.p.with_features(common);
    aligned.split.q = pd.split.q.with_features(common);
    aligned.split.n = pd.split.n.with_features(common);
    out.push_back(std::move(aligned));
  }
  return out;
}

}  // namespace ubf
