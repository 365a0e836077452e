// Acceptance suite: one PASS/FAIL line per criterion.
//
//   ubf_acceptance            run all criteria
//   ubf_acceptance 2 6        run a subset
//
// Exit status is non-zero when any selected criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "ubf/csv.hpp"
#include "ubf/evaluation.hpp"
#include "ubf/feature_table.hpp"
#include "ubf/features.hpp"
#include "ubf/heuristics.hpp"
#include "ubf/importance.hpp"
#include "ubf/io.hpp"
#include "ubf/pu.hpp"
#include "ubf/random.hpp"
#include "ubf/scar.hpp"
#include "ubf/selection.hpp"
#include "ubf/stats.hpp"
#include "ubf/synth.hpp"

namespace {

namespace fs = std::filesystem;
using namespace ubf;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

fs::path fixture(const char* name) { return fs::path(UBF_FIXTURE_DIR) / name; }

void split_pu(const SyntheticData& d, Matrix& p, Matrix& u) {
  std::vector<std::size_t> pi, ui;
  for (std::size_t i = 0; i < d.s.size(); ++i) (d.s[i] ? pi : ui).push_back(i);
  p = d.x.select_rows(pi);
  u = d.x.select_rows(ui);
}

PUParams acceptance_pu(std::uint64_t seed) {
  PUParams p;
  p.forest.n_trees = 100;
  p.forest.min_leaf_weight = 20;
  p.seed = seed;
  return p;
}

// 1. predict_classic and compute_weight against the closed forms.
Outcome pu_equations() {
  Rng r(20240101);
  double worst_f = 0, worst_w = 0;
  for (int i = 0; i < 1000; ++i) {
    const double c = kMinLabelFrequency + (1 - kMinLabelFrequency) * r.uniform();
    const double g = 0.999 * r.uniform();
    worst_f = std::max(worst_f, std::abs(predict_classic(g, c) - std::min(1.0, g / c)));
    const double w = std::clamp(((1 - c) / c) * (g / (1 - g)), 0.0, 1.0);
    worst_w = std::max(worst_w, std::abs(compute_weight(g, c) - w));
  }
  bool identities = true;
  for (double c : {0.001, 0.1, 0.3, 0.5, 0.77, 0.999}) {
    identities = identities && compute_weight(c, c) == 1.0 && compute_weight(0.0, c) == 0.0;
  }
  return {worst_f <= 1e-12 && worst_w <= 1e-12 && identities,
          fmt("max |f - min(1,g/c)| = %.1e, max |w - closed form| = %.1e", worst_f, worst_w) +
              (identities ? ", w(c,c)=1 and w(0,c)=0 hold" : ", identity violated")};
}

// 2. Classic PU posterior against the analytic posterior on a grid.
Outcome posterior_recovery() {
  GeneratorSpec spec;
  spec.n = 5000;
  spec.pi = 0.5;
  spec.c_true = 0.3;
  spec.separation = 3.0;
  spec.seed = 1;
  Matrix p, u;
  split_pu(generate(spec), p, u);
  const PUModel m = fit_classic(p, u, acceptance_pu(1));
  double err = 0;
  std::size_t points = 0;
  for (int a = -12; a <= 12; ++a) {
    for (int b = -4; b <= 4; ++b) {
      const std::vector<double> x{0.25 * a, 0.5 * b};
      err += std::abs(m.predict(x) - oracle_posterior(spec, x));
      ++points;
    }
  }
  err /= static_cast<double>(points);
  const bool ok = err <= 0.10 && m.c_hat >= 0.25 && m.c_hat <= 0.35;
  return {ok, fmt("mean |f - posterior| = %.4f over 225 grid points (<= 0.10), c_hat = %.4f (in [0.25, 0.35])",
                  err, m.c_hat)};
}

double precision_at_half(const PUModel& m, const SyntheticData& test) {
  const auto f = m.predict(test.x);
  std::size_t tp = 0, flagged = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] < 0.5) continue;
    ++flagged;
    tp += test.y_true[i];
  }
  return flagged == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(flagged);
}

// 3. Weighted vs classic precision on imbalanced data, 10 seeds.
Outcome weighted_vs_classic() {
  double classic = 0, weighted = 0;
  int wins = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    GeneratorSpec spec;
    spec.n = 3000;
    spec.pi = 0.8;
    spec.separation = 3.0;
    spec.seed = 500 + s;
    Matrix p, u;
    split_pu(generate(spec), p, u);
    GeneratorSpec held = spec;
    held.seed = 900 + s;
    const SyntheticData test = generate(held);
    const double pc = precision_at_half(fit_classic(p, u, acceptance_pu(s)), test);
    const double pw = precision_at_half(fit_weighted(p, u, acceptance_pu(s)), test);
    classic += pc / 10;
    weighted += pw / 10;
    wins += pw >= pc;
  }
  return {weighted >= classic,
          fmt("mean precision over 10 seeds: weighted %.4f, classic %.4f", weighted, classic) +
              " (weighted >= classic in " + std::to_string(wins) + "/10 seeds)"};
}

// 4. Constant-positive closed form on every split, random AUC near 0.5.
Outcome baselines() {
  std::vector<PQNSplit> splits;
  splits.push_back(build_pqn(load_feature_table(fixture("pqn_features.csv")),
                             load_manual_labels(fixture("pqn_labels.csv"))));
  for (std::uint64_t s : {1, 2, 3}) {
    GeneratorSpec spec;
    spec.n = 2000 + 1000 * s;
    spec.pi = 0.2 + 0.2 * static_cast<double>(s);
    spec.seed = s;
    splits.push_back(build_pqn_from_truth(to_feature_table(generate(spec))));
  }
  bool ok = true;
  for (const auto& split : splits) {
    const CvResult r = baseline_constant_positive(split, 3);
    const double pos = static_cast<double>(split.size_p() + split.size_q());
    const double expect = pos / (pos + static_cast<double>(split.size_n()));
    ok = ok && r.metrics.recall == 1.0 && r.metrics.precision == expect;
  }
  double lo = 1, hi = 0;
  for (std::size_t k = 1; k < splits.size(); ++k) {
    const double auc = baseline_random(splits[k], 10, 77 + k).metrics.auc;
    lo = std::min(lo, auc);
    hi = std::max(hi, auc);
  }
  ok = ok && lo >= 0.45 && hi <= 0.55;
  return {ok, std::string(ok ? "constant-positive recall 1 and precision exact on 4 splits"
                             : "constant-positive or random baseline off") +
                  fmt(", random AUC in [%.4f, %.4f] for n >= 3000", lo, hi)};
}

double auc_by_pairs(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0, pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0) continue;
      pairs += 1;
      wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  }
  return pairs == 0 ? 0.5 : wins / pairs;
}

// 5. Combined matrix is the fold sum and the metrics follow from it.
Outcome combined_confusion() {
  GeneratorSpec spec;
  spec.n = 1000;
  spec.seed = 5;
  const PQNSplit split = build_pqn_from_truth(to_feature_table(generate(spec)));
  EvalParams params;
  params.folds = 10;
  params.pu.forest.n_trees = 30;
  double worst = 0;
  bool sums = true;
  for (ModelKind k : {ModelKind::Weighted, ModelKind::Classic, ModelKind::Random,
                      ModelKind::ConstantPositive}) {
    const CvResult r = run_cv(split, k, params, 5);
    std::size_t a = 0, b = 0, c = 0, d = 0;
    for (const auto& f : r.per_fold) a += f.a, b += f.b, c += f.c_fp, d += f.d;
    sums = sums && r.per_fold.size() == 10 && a == r.combined.a && b == r.combined.b &&
           c == r.combined.c_fp && d == r.combined.d && a + b + c + d == 1000;
    const double precision = a + c == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(a + c);
    const double recall = a + b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(a + b);
    const double f1 = precision + recall == 0 ? 0.0 : 2 * precision * recall / (precision + recall);
    worst = std::max({worst, std::abs(precision - r.metrics.precision), std::abs(recall - r.metrics.recall),
                      std::abs(f1 - r.metrics.f1), std::abs(auc_by_pairs(r.scores, r.actual) - r.metrics.auc)});
  }
  return {sums && worst <= 1e-12,
          std::string(sums ? "fold sums equal the combined matrix for 4 models"
                           : "fold sums differ from the combined matrix") +
              fmt(", max metric deviation %.1e", worst)};
}

bool run_scar(double bias, std::uint64_t seed) {
  GeneratorSpec spec;
  spec.n = 600;
  spec.separation = 4.0;
  spec.labeling_bias = bias;
  spec.seed = seed;
  const SyntheticData d = generate(spec);
  Matrix p, u;
  split_pu(d, p, u);
  std::size_t q = 0;
  for (std::size_t i = 0; i < d.s.size(); ++i) q += !d.s[i] && d.y_true[i];
  ScarParams params;
  params.bootstrap = std::getenv("UBF_SCAR_FULL_B") ? 1000 : 200;
  params.seed = derive_seed(seed, 77);
  params.q_count = q;
  return scar_test(p, u, params).reject;
}

// 6. Rejection rates of the SCAR test under SCAR and under biased labeling.
Outcome scar_calibration() {
  int scar = 0, biased = 0;
  for (std::uint64_t g = 0; g < 40; ++g) {
    scar += run_scar(0.0, 3000 + g);
    biased += run_scar(2.0, 4000 + g);
  }
  const double r0 = scar / 40.0, r1 = biased / 40.0;
  return {r0 <= 0.10 && r1 >= 0.75,
          fmt("rejection rate %.3f under SCAR (<= 0.10), ", r0) +
              fmt("%.3f with labeling_bias 2 (>= 0.75), alpha 0.05", r1)};
}

// 7. Extracted features equal the checked-in hand table.
Outcome fixture_features() {
  const Corpus c = load_corpus(fixture("hive_corpus.jsonl"), "HIVE");
  const auto rows = extract_corpus_features(c, label_corpus(c));
  const CsvDocument want = parse_csv(read_text_file(fixture("expected_features.csv")));
  if (want.records.size() != rows.size()) {
    return {false, "row count " + std::to_string(rows.size()) + " vs " + std::to_string(want.records.size())};
  }
  std::size_t mismatches = 0, cells = 0;
  std::string first;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& rec = want.records[i];
    const auto v = rows[i].features.to_array();
    const bool id_ok = rec[0] == rows[i].issue_id && std::stoul(rec[1]) == rows[i].event_index;
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
      ++cells;
      if (!id_ok || parse_number(rec[3 + j], "cell") != v[j]) {
        if (mismatches++ == 0) first = rec[0] + " " + std::string(feature_names()[j]);
      }
    }
  }
  return {mismatches == 0, std::to_string(cells) + " cells over " + std::to_string(rows.size()) +
                               " failure events, " + std::to_string(mismatches) + " mismatches" +
                               (first.empty() ? "" : " (first: " + first + ")")};
}

// 8. Seeded flags, prevalence and time misspent on the fixture.
Outcome labeling() {
  const Corpus c = load_corpus(fixture("hive_corpus.jsonl"), "HIVE");
  const CorpusLabeling l = label_corpus(c);
  const auto tm = summarize_time_misspent(l.time_misspent);
  std::vector<double> hours;
  for (const auto& t : l.time_misspent) hours.push_back(t.hours);
  std::sort(hours.begin(), hours.end());
  const double prev = prevalence(l.flagged_count(), l.failure_count());
  const double scale = prevalence(10316, 77354);
  const bool ok = l.failure_count() == 12 && l.flagged_count() == 3 && prev == 0.25 &&
                  tm.median == 4.0 && hours == std::vector<double>{2, 4, 100} &&
                  std::abs(scale - 0.1333) < 1e-4;
  return {ok, std::to_string(l.flagged_count()) + "/" + std::to_string(l.failure_count()) +
                  fmt(" flagged (prevalence %.4f), median time misspent %.2f h", prev, tm.median) +
                  fmt(", 10316/77354 = %.5f", scale)};
}

// 9. Planted correlated pair and linear dependence.
Outcome selection() {
  Rng r(99);
  const std::size_t n = 500;
  Matrix x(n, 10);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < 9; ++j) x(i, j) = r.normal();
    // Spearman ~0.95 for Gaussian noise of this scale
    x(i, 1) = x(i, 0) + 0.3135 * r.normal();
    x(i, 9) = 0.5 * (x(i, 4) + x(i, 5) + x(i, 6) + x(i, 7));
  }
  std::vector<std::string> names;
  for (int j = 1; j <= 10; ++j) names.push_back(fmt("f%02.0f", j));
  const double planted = std::abs(spearman_rho(x.column(0), x.column(1)));
  const SelectionReport rep = select_features(x, names);
  bool ok = planted > 0.93 && planted < 0.97 && rep.removed.size() == 2;
  std::string removed;
  for (const auto& f : rep.removed) removed += (removed.empty() ? "" : ", ") + f.feature + " " + f.describe();
  if (ok) {
    ok = rep.removed[0].feature == "f02" && rep.removed[0].reason == RemovedFeature::Reason::CorrelatedWith &&
         rep.removed[0].kept == "f01" && rep.removed[1].feature == "f10" &&
         rep.removed[1].reason == RemovedFeature::Reason::Redundant && rep.removed[1].value > 0.9;
  }
  std::vector<std::size_t> keep;
  for (const auto& name : rep.retained) {
    keep.push_back(static_cast<std::size_t>(std::find(names.begin(), names.end(), name) - names.begin()));
  }
  const SelectionReport again = select_features(x.select_columns(keep), rep.retained);
  ok = ok && again.removed.empty() && again.retained == rep.retained;
  return {ok, fmt("planted |rho| = %.3f; removed: ", planted) + removed +
                  "; rerun removes " + std::to_string(again.removed.size())};
}

// 10. Permutation importance ranks the signal first and leaves noise near 0.
Outcome importance() {
  int top = 0;
  std::vector<double> x2, x3;
  for (std::uint64_t s = 0; s < 20; ++s) {
    GeneratorSpec spec;
    spec.n = 600;
    spec.dim = 3;
    spec.separation = 3.0;
    spec.seed = 100 + s;
    const PQNSplit split = build_pqn_from_truth(to_feature_table(generate(spec)));
    EvalParams params;
    params.folds = 5;
    params.pu.forest.n_trees = 50;
    params.pu.seed = s;
    const ImportanceReport rep = cv_importance(split, PUMode::Weighted, params, ImportanceMetric::F1, 5, s);
    top += rep.features[0].feature == "x1";
    for (const auto& f : rep.features) {
      if (f.feature == "x2") x2.push_back(f.median);
      if (f.feature == "x3") x3.push_back(f.median);
    }
  }
  const double m2 = median(x2), m3 = median(x3);
  const bool ok = top >= 19 && std::abs(m2) <= 0.02 && std::abs(m3) <= 0.02;
  return {ok, "x1 ranked first in " + std::to_string(top) + "/20 runs (>= 19)" +
                  fmt(", noise median importance x2 %.4f, x3 %.4f (within 0.02)", m2, m3)};
}

// 11. Leave-one-project-out on three copies of one generator.
Outcome cross_project() {
  std::vector<ProjectData> projects;
  for (std::uint64_t k = 0; k < 3; ++k) {
    GeneratorSpec spec;
    spec.n = 1500;
    spec.seed = 40 + k;
    projects.push_back({"S" + std::to_string(k + 1), build_pqn_from_truth(to_feature_table(generate(spec)))});
  }
  EvalParams params;
  params.folds = 10;
  params.pu.forest.n_trees = 50;
  const auto rows = cross_project_validate(projects, ModelKind::Weighted, params, 3, 7);
  double worst = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    const RunSummary within = repeat_runs(projects[k].split, ModelKind::Weighted, params, 3, 7);
    const RunSummary& cross = rows[k].summary;
    worst = std::max({worst, std::abs(cross.precision.mean - within.precision.mean),
                      std::abs(cross.recall.mean - within.recall.mean), std::abs(cross.f1.mean - within.f1.mean),
                      std::abs(cross.auc.mean - within.auc.mean)});
  }
  return {worst <= 0.05, fmt("max |held-out - within-project| over precision/recall/F1/AUC = %.4f (<= 0.05)", worst)};
}

int shell(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Runs every subcommand into `dir`; returns the first failing command or "".
std::string run_pipeline(const fs::path& dir) {
  fs::create_directories(dir);
  const std::string ubf = UBF_CLI_PATH;
  const std::string corpus = fixture("hive_corpus.jsonl").string();
  const std::string d = dir.string() + "/";
  const std::vector<std::string> cmds{
      "ingest --corpus " + corpus + " --out " + d + "ingest.jsonl --violations " + d + "violations.csv",
      "label --corpus " + corpus + " --out " + d + "labels.jsonl --summary " + d + "label_summary.json",
      "features --corpus " + corpus + " --out " + d + "features.csv",
      "select --features " + d + "features.csv --out " + d + "selection.json --dendrogram " + d + "dendrogram.txt",
      "synth --n 500 --seed 3 --out " + d + "a.csv",
      "synth --n 500 --seed 4 --bias 2 --out " + d + "b.csv",
      "train --features " + d + "a.csv --trees 30 --seed 5 --out " + d + "model.json",
      "predict --model " + d + "model.json --input " + d + "b.csv --out " + d + "predictions.csv",
      "eval --features " + d + "a.csv --model all --trees 20 --folds 5 --runs 3 --seed 6 --out " + d +
          "eval.json --scores " + d + "scores.csv",
      "scar-test --features " + d + "b.csv -B 40 --seed 7 --out " + d + "scar.json --null " + d + "null.csv",
      "importance --dataset A:" + d + "a.csv --dataset B:" + d + "b.csv --trees 20 --folds 5 --repeats 2 --seed 8 --out " +
          d + "importance.csv",
      "crossproject --dataset A:" + d + "a.csv --dataset B:" + d + "b.csv --trees 20 --folds 5 --runs 2 --seed 9 --out " +
          d + "crossproject.csv",
      "report --corpus " + corpus + " --selection " + d + "selection.json --eval " + d + "eval.json --importance " + d +
          "importance.csv --scar " + d + "scar.json --crossproject " + d + "crossproject.csv --out " + d + "report.md",
  };
  for (std::size_t i = 0; i < cmds.size(); ++i) {
    const std::string log = d + "stdout_" + std::to_string(i) + ".txt";
    if (shell(ubf + " " + cmds[i] + " >" + log + " 2>" + d + "stderr.txt") != 0) return cmds[i];
  }
  fs::remove(dir / "stderr.txt");
  return "";
}

// 12. Every command twice with fixed seeds: byte-identical outputs.
Outcome cli_determinism() {
  const fs::path root = fs::temp_directory_path() / "ubf_acceptance_cli";
  fs::remove_all(root);
  for (const char* run : {"first", "second"}) {
    const std::string failed = run_pipeline(root / run);
    if (!failed.empty()) return {false, std::string("command failed in ") + run + " run: ubf " + failed};
  }
  std::set<std::string> names;
  for (const auto& e : fs::directory_iterator(root / "first")) names.insert(e.path().filename().string());
  std::size_t differ = 0;
  std::string first_diff;
  for (const auto& name : names) {
    const fs::path b = root / "second" / name;
    if (!fs::exists(b) || read_text_file(root / "first" / name) != read_text_file(b)) {
      if (differ++ == 0) first_diff = name;
    }
  }
  fs::remove_all(root);
  return {differ == 0 && names.size() >= 13,
          "13 commands, " + std::to_string(names.size()) + " output files compared, " + std::to_string(differ) +
              " differ" + (first_diff.empty() ? "" : " (first: " + first_diff + ")")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "PU equations", 1, pu_equations},
      {2, "oracle posterior recovery", 60, posterior_recovery},
      {3, "weighted >= classic precision at pi 0.8", 300, weighted_vs_classic},
      {4, "baseline closed forms", 10, baselines},
      {5, "combined confusion protocol", 10, combined_confusion},
      {6, "SCAR test calibration", 900, scar_calibration},
      {7, "fixture features vs hand table", 5, fixture_features},
      {8, "heuristic labeling and prevalence", 5, labeling},
      {9, "selection filter", 5, selection},
      {10, "permutation importance sanity", 120, importance},
      {11, "cross-project harness", 300, cross_project},
      {12, "CLI determinism", 600, cli_determinism},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const Criterion& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto start = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    const bool in_time = secs < c.limit_seconds;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::printf("%s criterion %2d (%s): %s; %.2f s (limit %.0f s)%s\n", pass ? "PASS" : "FAIL", c.id, c.name,
                 o.detail.c_str(), secs, c.limit_seconds, in_time ? "" : " TIMEOUT");
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
