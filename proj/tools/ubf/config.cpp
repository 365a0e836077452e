#include "config.hpp"

#include <nlohmann/json.hpp>

#include "ubf/error.hpp"
#include "ubf/io.hpp"

namespace ubf::cli {

namespace {

using nlohmann::json;

template <typename T>
void take(const json& obj, const char* key, T& out, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    throw UsageError("config: " + where + key + " has the wrong type");
  }
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
  if (!obj.is_object()) throw UsageError("config: " + where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw UsageError("config: unknown key " + where + key);
  }
}

}  // namespace

void apply_config_file(PipelineConfig& config, const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw UsageError("config " + path.string() + ": " + e.what());
  } catch (const std::exception& e) {
    throw UsageError("config " + path.string() + ": " + e.what());
  }
  check_keys(j,
             {"project", "paths", "keywords", "bot", "selection_priority", "similar_failures",
              "model", "eval"},
             "");
  take(j, "project", config.project, "");
  take(j, "keywords", config.keywords, "");
  take(j, "bot", config.bot, "");
  take(j, "selection_priority", config.selection_priority, "");
  take(j, "similar_failures", config.similar_failures, "");
  if (j.contains("paths")) {
    const json& p = j["paths"];
    check_keys(p, {"corpus", "labels", "output_dir"}, "paths.");
    take(p, "corpus", config.corpus, "paths.");
    take(p, "labels", config.labels, "paths.");
    take(p, "output_dir", config.output_dir, "paths.");
  }
  if (j.contains("model")) {
    const json& m = j["model"];
    check_keys(m,
               {"mode", "n_trees", "max_depth", "min_leaf_weight", "feature_subsample",
                "holdout_fraction", "threshold"},
               "model.");
    take(m, "mode", config.model.mode, "model.");
    take(m, "n_trees", config.model.n_trees, "model.");
    take(m, "max_depth", config.model.max_depth, "model.");
    take(m, "min_leaf_weight", config.model.min_leaf_weight, "model.");
    take(m, "feature_subsample", config.model.feature_subsample, "model.");
    take(m, "holdout_fraction", config.model.holdout_fraction, "model.");
    take(m, "threshold", config.model.threshold, "model.");
  }
  if (j.contains("eval")) {
    const json& e = j["eval"];
    check_keys(e, {"folds", "runs", "threshold", "seed"}, "eval.");
    take(e, "folds", config.eval.folds, "eval.");
    take(e, "runs", config.eval.runs, "eval.");
    take(e, "threshold", config.model.threshold, "eval.");
    if (e.contains("seed")) {
      std::uint64_t seed = 0;
      take(e, "seed", seed, "eval.");
      config.eval.seed = seed;
    }
  }
}

std::uint64_t require_seed(const PipelineConfig& config) {
  if (!config.eval.seed) throw UsageError("this command is stochastic and needs --seed");
  return *config.eval.seed;
}

PUParams pu_params(const PipelineConfig& config, std::uint64_t seed) {
  const auto& m = config.model;
  if (m.n_trees == 0) throw UsageError("--trees must be positive");
  if (!(m.threshold > 0.0 && m.threshold < 1.0)) throw UsageError("--threshold must lie in (0, 1)");
  if (!(m.holdout_fraction > 0.0 && m.holdout_fraction < 1.0)) {
    throw UsageError("--holdout must lie in (0, 1)");
  }
  PUParams p;
  p.forest.n_trees = m.n_trees;
  p.forest.max_depth = m.max_depth;
  p.forest.min_leaf_weight = m.min_leaf_weight;
  p.forest.feature_subsample = m.feature_subsample;
  p.holdout_fraction = m.holdout_fraction;
  p.threshold = m.threshold;
  p.seed = seed;
  return p;
}

EvalParams eval_params(const PipelineConfig& config, std::uint64_t seed) {
  if (config.eval.folds < 2) throw UsageError("--folds must be at least 2");
  EvalParams e;
  e.pu = pu_params(config, seed);
  e.folds = config.eval.folds;
  return e;
}

FeatureConfig feature_config(const PipelineConfig& config) {
  FeatureConfig f;
  if (config.similar_failures == "count") {
    f.similar_failures_mode = SimilarFailuresMode::Count;
  } else if (config.similar_failures == "sum") {
    f.similar_failures_mode = SimilarFailuresMode::Sum;
  } else {
    throw UsageError("--similar-failures must be count or sum");
  }
  return f;
}

std::filesystem::path output_path(const PipelineConfig& config, const std::string& path) {
  std::filesystem::path p(path);
  if (!config.output_dir.empty() && p.is_relative()) p = std::filesystem::path(config.output_dir) / p;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  return p;
}

std::filesystem::path input_path(const std::string& path, const std::string& what) {
  if (path.empty()) throw UsageError("missing " + what);
  std::filesystem::path p(path);
  if (!std::filesystem::exists(p)) throw DataError(what + " not found: " + path);
  return p;
}

}  // namespace ubf::cli
