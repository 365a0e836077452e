#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ubf/evaluation.hpp"
#include "ubf/features.hpp"
#include "ubf/pu.hpp"

namespace ubf::cli {

/// Bad command-line usage or configuration; exit code 1.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

struct ModelConfig {
  std::string mode = "weighted";
  std::size_t n_trees = 100;
  std::size_t max_depth = 12;
  double min_leaf_weight = 2.0;
  double feature_subsample = 0.0;
  double holdout_fraction = 0.2;
  double threshold = 0.5;
};

struct EvalConfig {
  std::size_t folds = 10;
  std::size_t runs = 100;
  std::optional<std::uint64_t> seed;
};

struct PipelineConfig {
  std::string project;
  std::string corpus;
  std::string labels;
  std::string output_dir;
  std::vector<std::string> keywords;  ///< empty: the built-in list
  std::string bot;                    ///< empty: detect
  std::vector<std::string> selection_priority;
  std::string similar_failures = "count";
  ModelConfig model;
  EvalConfig eval;
};

/// Copies every key present in the JSON file over `config`. Unknown keys and
/// wrongly typed values throw UsageError.
void apply_config_file(PipelineConfig& config, const std::filesystem::path& path);

std::uint64_t require_seed(const PipelineConfig& config);

PUParams pu_params(const PipelineConfig& config, std::uint64_t seed);
EvalParams eval_params(const PipelineConfig& config, std::uint64_t seed);
FeatureConfig feature_config(const PipelineConfig& config);

/// `path` under output_dir when it is relative and an output dir is set.
std::filesystem::path output_path(const PipelineConfig& config, const std::string& path);

/// Throws DataError when an input file does not exist.
std::filesystem::path input_path(const std::string& path, const std::string& what);

}  // namespace ubf::cli
