#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "ubf/synth.hpp"

namespace ubf::cli {

/// Command-specific flags. Shared pipeline settings live in PipelineConfig.
struct Options {
  std::string out;
  std::string features;
  std::string selection;
  std::string model_file;
  std::string violations;
  std::string summary;
  std::string dendrogram;
  std::string null_out;
  std::string scores_out;
  bool lenient = false;
  double rho = 0.7;
  double r2 = 0.9;
  std::vector<std::string> models;
  std::string metric = "f1";
  std::size_t repeats = 5;
  std::size_t top_k = 3;
  std::size_t bootstrap = 1000;
  double alpha = 0.05;
  std::optional<double> pi_hat;
  std::vector<std::string> datasets;
  GeneratorSpec synth;

  // report inputs
  std::string label_summary;
  std::string eval_report;
  std::string importance_csv;
  std::string scar_report;
  std::string crossproject_csv;
};

void run_ingest(const PipelineConfig& config, const Options& opt);
void run_label(const PipelineConfig& config, const Options& opt);
void run_features(const PipelineConfig& config, const Options& opt);
void run_select(const PipelineConfig& config, const Options& opt);
void run_train(const PipelineConfig& config, const Options& opt);
void run_predict(const PipelineConfig& config, const Options& opt);
void run_eval(const PipelineConfig& config, const Options& opt);
void run_scar_test(const PipelineConfig& config, const Options& opt);
void run_importance(const PipelineConfig& config, const Options& opt);
void run_crossproject(const PipelineConfig& config, const Options& opt);
void run_synth(const PipelineConfig& config, const Options& opt);
void run_report(const PipelineConfig& config, const Options& opt);

/// Markdown tables of published reference results, shown beside the user's
/// own numbers. They come from a private dataset and cannot be reproduced.
std::string reference_tables_markdown();

}  // namespace ubf::cli
