#include <cstdio>
#include <iostream>
#include <string>

#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "ubf/csv.hpp"
#include "ubf/error.hpp"
#include "ubf/heuristics.hpp"
#include "ubf/io.hpp"

namespace ubf::cli {

namespace {

using nlohmann::json;

// Fixed four decimals with trailing zeros removed: 0.25, 13.5, 4.
std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  std::string s(buf);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s == "-0" ? "0" : s;
}

json read_report(const std::string& path, const char* format) {
  json j;
  try {
    j = json::parse(read_text_file(input_path(path, format)));
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (j.value("format", std::string()) != format) throw ParseError(path + " is not a " + format + " file");
  return j;
}

json labeling_summary(const PipelineConfig& config, const Options& opt) {
  if (!opt.label_summary.empty()) return read_report(opt.label_summary, "ubf-label-summary");
  const Corpus corpus = load_corpus(input_path(config.corpus, "--corpus"), config.project);
  CiConfig ci;
  if (!config.bot.empty()) ci.qa_bot_override = config.bot;
  const auto labeling = label_corpus(
      corpus, ci, config.keywords.empty() ? default_unrelated_keywords() : config.keywords);
  const auto tm = summarize_time_misspent(labeling.time_misspent);
  return {{"project", corpus.project},
          {"bot", labeling.bot},
          {"failures", labeling.failure_count()},
          {"flagged", labeling.flagged_count()},
          {"prevalence", prevalence(labeling.flagged_count(), labeling.failure_count())},
          {"time_misspent",
           {{"n", tm.n}, {"median", tm.median}, {"mean", tm.mean}, {"total", tm.total},
            {"stddev", tm.stddev}}}};
}

std::string labeling_section(const json& s) {
  const auto& tm = s.at("time_misspent");
  std::string out = "## Heuristic labeling\n\n";
  out += "- QA bot: " + s.at("bot").get<std::string>() + "\n";
  out += "- Failures: " + std::to_string(s.at("failures").get<std::size_t>()) + "\n";
  out += "- Flagged as potentially unrelated: " + std::to_string(s.at("flagged").get<std::size_t>()) + "\n";
  out += "- Prevalence: " + std::to_string(s.at("flagged").get<std::size_t>()) + "/" +
         std::to_string(s.at("failures").get<std::size_t>()) + " = " +
         num(s.at("prevalence").get<double>()) + "\n";
  out += "- Time misspent (hours): median " + num(tm.at("median").get<double>()) + ", mean " +
         num(tm.at("mean").get<double>()) + ", total " + num(tm.at("total").get<double>()) +
         " over " + std::to_string(tm.at("n").get<std::size_t>()) + " flagged failures\n\n";
  return out;
}

std::string selection_section(const json& s) {
  std::string out = "## Feature selection\n\n";
  out += std::to_string(s.at("retained").size()) + " of " + std::to_string(s.at("features").size()) +
         " features retained.\n\n";
  if (!s.at("removed").empty()) {
    out += "| Removed feature | Reason |\n|---|---|\n";
    for (const auto& r : s.at("removed")) {
      out += "| " + r.at("feature").get<std::string>() + " | " + r.at("describe").get<std::string>() + " |\n";
    }
    out += "\n";
  }
  return out;
}

std::string eval_section(const json& e) {
  std::string out = "## Model evaluation\n\n";
  const auto& sizes = e.at("sizes");
  out += "P = " + std::to_string(sizes.at("p").get<std::size_t>()) +
         ", Q = " + std::to_string(sizes.at("q").get<std::size_t>()) +
         ", N = " + std::to_string(sizes.at("n").get<std::size_t>()) + "; " +
         std::to_string(e.at("folds").get<std::size_t>()) + " folds, " +
         std::to_string(e.at("runs").get<std::size_t>()) + " runs, seed " +
         std::to_string(e.at("seed").get<std::uint64_t>()) + ".\n\n";
  out += "| Model | Precision | Recall | F1 | AUC | Precision ± std | Recall ± std | F1 ± std | AUC ± std |\n";
  out += "|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& m : e.at("models")) {
    const auto& s = m.at("summary");
    out += "| " + m.at("model").get<std::string>();
    for (const char* k : {"precision", "recall", "f1", "auc"}) out += " | " + num(s.at(k).at("median").get<double>());
    for (const char* k : {"precision", "recall", "f1", "auc"}) {
      out += " | " + num(s.at(k).at("mean").get<double>()) + " ± " + num(s.at(k).at("std").get<double>());
    }
    out += " |\n";
  }
  out += "\nCombined confusion matrices of the first run (a = TP, b = FN, c = FP, d = TN):\n\n";
  out += "| Model | a | b | c | d |\n|---|---|---|---|---|\n";
  for (const auto& m : e.at("models")) {
    const auto& c = m.at("combined");
    out += "| " + m.at("model").get<std::string>() + " | " + std::to_string(c.at("a").get<std::size_t>()) +
           " | " + std::to_string(c.at("b").get<std::size_t>()) + " | " +
           std::to_string(c.at("c").get<std::size_t>()) + " | " +
           std::to_string(c.at("d").get<std::size_t>()) + " |\n";
  }
  return out + "\n";
}

std::string importance_section(const std::string& path) {
  const CsvDocument doc = parse_csv(read_text_file(input_path(path, "--importance")));
  std::string out = "## Feature importance\n\n";
  if (doc.header.size() < 6 || (doc.header.size() - 1) % 5 != 0) {
    throw ParseError(path + ": unexpected importance table layout");
  }
  std::string head = "| Feature |";
  std::string rule = "|---|";
  for (std::size_t c = 1; c < doc.header.size(); c += 5) {
    head += " " + doc.header[c].substr(0, doc.header[c].rfind(':')) + " |";
    rule += "---|";
  }
  out += head + "\n" + rule + "\n";
  for (const auto& rec : doc.records) {
    out += "| " + rec[0] + " |";
    for (std::size_t c = 1; c < rec.size(); c += 5) {
      out += " " + num(parse_number(rec[c], "mean")) + " ± " + num(parse_number(rec[c + 1], "std"));
      if (!rec[c + 4].empty()) out += " (" + rec[c + 4] + ")";
      out += " |";
    }
    out += "\n";
  }
  return out + "\n";
}

std::string scar_section(const json& s) {
  std::string out = "## SCAR assumption test\n\n";
  out += "- Statistic (discriminator AUC): " + num(s.at("statistic").get<double>()) + "\n";
  out += "- p-value: " + num(s.at("p_value").get<double>()) + " with B = " +
         std::to_string(s.at("B").get<std::size_t>()) + "\n";
  out += "- Class prior of U: " + num(s.at("pi_hat").get<double>()) + " (" +
         s.at("pi_source").get<std::string>() + ")\n";
  out += "- Verdict at alpha " + num(s.at("alpha").get<double>()) + ": " +
         s.at("verdict").get<std::string>() + "\n\n";
  return out;
}

std::string crossproject_section(const std::string& path) {
  const CsvDocument doc = parse_csv(read_text_file(input_path(path, "--crossproject")));
  if (doc.header.size() != 14) throw ParseError(path + ": unexpected cross-project table layout");
  std::string out = "## Cross-project validation\n\n";
  out += "| Held-out project | Model | Precision | Recall | F1 | AUC |\n|---|---|---|---|---|---|\n";
  for (const auto& rec : doc.records) {
    out += "| " + rec[0] + " | " + rec[1];
    for (std::size_t c = 3; c < 14; c += 3) {
      out += " | " + num(parse_number(rec[c], "mean")) + " ± " + num(parse_number(rec[c + 1], "std"));
    }
    out += " |\n";
  }
  return out + "\n";
}

}  // namespace

void run_report(const PipelineConfig& config, const Options& opt) {
  if (opt.out.empty()) throw UsageError("missing --out");
  if (opt.label_summary.empty() && config.corpus.empty()) {
    throw UsageError("report needs --corpus or --label-summary");
  }
  const json labeling = labeling_summary(config, opt);
  std::string md = "# Unrelated build failure report: " + labeling.at("project").get<std::string>() + "\n\n";
  md += labeling_section(labeling);
  if (!opt.selection.empty()) md += selection_section(read_report(opt.selection, "ubf-selection"));
  if (!opt.eval_report.empty()) md += eval_section(read_report(opt.eval_report, "ubf-eval"));
  if (!opt.importance_csv.empty()) md += importance_section(opt.importance_csv);
  if (!opt.scar_report.empty()) md += scar_section(read_report(opt.scar_report, "ubf-scar-test"));
  if (!opt.crossproject_csv.empty()) md += crossproject_section(opt.crossproject_csv);
  md += reference_tables_markdown();
  write_file_atomic(output_path(config, opt.out), md);
}

}  // namespace ubf::cli
