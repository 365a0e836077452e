#include "ubf/feature_table.hpp"

#include <algorithm>
#include <set>

#include "ubf/csv.hpp"
#include "ubf/error.hpp"
#include "ubf/io.hpp"

namespace ubf {

namespace {

const std::set<std::string, std::less<>> kReservedColumns{
    "issue_id", "event_index", "heuristic_flag", "hpem_match", "y_true", "s"};

int parse_flag(std::string_view text, std::string_view column) {
  const double v = parse_number(text, column);
  if (v != 0.0 && v != 1.0) {
    throw ParseError("column " + std::string(column) + " must be 0 or 1, got '" +
                     std::string(text) + "'");
  }
  return static_cast<int>(v);
}

std::string flag_text(int v) { return v ? "1" : "0"; }

}  // namespace

std::optional<std::size_t> FeatureTable::feature_index(std::string_view name) const {
  const auto it = std::find(feature_names.begin(), feature_names.end(), name);
  if (it == feature_names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - feature_names.begin());
}

FeatureTable FeatureTable::with_features(std::span<const std::string> names) const {
  std::vector<std::size_t> cols;
  for (const auto& n : names) {
    const auto idx = feature_index(n);
    if (!idx) throw FeatureMismatch("feature '" + n + "' is not in the table");
    cols.push_back(*idx);
  }
  FeatureTable out = *this;
  out.feature_names.assign(names.begin(), names.end());
  out.x = x.select_columns(cols);
  return out;
}

FeatureTable FeatureTable::select_rows(std::span<const std::size_t> indices) const {
  FeatureTable out;
  out.feature_names = feature_names;
  out.x = x.select_rows(indices);
  auto pick = [&](const auto& src, auto& dst) {
    dst.reserve(indices.size());
    for (std::size_t i : indices) dst.push_back(src.at(i));
  };
  pick(issue_ids, out.issue_ids);
  pick(event_indices, out.event_indices);
  pick(heuristic_flag, out.heuristic_flag);
  if (hpem_match) pick(*hpem_match, out.hpem_match.emplace());
  if (y_true) pick(*y_true, out.y_true.emplace());
  return out;
}

void FeatureTable::check_shape() const {
  const std::size_t n = x.rows();
  const bool ok = issue_ids.size() == n && event_indices.size() == n &&
                  heuristic_flag.size() == n && (!hpem_match || hpem_match->size() == n) &&
                  (!y_true || y_true->size() == n) &&
                  (n == 0 || x.cols() == feature_names.size());
  if (!ok) throw LengthMismatch("feature table columns have inconsistent lengths");
}

FeatureTable make_feature_table(std::span<const FeatureRow> rows) {
  FeatureTable t;
  t.feature_names.assign(feature_names().begin(), feature_names().end());
  t.x = Matrix(rows.size(), kFeatureCount);
  t.hpem_match.emplace();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto values = rows[r].features.to_array();
    std::copy(values.begin(), values.end(), t.x.row(r).begin());
    t.issue_ids.push_back(rows[r].issue_id);
    t.event_indices.push_back(rows[r].event_index);
    t.heuristic_flag.push_back(rows[r].heuristic_flag ? 1 : 0);
    t.hpem_match->push_back(rows[r].hpem_match ? 1 : 0);
  }
  return t;
}

std::string write_feature_csv(const FeatureTable& table, std::string_view flag_column) {
  table.check_shape();
  std::string out = "#schema=" + std::string(kFeatureSchema) + "\n";
  std::vector<std::string> header{"issue_id", "event_index", std::string(flag_column)};
  header.insert(header.end(), table.feature_names.begin(), table.feature_names.end());
  if (table.hpem_match) header.emplace_back("hpem_match");
  if (table.y_true) header.emplace_back("y_true");
  out += join_csv(header) + "\n";
  for (std::size_t r = 0; r < table.rows(); ++r) {
    std::vector<std::string> fields{table.issue_ids[r], std::to_string(table.event_indices[r]),
                                    flag_text(table.heuristic_flag[r])};
    for (double v : table.x.row(r)) fields.push_back(format_double(v));
    if (table.hpem_match) fields.push_back(flag_text((*table.hpem_match)[r]));
    if (table.y_true) fields.push_back(flag_text((*table.y_true)[r]));
    out += join_csv(fields) + "\n";
  }
  return out;
}

FeatureTable read_feature_csv(std::string_view text) {
  const CsvDocument doc = parse_csv(text);
  if (doc.header.empty()) throw ParseError("feature CSV has no header");

  auto find = [&](std::string_view name) -> std::optional<std::size_t> {
    const auto it = std::find(doc.header.begin(), doc.header.end(), name);
    if (it == doc.header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - doc.header.begin());
  };
  const auto id_col = find("issue_id");
  const auto event_col = find("event_index");
  auto flag_col = find("heuristic_flag");
  if (!flag_col) flag_col = find("s");
  if (!id_col || !flag_col) {
    throw ParseError("feature CSV needs issue_id and heuristic_flag (or s) columns");
  }
  const auto hpem_col = find("hpem_match");
  const auto y_col = find("y_true");

  FeatureTable t;
  std::vector<std::size_t> feature_cols;
  for (std::size_t c = 0; c < doc.header.size(); ++c) {
    if (kReservedColumns.contains(doc.header[c])) continue;
    feature_cols.push_back(c);
    t.feature_names.push_back(doc.header[c]);
  }
  t.x = Matrix(doc.records.size(), feature_cols.size());
  if (hpem_col) t.hpem_match.emplace();
  if (y_col) t.y_true.emplace();
  for (std::size_t r = 0; r < doc.records.size(); ++r) {
    const auto& rec = doc.records[r];
    t.issue_ids.push_back(rec[*id_col]);
    t.event_indices.push_back(
        event_col ? static_cast<std::size_t>(parse_number(rec[*event_col], "event_index")) : r);
    t.heuristic_flag.push_back(parse_flag(rec[*flag_col], doc.header[*flag_col]));
    for (std::size_t k = 0; k < feature_cols.size(); ++k) {
      t.x(r, k) = parse_number(rec[feature_cols[k]], doc.header[feature_cols[k]]);
    }
    if (hpem_col) t.hpem_match->push_back(parse_flag(rec[*hpem_col], "hpem_match"));
    if (y_col) t.y_true->push_back(parse_flag(rec[*y_col], "y_true"));
  }
  return t;
}

void save_feature_table(const FeatureTable& table, const std::filesystem::path& path,
                        std::string_view flag_column) {
  write_file_atomic(path, write_feature_csv(table, flag_column));
}

FeatureTable load_feature_table(const std::filesystem::path& path) {
  return read_feature_csv(read_text_file(path));
}

std::string row_key(std::string_view issue_id, std::size_t event_index) {
  return std::string(issue_id) + "#" + std::to_string(event_index);
}

}  // namespace ubf
