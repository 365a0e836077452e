#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ubf/features.hpp"
#include "ubf/matrix.hpp"

namespace ubf {

inline constexpr std::string_view kFeatureSchema = "ubf-features-v1";

/// A feature matrix with per-row identity and label columns, as exchanged
/// between the CLI stages. Feature columns are arbitrary; the corpus pipeline
/// produces the 33 named features, the generator x1..xd.
struct FeatureTable {
  std::vector<std::string> issue_ids;
  std::vector<std::size_t> event_indices;
  std::vector<std::string> feature_names;
  Matrix x;
  std::vector<int> heuristic_flag;               ///< s: 1 = labeled positive
  std::optional<std::vector<int>> hpem_match;
  std::optional<std::vector<int>> y_true;

  std::size_t rows() const noexcept { return x.rows(); }
  std::optional<std::size_t> feature_index(std::string_view name) const;

  /// Keeps the named feature columns in the given order; FeatureMismatch if
  /// one is absent.
  FeatureTable with_features(std::span<const std::string> names) const;
  FeatureTable select_rows(std::span<const std::size_t> indices) const;
  /// Throws LengthMismatch when the column vectors disagree in length.
  void check_shape() const;
};

FeatureTable make_feature_table(std::span<const FeatureRow> rows);

/// `flag_column` names the label column; generated data uses "s".
std::string write_feature_csv(const FeatureTable& table,
                              std::string_view flag_column = "heuristic_flag");
FeatureTable read_feature_csv(std::string_view text);

void save_feature_table(const FeatureTable& table, const std::filesystem::path& path,
                        std::string_view flag_column = "heuristic_flag");
FeatureTable load_feature_table(const std::filesystem::path& path);

/// Row key used to join manual labels onto a table.
std::string row_key(std::string_view issue_id, std::size_t event_index);

}  // namespace ubf
