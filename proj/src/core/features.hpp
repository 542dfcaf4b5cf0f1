#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fgai {

/// samples x features matrix with per-row identity and class label.
struct FeatureMatrix {
  Eigen::MatrixXd values;
  std::vector<std::string> sample_ids;
  std::vector<std::string> subject_ids;
  std::vector<std::string> labels;
  /// Optional temporal metadata; either empty or one entry per row.
  std::vector<std::string> sequence_ids;
  std::vector<long long> frame_indices;
  std::string layer;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
  bool has_sequences() const { return !sequence_ids.empty(); }

  /// Throws InvalidArgument on count mismatch or non-finite values.
  void validate() const;
  /// Sorted distinct labels; class index = position in this list.
  std::vector<std::string> classes() const;
  std::vector<int> class_indices(const std::vector<std::string>& classes) const;
  FeatureMatrix select_rows(const std::vector<Eigen::Index>& rows) const;
};

/// "feats.fmx" -> "feats.labels.csv"
std::filesystem::path labels_path_for(const std::filesystem::path& matrix_path);

/// FMX1: "FMX1", u32 rows, u32 cols (little endian), row-major float32.
void write_fmx_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& values);
Eigen::MatrixXd read_fmx_matrix(const std::filesystem::path& path);

/// Writes the matrix and its sibling labels CSV.
void write_feature_matrix(const std::filesystem::path& path, const FeatureMatrix& fm);
FeatureMatrix read_feature_matrix(const std::filesystem::path& path);

/// Row-wise concatenation (pooling samples); column counts must agree.
FeatureMatrix concat_rows(const std::vector<FeatureMatrix>& parts);

std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace fgai
