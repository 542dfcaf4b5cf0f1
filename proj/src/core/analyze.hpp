#pragma once

#include <string>

#include "features.hpp"

namespace fgai {

struct PrunedFeatures {
  FeatureMatrix matrix;
  /// kept_columns[i] is the original column of kept column i (ascending).
  std::vector<Eigen::Index> kept_columns;
};

/// Drops columns that are exactly zero for every sample.
PrunedFeatures prune_zero_features(const FeatureMatrix& fm);

/// Floor applied to per-class standard deviations.
inline constexpr double kSigmaFloor = 1e-12;

struct DiscriminationReport {
  Eigen::VectorXd J;
  /// Feature positions by descending J, ties by ascending position.
  std::vector<Eigen::Index> ranking;
  /// classes x features; sample (n - 1) standard deviations, floored.
  Eigen::MatrixXd means, stddevs;
  std::vector<std::string> classes;
  /// Column ids reported in exports (original indices after pruning).
  std::vector<Eigen::Index> feature_ids;

  std::size_t num_classes() const { return classes.size(); }
};

/// Sum over unordered class pairs of
///   0.5 (mu_i - mu_j)^2 (1/s_i^2 + 1/s_j^2) + 0.5 (s_i^2/s_j^2 + s_j^2/s_i^2 - 2)
/// per feature. Every class needs at least two samples.
DiscriminationReport fisher_j(const FeatureMatrix& fm);

/// CSV "rank,feature_index,J" for the top_n features (header only for 0).
std::string rank_report_csv(const DiscriminationReport& report, std::size_t top_n);

}  // namespace fgai
