#pragma once

#include <optional>
#include <span>
#include <string>

#include "features.hpp"

namespace fgai {

struct SvmOptions {
  double C = 1.0;
  bool fit_bias = true;  ///< appended constant-1 feature (regularized like the rest)
  int max_iterations = 100;
  double tolerance = 1e-6;  ///< stop when the relative objective decrease falls below this
};

/// Linear model minimizing 0.5 w'w + C sum_t max(0, 1 - l_t w'x_t)^2.
struct SvmModel {
  Eigen::VectorXd w;
  double bias = 0.0;
  int positive_class = 0;
  double C = 1.0;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Objective at the start and after every iteration.
  std::vector<double> objective_trace;

  double score(const Eigen::Ref<const Eigen::VectorXd>& x) const { return w.dot(x) + bias; }
};

/// Binary squared-hinge SVM; labels are +1 / -1. Truncated Newton (conjugate
/// gradient on the generalized Hessian) with Armijo backtracking from w = 0.
SvmModel train_binary_svm(const Eigen::MatrixXd& X, std::span<const double> labels, const SvmOptions& options,
                          int positive_class = 0);

/// Per-feature z-score, fit on training rows only.
struct Standardizer {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;

  static Standardizer fit(const Eigen::MatrixXd& X);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const;
};

struct OvrClassifier {
  std::vector<std::string> classes;
  std::vector<SvmModel> models;  ///< one per class, same order
  std::optional<Standardizer> scaler;

  std::size_t feature_count() const { return models.empty() ? 0 : static_cast<std::size_t>(models.front().w.size()); }
};

/// One-vs-rest training; `classes` defaults to the sorted labels of `fm`.
OvrClassifier train_ovr_svm(const FeatureMatrix& fm, const SvmOptions& options, bool standardize = false,
                            std::vector<std::string> classes = {});

struct Prediction {
  Eigen::MatrixXd scores;  ///< samples x classes
  std::vector<int> labels;  ///< argmax, ties to the lowest class index
};

Prediction predict(const OvrClassifier& model, const Eigen::MatrixXd& X);

/// JSON round trip of a trained classifier (doubles are written exactly).
std::string model_to_json(const OvrClassifier& model);
OvrClassifier model_from_json(const std::string& text);

/// Mann-Whitney AuC (ties count 1/2). Throws InvalidArgument when one of the
/// classes is absent.
double auc(std::span<const double> scores, std::span<const std::uint8_t> positive);

/// Subject-disjoint partition.
struct FoldSpec {
  std::vector<std::vector<std::string>> folds;

  std::size_t size() const { return folds.size(); }
  /// Pairwise disjoint, non-empty, covering exactly `subjects`.
  void validate(const std::vector<std::string>& subjects) const;
};

/// Subjects sorted, shuffled by `seed` (Fisher-Yates on mt19937_64) and dealt
/// round-robin into k folds of near-equal size.
FoldSpec make_folds(std::vector<std::string> subjects, std::size_t k, std::uint64_t seed);

enum class Metric { Accuracy, Auc };

struct CvOptions {
  std::size_t folds = 10;
  std::uint64_t seed = 0;
  Metric metric = Metric::Accuracy;
  SvmOptions svm;
  bool standardize = true;
  std::optional<FoldSpec> fold_spec;  ///< overrides folds/seed when set
};

struct EvalReport {
  std::vector<std::string> classes;
  Metric metric = Metric::Accuracy;
  std::string mode = "static";
  std::size_t folds = 0;
  std::uint64_t seed = 0;
  double C = 1.0;
  bool standardized = true;
  std::size_t window = 0;  ///< dynamic mode only

  std::vector<double> fold_accuracy;
  double mean_accuracy = 0.0;
  /// Per fold: mean AuC over classes present (and absent) in the test fold.
  std::vector<double> fold_auc;
  double mean_auc = 0.0;
  /// Per class, averaged over the folds where it is defined (NaN otherwise).
  std::vector<double> class_auc;
  /// Per-frame accuracy before voting (dynamic mode only).
  std::vector<double> fold_frame_accuracy;
  double mean_frame_accuracy = 0.0;
  Eigen::MatrixXi confusion;  ///< rows true class, columns predicted
  std::vector<std::vector<std::string>> fold_subjects;

  double headline() const { return metric == Metric::Accuracy ? mean_accuracy : mean_auc; }
  std::string to_json() const;
  std::string to_table() const;
  /// "class,auc" rows, one per class.
  std::string auc_csv() const;
};

EvalReport cross_validate(const FeatureMatrix& fm, const CvOptions& options);

/// Trailing-window majority vote: output[i] is the mode of the last
/// min(window, i + 1) labels; ties go to the tied class seen most recently.
std::vector<int> dynamic_vote(std::span<const int> frame_labels, std::size_t window);

/// Cross-validated per-frame prediction followed by per-sequence voting.
/// Needs sequence metadata in `fm`.
EvalReport dynamic_evaluate(const FeatureMatrix& fm, const CvOptions& options, std::size_t window);

}  // namespace fgai
