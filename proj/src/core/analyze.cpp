#include "analyze.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "error.hpp"

namespace fgai {

PrunedFeatures prune_zero_features(const FeatureMatrix& fm) {
  fm.validate();
  PrunedFeatures out;
  for (Eigen::Index c = 0; c < fm.cols(); ++c)
    if ((fm.values.col(c).array() != 0.0).any()) out.kept_columns.push_back(c);
  if (out.kept_columns.empty()) fail(ErrorCode::InvalidArgument, "every feature is zero");
  out.matrix = fm;
  out.matrix.values.resize(fm.rows(), static_cast<Eigen::Index>(out.kept_columns.size()));
  for (std::size_t i = 0; i < out.kept_columns.size(); ++i)
    out.matrix.values.col(static_cast<Eigen::Index>(i)) = fm.values.col(out.kept_columns[i]);
  return out;
}

DiscriminationReport fisher_j(const FeatureMatrix& fm) {
  fm.validate();
  DiscriminationReport rep;
  rep.classes = fm.classes();
  const auto k = static_cast<Eigen::Index>(rep.classes.size());
  if (k < 2) fail(ErrorCode::InvalidArgument, "discrimination analysis needs at least two classes");
  const auto idx = fm.class_indices(rep.classes);
  std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
  for (int c : idx) ++counts[static_cast<std::size_t>(c)];
  for (Eigen::Index c = 0; c < k; ++c)
    if (counts[static_cast<std::size_t>(c)] < 2)
      fail(ErrorCode::InvalidArgument, "class '" + rep.classes[static_cast<std::size_t>(c)] + "' has fewer than 2 samples");

  const Eigen::Index d = fm.cols();
  rep.means = Eigen::MatrixXd::Zero(k, d);
  Eigen::MatrixXd sq = Eigen::MatrixXd::Zero(k, d);
  for (Eigen::Index r = 0; r < fm.rows(); ++r) rep.means.row(idx[static_cast<std::size_t>(r)]) += fm.values.row(r);
  for (Eigen::Index c = 0; c < k; ++c) rep.means.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
  for (Eigen::Index r = 0; r < fm.rows(); ++r) {
    const int c = idx[static_cast<std::size_t>(r)];
    sq.row(c) += (fm.values.row(r) - rep.means.row(c)).array().square().matrix();
  }
  rep.stddevs.resize(k, d);
  for (Eigen::Index c = 0; c < k; ++c)
    rep.stddevs.row(c) = (sq.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)] - 1))
                             .array()
                             .sqrt()
                             .max(kSigmaFloor)
                             .matrix();

  rep.J = Eigen::VectorXd::Zero(d);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = i + 1; j < k; ++j) {
      const Eigen::ArrayXd vi = rep.stddevs.row(i).array().square().transpose();
      const Eigen::ArrayXd vj = rep.stddevs.row(j).array().square().transpose();
      const Eigen::ArrayXd dm = (rep.means.row(i) - rep.means.row(j)).array().transpose();
      rep.J.array() += 0.5 * dm.square() * (1.0 / vi + 1.0 / vj) + 0.5 * (vi / vj + vj / vi - 2.0);
    }

  rep.ranking.resize(static_cast<std::size_t>(d));
  std::iota(rep.ranking.begin(), rep.ranking.end(), Eigen::Index{0});
  std::stable_sort(rep.ranking.begin(), rep.ranking.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return rep.J[a] > rep.J[b]; });
  rep.feature_ids.resize(static_cast<std::size_t>(d));
  std::iota(rep.feature_ids.begin(), rep.feature_ids.end(), Eigen::Index{0});
  return rep;
}

std::string rank_report_csv(const DiscriminationReport& report, std::size_t top_n) {
  if (top_n > report.ranking.size())
    fail(ErrorCode::InvalidArgument, "top_n " + std::to_string(top_n) + " exceeds feature count " +
                                         std::to_string(report.ranking.size()));
  std::ostringstream out;
  out.precision(12);
  out << "rank,feature_index,J\n";
  for (std::size_t r = 0; r < top_n; ++r) {
    const Eigen::Index f = report.ranking[r];
    out << r + 1 << ',' << report.feature_ids[static_cast<std::size_t>(f)] << ',' << report.J[f] << '\n';
  }
  return out.str();
}

}  // namespace fgai
