#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <nlohmann/json.hpp>
#include <random>
#include <set>

#include "core/classify.hpp"
#include "core/error.hpp"

using namespace fgai;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return static_cast<ErrorCode>(0);
}

// Gaussian blobs per class; class c is shifted along feature c % d by `separation`.
FeatureMatrix blobs(std::mt19937_64& rng, int subjects, int per_subject, int classes, int d, double separation,
                    bool sequences = false) {
  std::normal_distribution<double> n(0, 1);
  FeatureMatrix fm;
  fm.values.resize(subjects * per_subject * classes, d);
  Eigen::Index row = 0;
  for (int s = 0; s < subjects; ++s)
    for (int c = 0; c < classes; ++c)
      for (int k = 0; k < per_subject; ++k, ++row) {
        for (int f = 0; f < d; ++f) fm.values(row, f) = n(rng) + (f == c % d ? separation : 0.0);
        fm.sample_ids.push_back("x" + std::to_string(row));
        fm.subject_ids.push_back("subj" + std::to_string(s));
        fm.labels.push_back("class" + std::to_string(c));
        if (sequences) {
          fm.sequence_ids.push_back("seq" + std::to_string(s) + "_" + std::to_string(c));
          fm.frame_indices.push_back(per_subject - 1 - k);  // stored out of temporal order
        }
      }
  return fm;
}

double objective(const Eigen::MatrixXd& X, const std::vector<double>& y, const Eigen::VectorXd& w, double b, double C) {
  double loss = 0;
  for (Eigen::Index t = 0; t < X.rows(); ++t) {
    const double m = std::max(0.0, 1 - y[static_cast<std::size_t>(t)] * (X.row(t).dot(w) + b));
    loss += m * m;
  }
  return 0.5 * (w.squaredNorm() + b * b) + C * loss;
}

double brute_auc(const std::vector<double>& s, const std::vector<std::uint8_t>& pos) {
  double wins = 0, pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j)
      if (pos[i] && !pos[j]) {
        wins += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
        ++pairs;
      }
  return wins / pairs;
}

// Mode of the trailing window, ties to the label seen most recently.
std::vector<int> brute_vote(const std::vector<int>& labels, std::size_t window) {
  std::vector<int> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::size_t lo = i + 1 >= window ? i + 1 - window : 0;
    std::map<int, int> count, last;
    for (std::size_t j = lo; j <= i; ++j) {
      ++count[labels[j]];
      last[labels[j]] = static_cast<int>(j);
    }
    int best = -1;
    for (const auto& [label, n] : count)
      if (best < 0 || n > count[best] || (n == count[best] && last[label] > last[best])) best = label;
    out.push_back(best);
  }
  return out;
}

}  // namespace

TEST_CASE("separable 2D data is classified perfectly") {
  Eigen::MatrixXd X(6, 2);
  X << 2, 2, 3, 1, 2.5, 3, -2, -1, -3, -2, -1.5, -3;
  const std::vector<double> y{1, 1, 1, -1, -1, -1};
  const auto m = train_binary_svm(X, y, {10.0});
  CHECK(m.converged);
  for (Eigen::Index t = 0; t < 6; ++t) CHECK(y[static_cast<std::size_t>(t)] * m.score(X.row(t).transpose()) > 0.5);
}

TEST_CASE("one sample without bias: w = 2C / (1 + 2C)") {
  Eigen::MatrixXd X(1, 1);
  X << 1;
  const std::vector<double> y{1};
  SvmOptions opt{2.0, false};
  const auto m = train_binary_svm(X, y, opt);
  CHECK(m.w[0] == doctest::Approx(0.8).epsilon(1e-10));
  CHECK(m.bias == 0.0);
  CHECK(m.objective == doctest::Approx(0.5 * 0.64 + 2.0 * 0.04).epsilon(1e-10));
}

TEST_CASE("solver: monotone objective, stationarity, agreement with a long run") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0, 1);
  for (int trial = 0; trial < 5; ++trial) {
    const int rows = 80, d = 6;
    Eigen::MatrixXd X(rows, d);
    std::vector<double> y(rows);
    for (int t = 0; t < rows; ++t) {
      y[static_cast<std::size_t>(t)] = t % 2 ? 1 : -1;
      for (int f = 0; f < d; ++f) X(t, f) = n(rng) + 0.4 * y[static_cast<std::size_t>(t)] * (f == 0);
    }
    const double C = 0.05 * (trial + 1);
    const auto m = train_binary_svm(X, y, {C});
    for (std::size_t i = 1; i < m.objective_trace.size(); ++i) CHECK(m.objective_trace[i] <= m.objective_trace[i - 1]);
    CHECK(m.objective == doctest::Approx(objective(X, y, m.w, m.bias, C)).epsilon(1e-12));

    // Gradient of the objective evaluated independently.
    Eigen::VectorXd g = m.w;
    double gb = m.bias;
    for (int t = 0; t < rows; ++t) {
      const double yt = y[static_cast<std::size_t>(t)];
      const double slack = 1 - yt * m.score(X.row(t).transpose());
      if (slack > 0) {
        g -= 2 * C * slack * yt * X.row(t).transpose();
        gb -= 2 * C * slack * yt;
      }
    }
    CHECK(std::sqrt(g.squaredNorm() + gb * gb) < 1e-3 * (1 + m.w.norm()));

    SvmOptions tight{C};
    tight.max_iterations = 1000;
    tight.tolerance = 1e-15;
    const auto ref = train_binary_svm(X, y, tight);
    CHECK((ref.w - m.w).norm() <= 1e-4 * (1 + ref.w.norm()));
    CHECK(std::abs(ref.objective - m.objective) <= 1e-4 * ref.objective);
  }
}

TEST_CASE("scaling features by s equals scaling C by s^2 (no bias)") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n(0, 1);
  Eigen::MatrixXd X(40, 3);
  std::vector<double> y(40);
  for (int t = 0; t < 40; ++t) {
    y[static_cast<std::size_t>(t)] = t < 20 ? 1 : -1;
    for (int f = 0; f < 3; ++f) X(t, f) = n(rng) + 0.5 * y[static_cast<std::size_t>(t)];
  }
  SvmOptions a{0.3, false, 1000, 1e-15}, b{0.3 * 16.0, false, 1000, 1e-15};
  const auto ms = train_binary_svm(4.0 * X, y, a);
  const auto m = train_binary_svm(X, y, b);
  CHECK((4.0 * ms.w - m.w).norm() < 1e-6 * (1 + m.w.norm()));
}

TEST_CASE("training rejects bad input") {
  Eigen::MatrixXd X = Eigen::MatrixXd::Ones(2, 2);
  CHECK(code_of([&] { train_binary_svm(X, std::vector<double>{1, 0}, {}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { train_binary_svm(X, std::vector<double>{1}, {}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { train_binary_svm(X, std::vector<double>{1, -1}, {0.0}); }) == ErrorCode::InvalidArgument);
  X(0, 0) = NAN;
  CHECK(code_of([&] { train_binary_svm(X, std::vector<double>{1, -1}, {}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("one-vs-rest: one model per class, scores are plain dot products, ties go low") {
  std::mt19937_64 rng(7);
  const auto fm = blobs(rng, 4, 5, 6, 6, 4.0);
  const auto model = train_ovr_svm(fm, {1.0}, false);
  REQUIRE(model.models.size() == 6);
  CHECK(model.classes == fm.classes());
  const auto pred = predict(model, fm.values);
  for (Eigen::Index r = 0; r < fm.rows(); r += 7)
    for (std::size_t c = 0; c < 6; ++c) {
      double manual = model.models[c].bias;
      for (Eigen::Index f = 0; f < fm.cols(); ++f) manual += model.models[c].w[f] * fm.values(r, f);
      CHECK(pred.scores(r, static_cast<Eigen::Index>(c)) == doctest::Approx(manual).epsilon(1e-12));
    }
  // A zero sample scores each class by its bias alone.
  const auto zero = predict(model, Eigen::MatrixXd::Zero(1, 6));
  int best = 0;
  for (int c = 1; c < 6; ++c)
    if (model.models[static_cast<std::size_t>(c)].bias > model.models[static_cast<std::size_t>(best)].bias) best = c;
  CHECK(zero.labels[0] == best);

  OvrClassifier tie;
  tie.classes = {"a", "b", "c"};
  for (int c = 0; c < 3; ++c) {
    SvmModel m;
    m.w = Eigen::VectorXd::Zero(2);
    m.bias = c == 0 ? 0.0 : 1.0;
    tie.models.push_back(m);
  }
  CHECK(predict(tie, Eigen::MatrixXd::Zero(1, 2)).labels[0] == 1);
  CHECK(code_of([&] { predict(tie, Eigen::MatrixXd::Zero(1, 3)); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("standardizer fits training statistics; constant columns pass through") {
  Eigen::MatrixXd X(4, 2);
  X << 1, 5, 2, 5, 3, 5, 4, 5;
  const auto s = Standardizer::fit(X);
  CHECK(s.mean[0] == 2.5);
  CHECK(s.scale[0] == doctest::Approx(std::sqrt(1.25)));
  CHECK(s.scale[1] == 1.0);
  const auto Z = s.apply(X);
  CHECK(std::abs(Z.col(0).mean()) < 1e-15);
  CHECK(Z.col(1).isZero());
}

TEST_CASE("model JSON round trip is exact") {
  std::mt19937_64 rng(8);
  const auto fm = blobs(rng, 3, 4, 3, 4, 2.0);
  const auto model = train_ovr_svm(fm, {0.7}, true);
  const auto back = model_from_json(model_to_json(model));
  CHECK(back.classes == model.classes);
  REQUIRE(back.scaler);
  CHECK(back.scaler->mean == model.scaler->mean);
  CHECK(back.scaler->scale == model.scaler->scale);
  for (std::size_t c = 0; c < 3; ++c) {
    CHECK(back.models[c].w == model.models[c].w);
    CHECK(back.models[c].bias == model.models[c].bias);
    CHECK(back.models[c].converged == model.models[c].converged);
  }
  CHECK(predict(back, fm.values).scores == predict(model, fm.values).scores);
  CHECK(code_of([] { model_from_json("{\"format\":\"other\"}"); }) == ErrorCode::Parse);
  CHECK(code_of([] { model_from_json("not json"); }) == ErrorCode::Parse);
}

TEST_CASE("AuC: worked examples and a brute-force pair count") {
  CHECK(auc(std::vector<double>{0.1, 0.4, 0.35, 0.8}, std::vector<std::uint8_t>{0, 0, 1, 1}) == 0.75);
  CHECK(auc(std::vector<double>{1, 2, 3, 4}, std::vector<std::uint8_t>{0, 0, 1, 1}) == 1.0);
  CHECK(auc(std::vector<double>{1, 2, 3, 4}, std::vector<std::uint8_t>{1, 1, 0, 0}) == 0.0);
  CHECK(auc(std::vector<double>{5, 5, 5, 5}, std::vector<std::uint8_t>{1, 0, 1, 0}) == 0.5);
  CHECK(code_of([] { auc(std::vector<double>{1, 2}, std::vector<std::uint8_t>{1, 1}); }) == ErrorCode::InvalidArgument);
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng() % 60;
    std::vector<double> s(n);
    std::vector<std::uint8_t> pos(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng() % 10);  // plenty of ties
      pos[i] = rng() % 2;
    }
    pos[0] = 1;
    pos[1] = 0;
    CHECK(std::abs(auc(s, pos) - brute_auc(s, pos)) < 1e-12);
  }
}

TEST_CASE("folds partition subjects, are reproducible and balanced") {
  std::vector<std::string> subjects;
  for (int i = 0; i < 23; ++i) subjects.push_back("p" + std::to_string(i));
  const auto a = make_folds(subjects, 5, 42), b = make_folds(subjects, 5, 42), c = make_folds(subjects, 5, 43);
  CHECK(a.folds == b.folds);
  CHECK(a.folds != c.folds);
  a.validate(subjects);
  for (const auto& f : a.folds) CHECK((f.size() == 4 || f.size() == 5));
  auto shuffled = subjects;
  std::reverse(shuffled.begin(), shuffled.end());
  CHECK(make_folds(shuffled, 5, 42).folds == a.folds);  // input order does not matter

  const auto loso = make_folds(subjects, 23, 1);
  for (const auto& f : loso.folds) CHECK(f.size() == 1);
  CHECK(code_of([&] { make_folds(subjects, 24, 1); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { make_folds(subjects, 1, 1); }) == ErrorCode::InvalidArgument);

  FoldSpec bad{{{"p0", "p1"}, {"p1"}}};
  CHECK(code_of([&] { bad.validate({"p0", "p1"}); }) == ErrorCode::InvalidArgument);
  FoldSpec missing{{{"p0"}}};
  CHECK(code_of([&] { missing.validate({"p0", "p1"}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("cross-validation on 20 separable subjects scores 1.0 and never leaks subjects") {
  std::mt19937_64 rng(10);
  const auto fm = blobs(rng, 20, 3, 3, 5, 8.0);
  CvOptions opt;
  opt.folds = 10;
  opt.seed = 3;
  const auto rep = cross_validate(fm, opt);
  CHECK(rep.mean_accuracy == 1.0);
  CHECK(rep.mean_auc == 1.0);
  CHECK(rep.fold_accuracy.size() == 10);
  CHECK(rep.confusion.sum() == fm.rows());
  for (Eigen::Index c = 0; c < 3; ++c) CHECK(rep.confusion.row(c).sum() == 60);
  CHECK(rep.confusion.diagonal().sum() == fm.rows());
  std::set<std::string> seen;
  for (const auto& fold : rep.fold_subjects)
    for (const auto& s : fold) CHECK(seen.insert(s).second);
  CHECK(seen.size() == 20);

  opt.metric = Metric::Auc;
  CHECK(cross_validate(fm, opt).headline() == 1.0);

  const auto json = nlohmann::json::parse(rep.to_json());
  CHECK(json["mean_accuracy"] == 1.0);
  CHECK(json["folds"] == 10);
  CHECK(rep.auc_csv().rfind("class,auc\n", 0) == 0);
  CHECK(rep.to_table().find("class0") != std::string::npos);
}

TEST_CASE("cross-validation on noise stays near chance and the confusion matrix adds up") {
  std::mt19937_64 rng(11);
  const auto fm = blobs(rng, 12, 5, 2, 4, 0.0);
  CvOptions opt;
  opt.folds = 4;
  const auto rep = cross_validate(fm, opt);
  CHECK(rep.mean_accuracy < 0.75);
  CHECK(rep.confusion.sum() == fm.rows());
  CHECK(rep.confusion.row(0).sum() == 60);
}

TEST_CASE("trailing-window vote") {
  const std::vector<int> aaabbb{0, 0, 0, 1, 1, 1};
  CHECK(dynamic_vote(aaabbb, 6).back() == 1);
  CHECK(dynamic_vote(aaabbb, 6) == std::vector<int>{0, 0, 0, 0, 0, 1});
  CHECK(dynamic_vote(aaabbb, 1) == aaabbb);
  CHECK(code_of([&] { dynamic_vote(aaabbb, 0); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { dynamic_vote(std::vector<int>{}, 3); }) == ErrorCode::InvalidArgument);

  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<int> labels(1 + rng() % 40);
    for (int& l : labels) l = static_cast<int>(rng() % 4);
    const std::size_t window = 1 + rng() % 8;
    const auto voted = dynamic_vote(labels, window);
    CHECK(voted == brute_vote(labels, window));
    // Renaming classes renames the votes.
    std::vector<int> renamed(labels);
    for (int& l : renamed) l = (l * 3 + 1) % 4 + 10;
    auto expect = voted;
    for (int& l : expect) l = (l * 3 + 1) % 4 + 10;
    CHECK(dynamic_vote(renamed, window) == expect);
    // Frames before the sequence cannot influence later windows once they slide out.
    std::vector<int> prefixed{3, 3, 3, 3, 3, 3, 3, 3};
    prefixed.insert(prefixed.end(), labels.begin(), labels.end());
    const auto pv = dynamic_vote(prefixed, window);
    for (std::size_t i = window; i < labels.size(); ++i) CHECK(pv[i + 8] == voted[i]);
  }
}

TEST_CASE("dynamic evaluation votes within sequences") {
  std::mt19937_64 rng(13);
  const auto fm = blobs(rng, 10, 8, 2, 3, 6.0, true);
  CvOptions opt;
  opt.folds = 5;
  const auto rep = dynamic_evaluate(fm, opt, 6);
  CHECK(rep.mode == "dynamic");
  CHECK(rep.window == 6);
  CHECK(rep.mean_accuracy == 1.0);
  CHECK(rep.mean_frame_accuracy == 1.0);
  CHECK(rep.confusion.sum() == fm.rows());
  const auto json = nlohmann::json::parse(rep.to_json());
  CHECK(json["window_alignment"] == "trailing");
  CHECK(json["vote_tie_rule"] == "most_recent");

  auto plain = fm;
  plain.sequence_ids.clear();
  plain.frame_indices.clear();
  CHECK(code_of([&] { dynamic_evaluate(plain, opt, 6); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("voting repairs isolated frame errors") {
  std::mt19937_64 rng(14);
  // Weak separation: frames err now and then; voting over long windows helps.
  const auto fm = blobs(rng, 10, 30, 2, 2, 1.6, true);
  CvOptions opt;
  opt.folds = 5;
  const auto rep = dynamic_evaluate(fm, opt, 15);
  CHECK(rep.mean_frame_accuracy < 1.0);
  CHECK(rep.mean_accuracy > rep.mean_frame_accuracy);
}
