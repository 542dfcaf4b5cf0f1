#include "classify.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <numeric>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "error.hpp"

namespace fgai {
namespace {

struct SquaredHinge {
  const Eigen::MatrixXd& X;
  std::span<const double> y;
  double C;

  double objective(const Eigen::VectorXd& w, Eigen::VectorXd* margins_out = nullptr) const {
    const Eigen::VectorXd z = X * w;
    double loss = 0.0;
    for (Eigen::Index t = 0; t < z.size(); ++t) {
      const double slack = 1.0 - y[static_cast<std::size_t>(t)] * z[t];
      if (slack > 0) loss += slack * slack;
    }
    if (margins_out) *margins_out = z;
    return 0.5 * w.squaredNorm() + C * loss;
  }
};

}  // namespace

SvmModel train_binary_svm(const Eigen::MatrixXd& X0, std::span<const double> labels, const SvmOptions& opt,
                          int positive_class) {
  if (static_cast<std::size_t>(X0.rows()) != labels.size())
    fail(ErrorCode::InvalidArgument, "label count differs from sample count");
  if (!(opt.C > 0) || !std::isfinite(opt.C)) fail(ErrorCode::InvalidArgument, "C must be positive");
  if (!X0.allFinite()) fail(ErrorCode::InvalidArgument, "non-finite feature values");
  for (double l : labels)
    if (l != 1.0 && l != -1.0) fail(ErrorCode::InvalidArgument, "labels must be +1 or -1");

  Eigen::MatrixXd Xb;
  if (opt.fit_bias) {
    Xb.resize(X0.rows(), X0.cols() + 1);
    Xb.leftCols(X0.cols()) = X0;
    Xb.col(X0.cols()).setOnes();
  }
  const Eigen::MatrixXd& X = opt.fit_bias ? Xb : X0;
  const SquaredHinge f{X, labels, opt.C};
  const Eigen::Index n = X.rows(), d = X.cols();
  const Eigen::Map<const Eigen::VectorXd> y(labels.data(), n);

  SvmModel model;
  model.positive_class = positive_class;
  model.C = opt.C;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd z;
  double obj = f.objective(w, &z);
  model.objective_trace.push_back(obj);

  for (int it = 0; it < opt.max_iterations; ++it) {
    // Active set: samples with positive slack.
    std::vector<Eigen::Index> active;
    for (Eigen::Index t = 0; t < n; ++t)
      if (1.0 - y[t] * z[t] > 0) active.push_back(t);
    Eigen::MatrixXd XI(static_cast<Eigen::Index>(active.size()), d);
    Eigen::VectorXd rI(static_cast<Eigen::Index>(active.size()));
    for (std::size_t k = 0; k < active.size(); ++k) {
      XI.row(static_cast<Eigen::Index>(k)) = X.row(active[k]);
      rI[static_cast<Eigen::Index>(k)] = z[active[k]] - y[active[k]];
    }
    const Eigen::VectorXd grad = w + 2.0 * opt.C * (XI.transpose() * rI);
    const double gnorm = grad.norm();
    if (gnorm <= 1e-12 * std::max(1.0, w.norm())) {
      model.converged = true;
      break;
    }

    // CG on (I + 2C XI'XI) s = -grad.
    auto hess = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
      return v + 2.0 * opt.C * (XI.transpose() * (XI * v));
    };
    Eigen::VectorXd s = Eigen::VectorXd::Zero(d), r = -grad, p = r;
    double rr = r.squaredNorm();
    const double cg_tol = std::min(0.1, std::sqrt(gnorm)) * gnorm;
    for (Eigen::Index k = 0; k < std::max<Eigen::Index>(d, 10) && std::sqrt(rr) > cg_tol; ++k) {
      const Eigen::VectorXd Hp = hess(p);
      const double alpha = rr / p.dot(Hp);
      s += alpha * p;
      r -= alpha * Hp;
      const double rr_new = r.squaredNorm();
      p = r + (rr_new / rr) * p;
      rr = rr_new;
    }

    // Armijo backtracking; the objective never increases.
    const double slope = grad.dot(s);
    double step = 1.0, next = obj;
    Eigen::VectorXd w_next, z_next;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      w_next = w + step * s;
      next = f.objective(w_next, &z_next);
      if (next <= obj + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    model.iterations = it + 1;
    if (!accepted || next > obj) {
      model.objective_trace.push_back(obj);
      model.converged = true;  // no descent left at working precision
      break;
    }
    const double decrease = (obj - next) / std::max(std::abs(obj), 1e-300);
    w = std::move(w_next);
    z = std::move(z_next);
    obj = next;
    model.objective_trace.push_back(obj);
    if (decrease < opt.tolerance) {
      model.converged = true;
      break;
    }
  }

  model.objective = obj;
  if (opt.fit_bias) {
    model.w = w.head(d - 1);
    model.bias = w[d - 1];
  } else {
    model.w = w;
    model.bias = 0.0;
  }
  return model;
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& X) {
  Standardizer s;
  const auto n = static_cast<double>(X.rows());
  s.mean = X.colwise().mean();
  s.scale = ((X.rowwise() - s.mean).array().square().colwise().sum() / n).sqrt().matrix();
  for (Eigen::Index c = 0; c < s.scale.size(); ++c)
    if (!(s.scale[c] > 1e-12)) s.scale[c] = 1.0;
  return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& X) const {
  return ((X.rowwise() - mean).array().rowwise() / scale.array()).matrix();
}

OvrClassifier train_ovr_svm(const FeatureMatrix& fm, const SvmOptions& options, bool standardize,
                            std::vector<std::string> classes) {
  fm.validate();
  OvrClassifier out;
  out.classes = classes.empty() ? fm.classes() : std::move(classes);
  if (out.classes.size() < 2) fail(ErrorCode::InvalidArgument, "one-vs-rest training needs at least two classes");
  const auto idx = fm.class_indices(out.classes);
  Eigen::MatrixXd X = fm.values;
  if (standardize) {
    out.scaler = Standardizer::fit(X);
    X = out.scaler->apply(X);
  }
  std::vector<double> y(idx.size());
  for (std::size_t c = 0; c < out.classes.size(); ++c) {
    for (std::size_t t = 0; t < idx.size(); ++t) y[t] = idx[t] == static_cast<int>(c) ? 1.0 : -1.0;
    out.models.push_back(train_binary_svm(X, y, options, static_cast<int>(c)));
  }
  return out;
}

Prediction predict(const OvrClassifier& model, const Eigen::MatrixXd& X0) {
  if (model.models.empty()) fail(ErrorCode::InvalidArgument, "empty classifier");
  if (static_cast<std::size_t>(X0.cols()) != model.feature_count())
    fail(ErrorCode::InvalidArgument, "feature dimension " + std::to_string(X0.cols()) + " does not match model (" +
                                         std::to_string(model.feature_count()) + ")");
  const Eigen::MatrixXd X = model.scaler ? model.scaler->apply(X0) : X0;
  Prediction p;
  p.scores.resize(X.rows(), static_cast<Eigen::Index>(model.models.size()));
  for (std::size_t c = 0; c < model.models.size(); ++c)
    p.scores.col(static_cast<Eigen::Index>(c)) = (X * model.models[c].w).array() + model.models[c].bias;
  p.labels.resize(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < p.scores.cols(); ++c)
      if (p.scores(r, c) > p.scores(r, best)) best = c;
    p.labels[static_cast<std::size_t>(r)] = static_cast<int>(best);
  }
  return p;
}

std::string model_to_json(const OvrClassifier& model) {
  nlohmann::ordered_json j;
  j["format"] = "fgai-ovr-svm-1";
  j["classes"] = model.classes;
  if (model.scaler) {
    j["standardizer"]["mean"] = std::vector<double>(model.scaler->mean.data(), model.scaler->mean.data() + model.scaler->mean.size());
    j["standardizer"]["scale"] =
        std::vector<double>(model.scaler->scale.data(), model.scaler->scale.data() + model.scaler->scale.size());
  }
  auto& ms = j["models"] = nlohmann::ordered_json::array();
  for (const SvmModel& m : model.models) {
    nlohmann::ordered_json jm;
    jm["positive_class"] = m.positive_class;
    jm["C"] = m.C;
    jm["bias"] = m.bias;
    jm["objective"] = m.objective;
    jm["iterations"] = m.iterations;
    jm["converged"] = m.converged;
    jm["w"] = std::vector<double>(m.w.data(), m.w.data() + m.w.size());
    ms.push_back(jm);
  }
  return j.dump(1);
}

OvrClassifier model_from_json(const std::string& text) {
  OvrClassifier out;
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format") != "fgai-ovr-svm-1") fail(ErrorCode::Parse, "unknown model format");
    out.classes = j.at("classes").get<std::vector<std::string>>();
    auto to_row = [](const std::vector<double>& v) {
      return Eigen::RowVectorXd(Eigen::Map<const Eigen::RowVectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
    };
    if (j.contains("standardizer")) {
      Standardizer s;
      s.mean = to_row(j["standardizer"].at("mean").get<std::vector<double>>());
      s.scale = to_row(j["standardizer"].at("scale").get<std::vector<double>>());
      out.scaler = s;
    }
    for (const auto& jm : j.at("models")) {
      SvmModel m;
      m.positive_class = jm.at("positive_class");
      m.C = jm.at("C");
      m.bias = jm.at("bias");
      m.objective = jm.at("objective");
      m.iterations = jm.at("iterations");
      m.converged = jm.at("converged");
      const auto w = jm.at("w").get<std::vector<double>>();
      m.w = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
      out.models.push_back(std::move(m));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("malformed model file: ") + e.what());
  }
  if (out.models.size() != out.classes.size() || out.models.empty())
    fail(ErrorCode::Parse, "model file: class and model counts differ");
  const auto d = out.models.front().w.size();
  for (const auto& m : out.models)
    if (m.w.size() != d) fail(ErrorCode::Parse, "model file: inconsistent weight lengths");
  if (out.scaler && (out.scaler->mean.size() != d || out.scaler->scale.size() != d))
    fail(ErrorCode::Parse, "model file: standardizer length differs from weights");
  return out;
}

double auc(std::span<const double> scores, std::span<const std::uint8_t> positive) {
  if (scores.size() != positive.size()) fail(ErrorCode::InvalidArgument, "scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);  // average of ranks i+1..j
    for (std::size_t k = i; k < j; ++k)
      if (positive[order[k]]) {
        rank_sum += mid_rank;
        ++n_pos;
      }
    i = j;
  }
  const std::size_t n_neg = scores.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) fail(ErrorCode::InvalidArgument, "AuC is undefined without both classes");
  const double np = static_cast<double>(n_pos);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

void FoldSpec::validate(const std::vector<std::string>& subjects) const {
  std::set<std::string> seen;
  for (const auto& fold : folds) {
    if (fold.empty()) fail(ErrorCode::InvalidArgument, "empty fold");
    for (const auto& s : fold)
      if (!seen.insert(s).second) fail(ErrorCode::InvalidArgument, "subject '" + s + "' appears in two folds");
  }
  const std::set<std::string> want(subjects.begin(), subjects.end());
  if (seen != want) fail(ErrorCode::InvalidArgument, "folds do not partition the subject set");
}

FoldSpec make_folds(std::vector<std::string> subjects, std::size_t k, std::uint64_t seed) {
  std::sort(subjects.begin(), subjects.end());
  subjects.erase(std::unique(subjects.begin(), subjects.end()), subjects.end());
  if (k < 2) fail(ErrorCode::InvalidArgument, "cross-validation needs at least 2 folds");
  if (k > subjects.size())
    fail(ErrorCode::InvalidArgument, std::to_string(k) + " folds requested for " + std::to_string(subjects.size()) +
                                         " subjects");
  std::mt19937_64 rng(seed);
  // Bounded draws by rejection keep the shuffle identical across platforms.
  auto below = [&rng](std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do x = rng();
    while (x >= limit);
    return x % bound;
  };
  for (std::size_t i = subjects.size(); i > 1; --i) std::swap(subjects[i - 1], subjects[below(i)]);
  FoldSpec spec;
  spec.folds.resize(k);
  for (std::size_t i = 0; i < subjects.size(); ++i) spec.folds[i % k].push_back(subjects[i]);
  return spec;
}

namespace {

struct FoldSplit {
  std::vector<Eigen::Index> train, test;
};

std::vector<FoldSplit> split_by_folds(const FeatureMatrix& fm, const FoldSpec& spec) {
  std::map<std::string, std::size_t> fold_of;
  for (std::size_t f = 0; f < spec.folds.size(); ++f)
    for (const auto& s : spec.folds[f]) fold_of[s] = f;
  std::vector<FoldSplit> splits(spec.folds.size());
  for (Eigen::Index r = 0; r < fm.rows(); ++r) {
    const std::size_t f = fold_of.at(fm.subject_ids[static_cast<std::size_t>(r)]);
    for (std::size_t g = 0; g < splits.size(); ++g) (g == f ? splits[g].test : splits[g].train).push_back(r);
  }
  // Subject-disjointness is asserted, not assumed.
  for (const auto& s : splits) {
    std::set<std::string> train_subjects;
    for (auto r : s.train) train_subjects.insert(fm.subject_ids[static_cast<std::size_t>(r)]);
    for (auto r : s.test)
      if (train_subjects.count(fm.subject_ids[static_cast<std::size_t>(r)]))
        fail(ErrorCode::Internal, "fold leaks subject " + fm.subject_ids[static_cast<std::size_t>(r)]);
    if (s.train.empty()) fail(ErrorCode::InvalidArgument, "a fold leaves no training samples");
  }
  return splits;
}

FoldSpec resolve_folds(const FeatureMatrix& fm, const CvOptions& options) {
  if (options.fold_spec) {
    options.fold_spec->validate(fm.subject_ids);
    return *options.fold_spec;
  }
  return make_folds(fm.subject_ids, options.folds, options.seed);
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::nan("");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

struct FoldOutcome {
  std::vector<Eigen::Index> test;
  Prediction prediction;
};

std::vector<FoldOutcome> run_folds(const FeatureMatrix& fm, const CvOptions& options, const FoldSpec& spec,
                                   const std::vector<std::string>& classes) {
  std::vector<FoldOutcome> out;
  for (const auto& split : split_by_folds(fm, spec)) {
    const FeatureMatrix train = fm.select_rows(split.train);
    const OvrClassifier model = train_ovr_svm(train, options.svm, options.standardize, classes);
    Eigen::MatrixXd Xtest(static_cast<Eigen::Index>(split.test.size()), fm.cols());
    for (std::size_t i = 0; i < split.test.size(); ++i) Xtest.row(static_cast<Eigen::Index>(i)) = fm.values.row(split.test[i]);
    out.push_back({split.test, predict(model, Xtest)});
  }
  return out;
}

EvalReport base_report(const FeatureMatrix& fm, const CvOptions& options, const FoldSpec& spec) {
  EvalReport rep;
  rep.classes = fm.classes();
  rep.metric = options.metric;
  rep.folds = spec.size();
  rep.seed = options.seed;
  rep.C = options.svm.C;
  rep.standardized = options.standardize;
  rep.fold_subjects = spec.folds;
  rep.confusion = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(rep.classes.size()),
                                        static_cast<Eigen::Index>(rep.classes.size()));
  return rep;
}

}  // namespace

EvalReport cross_validate(const FeatureMatrix& fm, const CvOptions& options) {
  fm.validate();
  const FoldSpec spec = resolve_folds(fm, options);
  EvalReport rep = base_report(fm, options, spec);
  if (rep.classes.size() < 2) fail(ErrorCode::InvalidArgument, "evaluation needs at least two classes");
  const auto truth = fm.class_indices(rep.classes);
  const std::size_t k = rep.classes.size();
  std::vector<std::vector<double>> per_class(k);

  for (const FoldOutcome& fold : run_folds(fm, options, spec, rep.classes)) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < fold.test.size(); ++i) {
      const int t = truth[static_cast<std::size_t>(fold.test[i])];
      const int p = fold.prediction.labels[i];
      correct += static_cast<std::size_t>(t == p);
      ++rep.confusion(t, p);
    }
    rep.fold_accuracy.push_back(static_cast<double>(correct) / static_cast<double>(fold.test.size()));

    std::vector<double> fold_class;
    for (std::size_t c = 0; c < k; ++c) {
      std::vector<double> s(fold.test.size());
      std::vector<std::uint8_t> pos(fold.test.size());
      for (std::size_t i = 0; i < fold.test.size(); ++i) {
        s[i] = fold.prediction.scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
        pos[i] = truth[static_cast<std::size_t>(fold.test[i])] == static_cast<int>(c);
      }
      const auto npos = std::count(pos.begin(), pos.end(), 1);
      if (npos == 0 || npos == static_cast<long>(pos.size())) continue;
      const double a = auc(s, pos);
      fold_class.push_back(a);
      per_class[c].push_back(a);
    }
    rep.fold_auc.push_back(mean_of(fold_class));
  }
  rep.mean_accuracy = mean_of(rep.fold_accuracy);
  std::vector<double> defined;
  for (double a : rep.fold_auc)
    if (!std::isnan(a)) defined.push_back(a);
  rep.mean_auc = mean_of(defined);
  for (const auto& v : per_class) rep.class_auc.push_back(mean_of(v));
  return rep;
}

std::vector<int> dynamic_vote(std::span<const int> frame_labels, std::size_t window) {
  if (frame_labels.empty()) fail(ErrorCode::InvalidArgument, "empty frame sequence");
  if (window < 1) fail(ErrorCode::InvalidArgument, "window must be >= 1");
  std::vector<int> out(frame_labels.size());
  std::map<int, std::size_t> counts;
  for (std::size_t i = 0; i < frame_labels.size(); ++i) {
    ++counts[frame_labels[i]];
    if (i >= window) {
      auto it = counts.find(frame_labels[i - window]);
      if (--it->second == 0) counts.erase(it);
    }
    std::size_t best = 0;
    for (const auto& [label, n] : counts) best = std::max(best, n);
    // Most recent frame whose label reaches the top count.
    const std::size_t lo = i + 1 >= window ? i + 1 - window : 0;
    for (std::size_t j = i + 1; j-- > lo;)
      if (counts[frame_labels[j]] == best) {
        out[i] = frame_labels[j];
        break;
      }
  }
  return out;
}

EvalReport dynamic_evaluate(const FeatureMatrix& fm, const CvOptions& options, std::size_t window) {
  fm.validate();
  if (!fm.has_sequences()) fail(ErrorCode::InvalidArgument, "dynamic evaluation needs sequence_id/frame_index columns");
  const FoldSpec spec = resolve_folds(fm, options);
  EvalReport rep = base_report(fm, options, spec);
  rep.mode = "dynamic";
  rep.metric = Metric::Accuracy;
  rep.window = window;
  const auto truth = fm.class_indices(rep.classes);

  for (const FoldOutcome& fold : run_folds(fm, options, spec, rep.classes)) {
    std::map<std::string, std::vector<std::pair<long long, std::size_t>>> sequences;
    for (std::size_t i = 0; i < fold.test.size(); ++i) {
      const auto r = static_cast<std::size_t>(fold.test[i]);
      sequences[fm.sequence_ids[r]].push_back({fm.frame_indices[r], i});
    }
    std::size_t frame_correct = 0, vote_correct = 0;
    for (auto& [id, frames] : sequences) {
      std::sort(frames.begin(), frames.end());
      std::vector<int> labels;
      for (const auto& [frame, i] : frames) labels.push_back(fold.prediction.labels[i]);
      const auto voted = dynamic_vote(labels, window);
      for (std::size_t j = 0; j < frames.size(); ++j) {
        const int t = truth[static_cast<std::size_t>(fold.test[frames[j].second])];
        frame_correct += static_cast<std::size_t>(labels[j] == t);
        vote_correct += static_cast<std::size_t>(voted[j] == t);
        ++rep.confusion(t, voted[j]);
      }
    }
    const auto n = static_cast<double>(fold.test.size());
    rep.fold_accuracy.push_back(static_cast<double>(vote_correct) / n);
    rep.fold_frame_accuracy.push_back(static_cast<double>(frame_correct) / n);
  }
  rep.mean_accuracy = mean_of(rep.fold_accuracy);
  rep.mean_frame_accuracy = mean_of(rep.fold_frame_accuracy);
  return rep;
}

namespace {
nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }
}  // namespace

std::string EvalReport::to_json() const {
  nlohmann::json j;
  j["mode"] = mode;
  j["metric"] = metric == Metric::Accuracy ? "accuracy" : "auc";
  j["folds"] = folds;
  j["seed"] = seed;
  j["C"] = C;
  j["standardized"] = standardized;
  if (mode == "dynamic") {
    j["window"] = window;
    j["window_alignment"] = "trailing";
    j["vote_tie_rule"] = "most_recent";
    j["fold_frame_accuracy"] = fold_frame_accuracy;
    j["mean_frame_accuracy"] = number_or_null(mean_frame_accuracy);
  }
  j["classes"] = classes;
  j["fold_accuracy"] = fold_accuracy;
  j["mean_accuracy"] = number_or_null(mean_accuracy);
  if (mode != "dynamic") {
    auto& fa = j["fold_auc"] = nlohmann::json::array();
    for (double a : fold_auc) fa.push_back(number_or_null(a));
    j["mean_auc"] = number_or_null(mean_auc);
    auto& ca = j["class_auc"] = nlohmann::json::object();
    for (std::size_t c = 0; c < classes.size() && c < class_auc.size(); ++c) ca[classes[c]] = number_or_null(class_auc[c]);
  }
  auto& cm = j["confusion"] = nlohmann::json::array();
  for (Eigen::Index r = 0; r < confusion.rows(); ++r) {
    nlohmann::json jr = nlohmann::json::array();
    for (Eigen::Index c = 0; c < confusion.cols(); ++c) jr.push_back(confusion(r, c));
    cm.push_back(jr);
  }
  j["fold_subjects"] = fold_subjects;
  return j.dump(2);
}

std::string EvalReport::to_table() const {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  out << "mode " << mode << ", " << folds << " subject-disjoint folds, seed " << seed << ", C " << C;
  if (mode == "dynamic") out << ", window " << window << " (trailing)";
  out << "\n\nfold  accuracy";
  if (mode == "dynamic") out << "  frame_acc";
  else out << "  auc";
  out << '\n';
  for (std::size_t f = 0; f < fold_accuracy.size(); ++f) {
    out << std::setw(4) << f + 1 << "  " << std::setw(8) << fold_accuracy[f];
    if (mode == "dynamic") out << "  " << std::setw(9) << fold_frame_accuracy[f];
    else out << "  " << std::setw(6) << fold_auc[f];
    out << '\n';
  }
  out << "mean  " << std::setw(8) << mean_accuracy;
  if (mode == "dynamic") out << "  " << std::setw(9) << mean_frame_accuracy;
  else out << "  " << std::setw(6) << mean_auc;
  out << "\n\nconfusion (rows true, cols predicted): ";
  for (std::size_t c = 0; c < classes.size(); ++c) out << (c ? " " : "") << classes[c];
  out << '\n';
  for (Eigen::Index r = 0; r < confusion.rows(); ++r) {
    for (Eigen::Index c = 0; c < confusion.cols(); ++c) out << std::setw(6) << confusion(r, c);
    out << "  " << classes[static_cast<std::size_t>(r)] << '\n';
  }
  return out.str();
}

std::string EvalReport::auc_csv() const {
  std::ostringstream out;
  out.precision(10);
  out << "class,auc\n";
  for (std::size_t c = 0; c < classes.size(); ++c) {
    out << classes[c] << ',';
    if (c < class_auc.size() && std::isfinite(class_auc[c])) out << class_auc[c];
    out << '\n';
  }
  return out.str();
}

}  // namespace fgai
