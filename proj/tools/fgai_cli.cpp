#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "fgai/fgai.h"

namespace {

struct CliError {
  int exit_code;
};

void check(fgai_status s, const std::string& context) {
  if (s == FGAI_OK) return;
  std::cerr << "fgai: " << context << ": " << fgai_status_name(s) << ": " << fgai_last_error() << '\n';
  throw CliError{s == FGAI_ERR_PIPELINE ? 3 : 1};
}

struct OwnedString {
  char* p = nullptr;
  ~OwnedString() { fgai_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

void write_or_print(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) {
    std::cerr << "fgai: cannot write " << path << '\n';
    throw CliError{1};
  }
}

using FeaturesPtr = std::unique_ptr<fgai_features, decltype(&fgai_features_free)>;

/// Loads one or more matrices; several are pooled by row concatenation.
FeaturesPtr load_features(const std::vector<std::string>& paths) {
  std::vector<FeaturesPtr> parts;
  for (const auto& p : paths) {
    fgai_features* fm = nullptr;
    check(fgai_features_load(p.c_str(), &fm), p);
    parts.emplace_back(fm, &fgai_features_free);
  }
  if (parts.size() == 1) return std::move(parts.front());
  std::vector<const fgai_features*> raw;
  for (const auto& p : parts) raw.push_back(p.get());
  fgai_features* pooled = nullptr;
  check(fgai_features_concat(raw.data(), raw.size(), &pooled), "pooling feature matrices");
  return FeaturesPtr(pooled, &fgai_features_free);
}

/// "240" or "320x240".
void parse_size(const std::string& text, int& w, int& h) {
  const auto x = text.find('x');
  try {
    if (x == std::string::npos) {
      w = h = std::stoi(text);
    } else {
      w = std::stoi(text.substr(0, x));
      h = std::stoi(text.substr(x + 1));
    }
  } catch (const std::exception&) {
    w = h = 0;
  }
  if (w <= 0 || h <= 0) {
    std::cerr << "fgai: bad --size '" << text << "' (use N or WxH)\n";
    throw CliError{2};
  }
}

struct AugmentFlags {
  bool flip = false;
  double rotate = 10.0;
  double noise = 0.0;
  std::uint64_t seed = 0;

  void add(CLI::App* app) {
    app->add_flag("--augment-flip", flip, "Mirror horizontally before rotating");
    app->add_option("--augment-rotate", rotate, "Rotation in degrees about the image centre")->capture_default_str();
    app->add_option("--augment-noise", noise, "Gaussian noise sigma in gray levels")->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    app->add_option("--augment-seed", seed, "Noise seed (mixed with scan id and image name)")->capture_default_str();
  }
  fgai_augment_options options() const {
    fgai_augment_options o;
    fgai_augment_options_init(&o);
    o.horizontal_flip = flip;
    o.rotation_degrees = rotate;
    o.noise_sigma = noise;
    o.seed = seed;
    return o;
  }
};

void add_config_option(CLI::App* sub, std::string& path) {
  sub->add_option("--config", path, "Flat key = value file; command-line flags take precedence")
      ->check(CLI::ExistingFile);
}

// Config values fill options the command line left unset. CLI11 only reads
// config files on the top-level app, so subcommand files are applied here.
void apply_config(CLI::App* sub, const std::string& path) {
  if (path.empty()) return;
  CLI::ConfigINI format;
  for (const CLI::ConfigItem& item : format.from_file(path)) {
    CLI::Option* op = sub->get_option_no_throw("--" + item.name);
    if (op == nullptr || op->check_name("--config") || !item.parents.empty())
      throw CLI::ConfigError("unknown key '" + item.fullname() + "'");
    if (op->count() > 0) continue;
    if (op->get_expected_min() == 0)
      op->add_result(op->get_flag_value(item.name, format.to_flag(item)));
    else
      op->add_result(item.inputs);
    op->run_callback();
  }
}

void log_line(const char* line, void*) { std::cerr << line << '\n'; }

void print_summary(const fgai_pipeline_summary& s) {
  std::cout << "processed " << s.processed << ", skipped " << s.skipped << ", failed " << s.failed << ", images "
            << s.images_written << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  std::string config_path;
  CLI::App app{"Geometry-augmented images from textured meshes, and the feature evaluation harness"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("fgai ") + fgai_version());

  // process
  auto* process = app.add_subcommand("process", "Meshes in a manifest -> GAI and FGAI images");
  add_config_option(process, config_path);
  std::string manifest, out_dir = "out", size_text = "240", combos = "all", normalization = "image",
                        fields = "resampled", spacing = "density";
  fgai_pipeline_options popt;
  fgai_pipeline_options_init(&popt);
  bool keep_order = false, augment = false, augment_gais = false, force = false, debug_dump = false;
  AugmentFlags aug;
  process->add_option("manifest", manifest, "Manifest CSV")->required()->check(CLI::ExistingFile);
  process->add_option("-o,--out", out_dir, "Output directory")->capture_default_str();
  process->add_option("--step", popt.step, "Resampling step k (vertex count shrinks ~k times)")->capture_default_str()
      ->check(CLI::Range(1.0, 1e6));
  process->add_option("--spacing", spacing, "Grid spacing rule")->check(CLI::IsMember({"density", "edge"}))
      ->capture_default_str();
  process->add_option("--radius", popt.neighborhood_multiplier, "Neighbourhood radius in mean edge lengths")
      ->capture_default_str();
  process->add_option("--size", size_text, "Image size, N or WxH")->capture_default_str();
  process->add_option("--combos", combos, "Comma-separated FGAI combos, or 'all'")->capture_default_str();
  process->add_flag("--keep-order", keep_order, "Keep channel order as written in --combos");
  process->add_option("--normalization", normalization, "Descriptor scaling range")
      ->check(CLI::IsMember({"image", "global"}))->capture_default_str();
  process->add_option("--fields", fields, "Mesh the descriptors are evaluated on")
      ->check(CLI::IsMember({"resampled", "original"}))->capture_default_str();
  process->add_flag("--augment", augment, "Also write one augmented copy of every FGAI");
  process->add_flag("--augment-gais", augment_gais, "With --augment, augment GAIs too");
  aug.add(process);
  process->add_option("-j,--workers", popt.workers, "Scans processed in parallel")->capture_default_str()
      ->check(CLI::PositiveNumber);
  process->add_flag("--force", force, "Reprocess scans whose outputs already exist");
  process->add_flag("--debug-dump", debug_dump, "Write resampled OBJ and per-vertex field CSVs");

  // fuse
  auto* fuse = app.add_subcommand("fuse", "Fuse existing GAI PNGs into FGAIs");
  add_config_option(fuse, config_path);
  std::string gai_dir, fuse_out, fuse_combos = "all";
  bool fuse_keep = false, fuse_augment = false;
  AugmentFlags fuse_aug;
  fuse->add_option("manifest", manifest, "Manifest CSV")->required()->check(CLI::ExistingFile);
  fuse->add_option("--gais", gai_dir, "Directory holding <scan>.<kind>.png")->required();
  fuse->add_option("-o,--out", fuse_out, "Output directory (defaults to --gais)");
  fuse->add_option("--combos", fuse_combos, "Comma-separated combos, or 'all'")->capture_default_str();
  fuse->add_flag("--keep-order", fuse_keep, "Keep channel order as written in --combos");
  fuse->add_flag("--augment", fuse_augment, "Write augmented FGAIs (<scan>.<combo>.aug.png)");
  fuse_aug.add(fuse);

  // pixel-features
  auto* pixels = app.add_subcommand("pixel-features", "Block-averaged image pixels -> FMX1 feature matrix");
  std::string image_dir, image_name = "H-GL-SI", fmx_out;
  int cell = 10;
  pixels->add_option("manifest", manifest, "Manifest CSV")->required()->check(CLI::ExistingFile);
  pixels->add_option("--images", image_dir, "Directory with <scan>.<image>.png")->required();
  pixels->add_option("--image", image_name, "Image name: a kind or combo")->capture_default_str();
  pixels->add_option("--cell", cell, "Pixel block edge")->capture_default_str()->check(CLI::PositiveNumber);
  pixels->add_option("-o,--out", fmx_out, "Output .fmx path")->required();

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Rank features by the Fisher-like discrimination criterion");
  add_config_option(analyze, config_path);
  std::vector<std::string> feature_paths;
  std::size_t top = 500;
  bool no_prune = false;
  std::string analyze_out;
  analyze->add_option("features", feature_paths, "FMX1 matrices (several are pooled)")->required()
      ->check(CLI::ExistingFile);
  analyze->add_option("--top", top, "Rows in the report")->capture_default_str();
  analyze->add_flag("--no-prune", no_prune, "Keep all-zero features");
  analyze->add_option("-o,--out", analyze_out, "CSV path (stdout when omitted)");

  // shared classifier flags
  fgai_cv_options cv;
  fgai_cv_options_init(&cv);
  bool no_standardize = false;
  std::string metric = "accuracy";
  auto add_svm_flags = [&](CLI::App* sub) {
    sub->add_option("--c", cv.svm.C, "SVM penalty C")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--max-iter", cv.svm.max_iterations, "Newton iteration cap")->capture_default_str();
    sub->add_option("--tol", cv.svm.tolerance, "Relative objective decrease to stop at")->capture_default_str();
    sub->add_flag("--no-standardize", no_standardize, "Skip per-feature z-scoring");
  };
  auto add_cv_flags = [&](CLI::App* sub) {
    sub->add_option("--folds", cv.folds, "Subject-disjoint folds")->capture_default_str();
    sub->add_option("--seed", cv.seed, "Fold shuffle seed")->capture_default_str();
    add_svm_flags(sub);
  };

  // train
  auto* train = app.add_subcommand("train", "Train one-vs-rest linear SVMs on a feature matrix");
  add_config_option(train, config_path);
  std::string model_out;
  train->add_option("features", feature_paths, "FMX1 matrices (several are pooled)")->required()
      ->check(CLI::ExistingFile);
  train->add_option("-o,--out", model_out, "Model JSON path")->required();
  add_svm_flags(train);

  // eval
  auto* eval = app.add_subcommand("eval", "Subject-disjoint cross-validation (static mode)");
  add_config_option(eval, config_path);
  std::string report_path, auc_csv_path, model_in;
  eval->add_option("features", feature_paths, "FMX1 matrices (several are pooled)")->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--metric", metric, "Headline metric")->check(CLI::IsMember({"accuracy", "auc"}))
      ->capture_default_str();
  eval->add_option("--report", report_path, "Write the JSON report here");
  eval->add_option("--auc-csv", auc_csv_path, "Write per-class AuC CSV here");
  eval->add_option("--model", model_in, "Score a trained model on the matrix instead of cross-validating")
      ->check(CLI::ExistingFile);
  add_cv_flags(eval);

  // dynamic-eval
  auto* dyn = app.add_subcommand("dynamic-eval", "Cross-validated per-frame prediction with sliding-window voting");
  add_config_option(dyn, config_path);
  std::size_t window = 6;
  dyn->add_option("features", feature_paths, "FMX1 matrices with sequence_id/frame_index")->required()
      ->check(CLI::ExistingFile);
  dyn->add_option("--window", window, "Trailing vote window in frames")->capture_default_str()
      ->check(CLI::PositiveNumber);
  dyn->add_option("--report", report_path, "Write the JSON report here");
  add_cv_flags(dyn);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;  // help/version print and succeed; usage errors exit 2
  }
  try {
    apply_config(app.get_subcommands().front(), config_path);
  } catch (const CLI::Error& e) {
    std::cerr << "fgai: config " << config_path << ": " << e.what() << '\n';
    return 1;
  }

  try {
    cv.svm.standardize = no_standardize ? 0 : 1;
    cv.metric_auc = metric == "auc";

    if (*process) {
      parse_size(size_text, popt.width, popt.height);
      popt.spacing_edge_length = spacing == "edge";
      popt.combos = combos.c_str();
      popt.keep_channel_order = keep_order;
      popt.global_normalization = normalization == "global";
      popt.fields_on_original = fields == "original";
      popt.augment = augment;
      popt.augment_gais = augment_gais;
      popt.augmentation = aug.options();
      popt.force = force;
      popt.debug_dump = debug_dump;
      fgai_pipeline_summary summary{};
      const fgai_status s = fgai_process(manifest.c_str(), out_dir.c_str(), &popt, &log_line, nullptr, &summary);
      if (s == FGAI_OK || s == FGAI_ERR_PIPELINE) print_summary(summary);
      check(s, "process");
    } else if (*fuse) {
      fgai_pipeline_summary summary{};
      const fgai_augment_options ao = fuse_aug.options();
      const std::string out = fuse_out.empty() ? gai_dir : fuse_out;
      const fgai_status s = fgai_fuse_directory(manifest.c_str(), gai_dir.c_str(), out.c_str(), fuse_combos.c_str(),
                                                fuse_keep, fuse_augment ? &ao : nullptr, &summary);
      if (s == FGAI_OK || s == FGAI_ERR_PIPELINE) print_summary(summary);
      check(s, "fuse");
    } else if (*pixels) {
      check(fgai_pixel_features(manifest.c_str(), image_dir.c_str(), image_name.c_str(), cell, fmx_out.c_str()),
            "pixel-features");
    } else if (*analyze) {
      auto fm = load_features(feature_paths);
      OwnedString csv;
      std::size_t kept = 0;
      check(fgai_analyze(fm.get(), top, no_prune ? 0 : 1, &csv.p, &kept), "analyze");
      write_or_print(analyze_out, csv.str());
      std::cerr << kept << " features ranked\n";
    } else if (*train) {
      auto fm = load_features(feature_paths);
      fgai_model* raw = nullptr;
      check(fgai_train(fm.get(), &cv.svm, &raw), "train");
      std::unique_ptr<fgai_model, decltype(&fgai_model_free)> model(raw, &fgai_model_free);
      check(fgai_model_save(model.get(), model_out.c_str()), model_out);
      std::size_t classes = 0;
      int converged = 0;
      check(fgai_model_shape(model.get(), &classes, nullptr, &converged), "train");
      std::cout << classes << " one-vs-rest models" << (converged ? "" : " (iteration cap reached)") << '\n';
    } else if (*eval) {
      auto fm = load_features(feature_paths);
      if (!model_in.empty()) {
        fgai_model* raw = nullptr;
        check(fgai_model_load(model_in.c_str(), &raw), model_in);
        std::unique_ptr<fgai_model, decltype(&fgai_model_free)> model(raw, &fgai_model_free);
        std::size_t rows = 0, classes = 0;
        check(fgai_features_shape(fm.get(), &rows, nullptr), "eval");
        check(fgai_model_shape(model.get(), &classes, nullptr, nullptr), "eval");
        std::vector<int> labels(rows);
        check(fgai_model_predict(model.get(), fm.get(), labels.data(), nullptr), "eval");
        for (std::size_t i = 0; i < rows; ++i) {
          const char* name = nullptr;
          check(fgai_model_class_name(model.get(), static_cast<std::size_t>(labels[i]), &name), "eval");
          std::cout << i << ',' << name << '\n';
        }
      } else {
        fgai_report* raw = nullptr;
        check(fgai_cross_validate(fm.get(), &cv, &raw), "eval");
        std::unique_ptr<fgai_report, decltype(&fgai_report_free)> report(raw, &fgai_report_free);
        OwnedString table, json, auc_csv;
        check(fgai_report_table(report.get(), &table.p), "eval");
        std::cout << table.str();
        if (!report_path.empty()) {
          check(fgai_report_json(report.get(), &json.p), "eval");
          write_or_print(report_path, json.str() + "\n");
        }
        if (!auc_csv_path.empty()) {
          check(fgai_report_auc_csv(report.get(), &auc_csv.p), "eval");
          write_or_print(auc_csv_path, auc_csv.str());
        }
      }
    } else if (*dyn) {
      auto fm = load_features(feature_paths);
      fgai_report* raw = nullptr;
      check(fgai_dynamic_evaluate(fm.get(), &cv, window, &raw), "dynamic-eval");
      std::unique_ptr<fgai_report, decltype(&fgai_report_free)> report(raw, &fgai_report_free);
      OwnedString table, json;
      check(fgai_report_table(report.get(), &table.p), "dynamic-eval");
      std::cout << table.str();
      if (!report_path.empty()) {
        check(fgai_report_json(report.get(), &json.p), "dynamic-eval");
        write_or_print(report_path, json.str() + "\n");
      }
    }
  } catch (const CliError& e) {
    return e.exit_code;
  }
  return 0;
}
