#include "fgai/fgai.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <new>
#include <sstream>
#include <string>

#include "core/analyze.hpp"
#include "core/classify.hpp"
#include "core/error.hpp"
#include "core/pipeline.hpp"

struct fgai_mesh {
  fgai::TexturedMesh mesh;
};
struct fgai_features {
  fgai::FeatureMatrix fm;
};
struct fgai_model {
  fgai::OvrClassifier model;
};
struct fgai_report {
  fgai::EvalReport report;
};

namespace {

thread_local std::string g_last_error;

fgai_status to_status(fgai::ErrorCode code) { return static_cast<fgai_status>(static_cast<int>(code)); }

template <typename Fn>
fgai_status guard(Fn&& fn) {
  g_last_error.clear();
  try {
    return fn();
  } catch (const fgai::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return FGAI_ERR_INTERNAL;
  } catch (const std::filesystem::filesystem_error& e) {
    g_last_error = e.what();
    return FGAI_ERR_IO;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return FGAI_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return FGAI_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) fgai::fail(fgai::ErrorCode::InvalidArgument, std::string(what) + " must not be NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

fgai::AugmentSpec to_spec(const fgai_augment_options& a) {
  return {a.horizontal_flip != 0, a.rotation_degrees, a.noise_sigma, a.seed};
}

fgai::SvmOptions to_svm(const fgai_svm_options& o) {
  fgai::SvmOptions s;
  s.C = o.C;
  s.max_iterations = o.max_iterations;
  s.tolerance = o.tolerance;
  return s;
}

void fill_summary(const fgai::PipelineResult& r, fgai_pipeline_summary* summary) {
  if (!summary) return;
  summary->processed = r.processed;
  summary->skipped = r.skipped;
  summary->failed = r.failures.size();
  summary->images_written = r.images_written;
}

fgai::CvOptions to_cv(const fgai_cv_options& o) {
  fgai::CvOptions cv;
  cv.folds = o.folds;
  cv.seed = o.seed;
  cv.metric = o.metric_auc ? fgai::Metric::Auc : fgai::Metric::Accuracy;
  cv.svm = to_svm(o.svm);
  cv.standardize = o.svm.standardize != 0;
  return cv;
}

}  // namespace

extern "C" {

const char* fgai_last_error(void) { return g_last_error.c_str(); }

const char* fgai_status_name(fgai_status status) {
  switch (status) {
    case FGAI_OK: return "ok";
    case FGAI_ERR_INVALID_ARGUMENT: return "invalid argument";
    case FGAI_ERR_IO: return "I/O error";
    case FGAI_ERR_PARSE: return "parse error";
    case FGAI_ERR_MISSING_TEXTURE: return "missing texture mapping";
    case FGAI_ERR_DEGENERATE: return "degenerate geometry";
    case FGAI_ERR_RESAMPLE: return "resampling failed";
    case FGAI_ERR_NUMERICAL: return "numerical failure";
    case FGAI_ERR_INTERNAL: return "internal error";
    case FGAI_ERR_PIPELINE: return "pipeline failures";
  }
  return "unknown status";
}

const char* fgai_version(void) { return FGAI_BUILD_ID; }

void fgai_string_free(char* s) { std::free(s); }

fgai_status fgai_mesh_load(const char* obj_path, const char* texture_path, fgai_mesh** out) {
  return guard([&] {
    need(obj_path, "obj_path");
    need(texture_path, "texture_path");
    need(out, "out");
    *out = new fgai_mesh{fgai::load_textured_mesh(obj_path, texture_path)};
    return FGAI_OK;
  });
}

fgai_status fgai_mesh_get_info(const fgai_mesh* mesh, fgai_mesh_info* out) {
  return guard([&] {
    need(mesh, "mesh");
    need(out, "out");
    const auto m = fgai::mesh_metrics(mesh->mesh.geometry);
    out->vertex_count = m.vertex_count;
    out->facet_count = m.facet_count;
    out->dropped_facets = mesh->mesh.dropped_facets;
    out->mean_edge_length = m.mean_edge_length;
    out->texture_width = mesh->mesh.texture.width;
    out->texture_height = mesh->mesh.texture.height;
    return FGAI_OK;
  });
}

void fgai_mesh_free(fgai_mesh* mesh) { delete mesh; }

void fgai_augment_options_init(fgai_augment_options* o) {
  if (!o) return;
  o->horizontal_flip = 0;
  o->rotation_degrees = 0.0;
  o->noise_sigma = 0.0;
  o->seed = 0;
}

void fgai_pipeline_options_init(fgai_pipeline_options* o) {
  if (!o) return;
  const fgai::PipelineConfig d;
  o->step = d.resample.step;
  o->spacing_edge_length = 0;
  o->neighborhood_multiplier = d.neighborhood.radius_multiplier;
  o->width = d.size.width;
  o->height = d.size.height;
  o->combos = nullptr;
  o->keep_channel_order = 0;
  o->global_normalization = 0;
  o->fields_on_original = 0;
  o->augment = 0;
  o->augment_gais = 0;
  fgai_augment_options_init(&o->augmentation);
  o->workers = 1;
  o->force = 0;
  o->debug_dump = 0;
}

fgai_status fgai_process(const char* manifest_path, const char* output_dir, const fgai_pipeline_options* options,
                         fgai_log_fn log, void* user, fgai_pipeline_summary* summary) {
  return guard([&] {
    need(manifest_path, "manifest_path");
    need(output_dir, "output_dir");
    fgai_pipeline_options defaults;
    fgai_pipeline_options_init(&defaults);
    const fgai_pipeline_options& o = options ? *options : defaults;

    fgai::PipelineConfig cfg;
    cfg.output_dir = output_dir;
    cfg.resample.step = o.step;
    cfg.resample.spacing_rule = o.spacing_edge_length ? fgai::SpacingRule::EdgeLength : fgai::SpacingRule::DensityMatched;
    cfg.neighborhood.radius_multiplier = o.neighborhood_multiplier;
    cfg.size = {o.width, o.height};
    cfg.keep_channel_order = o.keep_channel_order != 0;
    cfg.combos = fgai::parse_combo_list(o.combos ? o.combos : "", cfg.keep_channel_order);
    cfg.normalization = o.global_normalization ? fgai::NormalizationMode::Global : fgai::NormalizationMode::PerImage;
    cfg.field_source = o.fields_on_original ? fgai::FieldSource::Original : fgai::FieldSource::Resampled;
    if (o.augment) cfg.augment = to_spec(o.augmentation);
    cfg.augment_gais = o.augment_gais != 0;
    cfg.workers = o.workers;
    cfg.force = o.force != 0;
    cfg.debug_dump = o.debug_dump != 0;

    const fgai::Manifest manifest = fgai::read_manifest(manifest_path);
    fgai::LogSink sink;
    if (log) sink = [log, user](const std::string& line) { log(line.c_str(), user); };
    const fgai::PipelineResult r = fgai::run_pipeline(cfg, manifest, sink);
    fill_summary(r, summary);
    if (!r.ok()) {
      std::string msg = std::to_string(r.failures.size()) + " scan(s) failed:";
      for (const auto& [id, what] : r.failures) msg += " " + id + " (" + what + ");";
      g_last_error = msg;
      return FGAI_ERR_PIPELINE;
    }
    return FGAI_OK;
  });
}

fgai_status fgai_fuse_directory(const char* manifest_path, const char* gai_dir, const char* output_dir,
                                const char* combos, int keep_channel_order, const fgai_augment_options* augmentation,
                                fgai_pipeline_summary* summary) {
  return guard([&] {
    need(manifest_path, "manifest_path");
    need(gai_dir, "gai_dir");
    need(output_dir, "output_dir");
    const auto list = fgai::parse_combo_list(combos ? combos : "", keep_channel_order != 0);
    std::optional<fgai::AugmentSpec> aug;
    if (augmentation) aug = to_spec(*augmentation);
    const auto r = fgai::fuse_directory(gai_dir, fgai::read_manifest(manifest_path), list, keep_channel_order != 0, aug,
                                        output_dir);
    fill_summary(r, summary);
    if (!r.ok()) {
      std::string msg = std::to_string(r.failures.size()) + " scan(s) failed:";
      for (const auto& [id, what] : r.failures) msg += " " + id + " (" + what + ");";
      g_last_error = msg;
      return FGAI_ERR_PIPELINE;
    }
    return FGAI_OK;
  });
}

fgai_status fgai_pixel_features(const char* manifest_path, const char* image_dir, const char* image_name, int cell,
                                const char* out_path) {
  return guard([&] {
    need(manifest_path, "manifest_path");
    need(image_dir, "image_dir");
    need(image_name, "image_name");
    need(out_path, "out_path");
    const auto fm = fgai::pixel_features(image_dir, fgai::read_manifest(manifest_path), image_name, cell);
    fgai::write_feature_matrix(out_path, fm);
    return FGAI_OK;
  });
}

fgai_status fgai_features_load(const char* path, fgai_features** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new fgai_features{fgai::read_feature_matrix(path)};
    return FGAI_OK;
  });
}

fgai_status fgai_features_save(const fgai_features* fm, const char* path) {
  return guard([&] {
    need(fm, "fm");
    need(path, "path");
    fgai::write_feature_matrix(path, fm->fm);
    return FGAI_OK;
  });
}

fgai_status fgai_features_concat(const fgai_features* const* parts, size_t count, fgai_features** out) {
  return guard([&] {
    need(parts, "parts");
    need(out, "out");
    std::vector<fgai::FeatureMatrix> v;
    for (size_t i = 0; i < count; ++i) {
      need(parts[i], "parts[i]");
      v.push_back(parts[i]->fm);
    }
    *out = new fgai_features{fgai::concat_rows(v)};
    return FGAI_OK;
  });
}

fgai_status fgai_features_shape(const fgai_features* fm, size_t* rows, size_t* cols) {
  return guard([&] {
    need(fm, "fm");
    if (rows) *rows = static_cast<size_t>(fm->fm.rows());
    if (cols) *cols = static_cast<size_t>(fm->fm.cols());
    return FGAI_OK;
  });
}

void fgai_features_free(fgai_features* fm) { delete fm; }

fgai_status fgai_analyze(const fgai_features* fm, size_t top_n, int prune_zero, char** csv_out, size_t* kept_features) {
  return guard([&] {
    need(fm, "fm");
    need(csv_out, "csv_out");
    fgai::DiscriminationReport rep;
    if (prune_zero) {
      const auto pruned = fgai::prune_zero_features(fm->fm);
      rep = fgai::fisher_j(pruned.matrix);
      rep.feature_ids = pruned.kept_columns;
    } else {
      rep = fgai::fisher_j(fm->fm);
    }
    if (kept_features) *kept_features = static_cast<size_t>(rep.J.size());
    *csv_out = dup_string(fgai::rank_report_csv(rep, top_n));
    return FGAI_OK;
  });
}

void fgai_svm_options_init(fgai_svm_options* o) {
  if (!o) return;
  const fgai::SvmOptions d;
  o->C = d.C;
  o->max_iterations = d.max_iterations;
  o->tolerance = d.tolerance;
  o->standardize = 1;
}

void fgai_cv_options_init(fgai_cv_options* o) {
  if (!o) return;
  const fgai::CvOptions d;
  o->folds = d.folds;
  o->seed = d.seed;
  o->metric_auc = 0;
  fgai_svm_options_init(&o->svm);
}

fgai_status fgai_train(const fgai_features* fm, const fgai_svm_options* options, fgai_model** out) {
  return guard([&] {
    need(fm, "fm");
    need(out, "out");
    fgai_svm_options d;
    fgai_svm_options_init(&d);
    const fgai_svm_options& o = options ? *options : d;
    *out = new fgai_model{fgai::train_ovr_svm(fm->fm, to_svm(o), o.standardize != 0)};
    return FGAI_OK;
  });
}

fgai_status fgai_model_save(const fgai_model* model, const char* path) {
  return guard([&] {
    need(model, "model");
    need(path, "path");
    std::ofstream out(path, std::ios::binary);
    if (!out) fgai::fail(fgai::ErrorCode::Io, std::string("cannot write ") + path);
    out << fgai::model_to_json(model->model) << '\n';
    if (!out) fgai::fail(fgai::ErrorCode::Io, std::string("write failed: ") + path);
    return FGAI_OK;
  });
}

fgai_status fgai_model_load(const char* path, fgai_model** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    std::ifstream in(path, std::ios::binary);
    if (!in) fgai::fail(fgai::ErrorCode::Io, std::string("cannot open ") + path);
    std::stringstream ss;
    ss << in.rdbuf();
    *out = new fgai_model{fgai::model_from_json(ss.str())};
    return FGAI_OK;
  });
}

fgai_status fgai_model_shape(const fgai_model* model, size_t* classes, size_t* features, int* converged) {
  return guard([&] {
    need(model, "model");
    if (classes) *classes = model->model.classes.size();
    if (features) *features = model->model.feature_count();
    if (converged) {
      *converged = 1;
      for (const auto& m : model->model.models) *converged &= m.converged ? 1 : 0;
    }
    return FGAI_OK;
  });
}

fgai_status fgai_model_class_name(const fgai_model* model, size_t index, const char** name) {
  return guard([&] {
    need(model, "model");
    need(name, "name");
    if (index >= model->model.classes.size()) fgai::fail(fgai::ErrorCode::InvalidArgument, "class index out of range");
    *name = model->model.classes[index].c_str();
    return FGAI_OK;
  });
}

fgai_status fgai_model_predict(const fgai_model* model, const fgai_features* fm, int* labels_out, double* scores_out) {
  return guard([&] {
    need(model, "model");
    need(fm, "fm");
    need(labels_out, "labels_out");
    const auto p = fgai::predict(model->model, fm->fm.values);
    for (std::size_t i = 0; i < p.labels.size(); ++i) labels_out[i] = p.labels[i];
    if (scores_out)
      for (Eigen::Index r = 0; r < p.scores.rows(); ++r)
        for (Eigen::Index c = 0; c < p.scores.cols(); ++c) *scores_out++ = p.scores(r, c);
    return FGAI_OK;
  });
}

void fgai_model_free(fgai_model* model) { delete model; }

fgai_status fgai_cross_validate(const fgai_features* fm, const fgai_cv_options* options, fgai_report** out) {
  return guard([&] {
    need(fm, "fm");
    need(out, "out");
    fgai_cv_options d;
    fgai_cv_options_init(&d);
    *out = new fgai_report{fgai::cross_validate(fm->fm, to_cv(options ? *options : d))};
    return FGAI_OK;
  });
}

fgai_status fgai_dynamic_evaluate(const fgai_features* fm, const fgai_cv_options* options, size_t window,
                                  fgai_report** out) {
  return guard([&] {
    need(fm, "fm");
    need(out, "out");
    fgai_cv_options d;
    fgai_cv_options_init(&d);
    *out = new fgai_report{fgai::dynamic_evaluate(fm->fm, to_cv(options ? *options : d), window)};
    return FGAI_OK;
  });
}

fgai_status fgai_report_headline(const fgai_report* report, double* value) {
  return guard([&] {
    need(report, "report");
    need(value, "value");
    *value = report->report.headline();
    return FGAI_OK;
  });
}

fgai_status fgai_report_json(const fgai_report* report, char** out) {
  return guard([&] {
    need(report, "report");
    need(out, "out");
    *out = dup_string(report->report.to_json());
    return FGAI_OK;
  });
}

fgai_status fgai_report_table(const fgai_report* report, char** out) {
  return guard([&] {
    need(report, "report");
    need(out, "out");
    *out = dup_string(report->report.to_table());
    return FGAI_OK;
  });
}

fgai_status fgai_report_auc_csv(const fgai_report* report, char** out) {
  return guard([&] {
    need(report, "report");
    need(out, "out");
    *out = dup_string(report->report.auc_csv());
    return FGAI_OK;
  });
}

void fgai_report_free(fgai_report* report) { delete report; }

fgai_status fgai_auc(const double* scores, const uint8_t* positive, size_t count, double* out) {
  return guard([&] {
    need(scores, "scores");
    need(positive, "positive");
    need(out, "out");
    *out = fgai::auc(std::span<const double>(scores, count), std::span<const std::uint8_t>(positive, count));
    return FGAI_OK;
  });
}

fgai_status fgai_dynamic_vote(const int* frame_labels, size_t count, size_t window, int* out) {
  return guard([&] {
    need(frame_labels, "frame_labels");
    need(out, "out");
    const auto v = fgai::dynamic_vote(std::span<const int>(frame_labels, count), window);
    std::copy(v.begin(), v.end(), out);
    return FGAI_OK;
  });
}

}  // extern "C"
