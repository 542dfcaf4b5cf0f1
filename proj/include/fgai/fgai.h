#ifndef FGAI_FGAI_H
#define FGAI_FGAI_H

/* C interface to the fgai library: textured meshes to geometry-augmented
 * images, plus the feature analysis and SVM evaluation harness.
 *
 * Conventions: every call returns an fgai_status; on failure the message is
 * available from fgai_last_error() on the calling thread until the next call
 * on that thread. Handles are opaque and owned by the caller, release them
 * with the matching *_free function. Strings returned through char** are
 * released with fgai_string_free. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(FGAI_BUILDING_LIBRARY)
#    define FGAI_API __declspec(dllexport)
#  else
#    define FGAI_API __declspec(dllimport)
#  endif
#else
#  define FGAI_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fgai_status {
  FGAI_OK = 0,
  FGAI_ERR_INVALID_ARGUMENT = 1,
  FGAI_ERR_IO = 2,
  FGAI_ERR_PARSE = 3,
  FGAI_ERR_MISSING_TEXTURE = 4,
  FGAI_ERR_DEGENERATE = 5,
  FGAI_ERR_RESAMPLE = 6,
  FGAI_ERR_NUMERICAL = 7,
  FGAI_ERR_INTERNAL = 8,
  FGAI_ERR_PIPELINE = 9 /* one or more scans failed; see the log */
} fgai_status;

FGAI_API const char* fgai_last_error(void);
FGAI_API const char* fgai_status_name(fgai_status status);
FGAI_API const char* fgai_version(void);
FGAI_API void fgai_string_free(char* s);

/* ---- meshes ---- */

typedef struct fgai_mesh fgai_mesh;

typedef struct fgai_mesh_info {
  size_t vertex_count;
  size_t facet_count;
  size_t dropped_facets;
  double mean_edge_length;
  int texture_width;
  int texture_height;
} fgai_mesh_info;

FGAI_API fgai_status fgai_mesh_load(const char* obj_path, const char* texture_path, fgai_mesh** out);
FGAI_API fgai_status fgai_mesh_get_info(const fgai_mesh* mesh, fgai_mesh_info* out);
FGAI_API void fgai_mesh_free(fgai_mesh* mesh);

/* ---- image pipeline ---- */

typedef struct fgai_augment_options {
  int horizontal_flip;
  double rotation_degrees;
  double noise_sigma;
  uint64_t seed;
} fgai_augment_options;

typedef struct fgai_pipeline_options {
  double step;                   /* resampling step k >= 1 */
  int spacing_edge_length;       /* 0: density-matched grid, 1: sqrt(k) * mean edge */
  double neighborhood_multiplier;/* geodesic radius in mean edge lengths */
  int width, height;
  const char* combos;            /* comma separated, e.g. "K-H-GL,H-LD-SI"; NULL for all ten */
  int keep_channel_order;
  int global_normalization;
  int fields_on_original;        /* evaluate descriptors on the input mesh */
  int augment;                   /* emit one augmented copy per FGAI */
  int augment_gais;              /* ... and per GAI */
  fgai_augment_options augmentation;
  unsigned workers;
  int force;
  int debug_dump;
} fgai_pipeline_options;

typedef struct fgai_pipeline_summary {
  size_t processed;
  size_t skipped;
  size_t failed;
  size_t images_written;
} fgai_pipeline_summary;

typedef void (*fgai_log_fn)(const char* line, void* user);

FGAI_API void fgai_pipeline_options_init(fgai_pipeline_options* options);
FGAI_API void fgai_augment_options_init(fgai_augment_options* options);

/* Processes every scan of the manifest into output_dir. Returns
 * FGAI_ERR_PIPELINE (with the summary filled) when some scans failed. */
FGAI_API fgai_status fgai_process(const char* manifest_path, const char* output_dir,
                                  const fgai_pipeline_options* options, fgai_log_fn log, void* user,
                                  fgai_pipeline_summary* summary);

/* Fuses existing GAI PNGs of gai_dir into FGAIs written to output_dir.
 * augmentation may be NULL. */
FGAI_API fgai_status fgai_fuse_directory(const char* manifest_path, const char* gai_dir, const char* output_dir,
                                         const char* combos, int keep_channel_order,
                                         const fgai_augment_options* augmentation, fgai_pipeline_summary* summary);

/* Block-averaged pixels of "<scan>.<image_name>.png" as an FMX1 matrix plus
 * labels CSV. */
FGAI_API fgai_status fgai_pixel_features(const char* manifest_path, const char* image_dir, const char* image_name,
                                         int cell, const char* out_path);

/* ---- feature matrices ---- */

typedef struct fgai_features fgai_features;

FGAI_API fgai_status fgai_features_load(const char* path, fgai_features** out);
FGAI_API fgai_status fgai_features_save(const fgai_features* fm, const char* path);
FGAI_API fgai_status fgai_features_concat(const fgai_features* const* parts, size_t count, fgai_features** out);
FGAI_API fgai_status fgai_features_shape(const fgai_features* fm, size_t* rows, size_t* cols);
FGAI_API void fgai_features_free(fgai_features* fm);

/* Ranked discrimination report as "rank,feature_index,J" CSV. With
 * prune_zero, all-zero columns are removed first (indices stay original). */
FGAI_API fgai_status fgai_analyze(const fgai_features* fm, size_t top_n, int prune_zero, char** csv_out,
                                  size_t* kept_features);

/* ---- classification ---- */

typedef struct fgai_svm_options {
  double C;
  int max_iterations;
  double tolerance;
  int standardize;
} fgai_svm_options;

typedef struct fgai_cv_options {
  size_t folds;
  uint64_t seed;
  int metric_auc; /* headline metric: 0 accuracy, 1 AuC */
  fgai_svm_options svm;
} fgai_cv_options;

typedef struct fgai_model fgai_model;
typedef struct fgai_report fgai_report;

FGAI_API void fgai_svm_options_init(fgai_svm_options* options);
FGAI_API void fgai_cv_options_init(fgai_cv_options* options);

FGAI_API fgai_status fgai_train(const fgai_features* fm, const fgai_svm_options* options, fgai_model** out);
FGAI_API fgai_status fgai_model_save(const fgai_model* model, const char* path);
FGAI_API fgai_status fgai_model_load(const char* path, fgai_model** out);
FGAI_API fgai_status fgai_model_shape(const fgai_model* model, size_t* classes, size_t* features, int* converged);
FGAI_API fgai_status fgai_model_class_name(const fgai_model* model, size_t index, const char** name);
/* labels_out holds rows entries (class indices); scores_out, if not NULL,
 * rows x classes row-major. */
FGAI_API fgai_status fgai_model_predict(const fgai_model* model, const fgai_features* fm, int* labels_out,
                                        double* scores_out);
FGAI_API void fgai_model_free(fgai_model* model);

FGAI_API fgai_status fgai_cross_validate(const fgai_features* fm, const fgai_cv_options* options, fgai_report** out);
FGAI_API fgai_status fgai_dynamic_evaluate(const fgai_features* fm, const fgai_cv_options* options, size_t window,
                                           fgai_report** out);
FGAI_API fgai_status fgai_report_headline(const fgai_report* report, double* value);
FGAI_API fgai_status fgai_report_json(const fgai_report* report, char** out);
FGAI_API fgai_status fgai_report_table(const fgai_report* report, char** out);
FGAI_API fgai_status fgai_report_auc_csv(const fgai_report* report, char** out);
FGAI_API void fgai_report_free(fgai_report* report);

FGAI_API fgai_status fgai_auc(const double* scores, const uint8_t* positive, size_t count, double* out);
FGAI_API fgai_status fgai_dynamic_vote(const int* frame_labels, size_t count, size_t window, int* out);

#ifdef __cplusplus
}
#endif

#endif
