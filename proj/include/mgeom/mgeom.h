/* C interface to the manifold geometry library.
 *
 * Every function returns an mgeom_status. On failure the message of the last
 * error raised on the calling thread is available from mgeom_last_error().
 * Point data crosses the boundary row-major, one point per row (n x p).
 * Strings returned through char** are owned by the caller and released with
 * mgeom_string_free(). */
#ifndef MGEOM_H
#define MGEOM_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define MGEOM_API __declspec(dllexport)
#else
#define MGEOM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mgeom_status {
  MGEOM_OK = 0,
  MGEOM_ERR_INVALID_INPUT = 1,
  MGEOM_ERR_NOT_PSD = 2,
  MGEOM_ERR_INSUFFICIENT_POINTS = 3,
  MGEOM_ERR_UNDEFINED_CORRELATION = 4,
  MGEOM_ERR_DEGENERATE_MANIFOLD = 5,
  MGEOM_ERR_DEGENERATE_NEIGHBORHOOD = 6,
  MGEOM_ERR_FIT_FAILURE = 7,
  MGEOM_ERR_UNRELIABLE_ESTIMATE = 8,
  MGEOM_ERR_INVALID_CURVATURE = 9,
  MGEOM_ERR_INVALID_SCHEDULE = 10,
  MGEOM_ERR_EMPTY_POOL = 11,
  MGEOM_ERR_INCOMPLETE_POOL = 12,
  MGEOM_ERR_INVALID_STATE = 13,
  MGEOM_ERR_TRAINING_DIVERGED = 14,
  MGEOM_ERR_IO = 15,
  MGEOM_ERR_PARSE = 16,
  MGEOM_ERR_INTERNAL = 99
} mgeom_status;

typedef struct mgeom_cloud mgeom_cloud;
typedef struct mgeom_pool mgeom_pool;
typedef struct mgeom_dcr mgeom_dcr;

MGEOM_API const char* mgeom_last_error(void);
MGEOM_API const char* mgeom_status_string(mgeom_status status);
/* 0 for success, 2 for I/O and parse failures, 3 for everything else. */
MGEOM_API int mgeom_status_exit_code(mgeom_status status);
MGEOM_API void mgeom_string_free(char* s);

/* ---- labeled clouds ---- */

/* Functions that produce a handle set *out to NULL when they fail. */

/* labels may be NULL, which puts every point in class 0. */
MGEOM_API mgeom_status mgeom_cloud_create(size_t n, size_t dim, const double* rows,
                                          const int32_t* labels, mgeom_cloud** out);
/* CSV or binary matrix file, detected from the leading bytes. */
MGEOM_API mgeom_status mgeom_cloud_load(const char* path, mgeom_cloud** out);
MGEOM_API mgeom_status mgeom_cloud_save_csv(const mgeom_cloud* cloud, const char* path);
MGEOM_API mgeom_status mgeom_cloud_save_matrix(const mgeom_cloud* cloud, const char* path);
MGEOM_API void mgeom_cloud_free(mgeom_cloud* cloud);

MGEOM_API size_t mgeom_cloud_dim(const mgeom_cloud* cloud);
MGEOM_API size_t mgeom_cloud_size(const mgeom_cloud* cloud);
MGEOM_API size_t mgeom_cloud_class_count(const mgeom_cloud* cloud);
MGEOM_API size_t mgeom_cloud_class_size(const mgeom_cloud* cloud, size_t class_id);
/* Copies the points (n x dim, row-major) and labels; either may be NULL. */
MGEOM_API mgeom_status mgeom_cloud_copy(const mgeom_cloud* cloud, double* rows, int32_t* labels);

/* ---- volume and separation ---- */

/* class_id < 0 measures the whole cloud. */
MGEOM_API mgeom_status mgeom_volume(const mgeom_cloud* cloud, int32_t class_id, int center,
                                    double* out);

/* separation and class_volume hold class_count entries; total_volume may be NULL. */
MGEOM_API mgeom_status mgeom_separation(const mgeom_cloud* cloud, int center, int closed_form,
                                        double* separation, double* class_volume,
                                        double* total_volume);

/* ---- curvature ---- */

typedef struct mgeom_curvature_options {
  size_t k;
  double rank_tol;
  double ridge;
  int include_center;
} mgeom_curvature_options;

typedef struct mgeom_curvature_summary {
  double complexity;
  double signed_mean;
  size_t evaluated;
  size_t skipped;
} mgeom_curvature_summary;

MGEOM_API mgeom_curvature_options mgeom_curvature_options_default(void);

/* values (optional) receives one Gauss curvature per point of the class,
 * NaN where the neighborhood was skipped. */
MGEOM_API mgeom_status mgeom_curvature(const mgeom_cloud* cloud, size_t class_id,
                                       const mgeom_curvature_options* options,
                                       mgeom_curvature_summary* summary, double* values);

/* ---- curvature regularization ---- */

MGEOM_API mgeom_status mgeom_cr_penalties(const double* curvatures, size_t count, double* out);
MGEOM_API mgeom_status mgeom_cr_loss(const double* curvatures, size_t count, double* out);
MGEOM_API mgeom_status mgeom_combined_loss(double l_original, double l_curvature, double tau,
                                           size_t epoch, double* total, double* weight);

/* ---- feature pool and the epoch-gated protocol ---- */

MGEOM_API mgeom_status mgeom_pool_create(size_t dim, mgeom_pool** out);
MGEOM_API void mgeom_pool_free(mgeom_pool* pool);
/* rows is b x dim, row-major. sequence may be NULL. */
MGEOM_API mgeom_status mgeom_pool_enqueue(mgeom_pool* pool, size_t b, const double* rows,
                                          const int32_t* labels, uint64_t* sequence);
/* Removes the oldest batch; its size goes to *b when b is not NULL. */
MGEOM_API mgeom_status mgeom_pool_dequeue(mgeom_pool* pool, size_t* b);
MGEOM_API size_t mgeom_pool_sample_count(const mgeom_pool* pool);
MGEOM_API size_t mgeom_pool_batch_count(const mgeom_pool* pool);
/* Flattens the pool into a labeled cloud. */
MGEOM_API mgeom_status mgeom_pool_to_cloud(const mgeom_pool* pool, mgeom_cloud** out);

typedef enum mgeom_dcr_action {
  MGEOM_ACTION_ORIGINAL_LOSS = 0,
  MGEOM_ACTION_COMBINED_LOSS = 1
} mgeom_dcr_action;

typedef enum mgeom_dcr_phase {
  MGEOM_PHASE_FILLING = 0,
  MGEOM_PHASE_WARMUP = 1,
  MGEOM_PHASE_ACTIVE = 2
} mgeom_dcr_phase;

MGEOM_API mgeom_status mgeom_dcr_create(size_t capacity, size_t batch_size, size_t warmup_epochs,
                                        size_t total_epochs, mgeom_dcr** out);
MGEOM_API void mgeom_dcr_free(mgeom_dcr* dcr);
MGEOM_API mgeom_status mgeom_dcr_tick(mgeom_dcr* dcr, mgeom_pool* pool, size_t b,
                                      const double* rows, const int32_t* labels,
                                      mgeom_dcr_action* action);
MGEOM_API mgeom_status mgeom_dcr_state(const mgeom_dcr* dcr, size_t* epoch, size_t* iteration,
                                       mgeom_dcr_phase* phase);

/* ---- synthetic data ---- */

/* mode: 0 surface, 1 ball. center has 3 entries. */
MGEOM_API mgeom_status mgeom_generate_sphere(double radius, const double* center, size_t n,
                                             uint64_t seed, int mode, mgeom_cloud** out);
MGEOM_API mgeom_status mgeom_generate_saddle(double w, size_t n, uint64_t seed, mgeom_cloud** out);
MGEOM_API mgeom_status mgeom_generate_wave(double w, size_t n, uint64_t seed, mgeom_cloud** out);
MGEOM_API mgeom_status mgeom_generate_plane(size_t n, uint64_t seed, mgeom_cloud** out);
/* means is classes x dim, row-major. */
MGEOM_API mgeom_status mgeom_generate_blobs(size_t classes, const size_t* counts, size_t dim,
                                            const double* means, double sigma, uint64_t seed,
                                            mgeom_cloud** out);

/* ---- experiments and training ---- */

/* name: fig2, fig3, tau-sweep, dynamics. */
MGEOM_API mgeom_status mgeom_run_experiment(const char* name, uint64_t seed, char** csv);

/* config_json may be NULL or "{}" for the defaults. Either output may be NULL. */
MGEOM_API mgeom_status mgeom_train(const char* config_json, char** trace_csv, char** summary_json);

#ifdef __cplusplus
}
#endif

#endif
