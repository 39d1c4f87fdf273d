#include "mgeom/mgeom.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "mgeom/curvature.hpp"
#include "mgeom/error.hpp"
#include "mgeom/experiments.hpp"
#include "mgeom/feature_pool.hpp"
#include "mgeom/io.hpp"
#include "mgeom/manifold.hpp"
#include "mgeom/regularization.hpp"
#include "mgeom/synthetic.hpp"
#include "mgeom/trainer.hpp"

struct mgeom_cloud {
  mgeom::LabeledCloud cloud;
};

struct mgeom_pool {
  mgeom::FeaturePool pool;
};

struct mgeom_dcr {
  mgeom::DcrDriver driver;
};

namespace {

thread_local std::string last_error;

mgeom_status status_of(mgeom::ErrorCode code) {
  using mgeom::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidInput: return MGEOM_ERR_INVALID_INPUT;
    case ErrorCode::NotPsd: return MGEOM_ERR_NOT_PSD;
    case ErrorCode::InsufficientPoints: return MGEOM_ERR_INSUFFICIENT_POINTS;
    case ErrorCode::UndefinedCorrelation: return MGEOM_ERR_UNDEFINED_CORRELATION;
    case ErrorCode::DegenerateManifold: return MGEOM_ERR_DEGENERATE_MANIFOLD;
    case ErrorCode::DegenerateNeighborhood: return MGEOM_ERR_DEGENERATE_NEIGHBORHOOD;
    case ErrorCode::FitFailure: return MGEOM_ERR_FIT_FAILURE;
    case ErrorCode::UnreliableEstimate: return MGEOM_ERR_UNRELIABLE_ESTIMATE;
    case ErrorCode::InvalidCurvature: return MGEOM_ERR_INVALID_CURVATURE;
    case ErrorCode::InvalidSchedule: return MGEOM_ERR_INVALID_SCHEDULE;
    case ErrorCode::EmptyPool: return MGEOM_ERR_EMPTY_POOL;
    case ErrorCode::IncompletePool: return MGEOM_ERR_INCOMPLETE_POOL;
    case ErrorCode::InvalidState: return MGEOM_ERR_INVALID_STATE;
    case ErrorCode::TrainingDiverged: return MGEOM_ERR_TRAINING_DIVERGED;
    case ErrorCode::Io: return MGEOM_ERR_IO;
    case ErrorCode::Parse: return MGEOM_ERR_PARSE;
  }
  return MGEOM_ERR_INTERNAL;
}

template <class F>
mgeom_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return MGEOM_OK;
  } catch (const mgeom::Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return MGEOM_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return MGEOM_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  mgeom::require(p != nullptr, mgeom::ErrorCode::InvalidInput, std::string(what) + " is NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

mgeom::Matrix columns_from_rows(size_t n, size_t dim, const double* rows) {
  mgeom::Matrix m(dim, n);
  for (size_t j = 0; j < n; ++j)
    for (size_t d = 0; d < dim; ++d) m(d, j) = rows[j * dim + d];
  return m;
}

std::vector<mgeom::ClassId> label_vector(size_t n, const int32_t* labels) {
  if (!labels) return std::vector<mgeom::ClassId>(n, 0);
  return std::vector<mgeom::ClassId>(labels, labels + n);
}

mgeom_cloud* wrap_unlabeled(mgeom::Matrix points) {
  std::vector<mgeom::ClassId> labels(points.cols(), 0);
  return new mgeom_cloud{mgeom::LabeledCloud(std::move(points), std::move(labels))};
}

mgeom::CurvatureVector curvature_vector(const double* g, size_t count) {
  need(g, "curvatures");
  return mgeom::CurvatureVector(std::vector<double>(g, g + count));
}

}  // namespace

extern "C" {

const char* mgeom_last_error(void) { return last_error.c_str(); }

const char* mgeom_status_string(mgeom_status status) {
  switch (status) {
    case MGEOM_OK: return "ok";
    case MGEOM_ERR_INVALID_INPUT: return "invalid-input";
    case MGEOM_ERR_NOT_PSD: return "not-psd";
    case MGEOM_ERR_INSUFFICIENT_POINTS: return "insufficient-points";
    case MGEOM_ERR_UNDEFINED_CORRELATION: return "undefined-correlation";
    case MGEOM_ERR_DEGENERATE_MANIFOLD: return "degenerate-manifold";
    case MGEOM_ERR_DEGENERATE_NEIGHBORHOOD: return "degenerate-neighborhood";
    case MGEOM_ERR_FIT_FAILURE: return "fit-failure";
    case MGEOM_ERR_UNRELIABLE_ESTIMATE: return "unreliable-estimate";
    case MGEOM_ERR_INVALID_CURVATURE: return "invalid-curvature";
    case MGEOM_ERR_INVALID_SCHEDULE: return "invalid-schedule";
    case MGEOM_ERR_EMPTY_POOL: return "empty-pool";
    case MGEOM_ERR_INCOMPLETE_POOL: return "incomplete-pool";
    case MGEOM_ERR_INVALID_STATE: return "invalid-state";
    case MGEOM_ERR_TRAINING_DIVERGED: return "training-diverged";
    case MGEOM_ERR_IO: return "io-error";
    case MGEOM_ERR_PARSE: return "parse-error";
    case MGEOM_ERR_INTERNAL: return "internal-error";
  }
  return "unknown";
}

int mgeom_status_exit_code(mgeom_status status) {
  if (status == MGEOM_OK) return 0;
  if (status == MGEOM_ERR_IO || status == MGEOM_ERR_PARSE) return 2;
  return 3;
}

void mgeom_string_free(char* s) { std::free(s); }

mgeom_status mgeom_cloud_create(size_t n, size_t dim, const double* rows, const int32_t* labels,
                                mgeom_cloud** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    need(rows, "rows");
    *out = new mgeom_cloud{
        mgeom::LabeledCloud(columns_from_rows(n, dim, rows), label_vector(n, labels))};
  });
}

mgeom_status mgeom_cloud_load(const char* path, mgeom_cloud** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    *out = new mgeom_cloud{mgeom::read_cloud(path)};
  });
}

mgeom_status mgeom_cloud_save_csv(const mgeom_cloud* cloud, const char* path) {
  return guarded([&] {
    need(cloud, "cloud");
    need(path, "path");
    mgeom::write_cloud_csv(path, cloud->cloud);
  });
}

mgeom_status mgeom_cloud_save_matrix(const mgeom_cloud* cloud, const char* path) {
  return guarded([&] {
    need(cloud, "cloud");
    need(path, "path");
    mgeom::write_cloud_matrix_file(path, cloud->cloud);
  });
}

void mgeom_cloud_free(mgeom_cloud* cloud) { delete cloud; }

size_t mgeom_cloud_dim(const mgeom_cloud* cloud) { return cloud ? cloud->cloud.dim() : 0; }
size_t mgeom_cloud_size(const mgeom_cloud* cloud) { return cloud ? cloud->cloud.size() : 0; }
size_t mgeom_cloud_class_count(const mgeom_cloud* cloud) {
  return cloud ? cloud->cloud.class_count() : 0;
}

size_t mgeom_cloud_class_size(const mgeom_cloud* cloud, size_t class_id) {
  if (!cloud) return 0;
  size_t n = 0;
  for (auto c : cloud->cloud.labels()) n += static_cast<size_t>(c) == class_id;
  return n;
}

mgeom_status mgeom_cloud_copy(const mgeom_cloud* cloud, double* rows, int32_t* labels) {
  return guarded([&] {
    need(cloud, "cloud");
    const auto& pts = cloud->cloud.points();
    for (size_t j = 0; j < pts.cols(); ++j) {
      if (rows)
        for (size_t d = 0; d < pts.rows(); ++d) rows[j * pts.rows() + d] = pts(d, j);
      if (labels) labels[j] = cloud->cloud.labels()[j];
    }
  });
}

mgeom_status mgeom_volume(const mgeom_cloud* cloud, int32_t class_id, int center, double* out) {
  return guarded([&] {
    need(cloud, "cloud");
    need(out, "out");
    if (class_id < 0) {
      *out = mgeom::manifold_volume(cloud->cloud.points(), center != 0);
      return;
    }
    mgeom::require(static_cast<size_t>(class_id) < cloud->cloud.class_count(),
                   mgeom::ErrorCode::InvalidInput,
                   "class " + std::to_string(class_id) + " is not present");
    const auto ms = mgeom::ManifoldSet::from_cloud(cloud->cloud);
    *out = mgeom::manifold_volume(ms.points(static_cast<size_t>(class_id)), center != 0);
  });
}

mgeom_status mgeom_separation(const mgeom_cloud* cloud, int center, int closed_form,
                              double* separation, double* class_volume, double* total_volume) {
  return guarded([&] {
    need(cloud, "cloud");
    need(separation, "separation");
    const auto ms = mgeom::ManifoldSet::from_cloud(cloud->cloud);
    const auto report = mgeom::separation_all(ms, center != 0, closed_form != 0);
    for (size_t i = 0; i < report.separation.size(); ++i) {
      separation[i] = report.separation[i];
      if (class_volume) class_volume[i] = report.class_volume[i];
    }
    if (total_volume) *total_volume = report.total_volume;
  });
}

mgeom_curvature_options mgeom_curvature_options_default(void) {
  const mgeom::CurvatureOptions d;
  return {d.k, d.rank_tol, d.ridge, d.include_center ? 1 : 0};
}

mgeom_status mgeom_curvature(const mgeom_cloud* cloud, size_t class_id,
                             const mgeom_curvature_options* options,
                             mgeom_curvature_summary* summary, double* values) {
  return guarded([&] {
    need(cloud, "cloud");
    mgeom::require(class_id < cloud->cloud.class_count(), mgeom::ErrorCode::InvalidInput,
                   "class " + std::to_string(class_id) + " is not present");
    mgeom::CurvatureOptions opts;
    if (options) {
      opts.k = options->k;
      opts.rank_tol = options->rank_tol;
      opts.ridge = options->ridge;
      opts.include_center = options->include_center != 0;
    }
    const auto ms = mgeom::ManifoldSet::from_cloud(cloud->cloud);
    const auto report = mgeom::mean_gauss_curvature(ms.points(class_id), opts);
    if (summary) *summary = {report.complexity, report.signed_mean, report.evaluated(), report.skipped};
    if (values)
      for (size_t j = 0; j < report.curvature.size(); ++j) values[j] = report.curvature[j];
  });
}

mgeom_status mgeom_cr_penalties(const double* curvatures, size_t count, double* out) {
  return guarded([&] {
    need(out, "out");
    const auto pen = mgeom::curvature_penalties(curvature_vector(curvatures, count));
    for (size_t i = 0; i < pen.size(); ++i) out[i] = pen[i];
  });
}

mgeom_status mgeom_cr_loss(const double* curvatures, size_t count, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = mgeom::l_curvature(curvature_vector(curvatures, count));
  });
}

mgeom_status mgeom_combined_loss(double l_original, double l_curvature, double tau, size_t epoch,
                                 double* total, double* weight) {
  return guarded([&] {
    const auto r = mgeom::combined_loss(l_original, l_curvature, {tau, epoch});
    if (total) *total = r.total;
    if (weight) *weight = r.weight;
  });
}

mgeom_status mgeom_pool_create(size_t dim, mgeom_pool** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    *out = new mgeom_pool{mgeom::FeaturePool(dim)};
  });
}

void mgeom_pool_free(mgeom_pool* pool) { delete pool; }

mgeom_status mgeom_pool_enqueue(mgeom_pool* pool, size_t b, const double* rows,
                                const int32_t* labels, uint64_t* sequence) {
  return guarded([&] {
    need(pool, "pool");
    need(rows, "rows");
    need(labels, "labels");
    const auto seq = pool->pool.enqueue_batch(columns_from_rows(b, pool->pool.dim(), rows),
                                              label_vector(b, labels));
    if (sequence) *sequence = seq;
  });
}

mgeom_status mgeom_pool_dequeue(mgeom_pool* pool, size_t* b) {
  return guarded([&] {
    need(pool, "pool");
    const auto batch = pool->pool.dequeue_oldest();
    if (b) *b = batch.labels.size();
  });
}

size_t mgeom_pool_sample_count(const mgeom_pool* pool) { return pool ? pool->pool.sample_count() : 0; }
size_t mgeom_pool_batch_count(const mgeom_pool* pool) { return pool ? pool->pool.batch_count() : 0; }

mgeom_status mgeom_pool_to_cloud(const mgeom_pool* pool, mgeom_cloud** out) {
  return guarded([&] {
    need(pool, "pool");
    need(out, "out");
    *out = nullptr;
    *out = new mgeom_cloud{pool->pool.to_cloud()};
  });
}

mgeom_status mgeom_dcr_create(size_t capacity, size_t batch_size, size_t warmup_epochs,
                              size_t total_epochs, mgeom_dcr** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    *out = new mgeom_dcr{mgeom::DcrDriver({capacity, batch_size, warmup_epochs, total_epochs})};
  });
}

void mgeom_dcr_free(mgeom_dcr* dcr) { delete dcr; }

mgeom_status mgeom_dcr_tick(mgeom_dcr* dcr, mgeom_pool* pool, size_t b, const double* rows,
                            const int32_t* labels, mgeom_dcr_action* action) {
  return guarded([&] {
    need(dcr, "dcr");
    need(pool, "pool");
    need(rows, "rows");
    need(labels, "labels");
    const auto a = dcr->driver.tick(pool->pool, columns_from_rows(b, pool->pool.dim(), rows),
                                    label_vector(b, labels));
    if (action)
      *action = a == mgeom::DcrAction::CurvatureCombinedLoss ? MGEOM_ACTION_COMBINED_LOSS
                                                              : MGEOM_ACTION_ORIGINAL_LOSS;
  });
}

mgeom_status mgeom_dcr_state(const mgeom_dcr* dcr, size_t* epoch, size_t* iteration,
                             mgeom_dcr_phase* phase) {
  return guarded([&] {
    need(dcr, "dcr");
    const auto& s = dcr->driver.state();
    if (epoch) *epoch = s.epoch;
    if (iteration) *iteration = s.iteration;
    if (phase) *phase = static_cast<mgeom_dcr_phase>(static_cast<int>(s.phase));
  });
}

mgeom_status mgeom_generate_sphere(double radius, const double* center, size_t n, uint64_t seed,
                                   int mode, mgeom_cloud** out) {
  return guarded([&] {
    need(center, "center");
    need(out, "out");
    *out = nullptr;
    mgeom::require(mode == 0 || mode == 1, mgeom::ErrorCode::InvalidInput,
                   "sphere mode must be 0 (surface) or 1 (ball)");
    *out = wrap_unlabeled(mgeom::sphere_cloud(radius, std::span<const double>(center, 3), n, seed,
                                              mode == 0 ? mgeom::SphereMode::Surface
                                                        : mgeom::SphereMode::Ball));
  });
}

mgeom_status mgeom_generate_saddle(double w, size_t n, uint64_t seed, mgeom_cloud** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    *out = wrap_unlabeled(mgeom::saddle_cloud(w, n, seed));
  });
}

mgeom_status mgeom_generate_wave(double w, size_t n, uint64_t seed, mgeom_cloud** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    *out = wrap_unlabeled(mgeom::wave_cloud(w, n, seed));
  });
}

mgeom_status mgeom_generate_plane(size_t n, uint64_t seed, mgeom_cloud** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    *out = wrap_unlabeled(mgeom::plane_cloud(n, seed));
  });
}

mgeom_status mgeom_generate_blobs(size_t classes, const size_t* counts, size_t dim,
                                  const double* means, double sigma, uint64_t seed,
                                  mgeom_cloud** out) {
  return guarded([&] {
    need(counts, "counts");
    need(means, "means");
    need(out, "out");
    *out = nullptr;
    std::vector<std::vector<double>> mu(classes);
    for (size_t c = 0; c < classes; ++c) mu[c].assign(means + c * dim, means + (c + 1) * dim);
    const std::vector<std::size_t> cnt(counts, counts + classes);
    *out = new mgeom_cloud{mgeom::gaussian_blobs(cnt, mu, sigma, seed)};
  });
}

mgeom_status mgeom_run_experiment(const char* name, uint64_t seed, char** csv) {
  return guarded([&] {
    need(name, "name");
    need(csv, "csv");
    *csv = nullptr;
    *csv = dup_string(mgeom::run_experiment(name, seed));
  });
}

mgeom_status mgeom_train(const char* config_json, char** trace_csv, char** summary_json) {
  if (trace_csv) *trace_csv = nullptr;
  if (summary_json) *summary_json = nullptr;
  return guarded([&] {
    const mgeom::TrainConfig config =
        mgeom::parse_train_config(config_json ? config_json : "{}");
    try {
      const mgeom::TrainingTrace trace = mgeom::train(config);
      if (trace_csv) *trace_csv = dup_string(mgeom::trace_csv(trace));
      if (summary_json) *summary_json = dup_string(mgeom::trace_summary_json(config, trace));
    } catch (const mgeom::TrainingDiverged& e) {
      if (trace_csv) *trace_csv = dup_string(mgeom::trace_csv(e.trace()));
      throw;
    }
  });
}

}  // extern "C"
