#include "mgeom/manifold.hpp"

#include <algorithm>
#include <cmath>

#include "mgeom/error.hpp"
#include "mgeom/linalg.hpp"

namespace mgeom {

namespace {

// log2(delta) at or below this counts as a zero-volume manifold.
const double kDegenerateLogDelta = std::log2(1.0 + 1e-12);

Matrix i_plus(const Matrix& cov) {
  Matrix out = cov;
  for (std::size_t i = 0; i < out.rows(); ++i) out(i, i) += 1.0;
  return out;
}

void check_separation_args(const ManifoldSet& ms, std::size_t i) {
  require(ms.class_count() >= 2, ErrorCode::InvalidInput,
          "separation needs at least two classes");
  require(i < ms.class_count(), ErrorCode::InvalidInput, "class index out of range");
}

double class_log_delta(const ManifoldSet& ms, std::size_t i, bool center) {
  const double log_delta = logdet_i_plus(covariance(ms.points(i), center));
  require(log_delta > kDegenerateLogDelta, ErrorCode::DegenerateManifold,
          "class " + std::to_string(i) + " has zero volume");
  return log_delta;
}

}  // namespace

LabeledCloud::LabeledCloud(Matrix points, std::vector<ClassId> labels)
    : points_(std::move(points)), labels_(std::move(labels)) {
  require(!points_.empty(), ErrorCode::InvalidInput, "cloud has no points");
  require(labels_.size() == points_.cols(), ErrorCode::InvalidInput,
          "label count does not match point count");
  require(points_.all_finite(), ErrorCode::InvalidInput, "cloud has a non-finite coordinate");
  ClassId top = 0;
  for (ClassId c : labels_) {
    require(c >= 0, ErrorCode::InvalidInput, "negative class id");
    top = std::max(top, c);
  }
  class_count_ = static_cast<std::size_t>(top) + 1;
  std::vector<bool> seen(class_count_, false);
  for (ClassId c : labels_) seen[static_cast<std::size_t>(c)] = true;
  for (std::size_t c = 0; c < class_count_; ++c)
    require(seen[c], ErrorCode::InvalidInput,
            "class ids must cover [0, C); class " + std::to_string(c) + " is missing");
}

ManifoldSet::ManifoldSet(std::vector<Matrix> classes) : classes_(std::move(classes)) {
  require(!classes_.empty(), ErrorCode::InvalidInput, "manifold set has no classes");
  const std::size_t p = classes_.front().rows();
  for (const auto& z : classes_) {
    require(z.cols() >= 1, ErrorCode::InvalidInput, "class with no points");
    require(z.rows() == p, ErrorCode::InvalidInput, "classes disagree on dimension");
  }
}

ManifoldSet ManifoldSet::from_cloud(const LabeledCloud& cloud) {
  std::vector<std::vector<std::size_t>> members(cloud.class_count());
  for (std::size_t j = 0; j < cloud.size(); ++j)
    members[static_cast<std::size_t>(cloud.labels()[j])].push_back(j);
  std::vector<Matrix> classes;
  classes.reserve(members.size());
  for (const auto& idx : members) classes.push_back(select_columns(cloud.points(), idx));
  return ManifoldSet(std::move(classes));
}

std::size_t ManifoldSet::total_points() const noexcept {
  std::size_t n = 0;
  for (const auto& z : classes_) n += z.cols();
  return n;
}

Matrix ManifoldSet::stacked(std::ptrdiff_t excluded) const {
  std::size_t n = 0;
  for (std::size_t c = 0; c < classes_.size(); ++c)
    if (static_cast<std::ptrdiff_t>(c) != excluded) n += classes_[c].cols();
  Matrix out(dim(), n);
  std::size_t at = 0;
  for (std::size_t c = 0; c < classes_.size(); ++c) {
    if (static_cast<std::ptrdiff_t>(c) == excluded) continue;
    const Matrix& z = classes_[c];
    for (std::size_t r = 0; r < z.rows(); ++r)
      for (std::size_t j = 0; j < z.cols(); ++j) out(r, at + j) = z(r, j);
    at += z.cols();
  }
  return out;
}

double manifold_volume(const Matrix& points, bool center) {
  return 0.5 * logdet_i_plus(covariance(points, center));
}

double separation_degree(const ManifoldSet& ms, std::size_t i, bool center) {
  check_separation_args(ms, i);
  const double vol_i = 0.5 * class_log_delta(ms, i, center);
  const double vol_all = manifold_volume(ms.stacked(), center);
  const double vol_rest = manifold_volume(ms.stacked(static_cast<std::ptrdiff_t>(i)), center);
  return (vol_all - vol_rest) / vol_i;
}

double separation_degree_closed_form(const ManifoldSet& ms, std::size_t i, bool center) {
  check_separation_args(ms, i);
  const double log_delta = class_log_delta(ms, i, center);
  const Matrix all = i_plus(covariance(ms.stacked(), center));
  const Matrix rest = i_plus(covariance(ms.stacked(static_cast<std::ptrdiff_t>(i)), center));
  return log2_det_ratio(all, rest) / log_delta;
}

SeparationReport separation_all(const ManifoldSet& ms, bool center, bool closed_form) {
  require(ms.class_count() >= 2, ErrorCode::InvalidInput,
          "separation needs at least two classes");
  SeparationReport report;
  const Matrix all_cov = covariance(ms.stacked(), center);
  report.total_volume = 0.5 * logdet_i_plus(all_cov);
  const Matrix all = i_plus(all_cov);

  const std::size_t c = ms.class_count();
  report.separation.resize(c);
  report.class_volume.resize(c);
  for (std::size_t i = 0; i < c; ++i) {
    try {
      report.class_volume[i] = manifold_volume(ms.points(i), center);
      const double log_delta = class_log_delta(ms, i, center);
      const Matrix rest_cov = covariance(ms.stacked(static_cast<std::ptrdiff_t>(i)), center);
      if (closed_form) {
        report.separation[i] = log2_det_ratio(all, i_plus(rest_cov)) / log_delta;
      } else {
        const double vol_rest = 0.5 * logdet_i_plus(rest_cov);
        report.separation[i] = (report.total_volume - vol_rest) / (0.5 * log_delta);
      }
    } catch (const Error& e) {
      throw Error(e.code(), "class " + std::to_string(i) + ": " + e.what());
    }
  }
  return report;
}

}  // namespace mgeom
