#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mgeom/matrix.hpp"

namespace mgeom {

using ClassId = std::int32_t;

/// p x n points with one class id per column. Class ids cover [0, C) with
/// every id present at least once.
class LabeledCloud {
 public:
  LabeledCloud() = default;
  LabeledCloud(Matrix points, std::vector<ClassId> labels);

  const Matrix& points() const noexcept { return points_; }
  const std::vector<ClassId>& labels() const noexcept { return labels_; }
  std::size_t dim() const noexcept { return points_.rows(); }
  std::size_t size() const noexcept { return points_.cols(); }
  std::size_t class_count() const noexcept { return class_count_; }

 private:
  Matrix points_;
  std::vector<ClassId> labels_;
  std::size_t class_count_ = 0;
};

/// One perceptual manifold per class: Z_1 ... Z_C, columns are points.
class ManifoldSet {
 public:
  ManifoldSet() = default;
  explicit ManifoldSet(std::vector<Matrix> classes);

  static ManifoldSet from_cloud(const LabeledCloud& cloud);

  std::size_t class_count() const noexcept { return classes_.size(); }
  std::size_t dim() const noexcept { return classes_.empty() ? 0 : classes_.front().rows(); }
  const Matrix& points(std::size_t c) const { return classes_.at(c); }
  Matrix& points(std::size_t c) { return classes_.at(c); }
  std::size_t total_points() const noexcept;

  /// [Z_1 ... Z_C], optionally leaving one class out.
  Matrix stacked(std::ptrdiff_t excluded = -1) const;

 private:
  std::vector<Matrix> classes_;
};

struct SeparationReport {
  std::vector<double> separation;    // S(M^i)
  std::vector<double> class_volume;  // Vol(Z_i)
  double total_volume = 0.0;         // Vol(Z)
};

/// Vol(Z) = 1/2 log2 det(I + Cov(Z)).
double manifold_volume(const Matrix& points, bool center = true);

/// S(M^i) = (Vol(Z) - Vol(Z')) / Vol(Z_i), with Z the union of all classes
/// and Z' the union without class i. Each volume uses its own point count
/// as the covariance normalizer.
double separation_degree(const ManifoldSet& ms, std::size_t i, bool center = true);

/// The same quantity through the determinant-ratio form:
/// log_delta det((I + Cov(Z'))^{-1} (I + Cov(Z))), delta = det(I + Cov(Z_i)).
double separation_degree_closed_form(const ManifoldSet& ms, std::size_t i, bool center = true);

/// S(M^i) and volumes for every class; Vol(Z) is computed once.
SeparationReport separation_all(const ManifoldSet& ms, bool center = true, bool closed_form = false);

}  // namespace mgeom
