#pragma once

#include <cstddef>
#include <vector>

#include "mgeom/matrix.hpp"

namespace mgeom {

/// Indices of the k nearest columns of `points` to column `query_index`,
/// by Euclidean distance, nearest first. The query itself is excluded and
/// ties go to the smaller index. Exact brute force.
std::vector<std::size_t> knn(const Matrix& points, std::size_t query_index, std::size_t k);

/// Point-major copy of a p x n cloud, the layout the neighbor search scans.
class PointTable {
 public:
  PointTable() = default;
  explicit PointTable(const Matrix& points);

  std::size_t size() const noexcept { return count_; }
  std::size_t dim() const noexcept { return dim_; }
  const double* point(std::size_t i) const { return coords_.data() + i * dim_; }
  double* point(std::size_t i) { return coords_.data() + i * dim_; }

  double squared_distance(std::size_t a, std::size_t b) const;

  /// k nearest neighbors of point i; same contract as mgeom::knn.
  std::vector<std::size_t> nearest(std::size_t i, std::size_t k) const;

 private:
  std::size_t dim_ = 0;
  std::size_t count_ = 0;
  std::vector<double> coords_;
};

}  // namespace mgeom
