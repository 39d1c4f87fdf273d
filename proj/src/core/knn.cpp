#include "mgeom/knn.hpp"

#include <algorithm>
#include <utility>

#include "mgeom/error.hpp"

namespace mgeom {

PointTable::PointTable(const Matrix& points)
    : dim_(points.rows()), count_(points.cols()), coords_(points.rows() * points.cols()) {
  for (std::size_t r = 0; r < dim_; ++r)
    for (std::size_t c = 0; c < count_; ++c) coords_[c * dim_ + r] = points(r, c);
}

double PointTable::squared_distance(std::size_t a, std::size_t b) const {
  const double* pa = point(a);
  const double* pb = point(b);
  double s = 0.0;
  for (std::size_t d = 0; d < dim_; ++d) {
    const double diff = pa[d] - pb[d];
    s += diff * diff;
  }
  return s;
}

std::vector<std::size_t> PointTable::nearest(std::size_t i, std::size_t k) const {
  require(i < count_, ErrorCode::InvalidInput, "knn: query index out of range");
  require(k >= 1, ErrorCode::InvalidInput, "knn: k must be at least 1");
  require(k < count_, ErrorCode::InsufficientPoints,
          "knn: k = " + std::to_string(k) + " needs more than " + std::to_string(count_) +
              " points");

  std::vector<std::pair<double, std::size_t>> cand;
  cand.reserve(count_ - 1);
  for (std::size_t j = 0; j < count_; ++j)
    if (j != i) cand.emplace_back(squared_distance(i, j), j);

  auto nth = cand.begin() + static_cast<std::ptrdiff_t>(k);
  if (nth != cand.end()) std::nth_element(cand.begin(), nth - 1, cand.end());
  std::sort(cand.begin(), nth);

  std::vector<std::size_t> out(k);
  for (std::size_t j = 0; j < k; ++j) out[j] = cand[j].second;
  return out;
}

std::vector<std::size_t> knn(const Matrix& points, std::size_t query_index, std::size_t k) {
  require(points.all_finite(), ErrorCode::InvalidInput, "knn: non-finite entry");
  return PointTable(points).nearest(query_index, k);
}

}  // namespace mgeom
