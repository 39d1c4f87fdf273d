#include "mgeom/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mgeom/error.hpp"
#include "mgeom/linalg.hpp"
#include "mgeom/parallel.hpp"

namespace mgeom {

namespace {

struct PointResult {
  std::vector<std::size_t> neighbors;
  double kth_distance = 0.0;
  double curvature = std::numeric_limits<double>::quiet_NaN();
  std::size_t tangent_dim = 0;
  bool ok = false;
};

Matrix gather_neighbors(const PointTable& table, std::span<const std::size_t> idx) {
  Matrix out(table.dim(), idx.size());
  for (std::size_t c = 0; c < idx.size(); ++c) {
    const double* p = table.point(idx[c]);
    for (std::size_t r = 0; r < table.dim(); ++r) out(r, c) = p[r];
  }
  return out;
}

double curvature_from_neighbors(std::span<const double> center, const Matrix& neighbors,
                                const CurvatureOptions& opts, std::size_t* tangent_dim) {
  const TangentFrame frame =
      tangent_frame_from_neighbors(center, neighbors, opts.rank_tol, opts.include_center);
  const TangentProjection proj = project_to_tangent(frame, neighbors);
  const QuadricFit fit = fit_quadric(proj.coords, proj.heights, opts.ridge);
  if (tangent_dim) *tangent_dim = frame.dim();
  return symmetric_determinant(fit.theta);
}

PointResult evaluate_point(const PointTable& table, std::size_t i, const CurvatureOptions& opts) {
  PointResult res;
  res.neighbors = table.nearest(i, opts.k);
  res.kth_distance = table.squared_distance(i, res.neighbors.back());
  const Matrix nb = gather_neighbors(table, res.neighbors);
  const std::span<const double> center(table.point(i), table.dim());
  try {
    res.curvature = curvature_from_neighbors(center, nb, opts, &res.tangent_dim);
    res.ok = std::isfinite(res.curvature);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateNeighborhood && e.code() != ErrorCode::FitFailure) throw;
    res.ok = false;
  }
  if (!res.ok) {
    res.curvature = std::numeric_limits<double>::quiet_NaN();
    res.tangent_dim = 0;
  }
  return res;
}

void check_options(std::size_t n, const CurvatureOptions& opts) {
  require(opts.k >= 3, ErrorCode::InvalidInput, "curvature needs k >= 3");
  require(opts.rank_tol > 0.0 && opts.rank_tol < 1.0, ErrorCode::InvalidInput,
          "rank_tol must lie in (0, 1)");
  require(opts.ridge >= 0.0, ErrorCode::InvalidInput, "ridge must be nonnegative");
  require(n >= opts.k + 1, ErrorCode::InsufficientPoints,
          "curvature with k = " + std::to_string(opts.k) + " needs at least " +
              std::to_string(opts.k + 1) + " points, got " + std::to_string(n));
}

// Mean |G| over evaluated points; summation in index order.
template <class GetCurvature, class GetOk>
double complexity_of(std::size_t n, GetCurvature curvature, GetOk ok) {
  std::size_t skipped = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!ok(i)) {
      ++skipped;
      continue;
    }
    sum += std::abs(curvature(i));
  }
  require(2 * skipped <= n, ErrorCode::UnreliableEstimate,
          std::to_string(skipped) + " of " + std::to_string(n) +
              " points have degenerate neighborhoods");
  return sum / static_cast<double>(n - skipped);
}

}  // namespace

TangentFrame tangent_frame_from_neighbors(std::span<const double> center, const Matrix& neighbors,
                                          double rank_tol, bool include_center) {
  const std::size_t p = neighbors.rows();
  const std::size_t k = neighbors.cols();
  require(center.size() == p, ErrorCode::InvalidInput, "tangent frame: dimension mismatch");
  require(k >= 1, ErrorCode::InvalidInput, "tangent frame: no neighbors");

  const std::size_t q = k + (include_center ? 1 : 0);
  std::vector<double> mean(p, 0.0);
  for (std::size_t r = 0; r < p; ++r) {
    double s = include_center ? center[r] : 0.0;
    for (std::size_t c = 0; c < k; ++c) s += neighbors(r, c);
    mean[r] = s / static_cast<double>(q);
  }
  Matrix cov(p, p);
  std::vector<double> dev(p);
  auto accumulate = [&](auto&& coord) {
    for (std::size_t r = 0; r < p; ++r) dev[r] = coord(r) - mean[r];
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t b = a; b < p; ++b) cov(a, b) += dev[a] * dev[b];
  };
  for (std::size_t c = 0; c < k; ++c) accumulate([&](std::size_t r) { return neighbors(r, c); });
  if (include_center) accumulate([&](std::size_t r) { return center[r]; });
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = a; b < p; ++b) {
      cov(a, b) /= static_cast<double>(q);
      cov(b, a) = cov(a, b);
    }

  const SymEigen eig = sym_eigen(cov);
  const double top = eig.eigenvalues.front();
  require(top > 0.0, ErrorCode::DegenerateNeighborhood, "neighbors coincide");
  std::size_t rank = 0;
  for (double v : eig.eigenvalues)
    if (v > rank_tol * top) ++rank;
  require(rank >= 2, ErrorCode::DegenerateNeighborhood,
          "neighborhood has rank " + std::to_string(rank));

  std::size_t m = rank < p ? rank : rank - 1;
  while (m > 1 && m * (m + 1) / 2 > k) --m;

  TangentFrame frame;
  frame.center.assign(center.begin(), center.end());
  frame.normal = eig.eigenvectors.column(m);
  frame.basis.reserve(m);
  for (std::size_t a = 0; a < m; ++a) frame.basis.push_back(eig.eigenvectors.column(a));
  return frame;
}

TangentFrame tangent_frame(const Matrix& points, std::size_t i, std::size_t k, double rank_tol,
                           bool include_center) {
  require(points.all_finite(), ErrorCode::InvalidInput, "tangent frame: non-finite entry");
  require(k >= 3, ErrorCode::InvalidInput, "tangent frame needs k >= 3");
  const PointTable table(points);
  const auto idx = table.nearest(i, k);
  const Matrix nb = gather_neighbors(table, idx);
  return tangent_frame_from_neighbors(std::span<const double>(table.point(i), table.dim()), nb,
                                      rank_tol, include_center);
}

TangentProjection project_to_tangent(const TangentFrame& frame, const Matrix& neighbors) {
  const std::size_t p = frame.center.size();
  require(neighbors.rows() == p, ErrorCode::InvalidInput, "projection: dimension mismatch");
  const std::size_t k = neighbors.cols();
  const std::size_t m = frame.dim();
  TangentProjection out{Matrix(k, m), std::vector<double>(k, 0.0)};
  std::vector<double> d(p);
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t r = 0; r < p; ++r) d[r] = neighbors(r, j) - frame.center[r];
    for (std::size_t a = 0; a < m; ++a) {
      double s = 0.0;
      for (std::size_t r = 0; r < p; ++r) s += d[r] * frame.basis[a][r];
      out.coords(j, a) = s;
    }
    double h = 0.0;
    for (std::size_t r = 0; r < p; ++r) h += d[r] * frame.normal[r];
    out.heights[j] = h;
  }
  return out;
}

QuadricFit fit_quadric(const Matrix& coords, std::span<const double> heights, double ridge) {
  const std::size_t k = coords.rows();
  const std::size_t m = coords.cols();
  require(heights.size() == k, ErrorCode::InvalidInput, "quadric fit: height count mismatch");
  require(m >= 1, ErrorCode::InvalidInput, "quadric fit: empty tangent space");
  const std::size_t q = m * (m + 1) / 2;

  // Monomial j of row t: 1/2 o_a^2 on the diagonal, o_a o_b above it.
  Matrix phi(k, q);
  for (std::size_t t = 0; t < k; ++t) {
    std::size_t col = 0;
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = a; b < m; ++b)
        phi(t, col++) = (a == b ? 0.5 : 1.0) * coords(t, a) * coords(t, b);
  }

  Matrix normal(q, q);
  std::vector<double> rhs(q, 0.0);
  for (std::size_t t = 0; t < k; ++t)
    for (std::size_t x = 0; x < q; ++x) {
      rhs[x] += phi(t, x) * heights[t];
      for (std::size_t y = x; y < q; ++y) normal(x, y) += phi(t, x) * phi(t, y);
    }
  for (std::size_t x = 0; x < q; ++x) {
    normal(x, x) += ridge;
    for (std::size_t y = x + 1; y < q; ++y) normal(y, x) = normal(x, y);
  }

  std::vector<double> coef;
  try {
    coef = solve_spd(normal, rhs);
  } catch (const Error&) {
    fail(ErrorCode::FitFailure, "quadric normal equations are singular");
  }
  for (double c : coef)
    require(std::isfinite(c), ErrorCode::FitFailure, "quadric fit produced non-finite values");

  QuadricFit fit;
  fit.theta = Matrix(m, m);
  std::size_t col = 0;
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a; b < m; ++b) {
      fit.theta(a, b) = coef[col];
      fit.theta(b, a) = coef[col];
      ++col;
    }
  double sse = 0.0;
  for (std::size_t t = 0; t < k; ++t) {
    double pred = 0.0;
    for (std::size_t x = 0; x < q; ++x) pred += phi(t, x) * coef[x];
    sse += (pred - heights[t]) * (pred - heights[t]);
  }
  fit.residual = std::sqrt(sse / static_cast<double>(k));
  return fit;
}

double symmetric_determinant(const Matrix& theta) {
  if (theta.rows() == 1) return theta(0, 0);
  const auto values = sym_eigen(theta).eigenvalues;
  double log_abs = 0.0;
  bool negative = false;
  for (double v : values) {
    if (v == 0.0) return 0.0;
    log_abs += std::log(std::abs(v));
    if (v < 0.0) negative = !negative;
  }
  const double mag = std::exp(log_abs);
  return negative ? -mag : mag;
}

double gauss_curvature_at(const Matrix& points, std::size_t i, const CurvatureOptions& opts) {
  require(points.all_finite(), ErrorCode::InvalidInput, "curvature: non-finite entry");
  check_options(points.cols(), opts);
  const PointTable table(points);
  const auto idx = table.nearest(i, opts.k);
  const Matrix nb = gather_neighbors(table, idx);
  return curvature_from_neighbors(std::span<const double>(table.point(i), table.dim()), nb, opts,
                                  nullptr);
}

CurvatureReport mean_gauss_curvature(const Matrix& points, const CurvatureOptions& opts) {
  require(points.all_finite(), ErrorCode::InvalidInput, "curvature: non-finite entry");
  const std::size_t n = points.cols();
  check_options(n, opts);
  const PointTable table(points);

  std::vector<PointResult> results(n);
  parallel_for(n, [&](std::size_t i) { results[i] = evaluate_point(table, i, opts); });

  CurvatureReport report;
  report.curvature.resize(n);
  report.tangent_dim.resize(n);
  double signed_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    report.curvature[i] = results[i].curvature;
    report.tangent_dim[i] = results[i].tangent_dim;
    if (results[i].ok) signed_sum += results[i].curvature;
    else ++report.skipped;
  }
  report.complexity = complexity_of(
      n, [&](std::size_t i) { return results[i].curvature; },
      [&](std::size_t i) { return results[i].ok; });
  report.signed_mean = signed_sum / static_cast<double>(n - report.skipped);
  return report;
}

CurvatureField::CurvatureField(const Matrix& points, const CurvatureOptions& opts)
    : opts_(opts), table_(points) {
  require(points.all_finite(), ErrorCode::InvalidInput, "curvature: non-finite entry");
  check_options(points.cols(), opts);
  const std::size_t n = table_.size();
  std::vector<PointResult> results(n);
  parallel_for(n, [&](std::size_t i) { results[i] = evaluate_point(table_, i, opts_); });
  entries_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    entries_[i].neighbors = std::move(results[i].neighbors);
    entries_[i].kth_distance = results[i].kth_distance;
    entries_[i].curvature = results[i].curvature;
    entries_[i].ok = results[i].ok;
  }
}

double CurvatureField::complexity() const {
  return complexity_of(
      entries_.size(), [&](std::size_t i) { return entries_[i].curvature; },
      [&](std::size_t i) { return entries_[i].ok; });
}

double CurvatureField::complexity_with_moved(std::size_t j, std::span<const double> position) const {
  const std::size_t n = table_.size();
  require(j < n, ErrorCode::InvalidInput, "moved point index out of range");
  require(position.size() == table_.dim(), ErrorCode::InvalidInput, "moved point dimension");

  PointTable moved = table_;
  std::copy(position.begin(), position.end(), moved.point(j));

  std::vector<std::size_t> affected{j};
  for (std::size_t i = 0; i < n; ++i) {
    if (i == j) continue;
    const Entry& e = entries_[i];
    const bool was_neighbor = std::find(e.neighbors.begin(), e.neighbors.end(), j) != e.neighbors.end();
    if (was_neighbor || moved.squared_distance(i, j) <= e.kth_distance) affected.push_back(i);
  }

  std::vector<double> curvature(n);
  std::vector<char> ok(n);
  for (std::size_t i = 0; i < n; ++i) {
    curvature[i] = entries_[i].curvature;
    ok[i] = entries_[i].ok;
  }
  for (std::size_t i : affected) {
    const PointResult r = evaluate_point(moved, i, opts_);
    curvature[i] = r.curvature;
    ok[i] = r.ok;
  }
  return complexity_of(
      n, [&](std::size_t i) { return curvature[i]; }, [&](std::size_t i) { return ok[i] != 0; });
}

}  // namespace mgeom
