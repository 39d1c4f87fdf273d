#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mgeom/knn.hpp"
#include "mgeom/matrix.hpp"

namespace mgeom {

struct CurvatureOptions {
  std::size_t k = 40;
  double rank_tol = 1e-8;  // relative to the largest local eigenvalue
  double ridge = 1e-10;
  // Build the local covariance from [z_i, neighbors] instead of the
  // neighbors alone.
  bool include_center = false;
};

struct TangentFrame {
  std::vector<double> center;              // z_i
  std::vector<double> normal;              // u_i, unit length
  std::vector<std::vector<double>> basis;  // xi_1 .. xi_m, orthonormal
  std::size_t dim() const noexcept { return basis.size(); }
};

struct TangentProjection {
  Matrix coords;                // k x m
  std::vector<double> heights;  // k
};

struct QuadricFit {
  Matrix theta;  // m x m, symmetric
  double residual = 0.0;  // RMS error of the fitted heights
};

struct CurvatureReport {
  std::vector<double> curvature;        // G(z_i); NaN where skipped
  std::vector<std::size_t> tangent_dim; // 0 where skipped
  double signed_mean = 0.0;
  double complexity = 0.0;              // mean |G| over evaluated points
  std::size_t skipped = 0;
  std::size_t evaluated() const noexcept { return curvature.size() - skipped; }
};

/// Local frame at point i from its k nearest neighbors.
///
/// With r eigenvalues of the neighbor covariance above rank_tol * lambda_1,
/// the tangent dimension is r - 1 when r equals the ambient dimension and r
/// otherwise (the neighborhood spans a proper affine subspace), then capped
/// so that m(m+1)/2 <= k. The normal is the eigenvector right after the
/// tangent basis. r < 2 raises DegenerateNeighborhood.
TangentFrame tangent_frame(const Matrix& points, std::size_t i, std::size_t k,
                           double rank_tol = 1e-8, bool include_center = false);

/// Frame from an explicit neighbor set (columns of `neighbors`).
TangentFrame tangent_frame_from_neighbors(std::span<const double> center, const Matrix& neighbors,
                                          double rank_tol = 1e-8, bool include_center = false);

TangentProjection project_to_tangent(const TangentFrame& frame, const Matrix& neighbors);

/// Least-squares fit of heights ~ 1/2 sum_ab theta_ab o[a] o[b] over
/// symmetric theta, solved on the m(m+1)/2 distinct monomials with a
/// Tikhonov term ridge * I.
QuadricFit fit_quadric(const Matrix& coords, std::span<const double> heights, double ridge = 1e-10);

/// Sign-tracked determinant of a symmetric matrix via its eigenvalues.
double symmetric_determinant(const Matrix& theta);

/// G(z_i) = det(theta) of the quadric fitted in the local frame of point i.
double gauss_curvature_at(const Matrix& points, std::size_t i, const CurvatureOptions& opts = {});

/// G(z_i) for every point, skipping degenerate neighborhoods. Throws
/// UnreliableEstimate when more than half the points are skipped.
CurvatureReport mean_gauss_curvature(const Matrix& points, const CurvatureOptions& opts = {});

/// Per-point curvature evaluation that can be re-run cheaply after moving a
/// single point: only points whose neighbor set can change are recomputed.
/// Results are identical to a fresh mean_gauss_curvature on the moved cloud.
class CurvatureField {
 public:
  CurvatureField(const Matrix& points, const CurvatureOptions& opts);

  std::size_t size() const noexcept { return table_.size(); }
  const CurvatureOptions& options() const noexcept { return opts_; }

  /// Complexity (mean |G|) of the current cloud; throws UnreliableEstimate
  /// like mean_gauss_curvature.
  double complexity() const;

  /// Complexity with point j moved to `position`; the field is unchanged.
  double complexity_with_moved(std::size_t j, std::span<const double> position) const;

 private:
  struct Entry {
    std::vector<std::size_t> neighbors;
    double kth_distance = 0.0;  // squared
    double curvature = 0.0;
    bool ok = false;
  };

  CurvatureOptions opts_;
  PointTable table_;
  std::vector<Entry> entries_;
};

}  // namespace mgeom
