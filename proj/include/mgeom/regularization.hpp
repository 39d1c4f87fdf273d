#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "mgeom/curvature.hpp"
#include "mgeom/manifold.hpp"

namespace mgeom {

/// Per-class mean Gauss curvatures G_1 .. G_C, all positive and finite.
class CurvatureVector {
 public:
  explicit CurvatureVector(std::vector<double> g);
  std::span<const double> values() const noexcept { return g_; }
  std::size_t size() const noexcept { return g_.size(); }

 private:
  std::vector<double> g_;
};

struct LossSchedule {
  double tau = 100.0;
  std::size_t epoch = 1;
};

struct CombinedLoss {
  double total = 0.0;
  double weight = 0.0;  // gradient-free multiplier applied to L_curvature
};

/// -ln((1/G_i) / max_j (1/G_j)) = ln G_i - ln min_j G_j.
std::vector<double> curvature_penalties(const CurvatureVector& g);

/// Sum of the curvature penalties.
double l_curvature(const CurvatureVector& g);

/// L = L_original + (log_tau(epoch) / (L_curv / L_original)) * L_curv, with
/// the ratio held constant. L_curv = 0 returns L_original with zero weight.
CombinedLoss combined_loss(double l_original, double l_curv, const LossSchedule& sched);

struct CurvatureGradient {
  double loss = 0.0;               // L_curvature at the unperturbed features
  std::vector<Matrix> gradient;    // per class, same shape as the class matrix
  std::vector<std::vector<bool>> missing;  // per class, per column
  std::size_t missing_count = 0;
};

/// Central-difference gradient of L_curvature(complexity of each class)
/// with respect to the feature coordinates.
///
/// `active` optionally restricts the differentiated columns per class
/// (others get zero gradient and are not marked missing). A coordinate whose
/// perturbed evaluation fails is marked missing and left at zero. Throws if
/// the unperturbed curvature evaluation itself fails.
CurvatureGradient l_curvature_grad_fd(
    const ManifoldSet& ms, const CurvatureOptions& opts, double h,
    const std::optional<std::vector<std::vector<std::size_t>>>& active = std::nullopt);

}  // namespace mgeom
