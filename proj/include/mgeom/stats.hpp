#pragma once

#include <span>

namespace mgeom {

/// Pearson correlation; throws UndefinedCorrelation for constant inputs.
double pearson(std::span<const double> x, std::span<const double> y);

/// Spearman rank correlation (Pearson over average ranks).
double spearman(std::span<const double> x, std::span<const double> y);

/// Population variance of per-class accuracies in [0, 1].
double accuracy_variance(std::span<const double> acc);

/// max(max_c A_c / (min_c A_c + eps) - 1, 0).
double accuracy_bias_ratio(std::span<const double> acc, double eps = 1e-12);

double mean(std::span<const double> x);

/// Population variance, no range restriction.
double variance(std::span<const double> x);

}  // namespace mgeom
