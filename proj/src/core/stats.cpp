#include "mgeom/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "mgeom/error.hpp"

namespace mgeom {

namespace {

void require_finite(std::span<const double> x, const char* what) {
  for (double v : x)
    require(std::isfinite(v), ErrorCode::InvalidInput, std::string(what) + ": non-finite value");
}

void require_accuracies(std::span<const double> acc, const char* what) {
  require(!acc.empty(), ErrorCode::InvalidInput, std::string(what) + ": empty input");
  for (double a : acc)
    require(a >= 0.0 && a <= 1.0, ErrorCode::InvalidInput,
            std::string(what) + ": accuracy outside [0, 1]");
}

bool is_constant(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); });
}

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double mean(std::span<const double> x) {
  require(!x.empty(), ErrorCode::InvalidInput, "mean: empty input");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
  const double mu = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - mu) * (v - mu);
  return s / static_cast<double>(x.size());
}

double pearson(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), ErrorCode::InvalidInput, "pearson: length mismatch");
  require(x.size() >= 2, ErrorCode::InvalidInput, "pearson: need at least two pairs");
  require_finite(x, "pearson");
  require_finite(y, "pearson");
  require(!is_constant(x) && !is_constant(y), ErrorCode::UndefinedCorrelation,
          "pearson: constant sequence");

  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  require(sxx > 0.0 && syy > 0.0, ErrorCode::UndefinedCorrelation, "pearson: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double spearman(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), ErrorCode::InvalidInput, "spearman: length mismatch");
  require_finite(x, "spearman");
  require_finite(y, "spearman");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

double accuracy_variance(std::span<const double> acc) {
  require_accuracies(acc, "accuracy_variance");
  return variance(acc);
}

double accuracy_bias_ratio(std::span<const double> acc, double eps) {
  require_accuracies(acc, "accuracy_bias_ratio");
  require(eps > 0.0 && std::isfinite(eps), ErrorCode::InvalidInput,
          "accuracy_bias_ratio: eps must be positive");
  const auto [lo, hi] = std::minmax_element(acc.begin(), acc.end());
  return std::max(*hi / (*lo + eps) - 1.0, 0.0);
}

}  // namespace mgeom
