#include "mgeom/regularization.hpp"

#include <algorithm>
#include <cmath>

#include "mgeom/error.hpp"
#include "mgeom/parallel.hpp"

namespace mgeom {

CurvatureVector::CurvatureVector(std::vector<double> g) : g_(std::move(g)) {
  require(!g_.empty(), ErrorCode::InvalidCurvature, "curvature vector is empty");
  for (double v : g_)
    require(std::isfinite(v) && v > 0.0, ErrorCode::InvalidCurvature,
            "curvatures must be positive and finite");
}

std::vector<double> curvature_penalties(const CurvatureVector& g) {
  // max_j 1/G_j = 1/min_j G_j, so the normalized inverse is min G / G_i.
  const auto values = g.values();
  const double log_min = std::log(*std::min_element(values.begin(), values.end()));
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = std::log(values[i]) - log_min;
  return out;
}

double l_curvature(const CurvatureVector& g) {
  double sum = 0.0;
  for (double p : curvature_penalties(g)) sum += p;
  return sum;
}

CombinedLoss combined_loss(double l_original, double l_curv, const LossSchedule& sched) {
  require(sched.tau > 1.0 && std::isfinite(sched.tau), ErrorCode::InvalidSchedule,
          "tau must be greater than 1");
  require(sched.epoch >= 1, ErrorCode::InvalidSchedule, "epoch must be at least 1");
  require(std::isfinite(l_original) && l_original > 0.0, ErrorCode::InvalidInput,
          "original loss must be positive");
  require(std::isfinite(l_curv) && l_curv >= 0.0, ErrorCode::InvalidInput,
          "curvature loss must be nonnegative");
  if (l_curv == 0.0) return {l_original, 0.0};
  const double log_tau_epoch = std::log(static_cast<double>(sched.epoch)) / std::log(sched.tau);
  CombinedLoss out;
  out.weight = log_tau_epoch / (l_curv / l_original);
  out.total = l_original + out.weight * l_curv;
  return out;
}

CurvatureGradient l_curvature_grad_fd(
    const ManifoldSet& ms, const CurvatureOptions& opts, double h,
    const std::optional<std::vector<std::vector<std::size_t>>>& active) {
  require(h > 0.0 && std::isfinite(h), ErrorCode::InvalidInput, "step must be positive");
  const std::size_t c = ms.class_count();
  if (active) require(active->size() == c, ErrorCode::InvalidInput, "active set per class");

  std::vector<CurvatureField> fields;
  fields.reserve(c);
  std::vector<double> base(c);
  for (std::size_t i = 0; i < c; ++i) {
    fields.emplace_back(ms.points(i), opts);
    base[i] = fields.back().complexity();
  }

  CurvatureGradient out;
  out.loss = l_curvature(CurvatureVector(base));
  out.gradient.reserve(c);
  out.missing.resize(c);

  struct Task {
    std::size_t cls, col, coord;
  };
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < c; ++i) {
    const Matrix& z = ms.points(i);
    out.gradient.emplace_back(z.rows(), z.cols());
    out.missing[i].assign(z.cols(), false);
    std::vector<std::size_t> cols;
    if (active) {
      cols = (*active)[i];
    } else {
      cols.resize(z.cols());
      for (std::size_t j = 0; j < z.cols(); ++j) cols[j] = j;
    }
    for (std::size_t j : cols) {
      require(j < z.cols(), ErrorCode::InvalidInput, "active column out of range");
      for (std::size_t d = 0; d < z.rows(); ++d) tasks.push_back({i, j, d});
    }
  }

  std::vector<double> value(tasks.size(), 0.0);
  std::vector<char> failed(tasks.size(), 0);
  parallel_for(tasks.size(), [&](std::size_t t) {
    const Task& task = tasks[t];
    const Matrix& z = ms.points(task.cls);
    std::vector<double> pos = z.column(task.col);
    const double x0 = pos[task.coord];
    auto loss_at = [&](double x) {
      pos[task.coord] = x;
      std::vector<double> g = base;
      g[task.cls] = fields[task.cls].complexity_with_moved(task.col, pos);
      return l_curvature(CurvatureVector(std::move(g)));
    };
    try {
      const double up = loss_at(x0 + h);
      const double down = loss_at(x0 - h);
      value[t] = (up - down) / (2.0 * h);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::UnreliableEstimate && e.code() != ErrorCode::InvalidCurvature)
        throw;
      failed[t] = 1;
    }
  });

  for (std::size_t t = 0; t < tasks.size(); ++t) {
    const Task& task = tasks[t];
    if (failed[t]) {
      if (!out.missing[task.cls][task.col]) ++out.missing_count;
      out.missing[task.cls][task.col] = true;
    } else {
      out.gradient[task.cls](task.coord, task.col) = value[t];
    }
  }
  return out;
}

}  // namespace mgeom
