#include "mgeom/experiments.hpp"

#include <array>
#include <cmath>

#include "mgeom/curvature.hpp"
#include "mgeom/error.hpp"
#include "mgeom/io.hpp"
#include "mgeom/manifold.hpp"
#include "mgeom/parallel.hpp"
#include "mgeom/synthetic.hpp"
#include "mgeom/trainer.hpp"

namespace mgeom {

namespace {

Matrix shifted(const Matrix& unit, double radius, double x) {
  Matrix out = unit;
  for (std::size_t j = 0; j < out.cols(); ++j) {
    for (std::size_t r = 0; r < out.rows(); ++r) out(r, j) *= radius;
    out(0, j) += x;
  }
  return out;
}

double separation_of(const Matrix& a, const Matrix& b, std::size_t i) {
  return separation_degree(ManifoldSet({a, b}), i, true);
}

}  // namespace

std::vector<Fig2Row> run_fig2(std::uint64_t seed, const Fig2Options& options) {
  require(options.steps >= 2, ErrorCode::InvalidInput, "fig2 needs at least two steps");
  require(options.points >= 2, ErrorCode::InvalidInput, "fig2 needs at least two points per sphere");
  require(options.large_radius > 0.0 && options.max_distance >= 0.0, ErrorCode::InvalidInput,
          "fig2 radius and distance must be positive");
  const std::array<double, 3> origin{0.0, 0.0, 0.0};
  const Matrix first = sphere_cloud(1.0, origin, options.points, seed);
  const Matrix second =
      options.independent_samples ? sphere_cloud(1.0, origin, options.points, seed + 1) : first;

  std::vector<Fig2Row> rows(options.steps);
  parallel_for(options.steps, [&](std::size_t s) {
    const double d = options.max_distance * static_cast<double>(s) /
                     static_cast<double>(options.steps - 1);
    const Matrix a = shifted(first, 1.0, -0.5 * d);
    const Matrix b = shifted(second, 1.0, 0.5 * d);
    const Matrix big = shifted(second, options.large_radius, 0.5 * d);
    Fig2Row& row = rows[s];
    row.distance = d;
    row.equal_first = separation_of(a, b, 0);
    row.equal_second = separation_of(a, b, 1);
    row.small = separation_of(a, big, 0);
    row.large = separation_of(a, big, 1);
  });
  return rows;
}

std::string fig2_csv(const std::vector<Fig2Row>& rows) {
  std::string out = "distance,equal_first,equal_second,small,large\n";
  for (const auto& r : rows)
    out += format_real(r.distance) + "," + format_real(r.equal_first) + "," +
           format_real(r.equal_second) + "," + format_real(r.small) + "," + format_real(r.large) +
           "\n";
  return out;
}

std::vector<Fig3Row> run_fig3(std::uint64_t seed, const Fig3Options& options) {
  std::vector<Fig3Row> rows;
  for (const char* surface : {"saddle", "wave"})
    for (double w : options.w) rows.push_back({surface, w, std::vector<double>(options.k.size())});

  const std::size_t kc = options.k.size();
  parallel_for(rows.size() * kc, [&](std::size_t task) {
    Fig3Row& row = rows[task / kc];
    const Matrix cloud = row.surface == "saddle" ? saddle_cloud(row.w, options.points, seed)
                                                 : wave_cloud(row.w, options.points, seed);
    CurvatureOptions opts;
    opts.k = options.k[task % kc];
    row.complexity[task % kc] = mean_gauss_curvature(cloud, opts).complexity;
  });
  return rows;
}

std::string fig3_csv(const std::vector<Fig3Row>& rows, const Fig3Options& options) {
  std::string out = "surface,w";
  for (std::size_t k : options.k) out += ",k" + std::to_string(k);
  out += "\n";
  for (const auto& r : rows) {
    out += r.surface + "," + format_real(r.w);
    for (double c : r.complexity) out += "," + format_real(c);
    out += "\n";
  }
  return out;
}

std::string tau_sweep_csv(std::uint64_t seed, const std::vector<double>& taus) {
  std::string out = "tau,final_mean_accuracy,acc_variance,curvature_variance,bias_ratio\n";
  for (double tau : taus) {
    TrainConfig cfg;
    cfg.mode = TrainMode::CeCr;
    cfg.seed = seed;
    cfg.tau = tau;
    cfg.data.counts = {300, 100, 30};
    const TrainingTrace trace = train(cfg);
    const TraceSummary s = summarize(trace, cfg.early_epoch);
    out += format_real(tau) + "," + format_real(s.final_mean_accuracy) + "," +
           format_real(s.final_accuracy_variance) + "," + format_real(s.final_curvature_variance) +
           "," + format_real(trace.epochs.back().bias_ratio) + "\n";
  }
  return out;
}

std::string dynamics_csv(std::uint64_t seed) {
  TrainConfig cfg;
  cfg.seed = seed;
  return trace_csv(train(cfg));
}

std::string run_experiment(const std::string& name, std::uint64_t seed) {
  if (name == "fig2") return fig2_csv(run_fig2(seed));
  if (name == "fig3") return fig3_csv(run_fig3(seed));
  if (name == "tau-sweep") return tau_sweep_csv(seed);
  if (name == "dynamics") return dynamics_csv(seed);
  fail(ErrorCode::InvalidInput, "unknown experiment '" + name + "'");
}

}  // namespace mgeom
