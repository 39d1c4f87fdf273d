#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mgeom {

struct Fig2Row {
  double distance = 0.0;
  double equal_first = 0.0;   // S of radius-1 sphere A
  double equal_second = 0.0;  // S of radius-1 sphere B
  double small = 0.0;         // S of radius-1 sphere next to radius-1.5 sphere
  double large = 0.0;         // S of radius-1.5 sphere
};

struct Fig2Options {
  std::size_t points = 2000;
  std::size_t steps = 21;
  double max_distance = 10.0;
  double large_radius = 1.5;
  // Draw the second sphere from its own seed instead of reusing the first
  // sphere's directions.
  bool independent_samples = false;
};

/// Separation of two spheres as their centers move apart along x.
std::vector<Fig2Row> run_fig2(std::uint64_t seed, const Fig2Options& options = {});
std::string fig2_csv(const std::vector<Fig2Row>& rows);

struct Fig3Row {
  std::string surface;  // "saddle" or "wave"
  double w = 0.0;
  std::vector<double> complexity;  // one per k
};

struct Fig3Options {
  std::size_t points = 2000;
  std::vector<double> w{0.5, 1.0, 1.5, 2.0};
  std::vector<std::size_t> k{10, 20, 40, 60};
};

/// Complexity of the saddle and wave surfaces over a w x k grid.
std::vector<Fig3Row> run_fig3(std::uint64_t seed, const Fig3Options& options = {});
std::string fig3_csv(const std::vector<Fig3Row>& rows, const Fig3Options& options = {});

/// Final metrics of ce+cr training on imbalanced blobs for several tau.
std::string tau_sweep_csv(std::uint64_t seed, const std::vector<double>& taus = {2, 10, 30, 60, 100, 200});

/// Per-epoch trace of CE training on the default blob benchmark.
std::string dynamics_csv(std::uint64_t seed);

/// Runs one named experiment: fig2, fig3, tau-sweep, dynamics.
std::string run_experiment(const std::string& name, std::uint64_t seed);

}  // namespace mgeom
