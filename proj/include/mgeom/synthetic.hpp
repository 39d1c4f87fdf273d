#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mgeom/manifold.hpp"
#include "mgeom/matrix.hpp"

namespace mgeom {

/// xoshiro256** seeded through splitmix64. Output streams are fixed by
/// reference vectors in the tests.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal (Box-Muller, both outputs used).
  double normal();
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::array<std::uint64_t, 4> s_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

enum class SphereMode { Surface, Ball };

Matrix sphere_cloud(double radius, std::span<const double> center, std::size_t n,
                    std::uint64_t seed, SphereMode mode = SphereMode::Surface);

/// Z = w (X^2 - Y^2), X and Y uniform on [-1, 1].
Matrix saddle_cloud(double w, std::size_t n, std::uint64_t seed);

/// Z = sin(sin(0.5 w X)) + cos(cos(0.5 w X)), X and Y uniform on [-1, 1].
Matrix wave_cloud(double w, std::size_t n, std::uint64_t seed);

/// Points of the z = 0 plane, X and Y uniform on [-1, 1].
Matrix plane_cloud(std::size_t n, std::uint64_t seed);

/// Isotropic Gaussian blob per class; columns are grouped by class.
LabeledCloud gaussian_blobs(std::span<const std::size_t> counts,
                            const std::vector<std::vector<double>>& means, double sigma,
                            std::uint64_t seed);

}  // namespace mgeom
