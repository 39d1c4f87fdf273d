#include "mgeom/synthetic.hpp"

#include <cmath>
#include <numbers>

#include "mgeom/error.hpp"

namespace mgeom {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

template <class Surface>
Matrix height_field(std::size_t n, std::uint64_t seed, Surface surface) {
  require(n >= 1, ErrorCode::InvalidInput, "need at least one point");
  Rng rng(seed);
  Matrix out(3, n);
  for (std::size_t j = 0; j < n; ++j) {
    const double x = rng.uniform(-1.0, 1.0);
    const double y = rng.uniform(-1.0, 1.0);
    out(0, j) = x;
    out(1, j) = y;
    out(2, j) = surface(x, y);
  }
  return out;
}

}  // namespace

Rng::Rng(std::uint64_t seed) {
  std::uint64_t x = seed;
  for (auto& word : s_) word = splitmix64(x);
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(angle);
  has_spare_ = true;
  return r * std::cos(angle);
}

std::uint64_t Rng::below(std::uint64_t bound) {
  require(bound > 0, ErrorCode::InvalidInput, "Rng::below needs a positive bound");
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = next_u64();
    if (r >= threshold) return r % bound;
  }
}

Matrix sphere_cloud(double radius, std::span<const double> center, std::size_t n,
                    std::uint64_t seed, SphereMode mode) {
  require(radius > 0.0 && std::isfinite(radius), ErrorCode::InvalidInput,
          "sphere radius must be positive");
  require(n >= 1, ErrorCode::InvalidInput, "need at least one point");
  require(!center.empty(), ErrorCode::InvalidInput, "sphere center has no coordinates");
  const std::size_t p = center.size();
  Rng rng(seed);
  Matrix out(p, n);
  std::vector<double> g(p);
  for (std::size_t j = 0; j < n; ++j) {
    double norm = 0.0;
    while (norm == 0.0) {
      norm = 0.0;
      for (double& v : g) {
        v = rng.normal();
        norm += v * v;
      }
      norm = std::sqrt(norm);
    }
    double scale = radius / norm;
    if (mode == SphereMode::Ball) scale *= std::pow(rng.uniform(), 1.0 / static_cast<double>(p));
    for (std::size_t r = 0; r < p; ++r) out(r, j) = center[r] + scale * g[r];
  }
  return out;
}

Matrix saddle_cloud(double w, std::size_t n, std::uint64_t seed) {
  return height_field(n, seed, [w](double x, double y) { return w * (x * x - y * y); });
}

Matrix wave_cloud(double w, std::size_t n, std::uint64_t seed) {
  return height_field(n, seed, [w](double x, double) {
    return std::sin(std::sin(0.5 * w * x)) + std::cos(std::cos(0.5 * w * x));
  });
}

Matrix plane_cloud(std::size_t n, std::uint64_t seed) {
  return height_field(n, seed, [](double, double) { return 0.0; });
}

LabeledCloud gaussian_blobs(std::span<const std::size_t> counts,
                            const std::vector<std::vector<double>>& means, double sigma,
                            std::uint64_t seed) {
  require(!counts.empty(), ErrorCode::InvalidInput, "no classes requested");
  require(counts.size() == means.size(), ErrorCode::InvalidInput, "one mean per class");
  require(sigma >= 0.0 && std::isfinite(sigma), ErrorCode::InvalidInput, "sigma must be >= 0");
  const std::size_t p = means.front().size();
  require(p >= 1, ErrorCode::InvalidInput, "blob means have no coordinates");
  std::size_t total = 0;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    require(counts[c] >= 1, ErrorCode::InvalidInput, "every class needs at least one point");
    require(means[c].size() == p, ErrorCode::InvalidInput, "blob means disagree on dimension");
    total += counts[c];
  }
  Rng rng(seed);
  Matrix points(p, total);
  std::vector<ClassId> labels;
  labels.reserve(total);
  std::size_t at = 0;
  for (std::size_t c = 0; c < counts.size(); ++c)
    for (std::size_t j = 0; j < counts[c]; ++j, ++at) {
      for (std::size_t r = 0; r < p; ++r) points(r, at) = means[c][r] + sigma * rng.normal();
      labels.push_back(static_cast<ClassId>(c));
    }
  return LabeledCloud(std::move(points), std::move(labels));
}

}  // namespace mgeom
