#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <vector>

#include "mgeom/manifold.hpp"
#include "mgeom/matrix.hpp"

namespace mgeom {

struct PoolBatch {
  Matrix features;              // p x b
  std::vector<ClassId> labels;  // b
  std::uint64_t sequence = 0;
};

/// First-in-first-out store of feature batches.
class FeaturePool {
 public:
  explicit FeaturePool(std::size_t dim);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t sample_count() const noexcept { return samples_; }
  std::size_t batch_count() const noexcept { return batches_.size(); }
  bool empty() const noexcept { return batches_.empty(); }
  const std::deque<PoolBatch>& batches() const noexcept { return batches_; }

  /// Appends a batch with the next sequence number and returns that number.
  std::uint64_t enqueue_batch(Matrix features, std::vector<ClassId> labels);
  PoolBatch dequeue_oldest();

  /// Per-class matrices across all stored batches, oldest batch first.
  /// Every class in [0, class_count) must be present.
  ManifoldSet snapshot_by_class(std::size_t class_count) const;

  /// All stored samples as a labeled cloud (for checkpoints).
  LabeledCloud to_cloud() const;

 private:
  std::size_t dim_;
  std::size_t samples_ = 0;
  std::uint64_t next_sequence_ = 0;
  std::deque<PoolBatch> batches_;
};

enum class DcrPhase { Filling, Warmup, Active };
enum class DcrAction { OriginalLoss, CurvatureCombinedLoss };

struct DcrConfig {
  std::size_t capacity = 0;        // M, training samples per epoch
  std::size_t batch_size = 0;      // b
  std::size_t warmup_epochs = 5;   // n
  std::size_t total_epochs = 0;    // N
};

struct DcrState {
  std::size_t epoch = 1;       // 1-based
  std::size_t iteration = 0;   // within the epoch
  DcrPhase phase = DcrPhase::Filling;
};

/// Drives the epoch-gated storage-pool protocol: epoch 1 only fills the
/// pool, epochs 1 < e < n rotate it, and from epoch n on every tick rotates
/// the pool and requests the curvature-regularized loss.
class DcrDriver {
 public:
  explicit DcrDriver(const DcrConfig& config);

  const DcrConfig& config() const noexcept { return config_; }
  const DcrState& state() const noexcept { return state_; }
  std::size_t iterations_per_epoch() const noexcept { return iterations_per_epoch_; }
  bool finished() const noexcept { return state_.epoch > config_.total_epochs; }

  /// One training iteration. The action reflects the epoch the tick belongs
  /// to; the state then advances (the epoch rolls over after M/b ticks).
  DcrAction tick(FeaturePool& pool, Matrix features, std::vector<ClassId> labels);

  static DcrPhase phase_for(std::size_t epoch, std::size_t warmup_epochs) noexcept;

 private:
  DcrConfig config_;
  DcrState state_;
  std::size_t iterations_per_epoch_;
};

}  // namespace mgeom
