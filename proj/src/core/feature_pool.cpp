#include "mgeom/feature_pool.hpp"

#include "mgeom/error.hpp"

namespace mgeom {

FeaturePool::FeaturePool(std::size_t dim) : dim_(dim) {
  require(dim >= 1, ErrorCode::InvalidInput, "pool dimension must be positive");
}

std::uint64_t FeaturePool::enqueue_batch(Matrix features, std::vector<ClassId> labels) {
  require(features.rows() == dim_, ErrorCode::InvalidInput,
          "batch dimension " + std::to_string(features.rows()) + " does not match pool dimension " +
              std::to_string(dim_));
  require(features.cols() >= 1, ErrorCode::InvalidInput, "empty batch");
  require(labels.size() == features.cols(), ErrorCode::InvalidInput,
          "batch label count does not match feature count");
  for (ClassId c : labels) require(c >= 0, ErrorCode::InvalidInput, "negative class id");
  const std::uint64_t seq = next_sequence_++;
  samples_ += features.cols();
  batches_.push_back({std::move(features), std::move(labels), seq});
  return seq;
}

PoolBatch FeaturePool::dequeue_oldest() {
  require(!batches_.empty(), ErrorCode::EmptyPool, "dequeue from an empty pool");
  PoolBatch out = std::move(batches_.front());
  batches_.pop_front();
  samples_ -= out.features.cols();
  return out;
}

ManifoldSet FeaturePool::snapshot_by_class(std::size_t class_count) const {
  require(!batches_.empty(), ErrorCode::IncompletePool, "pool is empty");
  require(class_count >= 1, ErrorCode::InvalidInput, "class count must be positive");
  std::vector<std::size_t> counts(class_count, 0);
  for (const auto& b : batches_)
    for (ClassId c : b.labels) {
      require(static_cast<std::size_t>(c) < class_count, ErrorCode::InvalidInput,
              "pool holds class id " + std::to_string(c) + " outside [0, C)");
      ++counts[static_cast<std::size_t>(c)];
    }
  std::vector<Matrix> classes;
  classes.reserve(class_count);
  for (std::size_t c = 0; c < class_count; ++c) {
    require(counts[c] > 0, ErrorCode::IncompletePool,
            "pool holds no features of class " + std::to_string(c));
    classes.emplace_back(dim_, counts[c]);
  }
  std::vector<std::size_t> at(class_count, 0);
  for (const auto& b : batches_)
    for (std::size_t j = 0; j < b.labels.size(); ++j) {
      const auto c = static_cast<std::size_t>(b.labels[j]);
      for (std::size_t r = 0; r < dim_; ++r) classes[c](r, at[c]) = b.features(r, j);
      ++at[c];
    }
  return ManifoldSet(std::move(classes));
}

LabeledCloud FeaturePool::to_cloud() const {
  require(!batches_.empty(), ErrorCode::EmptyPool, "pool is empty");
  Matrix points(dim_, samples_);
  std::vector<ClassId> labels;
  labels.reserve(samples_);
  std::size_t at = 0;
  for (const auto& b : batches_) {
    for (std::size_t j = 0; j < b.labels.size(); ++j, ++at) {
      for (std::size_t r = 0; r < dim_; ++r) points(r, at) = b.features(r, j);
      labels.push_back(b.labels[j]);
    }
  }
  return LabeledCloud(std::move(points), std::move(labels));
}

DcrDriver::DcrDriver(const DcrConfig& config) : config_(config) {
  require(config.capacity >= 1, ErrorCode::InvalidInput, "pool capacity must be positive");
  require(config.batch_size >= 1, ErrorCode::InvalidInput, "batch size must be positive");
  require(config.warmup_epochs >= 2, ErrorCode::InvalidInput, "warmup epochs must be at least 2");
  require(config.total_epochs >= 1, ErrorCode::InvalidInput, "total epochs must be positive");
  iterations_per_epoch_ = (config.capacity + config.batch_size - 1) / config.batch_size;
  state_.phase = phase_for(1, config.warmup_epochs);
}

DcrPhase DcrDriver::phase_for(std::size_t epoch, std::size_t warmup_epochs) noexcept {
  if (epoch <= 1) return DcrPhase::Filling;
  if (epoch < warmup_epochs) return DcrPhase::Warmup;
  return DcrPhase::Active;
}

DcrAction DcrDriver::tick(FeaturePool& pool, Matrix features, std::vector<ClassId> labels) {
  require(!finished(), ErrorCode::InvalidState,
          "tick after the final epoch " + std::to_string(config_.total_epochs));
  const DcrPhase phase = state_.phase;
  if (phase != DcrPhase::Filling) {
    require(!pool.empty(), ErrorCode::InvalidState, "pool is empty after the filling epoch");
    pool.dequeue_oldest();
  }
  pool.enqueue_batch(std::move(features), std::move(labels));
  const DcrAction action =
      phase == DcrPhase::Active ? DcrAction::CurvatureCombinedLoss : DcrAction::OriginalLoss;

  if (++state_.iteration == iterations_per_epoch_) {
    state_.iteration = 0;
    ++state_.epoch;
    state_.phase = phase_for(state_.epoch, config_.warmup_epochs);
  }
  return action;
}

}  // namespace mgeom
