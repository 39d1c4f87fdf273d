#include "mgeom/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "mgeom/curvature.hpp"
#include "mgeom/feature_pool.hpp"
#include "mgeom/regularization.hpp"
#include "mgeom/stats.hpp"
#include "mgeom/synthetic.hpp"

namespace mgeom {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kInitStream = 0x1f83d9abfb41bd6bULL;
constexpr std::uint64_t kShuffleStream = 0x5be0cd19137e2179ULL;
constexpr std::uint64_t kSplitStream = 0x9b05688c2b3e6c1fULL;

double activate(Activation a, double x) {
  switch (a) {
    case Activation::Tanh: return std::tanh(x);
    case Activation::Relu: return x > 0.0 ? x : 0.0;
    case Activation::Identity: return x;
  }
  return x;
}

// Derivative expressed through the activation output.
double activate_grad(Activation a, double y) {
  switch (a) {
    case Activation::Tanh: return 1.0 - y * y;
    case Activation::Relu: return y > 0.0 ? 1.0 : 0.0;
    case Activation::Identity: return 1.0;
  }
  return 1.0;
}

double nan_mean(std::span<const double> v) {
  double s = 0.0;
  std::size_t n = 0;
  for (double x : v)
    if (std::isfinite(x)) {
      s += x;
      ++n;
    }
  return n == 0 ? kNaN : s / static_cast<double>(n);
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

double pearson_or_nan(std::span<const double> x, std::span<const double> y) {
  if (!all_finite(x) || !all_finite(y)) return kNaN;
  try {
    return pearson(x, y);
  } catch (const Error&) {
    return kNaN;
  }
}

std::vector<double> per_class_accuracy(const Mlp& mlp, const LabeledCloud& data) {
  const ForwardPass pass = forward(mlp, data.points());
  const std::size_t c = data.class_count();
  std::vector<double> hit(c, 0.0), total(c, 0.0);
  for (std::size_t j = 0; j < data.size(); ++j) {
    std::size_t best = 0;
    for (std::size_t r = 1; r < pass.logits.rows(); ++r)
      if (pass.logits(r, j) > pass.logits(best, j)) best = r;
    const auto y = static_cast<std::size_t>(data.labels()[j]);
    total[y] += 1.0;
    if (best == y) hit[y] += 1.0;
  }
  std::vector<double> acc(c);
  for (std::size_t i = 0; i < c; ++i) acc[i] = hit[i] / total[i];
  return acc;
}

EpochRecord measure_epoch(const TrainConfig& config, const Mlp& mlp, const DataSplit& split) {
  EpochRecord rec;
  rec.accuracy = per_class_accuracy(mlp, split.holdout);
  const std::size_t c = split.train.class_count();

  const ForwardPass pass = forward(mlp, split.train.points());
  const ManifoldSet ms = ManifoldSet::from_cloud(LabeledCloud(pass.features, split.train.labels()));

  rec.separation.assign(c, kNaN);
  try {
    rec.separation = separation_all(ms, true).separation;
  } catch (const Error&) {
    for (std::size_t i = 0; i < c; ++i) {
      try {
        rec.separation[i] = separation_degree(ms, i, true);
      } catch (const Error&) {
      }
    }
  }

  CurvatureOptions opts;
  opts.k = config.k;
  rec.complexity.assign(c, kNaN);
  for (std::size_t i = 0; i < c; ++i) {
    try {
      rec.complexity[i] = mean_gauss_curvature(ms.points(i), opts).complexity;
    } catch (const Error&) {
    }
  }

  rec.pcc_accuracy_separation = pearson_or_nan(rec.accuracy, rec.separation);
  rec.pcc_accuracy_complexity = pearson_or_nan(rec.accuracy, rec.complexity);
  rec.accuracy_variance = accuracy_variance(rec.accuracy);
  rec.bias_ratio = accuracy_bias_ratio(rec.accuracy);
  return rec;
}

}  // namespace

Mlp::Mlp(const std::vector<std::size_t>& sizes, Activation hidden, Activation feature,
         std::uint64_t seed) {
  require(sizes.size() >= 3, ErrorCode::InvalidInput,
          "network needs an input, at least one hidden layer and an output");
  for (std::size_t s : sizes) require(s >= 1, ErrorCode::InvalidInput, "empty layer");
  require(sizes[sizes.size() - 2] >= 2, ErrorCode::InvalidInput, "feature dimension must be >= 2");
  Rng rng(seed);
  const std::size_t count = sizes.size() - 1;
  for (std::size_t l = 0; l < count; ++l) {
    DenseLayer layer;
    layer.weight = Matrix(sizes[l + 1], sizes[l]);
    layer.bias.assign(sizes[l + 1], 0.0);
    layer.activation = l + 1 == count ? Activation::Identity : (l + 2 == count ? feature : hidden);
    const double bound = 1.0 / std::sqrt(static_cast<double>(sizes[l]));
    for (double& w : layer.weight.values()) w = rng.uniform(-bound, bound);
    for (double& b : layer.bias) b = rng.uniform(-bound, bound);
    layers_.push_back(std::move(layer));
  }
}

Mlp::Mlp(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  require(layers_.size() >= 2, ErrorCode::InvalidInput, "network needs at least two layers");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    require(layers_[l].bias.size() == layers_[l].weight.rows(), ErrorCode::InvalidInput,
            "bias length mismatch");
    if (l > 0)
      require(layers_[l].weight.cols() == layers_[l - 1].weight.rows(), ErrorCode::InvalidInput,
              "layer shapes do not chain");
  }
}

ForwardPass forward(const Mlp& mlp, const Matrix& inputs) {
  require(inputs.rows() == mlp.input_dim(), ErrorCode::InvalidInput,
          "input dimension " + std::to_string(inputs.rows()) + " does not match network input " +
              std::to_string(mlp.input_dim()));
  ForwardPass pass;
  pass.activations.push_back(inputs);
  for (const DenseLayer& layer : mlp.layers()) {
    Matrix z = layer.weight * pass.activations.back();
    for (std::size_t r = 0; r < z.rows(); ++r)
      for (std::size_t c = 0; c < z.cols(); ++c)
        z(r, c) = activate(layer.activation, z(r, c) + layer.bias[r]);
    pass.activations.push_back(std::move(z));
  }
  pass.features = pass.activations[pass.activations.size() - 2];
  pass.logits = pass.activations.back();

  pass.probabilities = Matrix(pass.logits.rows(), pass.logits.cols());
  for (std::size_t c = 0; c < pass.logits.cols(); ++c) {
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < pass.logits.rows(); ++r) top = std::max(top, pass.logits(r, c));
    double sum = 0.0;
    for (std::size_t r = 0; r < pass.logits.rows(); ++r) {
      const double e = std::exp(pass.logits(r, c) - top);
      pass.probabilities(r, c) = e;
      sum += e;
    }
    for (std::size_t r = 0; r < pass.logits.rows(); ++r) pass.probabilities(r, c) /= sum;
  }
  return pass;
}

double cross_entropy(const ForwardPass& pass, const std::vector<ClassId>& labels) {
  const std::size_t b = pass.logits.cols();
  require(labels.size() == b && b > 0, ErrorCode::InvalidInput, "label count mismatch");
  double sum = 0.0;
  for (std::size_t c = 0; c < b; ++c) {
    const auto y = static_cast<std::size_t>(labels[c]);
    require(y < pass.logits.rows(), ErrorCode::InvalidInput, "label outside class range");
    // log-sum-exp of the logits minus the true logit
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < pass.logits.rows(); ++r) top = std::max(top, pass.logits(r, c));
    double s = 0.0;
    for (std::size_t r = 0; r < pass.logits.rows(); ++r) s += std::exp(pass.logits(r, c) - top);
    sum += top + std::log(s) - pass.logits(y, c);
  }
  return sum / static_cast<double>(b);
}

MlpGradients backward_ce(const Mlp& mlp, const Matrix& inputs, const std::vector<ClassId>& labels,
                         const Matrix* extra_feature_grad) {
  const ForwardPass pass = forward(mlp, inputs);
  const std::size_t b = inputs.cols();
  require(b >= 1, ErrorCode::InvalidInput, "empty batch");
  require(labels.size() == b, ErrorCode::InvalidInput, "label count mismatch");
  if (extra_feature_grad)
    require(extra_feature_grad->rows() == mlp.feature_dim() && extra_feature_grad->cols() == b,
            ErrorCode::InvalidInput, "extra feature gradient has the wrong shape");

  const auto& layers = mlp.layers();
  const std::size_t count = layers.size();
  MlpGradients grads;
  grads.weight.resize(count);
  grads.bias.resize(count);

  // dL/d(pre-activation) of the classifier layer.
  Matrix delta = pass.probabilities;
  for (std::size_t c = 0; c < b; ++c) {
    const auto y = static_cast<std::size_t>(labels[c]);
    require(y < delta.rows(), ErrorCode::InvalidInput, "label outside class range");
    delta(y, c) -= 1.0;
  }
  const double inv_b = 1.0 / static_cast<double>(b);
  for (double& v : delta.values()) v *= inv_b;

  for (std::size_t l = count; l-- > 0;) {
    const Matrix& input = pass.activations[l];
    grads.weight[l] = delta * input.transposed();
    grads.bias[l].assign(delta.rows(), 0.0);
    for (std::size_t r = 0; r < delta.rows(); ++r)
      for (std::size_t c = 0; c < b; ++c) grads.bias[l][r] += delta(r, c);
    if (l == 0) break;

    Matrix upstream = layers[l].weight.transposed() * delta;  // dL/d activations[l]
    if (l == count - 1 && extra_feature_grad) upstream = upstream + *extra_feature_grad;
    const Activation act = layers[l - 1].activation;
    for (std::size_t r = 0; r < upstream.rows(); ++r)
      for (std::size_t c = 0; c < b; ++c) upstream(r, c) *= activate_grad(act, input(r, c));
    delta = std::move(upstream);
  }
  return grads;
}

void sgd_step(Mlp& mlp, const MlpGradients& grads, double learning_rate) {
  auto& layers = mlp.layers();
  require(grads.weight.size() == layers.size(), ErrorCode::InvalidInput, "gradient layer count");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto w = layers[l].weight.values();
    auto g = grads.weight[l].values();
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= learning_rate * g[i];
    for (std::size_t i = 0; i < layers[l].bias.size(); ++i)
      layers[l].bias[i] -= learning_rate * grads.bias[l][i];
  }
}

DataSplit make_split(const TrainConfig& config) {
  const BlobDataset& data = config.data;
  const std::size_t c = data.counts.size();
  require(c >= 2, ErrorCode::InvalidInput, "dataset needs at least two classes");
  for (std::size_t n : data.counts)
    require(n >= 2, ErrorCode::InvalidInput, "every class needs at least two samples");
  require(config.holdout_fraction > 0.0 && config.holdout_fraction < 1.0, ErrorCode::InvalidInput,
          "holdout fraction must lie in (0, 1)");

  std::vector<std::vector<double>> means = data.means;
  if (means.empty()) {
    require(data.input_dim >= 2, ErrorCode::InvalidInput, "input dimension must be >= 2");
    for (std::size_t i = 0; i < c; ++i) {
      std::vector<double> m(data.input_dim, 0.0);
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(c);
      m[0] = data.spread * std::cos(angle);
      m[1] = data.spread * std::sin(angle);
      means.push_back(std::move(m));
    }
  }
  require(means.size() == c, ErrorCode::InvalidInput, "one mean per class");

  const std::uint64_t seed = data.seed.value_or(config.seed);
  const LabeledCloud all = gaussian_blobs(data.counts, means, data.sigma, seed);

  Rng rng(seed ^ kSplitStream);
  std::vector<std::size_t> train_idx, hold_idx;
  std::size_t start = 0;
  for (std::size_t i = 0; i < c; ++i) {
    std::vector<std::size_t> idx(data.counts[i]);
    std::iota(idx.begin(), idx.end(), start);
    rng.shuffle(idx);
    const auto hold = static_cast<std::size_t>(
        std::clamp(std::llround(config.holdout_fraction * static_cast<double>(idx.size())), 1LL,
                   static_cast<long long>(idx.size()) - 1));
    hold_idx.insert(hold_idx.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(hold));
    train_idx.insert(train_idx.end(), idx.begin() + static_cast<std::ptrdiff_t>(hold), idx.end());
    start += data.counts[i];
  }
  auto subset = [&](const std::vector<std::size_t>& idx) {
    std::vector<ClassId> labels;
    labels.reserve(idx.size());
    for (std::size_t j : idx) labels.push_back(all.labels()[j]);
    return LabeledCloud(select_columns(all.points(), idx), std::move(labels));
  };
  return {subset(train_idx), subset(hold_idx)};
}

TrainingTrace train(const TrainConfig& config) {
  require(config.epochs >= 1, ErrorCode::InvalidInput, "epochs must be positive");
  require(config.batch_size >= 1, ErrorCode::InvalidInput, "batch size must be positive");
  require(config.learning_rate > 0.0, ErrorCode::InvalidInput, "learning rate must be positive");
  require(!config.hidden.empty(), ErrorCode::InvalidInput, "need at least one hidden layer");
  require(config.curvature_every >= 1, ErrorCode::InvalidInput, "curvature_every must be >= 1");
  if (config.mode == TrainMode::CeCr)
    require(config.tau > 1.0, ErrorCode::InvalidSchedule, "tau must be greater than 1");

  const DataSplit split = make_split(config);
  const std::size_t classes = split.train.class_count();
  const std::size_t m = split.train.size();

  std::vector<std::size_t> sizes{split.train.dim()};
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(classes);
  Mlp mlp(sizes, config.hidden_activation, config.feature_activation, config.seed ^ kInitStream);
  Rng order_rng(config.seed ^ kShuffleStream);

  const std::size_t p = mlp.feature_dim();
  FeaturePool pool(p);
  DcrDriver driver({m, config.batch_size, config.warmup_epochs, config.epochs});
  CurvatureOptions curv;
  curv.k = config.k;

  TrainingTrace trace;
  trace.class_count = classes;
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    order_rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    std::size_t cr_steps = 0;

    for (std::size_t start = 0, iteration = 0; start < m; start += config.batch_size, ++iteration) {
      const std::size_t end = std::min(m, start + config.batch_size);
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      const Matrix x = select_columns(split.train.points(), idx);
      std::vector<ClassId> y;
      y.reserve(idx.size());
      for (std::size_t j : idx) y.push_back(split.train.labels()[j]);

      const ForwardPass pass = forward(mlp, x);
      const double ce = cross_entropy(pass, y);
      if (!std::isfinite(ce))
        throw TrainingDiverged("loss became non-finite in epoch " + std::to_string(epoch),
                               trace);

      double loss = ce;
      Matrix extra;
      if (config.mode == TrainMode::CeCr) {
        const DcrAction action = driver.tick(pool, pass.features, y);
        if (action == DcrAction::CurvatureCombinedLoss && iteration % config.curvature_every == 0) {
          try {
            const ManifoldSet ms = pool.snapshot_by_class(classes);
            // The newest batch sits at the end of every class matrix.
            std::vector<std::size_t> batch_count(classes, 0);
            for (ClassId c : y) ++batch_count[static_cast<std::size_t>(c)];
            std::vector<std::vector<std::size_t>> active(classes);
            for (std::size_t c = 0; c < classes; ++c) {
              const std::size_t cols = ms.points(c).cols();
              for (std::size_t j = cols - batch_count[c]; j < cols; ++j) active[c].push_back(j);
            }
            const CurvatureGradient g = l_curvature_grad_fd(ms, curv, config.fd_step, active);
            const CombinedLoss combined = combined_loss(ce, g.loss, {config.tau, epoch});
            if (combined.weight > 0.0) {
              extra = Matrix(p, y.size());
              std::vector<std::size_t> next(classes, 0);
              for (std::size_t j = 0; j < y.size(); ++j) {
                const auto c = static_cast<std::size_t>(y[j]);
                const std::size_t col = active[c][next[c]++];
                for (std::size_t r = 0; r < p; ++r)
                  extra(r, j) = combined.weight * g.gradient[c](r, col);
              }
            }
            loss = combined.total;
            ++cr_steps;
          } catch (const Error& e) {
            // Curvature not measurable on this snapshot: fall back to CE.
            if (e.code() == ErrorCode::InvalidInput || e.code() == ErrorCode::InvalidState) throw;
          }
        }
      }

      const MlpGradients grads = backward_ce(mlp, x, y, extra.empty() ? nullptr : &extra);
      sgd_step(mlp, grads, config.learning_rate);
      loss_sum += loss;
      ++batches;
    }

    EpochRecord rec = measure_epoch(config, mlp, split);
    rec.epoch = epoch;
    rec.loss = loss_sum / static_cast<double>(batches);
    rec.cr_steps = cr_steps;
    if (!std::isfinite(rec.loss))
      throw TrainingDiverged("loss became non-finite in epoch " + std::to_string(epoch), trace);
    trace.epochs.push_back(std::move(rec));
  }
  return trace;
}

TraceSummary summarize(const TrainingTrace& trace, std::size_t early_epoch) {
  TraceSummary s;
  if (trace.epochs.empty()) return s;
  std::vector<double> ep, sep, ep_cx, cx;
  for (const auto& r : trace.epochs) {
    const double ms = nan_mean(r.separation);
    const double mc = nan_mean(r.complexity);
    if (std::isfinite(ms)) {
      ep.push_back(static_cast<double>(r.epoch));
      sep.push_back(ms);
    }
    if (std::isfinite(mc)) {
      ep_cx.push_back(static_cast<double>(r.epoch));
      cx.push_back(mc);
    }
  }
  auto spearman_or_nan = [](const std::vector<double>& a, const std::vector<double>& b) {
    try {
      return a.size() >= 2 ? spearman(a, b) : kNaN;
    } catch (const Error&) {
      return kNaN;
    }
  };
  s.spearman_separation = spearman_or_nan(ep, sep);
  s.spearman_complexity = spearman_or_nan(ep_cx, cx);

  const EpochRecord& last = trace.epochs.back();
  s.final_curvature_variance = all_finite(last.complexity) ? variance(last.complexity) : kNaN;
  s.final_accuracy_variance = last.accuracy_variance;
  s.final_mean_accuracy = mean(last.accuracy);

  auto defined = [](double v) { return std::isfinite(v) ? std::optional<double>(v) : std::nullopt; };
  if (early_epoch >= 1 && early_epoch <= trace.epochs.size()) {
    const EpochRecord& early = trace.epochs[early_epoch - 1];
    s.early_pcc_separation = defined(early.pcc_accuracy_separation);
    s.early_pcc_complexity = defined(early.pcc_accuracy_complexity);
  }
  s.late_pcc_separation = defined(last.pcc_accuracy_separation);
  s.late_pcc_complexity = defined(last.pcc_accuracy_complexity);

  s.separation_rising = std::isfinite(s.spearman_separation) && s.spearman_separation >= 0.8;
  s.complexity_falling = std::isfinite(s.spearman_complexity) && s.spearman_complexity <= -0.5;
  s.pcc_crossing = s.early_pcc_separation && s.late_pcc_separation && s.early_pcc_complexity &&
                   s.late_pcc_complexity && *s.early_pcc_separation > *s.late_pcc_separation &&
                   std::abs(*s.late_pcc_complexity) > std::abs(*s.early_pcc_complexity);
  return s;
}

}  // namespace mgeom
