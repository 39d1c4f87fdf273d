#include <doctest.h>

#include <cmath>

#include "mgeom/error.hpp"
#include "mgeom/synthetic.hpp"
#include "mgeom/trainer.hpp"

using namespace mgeom;

namespace {

double loss_of(const Mlp& mlp, const Matrix& x, const std::vector<ClassId>& y, const Matrix* extra) {
  const ForwardPass pass = forward(mlp, x);
  double l = cross_entropy(pass, y);
  if (extra)
    for (std::size_t i = 0; i < extra->values().size(); ++i)
      l += extra->values()[i] * pass.features.values()[i];
  return l;
}

// Central differences over every weight and bias, compared coordinate-wise.
void check_against_fd(Mlp mlp, const Matrix& x, const std::vector<ClassId>& y,
                      const Matrix* extra = nullptr) {
  const MlpGradients g = backward_ce(mlp, x, y, extra);
  const double h = 1e-6;
  auto probe = [&](double& param, double analytic) {
    const double keep = param;
    param = keep + h;
    const double up = loss_of(mlp, x, y, extra);
    param = keep - h;
    const double down = loss_of(mlp, x, y, extra);
    param = keep;
    const double fd = (up - down) / (2 * h);
    CHECK(std::abs(fd - analytic) <= std::max(1e-5, 1e-3 * std::abs(analytic)));
  };
  for (std::size_t l = 0; l < mlp.layers().size(); ++l) {
    auto& layer = mlp.layers()[l];
    for (std::size_t i = 0; i < layer.weight.values().size(); ++i)
      probe(layer.weight.values()[i], g.weight[l].values()[i]);
    for (std::size_t i = 0; i < layer.bias.size(); ++i) probe(layer.bias[i], g.bias[l][i]);
  }
}

TrainConfig small_config(std::uint64_t seed) {
  TrainConfig cfg;
  cfg.seed = seed;
  cfg.epochs = 8;
  cfg.data.counts = {40, 40, 40};
  cfg.batch_size = 16;
  return cfg;
}

void check_same_record(const EpochRecord& a, const EpochRecord& b) {
  CHECK(a.epoch == b.epoch);
  CHECK(a.loss == b.loss);
  CHECK(a.accuracy == b.accuracy);
  for (std::size_t i = 0; i < a.separation.size(); ++i) {
    CHECK(a.separation[i] == b.separation[i]);
    CHECK(a.complexity[i] == b.complexity[i]);
  }
}

}  // namespace

TEST_CASE("backpropagation matches finite differences on a 2-2-2 network") {
  const Matrix x = Matrix::from_rows({{0.3, -1.2, 0.8, 0.1}, {1.1, 0.4, -0.7, -0.2}});
  const std::vector<ClassId> y{0, 1, 1, 0};
  for (Activation hidden : {Activation::Tanh, Activation::Identity}) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      check_against_fd(Mlp({2, 2, 2}, hidden, hidden, seed), x, y);
      check_against_fd(Mlp({2, 3, 2, 2}, Activation::Tanh, hidden, seed), x, y);
    }
  }
  // ReLU away from its kink.
  check_against_fd(Mlp({2, 4, 2}, Activation::Relu, Activation::Relu, 6), x, y);

  Matrix extra(2, 4);
  Rng rng(5);
  for (double& v : extra.values()) v = rng.uniform(-1, 1);
  check_against_fd(Mlp({2, 2, 2}, Activation::Tanh, Activation::Tanh, 4), x, y, &extra);
  check_against_fd(Mlp({2, 3, 2, 2}, Activation::Tanh, Activation::Identity, 4), x, y, &extra);
}

TEST_CASE("a zero extra gradient changes nothing") {
  const Mlp mlp({3, 4, 2, 3}, Activation::Tanh, Activation::Identity, 9);
  Rng rng(1);
  Matrix x(3, 6);
  for (double& v : x.values()) v = rng.normal();
  const std::vector<ClassId> y{0, 1, 2, 2, 1, 0};
  const Matrix zero(2, 6);
  const MlpGradients a = backward_ce(mlp, x, y);
  const MlpGradients b = backward_ce(mlp, x, y, &zero);
  for (std::size_t l = 0; l < a.weight.size(); ++l) {
    CHECK(a.weight[l] == b.weight[l]);
    CHECK(a.bias[l] == b.bias[l]);
  }
  const Matrix wrong(3, 6);
  CHECK_THROWS_AS(backward_ce(mlp, x, y, &wrong), Error);
}

TEST_CASE("swapping classes permutes the output gradients") {
  const Matrix x = Matrix::from_rows({{1.0, -1.0, 0.5, -0.5}, {0.2, -0.2, -0.9, 0.9}});
  const std::vector<ClassId> y{0, 1, 0, 1};
  const std::vector<ClassId> swapped{1, 0, 1, 0};
  const Mlp mlp({2, 3, 2}, Activation::Tanh, Activation::Tanh, 17);
  Mlp mirror = mlp;
  auto& out = mirror.layers().back();
  for (std::size_t c = 0; c < out.weight.cols(); ++c) std::swap(out.weight(0, c), out.weight(1, c));
  std::swap(out.bias[0], out.bias[1]);

  const MlpGradients a = backward_ce(mlp, x, y);
  const MlpGradients b = backward_ce(mirror, x, swapped);
  CHECK(cross_entropy(forward(mlp, x), y) == doctest::Approx(cross_entropy(forward(mirror, x), swapped)));
  const std::size_t last = a.weight.size() - 1;
  for (std::size_t c = 0; c < a.weight[last].cols(); ++c) {
    CHECK(std::abs(a.weight[last](0, c) - b.weight[last](1, c)) <= 1e-14);
    CHECK(std::abs(a.weight[last](1, c) - b.weight[last](0, c)) <= 1e-14);
  }
  CHECK(std::abs(a.bias[last][0] - b.bias[last][1]) <= 1e-14);
  for (std::size_t i = 0; i < a.weight[0].values().size(); ++i)
    CHECK(std::abs(a.weight[0].values()[i] - b.weight[0].values()[i]) <= 1e-14);

  // Point-symmetric data with an odd network and a symmetric output layer:
  // the two output rows receive opposite gradients.
  Mlp odd({2, 2, 2}, Activation::Tanh, Activation::Tanh, 3);
  auto& cls = odd.layers().back();
  for (std::size_t c = 0; c < 2; ++c) cls.weight(1, c) = -cls.weight(0, c);
  cls.bias = {0.0, 0.0};
  odd.layers().front().bias = {0.0, 0.0};
  const MlpGradients s = backward_ce(odd, x, y);
  for (std::size_t c = 0; c < 2; ++c)
    CHECK(std::abs(s.weight[1](0, c) + s.weight[1](1, c)) <= 1e-14);
}

TEST_CASE("forward pass basics") {
  Mlp zero({3, 4, 2, 5}, Activation::Tanh, Activation::Tanh, 1);
  for (auto& layer : zero.layers()) {
    for (double& w : layer.weight.values()) w = 0.0;
    for (double& b : layer.bias) b = 0.0;
  }
  const Matrix x = Matrix::from_rows({{1, 2}, {3, 4}, {5, 6}});
  const ForwardPass pz = forward(zero, x);
  for (double v : pz.probabilities.values()) CHECK(v == doctest::Approx(0.2).epsilon(1e-15));

  // One hidden identity layer, hand-computed logits.
  DenseLayer h{Matrix::from_rows({{1, 0}, {0, 1}}), {0.5, -0.5}, Activation::Identity};
  DenseLayer o{Matrix::from_rows({{2, 1}, {0, -1}}), {0.0, 1.0}, Activation::Identity};
  const Mlp hand({h, o});
  const ForwardPass ph = forward(hand, Matrix::from_rows({{1}, {2}}));
  CHECK(ph.features == Matrix::from_rows({{1.5}, {1.5}}));
  CHECK(ph.logits == Matrix::from_rows({{4.5}, {-0.5}}));
  CHECK(ph.probabilities(0, 0) == doctest::Approx(1 / (1 + std::exp(-5.0))));
  CHECK(cross_entropy(ph, {1}) == doctest::Approx(5.0 + std::log1p(std::exp(-5.0))));

  Rng rng(4);
  const Mlp deep({4, 8, 3, 6}, Activation::Relu, Activation::Tanh, 2);
  Matrix big(4, 50);
  for (double& v : big.values()) v = 30 * rng.normal();
  const ForwardPass pd = forward(deep, big);
  for (std::size_t c = 0; c < 50; ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < 6; ++r) s += pd.probabilities(r, c);
    CHECK(std::abs(s - 1.0) <= 1e-9);
  }
  CHECK(deep.feature_dim() == 3);
  CHECK(deep.class_count() == 6);
  CHECK_THROWS_AS(forward(deep, Matrix(3, 2)), Error);
  CHECK_THROWS_AS(Mlp({4, 1, 3}, Activation::Tanh, Activation::Tanh, 0), Error);
  CHECK_THROWS_AS(Mlp({4, 3}, Activation::Tanh, Activation::Tanh, 0), Error);
  CHECK_THROWS_AS(cross_entropy(pd, {0}), Error);
}

TEST_CASE("weights start inside the fan-in bound") {
  const Mlp mlp({9, 16, 3, 3}, Activation::Tanh, Activation::Identity, 0);
  for (const auto& layer : mlp.layers()) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.weight.cols()));
    for (double w : layer.weight.values()) CHECK(std::abs(w) <= bound);
  }
  CHECK(mlp.layers()[0].activation == Activation::Tanh);
  CHECK(mlp.layers()[1].activation == Activation::Identity);
  CHECK(mlp.layers()[2].activation == Activation::Identity);
}

TEST_CASE("stratified split") {
  TrainConfig cfg;
  cfg.data.counts = {50, 20, 10};
  const DataSplit s = make_split(cfg);
  CHECK(s.train.size() + s.holdout.size() == 80);
  std::vector<std::size_t> held(3, 0);
  for (ClassId c : s.holdout.labels()) ++held[static_cast<std::size_t>(c)];
  CHECK(held == std::vector<std::size_t>{10, 4, 2});
  const DataSplit again = make_split(cfg);
  CHECK(again.train.points() == s.train.points());
  cfg.data.counts = {50};
  CHECK_THROWS_AS(make_split(cfg), Error);
}

TEST_CASE("training is deterministic") {
  const TrainConfig cfg = small_config(3);
  const TrainingTrace a = train(cfg);
  const TrainingTrace b = train(cfg);
  REQUIRE(a.epochs.size() == 8);
  for (std::size_t e = 0; e < 8; ++e) check_same_record(a.epochs[e], b.epochs[e]);
  for (const auto& r : a.epochs)
    for (double acc : r.accuracy) {
      CHECK(acc >= 0.0);
      CHECK(acc <= 1.0);
    }
}

TEST_CASE("curvature regularization leaves the warmup epochs untouched") {
  TrainConfig ce = small_config(1);
  TrainConfig cr = ce;
  cr.mode = TrainMode::CeCr;
  cr.epochs = 6;
  ce.epochs = 6;
  const TrainingTrace a = train(ce), b = train(cr);
  for (std::size_t e = 0; e + 1 < cr.warmup_epochs; ++e) {
    check_same_record(a.epochs[e], b.epochs[e]);
    CHECK(b.epochs[e].cr_steps == 0);
  }
  CHECK(b.epochs[4].cr_steps > 0);
  CHECK(b.epochs[4].loss != a.epochs[4].loss);
}

TEST_CASE("default benchmark shows the training trends") {
  TrainConfig cfg;
  cfg.seed = 0;
  const TraceSummary s = summarize(train(cfg), cfg.early_epoch);
  CHECK(s.spearman_separation >= 0.8);
  CHECK(s.spearman_complexity <= -0.5);
  CHECK(s.separation_rising);
  CHECK(s.complexity_falling);
}

TEST_CASE("divergence carries the partial trace") {
  TrainConfig cfg = small_config(2);
  cfg.learning_rate = 1e200;
  cfg.hidden_activation = Activation::Identity;
  try {
    train(cfg);
    FAIL("expected divergence");
  } catch (const TrainingDiverged& e) {
    CHECK(e.code() == ErrorCode::TrainingDiverged);
    CHECK(e.trace().epochs.size() < cfg.epochs);
  }
  TrainConfig bad = small_config(2);
  bad.epochs = 0;
  CHECK_THROWS_AS(train(bad), Error);
  bad = small_config(2);
  bad.mode = TrainMode::CeCr;
  bad.tau = 1.0;
  CHECK_THROWS_AS(train(bad), Error);
}

TEST_CASE("summary statistics") {
  TrainingTrace t;
  t.class_count = 2;
  for (std::size_t e = 1; e <= 12; ++e) {
    EpochRecord r;
    r.epoch = e;
    r.accuracy = {0.5, 0.6};
    r.separation = {double(e), double(e) + 1};
    r.complexity = {1.0 / double(e), 2.0 / double(e)};
    r.pcc_accuracy_separation = e == 10 ? 0.9 : 0.1;
    r.pcc_accuracy_complexity = e == 10 ? -0.1 : -0.8;
    t.epochs.push_back(r);
  }
  const TraceSummary s = summarize(t, 10);
  CHECK(s.spearman_separation == doctest::Approx(1.0));
  CHECK(s.spearman_complexity == doctest::Approx(-1.0));
  CHECK(s.pcc_crossing);
  CHECK(s.final_mean_accuracy == doctest::Approx(0.55));
  CHECK(s.final_curvature_variance == doctest::Approx(0.25 * (1.0 / 12) * (1.0 / 12)));
  const TraceSummary none = summarize(t, 40);
  CHECK(!none.early_pcc_separation);
  CHECK(!none.pcc_crossing);
}
