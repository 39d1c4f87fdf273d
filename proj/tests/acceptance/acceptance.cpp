// Runs the twelve acceptance criteria and prints one line per criterion.
//
// Usage: acceptance [--expect-fail N]... [--only N]...
// The exit status is nonzero when a criterion fails without being listed in
// --expect-fail, or when a listed criterion passes.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mgeom/curvature.hpp"
#include "mgeom/experiments.hpp"
#include "mgeom/feature_pool.hpp"
#include "mgeom/io.hpp"
#include "mgeom/manifold.hpp"
#include "mgeom/regularization.hpp"
#include "mgeom/synthetic.hpp"
#include "mgeom/trainer.hpp"
#include "oracles.hpp"

using namespace mgeom;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Notes {
 public:
  void fail(const std::string& what) {
    pass_ = false;
    add(what);
  }
  void add(const std::string& what) {
    if (!text_.empty()) text_ += "; ";
    text_ += what;
  }
  Outcome done() const { return {pass_, text_}; }

 private:
  bool pass_ = true;
  std::string text_;
};

template <class... T>
std::string fmt(const char* f, T... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

Matrix translated(Matrix z, const std::vector<double>& t) {
  for (std::size_t j = 0; j < z.cols(); ++j)
    for (std::size_t r = 0; r < z.rows(); ++r) z(r, j) += t[r];
  return z;
}

Outcome subadditivity() {
  Rng rng(2024);
  int held = 0;
  double worst = -HUGE_VAL;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    const std::size_t p = 1 + rng.below(8);
    const Matrix z1 = oracle::random_matrix(p, 1 + rng.below(200), rng, rng.uniform(0.1, 5));
    const Matrix z2 = translated(oracle::random_matrix(p, 1 + rng.below(200), rng, rng.uniform(0.1, 5)),
                                 std::vector<double>(p, rng.uniform(-4, 4)));
    const double gap = manifold_volume(hconcat(z1, z2), false) -
                       (manifold_volume(z1, false) + manifold_volume(z2, false));
    worst = std::max(worst, gap);
    held += gap <= 1e-9;
  }
  Notes n;
  n.add(fmt("%d/%d pairs, max excess %.3g", held, trials, worst));
  if (held != trials) n.fail("subadditivity violated");
  return n.done();
}

Outcome closed_form() {
  Rng rng(77);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t c = 2 + rng.below(4), p = 1 + rng.below(8);
    std::vector<Matrix> classes;
    for (std::size_t i = 0; i < c; ++i) {
      std::vector<double> shift(p);
      for (double& v : shift) v = rng.uniform(-3, 3);
      classes.push_back(translated(oracle::random_matrix(p, 5 + rng.below(40), rng), shift));
    }
    const ManifoldSet ms(std::move(classes));
    for (bool center : {false, true})
      for (std::size_t i = 0; i < c; ++i)
        worst = std::max(worst, rel(separation_degree_closed_form(ms, i, center), separation_degree(ms, i, center)));
  }
  Notes n;
  n.add(fmt("200 sets, max relative difference %.3g", worst));
  if (!(worst <= 1e-8)) n.fail("closed form disagrees");
  return n.done();
}

Outcome fig2() {
  const auto rows = run_fig2(0);
  Notes n;
  bool monotone = true, equal = true, ordered = true;
  double worst_eq = 0.0;
  std::vector<double> unordered;
  for (std::size_t s = 0; s < rows.size(); ++s) {
    const auto& r = rows[s];
    if (s > 0 && (r.equal_first < rows[s - 1].equal_first - 1e-6 ||
                  r.equal_second < rows[s - 1].equal_second - 1e-6))
      monotone = false;
    worst_eq = std::max(worst_eq, rel(r.equal_first, r.equal_second));
    if (rel(r.equal_first, r.equal_second) > 0.02) equal = false;
    if (r.distance > 0 && !(r.large > r.small)) {
      ordered = false;
      unordered.push_back(r.distance);
    }
  }
  n.add(fmt("S(d=0)=%.4f S(d=10)=%.4f", rows.front().equal_first, rows.back().equal_first));
  n.add(fmt("max pair difference %.2g", worst_eq));
  if (!monotone) n.fail("equal-radius curves not nondecreasing");
  if (!equal) n.fail("equal-radius curves differ by more than 2%");
  if (!ordered)
    n.fail(fmt("radius-1.5 S not above radius-1 S at %zu of %zu distances (from d=%.1f)", unordered.size(),
               rows.size() - 1, unordered.front()));
  return n.done();
}

Outcome fig3() {
  const Fig3Options opts;
  const auto rows = run_fig3(0, opts);
  Notes n;
  int violations = 0;
  for (std::size_t ki = 0; ki < opts.k.size(); ++ki)
    for (std::size_t r = 1; r < rows.size(); ++r)
      if (rows[r].surface == rows[r - 1].surface && !(rows[r].complexity[ki] > rows[r - 1].complexity[ki])) {
        ++violations;
        n.add(fmt("%s k=%zu w=%.1f not above w=%.1f", rows[r].surface.c_str(), opts.k[ki], rows[r].w,
                  rows[r - 1].w));
      }
  n.add(fmt("%zu surface rows x %zu k values", rows.size(), opts.k.size()));
  if (violations) n.fail(fmt("%d non-increasing steps", violations));
  return n.done();
}

Outcome estimator() {
  const std::vector<double> origin{0.0, 0.0, 0.0};
  const CurvatureOptions opts{.k = 40};
  double cx[3];
  for (int r = 1; r <= 3; ++r) cx[r - 1] = mean_gauss_curvature(sphere_cloud(r, origin, 8000, 11), opts).complexity;
  const double plane = mean_gauss_curvature(plane_cloud(8000, 11), opts).complexity;
  Notes n;
  n.add(fmt("sphere r=1,2,3: %.4f %.4f %.4f; plane %.2g", cx[0], cx[1], cx[2], plane));
  if (!(cx[0] >= 0.5 && cx[0] <= 2.0)) n.fail("unit sphere outside a factor of 2");
  if (!(cx[0] > cx[1] && cx[1] > cx[2])) n.fail("radius ordering broken");
  if (!(plane <= 1e-6)) n.fail("plane complexity above 1e-6");
  return n.done();
}

Outcome principles() {
  Rng rng(606);
  int bad = 0;
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    const std::size_t c = 1 + rng.below(8);
    std::vector<double> g(c);
    for (double& v : g) v = std::exp(rng.uniform(-8, 8));
    const CurvatureVector cv(g);
    const auto pen = curvature_penalties(cv);
    const std::size_t argmin = std::min_element(g.begin(), g.end()) - g.begin();
    bool ok = pen[argmin] == 0.0;
    const std::size_t i = rng.below(c);
    if (i != argmin) {
      std::vector<double> up = g;
      up[i] *= 1.0 + rng.uniform(0.01, 2.0);
      ok = ok && curvature_penalties(CurvatureVector(up))[i] > pen[i];
    }
    const double s = std::exp(rng.uniform(-5, 5));
    std::vector<double> sg = g;
    for (double& v : sg) v *= s;
    const auto pen_s = curvature_penalties(CurvatureVector(sg));
    for (std::size_t j = 0; j < c; ++j) ok = ok && std::abs(pen_s[j] - pen[j]) <= 1e-12 * std::max(1.0, pen[j]);
    ok = ok && l_curvature(CurvatureVector(std::vector<double>(c, g[0]))) == 0.0;
    bad += !ok;
  }
  Notes n;
  n.add(fmt("%d random vectors, %d violations", trials, bad));
  if (bad) n.fail("principle violated");
  return n.done();
}

Outcome combined_identity() {
  double worst = 0.0;
  for (double tau : {1.5, 2.0, 10.0, 50.0, 100.0, 1000.0})
    for (std::size_t epoch : {1u, 3u, 10u, 50u, 100u, 1000u})
      for (double lo : {0.05, 1.0, 4.0})
        for (double lc : {0.01, 1.0, 30.0}) {
          const double want = lo * (1.0 + std::log(double(epoch)) / std::log(tau));
          worst = std::max(worst, rel(combined_loss(lo, lc, {tau, epoch}).total, want));
        }
  const double f15 = combined_loss(1.0, 2.0, {100.0, 10}).total;
  const double f2 = combined_loss(1.0, 2.0, {100.0, 100}).total;
  Notes n;
  n.add(fmt("max relative error %.2g; (100,10) -> %.15g; (100,100) -> %.15g", worst, f15, f2));
  if (!(worst <= 1e-12)) n.fail("grid identity off");
  if (!(std::abs(f15 - 1.5) <= 1e-12 && std::abs(f2 - 2.0) <= 1e-12)) n.fail("anchor factors off");
  return n.done();
}

struct Replay {
  std::vector<DcrAction> actions;
  std::vector<std::size_t> sizes;
  std::vector<std::uint8_t> bytes;
};

Replay protocol_run(std::uint64_t seed, const DcrConfig& cfg) {
  Rng rng(seed);
  FeaturePool pool(3);
  DcrDriver driver(cfg);
  Replay out;
  while (!driver.finished()) {
    Matrix batch(3, cfg.batch_size);
    for (double& v : batch.values()) v = rng.normal();
    std::vector<ClassId> labels(cfg.batch_size);
    for (std::size_t j = 0; j < labels.size(); ++j) labels[j] = static_cast<ClassId>(rng.below(4));
    out.actions.push_back(driver.tick(pool, std::move(batch), std::move(labels)));
    out.sizes.push_back(pool.sample_count());
  }
  const LabeledCloud cloud = pool.to_cloud();
  std::vector<std::uint32_t> labels(cloud.labels().begin(), cloud.labels().end());
  out.bytes = encode_matrix_file({cloud.points().transposed(), labels});
  return out;
}

Outcome protocol() {
  const DcrConfig cfg{.capacity = 1024, .batch_size = 32, .warmup_epochs = 5, .total_epochs = 8};
  const Replay a = protocol_run(31, cfg), b = protocol_run(31, cfg);
  const std::size_t per_epoch = 1024 / 32;
  Notes n;
  bool sizes = a.actions.size() == 8 * per_epoch, switch_ok = sizes;
  for (std::size_t t = 0; t < a.actions.size(); ++t) {
    const std::size_t epoch = 1 + t / per_epoch;
    if (epoch > 1 && a.sizes[t] != 1024) sizes = false;
    if (a.actions[t] != (epoch >= 5 ? DcrAction::CurvatureCombinedLoss : DcrAction::OriginalLoss)) switch_ok = false;
  }
  const bool replay = a.bytes == b.bytes && a.actions == b.actions && a.sizes == b.sizes;
  n.add(fmt("%zu ticks, replay pool %zu bytes", a.actions.size(), a.bytes.size()));
  if (!sizes) n.fail("pool size not M in steady state");
  if (!switch_ok) n.fail("loss switch not at epoch 5");
  if (!replay) n.fail("replay differs");
  return n.done();
}

Outcome dynamics() {
  int sep = 0, cx = 0, cross = 0;
  std::ostringstream per;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    TrainConfig cfg;
    cfg.seed = seed;
    const TraceSummary s = summarize(train(cfg), cfg.early_epoch);
    sep += s.spearman_separation >= 0.8;
    cx += s.spearman_complexity <= -0.5;
    cross += s.pcc_crossing;
    per << (seed ? " " : "") << fmt("[%.2f %.2f %c]", s.spearman_separation, s.spearman_complexity,
                                    s.pcc_crossing ? 'x' : '-');
  }
  Notes n;
  n.add(fmt("separation %d/5, complexity %d/5, crossing %d/5 ", sep, cx, cross) + per.str());
  if (sep < 4) n.fail("separation trend in fewer than 4 seeds");
  if (cx < 4) n.fail("complexity trend in fewer than 4 seeds");
  if (cross < 3) n.fail("crossing in fewer than 3 seeds");
  return n.done();
}

Outcome imbalance() {
  int lower_curv = 0, acc_ok = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    TrainConfig ce;
    ce.seed = seed;
    ce.data.counts = {300, 100, 30};
    TrainConfig cr = ce;
    cr.mode = TrainMode::CeCr;
    const TraceSummary a = summarize(train(ce), ce.early_epoch);
    const TraceSummary b = summarize(train(cr), cr.early_epoch);
    lower_curv += b.final_curvature_variance < a.final_curvature_variance;
    acc_ok += b.final_accuracy_variance <= a.final_accuracy_variance;
  }
  Notes n;
  n.add(fmt("curvature variance lower %d/5, accuracy variance not higher %d/5", lower_curv, acc_ok));
  if (lower_curv < 4) n.fail("curvature variance not lower in 4 seeds");
  if (acc_ok < 3) n.fail("accuracy variance higher in more than 2 seeds");
  return n.done();
}

double ce_loss(const Mlp& mlp, const Matrix& x, const std::vector<ClassId>& y) {
  return cross_entropy(forward(mlp, x), y);
}

double direct_cr(const ManifoldSet& ms, const CurvatureOptions& opts) {
  std::vector<double> g;
  for (std::size_t c = 0; c < ms.class_count(); ++c) g.push_back(mean_gauss_curvature(ms.points(c), opts).complexity);
  return l_curvature(CurvatureVector(g));
}

Outcome gradients() {
  Notes n;
  Rng rng(9);
  int coord_bad = 0, coords = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Mlp mlp({2, 2, 2}, Activation::Tanh, Activation::Tanh, seed);
    Matrix x(2, 6);
    for (double& v : x.values()) v = rng.normal();
    const std::vector<ClassId> y{0, 1, 0, 1, 1, 0};
    const MlpGradients g = backward_ce(mlp, x, y);
    const double h = 1e-6;
    for (std::size_t l = 0; l < mlp.layers().size(); ++l) {
      auto probe = [&](double& param, double analytic) {
        const double keep = param;
        param = keep + h;
        const double up = ce_loss(mlp, x, y);
        param = keep - h;
        const double down = ce_loss(mlp, x, y);
        param = keep;
        ++coords;
        coord_bad += !(std::abs((up - down) / (2 * h) - analytic) <= std::max(1e-5, 1e-3 * std::abs(analytic)));
      };
      auto& layer = mlp.layers()[l];
      for (std::size_t i = 0; i < layer.weight.values().size(); ++i) probe(layer.weight.values()[i], g.weight[l].values()[i]);
      for (std::size_t i = 0; i < layer.bias.size(); ++i) probe(layer.bias[i], g.bias[l][i]);
    }
  }

  const CurvatureOptions opts{.k = 10};
  int descended = 0;
  const int trials = 40;
  for (int s = 0; s < trials; ++s) {
    const std::size_t p = 2 + s % 2;
    Rng mr(5000 + s);
    std::vector<std::vector<double>> means(3, std::vector<double>(p));
    for (auto& m : means)
      for (double& v : m) v = mr.uniform(-3, 3);
    const std::vector<std::size_t> counts(3, 25);
    const LabeledCloud cloud = gaussian_blobs(counts, means, 1.0, 100 + s);
    std::vector<Matrix> classes;
    for (std::size_t c = 0; c < 3; ++c) classes.push_back(column_block(cloud.points(), 25 * c, 25));
    const ManifoldSet ms(std::move(classes));
    const double l0 = direct_cr(ms, opts);
    const auto g = l_curvature_grad_fd(ms, opts, 1e-6);
    double norm = 0.0;
    for (const Matrix& m : g.gradient)
      for (double v : m.values()) norm += v * v;
    norm = std::sqrt(norm);
    if (!(norm > 0.0)) continue;
    for (double eta : {1e-5, 1e-6, 1e-7}) {
      std::vector<Matrix> moved;
      for (std::size_t c = 0; c < 3; ++c) {
        Matrix z = ms.points(c);
        for (std::size_t i = 0; i < z.values().size(); ++i) z.values()[i] -= eta * g.gradient[c].values()[i] / norm;
        moved.push_back(std::move(z));
      }
      if (direct_cr(ManifoldSet(std::move(moved)), opts) < l0) {
        ++descended;
        break;
      }
    }
  }
  n.add(fmt("backprop %d/%d coordinates within tolerance; CR descent %d/%d", coords - coord_bad, coords, descended,
            trials));
  if (coord_bad) n.fail("backprop mismatch");
  if (descended < 0.95 * trials) n.fail("CR descent below 95%");
  return n.done();
}

std::uint64_t bits(double v) {
  std::uint64_t b;
  std::memcpy(&b, &v, sizeof b);
  return b;
}

Outcome round_trips() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "mgeom_acceptance";
  fs::create_directories(dir);
  Rng rng(12);
  Matrix m(300, 6);
  for (double& v : m.values()) v = rng.normal() * std::exp(rng.uniform(-300, 300));
  m(0, 0) = std::numeric_limits<double>::denorm_min();
  m(1, 0) = -0.0;
  std::vector<ClassId> labels(300);
  std::vector<std::uint32_t> ulabels(300);
  for (std::size_t j = 0; j < 300; ++j) ulabels[j] = static_cast<std::uint32_t>(labels[j] = ClassId(j % 4));

  write_matrix_file((dir / "m.pmgm").string(), {m, ulabels});
  const MatrixFile back = read_matrix_file((dir / "m.pmgm").string());
  bool exact = back.labels == ulabels && back.data.rows() == 300 && back.data.cols() == 6;
  for (std::size_t i = 0; exact && i < m.values().size(); ++i) exact = bits(back.data.values()[i]) == bits(m.values()[i]);

  const Matrix pts = m.transposed();
  write_cloud_csv((dir / "c.csv").string(), LabeledCloud(pts, labels));
  const LabeledCloud csv = read_cloud((dir / "c.csv").string());
  double worst = 0.0;
  for (std::size_t i = 0; i < pts.values().size(); ++i)
    if (pts.values()[i] != 0.0) worst = std::max(worst, rel(csv.points().values()[i], pts.values()[i]));
  const bool csv_labels = csv.labels() == labels;

  int identical = 0;
  const std::vector<std::string> names{"fig2", "fig3"};
  for (const auto& name : names) identical += run_experiment(name, 4) == run_experiment(name, 4);

  Notes n;
  n.add(fmt("matrix file %s; CSV max relative error %.2g; %d/%zu experiments identical", exact ? "bit-exact" : "differs",
            worst, identical, names.size()));
  if (!exact) n.fail("matrix file changed");
  if (!(worst <= 1e-15) || !csv_labels) n.fail("CSV round trip off");
  if (identical != int(names.size())) n.fail("experiment output differs");
  return n.done();
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> expect_fail, only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if ((a == "--expect-fail" || a == "--only") && i + 1 < argc)
      (a == "--only" ? only : expect_fail).insert(std::atoi(argv[++i]));
    else {
      std::fprintf(stderr, "usage: acceptance [--expect-fail N]... [--only N]...\n");
      return 2;
    }
  }

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"volume subadditivity", subadditivity},
      {"closed-form separation", closed_form},
      {"two-sphere separation sweep", fig2},
      {"surface complexity grid", fig3},
      {"curvature estimator accuracy", estimator},
      {"regularization principles", principles},
      {"combined-loss identity", combined_identity},
      {"storage-pool protocol", protocol},
      {"training dynamics", dynamics},
      {"imbalanced ce+cr direction", imbalance},
      {"gradient oracles", gradients},
      {"I/O round trips", round_trips},
  };

  int unexpected = 0, passed = 0, ran = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = int(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool expected_failure = expect_fail.count(id) > 0;
    ++ran;
    passed += o.pass;
    if (o.pass == expected_failure) ++unexpected;
    std::printf("criterion %2d %-30s %s%s (%.1f s) %s\n", id, criteria[i].first, o.pass ? "PASS" : "FAIL",
                expected_failure ? (o.pass ? " [listed as expected failure]" : " [expected]") : "", secs,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed, %d unexpected results\n", passed, ran, unexpected);
  return unexpected ? 1 : 0;
}
