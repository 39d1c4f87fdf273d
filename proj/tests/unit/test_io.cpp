#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>

#include <json.hpp>

#include "mgeom/error.hpp"
#include "mgeom/io.hpp"
#include "mgeom/synthetic.hpp"

using namespace mgeom;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidInput;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "mgeom_test_io";
  fs::create_directories(dir);
  return dir / name;
}

std::uint64_t bits(double v) {
  std::uint64_t b;
  std::memcpy(&b, &v, sizeof b);
  return b;
}

}  // namespace

TEST_CASE("matrix file byte layout") {
  MatrixFile f{Matrix::from_rows({{1.0, -2.0}}), std::nullopt};
  const auto bytes = encode_matrix_file(f);
  const std::vector<std::uint8_t> want{'P', 'M', 'G', 'M', 1, 0, 1, 0, 0, 0, 2, 0, 0, 0,
                                       0, 0,   0,   0,   0, 0, 0xf0, 0x3f,
                                       0, 0,   0,   0,   0, 0, 0, 0xc0};
  CHECK(bytes == want);

  f.labels = std::vector<std::uint32_t>{258};
  const auto labeled = encode_matrix_file(f);
  REQUIRE(labeled.size() == want.size() + 5);
  CHECK(labeled[want.size()] == 1);
  CHECK(labeled[want.size() + 1] == 2);
  CHECK(labeled[want.size() + 2] == 1);
}

TEST_CASE("matrix files round-trip bit for bit") {
  Rng rng(8);
  Matrix m(7, 5);
  for (double& v : m.values()) v = rng.normal() * std::exp(rng.uniform(-300, 300));
  m(0, 0) = -0.0;
  m(1, 1) = std::numeric_limits<double>::denorm_min();
  m(2, 2) = std::numeric_limits<double>::max();
  m(3, 3) = std::nextafter(1.0, 2.0);
  MatrixFile f{m, std::vector<std::uint32_t>{0, 1, 2, 3, 4, 5, 6}};
  const auto path = scratch("round.pmgm").string();
  write_matrix_file(path, f);
  const MatrixFile back = read_matrix_file(path);
  REQUIRE(back.data.rows() == 7);
  REQUIRE(back.data.cols() == 5);
  for (std::size_t i = 0; i < m.values().size(); ++i) CHECK(bits(back.data.values()[i]) == bits(m.values()[i]));
  CHECK(back.labels == f.labels);

  const MatrixFile plain = decode_matrix_file(encode_matrix_file({m, std::nullopt}));
  CHECK(!plain.labels);
  CHECK(decode_matrix_file(encode_matrix_file({Matrix(0, 0), std::nullopt})).data.empty());
}

TEST_CASE("malformed matrix files are rejected") {
  const auto good = encode_matrix_file({Matrix::from_rows({{1, 2}, {3, 4}}), std::vector<std::uint32_t>{0, 1}});
  CHECK(decode_matrix_file(good).data(1, 0) == 3.0);
  auto bad_magic = good;
  bad_magic[0] = 'X';
  CHECK(code_of([&] { decode_matrix_file(bad_magic); }) == ErrorCode::Parse);
  auto bad_version = good;
  bad_version[4] = 2;
  CHECK(code_of([&] { decode_matrix_file(bad_version); }) == ErrorCode::Parse);
  for (std::size_t cut : {std::size_t{3}, std::size_t{10}, std::size_t{20}, good.size() - 1}) {
    const std::vector<std::uint8_t> truncated(good.begin(), good.begin() + cut);
    CHECK(code_of([&] { decode_matrix_file(truncated); }) == ErrorCode::Parse);
  }
  auto trailing = good;
  trailing.push_back(0);
  CHECK(code_of([&] { decode_matrix_file(trailing); }) == ErrorCode::Parse);
  auto bad_marker = encode_matrix_file({Matrix::from_rows({{1}}), std::vector<std::uint32_t>{0}});
  bad_marker[bad_marker.size() - 5] = 7;
  CHECK(code_of([&] { decode_matrix_file(bad_marker); }) == ErrorCode::Parse);
  CHECK(code_of([&] { read_matrix_file(scratch("missing.pmgm").string() + ".none"); }) == ErrorCode::Io);
}

TEST_CASE("cloud csv round trip") {
  Rng rng(2);
  Matrix pts(3, 40);
  for (double& v : pts.values()) v = rng.normal() * std::exp(rng.uniform(-40, 40));
  std::vector<ClassId> labels(40);
  for (std::size_t j = 0; j < 40; ++j) labels[j] = static_cast<ClassId>(j % 3);
  const LabeledCloud cloud(pts, labels);
  const std::string text = encode_cloud_csv(cloud);
  CHECK(text.rfind("class,d0,d1,d2\n", 0) == 0);
  const LabeledCloud back = decode_cloud_csv(text);
  CHECK(back.labels() == labels);
  for (std::size_t i = 0; i < pts.values().size(); ++i) {
    const double a = pts.values()[i], b = back.points().values()[i];
    CHECK(std::abs(a - b) <= 1e-15 * std::abs(a));
  }
  const auto path = scratch("cloud.csv").string();
  write_cloud_csv(path, cloud);
  CHECK(read_cloud(path).points() == back.points());
  const auto bin = scratch("cloud.pmgm").string();
  write_cloud_matrix_file(bin, cloud);
  const LabeledCloud from_bin = read_cloud(bin);
  CHECK(from_bin.points() == pts);
  CHECK(from_bin.labels() == labels);

  const LabeledCloud hand = decode_cloud_csv("class,d0\n0,1.5\n1,-2\n0,3e2\n");
  CHECK(hand.points() == Matrix::from_rows({{1.5, -2, 300}}));
  CHECK(hand.labels() == std::vector<ClassId>{0, 1, 0});
  CHECK(decode_cloud_csv("class,d0\r\n0,1\r\n1,2\r\n").size() == 2);
}

TEST_CASE("csv format errors") {
  const char* bad[] = {
      "",
      "klass,d0\n0,1\n",
      "class,d0,d1\n0,1\n",
      "class,d0\n0,1,2\n",
      "class,d0\n-1,1\n",
      "class,d0\nx,1\n",
      "class,d0\n0,abc\n",
      "class,d0\n0,1.5x\n",
      "class,d0\n0,\n",
      "class,d1\n0,1\n",
      "class,d0\n0.5,1\n",
  };
  for (const char* text : bad) {
    INFO(std::string(text));
    CHECK(code_of([&] { decode_cloud_csv(text); }) == ErrorCode::Parse);
  }
  CHECK(code_of([] { read_cloud("/nonexistent/dir/cloud.csv"); }) == ErrorCode::Io);
}

TEST_CASE("number formatting round-trips") {
  Rng rng(12);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.normal() * std::exp(rng.uniform(-700, 700));
    CHECK(std::strtod(format_real(v).c_str(), nullptr) == v);
  }
  CHECK(format_real(0.5) == "0.5");
  CHECK(format_real(2.0) == "2");
}

TEST_CASE("train config parsing") {
  const TrainConfig d = parse_train_config("{}");
  const TrainConfig ref;
  CHECK(d.epochs == ref.epochs);
  CHECK(d.batch_size == ref.batch_size);
  CHECK(d.k == ref.k);
  CHECK(d.data.counts == ref.data.counts);

  const TrainConfig c = parse_train_config(R"({
    "mode": "ce+cr", "epochs": 12, "batch_size": 20, "learning_rate": 0.1, "seed": 9,
    "hidden": [8, 4], "hidden_activation": "relu", "feature_activation": "tanh",
    "k": 11, "tau": 50, "warmup_epochs": 3, "curvature_every": 2, "fd_step": 1e-5,
    "holdout_fraction": 0.25, "early_epoch": 4,
    "dataset": {"counts": [30, 20], "input_dim": 2, "means": [[0, 0], [3, 3]],
                "spread": 1.5, "sigma": 0.5, "seed": 77}})");
  CHECK(c.mode == TrainMode::CeCr);
  CHECK(c.epochs == 12);
  CHECK(c.batch_size == 20);
  CHECK(c.learning_rate == 0.1);
  CHECK(c.seed == 9);
  CHECK(c.hidden == std::vector<std::size_t>{8, 4});
  CHECK(c.hidden_activation == Activation::Relu);
  CHECK(c.feature_activation == Activation::Tanh);
  CHECK(c.k == 11);
  CHECK(c.tau == 50);
  CHECK(c.warmup_epochs == 3);
  CHECK(c.curvature_every == 2);
  CHECK(c.fd_step == 1e-5);
  CHECK(c.holdout_fraction == 0.25);
  CHECK(c.early_epoch == 4);
  CHECK(c.data.counts == std::vector<std::size_t>{30, 20});
  CHECK(c.data.means.size() == 2);
  CHECK(c.data.sigma == 0.5);
  CHECK(c.data.seed == 77);

  for (const char* bad : {"{", "[]", R"({"epochs": "ten"})", R"({"epoch": 3})", R"({"mode": "sgd"})",
                          R"({"dataset": {"count": [1]}})", R"({"epochs": -1})",
                          R"({"hidden_activation": "gelu"})", R"({"hidden": [4, -2]})",
                          R"({"tau": "high"})", R"({"k": 2.5})"}) {
    INFO(std::string(bad));
    CHECK(code_of([&] { parse_train_config(bad); }) == ErrorCode::Parse);
  }
}

TEST_CASE("trace outputs") {
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.data.counts = {30, 30};
  const TrainingTrace t = train(cfg);
  const std::string csv = trace_csv(t);
  CHECK(csv.rfind("epoch,loss,acc_0,acc_1,sep_0,sep_1,cx_0,cx_1,mean_separation,mean_complexity,"
                  "pcc_acc_sep,pcc_acc_cx,acc_variance,bias_ratio,cr_steps\n",
                  0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  const auto j = nlohmann::json::parse(trace_summary_json(cfg, t));
  CHECK(j["schema_version"] == 1);
  CHECK(j["mode"] == "ce");
  CHECK(j["epochs"] == 3);
  CHECK(j.contains("spearman_epoch_separation"));
  CHECK(j.contains("pcc_crossing"));
}
