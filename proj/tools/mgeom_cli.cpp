// mgeom: command-line front end over the C interface.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mgeom/mgeom.h"

namespace {

using nlohmann::json;

struct Failure {
  mgeom_status status;
  std::string message;
};

void check(mgeom_status s) {
  if (s != MGEOM_OK) throw Failure{s, mgeom_last_error()};
}

struct CloudDeleter {
  void operator()(mgeom_cloud* c) const { mgeom_cloud_free(c); }
};
using CloudPtr = std::unique_ptr<mgeom_cloud, CloudDeleter>;

struct CStringDeleter {
  void operator()(char* s) const { mgeom_string_free(s); }
};
using CString = std::unique_ptr<char, CStringDeleter>;

CloudPtr load(const std::string& path) {
  mgeom_cloud* c = nullptr;
  check(mgeom_cloud_load(path.c_str(), &c));
  return CloudPtr(c);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{MGEOM_ERR_IO, "cannot open '" + path + "'"};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spill(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Failure{MGEOM_ERR_IO, "cannot open '" + path + "' for writing"};
  out << text;
  if (!out) throw Failure{MGEOM_ERR_IO, "failed writing '" + path + "'"};
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

// stderr reasons stay on one line so they can be grepped.
std::string one_line(std::string s) {
  for (char& ch : s)
    if (ch == '\n' || ch == '\r' || ch == '\t') ch = ' ';
  while (!s.empty() && s.back() == ' ') s.pop_back();
  return s;
}

json envelope() {
  json j;
  j["schema_version"] = 1;
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Perceptual manifold geometry toolkit"};
  app.require_subcommand(1);

  std::string input, out_path, config_path, trace_path, summary_path, curvatures_text;
  std::optional<int> class_id;
  bool no_center = false, closed_form = false, include_center = false, per_point = false;
  std::size_t k = 40, epoch = 1, n = 2000;
  double rank_tol = 1e-8, ridge = 1e-10, tau = 100.0, l_original = 1.0;
  std::uint64_t seed = 0;

  auto* volume = app.add_subcommand("volume", "Volume of each class manifold");
  volume->add_option("--input", input, "cloud file (CSV or binary matrix)")->required();
  volume->add_option("--class", class_id, "only this class");
  volume->add_flag("--no-center", no_center, "skip mean-centering");

  auto* separation = app.add_subcommand("separation", "Separation degree of every class");
  separation->add_option("--input", input, "cloud file")->required();
  separation->add_flag("--closed-form", closed_form, "use the determinant-ratio form");
  separation->add_flag("--no-center", no_center, "use uncentered volumes");

  auto* curvature = app.add_subcommand("curvature", "Mean Gauss curvature per class");
  curvature->add_option("--input", input, "cloud file")->required();
  curvature->add_option("--k", k, "neighbors per point")->capture_default_str();
  curvature->add_option("--rank-tol", rank_tol, "relative eigenvalue cutoff")->capture_default_str();
  curvature->add_option("--ridge", ridge, "quadric fit regularizer")->capture_default_str();
  curvature->add_flag("--include-center", include_center, "include the point in its neighborhood");
  curvature->add_flag("--values", per_point, "also print per-point curvature");

  auto* crloss = app.add_subcommand("crloss", "Curvature regularization loss");
  crloss->add_option("--curvatures", curvatures_text, "JSON array of class curvatures")->required();
  crloss->add_option("--epoch", epoch, "current epoch (1-based)")->capture_default_str();
  crloss->add_option("--tau", tau, "schedule base")->capture_default_str();
  crloss->add_option("--l-original", l_original, "original loss value")->capture_default_str();

  std::string experiment_name;
  auto* experiment = app.add_subcommand("experiment", "Reproduce a figure-level experiment as CSV");
  experiment->add_option("name", experiment_name, "fig2 | fig3 | tau-sweep | dynamics")
      ->required()
      ->check(CLI::IsMember({"fig2", "fig3", "tau-sweep", "dynamics"}));
  experiment->add_option("--out", out_path, "output CSV (stdout when omitted)");
  experiment->add_option("--seed", seed, "random seed")->capture_default_str();

  auto* train = app.add_subcommand("train", "Train the toy network and write its trace");
  train->add_option("--config", config_path, "JSON config file")->required();
  train->add_option("--trace", trace_path, "per-epoch trace CSV");
  train->add_option("--summary", summary_path, "summary JSON (stdout when omitted)");

  std::string kind, format = "csv";
  double radius = 1.0, w = 1.0, sigma = 2.25, spread = 2.0;
  std::vector<double> center{0.0, 0.0, 0.0};
  std::vector<std::size_t> counts{200, 200, 200};
  std::size_t dim = 8;
  bool ball = false;
  auto* generate = app.add_subcommand("generate", "Write a synthetic cloud");
  generate->add_option("kind", kind, "sphere | saddle | wave | plane | blobs")
      ->required()
      ->check(CLI::IsMember({"sphere", "saddle", "wave", "plane", "blobs"}));
  generate->add_option("--out", out_path, "output file")->required();
  generate->add_option("--format", format, "csv | matrix")
      ->check(CLI::IsMember({"csv", "matrix"}))
      ->capture_default_str();
  generate->add_option("--n", n, "points (sphere, saddle, wave, plane)")->capture_default_str();
  generate->add_option("--seed", seed, "random seed")->capture_default_str();
  generate->add_option("--radius", radius, "sphere radius")->capture_default_str();
  generate->add_option("--center", center, "sphere center")->expected(3);
  generate->add_flag("--ball", ball, "sample the solid ball instead of the surface");
  generate->add_option("--w", w, "surface parameter")->capture_default_str();
  generate->add_option("--counts", counts, "blob sizes per class");
  generate->add_option("--dim", dim, "blob dimension")->capture_default_str();
  generate->add_option("--spread", spread, "radius of the circle of blob means")->capture_default_str();
  generate->add_option("--sigma", sigma, "blob standard deviation")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << one_line(e.what()) << "\n";
    return 2;
  }

  try {
    if (*volume) {
      const CloudPtr cloud = load(input);
      json j = envelope();
      j["centered"] = !no_center;
      json vols = json::object();
      const std::size_t c = mgeom_cloud_class_count(cloud.get());
      for (std::size_t i = 0; i < c; ++i) {
        if (class_id && static_cast<std::size_t>(*class_id) != i) continue;
        double v = 0.0;
        check(mgeom_volume(cloud.get(), static_cast<int32_t>(i), no_center ? 0 : 1, &v));
        vols[std::to_string(i)] = v;
      }
      if (class_id && (*class_id < 0 || static_cast<std::size_t>(*class_id) >= c))
        throw Failure{MGEOM_ERR_INVALID_INPUT, "class " + std::to_string(*class_id) + " is not present"};
      j["volumes"] = vols;
      emit(j);
    } else if (*separation) {
      const CloudPtr cloud = load(input);
      const std::size_t c = mgeom_cloud_class_count(cloud.get());
      std::vector<double> sep(c), vol(c);
      double total = 0.0;
      check(mgeom_separation(cloud.get(), no_center ? 0 : 1, closed_form ? 1 : 0, sep.data(),
                             vol.data(), &total));
      json j = envelope();
      j["centered"] = !no_center;
      j["closed_form"] = closed_form;
      j["separation"] = sep;
      j["class_volume"] = vol;
      j["total_volume"] = total;
      emit(j);
    } else if (*curvature) {
      const CloudPtr cloud = load(input);
      mgeom_curvature_options opts{k, rank_tol, ridge, include_center ? 1 : 0};
      json j = envelope();
      j["k"] = k;
      json classes = json::array();
      for (std::size_t i = 0; i < mgeom_cloud_class_count(cloud.get()); ++i) {
        mgeom_curvature_summary s{};
        std::vector<double> values(mgeom_cloud_class_size(cloud.get(), i));
        check(mgeom_curvature(cloud.get(), i, &opts, &s, values.data()));
        json entry{{"class", i},
                   {"complexity", s.complexity},
                   {"signed_mean", s.signed_mean},
                   {"evaluated", s.evaluated},
                   {"skipped", s.skipped}};
        if (per_point) {
          json arr = json::array();
          for (double v : values) arr.push_back(number(v));
          entry["curvature"] = arr;
        }
        classes.push_back(entry);
      }
      j["classes"] = classes;
      emit(j);
    } else if (*crloss) {
      std::vector<double> g;
      try {
        g = json::parse(curvatures_text).get<std::vector<double>>();
      } catch (const json::exception& e) {
        throw Failure{MGEOM_ERR_PARSE, std::string("--curvatures: ") + e.what()};
      }
      std::vector<double> pen(g.size());
      double l_curv = 0.0, total = 0.0, weight = 0.0;
      check(mgeom_cr_penalties(g.data(), g.size(), pen.data()));
      check(mgeom_cr_loss(g.data(), g.size(), &l_curv));
      check(mgeom_combined_loss(l_original, l_curv, tau, epoch, &total, &weight));
      json j = envelope();
      j["penalties"] = pen;
      j["l_curvature"] = l_curv;
      j["weight"] = weight;
      j["total"] = total;
      emit(j);
    } else if (*experiment) {
      char* raw = nullptr;
      check(mgeom_run_experiment(experiment_name.c_str(), seed, &raw));
      const CString csv(raw);
      if (out_path.empty())
        std::cout << csv.get();
      else
        spill(out_path, csv.get());
    } else if (*train) {
      const std::string config = slurp(config_path);
      char* trace_raw = nullptr;
      char* summary_raw = nullptr;
      const mgeom_status s = mgeom_train(config.c_str(), &trace_raw, &summary_raw);
      const CString trace(trace_raw), summary(summary_raw);
      if (trace && !trace_path.empty()) spill(trace_path, trace.get());
      check(s);
      if (summary_path.empty())
        std::cout << summary.get();
      else
        spill(summary_path, summary.get());
    } else if (*generate) {
      mgeom_cloud* raw = nullptr;
      const uint64_t s = seed;
      if (kind == "sphere") {
        check(mgeom_generate_sphere(radius, center.data(), n, s, ball ? 1 : 0, &raw));
      } else if (kind == "saddle") {
        check(mgeom_generate_saddle(w, n, s, &raw));
      } else if (kind == "wave") {
        check(mgeom_generate_wave(w, n, s, &raw));
      } else if (kind == "plane") {
        check(mgeom_generate_plane(n, s, &raw));
      } else {
        if (dim < 2) throw Failure{MGEOM_ERR_INVALID_INPUT, "--dim must be at least 2"};
        std::vector<double> means(counts.size() * dim, 0.0);
        for (std::size_t c = 0; c < counts.size(); ++c) {
          const double a = 2.0 * std::numbers::pi * static_cast<double>(c) /
                           static_cast<double>(counts.size());
          means[c * dim] = spread * std::cos(a);
          means[c * dim + 1] = spread * std::sin(a);
        }
        check(mgeom_generate_blobs(counts.size(), counts.data(), dim, means.data(), sigma, s, &raw));
      }
      const CloudPtr cloud(raw);
      check(format == "csv" ? mgeom_cloud_save_csv(cloud.get(), out_path.c_str())
                            : mgeom_cloud_save_matrix(cloud.get(), out_path.c_str()));
    }
  } catch (const Failure& f) {
    std::cerr << "error: " << mgeom_status_string(f.status) << ": " << one_line(f.message) << "\n";
    return mgeom_status_exit_code(f.status);
  } catch (const std::exception& e) {
    std::cerr << "error: internal-error: " << one_line(e.what()) << "\n";
    return 3;
  }
  return 0;
}
