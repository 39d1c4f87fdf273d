#include "mgeom/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>

#include "mgeom/error.hpp"

namespace mgeom {

namespace {

static_assert(std::endian::native == std::endian::little, "little-endian host required");

constexpr std::uint8_t kMagic[4] = {0x50, 0x4D, 0x47, 0x4D};
constexpr std::uint16_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 4 + 2 + 4 + 4;

template <class T>
void put(std::vector<std::uint8_t>& out, std::size_t& at, T v) {
  std::memcpy(out.data() + at, &v, sizeof(T));
  at += sizeof(T);
}

template <class T>
T get(const std::vector<std::uint8_t>& in, std::size_t& at) {
  require(at + sizeof(T) <= in.size(), ErrorCode::Parse, "matrix file is truncated");
  T v;
  std::memcpy(&v, in.data() + at, sizeof(T));
  at += sizeof(T);
  return v;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, std::size_t line) {
  require(!s.empty(), ErrorCode::Parse, "empty field on line " + std::to_string(line));
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  require(end == s.c_str() + s.size() && std::isfinite(v), ErrorCode::Parse,
          "bad number '" + s + "' on line " + std::to_string(line));
  return v;
}

ClassId parse_class(const std::string& s, std::size_t line) {
  require(!s.empty() && s.find_first_not_of("0123456789") == std::string::npos, ErrorCode::Parse,
          "bad class id '" + s + "' on line " + std::to_string(line));
  const unsigned long long v = std::stoull(s);
  require(v <= 0x7fffffffULL, ErrorCode::Parse, "class id too large on line " + std::to_string(line));
  return static_cast<ClassId>(v);
}

using nlohmann::json;

Activation parse_activation(const json& j) {
  const auto s = j.get<std::string>();
  if (s == "tanh") return Activation::Tanh;
  if (s == "relu") return Activation::Relu;
  if (s == "identity") return Activation::Identity;
  fail(ErrorCode::Parse, "unknown activation '" + s + "'");
}

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::Tanh: return "tanh";
    case Activation::Relu: return "relu";
    case Activation::Identity: return "identity";
  }
  return "identity";
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

std::vector<std::uint8_t> encode_matrix_file(const MatrixFile& file) {
  const Matrix& m = file.data;
  require(m.rows() <= 0xffffffffULL && m.cols() <= 0xffffffffULL, ErrorCode::InvalidInput,
          "matrix too large for the file format");
  if (file.labels)
    require(file.labels->size() == m.rows(), ErrorCode::InvalidInput,
            "label block needs one id per row");
  const std::size_t label_bytes = file.labels ? 1 + 4 * m.rows() : 0;
  std::vector<std::uint8_t> out(kHeaderBytes + 8 * m.values().size() + label_bytes);
  std::size_t at = 0;
  for (std::uint8_t b : kMagic) put<std::uint8_t>(out, at, b);
  put<std::uint16_t>(out, at, kVersion);
  put<std::uint32_t>(out, at, static_cast<std::uint32_t>(m.rows()));
  put<std::uint32_t>(out, at, static_cast<std::uint32_t>(m.cols()));
  for (double v : m.values()) put<double>(out, at, v);
  if (file.labels) {
    put<std::uint8_t>(out, at, 1);
    for (std::uint32_t id : *file.labels) put<std::uint32_t>(out, at, id);
  }
  return out;
}

MatrixFile decode_matrix_file(const std::vector<std::uint8_t>& bytes) {
  require(bytes.size() >= kHeaderBytes && std::memcmp(bytes.data(), kMagic, 4) == 0,
          ErrorCode::Parse, "not a matrix file (bad magic)");
  std::size_t at = 4;
  const auto version = get<std::uint16_t>(bytes, at);
  require(version == kVersion, ErrorCode::Parse,
          "unsupported matrix file version " + std::to_string(version));
  const auto rows = get<std::uint32_t>(bytes, at);
  const auto cols = get<std::uint32_t>(bytes, at);
  const std::uint64_t payload = static_cast<std::uint64_t>(rows) * cols * 8;
  require(bytes.size() - at >= payload, ErrorCode::Parse, "matrix file is truncated");

  MatrixFile file;
  file.data = Matrix(rows, cols);
  for (double& v : file.data.values()) v = get<double>(bytes, at);
  if (at == bytes.size()) return file;

  const auto marker = get<std::uint8_t>(bytes, at);
  require(marker == 1, ErrorCode::Parse, "unexpected bytes after matrix payload");
  require(bytes.size() - at == static_cast<std::uint64_t>(rows) * 4, ErrorCode::Parse,
          "label block length does not match row count");
  std::vector<std::uint32_t> labels(rows);
  for (auto& id : labels) id = get<std::uint32_t>(bytes, at);
  file.labels = std::move(labels);
  return file;
}

void write_matrix_file(const std::string& path, const MatrixFile& file) {
  const auto bytes = encode_matrix_file(file);
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::Io, "cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  require(static_cast<bool>(out), ErrorCode::Io, "failed writing '" + path + "'");
}

MatrixFile read_matrix_file(const std::string& path) {
  const std::string text = read_text_file(path);
  return decode_matrix_file(std::vector<std::uint8_t>(text.begin(), text.end()));
}

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string encode_cloud_csv(const LabeledCloud& cloud) {
  std::string out = "class";
  for (std::size_t d = 0; d < cloud.dim(); ++d) out += ",d" + std::to_string(d);
  out += '\n';
  for (std::size_t j = 0; j < cloud.size(); ++j) {
    out += std::to_string(cloud.labels()[j]);
    for (std::size_t d = 0; d < cloud.dim(); ++d) {
      out += ',';
      out += format_real(cloud.points()(d, j));
    }
    out += '\n';
  }
  return out;
}

LabeledCloud decode_cloud_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::Parse, "CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_fields(line);
  require(header.size() >= 2 && header[0] == "class", ErrorCode::Parse,
          "CSV header must be class,d0,...");
  const std::size_t p = header.size() - 1;
  for (std::size_t d = 0; d < p; ++d)
    require(header[d + 1] == "d" + std::to_string(d), ErrorCode::Parse,
            "CSV header column " + std::to_string(d + 1) + " must be d" + std::to_string(d));

  std::vector<double> coords;
  std::vector<ClassId> labels;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    require(fields.size() == p + 1, ErrorCode::Parse,
            "line " + std::to_string(lineno) + " has " + std::to_string(fields.size()) +
                " fields, expected " + std::to_string(p + 1));
    labels.push_back(parse_class(fields[0], lineno));
    for (std::size_t d = 0; d < p; ++d) coords.push_back(parse_double(fields[d + 1], lineno));
  }
  require(!labels.empty(), ErrorCode::Parse, "CSV has no data rows");
  Matrix points(p, labels.size());
  for (std::size_t j = 0; j < labels.size(); ++j)
    for (std::size_t d = 0; d < p; ++d) points(d, j) = coords[j * p + d];
  return LabeledCloud(std::move(points), std::move(labels));
}

void write_cloud_csv(const std::string& path, const LabeledCloud& cloud) {
  write_text_file(path, encode_cloud_csv(cloud));
}

LabeledCloud read_cloud_csv(const std::string& path) { return decode_cloud_csv(read_text_file(path)); }

LabeledCloud read_cloud(const std::string& path) {
  const std::string text = read_text_file(path);
  if (text.size() >= 4 && std::memcmp(text.data(), kMagic, 4) == 0) {
    const MatrixFile file = decode_matrix_file(std::vector<std::uint8_t>(text.begin(), text.end()));
    std::vector<ClassId> labels(file.data.rows(), 0);
    if (file.labels)
      for (std::size_t j = 0; j < labels.size(); ++j) {
        require((*file.labels)[j] <= 0x7fffffffU, ErrorCode::Parse, "class id too large");
        labels[j] = static_cast<ClassId>((*file.labels)[j]);
      }
    return LabeledCloud(file.data.transposed(), std::move(labels));
  }
  return decode_cloud_csv(text);
}

void write_cloud_matrix_file(const std::string& path, const LabeledCloud& cloud) {
  MatrixFile file{cloud.points().transposed(), std::vector<std::uint32_t>()};
  for (ClassId c : cloud.labels()) file.labels->push_back(static_cast<std::uint32_t>(c));
  write_matrix_file(path, file);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::Io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  require(!in.bad(), ErrorCode::Io, "failed reading '" + path + "'");
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::Io, "cannot open '" + path + "' for writing");
  out << text;
  require(static_cast<bool>(out), ErrorCode::Io, "failed writing '" + path + "'");
}

namespace {

std::uint64_t count_value(const json& v, const std::string& key) {
  require(v.is_number_unsigned(), ErrorCode::Parse, "'" + key + "' must be a nonnegative integer");
  return v.get<std::uint64_t>();
}

std::vector<std::size_t> count_list(const json& v, const std::string& key) {
  require(v.is_array(), ErrorCode::Parse, "'" + key + "' must be an array");
  std::vector<std::size_t> out;
  for (const auto& e : v) out.push_back(count_value(e, key));
  return out;
}

double real_value(const json& v, const std::string& key) {
  require(v.is_number(), ErrorCode::Parse, "'" + key + "' must be a number");
  return v.get<double>();
}

}  // namespace

TrainConfig parse_train_config(const std::string& json_text) {
  TrainConfig cfg;
  try {
    const json j = json::parse(json_text);
    require(j.is_object(), ErrorCode::Parse, "config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
      if (key == "mode") {
        const auto mode = value.get<std::string>();
        if (mode == "ce") cfg.mode = TrainMode::Ce;
        else if (mode == "ce+cr") cfg.mode = TrainMode::CeCr;
        else fail(ErrorCode::Parse, "mode must be \"ce\" or \"ce+cr\"");
      } else if (key == "epochs") cfg.epochs = count_value(value, key);
      else if (key == "batch_size") cfg.batch_size = count_value(value, key);
      else if (key == "learning_rate") cfg.learning_rate = real_value(value, key);
      else if (key == "seed") cfg.seed = count_value(value, key);
      else if (key == "hidden") cfg.hidden = count_list(value, key);
      else if (key == "hidden_activation") cfg.hidden_activation = parse_activation(value);
      else if (key == "feature_activation") cfg.feature_activation = parse_activation(value);
      else if (key == "k") cfg.k = count_value(value, key);
      else if (key == "tau") cfg.tau = real_value(value, key);
      else if (key == "warmup_epochs") cfg.warmup_epochs = count_value(value, key);
      else if (key == "curvature_every") cfg.curvature_every = count_value(value, key);
      else if (key == "fd_step") cfg.fd_step = real_value(value, key);
      else if (key == "holdout_fraction") cfg.holdout_fraction = real_value(value, key);
      else if (key == "early_epoch") cfg.early_epoch = count_value(value, key);
      else if (key == "dataset") {
        require(value.is_object(), ErrorCode::Parse, "dataset must be an object");
        for (const auto& [dk, dv] : value.items()) {
          if (dk == "counts") cfg.data.counts = count_list(dv, dk);
          else if (dk == "input_dim") cfg.data.input_dim = count_value(dv, dk);
          else if (dk == "means") cfg.data.means = dv.get<std::vector<std::vector<double>>>();
          else if (dk == "spread") cfg.data.spread = real_value(dv, dk);
          else if (dk == "sigma") cfg.data.sigma = real_value(dv, dk);
          else if (dk == "seed") cfg.data.seed = count_value(dv, dk);
          else fail(ErrorCode::Parse, "unknown dataset key '" + dk + "'");
        }
      } else {
        fail(ErrorCode::Parse, "unknown config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, std::string("malformed config: ") + e.what());
  }
  return cfg;
}

std::string trace_csv(const TrainingTrace& trace) {
  const std::size_t c = trace.class_count;
  std::string out = "epoch,loss";
  for (const char* prefix : {"acc_", "sep_", "cx_"})
    for (std::size_t i = 0; i < c; ++i) out += "," + std::string(prefix) + std::to_string(i);
  out += ",mean_separation,mean_complexity,pcc_acc_sep,pcc_acc_cx,acc_variance,bias_ratio,cr_steps\n";

  auto mean_of = [](const std::vector<double>& v) {
    double s = 0.0;
    std::size_t n = 0;
    for (double x : v)
      if (std::isfinite(x)) {
        s += x;
        ++n;
      }
    return n == 0 ? std::nan("") : s / static_cast<double>(n);
  };
  for (const auto& r : trace.epochs) {
    out += std::to_string(r.epoch) + "," + format_real(r.loss);
    for (const auto* v : {&r.accuracy, &r.separation, &r.complexity})
      for (double x : *v) out += "," + format_real(x);
    out += "," + format_real(mean_of(r.separation)) + "," + format_real(mean_of(r.complexity));
    out += "," + format_real(r.pcc_accuracy_separation) + "," + format_real(r.pcc_accuracy_complexity);
    out += "," + format_real(r.accuracy_variance) + "," + format_real(r.bias_ratio);
    out += "," + std::to_string(r.cr_steps) + "\n";
  }
  return out;
}

std::string trace_summary_json(const TrainConfig& config, const TrainingTrace& trace) {
  const TraceSummary s = summarize(trace, config.early_epoch);
  json j;
  j["schema_version"] = 1;
  j["mode"] = config.mode == TrainMode::Ce ? "ce" : "ce+cr";
  j["seed"] = config.seed;
  j["epochs"] = trace.epochs.size();
  j["classes"] = trace.class_count;
  j["hidden_activation"] = activation_name(config.hidden_activation);
  j["feature_activation"] = activation_name(config.feature_activation);
  if (!trace.epochs.empty()) {
    const auto& last = trace.epochs.back();
    j["final_loss"] = number_or_null(last.loss);
    json acc = json::array(), cx = json::array(), sep = json::array();
    for (double v : last.accuracy) acc.push_back(number_or_null(v));
    for (double v : last.complexity) cx.push_back(number_or_null(v));
    for (double v : last.separation) sep.push_back(number_or_null(v));
    j["final_accuracy"] = acc;
    j["final_complexity"] = cx;
    j["final_separation"] = sep;
  }
  j["final_mean_accuracy"] = number_or_null(s.final_mean_accuracy);
  j["final_accuracy_variance"] = number_or_null(s.final_accuracy_variance);
  j["final_curvature_variance"] = number_or_null(s.final_curvature_variance);
  j["spearman_epoch_separation"] = number_or_null(s.spearman_separation);
  j["spearman_epoch_complexity"] = number_or_null(s.spearman_complexity);
  j["separation_rising"] = s.separation_rising;
  j["complexity_falling"] = s.complexity_falling;
  j["early_epoch"] = config.early_epoch;
  j["early_pcc_acc_sep"] = optional_number(s.early_pcc_separation);
  j["late_pcc_acc_sep"] = optional_number(s.late_pcc_separation);
  j["early_pcc_acc_cx"] = optional_number(s.early_pcc_complexity);
  j["late_pcc_acc_cx"] = optional_number(s.late_pcc_complexity);
  j["pcc_crossing"] = s.pcc_crossing;
  return j.dump(2) + "\n";
}

}  // namespace mgeom
