#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mgeom/manifold.hpp"
#include "mgeom/matrix.hpp"
#include "mgeom/trainer.hpp"

namespace mgeom {

// Binary matrix file:
//   "PMGM" | u16 version = 1 | u32 rows | u32 cols | rows*cols f64, row-major
//   [ u8 marker = 1 | rows x u32 class ids ]
// All integers and floats little-endian. Clouds are stored one point per row.

struct MatrixFile {
  Matrix data;
  std::optional<std::vector<std::uint32_t>> labels;
};

std::vector<std::uint8_t> encode_matrix_file(const MatrixFile& file);
MatrixFile decode_matrix_file(const std::vector<std::uint8_t>& bytes);

void write_matrix_file(const std::string& path, const MatrixFile& file);
MatrixFile read_matrix_file(const std::string& path);

// Cloud CSV: header "class,d0,...,d{p-1}", one row per point.
std::string encode_cloud_csv(const LabeledCloud& cloud);
LabeledCloud decode_cloud_csv(const std::string& text);

void write_cloud_csv(const std::string& path, const LabeledCloud& cloud);
LabeledCloud read_cloud_csv(const std::string& path);

/// Reads a cloud from either format, chosen by the file's leading bytes.
/// Matrix files without a label block load with every label 0.
LabeledCloud read_cloud(const std::string& path);
void write_cloud_matrix_file(const std::string& path, const LabeledCloud& cloud);

/// %.17g formatting.
std::string format_real(double v);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/// Training config from JSON text; unknown keys are rejected.
TrainConfig parse_train_config(const std::string& json_text);

/// One row per epoch: epoch,loss,acc_*,sep_*,cx_*,mean_separation,
/// mean_complexity,pcc_acc_sep,pcc_acc_cx,acc_variance,bias_ratio,cr_steps
std::string trace_csv(const TrainingTrace& trace);

/// JSON summary with schema_version = 1.
std::string trace_summary_json(const TrainConfig& config, const TrainingTrace& trace);

}  // namespace mgeom
