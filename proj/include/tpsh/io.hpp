#pragma once

#include <string>

#include "tpsh/fft.hpp"
#include "tpsh/wavefront.hpp"

namespace tpsh {

// Shared binary matrix container:
//   8-byte magic "TPSHMAT1"
//   8-byte little-endian u64 header length
//   JSON header (rows, cols, dtype, plus free-form metadata)
//   payload, row-major little-endian:
//     dtype "c128le": float64 pairs (re, im)
//     dtype "f64le":  float64
// Loading verifies magic, dtype and exact payload length; a truncated or
// malformed file raises FormatError without returning partial data.
void save_matrix(const std::string& path, const CMat& matrix,
                 const std::string& metadata_json = "{}");
void save_matrix(const std::string& path, const Eigen::MatrixXd& matrix,
                 const std::string& metadata_json = "{}");

struct LoadedMatrix {
  CMat complex_data;          // filled for dtype c128le
  Eigen::MatrixXd real_data;  // filled for dtype f64le
  bool is_complex = false;
  std::string metadata_json;  // full header text
};

LoadedMatrix load_matrix(const std::string& path);

// Transmission matrix with its acquisition metadata in the header.
void save_tm(const std::string& path, const TransmissionMatrix& tm);
TransmissionMatrix load_tm(const std::string& path);

// Phase screen as an f64le row vector plus metadata.
void save_phase_screen(const std::string& path, const PhaseScreen& screen);

// Intensity profile / generic columns as CSV.
void save_profile_csv(const std::string& path, const IntensityProfile& profile);

}  // namespace tpsh
