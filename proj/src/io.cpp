#include "tpsh/io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "json.hpp"
#include "tpsh/errors.hpp"

namespace tpsh {

namespace {

constexpr char kMagic[8] = {'T', 'P', 'S', 'H', 'M', 'A', 'T', '1'};

static_assert(sizeof(double) == 8, "payload format requires 64-bit doubles");

void write_u64_le(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t read_u64_le(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  if (!is) throw FormatError("matrix file: truncated header length");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
  return v;
}

void save_payload(const std::string& path, int rows, int cols,
                  const std::string& dtype, const std::string& metadata_json,
                  const std::vector<double>& payload) {
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(metadata_json);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("save_matrix: bad metadata JSON: ") +
                      e.what());
  }
  header["rows"] = rows;
  header["cols"] = cols;
  header["dtype"] = dtype;
  const std::string text = header.dump();

  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("save_matrix: cannot open " + path);
  os.write(kMagic, sizeof(kMagic));
  write_u64_le(os, text.size());
  os.write(text.data(), text.size());
  os.write(reinterpret_cast<const char*>(payload.data()),
           payload.size() * sizeof(double));
  if (!os) throw IoError("save_matrix: write failed for " + path);
}

}  // namespace

void save_matrix(const std::string& path, const CMat& matrix,
                 const std::string& metadata_json) {
  const int rows = static_cast<int>(matrix.rows());
  const int cols = static_cast<int>(matrix.cols());
  std::vector<double> payload;
  payload.reserve(static_cast<std::size_t>(rows) * cols * 2);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      payload.push_back(matrix(i, j).real());
      payload.push_back(matrix(i, j).imag());
    }
  save_payload(path, rows, cols, "c128le", metadata_json, payload);
}

void save_matrix(const std::string& path, const Eigen::MatrixXd& matrix,
                 const std::string& metadata_json) {
  const int rows = static_cast<int>(matrix.rows());
  const int cols = static_cast<int>(matrix.cols());
  std::vector<double> payload;
  payload.reserve(static_cast<std::size_t>(rows) * cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) payload.push_back(matrix(i, j));
  save_payload(path, rows, cols, "f64le", metadata_json, payload);
}

LoadedMatrix load_matrix(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("load_matrix: cannot open " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(magic)) != 0)
    throw FormatError("load_matrix: bad magic");
  const std::uint64_t header_len = read_u64_le(is);
  if (header_len > (1u << 20))
    throw FormatError("load_matrix: implausible header length");
  std::string text(header_len, '\0');
  is.read(text.data(), header_len);
  if (!is) throw FormatError("load_matrix: truncated header");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("load_matrix: bad header JSON: ") + e.what());
  }

  int rows = 0, cols = 0;
  std::string dtype;
  try {
    rows = header.at("rows").get<int>();
    cols = header.at("cols").get<int>();
    dtype = header.at("dtype").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("load_matrix: missing header key: ") +
                      e.what());
  }
  if (rows < 0 || cols < 0) throw FormatError("load_matrix: negative shape");

  const bool is_complex = dtype == "c128le";
  if (!is_complex && dtype != "f64le")
    throw FormatError("load_matrix: unsupported dtype " + dtype);

  const std::size_t n_doubles =
      static_cast<std::size_t>(rows) * cols * (is_complex ? 2 : 1);
  std::vector<double> payload(n_doubles);
  is.read(reinterpret_cast<char*>(payload.data()),
          n_doubles * sizeof(double));
  if (!is || static_cast<std::size_t>(is.gcount()) != n_doubles * sizeof(double))
    throw FormatError("load_matrix: truncated payload");
  // Exactly one payload expected.
  char extra;
  if (is.read(&extra, 1))
    throw FormatError("load_matrix: trailing bytes after payload");

  LoadedMatrix out;
  out.metadata_json = text;
  out.is_complex = is_complex;
  std::size_t idx = 0;
  if (is_complex) {
    out.complex_data.resize(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) {
        const double re = payload[idx++];
        const double im = payload[idx++];
        out.complex_data(i, j) = Complex(re, im);
      }
  } else {
    out.real_data.resize(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) out.real_data(i, j) = payload[idx++];
  }
  return out;
}

void save_tm(const std::string& path, const TransmissionMatrix& tm) {
  nlohmann::json meta;
  meta["basis"] = tm.basis == TmBasis::pixel ? "pixel" : "hadamard";
  meta["phase_steps"] = tm.phase_steps;
  meta["seed"] = tm.seed;
  meta["reference"] = tm.reference;
  meta["modulated_segments"] = tm.modulated_segments;
  meta["segmentation"] = {
      {"n_segments", tm.segmentation.n_segments},
      {"aperture_start", tm.segmentation.aperture_start},
      {"pixels_per_segment", tm.segmentation.pixels_per_segment}};
  save_matrix(path, tm.entries, meta.dump());
}

TransmissionMatrix load_tm(const std::string& path) {
  LoadedMatrix raw = load_matrix(path);
  if (!raw.is_complex) throw FormatError("load_tm: expected c128le payload");
  nlohmann::json meta = nlohmann::json::parse(raw.metadata_json);
  TransmissionMatrix tm;
  tm.entries = raw.complex_data;
  try {
    tm.basis = meta.at("basis").get<std::string>() == "hadamard"
                   ? TmBasis::hadamard
                   : TmBasis::pixel;
    tm.phase_steps = meta.at("phase_steps").get<int>();
    tm.seed = meta.at("seed").get<std::uint64_t>();
    tm.reference = meta.at("reference").get<std::string>();
    tm.modulated_segments =
        meta.at("modulated_segments").get<std::vector<int>>();
    const auto& seg = meta.at("segmentation");
    tm.segmentation = SlmMask::flat(seg.at("n_segments").get<int>(),
                                    seg.at("aperture_start").get<int>(),
                                    seg.at("pixels_per_segment").get<int>());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("load_tm: missing metadata: ") + e.what());
  }
  return tm;
}

void save_phase_screen(const std::string& path, const PhaseScreen& screen) {
  nlohmann::json meta;
  meta["kind"] = "phase_screen";
  meta["correlation_length"] = screen.correlation_length;
  meta["seed"] = screen.seed;
  meta["n_points"] = screen.grid.n();
  meta["extent"] = screen.grid.extent();
  Eigen::MatrixXd row(1, screen.phases.size());
  row.row(0) = screen.phases.transpose();
  save_matrix(path, row, meta.dump());
}

void save_profile_csv(const std::string& path,
                      const IntensityProfile& profile) {
  std::ofstream os(path);
  if (!os) throw IoError("save_profile_csv: cannot open " + path);
  os << "pixel,x_meters,intensity\n";
  char buf[96];
  for (int k = 0; k < profile.values.size(); ++k) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g\n", k,
                  profile.grid.coord(k), profile.values(k));
    os << buf;
  }
}

}  // namespace tpsh
