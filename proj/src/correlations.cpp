#include "tpsh/correlations.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "json.hpp"
#include "tpsh/errors.hpp"
#include "tpsh/fft.hpp"
#include "tpsh/rng.hpp"

namespace tpsh {

namespace {
constexpr char kFrameMagic[16] = {'T', 'P', 'S', 'H', 'F', 'R', 'M', 'S',
                                  '1', 0,   0,   0,   0,   0,   0,   0};
}

G2Map G2Map::restricted(const PixelRange& roi) const {
  if (roi.size() <= 0 || roi.first < 0 || roi.last > values.rows())
    throw EmptyRegion("G2Map::restricted: bad window");
  G2Map out{Grid1D(roi.size(), grid.dx() * roi.size()),
            values.block(roi.first, roi.first, roi.size(), roi.size())};
  const double mass = out.values.sum() * out.grid.dx() * out.grid.dx();
  if (!(mass > 0.0)) throw ZeroMean("G2Map::restricted: empty window");
  out.values /= mass;
  return out;
}

G2Map g2_exact(const OutputJointAmplitude& psi_out) {
  Eigen::MatrixXd values = psi_out.amplitude.cwiseAbs2();
  const double dx = psi_out.grid.dx();
  const double mass = values.sum() * dx * dx;
  if (!(mass > 0.0)) throw ZeroMean("g2_exact: zero amplitude");
  values /= mass;
  return G2Map{psi_out.grid, values};
}

G2Projection project(const G2Map& map, ProjectionAxis axis) {
  const int n = static_cast<int>(map.values.rows());
  const double w = map.grid.dx() * map.grid.dx();
  G2Projection proj;
  proj.axis = axis;
  proj.n_pixels = n;
  proj.values = RVec::Zero(2 * n - 1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const int k = (axis == ProjectionAxis::minus) ? (i - j + n - 1) : (i + j);
      proj.values(k) += map.values(i, j) * w;
    }
  return proj;
}

G2Projection pair_density(const G2Projection& projection) {
  G2Projection out = projection;
  for (int k = 0; k < out.values.size(); ++k) {
    const int pairs = out.n_pixels - std::abs(out.offset_of_bin(k));
    out.values(k) /= pairs;
  }
  return out;
}

double peak_metric(const G2Projection& projection, int peak_halfwidth) {
  const int n = projection.n_pixels;
  if (peak_halfwidth < 0 || peak_halfwidth >= n / 4)
    throw ConfigError("peak_metric: halfwidth must be in [0, n/4)");
  double peak_sum = 0.0;
  int peak_count = 0;
  std::vector<double> background;
  for (int k = 0; k < projection.values.size(); ++k) {
    const int d = std::abs(projection.offset_of_bin(k));
    if (d <= peak_halfwidth) {
      peak_sum += projection.values(k);
      ++peak_count;
    } else if (d > 4 * peak_halfwidth && d <= n / 2) {
      background.push_back(projection.values(k));
    }
  }
  if (background.empty())
    throw DegenerateBackground("peak_metric: no background bins");
  std::nth_element(background.begin(),
                   background.begin() + background.size() / 2,
                   background.end());
  const double median = background[background.size() / 2];
  if (!(median > 0.0))
    throw DegenerateBackground("peak_metric: zero median background");
  return (peak_sum / peak_count) / median;
}

void DetectorParams::validate() const {
  if (!(mu_pair >= 0.0) || !std::isfinite(mu_pair))
    throw InvalidDetectorParams("mu_pair must be >= 0");
  if (!(p_dark >= 0.0) || p_dark >= 1.0)
    throw InvalidDetectorParams("p_dark must be in [0, 1)");
}

RVec FrameStack::frame_dense(int f) const {
  RVec out = RVec::Zero(n_pixels);
  for (const auto& [px, cnt] : events[f]) out(px) += cnt;
  return out;
}

FrameStack simulate_frames(const G2Map& map, const DetectorParams& detector,
                           int n_frames, std::uint64_t seed) {
  detector.validate();
  if (n_frames < 0) throw ConfigError("simulate_frames: n_frames < 0");
  const int n = static_cast<int>(map.values.rows());
  if (n > 65535) throw ConfigError("simulate_frames: grid too large for u16");

  // CDF over the flattened joint map.
  std::vector<double> cdf(static_cast<std::size_t>(n) * n);
  double acc = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      acc += std::max(0.0, map.values(i, j));
      cdf[static_cast<std::size_t>(i) * n + j] = acc;
    }
  if (!(acc > 0.0) && detector.mu_pair > 0.0)
    throw ZeroMean("simulate_frames: empty joint map");

  FrameStack stack;
  stack.n_pixels = n;
  stack.n_frames = n_frames;
  stack.detector = detector;
  stack.seed = seed;
  stack.events.resize(n_frames);

  Rng rng(seed);
  std::vector<int> counts(n);
  for (int f = 0; f < n_frames; ++f) {
    std::fill(counts.begin(), counts.end(), 0);
    bool any = false;
    const long pairs =
        detector.mu_pair > 0.0 ? rng.poisson(detector.mu_pair) : 0;
    for (long p = 0; p < pairs; ++p) {
      const int flat = rng.sample_cdf(cdf);
      counts[flat / n] += 1;
      counts[flat % n] += 1;
      any = true;
    }
    if (detector.p_dark > 0.0) {
      for (int px = 0; px < n; ++px) {
        const long d = rng.poisson(detector.p_dark);
        if (d > 0) {
          counts[px] += static_cast<int>(d);
          any = true;
        }
      }
    }
    if (any) {
      auto& ev = stack.events[f];
      for (int px = 0; px < n; ++px) {
        if (counts[px] == 0) continue;
        int c = counts[px];
        if (detector.threshold) c = 1;
        if (c > 255) c = 255;
        ev.emplace_back(static_cast<std::uint16_t>(px),
                        static_cast<std::uint8_t>(c));
      }
    }
  }
  return stack;
}

Eigen::MatrixXd estimate_g2(const FrameStack& stack) {
  const int m = stack.n_frames;
  if (m < 2) throw TooFewFrames("estimate_g2: need at least 2 frames");
  const int n = stack.n_pixels;
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
  // Frames are sparse; accumulate outer products event-by-event.
  for (int f = 0; f + 1 < m; ++f) {
    for (const auto& [p1, c1] : stack.events[f]) {
      for (const auto& [p2, c2] : stack.events[f])
        acc(p1, p2) += double(c1) * double(c2);
      for (const auto& [p2, c2] : stack.events[f + 1])
        acc(p1, p2) -= double(c1) * double(c2);
    }
  }
  return acc / double(m - 1);
}

G2Projection lowpass_denoise(const G2Projection& projection, double cutoff) {
  if (!(cutoff > 0.0) || cutoff > 1.0)
    throw ConfigError("lowpass_denoise: cutoff must be in (0, 1]");
  const int len = static_cast<int>(projection.values.size());
  CVec spec = plain_dft(projection.values.cast<Complex>().eval());
  // Frequency index of bin k is min(k, len - k); keep those at or below
  // cutoff * Nyquist.
  const double nyquist = len / 2.0;
  for (int k = 0; k < len; ++k) {
    const double freq = std::min(k, len - k);
    if (freq > cutoff * nyquist) spec(k) = Complex(0.0, 0.0);
  }
  CVec smooth = plain_idft(spec) / double(len);
  G2Projection out = projection;
  for (int k = 0; k < len; ++k) out.values(k) = smooth(k).real();
  return out;
}

void save_frames(const std::string& path, const FrameStack& stack) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("save_frames: cannot open " + path);
  os.write(kFrameMagic, sizeof(kFrameMagic));
  std::vector<std::uint8_t> row(stack.n_pixels);
  for (int f = 0; f < stack.n_frames; ++f) {
    std::fill(row.begin(), row.end(), 0);
    for (const auto& [px, cnt] : stack.events[f]) row[px] = cnt;
    os.write(reinterpret_cast<const char*>(row.data()), row.size());
  }
  if (!os) throw IoError("save_frames: write failed for " + path);

  nlohmann::json meta;
  meta["n_pixels"] = stack.n_pixels;
  meta["n_frames"] = stack.n_frames;
  meta["mu_pair"] = stack.detector.mu_pair;
  meta["p_dark"] = stack.detector.p_dark;
  meta["threshold"] = stack.detector.threshold;
  meta["seed"] = stack.seed;
  std::ofstream js(path + ".json");
  if (!js) throw IoError("save_frames: cannot open " + path + ".json");
  js << meta.dump(2) << "\n";
}

FrameStack load_frames(const std::string& path) {
  std::ifstream js(path + ".json");
  if (!js) throw IoError("load_frames: missing sidecar " + path + ".json");
  nlohmann::json meta;
  try {
    js >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("load_frames: bad sidecar: ") + e.what());
  }

  FrameStack stack;
  try {
    stack.n_pixels = meta.at("n_pixels").get<int>();
    stack.n_frames = meta.at("n_frames").get<int>();
    stack.detector.mu_pair = meta.at("mu_pair").get<double>();
    stack.detector.p_dark = meta.at("p_dark").get<double>();
    stack.detector.threshold = meta.at("threshold").get<bool>();
    stack.seed = meta.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("load_frames: missing key: ") + e.what());
  }

  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("load_frames: cannot open " + path);
  char magic[16];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kFrameMagic, sizeof(magic)) != 0)
    throw FormatError("load_frames: bad magic");

  stack.events.resize(stack.n_frames);
  std::vector<std::uint8_t> row(stack.n_pixels);
  for (int f = 0; f < stack.n_frames; ++f) {
    is.read(reinterpret_cast<char*>(row.data()), row.size());
    if (!is) throw FormatError("load_frames: truncated frame data");
    for (int px = 0; px < stack.n_pixels; ++px)
      if (row[px] != 0)
        stack.events[f].emplace_back(static_cast<std::uint16_t>(px), row[px]);
  }
  return stack;
}

void save_projection_csv(const std::string& path, const G2Projection& proj) {
  std::ofstream os(path);
  if (!os) throw IoError("save_projection_csv: cannot open " + path);
  os << "offset_pixels,value\n";
  char buf[64];
  for (int k = 0; k < proj.values.size(); ++k) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g\n", proj.offset_of_bin(k),
                  proj.values(k));
    os << buf;
  }
}

}  // namespace tpsh
