#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tpsh/propagation.hpp"

namespace tpsh {

// Joint two-photon detection probability over (x1, x2); for the exact map
// sum values * dx^2 = 1 and values are symmetric.
struct G2Map {
  Grid1D grid;
  Eigen::MatrixXd values;

  // Restriction to a camera window [first, last), renormalized to unit
  // mass. Mirrors analyzing only the detector region of interest.
  G2Map restricted(const PixelRange& roi) const;
};

G2Map g2_exact(const OutputJointAmplitude& psi_out);

enum class ProjectionAxis { minus, sum };

// Histogram of the joint probability over the difference x1 - x2 (minus) or
// the sum x1 + x2 (sum), in pixel offsets: 2n-1 bins, bin k of the minus
// projection collects i - j = k - (n-1).
struct G2Projection {
  ProjectionAxis axis = ProjectionAxis::minus;
  int n_pixels = 0;              // size of the source map
  RVec values;                   // 2n-1 masses
  int offset_of_bin(int k) const { return k - (n_pixels - 1); }
  int bin_of_offset(int d) const { return d + n_pixels - 1; }
  int center_bin() const { return n_pixels - 1; }
};

G2Projection project(const G2Map& map, ProjectionAxis axis);

// Per-offset coincidence density: each mass bin divided by the number of
// pixel pairs contributing to it (n - |offset|). The finite window gives the
// raw histogram a triangular support envelope; density values are what the
// peak metric should compare.
G2Projection pair_density(const G2Projection& projection);

// (mean over |delta| <= halfwidth) / (median over 4 halfwidth < |delta| <=
// n/2). Offsets beyond n/2 are dominated by window-support artifacts and are
// excluded from the background sample. Featureless projections score 1.
double peak_metric(const G2Projection& projection, int peak_halfwidth);

struct DetectorParams {
  double mu_pair = 0.2;    // mean photon pairs per frame
  double p_dark = 1e-3;    // mean dark counts per pixel per frame
  bool threshold = true;   // clip each pixel to {0, 1}

  void validate() const;
};

// Sparse synthetic camera frames: per frame a Poisson number of pairs drawn
// from the joint map, plus per-pixel Poisson dark counts, optionally
// thresholded to binary.
struct FrameStack {
  int n_pixels = 0;
  int n_frames = 0;
  DetectorParams detector;
  std::uint64_t seed = 0;
  // events[f] lists (pixel, count) pairs of frame f; absent pixels are 0.
  std::vector<std::vector<std::pair<std::uint16_t, std::uint8_t>>> events;

  RVec frame_dense(int f) const;
};

FrameStack simulate_frames(const G2Map& map, const DetectorParams& detector,
                           int n_frames, std::uint64_t seed);

// Consecutive-frame-subtraction estimator:
//   G2(r1, r2) = (1/(M-1)) sum_i [ I_i(r1) I_i(r2) - I_i(r1) I_{i+1}(r2) ].
// Raw output: unnormalized, may be slightly negative, diagonal carries the
// self-correlation artifact of the same-frame product.
Eigen::MatrixXd estimate_g2(const FrameStack& stack);

// Fourier-domain hard low-pass on a projection; cutoff is the retained
// fraction of the Nyquist band. Total mass is preserved.
G2Projection lowpass_denoise(const G2Projection& projection, double cutoff);

// FrameStack persistence: 16-byte magic+version header, then frames as
// unsigned 8-bit pixel values, frame-major; JSON sidecar (<path>.json) with
// detector parameters and seed.
void save_frames(const std::string& path, const FrameStack& stack);
FrameStack load_frames(const std::string& path);

// CSV export of a projection (offset, value per line).
void save_projection_csv(const std::string& path, const G2Projection& proj);

}  // namespace tpsh
