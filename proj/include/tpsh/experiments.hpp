#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tpsh/correlations.hpp"
#include "tpsh/io.hpp"
#include "tpsh/wavefront.hpp"

namespace tpsh {

enum class Command {
  sweep_contrast,
  sweep_enhancement,
  demo_correction,
  tm,
  g2_frames,
};

// Which side of the K1d = (A/B + B/A)/2 branch the sweep walks at fixed
// diff_width B. wide_sum grows the sum width (pair positions correlated,
// x1 ~ x2); narrow_sum shrinks it (anticorrelated, x1 ~ -x2), which is how
// the correction scenario places the sharp pair peak in the camera-plane
// minus coordinate.
enum class KBranch { wide_sum, narrow_sum };

struct ExperimentConfig {
  // [grid]
  int n_points = 1500;
  double extent = 10e-3;

  // [state]
  double diff_width = 133e-6;        // B, meters
  bool width_is_fwhm = false;        // convert from intensity FWHM if true
  KBranch k_branch = KBranch::wide_sum;
  std::vector<double> k_values = {1, 2, 4, 8, 16, 32};
  bool k_is_2d = false;              // k_values given as K2d, convert by sqrt
  double probe_k1d = 1.1;            // TM probe Schmidt number (demo, tm)
  double demo_k1d = 16.0;            // entangled state of the demo

  // [scatterer]
  double correlation_length = 10e-6;

  // [slm]
  int n_segments = 50;
  int pixels_per_segment = 1;
  int aperture_start = -1;           // -1 = centered
  TmBasis basis = TmBasis::pixel;
  int phase_steps = 4;

  // [optimization]
  int iterations = 250;
  int trial_phases = 8;
  int target = -1;                   // -1 = envelope-typical pixel

  // [detector]
  DetectorParams detector;
  int n_frames = 100000;

  // [sweep]
  int repeats = 10;
  int envelope_seeds = 20;

  // [demo]
  int peak_halfwidth = 3;

  // [run]
  std::uint64_t master_seed = 1;
  int threads = 1;
  std::string out_dir = "out";

  static ExperimentConfig defaults(Command command);
  // Parse the flat sectioned key=value file over these defaults. Unknown
  // sections or keys are rejected.
  void apply_file(const std::string& path);
  void apply_ini_text(const std::string& text);
  void validate() const;

  double effective_diff_width() const;
  GaussianStateParams params_for_k(double k1d) const;
  Grid1D grid() const { return Grid1D(n_points, extent); }
  SlmMask segmentation() const;
};

struct SweepRow {
  double k1d;
  std::uint64_t seed;
  double value;
  double normalized;
  double aux;
};

struct SweepAggregate {
  double k1d;
  double mean;
  double stddev;
  double mean_normalized;
};

struct SweepResult {
  std::vector<SweepRow> rows;             // sorted by (k index, repeat)
  std::vector<SweepAggregate> aggregates; // one per K, sweep order
  std::string value_name;                 // "contrast" or "enhancement"
};

SweepResult run_sweep_contrast(const ExperimentConfig& config);
SweepResult run_sweep_enhancement(const ExperimentConfig& config);

// Writes <out>/<prefix>_rows.csv and <out>/<prefix>_aggregates.csv.
void write_sweep_csv(const SweepResult& result, const std::string& out_dir,
                     const std::string& prefix);

struct DemoSummary {
  int target = 0;
  PixelRange region;
  double eta_corrected = 0.0;            // coherent-probe enhancement
  double metric_no_medium = 0.0;
  double metric_flat = 0.0;
  double metric_corrected = 0.0;
  double metric_corrected_pi = 0.0;
  double pi_center_over_peak = 0.0;      // minus-projection delta=0 ratio
  std::vector<std::string> files;        // manifest (relative names)
};

DemoSummary run_demo_correction(const ExperimentConfig& config);

// Measures the TM of the configured channel, saves it to `path`, reloads
// and verifies the round trip; returns the matrix.
TransmissionMatrix run_tm_command(const ExperimentConfig& config,
                                  const std::string& path);

struct G2FramesSummary {
  int n_frames = 0;
  double projection_correlation = 0.0;  // exact vs estimated minus projection
  std::vector<std::string> files;
};

G2FramesSummary run_g2_frames(const ExperimentConfig& config);

// Shared helpers (used by the acceptance suite as well).
CVec coherent_probe_field(const ExperimentConfig& config);
PixelRange canonical_region(const ExperimentConfig& config,
                            const CVec& probe_field);
int pick_typical_target(const IntensityProfile& envelope,
                        const PixelRange& region);

}  // namespace tpsh
