#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "tpsh/propagation.hpp"

namespace tpsh {

// SLM pattern presented to an intensity probe: segment phases plus an
// optional per-segment amplitude gate (0 = dark). Gating emulates lighting
// only the reference region plus one probe segment during pixel-basis
// acquisition; light outside the active aperture always passes unmodulated.
struct SlmPattern {
  SlmMask mask;
  std::vector<std::uint8_t> segment_gate;  // empty => all segments lit

  bool gated() const { return !segment_gate.empty(); }
};

// Camera-intensity feedback channel. Implementations must be pure: identical
// patterns give identical intensities.
class IntensityProbe {
public:
  virtual ~IntensityProbe() = default;
  virtual int n_camera() const = 0;
  virtual const Grid1D& grid() const = 0;
  // Full camera intensity profile.
  virtual RVec intensity(const SlmPattern& pattern) const = 0;
  // Intensity at one pixel; default reads the full profile.
  virtual double target_intensity(const SlmPattern& pattern,
                                  int target) const {
    return intensity(pattern)(target);
  }
};

// Simulated probe: a two-photon state (given by its coherent-mode expansion)
// behind a fixed phase screen. Intensity is the reduced single-photon
// profile the camera would record.
class TwoPhotonIntensityProbe : public IntensityProbe {
public:
  TwoPhotonIntensityProbe(const SchmidtDecomposition& decomposition,
                          const PhaseScreen& screen, double truncation = 1e-6);
  // Coherent special case: a single field.
  TwoPhotonIntensityProbe(const CVec& field, const PhaseScreen& screen);

  int n_camera() const override { return grid_.n(); }
  const Grid1D& grid() const override { return grid_; }
  RVec intensity(const SlmPattern& pattern) const override;
  double target_intensity(const SlmPattern& pattern,
                          int target) const override;

  int n_modes() const { return static_cast<int>(modes_.cols()); }
  std::uint64_t screen_seed() const { return screen_seed_; }

private:
  CVec pattern_diagonal(const SlmPattern& pattern) const;

  Grid1D grid_;
  CVec screen_factor_;  // exp(i phi_screen)
  CMat modes_;          // column n = sqrt(lambda_n) u_n
  std::uint64_t screen_seed_;
};

enum class TmBasis { pixel, hadamard };

// Measured transmission matrix. Entries are stored in the pixel (segment)
// basis regardless of the acquisition basis; each row m is the true segment
// response scaled by the conjugated static reference field at that pixel.
struct TransmissionMatrix {
  CMat entries;                        // n_camera x n_modulated
  std::vector<int> modulated_segments; // column -> segment index
  SlmMask segmentation;                // template (flat phases)
  TmBasis basis = TmBasis::pixel;
  int phase_steps = 4;
  std::uint64_t seed = 0;              // probe channel seed (metadata)
  std::string reference;               // which segments served as reference
};

struct TmOptions {
  int phase_steps = 4;
  TmBasis basis = TmBasis::pixel;
  bool modulate_odd = true;  // odd-indexed segments modulated, even reference
};

// Lock-in demodulation of an intensity sequence recorded at the equally
// spaced probe phases 2 pi k / P:
//   t_hat = (1/P) sum_k I_k exp(-i 2 pi k / P).
// For a scalar channel I_k = |s + t e^{i phi_k}|^2 this recovers conj(s) t;
// with P = 4 it reduces to ((I0 - I2) + i (I3 - I1)) / 4.
Complex demodulate_phase_steps(const std::vector<double>& intensities);

// Phase-stepping acquisition against the co-propagating static reference
// (alternating segment blocks). For each input vector and camera pixel the
// intensities at phases 2 pi k / P demodulate to
//   t_hat = (1/P) sum_k I_k exp(-i phi_k) = conj(s_m) t_mb.
TransmissionMatrix measure_tm(const IntensityProbe& probe,
                              const SlmMask& segmentation,
                              const TmOptions& options = {});

// Ground-truth segment responses of a channel for a given illumination
// (columns for every segment, no reference scaling). Oracle for the
// measured matrix and input to exact-conjugation statistics.
TransmissionMatrix ground_truth_tm(const SystemOperator& system,
                                   const CVec& illumination,
                                   const SlmMask& segmentation);

// Camera field produced by the listed segments alone (mask phases applied,
// other segments dark, outside-aperture light excluded).
CVec segment_response_field(const SystemOperator& system,
                            const CVec& illumination,
                            const std::vector<int>& segments);

// Camera field of the static part during acquisition: reference segments
// plus the light outside the active aperture.
CVec static_reference_field(const SystemOperator& system,
                            const CVec& illumination,
                            const std::vector<int>& reference_segments);

// Phase conjugation of the target row: segment phases -arg(tm[target, b]).
SlmMask focus_mask(const TransmissionMatrix& tm, int target);

// Phase of the conjugate superposition over several targets.
SlmMask multi_target_mask(const TransmissionMatrix& tm,
                          const std::vector<int>& targets);

struct OptimizationStep {
  int segment;
  double phase;
  double intensity;
};

struct OptimizationTrace {
  std::vector<OptimizationStep> steps;  // target intensity is non-decreasing
  SlmMask final_mask;
  double initial_intensity = 0.0;
  std::uint64_t rng_seed = 0;
};

// Stepwise sequential optimization: segments visited cyclically in index
// order; one iteration tests n_trial_phases equally spaced phases plus the
// incumbent and keeps the best target intensity.
OptimizationTrace sequential_optimize(const IntensityProbe& probe,
                                      const SlmMask& segmentation, int target,
                                      int n_trial_phases, int iterations,
                                      std::uint64_t rng_seed);

// eta = I_target(masked system) / mean_{region} I(flat system), both with
// the same coherent benchmark probe.
double enhancement_factor(const SystemOperator& system_with_mask,
                          const SystemOperator& system_flat,
                          const CVec& coherent_probe, int target,
                          const PixelRange& region);

}  // namespace tpsh
