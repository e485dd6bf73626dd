#include "tpsh/wavefront.hpp"

#include <bit>
#include <cmath>

#include "tpsh/errors.hpp"

namespace tpsh {

namespace {

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

// Sylvester Hadamard entry, +-1 for power-of-two order.
inline double hadamard_entry(unsigned j, unsigned p) {
  return (std::popcount(j & p) & 1u) ? -1.0 : 1.0;
}

std::vector<int> split_segments(const SlmMask& seg, bool modulated_odd,
                                bool want_modulated) {
  std::vector<int> out;
  for (int s = 0; s < seg.n_segments; ++s) {
    const bool odd = (s % 2) == 1;
    if ((odd == modulated_odd) == want_modulated) out.push_back(s);
  }
  return out;
}

}  // namespace

TwoPhotonIntensityProbe::TwoPhotonIntensityProbe(
    const SchmidtDecomposition& decomposition, const PhaseScreen& screen,
    double truncation)
    : grid_(screen.grid), screen_seed_(screen.seed) {
  const int n = grid_.n();
  screen_factor_.resize(n);
  for (int k = 0; k < n; ++k) {
    const double p = screen.phases(k);
    screen_factor_(k) = Complex(std::cos(p), std::sin(p));
  }
  int keep = 0;
  double cumulative = 0.0;
  for (std::size_t i = 0; i < decomposition.modes.size(); ++i) {
    ++keep;
    cumulative += decomposition.coefficients[i];
    if (cumulative >= 1.0 - truncation) break;
  }
  modes_.resize(n, keep);
  for (int i = 0; i < keep; ++i)
    modes_.col(i) =
        decomposition.modes[i] * std::sqrt(decomposition.coefficients[i]);
}

TwoPhotonIntensityProbe::TwoPhotonIntensityProbe(const CVec& field,
                                                 const PhaseScreen& screen)
    : grid_(screen.grid), screen_seed_(screen.seed) {
  if (field.size() != grid_.n())
    throw GridMismatch("TwoPhotonIntensityProbe: field length != grid");
  const int n = grid_.n();
  screen_factor_.resize(n);
  for (int k = 0; k < n; ++k) {
    const double p = screen.phases(k);
    screen_factor_(k) = Complex(std::cos(p), std::sin(p));
  }
  modes_ = field;
}

CVec TwoPhotonIntensityProbe::pattern_diagonal(const SlmPattern& pattern) const {
  pattern.mask.validate(grid_);
  if (pattern.gated() &&
      static_cast<int>(pattern.segment_gate.size()) != pattern.mask.n_segments)
    throw ProbeFailure("SlmPattern: gate length != n_segments");
  const RVec slm = pattern.mask.expand(grid_);
  CVec diag(grid_.n());
  for (int k = 0; k < grid_.n(); ++k) {
    double amp = 1.0;
    if (pattern.gated()) {
      const int s = pattern.mask.segment_of_pixel(k);
      if (s >= 0 && pattern.segment_gate[s] == 0) amp = 0.0;
    }
    diag(k) = amp * screen_factor_(k) *
              Complex(std::cos(slm(k)), std::sin(slm(k)));
  }
  return diag;
}

RVec TwoPhotonIntensityProbe::intensity(const SlmPattern& pattern) const {
  const CVec diag = pattern_diagonal(pattern);
  RVec acc = RVec::Zero(grid_.n());
  for (int m = 0; m < modes_.cols(); ++m) {
    const CVec out = centered_dft(diag.cwiseProduct(modes_.col(m)).eval());
    acc += out.cwiseAbs2();
  }
  return acc;
}

double TwoPhotonIntensityProbe::target_intensity(const SlmPattern& pattern,
                                                 int target) const {
  if (target < 0 || target >= grid_.n())
    throw TargetOutOfRange("target_intensity: camera pixel out of range");
  const int n = grid_.n();
  const CVec diag = pattern_diagonal(pattern);
  // Row `target` of the centered DFT folded into the diagonal factor; the
  // per-mode amplitude is then a plain dot product.
  const double c = 0.5 * (n - 1);
  CVec row(n);
  for (int k = 0; k < n; ++k) {
    const double ang = -2.0 * M_PI * (target - c) * (k - c) / n;
    row(k) = Complex(std::cos(ang), std::sin(ang)) * diag(k);
  }
  row /= std::sqrt(double(n));
  double acc = 0.0;
  const Eigen::RowVectorXcd amps = row.transpose() * modes_;
  for (int m = 0; m < amps.size(); ++m) acc += std::norm(amps(m));
  return acc;
}

Complex demodulate_phase_steps(const std::vector<double>& intensities) {
  const int steps = static_cast<int>(intensities.size());
  if (steps < 3)
    throw ConfigError("demodulate_phase_steps: need at least 3 phases");
  Complex acc(0.0, 0.0);
  for (int k = 0; k < steps; ++k) {
    const double phi = 2.0 * M_PI * k / steps;
    acc += intensities[k] * Complex(std::cos(phi), -std::sin(phi));
  }
  return acc / double(steps);
}

TransmissionMatrix measure_tm(const IntensityProbe& probe,
                              const SlmMask& segmentation,
                              const TmOptions& options) {
  if (options.phase_steps < 3)
    throw ConfigError("measure_tm: phase_steps must be >= 3");
  segmentation.validate(probe.grid());

  const std::vector<int> modulated =
      split_segments(segmentation, options.modulate_odd, true);
  const std::vector<int> reference =
      split_segments(segmentation, options.modulate_odd, false);
  const int n_mod = static_cast<int>(modulated.size());
  const int n_cam = probe.n_camera();
  const int steps = options.phase_steps;

  if (n_mod == 0) throw ConfigError("measure_tm: no modulated segments");
  if (options.basis == TmBasis::hadamard && !is_power_of_two(n_mod))
    throw BasisSizeMismatch(
        "measure_tm: Hadamard basis needs a power-of-two modulated count");

  std::vector<Complex> demod_phase(steps);
  for (int k = 0; k < steps; ++k) {
    const double phi = 2.0 * M_PI * k / steps;
    demod_phase[k] = Complex(std::cos(phi), -std::sin(phi));
  }

  CMat acquired(n_cam, n_mod);

  if (options.basis == TmBasis::pixel) {
    // Light the reference half plus one modulated segment at a time.
    for (int b = 0; b < n_mod; ++b) {
      SlmPattern pattern;
      pattern.mask = segmentation;
      pattern.segment_gate.assign(segmentation.n_segments, 0);
      for (int r : reference) pattern.segment_gate[r] = 1;
      pattern.segment_gate[modulated[b]] = 1;

      CVec column = CVec::Zero(n_cam);
      for (int k = 0; k < steps; ++k) {
        RVec phases = RVec::Zero(segmentation.n_segments);
        phases(modulated[b]) = 2.0 * M_PI * k / steps;
        pattern.mask = segmentation.with_phases(phases);
        const RVec i_k = probe.intensity(pattern);
        column += i_k.cast<Complex>() * demod_phase[k];
      }
      acquired.col(b) = column / double(steps);
    }
  } else {
    // Hadamard patterns keep every segment lit; the +-1 rows become {0, pi}
    // phase offsets on the modulated half.
    for (int j = 0; j < n_mod; ++j) {
      SlmPattern pattern;
      CVec column = CVec::Zero(n_cam);
      for (int k = 0; k < steps; ++k) {
        RVec phases = RVec::Zero(segmentation.n_segments);
        for (int p = 0; p < n_mod; ++p) {
          const double base = hadamard_entry(j, p) > 0 ? 0.0 : M_PI;
          phases(modulated[p]) = base + 2.0 * M_PI * k / steps;
        }
        pattern.mask = segmentation.with_phases(phases);
        const RVec i_k = probe.intensity(pattern);
        column += i_k.cast<Complex>() * demod_phase[k];
      }
      acquired.col(j) = column / double(steps);
    }
    // Back to the pixel basis: t = (1/N) H t_hadamard.
    CMat pixel(n_cam, n_mod);
    for (int p = 0; p < n_mod; ++p) {
      CVec col = CVec::Zero(n_cam);
      for (int j = 0; j < n_mod; ++j)
        col += hadamard_entry(j, p) * acquired.col(j);
      pixel.col(p) = col / double(n_mod);
    }
    acquired = pixel;
  }

  TransmissionMatrix tm;
  tm.entries = acquired;
  tm.modulated_segments = modulated;
  tm.segmentation = segmentation;
  tm.basis = options.basis;
  tm.phase_steps = steps;
  tm.reference = options.modulate_odd ? "even segments static"
                                      : "odd segments static";
  return tm;
}

CVec segment_response_field(const SystemOperator& system,
                            const CVec& illumination,
                            const std::vector<int>& segments) {
  const Grid1D& grid = system.grid();
  if (illumination.size() != grid.n())
    throw GridMismatch("segment_response_field: illumination length != grid");
  const SlmMask& seg = system.mask();
  CVec field = CVec::Zero(grid.n());
  for (int s : segments) {
    if (s < 0 || s >= seg.n_segments)
      throw RegionOutOfRange("segment_response_field: bad segment index");
    const int base = seg.aperture_start + s * seg.pixels_per_segment;
    for (int p = 0; p < seg.pixels_per_segment; ++p)
      field(base + p) = illumination(base + p);
  }
  return system.apply(field);
}

CVec static_reference_field(const SystemOperator& system,
                            const CVec& illumination,
                            const std::vector<int>& reference_segments) {
  const Grid1D& grid = system.grid();
  if (illumination.size() != grid.n())
    throw GridMismatch("static_reference_field: illumination length != grid");
  const SlmMask& seg = system.mask();
  CVec field = illumination;
  // Dark all aperture pixels, then relight the reference segments.
  for (int s = 0; s < seg.n_segments; ++s) {
    const int base = seg.aperture_start + s * seg.pixels_per_segment;
    for (int p = 0; p < seg.pixels_per_segment; ++p) field(base + p) = 0.0;
  }
  for (int s : reference_segments) {
    const int base = seg.aperture_start + s * seg.pixels_per_segment;
    for (int p = 0; p < seg.pixels_per_segment; ++p)
      field(base + p) = illumination(base + p);
  }
  return system.apply(field);
}

TransmissionMatrix ground_truth_tm(const SystemOperator& system,
                                   const CVec& illumination,
                                   const SlmMask& segmentation) {
  segmentation.validate(system.grid());
  const int n_cam = system.grid().n();
  TransmissionMatrix tm;
  tm.entries.resize(n_cam, segmentation.n_segments);
  tm.modulated_segments.resize(segmentation.n_segments);
  for (int s = 0; s < segmentation.n_segments; ++s) {
    tm.modulated_segments[s] = s;
    tm.entries.col(s) = segment_response_field(system, illumination, {s});
  }
  tm.segmentation = segmentation;
  tm.basis = TmBasis::pixel;
  tm.phase_steps = 0;
  tm.reference = "exact";
  return tm;
}

SlmMask focus_mask(const TransmissionMatrix& tm, int target) {
  if (target < 0 || target >= tm.entries.rows())
    throw TargetOutOfRange("focus_mask: target pixel out of range");
  RVec phases = RVec::Zero(tm.segmentation.n_segments);
  for (std::size_t b = 0; b < tm.modulated_segments.size(); ++b)
    phases(tm.modulated_segments[b]) =
        -std::arg(tm.entries(target, static_cast<int>(b)));
  return tm.segmentation.with_phases(phases);
}

SlmMask multi_target_mask(const TransmissionMatrix& tm,
                          const std::vector<int>& targets) {
  if (targets.empty()) throw EmptyTargets("multi_target_mask: no targets");
  for (int t : targets)
    if (t < 0 || t >= tm.entries.rows())
      throw TargetOutOfRange("multi_target_mask: target pixel out of range");
  RVec phases = RVec::Zero(tm.segmentation.n_segments);
  for (std::size_t b = 0; b < tm.modulated_segments.size(); ++b) {
    Complex acc(0.0, 0.0);
    for (int t : targets) acc += std::conj(tm.entries(t, static_cast<int>(b)));
    phases(tm.modulated_segments[b]) = std::arg(acc);
  }
  return tm.segmentation.with_phases(phases);
}

OptimizationTrace sequential_optimize(const IntensityProbe& probe,
                                      const SlmMask& segmentation, int target,
                                      int n_trial_phases, int iterations,
                                      std::uint64_t rng_seed) {
  if (iterations < 1)
    throw ConfigError("sequential_optimize: iterations must be >= 1");
  if (n_trial_phases < 3)
    throw ConfigError("sequential_optimize: n_trial_phases must be >= 3");
  if (target < 0 || target >= probe.n_camera())
    throw TargetOutOfRange("sequential_optimize: target out of range");
  segmentation.validate(probe.grid());

  SlmMask mask = segmentation;
  SlmPattern pattern;
  pattern.mask = mask;
  double best = probe.target_intensity(pattern, target);

  OptimizationTrace trace;
  trace.initial_intensity = best;
  trace.rng_seed = rng_seed;
  trace.steps.reserve(iterations);

  const int n_seg = segmentation.n_segments;
  for (int it = 0; it < iterations; ++it) {
    const int seg = it % n_seg;
    const double incumbent = mask.segment_phases(seg);
    double best_phase = incumbent;
    for (int t = 0; t < n_trial_phases; ++t) {
      const double phi = 2.0 * M_PI * t / n_trial_phases;
      mask.segment_phases(seg) = wrap_phase(phi);
      pattern.mask = mask;
      const double val = probe.target_intensity(pattern, target);
      if (val > best) {
        best = val;
        best_phase = mask.segment_phases(seg);
      }
    }
    mask.segment_phases(seg) = best_phase;
    trace.steps.push_back(OptimizationStep{seg, best_phase, best});
  }
  trace.final_mask = mask;
  return trace;
}

double enhancement_factor(const SystemOperator& system_with_mask,
                          const SystemOperator& system_flat,
                          const CVec& coherent_probe, int target,
                          const PixelRange& region) {
  require_same_grid(system_with_mask.grid(), system_flat.grid(),
                    "enhancement_factor");
  if (target < 0 || target >= system_with_mask.grid().n())
    throw TargetOutOfRange("enhancement_factor: target out of range");
  const RVec masked = system_with_mask.apply(coherent_probe).cwiseAbs2();
  const RVec flat = system_flat.apply(coherent_probe).cwiseAbs2();
  if (region.size() <= 0 || region.first < 0 || region.last > flat.size())
    throw EmptyRegion("enhancement_factor: bad region");
  const double mean = flat.segment(region.first, region.size()).mean();
  if (!(mean > 0.0)) throw ZeroMean("enhancement_factor: zero mean speckle");
  return masked(target) / mean;
}

}  // namespace tpsh
