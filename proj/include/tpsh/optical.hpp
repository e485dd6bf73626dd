#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tpsh/fft.hpp"
#include "tpsh/grid.hpp"

namespace tpsh {

// Thin random phase scatterer. Phases are Gaussian noise low-pass filtered
// to the requested correlation length (1/e half-width of the field
// autocorrelation E[exp(i phi(x)) exp(-i phi(x + D))]), rescaled to a fixed
// ensemble standard deviation and wrapped to (-pi, pi]. Regenerating with
// the same arguments is bit-for-bit reproducible.
struct PhaseScreen {
  Grid1D grid;
  RVec phases;               // radians, in (-pi, pi]
  double correlation_length; // meters
  std::uint64_t seed;
};

// Ensemble phase std before wrapping; sigma = pi gives fully developed
// speckle (ballistic intensity fraction exp(-sigma^2)^2 ~ 5e-5).
inline constexpr double kScreenPhaseStd = M_PI;

PhaseScreen random_phase_screen(const Grid1D& grid, double correlation_length,
                                std::uint64_t seed);

// Programmable phase mask: n_segments contiguous pixel blocks of equal width
// starting at aperture_start. Pixels outside the active aperture are
// unmodulated (phase 0).
struct SlmMask {
  int n_segments;
  RVec segment_phases;     // radians, wrapped to (-pi, pi]
  int aperture_start;      // first grid pixel of segment 0
  int pixels_per_segment;

  static SlmMask flat(int n_segments, int aperture_start,
                      int pixels_per_segment);
  // Aperture centered on the grid.
  static SlmMask flat_centered(const Grid1D& grid, int n_segments,
                               int pixels_per_segment);

  void validate(const Grid1D& grid) const;
  int aperture_pixels() const { return n_segments * pixels_per_segment; }
  // Segment index covering a grid pixel, or -1 outside the aperture.
  int segment_of_pixel(int pixel) const;
  // Per-pixel phase vector on the grid.
  RVec expand(const Grid1D& grid) const;

  SlmMask with_phases(const RVec& phases) const;
};

double wrap_phase(double phase);  // to (-pi, pi]

// Adds pi (mod 2pi) to the segments in [first, last). The 1D stand-in for
// flipping one quadrant of a 2D correction mask.
SlmMask quadrant_pi_shift(const SlmMask& mask, int first, int last);

// Ground-truth optical channel: field at the SLM plane -> field at the
// camera plane,
//   T = F * diag(exp(i phi_screen)) * diag(exp(i phi_slm)),
// with F the unitary centered DFT. The two diagonal factors commute (SLM and
// scatterer sit in conjugate image planes). Immutable after construction.
class SystemOperator {
public:
  SystemOperator(const Grid1D& grid, const PhaseScreen& screen,
                 const SlmMask& mask);

  const Grid1D& grid() const { return grid_; }
  const PhaseScreen& screen() const { return screen_; }
  const SlmMask& mask() const { return mask_; }

  // T v. Equals the sequential application of the three factors.
  CVec apply(const CVec& field) const;
  // T applied on both indices of a joint amplitude: T psi T^transpose.
  CMat apply_two_photon(const CMat& psi) const;

  // Complex element-wise SLM*screen factor exp(i(phi_screen + phi_slm)).
  const CVec& diagonal_factor() const { return diag_; }

  // Dense n x n matrix of T (built on demand; for tests and persistence).
  CMat dense() const;

private:
  Grid1D grid_;
  PhaseScreen screen_;
  SlmMask mask_;
  CVec diag_;
};

SystemOperator compose_system(const PhaseScreen& screen, const SlmMask& mask,
                              const Grid1D& grid);

// Returns a copy of the system with its SLM factor replaced.
SystemOperator apply_mask(const SystemOperator& system, const SlmMask& mask);

// Unitary centered DFT on a single-photon field (norm preserving).
CVec fourier_propagate(const CVec& field, const Grid1D& grid);

}  // namespace tpsh
