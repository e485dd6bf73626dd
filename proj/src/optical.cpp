#include "tpsh/optical.hpp"

#include <cmath>

#include "tpsh/errors.hpp"
#include "tpsh/rng.hpp"

namespace tpsh {

double wrap_phase(double phase) {
  double p = std::remainder(phase, 2.0 * M_PI);
  if (p <= -M_PI) p += 2.0 * M_PI;
  return p;
}

PhaseScreen random_phase_screen(const Grid1D& grid, double correlation_length,
                                std::uint64_t seed) {
  const int n = grid.n();
  const double dx = grid.dx();
  if (!(correlation_length >= dx))
    throw CorrelationTooFine(
        "random_phase_screen: correlation_length below pixel pitch");

  // White Gaussian noise, circular convolution with a Gaussian kernel, then
  // rescale by the kernel's exact variance gain so the ensemble std equals
  // kScreenPhaseStd regardless of the correlation length.
  //
  // The kernel width is calibrated on the discrete process so the field
  // autocorrelation C(D) = exp(-sigma^2 (1 - rho_d(D))) crosses 1/e at
  // D = correlation_length, where rho_d is the circular autocorrelation of
  // the kernel itself.
  const double sigma = kScreenPhaseStd;

  const auto build_kernel = [&](double a) {
    RVec kernel(n);
    for (int k = 0; k < n; ++k) {
      const double d = std::min<double>(k, n - k) * dx;
      kernel(k) = std::exp(-d * d / (2.0 * a * a));
    }
    kernel /= kernel.sum();
    return kernel;
  };
  const auto field_corr_at = [&](const RVec& kernel, double lag_px) {
    const int lo = static_cast<int>(std::floor(lag_px));
    const double frac = lag_px - lo;
    double rho_lo = 0.0, rho_hi = 0.0;
    for (int k = 0; k < n; ++k) {
      rho_lo += kernel(k) * kernel((k + lo) % n);
      rho_hi += kernel(k) * kernel((k + lo + 1) % n);
    }
    const double norm = kernel.squaredNorm();
    const double rho = ((1.0 - frac) * rho_lo + frac * rho_hi) / norm;
    return std::exp(-sigma * sigma * (1.0 - rho));
  };

  // Closed-form continuous-limit guess; exact enough for kernels wide
  // relative to the pitch or wrapped around the grid.
  double a = correlation_length /
             std::sqrt(-8.0 * std::log(1.0 - 1.0 / (sigma * sigma)));
  if (correlation_length <= 0.25 * grid.extent()) {
    const double lag_px = correlation_length / dx;
    double lo = 0.05 * a, hi = 20.0 * a;
    const double target = std::exp(-1.0);
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (field_corr_at(build_kernel(mid), lag_px) < target)
        lo = mid;  // too narrow: decorrelates before the requested lag
      else
        hi = mid;
      a = 0.5 * (lo + hi);
    }
  }

  Rng rng(seed);
  CVec noise(n);
  for (int k = 0; k < n; ++k) noise(k) = Complex(rng.normal(), 0.0);

  const RVec kernel = build_kernel(a);
  const double var_gain = kernel.squaredNorm();

  // Circular convolution via the plain DFT pair.
  CVec conv = plain_idft(
      plain_dft(noise).cwiseProduct(plain_dft(kernel.cast<Complex>().eval())));
  RVec raw(n);
  for (int k = 0; k < n; ++k) raw(k) = conv(k).real() / n;

  raw *= sigma / std::sqrt(var_gain);
  RVec wrapped(n);
  for (int k = 0; k < n; ++k) wrapped(k) = wrap_phase(raw(k));

  return PhaseScreen{grid, wrapped, correlation_length, seed};
}

SlmMask SlmMask::flat(int n_segments, int aperture_start,
                      int pixels_per_segment) {
  if (n_segments < 1) throw ConfigError("SlmMask: n_segments must be >= 1");
  if (pixels_per_segment < 1)
    throw ConfigError("SlmMask: pixels_per_segment must be >= 1");
  SlmMask m{n_segments, RVec::Zero(n_segments), aperture_start,
            pixels_per_segment};
  return m;
}

SlmMask SlmMask::flat_centered(const Grid1D& grid, int n_segments,
                               int pixels_per_segment) {
  const int span = n_segments * pixels_per_segment;
  if (span > grid.n())
    throw ConfigError("SlmMask: aperture wider than the grid");
  return flat(n_segments, (grid.n() - span) / 2, pixels_per_segment);
}

void SlmMask::validate(const Grid1D& grid) const {
  if (n_segments < 1 || pixels_per_segment < 1)
    throw ConfigError("SlmMask: empty segmentation");
  if (segment_phases.size() != n_segments)
    throw ConfigError("SlmMask: phase array length != n_segments");
  if (aperture_start < 0 || aperture_start + aperture_pixels() > grid.n())
    throw GridMismatch("SlmMask: aperture does not fit the grid");
}

int SlmMask::segment_of_pixel(int pixel) const {
  const int off = pixel - aperture_start;
  if (off < 0 || off >= aperture_pixels()) return -1;
  return off / pixels_per_segment;
}

RVec SlmMask::expand(const Grid1D& grid) const {
  validate(grid);
  RVec full = RVec::Zero(grid.n());
  for (int s = 0; s < n_segments; ++s) {
    const int base = aperture_start + s * pixels_per_segment;
    for (int p = 0; p < pixels_per_segment; ++p)
      full(base + p) = segment_phases(s);
  }
  return full;
}

SlmMask SlmMask::with_phases(const RVec& phases) const {
  if (phases.size() != n_segments)
    throw ConfigError("SlmMask::with_phases: length mismatch");
  SlmMask m = *this;
  for (int s = 0; s < n_segments; ++s)
    m.segment_phases(s) = wrap_phase(phases(s));
  return m;
}

SlmMask quadrant_pi_shift(const SlmMask& mask, int first, int last) {
  if (first < 0 || last > mask.n_segments || first > last)
    throw RegionOutOfRange("quadrant_pi_shift: segment range out of [0, N)");
  SlmMask out = mask;
  for (int s = first; s < last; ++s)
    out.segment_phases(s) = wrap_phase(out.segment_phases(s) + M_PI);
  return out;
}

SystemOperator::SystemOperator(const Grid1D& grid, const PhaseScreen& screen,
                               const SlmMask& mask)
    : grid_(grid), screen_(screen), mask_(mask) {
  require_same_grid(grid, screen.grid, "SystemOperator");
  mask.validate(grid);
  const RVec slm = mask.expand(grid);
  diag_.resize(grid.n());
  for (int k = 0; k < grid.n(); ++k) {
    const double p = screen.phases(k) + slm(k);
    diag_(k) = Complex(std::cos(p), std::sin(p));
  }
}

CVec SystemOperator::apply(const CVec& field) const {
  if (field.size() != grid_.n())
    throw GridMismatch("SystemOperator::apply: field length != grid");
  return centered_dft(field.cwiseProduct(diag_));
}

CMat SystemOperator::apply_two_photon(const CMat& psi) const {
  if (psi.rows() != grid_.n() || psi.cols() != grid_.n())
    throw GridMismatch("SystemOperator::apply_two_photon: size mismatch");
  CMat scaled = diag_.asDiagonal() * psi * diag_.asDiagonal();
  return centered_dft_2d(scaled);
}

CMat SystemOperator::dense() const {
  const int n = grid_.n();
  CMat t = centered_dft_matrix(n);
  for (int k = 0; k < n; ++k) t.col(k) *= diag_(k);
  return t;
}

SystemOperator compose_system(const PhaseScreen& screen, const SlmMask& mask,
                              const Grid1D& grid) {
  return SystemOperator(grid, screen, mask);
}

SystemOperator apply_mask(const SystemOperator& system, const SlmMask& mask) {
  return SystemOperator(system.grid(), system.screen(), mask);
}

CVec fourier_propagate(const CVec& field, const Grid1D& grid) {
  if (field.size() != grid.n())
    throw GridMismatch("fourier_propagate: field length != grid");
  return centered_dft(field);
}

}  // namespace tpsh
