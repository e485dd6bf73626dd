#pragma once

#include <Eigen/Core>
#include <vector>

#include "tpsh/fft.hpp"
#include "tpsh/grid.hpp"

namespace tpsh {

// Physical parameters of a type-I SPDC source in the double-Gaussian
// approximation. lambda_pump is taken at face value (the effective value
// entering the formulas); use in_medium_wavelength() explicitly if a
// refractive index should be applied first.
struct SpdcConfig {
  double crystal_length;   // L, meters
  double lambda_pump;      // lambda_p, meters
  double pump_waist;       // w, meters

  void validate() const;
};

// Divides a vacuum wavelength by a refractive index. Never applied
// implicitly anywhere in the library.
double in_medium_wavelength(double lambda_vacuum, double refractive_index);

// Position correlation width sigma_r = sqrt(L * lambda_p / (6 pi)).
double sigma_r(const SpdcConfig& config);

// Momentum correlation width sigma_p = 1 / (2 w).
double sigma_p(const SpdcConfig& config);

// Widths of the double-Gaussian joint amplitude
//   psi(x1, x2) ~ exp(-(x1+x2)^2 / (4 A^2)) * exp(-(x1-x2)^2 / (4 B^2))
// with A = 1/sigma_p the sum-coordinate width and B = sigma_r the
// difference-coordinate width (both 1/e amplitude half-widths of the
// corresponding Gaussian factors, up to the factor-2 coordinate scaling).
struct GaussianStateParams {
  double sum_width;   // A, meters
  double diff_width;  // B, meters

  static GaussianStateParams from_config(const SpdcConfig& config);

  // Solve K1d = (A/B + B/A) / 2 for the width ratio at fixed B. The wide-sum
  // branch returns A > B (sum coordinate carries the broad envelope), the
  // narrow-sum branch A < B.
  static GaussianStateParams from_schmidt_1d(double k1d, double diff_width,
                                             bool sum_wider);

  void validate() const;
};

// Discretized two-photon joint amplitude on grid x grid, unit L2 norm:
// sum |psi_ij|^2 dx^2 = 1.
struct TwoPhotonState {
  Grid1D grid;
  CMat amplitude;  // n x n, indices (x1, x2)

  double norm_l2() const;  // sqrt(sum |psi|^2 dx^2)
};

enum class SamplingPolicy {
  strict,  // UndersampledGrid / TruncatedState on inadequate grids
  clip,    // renormalize whatever the grid captures (used by sweep configs
           // whose nominal widths exceed the simulation window)
};

// Builds the normalized double-Gaussian state. Strict policy requires
// dx <= min(A, B)/3 and an analytic norm capture >= 0.999 on the grid.
TwoPhotonState build_state(const GaussianStateParams& params,
                           const Grid1D& grid,
                           SamplingPolicy policy = SamplingPolicy::strict);

// First-order coherence g1(r, -r) between mirror points, closed form:
//   exp(-(r^2 / (8 w^2)) (24 pi w^2 - L lp)^2 / ((24 pi w^2 + L lp) L lp)).
double g1_analytic(const SpdcConfig& config, double r);

// Coefficient c of g1(r,-r) = exp(-c r^2); exposed for width conversions.
double g1_exponent_coefficient(const SpdcConfig& config);

// Full width at half maximum of g1_analytic as a function of r. Throws
// InfiniteWidth in the balanced case 24 pi w^2 = L lambda_p.
double g1_fwhm(const SpdcConfig& config);

// Two-dimensional Schmidt number
//   K = (1/4) ((24 pi w^2 + L lp) / sqrt(24 pi w^2 * L lp))^2.
double schmidt_number_2d(const SpdcConfig& config);

// One-dimensional Schmidt number K1d = sqrt(K2d) = (A/B + B/A)/2. The
// simulation core is 1D, so sweeps are parameterized by this value.
double schmidt_number_1d(const SpdcConfig& config);
double schmidt_number_1d(const GaussianStateParams& params);

struct SchmidtDecomposition {
  std::vector<CVec> modes;        // orthonormal on the grid: sum |u|^2 dx = 1
  std::vector<double> coefficients;  // lambda_n >= 0, descending, sum = 1
  double schmidt_number_1d() const;  // 1 / sum lambda_n^2
};

// Schmidt coefficients only (squared singular values of psi * dx),
// descending, normalized to unit sum. Cheaper than the full decomposition.
std::vector<double> schmidt_coefficients(const TwoPhotonState& state);

// Full decomposition with modes; coefficients as above.
SchmidtDecomposition schmidt_decompose(const TwoPhotonState& state);

// g1 computed from the reduced density matrix of the discretized state:
//   rho(x, x') = sum_a psi(x, a) conj(psi(x', a)) dx,
// evaluated at the grid pixels nearest to +-r. Validates the closed form.
double g1_numeric(const TwoPhotonState& state, double r);

}  // namespace tpsh
