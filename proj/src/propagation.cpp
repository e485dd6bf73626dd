#include "tpsh/propagation.hpp"

#include <cmath>

#include "tpsh/errors.hpp"
#include "tpsh/rng.hpp"

namespace tpsh {

OutputJointAmplitude propagate_two_photon(const TwoPhotonState& state,
                                          const SystemOperator& system) {
  require_same_grid(state.grid, system.grid(), "propagate_two_photon");
  return OutputJointAmplitude{state.grid,
                              system.apply_two_photon(state.amplitude)};
}

IntensityProfile marginal_intensity(const OutputJointAmplitude& out) {
  const double dx = out.grid.dx();
  RVec values = out.amplitude.cwiseAbs2().rowwise().sum() * dx;
  return IntensityProfile{out.grid, values};
}

IntensityProfile reduced_intensity(const SchmidtDecomposition& decomposition,
                                   const SystemOperator& system,
                                   double truncation) {
  const Grid1D& grid = system.grid();
  RVec intensity = RVec::Zero(grid.n());
  double cumulative = 0.0;
  for (std::size_t n = 0; n < decomposition.modes.size(); ++n) {
    const double lambda = decomposition.coefficients[n];
    const CVec out = system.apply(decomposition.modes[n]);
    intensity += lambda * out.cwiseAbs2();
    cumulative += lambda;
    if (cumulative >= 1.0 - truncation) break;
  }
  // Modes carry norm 1/dx in the plain vector sense, so the weighted sum is
  // already a density: sum intensity * dx = sum lambda = 1.
  return IntensityProfile{grid, intensity};
}

IntensityProfile reduced_intensity(const TwoPhotonState& state,
                                   const SystemOperator& system,
                                   double truncation) {
  require_same_grid(state.grid, system.grid(), "reduced_intensity");
  return reduced_intensity(schmidt_decompose(state), system, truncation);
}

double speckle_contrast(const IntensityProfile& profile,
                        const PixelRange& region) {
  if (region.size() <= 0 || region.first < 0 ||
      region.last > profile.values.size())
    throw EmptyRegion("speckle_contrast: empty or out-of-range region");
  const auto seg = profile.values.segment(region.first, region.size());
  const double mean = seg.mean();
  if (!(mean > 0.0)) throw ZeroMean("speckle_contrast: zero mean intensity");
  const double var = (seg.array() - mean).square().mean();
  return std::sqrt(var) / mean;
}

IntensityProfile mean_envelope(const Grid1D& grid, const CVec& probe_field,
                               double correlation_length,
                               std::uint64_t master_seed, int n_seeds) {
  if (probe_field.size() != grid.n())
    throw GridMismatch("mean_envelope: probe length != grid");
  if (n_seeds < 1) throw ConfigError("mean_envelope: n_seeds must be >= 1");
  RVec acc = RVec::Zero(grid.n());
  SlmMask flat = SlmMask::flat_centered(grid, 1, grid.n());
  for (int s = 0; s < n_seeds; ++s) {
    PhaseScreen screen = random_phase_screen(
        grid, correlation_length, derive_seed(master_seed, 0x456e76, s));
    SystemOperator sys(grid, screen, flat);
    acc += sys.apply(probe_field).cwiseAbs2();
  }
  acc /= double(n_seeds);

  // The finite seed average still carries grain-scale ripple that would
  // fragment a threshold region; a moving average much narrower than the
  // envelope scale removes it.
  const int half = std::max(1, grid.n() / 64);
  RVec smooth(grid.n());
  for (int i = 0; i < grid.n(); ++i) {
    const int lo = std::max(0, i - half);
    const int hi = std::min(grid.n() - 1, i + half);
    smooth(i) = acc.segment(lo, hi - lo + 1).mean();
  }
  return IntensityProfile{grid, smooth};
}

PixelRange central_region(const IntensityProfile& envelope) {
  const RVec& v = envelope.values;
  const double peak = v.maxCoeff();
  if (!(peak > 0.0)) throw ZeroMean("central_region: empty envelope");
  const double thresh = 0.5 * peak;
  int best_first = 0, best_len = 0;
  int cur_first = -1;
  for (int i = 0; i <= v.size(); ++i) {
    const bool inside = i < v.size() && v(i) >= thresh;
    if (inside && cur_first < 0) cur_first = i;
    if (!inside && cur_first >= 0) {
      if (i - cur_first > best_len) {
        best_first = cur_first;
        best_len = i - cur_first;
      }
      cur_first = -1;
    }
  }
  return PixelRange{best_first, best_first + best_len};
}

}  // namespace tpsh
