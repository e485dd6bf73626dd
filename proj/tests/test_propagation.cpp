#include <cmath>

#include "doctest.h"
#include "tpsh/propagation.hpp"
#include "tpsh/rng.hpp"

using namespace tpsh;

namespace {

SystemOperator scattering_system(const Grid1D& grid, double corr,
                                 std::uint64_t seed) {
  const PhaseScreen screen = random_phase_screen(grid, corr, seed);
  return SystemOperator(grid, screen,
                        SlmMask::flat_centered(grid, 1, grid.n()));
}

CVec uniform_field(const Grid1D& grid) {
  CVec v = CVec::Constant(grid.n(), Complex(1.0, 0.0));
  v /= v.norm() * std::sqrt(grid.dx());
  return v;
}

}  // namespace

TEST_CASE("two-photon propagation: norm and symmetry preserved") {
  const GaussianStateParams p{200e-6, 50e-6};
  const Grid1D grid(256, 1.6e-3);
  const TwoPhotonState state = build_state(p, grid);
  const SystemOperator sys = scattering_system(grid, 3 * grid.dx(), 77);

  const OutputJointAmplitude out = propagate_two_photon(state, sys);
  const double norm = out.amplitude.norm() * grid.dx();
  CHECK(std::abs(norm - 1.0) < 1e-10);
  double asym = 0.0;
  for (int i = 0; i < grid.n(); ++i)
    for (int j = 0; j < i; ++j)
      asym = std::max(asym,
                      std::abs(out.amplitude(i, j) - out.amplitude(j, i)));
  CHECK(asym < 1e-10);
}

TEST_CASE("two-photon propagation: rank-1 input stays rank-1 through F") {
  const GaussianStateParams p{60e-6, 60e-6};
  const Grid1D grid(200, 8e-4);
  const TwoPhotonState state = build_state(p, grid);
  const PhaseScreen zero{grid, RVec::Zero(grid.n()), grid.extent(), 0};
  const SystemOperator sys(grid, zero, SlmMask::flat_centered(grid, 1, grid.n()));

  const OutputJointAmplitude out = propagate_two_photon(state, sys);
  const TwoPhotonState out_state{grid, out.amplitude};
  const auto lambdas = schmidt_coefficients(out_state);
  CHECK(lambdas[0] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(lambdas[1] < 1e-8);
}

TEST_CASE("reduced intensity equals the brute-force marginal") {
  const GaussianStateParams p{300e-6, 60e-6};
  const Grid1D grid(256, 2e-3);
  const TwoPhotonState state = build_state(p, grid);
  const SystemOperator sys = scattering_system(grid, 4 * grid.dx(), 5);

  const IntensityProfile via_modes = reduced_intensity(state, sys, 1e-12);
  const IntensityProfile via_marginal =
      marginal_intensity(propagate_two_photon(state, sys));

  // Tolerance on the normalized (peak-relative) scale; the profiles are
  // densities of magnitude ~1/width.
  const double peak = via_marginal.values.maxCoeff();
  CHECK((via_modes.values - via_marginal.values).cwiseAbs().maxCoeff() <
        1e-8 * peak);
  CHECK(std::abs(via_modes.values.sum() * grid.dx() - 1.0) < 1e-9);
  CHECK(std::abs(via_marginal.values.sum() * grid.dx() - 1.0) < 1e-9);
}

TEST_CASE("mode truncation changes the profile by less than 1e-5 in L1") {
  const GaussianStateParams p{400e-6, 50e-6};
  const Grid1D grid(256, 2.56e-3);
  const TwoPhotonState state = build_state(p, grid);
  const SystemOperator sys = scattering_system(grid, 4 * grid.dx(), 6);
  const SchmidtDecomposition dec = schmidt_decompose(state);

  const IntensityProfile full = reduced_intensity(dec, sys, 1e-12);
  const IntensityProfile truncated = reduced_intensity(dec, sys, 1e-6);
  // Relative L1: the full profile integrates to 1.
  const double l1 =
      (full.values - truncated.values).cwiseAbs().sum() * grid.dx();
  CHECK(l1 < 1e-5);
}

TEST_CASE("identity-like channel on balanced state: smooth Gaussian profile") {
  const GaussianStateParams p{80e-6, 80e-6};
  const Grid1D grid(256, 1e-3);
  const TwoPhotonState state = build_state(p, grid);
  const PhaseScreen zero{grid, RVec::Zero(grid.n()), grid.extent(), 0};
  const SystemOperator sys(grid, zero, SlmMask::flat_centered(grid, 1, grid.n()));
  const IntensityProfile prof = reduced_intensity(state, sys);
  // Far field of a Gaussian is a Gaussian: contrast over its own half-max
  // region is far below speckle levels.
  const PixelRange region = central_region(prof);
  CHECK(speckle_contrast(prof, region) < 0.25);
}

TEST_CASE("speckle_contrast: constant profile and error paths") {
  const Grid1D grid(64, 1e-3);
  IntensityProfile flat{grid, RVec::Constant(64, 2.0)};
  CHECK(speckle_contrast(flat, PixelRange{0, 64}) == doctest::Approx(0.0));
  CHECK_THROWS_AS(speckle_contrast(flat, PixelRange{10, 10}), EmptyRegion);
  IntensityProfile zero{grid, RVec::Zero(64)};
  CHECK_THROWS_AS(speckle_contrast(zero, PixelRange{0, 64}), ZeroMean);
}

TEST_CASE("coherent speckle contrast is near 1 (Rayleigh)") {
  const Grid1D grid(512, 5.12e-3);
  const CVec probe = uniform_field(grid);
  const IntensityProfile env =
      mean_envelope(grid, probe, 2 * grid.dx(), 909, 20);
  const PixelRange region = central_region(env);

  double mean_contrast = 0.0;
  const int n_seeds = 20;
  for (int s = 0; s < n_seeds; ++s) {
    const SystemOperator sys = scattering_system(grid, 2 * grid.dx(), 300 + s);
    const IntensityProfile prof{grid, sys.apply(probe).cwiseAbs2()};
    mean_contrast += speckle_contrast(prof, region);
  }
  mean_contrast /= n_seeds;
  CHECK(std::abs(mean_contrast - 1.0) < 0.10);
}

TEST_CASE("incoherent mixture of M speckles: contrast 1/sqrt(M)") {
  const Grid1D grid(512, 5.12e-3);
  const CVec probe = uniform_field(grid);
  const IntensityProfile env =
      mean_envelope(grid, probe, 2 * grid.dx(), 909, 20);
  const PixelRange region = central_region(env);

  for (int m : {4, 9, 16}) {
    double mean_contrast = 0.0;
    const int n_rep = 10;
    for (int rep = 0; rep < n_rep; ++rep) {
      RVec total = RVec::Zero(grid.n());
      for (int i = 0; i < m; ++i) {
        const SystemOperator sys =
            scattering_system(grid, 2 * grid.dx(), 7000 + rep * 100 + i);
        total += sys.apply(probe).cwiseAbs2();
      }
      mean_contrast += speckle_contrast(IntensityProfile{grid, total}, region);
    }
    mean_contrast /= n_rep;
    CHECK(std::abs(mean_contrast - 1.0 / std::sqrt(double(m))) <
          0.15 / std::sqrt(double(m)));
  }
}

TEST_CASE("contrast decreases with Schmidt number at fixed scatterer") {
  // Small-scale version of the sweep law: K1d in {1, 2, 4, 8}, mean over
  // 6 paired screens, strictly decreasing.
  const Grid1D grid(384, 3.84e-3);
  const double b = 50e-6;
  const CVec probe = [&] {
    CVec f(grid.n());
    for (int k = 0; k < grid.n(); ++k) {
      const double x = grid.coord(k);
      f(k) = std::exp(-x * x / (2 * b * b));
    }
    f /= f.norm() * std::sqrt(grid.dx());
    return f;
  }();
  const IntensityProfile env = mean_envelope(grid, probe, 3 * grid.dx(), 11, 20);
  const PixelRange region = central_region(env);

  double prev = std::numeric_limits<double>::infinity();
  for (double k : {1.0, 2.0, 4.0, 8.0}) {
    const auto params = GaussianStateParams::from_schmidt_1d(k, b, true);
    const TwoPhotonState state = build_state(params, grid, SamplingPolicy::clip);
    const SchmidtDecomposition dec = schmidt_decompose(state);
    double mean = 0.0;
    for (int s = 0; s < 6; ++s) {
      const SystemOperator sys = scattering_system(grid, 3 * grid.dx(), 40 + s);
      mean += speckle_contrast(reduced_intensity(dec, sys), region);
    }
    mean /= 6.0;
    CHECK(mean < prev);
    prev = mean;
  }
}

TEST_CASE("central region: half-max window of a known envelope") {
  const Grid1D grid(128, 1e-3);
  RVec env(grid.n());
  for (int k = 0; k < grid.n(); ++k) {
    const double u = (k - 63.5) / 20.0;
    env(k) = std::exp(-u * u / 2);
  }
  const PixelRange r = central_region(IntensityProfile{grid, env});
  // Half max at |u| = 1.1774 -> pixels 63.5 +- 23.5.
  CHECK(r.first >= 38);
  CHECK(r.first <= 42);
  CHECK(r.last >= 86);
  CHECK(r.last <= 90);
}
