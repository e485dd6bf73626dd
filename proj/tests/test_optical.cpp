#include <cmath>

#include "doctest.h"
#include "tpsh/optical.hpp"
#include "tpsh/propagation.hpp"
#include "tpsh/rng.hpp"

using namespace tpsh;

TEST_CASE("phase screen: determinism and range") {
  const Grid1D grid(256, 2.56e-3);
  const PhaseScreen a = random_phase_screen(grid, 40e-6, 42);
  const PhaseScreen b = random_phase_screen(grid, 40e-6, 42);
  CHECK((a.phases - b.phases).cwiseAbs().maxCoeff() == 0.0);
  const PhaseScreen c = random_phase_screen(grid, 40e-6, 43);
  CHECK((a.phases - c.phases).cwiseAbs().maxCoeff() > 0.0);
  for (int k = 0; k < grid.n(); ++k) {
    CHECK(a.phases(k) > -M_PI);
    CHECK(a.phases(k) <= M_PI);
  }
}

TEST_CASE("phase screen: correlation length below pitch is rejected") {
  const Grid1D grid(128, 1.28e-3);
  CHECK_THROWS_AS(random_phase_screen(grid, 0.5 * grid.dx(), 1),
                  CorrelationTooFine);
}

TEST_CASE("phase screen: full-extent correlation barely scatters") {
  // No-scattering limit: a screen correlated across the whole window leaves
  // a coherent beam essentially unscattered, so the transmitted pattern has
  // far less contrast than developed speckle.
  const Grid1D grid(256, 2.56e-3);
  CVec probe(grid.n());
  const double w = 16 * grid.dx();
  for (int k = 0; k < grid.n(); ++k) {
    const double x = grid.coord(k);
    probe(k) = std::exp(-x * x / (2 * w * w));
  }
  probe /= probe.norm() * std::sqrt(grid.dx());

  double mean_contrast = 0.0;
  for (int s = 0; s < 5; ++s) {
    const PhaseScreen screen = random_phase_screen(grid, grid.extent(), 7 + s);
    const SystemOperator sys(grid, screen,
                             SlmMask::flat_centered(grid, 1, grid.n()));
    const IntensityProfile prof{grid, sys.apply(probe).cwiseAbs2()};
    mean_contrast += speckle_contrast(prof, central_region(prof));
  }
  CHECK(mean_contrast / 5 < 0.25);
}

TEST_CASE("phase screen: field autocorrelation width matches request") {
  // Monte-Carlo over 100 seeds: the 1/e crossing of
  // E[exp(i phi(x)) conj(exp(i phi(x+D)))] falls within 25% of the request.
  const Grid1D grid(512, 5.12e-3);
  for (double target : {4.0 * grid.dx(), 10.0 * grid.dx()}) {
    const int max_lag = 64;
    Eigen::VectorXd corr = Eigen::VectorXd::Zero(max_lag + 1);
    for (int seed = 0; seed < 100; ++seed) {
      const PhaseScreen s = random_phase_screen(grid, target, 1000 + seed);
      CVec field(grid.n());
      for (int k = 0; k < grid.n(); ++k)
        field(k) = Complex(std::cos(s.phases(k)), std::sin(s.phases(k)));
      for (int lag = 0; lag <= max_lag; ++lag) {
        Complex acc(0, 0);
        for (int k = 0; k < grid.n(); ++k)
          acc += field(k) * std::conj(field((k + lag) % grid.n()));
        corr(lag) += std::abs(acc / double(grid.n()));
      }
    }
    corr /= 100.0;
    // First lag where the correlation drops below 1/e, linearly interpolated.
    const double threshold = std::exp(-1.0);
    double width = max_lag * grid.dx();
    for (int lag = 1; lag <= max_lag; ++lag) {
      if (corr(lag) < threshold) {
        const double frac =
            (corr(lag - 1) - threshold) / (corr(lag - 1) - corr(lag));
        width = (lag - 1 + frac) * grid.dx();
        break;
      }
    }
    CHECK(std::abs(width - target) / target < 0.25);
  }
}

TEST_CASE("SlmMask: expansion, segmentation, wrapping") {
  const Grid1D grid(64, 6.4e-4);
  SlmMask mask = SlmMask::flat(8, 16, 4);  // aperture pixels [16, 48)
  mask.segment_phases(3) = 1.5;
  const RVec full = mask.expand(grid);
  CHECK(full(15) == 0.0);
  CHECK(full(16 + 12) == 1.5);  // segment 3 covers pixels [28, 32)
  CHECK(full(48) == 0.0);
  CHECK(mask.segment_of_pixel(10) == -1);
  CHECK(mask.segment_of_pixel(29) == 3);
  CHECK(wrap_phase(3 * M_PI) == doctest::Approx(M_PI));
  CHECK(wrap_phase(-M_PI) == doctest::Approx(M_PI));
}

TEST_CASE("quadrant_pi_shift: involution and bounds") {
  SlmMask mask = SlmMask::flat(16, 0, 2);
  Rng rng(5);
  for (int s = 0; s < 16; ++s) mask.segment_phases(s) = rng.uniform(-3.0, 3.0);
  const SlmMask once = quadrant_pi_shift(mask, 4, 12);
  const SlmMask twice = quadrant_pi_shift(once, 4, 12);
  for (int s = 0; s < 16; ++s) {
    CHECK(std::abs(wrap_phase(twice.segment_phases(s) -
                              mask.segment_phases(s))) < 1e-12);
    if (s < 4 || s >= 12)
      CHECK(once.segment_phases(s) == mask.segment_phases(s));
  }
  // Empty region leaves the mask unchanged.
  const SlmMask same = quadrant_pi_shift(mask, 5, 5);
  CHECK((same.segment_phases - mask.segment_phases).cwiseAbs().maxCoeff() ==
        0.0);
  CHECK_THROWS_AS(quadrant_pi_shift(mask, 0, 17), RegionOutOfRange);
}

TEST_CASE("system operator: zero screen and flat mask reduce to the DFT") {
  const Grid1D grid(128, 1.28e-3);
  const PhaseScreen zero{grid, RVec::Zero(grid.n()), grid.extent(), 0};
  const SlmMask flat = SlmMask::flat_centered(grid, 8, 16);
  const SystemOperator sys = compose_system(zero, flat, grid);

  Rng rng(9);
  CVec v(grid.n());
  for (int k = 0; k < grid.n(); ++k) v(k) = Complex(rng.normal(), rng.normal());
  const CVec direct = fourier_propagate(v, grid);
  const CVec via_system = sys.apply(v);
  CHECK((direct - via_system).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("system operator: apply equals sequential factors and is unitary") {
  const Grid1D grid(96, 1e-3);
  const PhaseScreen screen = random_phase_screen(grid, 3 * grid.dx(), 21);
  SlmMask mask = SlmMask::flat_centered(grid, 12, 8);
  Rng rng(2);
  for (int s = 0; s < 12; ++s) mask.segment_phases(s) = rng.uniform(-3, 3);
  const SystemOperator sys = compose_system(screen, mask, grid);

  CVec v(grid.n());
  for (int k = 0; k < grid.n(); ++k) v(k) = Complex(rng.normal(), rng.normal());

  // Sequential: SLM phase, screen phase, DFT.
  CVec step = v;
  const RVec slm = mask.expand(grid);
  for (int k = 0; k < grid.n(); ++k)
    step(k) *= Complex(std::cos(slm(k)), std::sin(slm(k))) *
               Complex(std::cos(screen.phases(k)), std::sin(screen.phases(k)));
  step = fourier_propagate(step, grid);
  CHECK((sys.apply(v) - step).cwiseAbs().maxCoeff() < 1e-12);

  // Norm preserved.
  CHECK(std::abs(sys.apply(v).norm() - v.norm()) < 1e-10 * v.norm());

  // Dense route agrees.
  const CVec via_dense = sys.dense() * v;
  CHECK((sys.apply(v) - via_dense).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("perfect conjugation mask cancels the screen") {
  const Grid1D grid(128, 1.28e-3);
  const PhaseScreen screen = random_phase_screen(grid, 2 * grid.dx(), 33);
  // One segment per pixel covering everything.
  SlmMask mask = SlmMask::flat(grid.n(), 0, 1);
  for (int k = 0; k < grid.n(); ++k)
    mask.segment_phases(k) = wrap_phase(-screen.phases(k));
  const SystemOperator sys = compose_system(screen, mask, grid);

  Rng rng(4);
  CVec v(grid.n());
  for (int k = 0; k < grid.n(); ++k) v(k) = Complex(rng.normal(), rng.normal());
  const CVec expect = fourier_propagate(v, grid);
  CHECK((sys.apply(v) - expect).cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("apply_mask: replacement semantics and global phase invariance") {
  const Grid1D grid(64, 6.4e-4);
  const PhaseScreen screen = random_phase_screen(grid, 3 * grid.dx(), 17);
  SlmMask a = SlmMask::flat(grid.n(), 0, 1);  // full-grid aperture
  SlmMask b = a;
  Rng rng(8);
  for (int s = 0; s < grid.n(); ++s) {
    a.segment_phases(s) = rng.uniform(-3, 3);
    b.segment_phases(s) = rng.uniform(-3, 3);
  }

  const SystemOperator sys_a = compose_system(screen, a, grid);
  const SystemOperator replaced = apply_mask(sys_a, b);
  const SystemOperator fresh = compose_system(screen, b, grid);
  CHECK((replaced.diagonal_factor() - fresh.diagonal_factor())
            .cwiseAbs()
            .maxCoeff() < 1e-15);
  // Original unchanged, flat replacement is identity on the factor.
  const SystemOperator same = apply_mask(sys_a, a);
  CHECK((same.diagonal_factor() - sys_a.diagonal_factor())
            .cwiseAbs()
            .maxCoeff() == 0.0);

  // Uniform segment offset = global phase: intensities identical (the mask
  // covers the whole grid here).
  SlmMask shifted = a;
  for (int s = 0; s < grid.n(); ++s)
    shifted.segment_phases(s) = wrap_phase(a.segment_phases(s) + 0.7);
  const SystemOperator sys_shift = apply_mask(sys_a, shifted);
  CVec v(grid.n());
  for (int k = 0; k < grid.n(); ++k) v(k) = Complex(rng.normal(), rng.normal());
  const RVec i0 = sys_a.apply(v).cwiseAbs2();
  const RVec i1 = sys_shift.apply(v).cwiseAbs2();
  CHECK((i0 - i1).cwiseAbs().maxCoeff() < 1e-12 * i0.maxCoeff());
}

TEST_CASE("diagonal factors commute (image-plane identity)") {
  // Screen and SLM sit in conjugate image planes: their phase factors are
  // both diagonal, so composing in either order gives the same operator.
  const Grid1D grid(64, 6.4e-4);
  const PhaseScreen screen = random_phase_screen(grid, 3 * grid.dx(), 3);
  SlmMask mask = SlmMask::flat(grid.n(), 0, 1);
  Rng rng(14);
  for (int s = 0; s < grid.n(); ++s) mask.segment_phases(s) = rng.uniform(-3, 3);

  const RVec slm = mask.expand(grid);
  CVec order1(grid.n()), order2(grid.n());
  for (int k = 0; k < grid.n(); ++k) {
    const Complex e_screen(std::cos(screen.phases(k)), std::sin(screen.phases(k)));
    const Complex e_slm(std::cos(slm(k)), std::sin(slm(k)));
    order1(k) = e_screen * e_slm;
    order2(k) = e_slm * e_screen;
  }
  CHECK((order1 - order2).cwiseAbs().maxCoeff() < 1e-12);
  const SystemOperator sys = compose_system(screen, mask, grid);
  CHECK((sys.diagonal_factor() - order1).cwiseAbs().maxCoeff() < 1e-12);
}
