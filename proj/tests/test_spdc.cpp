#include <cmath>

#include "doctest.h"
#include "tpsh/rng.hpp"
#include "tpsh/spdc.hpp"

using namespace tpsh;

namespace {

// Grid comfortably sampling both widths of a state.
Grid1D adequate_grid(const GaussianStateParams& p, int n = 512) {
  const double span = 6.5 * std::max(p.sum_width, p.diff_width);
  return Grid1D(n, span);
}

}  // namespace

TEST_CASE("sigma_r hand values") {
  // sqrt(1e-3 * 406e-9 / (6 pi)) = 4.6410 um
  CHECK(sigma_r({1e-3, 406e-9, 1e-3}) == doctest::Approx(4.6410e-6).epsilon(1e-4));
  // 810 nm pump: 6.556 um
  CHECK(sigma_r({1e-3, 810e-9, 1e-3}) == doctest::Approx(6.5553e-6).epsilon(1e-4));
  // quadrupling L doubles sigma_r
  const double s1 = sigma_r({1e-3, 406e-9, 1e-3});
  const double s4 = sigma_r({4e-3, 406e-9, 1e-3});
  CHECK(s4 == doctest::Approx(2.0 * s1).epsilon(1e-12));
}

TEST_CASE("sigma_p hand values") {
  CHECK(sigma_p({1e-3, 406e-9, 1e-3}) == doctest::Approx(500.0));
  CHECK(sigma_p({1e-3, 406e-9, 50e-6}) == doctest::Approx(10000.0));
  const double p1 = sigma_p({1e-3, 406e-9, 1e-3});
  const double p2 = sigma_p({1e-3, 406e-9, 2e-3});
  CHECK(p2 == doctest::Approx(0.5 * p1).epsilon(1e-12));
}

TEST_CASE("wavelength helper divides by the index") {
  CHECK(in_medium_wavelength(405e-9, 1.6) == doctest::Approx(405e-9 / 1.6));
}

TEST_CASE("g1 analytic: hand-evaluated exponent") {
  const SpdcConfig config{1e-3, 406e-9, 1e-3};
  CHECK(g1_analytic(config, 0.0) == doctest::Approx(1.0));
  // Exponent coefficient 2.32132e10 1/m^2; r = sqrt(1/c) = 6.5634 um -> 1/e.
  CHECK(g1_exponent_coefficient(config) ==
        doctest::Approx(2.32132e10).epsilon(1e-4));
  CHECK(g1_analytic(config, 6.5634e-6) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-3));
}

TEST_CASE("g1 analytic: balanced case is fully coherent") {
  // 24 pi w^2 = L lambda_p  =>  w = sqrt(L lp / (24 pi))
  const double w = std::sqrt(1e-3 * 406e-9 / (24.0 * M_PI));
  const SpdcConfig config{1e-3, 406e-9, w};
  for (double r : {0.0, 1e-6, 1e-4, 1e-2})
    CHECK(g1_analytic(config, r) == doctest::Approx(1.0));
  CHECK_THROWS_AS(g1_fwhm(config), InfiniteWidth);
}

TEST_CASE("g1 fwhm: paper numbers and scaling") {
  const SpdcConfig config{1e-3, 406e-9, 1e-3};
  CHECK(g1_fwhm(config) == doctest::Approx(10.93e-6).epsilon(1e-3));
  // Quadrupling the coefficient halves the width: c ~ 1/w^2 at large w,
  // so compare directly through the closed form.
  const double c = g1_exponent_coefficient(config);
  const double width = 2.0 * std::sqrt(std::log(2.0) / c);
  CHECK(g1_fwhm(config) == doctest::Approx(width));
}

TEST_CASE("Schmidt number: hand values, minimum, symmetry") {
  const SpdcConfig focused{1e-3, 406e-9, 50e-6};
  CHECK(schmidt_number_2d(focused) == doctest::Approx(116.57).epsilon(1e-3));
  CHECK(schmidt_number_1d(focused) == doctest::Approx(10.7967).epsilon(1e-3));

  const double wb = std::sqrt(1e-3 * 406e-9 / (24.0 * M_PI));
  CHECK(schmidt_number_2d({1e-3, 406e-9, wb}) == doctest::Approx(1.0));

  // Invariance under 24 pi w^2 <-> L lambda_p: pick u' = v, v' = u.
  const double u = 24.0 * M_PI * 50e-6 * 50e-6;
  const double v = 1e-3 * 406e-9;
  const double w_swapped = std::sqrt(v / (24.0 * M_PI));
  // lambda' chosen so L lambda' = u with L = 1 mm.
  const SpdcConfig swapped{1e-3, u / 1e-3, w_swapped};
  CHECK(schmidt_number_2d(swapped) ==
        doctest::Approx(schmidt_number_2d(focused)).epsilon(1e-10));

  // K >= 1 for random configs.
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    SpdcConfig c{std::pow(10, rng.uniform(-4, -2)),
                 std::pow(10, rng.uniform(-7, -6)),
                 std::pow(10, rng.uniform(-5, -2))};
    CHECK(schmidt_number_2d(c) >= 1.0);
  }
}

TEST_CASE("build_state: normalization, symmetry, factorization") {
  const GaussianStateParams balanced{50e-6, 50e-6};
  const Grid1D grid = adequate_grid(balanced, 256);
  const TwoPhotonState state = build_state(balanced, grid);

  CHECK(std::abs(state.norm_l2() - 1.0) < 1e-10);
  double asym = 0.0;
  for (int i = 0; i < grid.n(); ++i)
    for (int j = 0; j < i; ++j)
      asym = std::max(asym,
                      std::abs(state.amplitude(i, j) - state.amplitude(j, i)));
  CHECK(asym < 1e-12);
  // Real and positive.
  CHECK(state.amplitude.imag().cwiseAbs().maxCoeff() == 0.0);
  CHECK(state.amplitude.real().minCoeff() >= 0.0);

  // Balanced case is rank one: psi(x1, x2) = f(x1) f(x2).
  const auto lambdas = schmidt_coefficients(state);
  CHECK(lambdas[0] == doctest::Approx(1.0).epsilon(1e-8));
  for (std::size_t i = 1; i < 10; ++i) CHECK(lambdas[i] < 1e-8);
}

TEST_CASE("build_state: sampling errors") {
  const GaussianStateParams p{100e-6, 10e-6};
  // dx too coarse: dx must be <= min width / 3.
  CHECK_THROWS_AS(build_state(p, Grid1D(32, 700e-6)), UndersampledGrid);
  // extent too small: norm capture below 0.999.
  CHECK_THROWS_AS(build_state(p, Grid1D(256, 150e-6)), TruncatedState);
  // clip policy accepts and renormalizes.
  const TwoPhotonState clipped =
      build_state(p, Grid1D(256, 150e-6), SamplingPolicy::clip);
  CHECK(std::abs(clipped.norm_l2() - 1.0) < 1e-10);
}

TEST_CASE("build_state: Fig-4-scale configuration passes invariants") {
  // 10 mm extent, 1500 pixels, B = 133 um; balanced state (K = 1).
  const Grid1D grid(1500, 10e-3);
  const TwoPhotonState state = build_state({133e-6, 133e-6}, grid);
  CHECK(std::abs(state.norm_l2() - 1.0) < 1e-10);
}

TEST_CASE("schmidt_decompose: ratio-10 state and geometric decay") {
  const GaussianStateParams p{500e-6, 50e-6};  // A/B = 10
  const Grid1D grid = adequate_grid(p, 640);
  const TwoPhotonState state = build_state(p, grid);
  const SchmidtDecomposition dec = schmidt_decompose(state);

  // K1d = (10 + 1/10)/2 = 5.05 within 1%.
  CHECK(dec.schmidt_number_1d() == doctest::Approx(5.05).epsilon(0.01));

  // Geometric decay lambda_{n+1}/lambda_n = ((A-B)/(A+B))^2 = (9/11)^2.
  const double q = std::pow(9.0 / 11.0, 2);
  for (int n = 0; n < 10; ++n) {
    const double ratio = dec.coefficients[n + 1] / dec.coefficients[n];
    CHECK(std::abs(ratio - q) < 1e-3);
  }

  // Coefficients descending, sum 1, modes orthonormal.
  double sum = 0.0;
  for (std::size_t i = 1; i < dec.coefficients.size(); ++i)
    CHECK(dec.coefficients[i] <= dec.coefficients[i - 1] + 1e-15);
  for (double l : dec.coefficients) sum += l;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));

  const double dx = grid.dx();
  for (int a = 0; a < 5; ++a)
    for (int b = 0; b <= a; ++b) {
      const Complex dot = (dec.modes[a].adjoint() * dec.modes[b])(0, 0) * dx;
      const double expected = a == b ? 1.0 : 0.0;
      CHECK(std::abs(dot - Complex(expected, 0)) < 1e-10);
    }
}

TEST_CASE("schmidt oracle agreement across random configs") {
  // 20 random configs spanning K2d in [1, 200]: SVD route vs closed form
  // within 1%.
  Rng rng(12345);
  for (int trial = 0; trial < 20; ++trial) {
    const double k2d = std::pow(10.0, rng.uniform(0.0, std::log10(200.0)));
    const double k1d = std::sqrt(k2d);
    const GaussianStateParams p =
        GaussianStateParams::from_schmidt_1d(k1d, 40e-6, true);
    const Grid1D grid = adequate_grid(p, 512);
    const TwoPhotonState state = build_state(p, grid);
    const auto lambdas = schmidt_coefficients(state);
    double s2 = 0.0;
    for (double l : lambdas) s2 += l * l;
    const double k_numeric = 1.0 / s2;
    CHECK(std::abs(k_numeric - k1d) / k1d < 0.01);
  }
}

TEST_CASE("g1_numeric matches the closed form") {
  const SpdcConfig config{5e-3, 810e-9, 120e-6};  // moderately entangled
  const GaussianStateParams p = GaussianStateParams::from_config(config);
  const Grid1D grid = adequate_grid(p, 700);
  const TwoPhotonState state = build_state(p, grid);

  CHECK(g1_numeric(state, 0.0) == doctest::Approx(1.0).epsilon(1e-9));

  const double fwhm = g1_fwhm(config);
  double worst = 0.0;
  for (int i = 0; i <= 24; ++i) {
    const double r_req = -2.0 * fwhm + i * (4.0 * fwhm / 24.0);
    // Compare at the grid pixel actually used by the numeric route.
    const double r = grid.coord(grid.nearest_index(r_req));
    worst = std::max(worst,
                     std::abs(g1_numeric(state, r) - g1_analytic(config, r)));
  }
  CHECK(worst < 1e-3);
}

TEST_CASE("g1_numeric: balanced state is coherent everywhere") {
  const GaussianStateParams p{80e-6, 80e-6};
  const Grid1D grid = adequate_grid(p, 400);
  const TwoPhotonState state = build_state(p, grid);
  for (double r : {0.0, 20e-6, 60e-6, 110e-6})
    CHECK(std::abs(g1_numeric(state, r) - 1.0) < 1e-6);
}

TEST_CASE("monotone transfer: shrinking the pump trades K for coherence") {
  // Descending w on the w > w_balanced branch: K strictly decreases and the
  // coherence width strictly increases.
  const double l = 1e-3, lp = 406e-9;
  const double w_balanced = std::sqrt(l * lp / (24.0 * M_PI));
  double prev_k = std::numeric_limits<double>::infinity();
  double prev_fwhm = 0.0;
  for (int i = 0; i < 10; ++i) {
    const double w = w_balanced * std::pow(10.0, 2.0 - 0.2 * i);
    const SpdcConfig config{l, lp, w};
    const double k = schmidt_number_2d(config);
    const double fw = g1_fwhm(config);
    CHECK(k < prev_k);
    CHECK(fw > prev_fwhm);
    prev_k = k;
    prev_fwhm = fw;
  }
}

TEST_CASE("from_schmidt_1d picks the requested branch") {
  const auto wide = GaussianStateParams::from_schmidt_1d(4.0, 1e-4, true);
  const auto narrow = GaussianStateParams::from_schmidt_1d(4.0, 1e-4, false);
  CHECK(wide.sum_width > wide.diff_width);
  CHECK(narrow.sum_width < narrow.diff_width);
  CHECK(schmidt_number_1d(wide) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(schmidt_number_1d(narrow) == doctest::Approx(4.0).epsilon(1e-12));
}
