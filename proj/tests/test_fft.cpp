#include "doctest.h"
#include "tpsh/fft.hpp"
#include "tpsh/rng.hpp"

using namespace tpsh;

namespace {

CVec random_field(int n, std::uint64_t seed) {
  Rng rng(seed);
  CVec v(n);
  for (int k = 0; k < n; ++k) v(k) = Complex(rng.normal(), rng.normal());
  return v;
}

}  // namespace

TEST_CASE("centered DFT is unitary") {
  for (int n : {8, 64, 129, 1500}) {
    const CVec v = random_field(n, 11 + n);
    const CVec w = centered_dft(v);
    CHECK(std::abs(w.norm() - v.norm()) < 1e-12 * v.norm());
    const CVec back = centered_idft(w);
    CHECK((back - v).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("delta input gives flat magnitude") {
  const int n = 64;
  CVec v = CVec::Zero(n);
  v(17) = Complex(1.0, 0.0);
  const CVec w = centered_dft(v);
  const double expected = 1.0 / std::sqrt(double(n));
  for (int m = 0; m < n; ++m) CHECK(std::abs(w(m)) == doctest::Approx(expected));
}

TEST_CASE("double application reverses coordinates") {
  for (int n : {16, 63, 200}) {
    const CVec v = random_field(n, 99 + n);
    const CVec w = centered_dft(centered_dft(v));
    double err = 0.0;
    for (int k = 0; k < n; ++k) err = std::max(err, std::abs(w(k) - v(n - 1 - k)));
    CHECK(err < 1e-10);
  }
}

TEST_CASE("dense matrix matches FFT route") {
  const int n = 48;
  const CMat f = centered_dft_matrix(n);
  const CVec v = random_field(n, 5);
  const CVec w1 = centered_dft(v);
  const CVec w2 = f * v;
  CHECK((w1 - w2).cwiseAbs().maxCoeff() < 1e-12);
  // F is symmetric
  CHECK((f - f.transpose()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("2D transform equals F psi F") {
  const int n = 32;
  const CMat f = centered_dft_matrix(n);
  CMat psi(n, n);
  Rng rng(7);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) psi(i, j) = Complex(rng.normal(), rng.normal());
  const CMat direct = f * psi * f.transpose();
  const CMat fast = centered_dft_2d(psi);
  CHECK((direct - fast).cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("plain DFT convolution identity") {
  const int n = 40;
  const CVec a = random_field(n, 1);
  const CVec b = random_field(n, 2);
  CVec conv = plain_idft(plain_dft(a).cwiseProduct(plain_dft(b))) / double(n);
  for (int j : {0, 7, 39}) {
    Complex direct(0, 0);
    for (int k = 0; k < n; ++k) direct += a(k) * b(((j - k) % n + n) % n);
    CHECK(std::abs(conv(j) - direct) < 1e-10);
  }
}
