#pragma once

#include <Eigen/Core>
#include <complex>

#include "tpsh/grid.hpp"

namespace tpsh {

using Complex = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;

// Unitary centered discrete Fourier transform matched to the grid convention
// x_k = (k - c) dx with c = (n-1)/2:
//
//   (F v)_m = n^{-1/2} sum_k v_k exp(-2*pi*i (m - c)(k - c) / n)
//
// F is unitary and symmetric, and F^2 is exactly the index reversal
// k -> n-1-k (parity about x = 0). Backed by FFTW with a process-wide plan
// cache; safe to call concurrently.
CVec centered_dft(const CVec& v);
CVec centered_idft(const CVec& v);

// Apply the centered DFT to every column, then every row: out = F * m * F
// (F is symmetric, so this equals F m F^T).
CMat centered_dft_2d(const CMat& m);

// Dense matrix of the transform (for tests and serialization of small
// systems).
CMat centered_dft_matrix(int n);

// Plain unnormalized DFT pair (forward: sum_k v_k e^{-2 pi i mk/n};
// backward undoes it up to the factor n). For circular convolutions.
CVec plain_dft(const CVec& v);
CVec plain_idft(const CVec& v);

}  // namespace tpsh
