#pragma once

#include <cstdint>
#include <vector>

#include "tpsh/optical.hpp"
#include "tpsh/spdc.hpp"

namespace tpsh {

// Joint amplitude after both photons traverse the same channel:
// psi_out = T psi T^transpose.
struct OutputJointAmplitude {
  Grid1D grid;
  CMat amplitude;
};

OutputJointAmplitude propagate_two_photon(const TwoPhotonState& state,
                                          const SystemOperator& system);

// Marginal single-photon detection probability density (per meter);
// sum values * dx = 1.
struct IntensityProfile {
  Grid1D grid;
  RVec values;
};

// Coherent-mode route: I(x) = sum_n lambda_n |(T u_n)(x)|^2 with the Schmidt
// expansion truncated at cumulative weight >= 1 - truncation. Equals the
// row-marginal of |psi_out|^2 (unitary channel) up to the truncated tail.
IntensityProfile reduced_intensity(const TwoPhotonState& state,
                                   const SystemOperator& system,
                                   double truncation = 1e-6);

// Same quantity from a precomputed decomposition (sweeps reuse one SVD for
// many screens/masks).
IntensityProfile reduced_intensity(const SchmidtDecomposition& decomposition,
                                   const SystemOperator& system,
                                   double truncation = 1e-6);

// Brute-force marginal of a propagated amplitude (oracle route).
IntensityProfile marginal_intensity(const OutputJointAmplitude& out);

// Contiguous camera-pixel range [first, last).
struct PixelRange {
  int first = 0;
  int last = 0;
  int size() const { return last - first; }
};

// std/mean of the profile over the region.
double speckle_contrast(const IntensityProfile& profile,
                        const PixelRange& region);

// Mean intensity envelope of `probe_field` propagated through n_seeds
// fresh screens (flat mask, same correlation length); seed-averaging washes
// out speckle and leaves the K-independent envelope.
IntensityProfile mean_envelope(const Grid1D& grid, const CVec& probe_field,
                               double correlation_length,
                               std::uint64_t master_seed, int n_seeds);

// Central speckle region: pixels where the envelope exceeds half its peak
// (widest contiguous such range).
PixelRange central_region(const IntensityProfile& envelope);

}  // namespace tpsh
