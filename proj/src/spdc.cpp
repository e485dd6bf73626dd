#include "tpsh/spdc.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

#include "tpsh/errors.hpp"

namespace tpsh {

namespace {

void require_positive_finite(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw ConfigError(std::string(name) + " must be positive and finite");
}

}  // namespace

void SpdcConfig::validate() const {
  require_positive_finite(crystal_length, "crystal_length");
  require_positive_finite(lambda_pump, "lambda_pump");
  require_positive_finite(pump_waist, "pump_waist");
}

double in_medium_wavelength(double lambda_vacuum, double refractive_index) {
  require_positive_finite(lambda_vacuum, "lambda_vacuum");
  require_positive_finite(refractive_index, "refractive_index");
  return lambda_vacuum / refractive_index;
}

double sigma_r(const SpdcConfig& config) {
  config.validate();
  return std::sqrt(config.crystal_length * config.lambda_pump / (6.0 * M_PI));
}

double sigma_p(const SpdcConfig& config) {
  config.validate();
  return 1.0 / (2.0 * config.pump_waist);
}

GaussianStateParams GaussianStateParams::from_config(const SpdcConfig& config) {
  return GaussianStateParams{1.0 / sigma_p(config), sigma_r(config)};
}

GaussianStateParams GaussianStateParams::from_schmidt_1d(double k1d,
                                                         double diff_width,
                                                         bool sum_wider) {
  if (!(k1d >= 1.0) || !std::isfinite(k1d))
    throw ConfigError("k1d must be >= 1");
  require_positive_finite(diff_width, "diff_width");
  const double ratio = k1d + std::sqrt(k1d * k1d - 1.0);  // A/B >= 1 branch
  const double a = sum_wider ? diff_width * ratio : diff_width / ratio;
  return GaussianStateParams{a, diff_width};
}

void GaussianStateParams::validate() const {
  require_positive_finite(sum_width, "sum_width");
  require_positive_finite(diff_width, "diff_width");
}

double TwoPhotonState::norm_l2() const {
  return amplitude.norm() * grid.dx();
}

TwoPhotonState build_state(const GaussianStateParams& params,
                           const Grid1D& grid, SamplingPolicy policy) {
  params.validate();
  const double a = params.sum_width;
  const double b = params.diff_width;
  const int n = grid.n();
  const double dx = grid.dx();

  if (policy == SamplingPolicy::strict && dx > std::min(a, b) / 3.0)
    throw UndersampledGrid(
        "build_state: dx exceeds min(sum_width, diff_width)/3");

  const RVec x = grid.coords();
  // Separable in (s, d): evaluate the two Gaussian factors per pair.
  Eigen::MatrixXd psi(n, n);
  const double ia = 1.0 / (4.0 * a * a);
  const double ib = 1.0 / (4.0 * b * b);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double s = x(i) + x(j);
      const double d = x(i) - x(j);
      psi(i, j) = std::exp(-s * s * ia - d * d * ib);
    }
  }

  const double grid_norm_sq = psi.squaredNorm() * dx * dx;
  if (grid_norm_sq <= 0.0)
    throw TruncatedState("build_state: state vanishes on the grid");

  if (policy == SamplingPolicy::strict) {
    // Analytic norm of the unnormalized amplitude: |psi|^2 factorizes into
    // exp(-s^2/(2a^2)) exp(-d^2/(2b^2)) with Jacobian 1/2, so
    // integral |psi|^2 = pi a b.
    const double analytic_norm_sq = M_PI * a * b;
    if (grid_norm_sq < 0.999 * analytic_norm_sq)
      throw TruncatedState(
          "build_state: grid captures < 0.999 of the analytic norm");
    if (grid.extent() < 6.0 * std::max(a, b))
      throw TruncatedState("build_state: extent < 6 max(sum_width, diff_width)");
  }

  psi /= std::sqrt(grid_norm_sq);
  TwoPhotonState state{grid, psi.cast<Complex>()};
  return state;
}

double g1_exponent_coefficient(const SpdcConfig& config) {
  config.validate();
  const double w = config.pump_waist;
  const double u = 24.0 * M_PI * w * w;
  const double v = config.crystal_length * config.lambda_pump;
  const double num = (u - v) * (u - v);
  return num / (8.0 * w * w * (u + v) * v);
}

double g1_analytic(const SpdcConfig& config, double r) {
  return std::exp(-g1_exponent_coefficient(config) * r * r);
}

double g1_fwhm(const SpdcConfig& config) {
  const double c = g1_exponent_coefficient(config);
  if (c <= 0.0)
    throw InfiniteWidth("g1_fwhm: balanced state, coherence length unbounded");
  return 2.0 * std::sqrt(std::log(2.0) / c);
}

double schmidt_number_2d(const SpdcConfig& config) {
  config.validate();
  const double w = config.pump_waist;
  const double u = 24.0 * M_PI * w * w;
  const double v = config.crystal_length * config.lambda_pump;
  const double t = (u + v) / std::sqrt(u * v);
  return 0.25 * t * t;
}

double schmidt_number_1d(const SpdcConfig& config) {
  return std::sqrt(schmidt_number_2d(config));
}

double schmidt_number_1d(const GaussianStateParams& params) {
  params.validate();
  const double r = params.sum_width / params.diff_width;
  return 0.5 * (r + 1.0 / r);
}

namespace {

// Shared SVD core. The double-Gaussian amplitude is real; propagated states
// are not. The real path is noticeably faster, so detect it.
std::vector<double> singular_values(const TwoPhotonState& state) {
  const CMat& psi = state.amplitude;
  Eigen::VectorXd sv;
  if (psi.imag().cwiseAbs().maxCoeff() == 0.0) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(psi.real());
    if (svd.info() != Eigen::Success)
      throw DecompositionFailure("schmidt: SVD did not converge");
    sv = svd.singularValues();
  } else {
    Eigen::BDCSVD<CMat> svd(psi);
    if (svd.info() != Eigen::Success)
      throw DecompositionFailure("schmidt: SVD did not converge");
    sv = svd.singularValues();
  }
  std::vector<double> lambda(sv.size());
  const double dx = state.grid.dx();
  double total = 0.0;
  for (int i = 0; i < sv.size(); ++i) {
    lambda[i] = sv(i) * dx * sv(i) * dx;
    total += lambda[i];
  }
  if (!(total > 0.0))
    throw DecompositionFailure("schmidt: zero-norm state");
  for (double& l : lambda) l /= total;
  return lambda;
}

}  // namespace

std::vector<double> schmidt_coefficients(const TwoPhotonState& state) {
  return singular_values(state);
}

double SchmidtDecomposition::schmidt_number_1d() const {
  double s2 = 0.0;
  for (double l : coefficients) s2 += l * l;
  return 1.0 / s2;
}

SchmidtDecomposition schmidt_decompose(const TwoPhotonState& state) {
  const CMat& psi = state.amplitude;
  const int n = static_cast<int>(psi.rows());
  const double dx = state.grid.dx();

  SchmidtDecomposition out;
  Eigen::VectorXd sv;
  CMat u;
  if (psi.imag().cwiseAbs().maxCoeff() == 0.0) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(psi.real(),
                                       Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success)
      throw DecompositionFailure("schmidt_decompose: SVD did not converge");
    sv = svd.singularValues();
    u = svd.matrixU().cast<Complex>();
  } else {
    Eigen::BDCSVD<CMat> svd(psi, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success)
      throw DecompositionFailure("schmidt_decompose: SVD did not converge");
    sv = svd.singularValues();
    u = svd.matrixU();
  }

  double total = 0.0;
  std::vector<double> lambda(sv.size());
  for (int i = 0; i < sv.size(); ++i) {
    lambda[i] = sv(i) * dx * sv(i) * dx;
    total += lambda[i];
  }
  if (!(total > 0.0))
    throw DecompositionFailure("schmidt_decompose: zero-norm state");

  out.coefficients.resize(sv.size());
  for (int i = 0; i < sv.size(); ++i) out.coefficients[i] = lambda[i] / total;

  // Modes are stored for the leading coefficients only (cumulative weight
  // 1 - 1e-12); the tail is numerical noise and would dominate memory on
  // large grids. Coefficients stay complete.
  const double mode_scale = 1.0 / std::sqrt(dx);  // sum |u|^2 dx = 1
  double cumulative = 0.0;
  for (int i = 0; i < sv.size(); ++i) {
    out.modes.push_back(u.col(i) * mode_scale);
    cumulative += out.coefficients[i];
    if (cumulative >= 1.0 - 1e-12) break;
  }
  (void)n;
  return out;
}

double g1_numeric(const TwoPhotonState& state, double r) {
  const Grid1D& g = state.grid;
  const int ip = g.nearest_index(r);
  const int im = g.nearest_index(-r);
  const CMat& psi = state.amplitude;
  const double dx = g.dx();

  // rho(x, x') = sum_a psi(x, a) conj(psi(x', a)) dx
  const Complex rho_pm = (psi.row(ip) * psi.row(im).adjoint())(0, 0) * dx;
  const double rho_pp =
      (psi.row(ip) * psi.row(ip).adjoint())(0, 0).real() * dx;
  const double rho_mm =
      (psi.row(im) * psi.row(im).adjoint())(0, 0).real() * dx;

  const double peak = psi.cwiseAbs2().rowwise().sum().maxCoeff() * dx;
  if (rho_pp < 1e-15 * peak || rho_mm < 1e-15 * peak)
    throw ZeroIntensity("g1_numeric: intensity below 1e-15 of peak at +-r");

  return std::abs(rho_pm) / std::sqrt(rho_pp * rho_mm);
}

}  // namespace tpsh
