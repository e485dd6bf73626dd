#include "tpsh/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace tpsh {
namespace {

// One forward/backward plan pair per transform size. fftw_execute_dft on a
// cached plan with fresh buffers is thread-safe; plan creation is not, so it
// is serialized. Plans use FFTW_ESTIMATE | FFTW_UNALIGNED: deterministic
// algorithm choice and no alignment requirement on the new-array interface.
struct PlanPair {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

class PlanCache {
public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  PlanPair get(int n) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = plans_.find(n);
    if (it != plans_.end()) return it->second;
    std::vector<Complex> a(n), b(n);
    PlanPair p;
    p.fwd = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(a.data()),
                             reinterpret_cast<fftw_complex*>(b.data()),
                             FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    p.bwd = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(a.data()),
                             reinterpret_cast<fftw_complex*>(b.data()),
                             FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_[n] = p;
    return p;
  }

private:
  PlanCache() = default;
  std::mutex mutex_;
  std::map<int, PlanPair> plans_;
};

// Phase ramp diag(exp(+2*pi*i c k / n)) and the scalar prefactor
// exp(-2*pi*i c^2 / n) / sqrt(n) that turn the plain DFT into the centered
// unitary one: F = prefactor * D * F_std * D.
struct CenterPhases {
  CVec ramp;        // D
  Complex fwd_pref; // prefactor for the forward transform
};

const CenterPhases& phases_for(int n) {
  static std::mutex m;
  static std::map<int, CenterPhases> cache;
  std::lock_guard<std::mutex> lock(m);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  CenterPhases cp;
  cp.ramp.resize(n);
  const double c = 0.5 * (n - 1);
  for (int k = 0; k < n; ++k) {
    const double a = 2.0 * M_PI * c * k / n;
    cp.ramp(k) = Complex(std::cos(a), std::sin(a));
  }
  const double a0 = -2.0 * M_PI * c * c / n;
  cp.fwd_pref = Complex(std::cos(a0), std::sin(a0)) / std::sqrt(double(n));
  cache[n] = std::move(cp);
  return cache.at(n);
}

CVec run_plan(const CVec& v, bool forward) {
  const int n = static_cast<int>(v.size());
  const CenterPhases& cp = phases_for(n);
  PlanPair plans = PlanCache::instance().get(n);

  CVec in(n), out(n);
  if (forward) {
    in = v.cwiseProduct(cp.ramp);
    fftw_execute_dft(plans.fwd, reinterpret_cast<fftw_complex*>(in.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    out = out.cwiseProduct(cp.ramp) * cp.fwd_pref;
  } else {
    in = v.cwiseProduct(cp.ramp.conjugate());
    fftw_execute_dft(plans.bwd, reinterpret_cast<fftw_complex*>(in.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    out = out.cwiseProduct(cp.ramp.conjugate()) * std::conj(cp.fwd_pref);
  }
  return out;
}

}  // namespace

CVec centered_dft(const CVec& v) { return run_plan(v, true); }

CVec centered_idft(const CVec& v) { return run_plan(v, false); }

CMat centered_dft_2d(const CMat& m) {
  const int n = static_cast<int>(m.rows());
  CMat tmp(n, m.cols());
  for (int j = 0; j < m.cols(); ++j) tmp.col(j) = centered_dft(m.col(j));
  CMat out(n, m.cols());
  for (int i = 0; i < n; ++i)
    out.row(i) = centered_dft(CVec(tmp.row(i).transpose())).transpose();
  return out;
}

CVec plain_dft(const CVec& v) {
  const int n = static_cast<int>(v.size());
  PlanPair plans = PlanCache::instance().get(n);
  CVec in = v, out(n);
  fftw_execute_dft(plans.fwd, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

CVec plain_idft(const CVec& v) {
  const int n = static_cast<int>(v.size());
  PlanPair plans = PlanCache::instance().get(n);
  CVec in = v, out(n);
  fftw_execute_dft(plans.bwd, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

CMat centered_dft_matrix(int n) {
  CMat f(n, n);
  const double c = 0.5 * (n - 1);
  const double w = std::sqrt(double(n));
  for (int m = 0; m < n; ++m)
    for (int k = 0; k < n; ++k) {
      const double a = -2.0 * M_PI * (m - c) * (k - c) / n;
      f(m, k) = Complex(std::cos(a), std::sin(a)) / w;
    }
  return f;
}

}  // namespace tpsh
