#pragma once

#include <Eigen/Core>
#include <cmath>

#include "tpsh/errors.hpp"

namespace tpsh {

// Uniform 1D grid centered on 0. Coordinate convention (used everywhere):
//   x_k = (k - n/2 + 1/2) * dx,  k = 0 .. n-1
// so coordinates satisfy x_k = -x_{n-1-k} exactly. For even n no sample sits
// at x = 0; the two central samples are at +-dx/2.
class Grid1D {
public:
  Grid1D(int n_points, double extent) : n_(n_points), extent_(extent) {
    if (n_points < 2) throw ConfigError("Grid1D: n_points must be >= 2");
    if (!(extent > 0.0) || !std::isfinite(extent))
      throw ConfigError("Grid1D: extent must be positive and finite");
  }

  int n() const { return n_; }
  double extent() const { return extent_; }
  double dx() const { return extent_ / n_; }
  double center_index() const { return 0.5 * (n_ - 1); }

  double coord(int k) const { return (k - center_index()) * dx(); }

  Eigen::VectorXd coords() const {
    Eigen::VectorXd x(n_);
    for (int k = 0; k < n_; ++k) x(k) = coord(k);
    return x;
  }

  // Nearest grid index for a physical coordinate (clamped to the grid).
  int nearest_index(double x) const {
    int k = static_cast<int>(std::lround(x / dx() + center_index()));
    if (k < 0) k = 0;
    if (k >= n_) k = n_ - 1;
    return k;
  }

  bool operator==(const Grid1D& o) const {
    return n_ == o.n_ && extent_ == o.extent_;
  }
  bool operator!=(const Grid1D& o) const { return !(*this == o); }

private:
  int n_;
  double extent_;
};

inline void require_same_grid(const Grid1D& a, const Grid1D& b,
                              const char* where) {
  if (a != b) throw GridMismatch(std::string(where) + ": grids differ");
}

}  // namespace tpsh
