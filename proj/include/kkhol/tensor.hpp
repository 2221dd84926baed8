#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstddef>

namespace kkhol {

// Coordinate slots on M = T^2 x S^1 x S^1, in storage order.
enum Slot : int { kKx = 0, kKy = 1, kPhiPlus = 2, kPhiMinus = 3 };

inline constexpr int kDim = 4;
inline constexpr int kBaseDim = 2;

inline constexpr bool is_base_slot(int s) { return s < kBaseDim; }
inline constexpr bool is_fibre_slot(int s) { return s >= kBaseDim; }

using Mat4 = Eigen::Matrix4d;
using Vec4 = Eigen::Vector4d;

/// Rank-3 array over the 4 coordinate slots. For connections the layout is
/// (mu, nu, rho) -> Gamma^mu_{nu rho}, i.e. nabla_{d_nu} d_rho = Gamma^mu_{nu rho} d_mu.
struct Tensor3 {
  std::array<double, 64> v{};

  double& operator()(int a, int b, int c) { return v[(a * 4 + b) * 4 + c]; }
  double operator()(int a, int b, int c) const { return v[(a * 4 + b) * 4 + c]; }

  Tensor3& operator+=(const Tensor3& o) {
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += o.v[i];
    return *this;
  }
  double max_abs() const {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }
};

/// Rank-4 array; for curvature (mu, nu, rho, sigma) -> R^mu_{nu rho sigma},
/// R(d_rho, d_sigma) d_nu = R^mu_{nu rho sigma} d_mu.
struct Tensor4 {
  std::array<double, 256> v{};

  double& operator()(int a, int b, int c, int d) { return v[((a * 4 + b) * 4 + c) * 4 + d]; }
  double operator()(int a, int b, int c, int d) const { return v[((a * 4 + b) * 4 + c) * 4 + d]; }

  double max_abs() const {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }
};

}  // namespace kkhol
