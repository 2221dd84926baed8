#pragma once

// Shared fixtures and independent reference computations for the unit and
// acceptance suites. The references here deliberately avoid the library's
// own assembly code: metrics are rebuilt from the raw one-form values and
// derivatives are taken by high-order finite differences.

#include "kkhol/errors.hpp"
#include "kkhol/pipeline.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>

namespace kkhol::testing {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline std::shared_ptr<const GridChart> torus(int n) { return std::make_shared<const GridChart>(n, n, kTwoPi, kTwoPi); }

inline std::shared_ptr<const GaugeTexture> share(GaugeTexture t) {
  return std::make_shared<const GaugeTexture>(std::move(t));
}

using MetricFn = std::function<Mat4(double, double)>;

/// g = I + sum_s Theta^s (x) Theta^s written out entry by entry.
inline Mat4 reference_metric(const std::array<double, 2>& ap, const std::array<double, 2>& am, double eps) {
  Mat4 g = Mat4::Identity();
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) g(i, j) += eps * eps * (ap[i] * ap[j] + am[i] * am[j]);
    g(i, 2) = g(2, i) = eps * ap[i];
    g(i, 3) = g(3, i) = eps * am[i];
  }
  return g;
}

inline MetricFn reference_metric_fn(const GaugeTexture& tex, double eps) {
  return [&tex, eps](double x, double y) {
    const SectorJets j = tex.jets_at(x, y);
    return reference_metric(j.plus.value, j.minus.value, eps);
  };
}

/// Fourth-order centred derivative of a matrix-valued function along axis `a`.
template <class F>
auto d4(const F& f, double x, double y, int a, double h = 1e-3) {
  auto at = [&](double t) { return a == 0 ? f(x + t, y) : f(x, y + t); };
  return ((at(-2 * h) - at(2 * h)) + 8.0 * (at(h) - at(-h))) / (12.0 * h);
}

/// Gamma^m_{n r} = 1/2 g^{m s} (d_n g_{s r} + d_r g_{s n} - d_s g_{n r}), by finite differences.
inline Tensor3 reference_christoffel(const MetricFn& g, double x, double y) {
  const Mat4 gi = g(x, y).inverse();
  const std::array<Mat4, 4> dg{d4(g, x, y, 0), d4(g, x, y, 1), Mat4::Zero(), Mat4::Zero()};
  Tensor3 out;
  for (int m = 0; m < 4; ++m)
    for (int n = 0; n < 4; ++n)
      for (int r = 0; r < 4; ++r) {
        double v = 0.0;
        for (int s = 0; s < 4; ++s) v += gi(m, s) * (dg[n](s, r) + dg[r](s, n) - dg[s](n, r));
        out(m, n, r) = 0.5 * v;
      }
  return out;
}

/// R^m_{n r s} from a Christoffel provider, derivatives again by finite differences.
inline Tensor4 reference_riemann(const std::function<Tensor3(double, double)>& gamma, double x, double y) {
  const Tensor3 G = gamma(x, y);
  std::array<Tensor3, 4> dG{};
  const double h = 1e-3;
  for (int a = 0; a < 2; ++a) {
    auto at = [&](double t) { return a == 0 ? gamma(x + t, y) : gamma(x, y + t); };
    const Tensor3 m2 = at(-2 * h), m1 = at(-h), p1 = at(h), p2 = at(2 * h);
    for (std::size_t i = 0; i < 64; ++i) dG[a].v[i] = ((m2.v[i] - p2.v[i]) + 8.0 * (p1.v[i] - m1.v[i])) / (12.0 * h);
  }
  Tensor4 R;
  for (int m = 0; m < 4; ++m)
    for (int n = 0; n < 4; ++n)
      for (int r = 0; r < 4; ++r)
        for (int s = 0; s < 4; ++s) {
          double v = dG[r](m, s, n) - dG[s](m, r, n);
          for (int l = 0; l < 4; ++l) v += G(m, r, l) * G(l, s, n) - G(m, s, l) * G(l, r, n);
          R(m, n, r, s) = v;
        }
  return R;
}

inline double max_diff(const Tensor3& a, const Tensor3& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.v.size(); ++i) m = std::max(m, std::abs(a.v[i] - b.v[i]));
  return m;
}

inline double max_diff(const Tensor4& a, const Tensor4& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.v.size(); ++i) m = std::max(m, std::abs(a.v[i] - b.v[i]));
  return m;
}

/// Signed solid angle of the spherical triangle (a, b, c), Van Oosterom-Strackee.
inline double solid_angle(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c) {
  const double num = a.dot(b.cross(c));
  const double den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
  return 2.0 * std::atan2(num, den);
}

/// Degree of k -> d(k)/|d(k)| over the torus, summed from solid angles of
/// the two triangles of every grid cell. Independent of any Berry-phase code.
inline long winding_degree(const std::function<Eigen::Vector3d(double, double)>& d, int n) {
  const double h = kTwoPi / n;
  double total = 0.0;
  auto u = [&](int i, int j) { return d(i * h, j * h).normalized(); };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Eigen::Vector3d a = u(i, j), b = u(i + 1, j), c = u(i + 1, j + 1), e = u(i, j + 1);
      total += solid_angle(a, b, c) + solid_angle(a, c, e);
    }
  return std::lround(total / (4.0 * std::numbers::pi));
}

inline Eigen::Vector3d qwz_d(double m, double x, double y) {
  return {std::sin(x), std::sin(y), m + std::cos(x) + std::cos(y)};
}

/// An analytic texture A+ = (0, sin k_x), A- = 0, with exact jets.
inline GaugeTexture sine_texture(std::shared_ptr<const GridChart> chart) {
  auto plus = [](double x, double) {
    FormJet j;
    j.value = {0.0, std::sin(x)};
    j.grad[0][1] = std::cos(x);
    j.hess[0][0][1] = -std::sin(x);
    return j;
  };
  auto minus = [](double, double) { return FormJet{}; };
  return make_analytic_texture(std::move(chart), plus, minus, "sine", false, false);
}

/// Constant (closed, F = 0) one-forms in both sectors.
inline GaugeTexture constant_texture(std::shared_ptr<const GridChart> chart, std::array<double, 2> ap,
                                     std::array<double, 2> am) {
  auto plus = [ap](double, double) {
    FormJet j;
    j.value = ap;
    return j;
  };
  auto minus = [am](double, double) {
    FormJet j;
    j.value = am;
    return j;
  };
  return make_analytic_texture(std::move(chart), plus, minus, "constant", false, false);
}

inline GaugeTexture random_texture(std::shared_ptr<const GridChart> chart, std::uint64_t seed, int cp = 0,
                                   int cm = 0, double amplitude = 0.3) {
  return make_fourier_texture(std::move(chart), FourierTextureSpec{seed, 2, amplitude, cp, cm});
}

/// Convergence factor err(h) / err(h/2).
inline double factor(double coarse, double fine) { return coarse / fine; }

}  // namespace kkhol::testing
