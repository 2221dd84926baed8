#pragma once

#include "kkhol/gauge.hpp"
#include "kkhol/tensor.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

namespace kkhol {

/// Metric with its first and (optionally) second base derivatives at a point.
/// d2g is ordered (xx, xy, yy).
struct MetricJet {
  Mat4 g = Mat4::Identity();
  std::array<Mat4, 2> dg{Mat4::Zero(), Mat4::Zero()};
  std::array<Mat4, 3> d2g{Mat4::Zero(), Mat4::Zero(), Mat4::Zero()};
  bool has_hessian = false;
};

using MetricEvaluator = std::function<MetricJet(double kx, double ky)>;

struct MetricField {
  std::shared_ptr<const GridChart> chart;
  std::shared_ptr<const GaugeTexture> texture;
  double epsilon = 0.0;
  std::vector<Mat4> g;
  std::vector<Mat4> g_inv;
  std::vector<std::array<Mat4, 2>> dg;
  std::vector<std::array<Mat4, 3>> d2g;  // empty on the sampled path
  bool has_hessian = false;
  bool seam_marked = false;
  bool perturbed = false;
  MetricEvaluator evaluator;  // set for analytic textures

  std::size_t size() const { return g.size(); }
  bool analytic() const { return static_cast<bool>(evaluator); }
};

/// Blockwise metric (and derivatives) from sector jets at deformation epsilon.
MetricJet metric_jet(const SectorJets& jets, double epsilon);

/// g = g_BZ + sum_s Theta^s (x) Theta^s with Theta^s = d phi_s + epsilon A^s, expanded
/// term by term. Must agree bit-for-bit with the blockwise assembly.
Mat4 metric_by_expansion(const std::array<double, 2>& a_plus, const std::array<double, 2>& a_minus,
                         double epsilon);

/// Horizontal-lift one-form rows Theta^+ and Theta^-: (eps A_x, eps A_y, delta_{s+}, delta_{s-}).
std::array<Vec4, 2> horizontal_lift_forms(const std::array<double, 2>& a_plus,
                                          const std::array<double, 2>& a_minus, double epsilon);

/// Throws InvalidArgument unless 0 <= epsilon <= 1. Analytic textures give
/// exact derivatives; sampled ones use centred differences of the assembled g.
MetricField assemble_metric(std::shared_ptr<const GaugeTexture> texture, double epsilon);
MetricField assemble_metric(const GaugeTexture& texture, double epsilon);

enum class ConnectionKind { levi_civita, with_torsion };

std::string to_string(ConnectionKind k);

/// Gamma and its base derivatives at one point.
struct ConnectionJet {
  Tensor3 gamma;
  std::array<Tensor3, 2> dgamma;
};

using ConnectionEvaluator = std::function<ConnectionJet(double kx, double ky)>;

struct ConnectionField {
  std::shared_ptr<const GridChart> chart;
  std::vector<Tensor3> gamma;
  std::vector<std::array<Tensor3, 2>> dgamma;
  ConnectionKind kind = ConnectionKind::levi_civita;
  bool seam_marked = false;
  ConnectionEvaluator evaluator;  // analytic off-grid evaluation, when available

  std::size_t size() const { return gamma.size(); }
  /// Evaluator when present, else periodic bilinear interpolation of the samples.
  ConnectionJet at(double kx, double ky) const;
};

/// Levi-Civita Christoffels of a metric jet, with exact derivatives when the
/// jet carries second derivatives.
ConnectionJet christoffel_jet(const MetricJet& jet);

/// Levi-Civita connection. Derivatives of Gamma come from d2g when the
/// metric is analytic, otherwise from centred differences of the Gamma samples.
/// Throws FactorizationError (with grid location) if g is not positive definite.
ConnectionField christoffel(const MetricField& metric);

struct SubmersionReport {
  double fibre_block = 0.0;            // max |g_{phi phi} - I|
  double horizontal_vertical = 0.0;    // max |g(X_i, d_phi)|
  double horizontal_orthonormal = 0.0; // max |g(X_i, X_j) - delta_ij|
  double max_violation() const;
};

SubmersionReport check_submersion(const MetricField& metric);

/// max |d_s g_mn - Gamma^r_{s m} g_rn - Gamma^r_{s n} g_mr| over points and indices
/// (seam rings skipped for seam-marked data).
double metric_compatibility_residual(const ConnectionField& conn, const MetricField& metric);

/// Smooth multiplicative perturbation g_mn (1 + amplitude p_mn(k)) with p a
/// random symmetric trigonometric field bounded by 1, derivatives exact.
MetricField perturb_metric(const MetricField& metric, std::uint64_t seed, double amplitude = 0.01);

/// max |g g_inv - I| over the grid.
double inverse_residual(const MetricField& metric);

}  // namespace kkhol
