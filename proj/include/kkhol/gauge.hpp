#pragma once

#include "kkhol/grid.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>

namespace kkhol {

/// Value, gradient and Hessian of a base one-form A at one point.
/// grad[a][i] = d_a A_i, hess[a][b][i] = d_a d_b A_i.
struct FormJet {
  std::array<double, 2> value{};
  std::array<std::array<double, 2>, 2> grad{};
  std::array<std::array<std::array<double, 2>, 2>, 2> hess{};

  double curvature() const { return grad[0][1] - grad[1][0]; }
  FormJet scaled(double s) const;
};

struct SectorJets {
  FormJet plus;
  FormJet minus;
  bool has_hessian = false;
};

using AnalyticForm = std::function<FormJet(double kx, double ky)>;

enum class TextureSource { flat, counterflow, bloch, custom_sampled, custom_analytic };

std::string to_string(TextureSource s);

enum class Sector { plus, minus };

/// Sign convention: F_{kx ky} > 0 for a texture whose unit-vector winding
/// degree is +1 (lower band of d.sigma). Recorded in every report.
inline constexpr const char* kCurvatureSignConvention =
    "F_kxky > 0 for winding degree +1 (lower band: c1 = deg d/|d|)";

inline constexpr double kDefaultGapTol = 1e-8;
inline constexpr double kDefaultChernTol = 1e-6;

/// Plaquette phases of a Bloch band, kept so that Chern numbers come from the
/// gauge-invariant lattice sum rather than from differentiating A.
struct LatticeFlux {
  double band_phase_sum = 0.0;  // sum over plaquettes of F * hx * hy
  std::array<double, 2> weights{1.0, 0.0};
};

struct GaugeTexture {
  std::shared_ptr<const GridChart> chart;
  OneFormField a_plus;
  OneFormField a_minus;
  TwoFormField f_plus;
  TwoFormField f_minus;
  TextureSource source = TextureSource::flat;
  std::string label;
  AnalyticForm analytic_plus;
  AnalyticForm analytic_minus;
  bool fundamental_domain = false;
  bool quantized = false;  // source claims integral Chern numbers
  std::optional<LatticeFlux> lattice;

  bool analytic() const { return static_cast<bool>(analytic_plus) && static_cast<bool>(analytic_minus); }
  const OneFormField& a(Sector s) const { return s == Sector::plus ? a_plus : a_minus; }
  const TwoFormField& f(Sector s) const { return s == Sector::plus ? f_plus : f_minus; }

  /// Jets at grid point p: exact when analytic, centred differences otherwise
  /// (no Hessian on the sampled path).
  SectorJets jets_at(std::size_t p) const;
  /// Jets at an arbitrary base point; requires an analytic texture.
  SectorJets jets_at(double kx, double ky) const;
};

GaugeTexture make_flat_texture(std::shared_ptr<const GridChart> chart);

/// A+ = (k_x dk_y - k_y dk_x)/(4 pi), A- = -A+. Not periodic, so the texture
/// is marked fundamental-domain.
GaugeTexture make_counterflow_texture(std::shared_ptr<const GridChart> chart);

GaugeTexture make_analytic_texture(std::shared_ptr<const GridChart> chart, AnalyticForm plus,
                                   AnalyticForm minus, std::string label, bool fundamental_domain,
                                   bool quantized);

/// Texture given only by samples of A; F is obtained with curvature_2form.
GaugeTexture make_sampled_texture(std::shared_ptr<const GridChart> chart, OneFormField a_plus,
                                  OneFormField a_minus, std::string label);

/// Drops the analytic descriptors but keeps the sampled A and F, so
/// downstream derivatives go through grid differences.
GaugeTexture sampled_copy(const GaugeTexture& tex);

/// Random smooth texture: a low-order Fourier series per component plus
/// `chern_plus`/`chern_minus` units of constant flux. Used by property suites
/// and by the `fourier` scenario texture.
struct FourierTextureSpec {
  std::uint64_t seed = 1;
  int modes = 2;
  double amplitude = 0.1;
  int chern_plus = 0;
  int chern_minus = 0;
};
GaugeTexture make_fourier_texture(std::shared_ptr<const GridChart> chart, const FourierTextureSpec& spec);

/// Adds d(chi) to both sectors for a smooth periodic chi sampled on the grid.
/// The result is a sampled texture with the original curvature samples.
GaugeTexture add_exact_form(const GaugeTexture& tex, const ScalarField& chi);

enum class Band { lower, upper };

struct BlochTexture {
  std::function<Eigen::Vector3d(double, double)> d_vector;
  Band band = Band::lower;
  std::map<std::string, double> parameters;
  std::string label;
};

/// d(k) = (sin kx, sin ky, m + cos kx + cos ky). A two-band stand-in for the
/// spin-orbit-coupled dressed band; labelled as such in reports.
BlochTexture qwz_texture(double mass, Band band);

/// Berry connection of the selected band from normalised link variables,
/// curvature from plaquette phases, assigned to the sectors with weights.
GaugeTexture bloch_berry_texture(const BlochTexture& tex, std::shared_ptr<const GridChart> chart,
                                 std::array<double, 2> weights, double gap_tol = kDefaultGapTol);

TwoFormField curvature_2form(const OneFormField& a);

struct ChernResult {
  double raw_flux = 0.0;
  long integer = 0;
  double deviation = 0.0;  // |flux/2pi - integer|
};

/// Raw flux by pairwise summation of F hx hy, rounded to the nearest integer.
/// Throws QuantizationError when `claim_quantized` and the deviation exceeds chern_tol.
ChernResult chern_number(const TwoFormField& f, bool claim_quantized, double chern_tol = kDefaultChernTol);

/// Sector Chern number; Bloch sources use the lattice plaquette sum.
ChernResult chern_number(const GaugeTexture& tex, Sector sector, double chern_tol = kDefaultChernTol);

}  // namespace kkhol
