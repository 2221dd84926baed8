#pragma once

#include "kkhol/kkgeom.hpp"

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace kkhol {

/// pulled_back: T = F+ ^ A+ + F- ^ A- with A read as base one-forms.
/// theta:       T = F+ ^ Theta+ + F- ^ Theta-, Theta = d phi + eps A.
enum class TorsionVariant { pulled_back, theta };

std::string to_string(TorsionVariant v);
TorsionVariant parse_torsion_variant(const std::string& s);

/// Independent components of a 3-form in four dimensions, in the order
/// T_{012}, T_{013}, T_{023}, T_{123}.
using ThreeForm = std::array<double, 4>;

/// Expand T_{abc} from the independent components (zero on repeated indices).
double three_form_component(const ThreeForm& t, int a, int b, int c);

struct TorsionJet {
  ThreeForm t{};
  std::array<ThreeForm, 2> dt{};
};

struct TorsionField {
  std::shared_ptr<const GridChart> chart;
  std::shared_ptr<const GaugeTexture> texture;
  TorsionVariant variant = TorsionVariant::theta;
  double epsilon = 1.0;
  std::vector<ThreeForm> t;
  std::vector<std::array<ThreeForm, 2>> dt;
  bool seam_marked = false;
  std::function<TorsionJet(double, double)> evaluator;

  std::size_t size() const { return t.size(); }
  double component(std::size_t p, int a, int b, int c) const { return three_form_component(t[p], a, b, c); }
};

/// Wedge of a base 2-form F (only F_{01}) with a one-form on M.
ThreeForm wedge_two_one(double f01, const Vec4& a);

TorsionJet torsion_jet(const SectorJets& jets, TorsionVariant variant, double epsilon);

/// The torsion 3-form of a texture. epsilon enters only through Theta and is
/// irrelevant for the pulled-back variant.
TorsionField torsion_form(std::shared_ptr<const GaugeTexture> tex, TorsionVariant variant, double epsilon = 1.0);
TorsionField torsion_form(const GaugeTexture& tex, TorsionVariant variant, double epsilon = 1.0);

/// Gamma^c = Gamma^LC + 1/2 g^{mu s} T_{nu rho s}. InvalidArgument on chart mismatch.
ConnectionField connection_with_torsion(const ConnectionField& lc, const TorsionField& t,
                                        const MetricField& metric);

/// max |g_{mu l} (Gamma^l_{nu rho} - Gamma^l_{rho nu}) / 2 - T_{nu rho mu} / 2|.
double torsion_recovery_residual(const ConnectionField& conn, const MetricField& metric,
                                 const TorsionField& reference);

/// Norms at or below this floor count as zero in positivity checks.
inline constexpr double kNablaTPositiveFloor = 1e-12;

/// Max-norm of nabla^LC T over the grid; seam rings skipped for seam-marked data.
double nabla_lc_torsion_norm(const TorsionField& t, const ConnectionField& lc);

}  // namespace kkhol
