#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace kkhol {

enum class Axis { kx, ky, phi_plus, phi_minus };

enum class Dependence { base_only, full };

/// Periodic chart on T^2_BZ x S^1 x S^1. Only the base is discretised; the
/// fibre angles are carried symbolically since every field we build is
/// independent of them.
class GridChart {
 public:
  GridChart(int n_kx, int n_ky, double period_kx, double period_ky);

  int n_kx() const { return n_kx_; }
  int n_ky() const { return n_ky_; }
  double period_kx() const { return period_kx_; }
  double period_ky() const { return period_ky_; }
  double hx() const { return hx_; }
  double hy() const { return hy_; }
  double spacing(Axis a) const;
  std::size_t size() const { return static_cast<std::size_t>(n_kx_) * n_ky_; }

  double kx(int i) const { return i * hx_; }
  double ky(int j) const { return j * hy_; }

  // Base-major layout: point (i, j) lives at i * n_ky + j.
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(wrap_x(i)) * n_ky_ + static_cast<std::size_t>(wrap_y(j));
  }
  int wrap_x(int i) const { return ((i % n_kx_) + n_kx_) % n_kx_; }
  int wrap_y(int j) const { return ((j % n_ky_) + n_ky_) % n_ky_; }
  int i_of(std::size_t p) const { return static_cast<int>(p / n_ky_); }
  int j_of(std::size_t p) const { return static_cast<int>(p % n_ky_); }

  /// Points on the outermost rings of the fundamental domain. Grid
  /// differences of non-periodic (fundamental-domain) data are invalid there.
  bool on_seam(std::size_t p) const;

  bool operator==(const GridChart& o) const;
  bool operator!=(const GridChart& o) const { return !(*this == o); }

  static constexpr double fibre_period() { return 6.283185307179586476925286766559; }

 private:
  int n_kx_;
  int n_ky_;
  double period_kx_;
  double period_ky_;
  double hx_;
  double hy_;
};

GridChart build_chart(int n_kx, int n_ky, double period_kx, double period_ky);

/// Samples of a base field with K real slots per point, slots innermost.
template <std::size_t K>
struct BaseField {
  std::shared_ptr<const GridChart> chart;
  std::vector<std::array<double, K>> data;
  Dependence dependence = Dependence::base_only;
  // True for data only valid on the fundamental domain (e.g. A = k_x dk_y).
  bool seam_marked = false;

  BaseField() = default;
  explicit BaseField(std::shared_ptr<const GridChart> c)
      : chart(std::move(c)), data(chart->size()) {}

  std::size_t size() const { return data.size(); }
  static constexpr std::size_t valence_slots() { return K; }
};

using ScalarField = BaseField<1>;
using OneFormField = BaseField<2>;

/// A base 2-form. Only F_{kx ky} is stored; component() expands on read so
/// antisymmetry holds exactly.
struct TwoFormField : BaseField<1> {
  using BaseField<1>::BaseField;
  double component(std::size_t p, int mu, int nu) const;
};

ScalarField make_scalar_field(std::shared_ptr<const GridChart> chart, double (*f)(double, double));

/// Centred second-order periodic difference along a base axis. Fibre axes
/// return the exact zero field: nothing here depends on the phases.
ScalarField partial_derivative(const ScalarField& f, Axis axis);

/// Same stencil applied to slot `slot` of a K-slot field.
template <std::size_t K>
ScalarField partial_derivative(const BaseField<K>& f, std::size_t slot, Axis axis) {
  ScalarField s(f.chart);
  s.seam_marked = f.seam_marked;
  for (std::size_t p = 0; p < f.size(); ++p) s.data[p][0] = f.data[p][slot];
  return partial_derivative(s, axis);
}

/// Centred difference of an arbitrary per-point quantity stored in `values`.
double centred_difference(const GridChart& chart, std::span<const double> values, std::size_t p,
                          Axis axis);

/// Max |f| over the chart, skipping seam rings when the field is seam-marked.
double max_abs(const ScalarField& f);

/// Deterministic pairwise (cascade) summation.
double pairwise_sum(std::span<const double> xs);

struct FieldDumpHeader {
  std::string name;
  int covariant = 0;
  int contravariant = 0;
  std::size_t slots = 0;
};

/// Structured-text header followed by one whitespace-delimited row per point
/// (i j slot0 slot1 ...).
void write_field_dump(std::ostream& os, const GridChart& chart, const FieldDumpHeader& header,
                      std::span<const double> values, bool seam_marked);

}  // namespace kkhol
