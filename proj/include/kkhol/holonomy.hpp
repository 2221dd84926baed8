#pragma once

#include "kkhol/kkgeom.hpp"
#include "kkhol/tensor.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace kkhol {

enum class Frame { coordinate, adapted };

std::string to_string(Frame f);

struct CurvatureField {
  std::shared_ptr<const GridChart> chart;
  std::vector<Tensor4> r;  // R^a_{b c d}, in the field's frame
  Frame frame = Frame::coordinate;
  std::vector<Mat4> frame_vectors;  // adapted frame: column a is e_a in coordinates
  bool seam_marked = false;

  std::size_t size() const { return r.size(); }
};

/// R^m_{n r s} = d_r G^m_{s n} - d_s G^m_{r n} + G^m_{r l} G^l_{s n} - G^m_{s l} G^l_{r n}.
/// Only r < s is computed; the other half is filled by exact negation.
Tensor4 riemann_at(const ConnectionJet& jet);

/// Orthonormal frame (X1, X2, d_phi+, d_phi-) adapted to the fibration:
/// vertical vectors first, horizontal ones their g-orthogonal complement.
Mat4 adapted_frame(const Mat4& g);

/// Components of a (1,3) tensor in the frame whose columns are E.
Tensor4 change_frame(const Tensor4& r, const Mat4& e);

/// Lowered first index: R_{a b c d} = g_{a m} R^m_{b c d}.
Tensor4 lower_first(const Tensor4& r, const Mat4& g);

CurvatureField riemann_curvature(const ConnectionField& conn, const MetricField& metric, Frame frame);

/// Re-express an adapted-frame field in the rotated frame e' = e Q (Q orthogonal).
CurvatureField rotate_frame(const CurvatureField& curv, const Mat4& q);

struct SpanResult {
  int all_points_dim = 0;
  int per_point_max = 0;
  std::array<double, 4> singular_values{};  // of the stacked set, descending
  double rank_tol = 1e-8;
  std::size_t points_used = 0;
};

inline constexpr double kDefaultRankTol = 1e-8;
inline constexpr double kRankAbsFloor = 1e-12;

/// Numerical rank of a set of vectors: singular values above
/// max(rel_tol * sigma_max, kRankAbsFloor).
int numerical_rank(const Eigen::MatrixXd& rows, double rel_tol, Eigen::VectorXd* sv = nullptr);

/// Span of the vertical-by-horizontal blocks of the curvature operators
/// R(e_c, e_d) for all six frame pairs at the given points. Requires an
/// adapted-frame field; an empty sample throws InvalidArgument.
SpanResult offdiag_span_dim(const CurvatureField& curv, const std::vector<std::size_t>& points,
                            double rank_tol = kDefaultRankTol);

std::vector<std::size_t> all_points(const GridChart& chart);

struct LoopSegment {
  bool arc = false;
  std::array<double, 2> p0{}, p1{};  // line endpoints
  std::array<double, 2> center{};
  double radius = 0.0, theta0 = 0.0, theta1 = 0.0;

  std::array<double, 2> position(double t) const;  // t in [0, 1]
  std::array<double, 2> velocity(double t) const;  // d/dt
  double length() const;
};

struct LoopSpec {
  std::string label;
  std::vector<LoopSegment> segments;

  double perimeter() const;

  static LoopSpec polyline(std::vector<std::array<double, 2>> points, const GridChart& chart);
  static LoopSpec circle(double cx, double cy, double r);
  static LoopSpec gamma1(const GridChart& chart, double ky0 = 0.0);
  static LoopSpec gamma2(const GridChart& chart, double kx0 = 0.0);
  /// Counterclockwise boundary of [x0, x1] x [y0, y1].
  static LoopSpec rectangle(double x0, double y0, double x1, double y1);
  /// "gamma1[:y0]", "gamma2[:x0]", "circle:cx,cy,r", "rect:x0,y0,x1,y1" or
  /// "poly:x,y;x,y;...". Throws InvalidArgument for unknown or open loops.
  static LoopSpec parse(const std::string& text, const GridChart& chart);
};

struct TransportResult {
  Mat4 u = Mat4::Identity();
  Mat4 g_start = Mat4::Identity();
  double orthogonality = 0.0;  // max |U^T G(end) U - G(start)|
  double deviation = 0.0;      // max |U - I|
  int steps = 0;
};

inline constexpr int kTransportSteps = 1024;

/// Metric at an arbitrary base point: evaluator or periodic bilinear interpolation.
Mat4 metric_at(const MetricField& metric, double kx, double ky);

/// dV/dt + Gamma(gamma') V = 0 by classical RK4 with step perimeter/steps.
TransportResult parallel_transport_loop(const ConnectionField& conn, const MetricField& metric,
                                        const LoopSpec& loop, int steps = kTransportSteps);

/// phase in (-pi, pi]
double wrap_phase(double x);

struct BerryPhaseVector {
  // (Phi+(loop1), Phi-(loop1), Phi+(loop2), Phi-(loop2))
  std::array<double, 4> raw{};
  std::array<double, 4> wrapped{};
  std::array<std::string, 2> loops;
};

/// Line integral of A^(sector) by composite Gauss-Legendre quadrature (exact
/// jets for analytic textures, bilinear interpolation of samples otherwise).
double loop_integral(const GaugeTexture& tex, Sector sector, const LoopSpec& loop, int panels_per_segment = 32);

BerryPhaseVector berry_phase_vector(const GaugeTexture& tex, const LoopSpec& loop1, const LoopSpec& loop2);

/// Flux of F through the cells [i0, i1) x [j0, j1), each cell weighted by the
/// mean of its four corner samples.
double enclosed_flux(const GaugeTexture& tex, Sector sector, int i0, int j0, int i1, int j1);

}  // namespace kkhol
