#include "kkhol/holonomy.hpp"

#include "kkhol/errors.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <numbers>
#include <sstream>

namespace kkhol {

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> split_numbers(const std::string& text, char sep) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InvalidArgument("loop spec: cannot parse number '" + item + "'");
    }
  }
  return out;
}

// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
struct GaussLegendre {
  std::vector<double> x, w;
  explicit GaussLegendre(int n) : x(n), w(n) {
    for (int i = 0; i < n; ++i) {
      double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = z;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (z * p1 - p0) / (z * z - 1.0);
        const double dz = p1 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      x[i] = z;
      w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
  }
};

const GaussLegendre& gauss8() {
  static const GaussLegendre g(8);
  return g;
}

std::array<double, 2> sample_one_form(const GaugeTexture& tex, Sector s, double x, double y) {
  if (tex.analytic()) {
    const SectorJets j = tex.jets_at(x, y);
    return s == Sector::plus ? j.plus.value : j.minus.value;
  }
  const GridChart& c = *tex.chart;
  const OneFormField& a = tex.a(s);
  const double u = x / c.hx();
  const double v = y / c.hy();
  const int i0 = static_cast<int>(std::floor(u));
  const int j0 = static_cast<int>(std::floor(v));
  const double fu = u - i0;
  const double fv = v - j0;
  std::array<double, 2> out{};
  const std::size_t p[4] = {c.index(i0, j0), c.index(i0 + 1, j0), c.index(i0, j0 + 1), c.index(i0 + 1, j0 + 1)};
  const double w[4] = {(1 - fu) * (1 - fv), fu * (1 - fv), (1 - fu) * fv, fu * fv};
  for (int q = 0; q < 4; ++q)
    for (int k = 0; k < 2; ++k) out[k] += w[q] * a.data[p[q]][k];
  return out;
}

}  // namespace

std::string to_string(Frame f) { return f == Frame::coordinate ? "coordinate" : "adapted"; }

Tensor4 riemann_at(const ConnectionJet& jet) {
  const Tensor3& G = jet.gamma;
  auto dG = [&](int axis, int m, int a, int b) { return axis < 2 ? jet.dgamma[axis](m, a, b) : 0.0; };
  Tensor4 R;
  for (int m = 0; m < kDim; ++m)
    for (int n = 0; n < kDim; ++n)
      for (int r = 0; r < kDim; ++r)
        for (int s = r + 1; s < kDim; ++s) {
          double v = dG(r, m, s, n) - dG(s, m, r, n);
          for (int l = 0; l < kDim; ++l) v += G(m, r, l) * G(l, s, n) - G(m, s, l) * G(l, r, n);
          R(m, n, r, s) = v;
          R(m, n, s, r) = -v;
        }
  return R;
}

Mat4 adapted_frame(const Mat4& g) {
  auto ip = [&](const Vec4& a, const Vec4& b) { return a.dot(g * b); };
  Mat4 e = Mat4::Zero();
  Vec4 v2 = Vec4::Unit(kPhiPlus);
  v2 /= std::sqrt(ip(v2, v2));
  Vec4 v3 = Vec4::Unit(kPhiMinus);
  v3 -= ip(v3, v2) * v2;
  v3 /= std::sqrt(ip(v3, v3));
  Vec4 h[2];
  for (int i = 0; i < 2; ++i) {
    h[i] = Vec4::Unit(i) - ip(Vec4::Unit(i), v2) * v2 - ip(Vec4::Unit(i), v3) * v3;
  }
  h[0] /= std::sqrt(ip(h[0], h[0]));
  h[1] -= ip(h[1], h[0]) * h[0];
  h[1] /= std::sqrt(ip(h[1], h[1]));
  e.col(0) = h[0];
  e.col(1) = h[1];
  e.col(2) = v2;
  e.col(3) = v3;
  return e;
}

Tensor4 change_frame(const Tensor4& r, const Mat4& e) {
  const Mat4 einv = e.inverse();
  Tensor4 a, b;
  // Contract one slot at a time.
  for (int m = 0; m < 4; ++m)
    for (int n = 0; n < 4; ++n)
      for (int x = 0; x < 4; ++x)
        for (int d = 0; d < 4; ++d) {
          double v = 0.0;
          for (int s = 0; s < 4; ++s) v += r(m, n, x, s) * e(s, d);
          a(m, n, x, d) = v;
        }
  for (int m = 0; m < 4; ++m)
    for (int n = 0; n < 4; ++n)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) {
          double v = 0.0;
          for (int x = 0; x < 4; ++x) v += a(m, n, x, d) * e(x, c);
          b(m, n, c, d) = v;
        }
  for (int m = 0; m < 4; ++m)
    for (int bb = 0; bb < 4; ++bb)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) {
          double v = 0.0;
          for (int n = 0; n < 4; ++n) v += b(m, n, c, d) * e(n, bb);
          a(m, bb, c, d) = v;
        }
  for (int aa = 0; aa < 4; ++aa)
    for (int bb = 0; bb < 4; ++bb)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) {
          double v = 0.0;
          for (int m = 0; m < 4; ++m) v += einv(aa, m) * a(m, bb, c, d);
          b(aa, bb, c, d) = v;
        }
  // Rounding in the contractions would otherwise break the exact antisymmetry in (c, d).
  for (int aa = 0; aa < 4; ++aa)
    for (int bb = 0; bb < 4; ++bb)
      for (int c = 0; c < 4; ++c) {
        b(aa, bb, c, c) = 0.0;
        for (int d = c + 1; d < 4; ++d) b(aa, bb, d, c) = -b(aa, bb, c, d);
      }
  return b;
}

Tensor4 lower_first(const Tensor4& r, const Mat4& g) {
  Tensor4 out;
  for (int a = 0; a < 4; ++a)
    for (int n = 0; n < 4; ++n)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) {
          double v = 0.0;
          for (int m = 0; m < 4; ++m) v += g(a, m) * r(m, n, c, d);
          out(a, n, c, d) = v;
        }
  return out;
}

CurvatureField riemann_curvature(const ConnectionField& conn, const MetricField& metric, Frame frame) {
  if (*conn.chart != *metric.chart) throw InvalidArgument("riemann_curvature: chart mismatch");
  CurvatureField out;
  out.chart = conn.chart;
  out.frame = frame;
  out.seam_marked = conn.seam_marked;
  out.r.resize(conn.size());
  if (frame == Frame::adapted) out.frame_vectors.resize(conn.size());
  for (std::size_t p = 0; p < conn.size(); ++p) {
    Tensor4 r = riemann_at(ConnectionJet{conn.gamma[p], conn.dgamma[p]});
    if (frame == Frame::adapted) {
      const Mat4 e = adapted_frame(metric.g[p]);
      out.frame_vectors[p] = e;
      r = change_frame(r, e);
    }
    out.r[p] = r;
  }
  return out;
}

CurvatureField rotate_frame(const CurvatureField& curv, const Mat4& q) {
  if (curv.frame != Frame::adapted) throw InvalidArgument("rotate_frame: field is not in the adapted frame");
  CurvatureField out = curv;
  for (std::size_t p = 0; p < curv.size(); ++p) {
    out.r[p] = change_frame(curv.r[p], q);
    out.frame_vectors[p] = curv.frame_vectors[p] * q;
  }
  return out;
}

int numerical_rank(const Eigen::MatrixXd& rows, double rel_tol, Eigen::VectorXd* sv) {
  if (rows.rows() == 0 || rows.cols() == 0) {
    if (sv) sv->resize(0);
    return 0;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(rows);
  const Eigen::VectorXd s = svd.singularValues();
  if (sv) *sv = s;
  const double threshold = std::max(rel_tol * s[0], kRankAbsFloor);
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] > threshold) ++rank;
  return rank;
}

std::vector<std::size_t> all_points(const GridChart& chart) {
  std::vector<std::size_t> pts(chart.size());
  for (std::size_t p = 0; p < pts.size(); ++p) pts[p] = p;
  return pts;
}

SpanResult offdiag_span_dim(const CurvatureField& curv, const std::vector<std::size_t>& points, double rank_tol) {
  if (curv.frame != Frame::adapted) throw InvalidArgument("offdiag_span_dim needs an adapted-frame curvature");
  if (points.empty()) throw InvalidArgument("offdiag_span_dim: empty point sample");
  SpanResult res;
  res.rank_tol = rank_tol;
  res.points_used = points.size();
  Eigen::MatrixXd all(static_cast<Eigen::Index>(points.size() * 6), 4);
  Eigen::Matrix<double, 6, 4> local;
  Eigen::Index row = 0;
  for (std::size_t p : points) {
    if (p >= curv.size()) throw InvalidArgument("offdiag_span_dim: point index outside the chart");
    const Tensor4& r = curv.r[p];
    int k = 0;
    for (int c = 0; c < 4; ++c)
      for (int d = c + 1; d < 4; ++d, ++k) {
        local(k, 0) = r(2, 0, c, d);
        local(k, 1) = r(2, 1, c, d);
        local(k, 2) = r(3, 0, c, d);
        local(k, 3) = r(3, 1, c, d);
      }
    all.middleRows(row, 6) = local;
    row += 6;
    res.per_point_max = std::max(res.per_point_max, numerical_rank(local, rank_tol));
  }
  Eigen::VectorXd sv;
  res.all_points_dim = numerical_rank(all, rank_tol, &sv);
  for (Eigen::Index i = 0; i < 4 && i < sv.size(); ++i) res.singular_values[i] = sv[i];
  return res;
}

std::array<double, 2> LoopSegment::position(double t) const {
  if (!arc) return {p0[0] + t * (p1[0] - p0[0]), p0[1] + t * (p1[1] - p0[1])};
  const double th = theta0 + t * (theta1 - theta0);
  return {center[0] + radius * std::cos(th), center[1] + radius * std::sin(th)};
}

std::array<double, 2> LoopSegment::velocity(double t) const {
  if (!arc) return {p1[0] - p0[0], p1[1] - p0[1]};
  const double th = theta0 + t * (theta1 - theta0);
  const double w = theta1 - theta0;
  return {-radius * w * std::sin(th), radius * w * std::cos(th)};
}

double LoopSegment::length() const {
  if (arc) return std::abs(radius * (theta1 - theta0));
  return std::hypot(p1[0] - p0[0], p1[1] - p0[1]);
}

double LoopSpec::perimeter() const {
  double s = 0.0;
  for (const auto& seg : segments) s += seg.length();
  return s;
}

LoopSpec LoopSpec::polyline(std::vector<std::array<double, 2>> pts, const GridChart& chart) {
  if (pts.size() < 2) throw InvalidArgument("loop needs at least two points");
  const double periods[2] = {chart.period_kx(), chart.period_ky()};
  for (int k = 0; k < 2; ++k) {
    const double turns = (pts.back()[k] - pts.front()[k]) / periods[k];
    if (std::abs(turns - std::round(turns)) > 1e-9) {
      throw InvalidArgument("loop is not closed: last point differs from the first modulo the periods");
    }
  }
  LoopSpec loop;
  std::ostringstream label;
  label << "poly";
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    LoopSegment seg;
    seg.p0 = pts[i];
    seg.p1 = pts[i + 1];
    if (seg.length() > 0.0) loop.segments.push_back(seg);
  }
  for (const auto& p : pts) label << (p == pts.front() ? ":" : ";") << p[0] << "," << p[1];
  loop.label = label.str();
  if (loop.segments.empty()) throw InvalidArgument("loop has zero length");
  return loop;
}

LoopSpec LoopSpec::circle(double cx, double cy, double r) {
  if (!(r > 0.0) || !std::isfinite(r)) throw InvalidArgument("circle loop needs a positive radius");
  LoopSpec loop;
  LoopSegment seg;
  seg.arc = true;
  seg.center = {cx, cy};
  seg.radius = r;
  seg.theta0 = 0.0;
  seg.theta1 = 2.0 * kPi;
  loop.segments.push_back(seg);
  std::ostringstream label;
  label << "circle:" << cx << "," << cy << "," << r;
  loop.label = label.str();
  return loop;
}

LoopSpec LoopSpec::gamma1(const GridChart& chart, double ky0) {
  LoopSpec loop = polyline({{0.0, ky0}, {chart.period_kx(), ky0}}, chart);
  loop.label = "gamma1:" + std::to_string(ky0);
  return loop;
}

LoopSpec LoopSpec::gamma2(const GridChart& chart, double kx0) {
  LoopSpec loop = polyline({{kx0, 0.0}, {kx0, chart.period_ky()}}, chart);
  loop.label = "gamma2:" + std::to_string(kx0);
  return loop;
}

LoopSpec LoopSpec::rectangle(double x0, double y0, double x1, double y1) {
  if (!(x1 > x0) || !(y1 > y0)) throw InvalidArgument("rectangle loop needs x1 > x0 and y1 > y0");
  LoopSpec loop;
  const std::array<double, 2> c[5] = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}, {x0, y0}};
  for (int i = 0; i < 4; ++i) {
    LoopSegment seg;
    seg.p0 = c[i];
    seg.p1 = c[i + 1];
    loop.segments.push_back(seg);
  }
  std::ostringstream label;
  label << "rect:" << x0 << "," << y0 << "," << x1 << "," << y1;
  loop.label = label.str();
  return loop;
}

LoopSpec LoopSpec::parse(const std::string& text, const GridChart& chart) {
  auto after = [&](std::size_t n) { return text.size() > n ? text.substr(n) : std::string(); };
  if (text.rfind("gamma1", 0) == 0 || text.rfind("gamma2", 0) == 0) {
    double offset = 0.0;
    if (text.size() > 6) {
      if (text[6] != ':') throw InvalidArgument("unknown loop '" + text + "'");
      const auto v = split_numbers(after(7), ',');
      if (v.size() != 1) throw InvalidArgument("loop '" + text + "': expected one offset");
      offset = v[0];
    }
    return text[5] == '1' ? gamma1(chart, offset) : gamma2(chart, offset);
  }
  if (text.rfind("circle:", 0) == 0) {
    const auto v = split_numbers(after(7), ',');
    if (v.size() != 3) throw InvalidArgument("circle loop expects cx,cy,r");
    return circle(v[0], v[1], v[2]);
  }
  if (text.rfind("rect:", 0) == 0) {
    const auto v = split_numbers(after(5), ',');
    if (v.size() != 4) throw InvalidArgument("rect loop expects x0,y0,x1,y1");
    return rectangle(v[0], v[1], v[2], v[3]);
  }
  if (text.rfind("poly:", 0) == 0) {
    std::vector<std::array<double, 2>> pts;
    std::stringstream ss(after(5));
    std::string item;
    while (std::getline(ss, item, ';')) {
      const auto v = split_numbers(item, ',');
      if (v.size() != 2) throw InvalidArgument("poly loop points must be x,y pairs");
      pts.push_back({v[0], v[1]});
    }
    return polyline(std::move(pts), chart);
  }
  throw InvalidArgument("unknown loop '" + text + "' (gamma1, gamma2, circle:cx,cy,r, rect:..., poly:...)");
}

Mat4 metric_at(const MetricField& metric, double kx, double ky) {
  if (metric.evaluator) return metric.evaluator(kx, ky).g;
  const GridChart& c = *metric.chart;
  const double u = kx / c.hx();
  const double v = ky / c.hy();
  const int i0 = static_cast<int>(std::floor(u));
  const int j0 = static_cast<int>(std::floor(v));
  const double fu = u - i0;
  const double fv = v - j0;
  return (1 - fu) * (1 - fv) * metric.g[c.index(i0, j0)] + fu * (1 - fv) * metric.g[c.index(i0 + 1, j0)] +
         (1 - fu) * fv * metric.g[c.index(i0, j0 + 1)] + fu * fv * metric.g[c.index(i0 + 1, j0 + 1)];
}

TransportResult parallel_transport_loop(const ConnectionField& conn, const MetricField& metric,
                                        const LoopSpec& loop, int steps) {
  if (loop.segments.empty()) throw InvalidArgument("parallel transport: empty loop");
  if (steps < 1) throw InvalidArgument("parallel transport: steps must be positive");
  auto rhs = [&](const LoopSegment& seg, double t, const Mat4& u) -> Mat4 {
    const auto x = seg.position(t);
    const auto v = seg.velocity(t);
    const ConnectionJet j = conn.at(x[0], x[1]);
    Mat4 a = Mat4::Zero();
    for (int m = 0; m < kDim; ++m)
      for (int r = 0; r < kDim; ++r) a(m, r) = j.gamma(m, 0, r) * v[0] + j.gamma(m, 1, r) * v[1];
    return -a * u;
  };
  TransportResult res;
  const double perimeter = loop.perimeter();
  Mat4 u = Mat4::Identity();
  for (const LoopSegment& seg : loop.segments) {
    const int n = std::max(1, static_cast<int>(std::lround(steps * seg.length() / perimeter)));
    const double h = 1.0 / n;
    for (int k = 0; k < n; ++k) {
      const double t = k * h;
      const Mat4 k1 = rhs(seg, t, u);
      const Mat4 k2 = rhs(seg, t + 0.5 * h, u + 0.5 * h * k1);
      const Mat4 k3 = rhs(seg, t + 0.5 * h, u + 0.5 * h * k2);
      const Mat4 k4 = rhs(seg, t + h, u + h * k3);
      u += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    res.steps += n;
  }
  // The end point is taken unwrapped: on fundamental-domain data a loop that
  // crosses the seam ends where the metric differs from the start.
  const auto start = loop.segments.front().position(0.0);
  const auto end = loop.segments.back().position(1.0);
  res.u = u;
  res.g_start = metric_at(metric, start[0], start[1]);
  const Mat4 g_end = metric_at(metric, end[0], end[1]);
  res.orthogonality = (u.transpose() * g_end * u - res.g_start).cwiseAbs().maxCoeff();
  res.deviation = (u - Mat4::Identity()).cwiseAbs().maxCoeff();
  return res;
}

double wrap_phase(double x) {
  double y = std::remainder(x, 2.0 * kPi);  // [-pi, pi]
  if (y <= -kPi) y += 2.0 * kPi;
  return y;
}

double loop_integral(const GaugeTexture& tex, Sector sector, const LoopSpec& loop, int panels_per_segment) {
  if (loop.segments.empty()) throw InvalidArgument("loop integral: empty loop");
  const GaussLegendre& gl = gauss8();
  std::vector<double> terms;
  for (const LoopSegment& seg : loop.segments) {
    for (int panel = 0; panel < panels_per_segment; ++panel) {
      const double a = static_cast<double>(panel) / panels_per_segment;
      const double half = 0.5 / panels_per_segment;
      for (std::size_t q = 0; q < gl.x.size(); ++q) {
        const double t = a + half * (gl.x[q] + 1.0);
        const auto x = seg.position(t);
        const auto v = seg.velocity(t);
        const auto form = sample_one_form(tex, sector, x[0], x[1]);
        terms.push_back(half * gl.w[q] * (form[0] * v[0] + form[1] * v[1]));
      }
    }
  }
  return pairwise_sum(terms);
}

BerryPhaseVector berry_phase_vector(const GaugeTexture& tex, const LoopSpec& loop1, const LoopSpec& loop2) {
  BerryPhaseVector out;
  out.raw = {loop_integral(tex, Sector::plus, loop1), loop_integral(tex, Sector::minus, loop1),
             loop_integral(tex, Sector::plus, loop2), loop_integral(tex, Sector::minus, loop2)};
  for (int k = 0; k < 4; ++k) out.wrapped[k] = wrap_phase(out.raw[k]);
  out.loops = {loop1.label, loop2.label};
  return out;
}

double enclosed_flux(const GaugeTexture& tex, Sector sector, int i0, int j0, int i1, int j1) {
  const GridChart& c = *tex.chart;
  const TwoFormField& f = tex.f(sector);
  std::vector<double> cells;
  for (int i = i0; i < i1; ++i)
    for (int j = j0; j < j1; ++j) {
      const double mean = 0.25 * (f.data[c.index(i, j)][0] + f.data[c.index(i + 1, j)][0] +
                                  f.data[c.index(i, j + 1)][0] + f.data[c.index(i + 1, j + 1)][0]);
      cells.push_back(mean * c.hx() * c.hy());
    }
  return pairwise_sum(cells);
}

}  // namespace kkhol
