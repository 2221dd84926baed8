#include "support.hpp"

#include <doctest.h>

#include <random>

using namespace kkhol;
using namespace kkhol::testing;

namespace {

struct Geometry {
  std::shared_ptr<const GaugeTexture> tex;
  MetricField metric;
  ConnectionField lc;
  ConnectionField conn;
};

Geometry build(std::shared_ptr<const GaugeTexture> tex, double eps, TorsionVariant v = TorsionVariant::theta) {
  Geometry g{tex, assemble_metric(tex, eps), {}, {}};
  g.lc = christoffel(g.metric);
  g.conn = connection_with_torsion(g.lc, torsion_form(tex, v, eps), g.metric);
  return g;
}

Mat4 operator_block(const Tensor4& r, int c, int d) {
  Mat4 m;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) m(a, b) = r(a, b, c, d);
  return m;
}

}  // namespace

TEST_SUITE("holonomy") {
  TEST_CASE("curvature is antisymmetric in its last pair") {
    const Geometry g = build(share(random_texture(torus(12), 5, 1, -1)), 0.8);
    const CurvatureField r = riemann_curvature(g.conn, g.metric, Frame::coordinate);
    for (std::size_t p = 0; p < r.size(); p += 5)
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
          for (int c = 0; c < 4; ++c)
            for (int d = 0; d < 4; ++d) CHECK(r.r[p](a, b, c, d) == -r.r[p](a, b, d, c));
  }

  TEST_CASE("Levi-Civita curvature has the Riemannian symmetries") {
    const Geometry g = build(share(random_texture(torus(12), 6, 1, 0)), 1.0);
    const CurvatureField r = riemann_curvature(g.lc, g.metric, Frame::coordinate);
    for (std::size_t p = 0; p < r.size(); p += 13) {
      const Tensor4 low = lower_first(r.r[p], g.metric.g[p]);
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
          for (int c = 0; c < 4; ++c)
            for (int d = 0; d < 4; ++d) {
              CHECK(std::abs(low(a, b, c, d) + low(b, a, c, d)) < 1e-12);
              CHECK(std::abs(low(a, b, c, d) - low(c, d, a, b)) < 1e-12);
              CHECK(std::abs(low(a, b, c, d) + low(a, c, d, b) + low(a, d, b, c)) < 1e-12);
            }
    }
  }

  TEST_CASE("analytic curvature matches a finite-difference reference") {
    auto tex = share(random_texture(torus(8), 9, 1, -1));
    const Geometry g = build(tex, 0.6);
    const CurvatureField r = riemann_curvature(g.conn, g.metric, Frame::coordinate);
    auto gamma = [&](double x, double y) { return g.conn.at(x, y).gamma; };
    for (std::size_t p = 10; p < r.size(); p += 9) {
      const auto& c = *tex->chart;
      CHECK(max_diff(r.r[p], reference_riemann(gamma, c.kx(c.i_of(p)), c.ky(c.j_of(p)))) < 1e-7);
    }
  }

  TEST_CASE("sampled curvature converges to the analytic one") {
    double prev = 0.0;
    for (int n : {16, 32, 64}) {
      auto tex = share(random_texture(torus(n), 12));
      const Geometry a = build(tex, 1.0);
      const Geometry s = build(share(sampled_copy(*tex)), 1.0);
      const CurvatureField ra = riemann_curvature(a.conn, a.metric, Frame::coordinate);
      const CurvatureField rs = riemann_curvature(s.conn, s.metric, Frame::coordinate);
      double err = 0.0;
      for (std::size_t p = 0; p < ra.size(); ++p) err = std::max(err, max_diff(ra.r[p], rs.r[p]));
      if (prev > 0.0) CHECK(factor(prev, err) >= 3.5);
      prev = err;
    }
  }

  TEST_CASE("adapted frame is orthonormal and puts the fibres last") {
    const MetricField m = assemble_metric(random_texture(torus(8), 2, 1, 1, 1.0), 1.0);
    for (const Mat4& g : m.g) {
      const Mat4 e = adapted_frame(g);
      CHECK((e.transpose() * g * e - Mat4::Identity()).cwiseAbs().maxCoeff() < 1e-12);
      CHECK(std::abs(e(0, 2)) + std::abs(e(1, 2)) + std::abs(e(0, 3)) + std::abs(e(1, 3)) == 0.0);
    }
  }

  TEST_CASE("off-diagonal span dimension survives frame rotations") {
    const Geometry g = build(share(random_texture(torus(12), 3, 1, -1)), 0.7, TorsionVariant::pulled_back);
    const CurvatureField r = riemann_curvature(g.conn, g.metric, Frame::adapted);
    const std::vector<std::size_t> pts = all_points(*r.chart);
    const int dim = offdiag_span_dim(r, pts).all_points_dim;
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> angle(0.0, kTwoPi);
    for (int k = 0; k < 5; ++k) {
      const double a = angle(rng), b = angle(rng);
      Mat4 q = Mat4::Zero();
      q.block<2, 2>(0, 0) << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
      q.block<2, 2>(2, 2) << std::cos(b), std::sin(b), std::sin(b), -std::cos(b);
      CHECK(offdiag_span_dim(rotate_frame(r, q), pts).all_points_dim == dim);
    }
  }

  TEST_CASE("span requires the adapted frame and a non-empty sample") {
    const Geometry g = build(share(make_counterflow_texture(torus(8))), 1.0);
    const CurvatureField coord = riemann_curvature(g.conn, g.metric, Frame::coordinate);
    CHECK_THROWS_AS(offdiag_span_dim(coord, all_points(*coord.chart)), InvalidArgument);
    const CurvatureField adapted = riemann_curvature(g.conn, g.metric, Frame::adapted);
    CHECK_THROWS_AS(offdiag_span_dim(adapted, {}), InvalidArgument);
  }

  TEST_CASE("flat texture has no off-diagonal holonomy") {
    const Geometry g = build(share(make_flat_texture(torus(8))), 1.0);
    const CurvatureField r = riemann_curvature(g.conn, g.metric, Frame::adapted);
    CHECK(offdiag_span_dim(r, all_points(*r.chart)).all_points_dim == 0);
  }

  TEST_CASE("numerical rank honours the absolute floor") {
    Eigen::MatrixXd m(3, 4);
    m << 1, 0, 0, 0, 0, 1e-3, 0, 0, 0, 0, 1e-14, 0;
    CHECK(numerical_rank(m, 1e-8) == 2);
    CHECK(numerical_rank(m, 1e-2) == 1);
    CHECK(numerical_rank(Eigen::MatrixXd::Zero(2, 4), 1e-8) == 0);
  }

  TEST_CASE("parallel transport preserves the metric") {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      const Geometry g = build(share(random_texture(torus(16), seed, 1, -1)), 1.0);
      for (const char* spec : {"gamma1:0.4", "gamma2:1.3", "circle:2,3,1", "rect:0.5,0.5,2,4"}) {
        const TransportResult t = parallel_transport_loop(g.conn, g.metric, LoopSpec::parse(spec, *g.tex->chart));
        CHECK(t.orthogonality <= 1e-8);
      }
    }
  }

  TEST_CASE("transport around a loop and back returns the identity") {
    const Geometry g = build(share(random_texture(torus(16), 4, 1, 0)), 0.9);
    const std::vector<std::array<double, 2>> pts{{1, 1}, {3, 1.5}, {2.5, 4}, {0.5, 3}, {1, 1}};
    const std::vector<std::array<double, 2>> rev(pts.rbegin(), pts.rend());
    const auto& chart = *g.tex->chart;
    const TransportResult f = parallel_transport_loop(g.conn, g.metric, LoopSpec::polyline(pts, chart));
    const TransportResult b = parallel_transport_loop(g.conn, g.metric, LoopSpec::polyline(rev, chart));
    CHECK(f.deviation > 1e-3);
    CHECK((b.u * f.u - Mat4::Identity()).cwiseAbs().maxCoeff() < 1e-9);
  }

  TEST_CASE("small loops obey the curvature area law") {
    const Geometry g = build(share(random_texture(torus(16), 8, 1, -1)), 1.0);
    double prev = 0.0;
    for (double rad : {0.04, 0.02, 0.01}) {
      const double cx = 2.0, cy = 2.5;
      const TransportResult t = parallel_transport_loop(g.conn, g.metric, LoopSpec::circle(cx, cy, rad), 256);
      const Mat4 r01 = operator_block(riemann_at(g.conn.at(cx + rad, cy)), 0, 1);
      const double area = std::numbers::pi * rad * rad;
      const double rel = ((t.u - Mat4::Identity()) / area + r01).cwiseAbs().maxCoeff() / r01.cwiseAbs().maxCoeff();
      CAPTURE(rad);
      CHECK(rel < 0.1);
      if (prev > 0.0) CHECK(rel < 0.7 * prev);
      prev = rel;
    }
  }

  TEST_CASE("loop integrals satisfy Stokes' theorem at second order") {
    double prev = 0.0;
    for (int n : {16, 32, 64}) {
      const GaugeTexture t = sampled_copy(random_texture(torus(n), 15));
      const auto& c = *t.chart;
      const int i0 = n / 4, i1 = 3 * n / 4;
      const LoopSpec rect = LoopSpec::rectangle(c.kx(i0), c.ky(i0), c.kx(i1), c.ky(i1));
      const double err = std::abs(loop_integral(t, Sector::plus, rect) - enclosed_flux(t, Sector::plus, i0, i0, i1, i1));
      if (prev > 0.0) CHECK(factor(prev, err) >= 3.5);
      prev = err;
    }
  }

  TEST_CASE("Berry phases of the counterflow texture") {
    const GaugeTexture t = make_counterflow_texture(torus(32));
    const auto& c = *t.chart;
    const BerryPhaseVector v = berry_phase_vector(t, LoopSpec::gamma1(c), LoopSpec::gamma2(c));
    for (double x : v.wrapped) CHECK(std::abs(x) < 1e-12);
    const LoopSpec box = LoopSpec::rectangle(0.0, 0.0, kTwoPi, kTwoPi);
    CHECK(loop_integral(t, Sector::plus, box) == doctest::Approx(kTwoPi).epsilon(1e-12));
    CHECK(loop_integral(t, Sector::minus, box) == doctest::Approx(-kTwoPi).epsilon(1e-12));
    CHECK(wrap_phase(kTwoPi + 0.25) == doctest::Approx(0.25));
    CHECK(wrap_phase(-std::numbers::pi) == doctest::Approx(std::numbers::pi));
  }

  TEST_CASE("loop grammar") {
    const GridChart c(16, 16, kTwoPi, kTwoPi);
    CHECK(LoopSpec::parse("gamma1", c).perimeter() == doctest::Approx(kTwoPi));
    CHECK(LoopSpec::parse("circle:1,1,0.5", c).perimeter() == doctest::Approx(std::numbers::pi));
    CHECK(LoopSpec::parse("rect:0,0,1,2", c).perimeter() == doctest::Approx(6.0));
    CHECK(LoopSpec::parse("poly:0,0;1,0;1,1;0,0", c).segments.size() == 3);
    CHECK_THROWS_AS(LoopSpec::parse("poly:0,0;1,0;1,1", c), InvalidArgument);
    CHECK_THROWS_AS(LoopSpec::parse("spiral:1", c), InvalidArgument);
    CHECK_THROWS_AS(LoopSpec::parse("circle:1,1,-2", c), InvalidArgument);
  }
}
