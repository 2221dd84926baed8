#include "support.hpp"

#include <doctest.h>

using namespace kkhol;
using namespace kkhol::testing;

TEST_SUITE("gauge") {
  TEST_CASE("counterflow sectors carry constant opposite curvature") {
    auto chart = torus(32);
    const GaugeTexture t = make_counterflow_texture(chart);
    const double f0 = 1.0 / kTwoPi;
    for (std::size_t p = 0; p < chart->size(); ++p) {
      CHECK(t.f_plus.data[p][0] == doctest::Approx(f0).epsilon(1e-14));
      CHECK(t.f_minus.data[p][0] == doctest::Approx(-f0).epsilon(1e-14));
      CHECK(t.a_minus.data[p][0] == -t.a_plus.data[p][0]);
      CHECK(t.a_minus.data[p][1] == -t.a_plus.data[p][1]);
    }
    CHECK(t.fundamental_domain);
    CHECK(t.a_plus.seam_marked);
  }

  TEST_CASE("counterflow Chern numbers are +1 and -1 on every grid") {
    for (int n : {16, 24, 32, 64, 96}) {
      const GaugeTexture t = make_counterflow_texture(torus(n));
      CHECK(chern_number(t, Sector::plus).integer == 1);
      CHECK(chern_number(t, Sector::minus).integer == -1);
      CHECK(chern_number(sampled_copy(t), Sector::plus).integer == 1);
    }
  }

  TEST_CASE("flat texture has vanishing fields") {
    const GaugeTexture t = make_flat_texture(torus(8));
    CHECK(max_abs(t.f_plus) == 0.0);
    CHECK(chern_number(t, Sector::minus).integer == 0);
  }

  TEST_CASE("lattice Chern numbers match the solid-angle winding degree") {
    auto chart = torus(32);
    for (double m : {1.0, -1.0, 3.0, 0.5, -1.5}) {
      const long deg = winding_degree([m](double x, double y) { return qwz_d(m, x, y); }, 32);
      const GaugeTexture lower = bloch_berry_texture(qwz_texture(m, Band::lower), chart, {1.0, 0.0});
      const GaugeTexture upper = bloch_berry_texture(qwz_texture(m, Band::upper), chart, {1.0, 0.0});
      CAPTURE(m);
      CHECK(chern_number(lower, Sector::plus).integer == deg);
      CHECK(chern_number(upper, Sector::plus).integer == -deg);
    }
  }

  TEST_CASE("frozen QWZ invariants") {
    auto chart = torus(32);
    CHECK(chern_number(bloch_berry_texture(qwz_texture(1.0, Band::lower), chart, {1.0, 0.0}), Sector::plus).integer == -1);
    CHECK(chern_number(bloch_berry_texture(qwz_texture(3.0, Band::lower), chart, {1.0, 0.0}), Sector::plus).integer == 0);
    CHECK(chern_number(bloch_berry_texture(qwz_texture(-1.0, Band::lower), chart, {1.0, 0.0}), Sector::plus).integer == 1);
  }

  TEST_CASE("sector weights scale the Bloch curvature") {
    auto chart = torus(16);
    const GaugeTexture t = bloch_berry_texture(qwz_texture(1.0, Band::lower), chart, {1.0, -1.0});
    CHECK(chern_number(t, Sector::plus).integer == -1);
    CHECK(chern_number(t, Sector::minus).integer == 1);
    const GaugeTexture half = bloch_berry_texture(qwz_texture(1.0, Band::lower), chart, {0.5, 0.0});
    CHECK(chern_number(half, Sector::plus).raw_flux == doctest::Approx(-std::numbers::pi).epsilon(1e-10));
  }

  TEST_CASE("closed bands raise a DegenerateBandError") {
    auto chart = torus(32);
    CHECK_THROWS_AS(bloch_berry_texture(qwz_texture(2.0, Band::lower), chart, {1.0, 0.0}), DegenerateBandError);
    CHECK_THROWS_AS(bloch_berry_texture(qwz_texture(0.0, Band::upper), chart, {1.0, 0.0}), DegenerateBandError);
  }

  TEST_CASE("an exact form leaves curvature and Chern numbers unchanged") {
    auto chart = torus(32);
    const GaugeTexture t = sampled_copy(random_texture(chart, 7));
    const ScalarField chi = make_scalar_field(chart, [](double x, double y) { return std::sin(x) + 0.3 * std::cos(x + 2 * y); });
    const GaugeTexture u = add_exact_form(t, chi);
    double da = 0.0, df = 0.0;
    for (std::size_t p = 0; p < chart->size(); ++p) {
      da = std::max(da, std::abs(u.a_plus.data[p][0] - t.a_plus.data[p][0]));
      df = std::max(df, std::abs(u.f_plus.data[p][0] - t.f_plus.data[p][0]));
    }
    CHECK(da > 0.1);
    CHECK(df < 1e-12);
    CHECK(chern_number(u, Sector::plus).integer == chern_number(t, Sector::plus).integer);
    const TwoFormField g = curvature_2form(u.a_plus);
    const TwoFormField h = curvature_2form(t.a_plus);
    double dd = 0.0;
    for (std::size_t p = 0; p < chart->size(); ++p) dd = std::max(dd, std::abs(g.data[p][0] - h.data[p][0]));
    CHECK(dd < 1e-12);
  }

  TEST_CASE("discrete curvature of A = sin(k_x) dk_y converges to cos(k_x)") {
    double prev = 0.0;
    for (int n : {16, 32, 64}) {
      auto chart = torus(n);
      OneFormField a(chart);
      for (std::size_t p = 0; p < chart->size(); ++p) a.data[p] = {0.0, std::sin(chart->kx(chart->i_of(p)))};
      const TwoFormField f = curvature_2form(a);
      double err = 0.0;
      for (std::size_t p = 0; p < chart->size(); ++p)
        err = std::max(err, std::abs(f.data[p][0] - std::cos(chart->kx(chart->i_of(p)))));
      if (prev > 0.0) CHECK(factor(prev, err) >= 3.5);
      prev = err;
      CHECK(f.component(0, 1, 0) == -f.component(0, 0, 1));
    }
  }

  TEST_CASE("fourier textures carry prescribed Chern numbers") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const GaugeTexture t = random_texture(torus(24), seed, 2, -1);
      CHECK(chern_number(t, Sector::plus).integer == 2);
      CHECK(chern_number(t, Sector::minus).integer == -1);
    }
  }

  TEST_CASE("claimed quantization that fails raises QuantizationError") {
    auto chart = torus(8);
    TwoFormField f(chart);
    for (auto& v : f.data) v[0] = 0.01;
    CHECK_THROWS_AS(chern_number(f, true), QuantizationError);
    CHECK_NOTHROW(chern_number(f, false));
  }
}
