#include "support.hpp"

#include <doctest.h>

#include <random>

using namespace kkhol;
using namespace kkhol::testing;

TEST_SUITE("kkgeom") {
  TEST_CASE("counterflow metric entries at (pi/2, 0)") {
    auto chart = torus(64);
    const MetricField m = assemble_metric(share(make_counterflow_texture(chart)), 1.0);
    const Mat4& g = m.g[chart->index(16, 0)];
    // A+ = (0, 1/8) there, A- = -A+.
    CHECK(g(1, 1) == doctest::Approx(1.03125).epsilon(1e-15));
    CHECK(g(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(g(1, 2) == doctest::Approx(0.125).epsilon(1e-15));
    CHECK(g(1, 3) == doctest::Approx(-0.125).epsilon(1e-15));
    CHECK(g(2, 2) == 1.0);
    CHECK(g(2, 3) == 0.0);
  }

  TEST_CASE("blockwise assembly equals the term-by-term expansion bit for bit") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      auto chart = torus(12);
      const GaugeTexture t = random_texture(chart, seed, 1, -1);
      for (double eps : {0.0, 0.3, 1.0}) {
        const MetricField m = assemble_metric(t, eps);
        for (std::size_t p = 0; p < chart->size(); ++p) {
          const Mat4 e = metric_by_expansion(t.a_plus.data[p], t.a_minus.data[p], eps);
          CHECK((e.array() == m.g[p].array()).all());
        }
      }
    }
  }

  TEST_CASE("flat texture and epsilon = 0 give the identity metric") {
    const MetricField flat = assemble_metric(make_flat_texture(torus(8)), 1.0);
    const MetricField zero = assemble_metric(make_counterflow_texture(torus(8)), 0.0);
    for (std::size_t p = 0; p < flat.size(); ++p) {
      CHECK(flat.g[p] == Mat4::Identity());
      CHECK(zero.g[p] == Mat4::Identity());
    }
    CHECK(christoffel(flat).gamma[3].max_abs() == 0.0);
  }

  TEST_CASE("epsilon outside [0, 1] is rejected") {
    const GaugeTexture t = make_flat_texture(torus(8));
    CHECK_THROWS_AS(assemble_metric(t, -0.1), InvalidArgument);
    CHECK_THROWS_AS(assemble_metric(t, 1.5), InvalidArgument);
  }

  TEST_CASE("the bundle projection is a Riemannian submersion") {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
      const MetricField m = assemble_metric(random_texture(torus(16), seed, 1, 0, 1.0), 1.0);
      const SubmersionReport r = check_submersion(m);
      CHECK(r.max_violation() <= 1e-12);
      CHECK(inverse_residual(m) <= 1e-12);
    }
  }

  TEST_CASE("random textures give positive definite metrics") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> amp(0.1, 3.0);
    for (int k = 0; k < 20; ++k) {
      const MetricField m = assemble_metric(random_texture(torus(8), rng(), 0, 0, amp(rng)), 1.0);
      for (const Mat4& g : m.g) CHECK(Eigen::SelfAdjointEigenSolver<Mat4>(g).eigenvalues().minCoeff() > 0.0);
    }
  }

  TEST_CASE("metric is Lipschitz in epsilon") {
    auto chart = torus(16);
    const GaugeTexture t = random_texture(chart, 3, 1, 1);
    double amax = 0.0;
    for (const auto& v : t.a_plus.data) amax = std::max({amax, std::abs(v[0]), std::abs(v[1])});
    for (const auto& v : t.a_minus.data) amax = std::max({amax, std::abs(v[0]), std::abs(v[1])});
    const double bound = 2.0 * amax + 4.0 * amax * amax;
    for (double e : {0.0, 0.2, 0.5, 0.9}) {
      const double de = 0.05;
      const MetricField a = assemble_metric(t, e), b = assemble_metric(t, e + de);
      for (std::size_t p = 0; p < chart->size(); ++p) CHECK((a.g[p] - b.g[p]).cwiseAbs().maxCoeff() <= bound * de);
    }
  }

  TEST_CASE("Christoffels of the sine texture") {
    auto chart = torus(32);
    const MetricField m = assemble_metric(share(sine_texture(chart)), 1.0);
    const ConnectionField lc = christoffel(m);
    for (std::size_t p = 0; p < chart->size(); p += 7) {
      const double x = chart->kx(chart->i_of(p));
      CHECK(lc.gamma[p](0, 1, 1) == doctest::Approx(-std::sin(x) * std::cos(x)).epsilon(1e-12));
      CHECK(lc.gamma[p](0, 1, 2) == doctest::Approx(-0.5 * std::cos(x)).epsilon(1e-12));
      CHECK(lc.gamma[p](0, 2, 2) == 0.0);
    }
  }

  TEST_CASE("analytic Christoffels match a finite-difference reference") {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
      auto chart = torus(8);
      auto tex = share(random_texture(chart, seed, 1, -1));
      const double eps = 0.25 * static_cast<double>(seed % 4 + 1);
      const MetricField m = assemble_metric(tex, eps);
      const ConnectionField lc = christoffel(m);
      const MetricFn ref = reference_metric_fn(*tex, eps);
      for (std::size_t p = 9; p < chart->size(); p += 11) {
        const double x = chart->kx(chart->i_of(p)), y = chart->ky(chart->j_of(p));
        CHECK(max_diff(lc.gamma[p], reference_christoffel(ref, x, y)) < 1e-8);
      }
      CHECK(metric_compatibility_residual(lc, m) < 1e-12);
    }
  }

  TEST_CASE("frozen counterflow Christoffels at the origin") {
    auto chart = torus(64);
    auto tex = share(make_counterflow_texture(chart));
    const ConnectionField lc = christoffel(assemble_metric(tex, 1.0));
    const Tensor3 ref = reference_christoffel(reference_metric_fn(*tex, 1.0), 0.0, 0.0);
    const double c = 1.0 / (4.0 * std::numbers::pi);
    const Tensor3& G = lc.gamma[0];
    CHECK(G(0, 1, 2) == doctest::Approx(-c).epsilon(1e-12));
    CHECK(G(0, 1, 3) == doctest::Approx(c).epsilon(1e-12));
    CHECK(G(1, 0, 2) == doctest::Approx(c).epsilon(1e-12));
    CHECK(G(1, 0, 3) == doctest::Approx(-c).epsilon(1e-12));
    CHECK(max_diff(G, ref) < 1e-9);
  }

  TEST_CASE("sampled Christoffels converge at second order") {
    double prev = 0.0;
    for (int n : {16, 32, 64}) {
      auto chart = torus(n);
      auto tex = share(random_texture(chart, 11));
      const ConnectionField exact = christoffel(assemble_metric(tex, 1.0));
      const ConnectionField approx = christoffel(assemble_metric(sampled_copy(*tex), 1.0));
      double err = 0.0;
      for (std::size_t p = 0; p < chart->size(); ++p) err = std::max(err, max_diff(exact.gamma[p], approx.gamma[p]));
      if (prev > 0.0) CHECK(factor(prev, err) >= 3.5);
      prev = err;
    }
  }

  TEST_CASE("perturbation stays close and keeps the connection metric") {
    const MetricField m = assemble_metric(share(make_counterflow_texture(torus(16))), 1.0);
    const MetricField q = perturb_metric(m, 5, 0.01);
    CHECK(q.perturbed);
    double d = 0.0;
    for (std::size_t p = 0; p < m.size(); ++p) d = std::max(d, (q.g[p] - m.g[p]).cwiseAbs().maxCoeff() / m.g[p].cwiseAbs().maxCoeff());
    CHECK(d > 0.0);
    CHECK(d <= 0.02);
    CHECK(metric_compatibility_residual(christoffel(q), q) < 1e-12);
  }
}
