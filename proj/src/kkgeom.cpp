#include "kkhol/kkgeom.hpp"

#include "kkhol/errors.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <random>
#include <sstream>

namespace kkhol {

namespace {

Mat4 blockwise_metric(const std::array<double, 2>& ap, const std::array<double, 2>& am) {
  Mat4 g = Mat4::Identity();
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double delta = i == j ? 1.0 : 0.0;
      g(i, j) = delta + ap[i] * ap[j] + am[i] * am[j];
    }
    g(i, kPhiPlus) = g(kPhiPlus, i) = ap[i];
    g(i, kPhiMinus) = g(kPhiMinus, i) = am[i];
  }
  return g;
}

std::string point_label(const GridChart& c, std::size_t p) {
  std::ostringstream s;
  s << "grid point (" << c.i_of(p) << ", " << c.j_of(p) << ") k = (" << c.kx(c.i_of(p)) << ", "
    << c.ky(c.j_of(p)) << ")";
  return s.str();
}

Mat4 invert_spd(const Mat4& g, const std::string& where) {
  Eigen::LLT<Mat4> llt(g);
  if (llt.info() != Eigen::Success) {
    throw FactorizationError("metric is not positive definite at " + where);
  }
  return llt.solve(Mat4::Identity());
}

ConnectionJet christoffel_from(const Mat4& ginv, const std::array<Mat4, 2>& dg, const std::array<Mat4, 3>* d2g) {
  // Lowered symbols G_{s n r} = 1/2 (d_n g_{s r} + d_r g_{s n} - d_s g_{n r}).
  auto d = [&](int axis, int a, int b) { return axis < 2 ? dg[axis](a, b) : 0.0; };
  Tensor3 low;
  for (int s = 0; s < kDim; ++s)
    for (int n = 0; n < kDim; ++n)
      for (int r = n; r < kDim; ++r) {
        const double v = 0.5 * (d(n, s, r) + d(r, s, n) - d(s, n, r));
        low(s, n, r) = v;
        low(s, r, n) = v;
      }
  ConnectionJet out;
  for (int m = 0; m < kDim; ++m)
    for (int n = 0; n < kDim; ++n)
      for (int r = n; r < kDim; ++r) {
        double v = 0.0;
        for (int s = 0; s < kDim; ++s) v += ginv(m, s) * low(s, n, r);
        out.gamma(m, n, r) = v;
        out.gamma(m, r, n) = v;
      }
  if (d2g == nullptr) return out;
  auto hess = [&](int c, int axis, int a, int b) -> double {
    if (axis >= 2) return 0.0;
    const int k = c + axis;  // (xx, xy, yy) -> 0, 1, 2
    return (*d2g)[k](a, b);
  };
  for (int c = 0; c < 2; ++c) {
    const Mat4 dginv = -ginv * dg[c] * ginv;
    Tensor3 dlow;
    for (int s = 0; s < kDim; ++s)
      for (int n = 0; n < kDim; ++n)
        for (int r = 0; r < kDim; ++r)
          dlow(s, n, r) = 0.5 * (hess(c, n, s, r) + hess(c, r, s, n) - hess(c, s, n, r));
    for (int m = 0; m < kDim; ++m)
      for (int n = 0; n < kDim; ++n)
        for (int r = n; r < kDim; ++r) {
          double v = 0.0;
          for (int s = 0; s < kDim; ++s) v += dginv(m, s) * low(s, n, r) + ginv(m, s) * dlow(s, n, r);
          out.dgamma[c](m, n, r) = v;
          out.dgamma[c](m, r, n) = v;
        }
  }
  return out;
}

}  // namespace

MetricJet metric_jet(const SectorJets& jets, double epsilon) {
  const FormJet a[2] = {jets.plus.scaled(epsilon), jets.minus.scaled(epsilon)};
  MetricJet out;
  out.g = blockwise_metric(a[0].value, a[1].value);
  out.has_hessian = jets.has_hessian;
  for (int c = 0; c < 2; ++c) {
    Mat4& d = out.dg[c];
    d.setZero();
    for (int sct = 0; sct < 2; ++sct) {
      const FormJet& x = a[sct];
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) d(i, j) += x.grad[c][i] * x.value[j] + x.value[i] * x.grad[c][j];
        d(i, kPhiPlus + sct) = d(kPhiPlus + sct, i) = x.grad[c][i];
      }
    }
  }
  if (!jets.has_hessian) return out;
  const int pairs[3][2] = {{0, 0}, {0, 1}, {1, 1}};
  for (int k = 0; k < 3; ++k) {
    const int c = pairs[k][0];
    const int e = pairs[k][1];
    Mat4& d = out.d2g[k];
    d.setZero();
    for (int sct = 0; sct < 2; ++sct) {
      const FormJet& x = a[sct];
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
          d(i, j) += x.hess[c][e][i] * x.value[j] + x.grad[c][i] * x.grad[e][j] + x.grad[e][i] * x.grad[c][j] +
                     x.value[i] * x.hess[c][e][j];
        }
        d(i, kPhiPlus + sct) = d(kPhiPlus + sct, i) = x.hess[c][e][i];
      }
    }
  }
  return out;
}

std::array<Vec4, 2> horizontal_lift_forms(const std::array<double, 2>& a_plus,
                                          const std::array<double, 2>& a_minus, double epsilon) {
  return {Vec4(epsilon * a_plus[0], epsilon * a_plus[1], 1.0, 0.0),
          Vec4(epsilon * a_minus[0], epsilon * a_minus[1], 0.0, 1.0)};
}

Mat4 metric_by_expansion(const std::array<double, 2>& a_plus, const std::array<double, 2>& a_minus,
                         double epsilon) {
  Mat4 g = Mat4::Zero();
  g(0, 0) = 1.0;
  g(1, 1) = 1.0;
  for (const Vec4& theta : horizontal_lift_forms(a_plus, a_minus, epsilon)) {
    for (int m = 0; m < kDim; ++m)
      for (int n = 0; n < kDim; ++n) g(m, n) += theta[m] * theta[n];
  }
  return g;
}

MetricField assemble_metric(const GaugeTexture& texture, double epsilon) {
  return assemble_metric(std::make_shared<const GaugeTexture>(texture), epsilon);
}

MetricField assemble_metric(std::shared_ptr<const GaugeTexture> texture, double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    std::ostringstream msg;
    msg << "epsilon must lie in [0, 1], got " << epsilon;
    throw InvalidArgument(msg.str());
  }
  const GaugeTexture& tex = *texture;
  const GridChart& c = *tex.chart;
  MetricField m;
  m.chart = tex.chart;
  m.texture = texture;
  m.epsilon = epsilon;
  m.g.resize(c.size());
  m.g_inv.resize(c.size());
  m.dg.resize(c.size());
  m.seam_marked = tex.fundamental_domain;

  if (tex.analytic()) {
    m.has_hessian = true;
    m.d2g.resize(c.size());
    m.evaluator = [texture, epsilon](double kx, double ky) {
      return metric_jet(texture->jets_at(kx, ky), epsilon);
    };
    for (std::size_t p = 0; p < c.size(); ++p) {
      const MetricJet jet = metric_jet(tex.jets_at(p), epsilon);
      m.g[p] = jet.g;
      m.dg[p] = jet.dg;
      m.d2g[p] = jet.d2g;
    }
  } else {
    for (std::size_t p = 0; p < c.size(); ++p) {
      const auto ap = tex.a_plus.data[p];
      const auto am = tex.a_minus.data[p];
      m.g[p] = blockwise_metric({epsilon * ap[0], epsilon * ap[1]}, {epsilon * am[0], epsilon * am[1]});
    }
    for (std::size_t p = 0; p < c.size(); ++p) {
      const int i = c.i_of(p);
      const int j = c.j_of(p);
      m.dg[p][0] = (m.g[c.index(i + 1, j)] - m.g[c.index(i - 1, j)]) / (2.0 * c.hx());
      m.dg[p][1] = (m.g[c.index(i, j + 1)] - m.g[c.index(i, j - 1)]) / (2.0 * c.hy());
    }
  }
  for (std::size_t p = 0; p < c.size(); ++p) m.g_inv[p] = invert_spd(m.g[p], point_label(c, p));
  return m;
}

std::string to_string(ConnectionKind k) {
  return k == ConnectionKind::levi_civita ? "levi-civita" : "with-torsion";
}

ConnectionJet christoffel_jet(const MetricJet& jet) {
  const Mat4 ginv = invert_spd(jet.g, "an off-grid evaluation point");
  return christoffel_from(ginv, jet.dg, jet.has_hessian ? &jet.d2g : nullptr);
}

ConnectionField christoffel(const MetricField& metric) {
  const GridChart& c = *metric.chart;
  ConnectionField conn;
  conn.chart = metric.chart;
  conn.kind = ConnectionKind::levi_civita;
  conn.seam_marked = metric.seam_marked;
  conn.gamma.resize(c.size());
  conn.dgamma.resize(c.size());
  for (std::size_t p = 0; p < c.size(); ++p) {
    const ConnectionJet jet =
        christoffel_from(metric.g_inv[p], metric.dg[p], metric.has_hessian ? &metric.d2g[p] : nullptr);
    conn.gamma[p] = jet.gamma;
    if (metric.has_hessian) conn.dgamma[p] = jet.dgamma;
  }
  if (!metric.has_hessian) {
    for (std::size_t p = 0; p < c.size(); ++p) {
      const int i = c.i_of(p);
      const int j = c.j_of(p);
      const Tensor3& xp = conn.gamma[c.index(i + 1, j)];
      const Tensor3& xm = conn.gamma[c.index(i - 1, j)];
      const Tensor3& yp = conn.gamma[c.index(i, j + 1)];
      const Tensor3& ym = conn.gamma[c.index(i, j - 1)];
      for (std::size_t k = 0; k < 64; ++k) {
        conn.dgamma[p][0].v[k] = (xp.v[k] - xm.v[k]) / (2.0 * c.hx());
        conn.dgamma[p][1].v[k] = (yp.v[k] - ym.v[k]) / (2.0 * c.hy());
      }
    }
  }
  if (metric.evaluator) {
    auto ev = metric.evaluator;
    conn.evaluator = [ev](double kx, double ky) { return christoffel_jet(ev(kx, ky)); };
  }
  return conn;
}

ConnectionJet ConnectionField::at(double kx, double ky) const {
  if (evaluator) return evaluator(kx, ky);
  const GridChart& c = *chart;
  const double u = kx / c.hx();
  const double v = ky / c.hy();
  const int i0 = static_cast<int>(std::floor(u));
  const int j0 = static_cast<int>(std::floor(v));
  const double fu = u - i0;
  const double fv = v - j0;
  const std::size_t p[4] = {c.index(i0, j0), c.index(i0 + 1, j0), c.index(i0, j0 + 1), c.index(i0 + 1, j0 + 1)};
  const double w[4] = {(1 - fu) * (1 - fv), fu * (1 - fv), (1 - fu) * fv, fu * fv};
  ConnectionJet out;
  for (int q = 0; q < 4; ++q) {
    for (std::size_t k = 0; k < 64; ++k) {
      out.gamma.v[k] += w[q] * gamma[p[q]].v[k];
      out.dgamma[0].v[k] += w[q] * dgamma[p[q]][0].v[k];
      out.dgamma[1].v[k] += w[q] * dgamma[p[q]][1].v[k];
    }
  }
  return out;
}

double SubmersionReport::max_violation() const {
  return std::max({fibre_block, horizontal_vertical, horizontal_orthonormal});
}

SubmersionReport check_submersion(const MetricField& metric) {
  SubmersionReport r;
  const GaugeTexture& tex = *metric.texture;
  const double eps = metric.epsilon;
  for (std::size_t p = 0; p < metric.size(); ++p) {
    const Mat4& g = metric.g[p];
    r.fibre_block = std::max(r.fibre_block, (g.block<2, 2>(2, 2) - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff());
    Vec4 lift[2];
    for (int i = 0; i < 2; ++i) {
      lift[i] = Vec4::Unit(i);
      lift[i][kPhiPlus] = -eps * tex.a_plus.data[p][i];
      lift[i][kPhiMinus] = -eps * tex.a_minus.data[p][i];
    }
    for (int i = 0; i < 2; ++i) {
      for (int s = kPhiPlus; s <= kPhiMinus; ++s) {
        r.horizontal_vertical = std::max(r.horizontal_vertical, std::abs(lift[i].dot(g.col(s))));
      }
      for (int j = 0; j < 2; ++j) {
        const double delta = i == j ? 1.0 : 0.0;
        r.horizontal_orthonormal =
            std::max(r.horizontal_orthonormal, std::abs(lift[i].dot(g * lift[j]) - delta));
      }
    }
  }
  return r;
}

double metric_compatibility_residual(const ConnectionField& conn, const MetricField& metric) {
  if (*conn.chart != *metric.chart) throw InvalidArgument("metric compatibility: chart mismatch");
  const GridChart& c = *metric.chart;
  const bool skip_seam = conn.seam_marked || metric.seam_marked;
  double worst = 0.0;
  for (std::size_t p = 0; p < c.size(); ++p) {
    if (skip_seam && c.on_seam(p)) continue;
    const Mat4& g = metric.g[p];
    const Tensor3& G = conn.gamma[p];
    for (int s = 0; s < kDim; ++s)
      for (int m = 0; m < kDim; ++m)
        for (int n = 0; n < kDim; ++n) {
          double v = s < 2 ? metric.dg[p][s](m, n) : 0.0;
          for (int r = 0; r < kDim; ++r) v -= G(r, s, m) * g(r, n) + G(r, s, n) * g(m, r);
          worst = std::max(worst, std::abs(v));
        }
  }
  return worst;
}

namespace {

struct TrigTerm {
  double mx, my, c, s;
};

// p_mn(k) and its first and second derivatives, for the symmetric index pair (m, n).
struct PerturbationField {
  std::array<std::vector<TrigTerm>, 10> terms;

  static int slot(int m, int n) {
    if (m > n) std::swap(m, n);
    return m * kDim - m * (m - 1) / 2 + (n - m);
  }

  void eval(int m, int n, double x, double y, double& val, double grad[2], double hess[3]) const {
    val = 0.0;
    grad[0] = grad[1] = 0.0;
    hess[0] = hess[1] = hess[2] = 0.0;
    for (const TrigTerm& t : terms[slot(m, n)]) {
      const double ph = t.mx * x + t.my * y;
      const double v = t.c * std::cos(ph) + t.s * std::sin(ph);
      const double d = -t.c * std::sin(ph) + t.s * std::cos(ph);
      val += v;
      grad[0] += t.mx * d;
      grad[1] += t.my * d;
      hess[0] -= t.mx * t.mx * v;
      hess[1] -= t.mx * t.my * v;
      hess[2] -= t.my * t.my * v;
    }
  }
};

MetricJet apply_perturbation(const MetricJet& in, const PerturbationField& pf, double amp, double x, double y) {
  MetricJet out = in;
  for (int m = 0; m < kDim; ++m)
    for (int n = 0; n < kDim; ++n) {
      double v, gr[2], he[3];
      pf.eval(m, n, x, y, v, gr, he);
      const double f = 1.0 + amp * v;
      const double df[2] = {amp * gr[0], amp * gr[1]};
      const double d2f[3] = {amp * he[0], amp * he[1], amp * he[2]};
      out.g(m, n) = in.g(m, n) * f;
      for (int c = 0; c < 2; ++c) out.dg[c](m, n) = in.dg[c](m, n) * f + in.g(m, n) * df[c];
      if (in.has_hessian) {
        const int pairs[3][2] = {{0, 0}, {0, 1}, {1, 1}};
        for (int k = 0; k < 3; ++k) {
          const int a = pairs[k][0];
          const int b = pairs[k][1];
          out.d2g[k](m, n) = in.d2g[k](m, n) * f + in.dg[a](m, n) * df[b] + in.dg[b](m, n) * df[a] +
                             in.g(m, n) * d2f[k];
        }
      }
    }
  return out;
}

}  // namespace

MetricField perturb_metric(const MetricField& metric, std::uint64_t seed, double amplitude) {
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) throw InvalidArgument("perturbation amplitude must be >= 0");
  auto pf = std::make_shared<PerturbationField>();
  std::mt19937_64 rng(seed);
  auto draw = [&]() { return 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0; };
  for (auto& list : pf->terms) {
    for (int mx = -1; mx <= 1; ++mx)
      for (int my = -1; my <= 1; ++my) list.push_back({double(mx), double(my), draw(), draw()});
    double total = 0.0;
    for (const auto& t : list) total += std::abs(t.c) + std::abs(t.s);
    for (auto& t : list) {
      t.c /= total;
      t.s /= total;
    }
  }
  const GridChart& c = *metric.chart;
  MetricField out = metric;
  out.perturbed = true;
  for (std::size_t p = 0; p < c.size(); ++p) {
    MetricJet jet;
    jet.g = metric.g[p];
    jet.dg = metric.dg[p];
    jet.has_hessian = metric.has_hessian;
    if (metric.has_hessian) jet.d2g = metric.d2g[p];
    const MetricJet pj = apply_perturbation(jet, *pf, amplitude, c.kx(c.i_of(p)), c.ky(c.j_of(p)));
    out.g[p] = pj.g;
    out.dg[p] = pj.dg;
    if (metric.has_hessian) out.d2g[p] = pj.d2g;
    out.g_inv[p] = invert_spd(out.g[p], point_label(c, p));
  }
  if (metric.evaluator) {
    auto ev = metric.evaluator;
    out.evaluator = [ev, pf, amplitude](double x, double y) { return apply_perturbation(ev(x, y), *pf, amplitude, x, y); };
  }
  return out;
}

double inverse_residual(const MetricField& metric) {
  double worst = 0.0;
  for (std::size_t p = 0; p < metric.size(); ++p) {
    worst = std::max(worst, (metric.g[p] * metric.g_inv[p] - Mat4::Identity()).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace kkhol
