#include "kkhol/torsion.hpp"

#include "kkhol/errors.hpp"

#include <cmath>

namespace kkhol {

namespace {

int slot_of_sorted(int a, int b, int c) {
  if (a == 0 && b == 1 && c == 2) return 0;
  if (a == 0 && b == 1 && c == 3) return 1;
  if (a == 0 && b == 2 && c == 3) return 2;
  return 3;  // (1, 2, 3)
}

double f_component(double f01, int a, int b) {
  if (a == 0 && b == 1) return f01;
  if (a == 1 && b == 0) return -f01;
  return 0.0;
}

Vec4 one_form(const std::array<double, 2>& base, int fibre_slot, double epsilon, TorsionVariant v) {
  Vec4 a = Vec4::Zero();
  if (v == TorsionVariant::pulled_back) {
    a[0] = base[0];
    a[1] = base[1];
  } else {
    a[0] = epsilon * base[0];
    a[1] = epsilon * base[1];
    a[fibre_slot] = 1.0;
  }
  return a;
}

ThreeForm add(const ThreeForm& x, const ThreeForm& y) {
  return {x[0] + y[0], x[1] + y[1], x[2] + y[2], x[3] + y[3]};
}

}  // namespace

std::string to_string(TorsionVariant v) { return v == TorsionVariant::theta ? "theta" : "pulled-back"; }

TorsionVariant parse_torsion_variant(const std::string& s) {
  if (s == "theta") return TorsionVariant::theta;
  if (s == "pulled-back" || s == "pulled_back") return TorsionVariant::pulled_back;
  throw InvalidArgument("unknown torsion variant '" + s + "' (expected pulled-back or theta)");
}

double three_form_component(const ThreeForm& t, int a, int b, int c) {
  if (a == b || b == c || a == c) return 0.0;
  int idx[3] = {a, b, c};
  double sign = 1.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 2 - i; ++j)
      if (idx[j] > idx[j + 1]) {
        std::swap(idx[j], idx[j + 1]);
        sign = -sign;
      }
  return sign * t[slot_of_sorted(idx[0], idx[1], idx[2])];
}

ThreeForm wedge_two_one(double f01, const Vec4& a) {
  const int triples[4][3] = {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};
  ThreeForm t{};
  for (int k = 0; k < 4; ++k) {
    const int x = triples[k][0], y = triples[k][1], z = triples[k][2];
    t[k] = f_component(f01, x, y) * a[z] + f_component(f01, y, z) * a[x] + f_component(f01, z, x) * a[y];
  }
  return t;
}

TorsionJet torsion_jet(const SectorJets& jets, TorsionVariant variant, double epsilon) {
  TorsionJet out;
  const FormJet* sectors[2] = {&jets.plus, &jets.minus};
  for (int s = 0; s < 2; ++s) {
    const FormJet& j = *sectors[s];
    const int fibre = kPhiPlus + s;
    const Vec4 a = one_form(j.value, fibre, epsilon, variant);
    out.t = add(out.t, wedge_two_one(j.curvature(), a));
    for (int c = 0; c < 2; ++c) {
      // d_c (F ^ a) = (d_c F) ^ a + F ^ (d_c a); fibre entries of a are constant.
      const double dF = j.hess[c][0][1] - j.hess[c][1][0];
      Vec4 da = one_form(j.grad[c], fibre, epsilon, variant);
      da[kPhiPlus] = da[kPhiMinus] = 0.0;
      out.dt[c] = add(out.dt[c], add(wedge_two_one(dF, a), wedge_two_one(j.curvature(), da)));
    }
  }
  return out;
}

TorsionField torsion_form(const GaugeTexture& tex, TorsionVariant variant, double epsilon) {
  return torsion_form(std::make_shared<const GaugeTexture>(tex), variant, epsilon);
}

TorsionField torsion_form(std::shared_ptr<const GaugeTexture> texture, TorsionVariant variant, double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw InvalidArgument("torsion_form: epsilon must lie in [0, 1]");
  const GaugeTexture& tex = *texture;
  const GridChart& c = *tex.chart;
  TorsionField out;
  out.chart = tex.chart;
  out.texture = texture;
  out.variant = variant;
  out.epsilon = epsilon;
  out.seam_marked = tex.fundamental_domain;
  out.t.resize(c.size());
  out.dt.resize(c.size());
  if (tex.analytic()) {
    for (std::size_t p = 0; p < c.size(); ++p) {
      const TorsionJet j = torsion_jet(tex.jets_at(p), variant, epsilon);
      out.t[p] = j.t;
      out.dt[p] = j.dt;
    }
    out.evaluator = [texture, variant, epsilon](double x, double y) {
      return torsion_jet(texture->jets_at(x, y), variant, epsilon);
    };
    return out;
  }
  for (std::size_t p = 0; p < c.size(); ++p) {
    ThreeForm t{};
    const std::array<double, 2>* a[2] = {&tex.a_plus.data[p], &tex.a_minus.data[p]};
    const double f[2] = {tex.f_plus.data[p][0], tex.f_minus.data[p][0]};
    for (int s = 0; s < 2; ++s) t = add(t, wedge_two_one(f[s], one_form(*a[s], kPhiPlus + s, epsilon, variant)));
    out.t[p] = t;
  }
  for (std::size_t p = 0; p < c.size(); ++p) {
    const int i = c.i_of(p);
    const int j = c.j_of(p);
    for (int k = 0; k < 4; ++k) {
      out.dt[p][0][k] = (out.t[c.index(i + 1, j)][k] - out.t[c.index(i - 1, j)][k]) / (2.0 * c.hx());
      out.dt[p][1][k] = (out.t[c.index(i, j + 1)][k] - out.t[c.index(i, j - 1)][k]) / (2.0 * c.hy());
    }
  }
  return out;
}

namespace {

ConnectionJet add_contorsion(const ConnectionJet& lc, const TorsionJet& t, const Mat4& g_inv,
                             const std::array<Mat4, 2>& dg) {
  ConnectionJet out = lc;
  std::array<Mat4, 2> dginv;
  for (int c = 0; c < 2; ++c) dginv[c] = -g_inv * dg[c] * g_inv;
  for (int m = 0; m < kDim; ++m)
    for (int n = 0; n < kDim; ++n)
      for (int r = 0; r < kDim; ++r) {
        double k = 0.0;
        double dk[2] = {0.0, 0.0};
        for (int s = 0; s < kDim; ++s) {
          const double tv = three_form_component(t.t, n, r, s);
          k += g_inv(m, s) * tv;
          for (int c = 0; c < 2; ++c) {
            dk[c] += dginv[c](m, s) * tv + g_inv(m, s) * three_form_component(t.dt[c], n, r, s);
          }
        }
        out.gamma(m, n, r) += 0.5 * k;
        out.dgamma[0](m, n, r) += 0.5 * dk[0];
        out.dgamma[1](m, n, r) += 0.5 * dk[1];
      }
  return out;
}

}  // namespace

ConnectionField connection_with_torsion(const ConnectionField& lc, const TorsionField& t,
                                        const MetricField& metric) {
  if (*lc.chart != *t.chart || *lc.chart != *metric.chart) {
    throw InvalidArgument("connection_with_torsion: inputs live on different charts");
  }
  ConnectionField out;
  out.chart = lc.chart;
  out.kind = ConnectionKind::with_torsion;
  out.seam_marked = lc.seam_marked || t.seam_marked;
  out.gamma.resize(lc.size());
  out.dgamma.resize(lc.size());
  for (std::size_t p = 0; p < lc.size(); ++p) {
    ConnectionJet j{lc.gamma[p], lc.dgamma[p]};
    j = add_contorsion(j, TorsionJet{t.t[p], t.dt[p]}, metric.g_inv[p], metric.dg[p]);
    out.gamma[p] = j.gamma;
    out.dgamma[p] = j.dgamma;
  }
  if (lc.evaluator && t.evaluator && metric.evaluator) {
    auto lev = lc.evaluator;
    auto tev = t.evaluator;
    auto mev = metric.evaluator;
    out.evaluator = [lev, tev, mev](double x, double y) {
      const MetricJet mj = mev(x, y);
      return add_contorsion(lev(x, y), tev(x, y), mj.g.inverse(), mj.dg);
    };
  }
  return out;
}

double torsion_recovery_residual(const ConnectionField& conn, const MetricField& metric,
                                 const TorsionField& reference) {
  if (*conn.chart != *metric.chart || *conn.chart != *reference.chart) {
    throw InvalidArgument("torsion recovery: chart mismatch");
  }
  const GridChart& c = *conn.chart;
  const bool skip_seam = conn.seam_marked || reference.seam_marked;
  double worst = 0.0;
  for (std::size_t p = 0; p < c.size(); ++p) {
    if (skip_seam && c.on_seam(p)) continue;
    const Mat4& g = metric.g[p];
    for (int n = 0; n < kDim; ++n)
      for (int r = 0; r < kDim; ++r)
        for (int m = 0; m < kDim; ++m) {
          double low = 0.0;
          for (int l = 0; l < kDim; ++l) low += g(m, l) * 0.5 * (conn.gamma[p](l, n, r) - conn.gamma[p](l, r, n));
          worst = std::max(worst, std::abs(low - 0.5 * reference.component(p, n, r, m)));
        }
  }
  return worst;
}

double nabla_lc_torsion_norm(const TorsionField& t, const ConnectionField& lc) {
  if (*t.chart != *lc.chart) throw InvalidArgument("nabla_lc_torsion_norm: chart mismatch");
  const GridChart& c = *t.chart;
  const bool skip_seam = t.seam_marked || lc.seam_marked;
  double worst = 0.0;
  for (std::size_t p = 0; p < c.size(); ++p) {
    if (skip_seam && c.on_seam(p)) continue;
    const Tensor3& G = lc.gamma[p];
    for (int l = 0; l < kDim; ++l)
      for (int m = 0; m < kDim; ++m)
        for (int n = m + 1; n < kDim; ++n)
          for (int r = n + 1; r < kDim; ++r) {
            double v = l < 2 ? three_form_component(t.dt[p][l], m, n, r) : 0.0;
            for (int s = 0; s < kDim; ++s) {
              v -= G(s, l, m) * t.component(p, s, n, r) + G(s, l, n) * t.component(p, m, s, r) +
                   G(s, l, r) * t.component(p, m, n, s);
            }
            worst = std::max(worst, std::abs(v));
          }
  }
  return worst;
}

}  // namespace kkhol
