#include "kkhol/gauge.hpp"

#include "kkhol/errors.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

namespace kkhol {

namespace {

constexpr double kPi = std::numbers::pi;

double unit_uniform(std::mt19937_64& rng) {
  // 53 random mantissa bits; independent of the library's distribution code.
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void fill_samples(GaugeTexture& tex) {
  const auto& chart = *tex.chart;
  tex.a_plus = OneFormField(tex.chart);
  tex.a_minus = OneFormField(tex.chart);
  tex.f_plus = TwoFormField(tex.chart);
  tex.f_minus = TwoFormField(tex.chart);
  for (std::size_t p = 0; p < chart.size(); ++p) {
    const double x = chart.kx(chart.i_of(p));
    const double y = chart.ky(chart.j_of(p));
    const FormJet jp = tex.analytic_plus(x, y);
    const FormJet jm = tex.analytic_minus(x, y);
    tex.a_plus.data[p] = jp.value;
    tex.a_minus.data[p] = jm.value;
    tex.f_plus.data[p][0] = jp.curvature();
    tex.f_minus.data[p][0] = jm.curvature();
  }
  for (auto* f : {&tex.a_plus, &tex.a_minus}) f->seam_marked = tex.fundamental_domain;
  // Curvatures of the analytic textures are globally well defined.
  tex.f_plus.seam_marked = false;
  tex.f_minus.seam_marked = false;
}

FormJet zero_jet(double, double) { return FormJet{}; }

FormJet sampled_jet(const OneFormField& a, std::size_t p) {
  const auto& chart = *a.chart;
  const int i = chart.i_of(p);
  const int j = chart.j_of(p);
  FormJet jet;
  jet.value = a.data[p];
  for (int s = 0; s < 2; ++s) {
    jet.grad[0][s] = (a.data[chart.index(i + 1, j)][s] - a.data[chart.index(i - 1, j)][s]) / (2.0 * chart.hx());
    jet.grad[1][s] = (a.data[chart.index(i, j + 1)][s] - a.data[chart.index(i, j - 1)][s]) / (2.0 * chart.hy());
  }
  return jet;
}

struct Spinor {
  std::complex<double> up;
  std::complex<double> down;
};

Spinor band_eigenvector(const Eigen::Vector3d& d, Band band) {
  const double dx = d.x();
  const double dy = d.y();
  const double dz = d.z();
  const double mod = d.norm();
  const double rho2 = dx * dx + dy * dy;
  // |d| + dz without cancellation when dz < 0.
  const double s = dz >= 0.0 ? mod + dz : rho2 / (mod - dz);
  Spinor u;
  if (band == Band::lower) {
    u = {std::complex<double>(dx, -dy), std::complex<double>(-s, 0.0)};
  } else {
    u = {std::complex<double>(s, 0.0), std::complex<double>(dx, dy)};
  }
  const double norm = std::sqrt(std::norm(u.up) + std::norm(u.down));
  if (!(norm > 0.0)) {
    // d along -z exactly: H = -|d| sigma_z.
    return band == Band::lower ? Spinor{1.0, 0.0} : Spinor{0.0, 1.0};
  }
  u.up /= norm;
  u.down /= norm;
  return u;
}

std::complex<double> overlap(const Spinor& a, const Spinor& b) {
  return std::conj(a.up) * b.up + std::conj(a.down) * b.down;
}

}  // namespace

FormJet FormJet::scaled(double s) const {
  FormJet out = *this;
  for (auto& x : out.value) x *= s;
  for (auto& row : out.grad)
    for (auto& x : row) x *= s;
  for (auto& m : out.hess)
    for (auto& row : m)
      for (auto& x : row) x *= s;
  return out;
}

std::string to_string(TextureSource s) {
  switch (s) {
    case TextureSource::flat: return "flat";
    case TextureSource::counterflow: return "counterflow";
    case TextureSource::bloch: return "bloch";
    case TextureSource::custom_sampled: return "custom-sampled";
    case TextureSource::custom_analytic: return "custom-analytic";
  }
  return "unknown";
}

SectorJets GaugeTexture::jets_at(std::size_t p) const {
  if (analytic()) {
    const double x = chart->kx(chart->i_of(p));
    const double y = chart->ky(chart->j_of(p));
    return jets_at(x, y);
  }
  return SectorJets{sampled_jet(a_plus, p), sampled_jet(a_minus, p), false};
}

SectorJets GaugeTexture::jets_at(double kx, double ky) const {
  if (!analytic()) throw InvalidArgument("off-grid jets requested from a sampled texture");
  return SectorJets{analytic_plus(kx, ky), analytic_minus(kx, ky), true};
}

GaugeTexture make_analytic_texture(std::shared_ptr<const GridChart> chart, AnalyticForm plus,
                                   AnalyticForm minus, std::string label, bool fundamental_domain,
                                   bool quantized) {
  GaugeTexture tex;
  tex.chart = std::move(chart);
  tex.analytic_plus = std::move(plus);
  tex.analytic_minus = std::move(minus);
  tex.label = std::move(label);
  tex.fundamental_domain = fundamental_domain;
  tex.quantized = quantized;
  tex.source = TextureSource::custom_analytic;
  fill_samples(tex);
  return tex;
}

GaugeTexture make_flat_texture(std::shared_ptr<const GridChart> chart) {
  auto tex = make_analytic_texture(std::move(chart), zero_jet, zero_jet, "flat", false, true);
  tex.source = TextureSource::flat;
  return tex;
}

GaugeTexture make_counterflow_texture(std::shared_ptr<const GridChart> chart) {
  constexpr double twopi = 2.0 * kPi;
  if (std::abs(chart->period_kx() - twopi) > 1e-12 || std::abs(chart->period_ky() - twopi) > 1e-12) {
    throw InvalidArgument("counterflow texture requires periods 2*pi");
  }
  constexpr double c = 1.0 / (4.0 * kPi);
  auto plus = [](double x, double y) {
    FormJet j;
    j.value = {-c * y, c * x};
    j.grad[0] = {0.0, c};   // d_x A
    j.grad[1] = {-c, 0.0};  // d_y A
    return j;
  };
  auto minus = [plus](double x, double y) { return plus(x, y).scaled(-1.0); };
  auto tex = make_analytic_texture(std::move(chart), plus, minus, "counterflow", true, true);
  tex.source = TextureSource::counterflow;
  return tex;
}

GaugeTexture make_sampled_texture(std::shared_ptr<const GridChart> chart, OneFormField a_plus,
                                  OneFormField a_minus, std::string label) {
  if (*a_plus.chart != *chart || *a_minus.chart != *chart) {
    throw InvalidArgument("sampled texture: one-forms live on a different chart");
  }
  GaugeTexture tex;
  tex.chart = std::move(chart);
  tex.a_plus = std::move(a_plus);
  tex.a_minus = std::move(a_minus);
  tex.f_plus = curvature_2form(tex.a_plus);
  tex.f_minus = curvature_2form(tex.a_minus);
  tex.fundamental_domain = tex.a_plus.seam_marked || tex.a_minus.seam_marked;
  tex.source = TextureSource::custom_sampled;
  tex.label = std::move(label);
  return tex;
}

GaugeTexture sampled_copy(const GaugeTexture& tex) {
  GaugeTexture out = tex;
  out.analytic_plus = nullptr;
  out.analytic_minus = nullptr;
  if (out.source != TextureSource::bloch) out.source = TextureSource::custom_sampled;
  out.label = tex.label + " (sampled)";
  return out;
}

GaugeTexture make_fourier_texture(std::shared_ptr<const GridChart> chart, const FourierTextureSpec& spec) {
  if (spec.modes < 0) throw InvalidArgument("fourier texture: modes must be >= 0");
  struct Term {
    double mx, my, c, s;
  };
  std::mt19937_64 rng(spec.seed);
  auto draw = [&]() { return 2.0 * unit_uniform(rng) - 1.0; };
  // terms[sector][component]
  std::array<std::array<std::vector<Term>, 2>, 2> terms;
  const int m = spec.modes;
  const double norm = spec.amplitude / std::max(1, (2 * m + 1) * (2 * m + 1));
  for (auto& sector : terms)
    for (auto& comp : sector)
      for (int mx = -m; mx <= m; ++mx)
        for (int my = -m; my <= m; ++my) comp.push_back({double(mx), double(my), norm * draw(), norm * draw()});

  auto make = [](std::array<std::vector<Term>, 2> comps, double q) {
    return [comps = std::move(comps), q](double x, double y) {
      FormJet j;
      const double c = q / (4.0 * kPi);
      j.value = {-c * y, c * x};
      j.grad[0][1] = c;
      j.grad[1][0] = -c;
      for (int i = 0; i < 2; ++i) {
        for (const Term& t : comps[i]) {
          const double ph = t.mx * x + t.my * y;
          const double cs = std::cos(ph);
          const double sn = std::sin(ph);
          const double val = t.c * cs + t.s * sn;
          const double der = -t.c * sn + t.s * cs;  // d/dph
          const double k[2] = {t.mx, t.my};
          j.value[i] += val;
          for (int a = 0; a < 2; ++a) {
            j.grad[a][i] += k[a] * der;
            for (int b = 0; b < 2; ++b) j.hess[a][b][i] += -k[a] * k[b] * val;
          }
        }
      }
      return j;
    };
  };
  const bool nonperiodic = spec.chern_plus != 0 || spec.chern_minus != 0;
  std::ostringstream label;
  label << "fourier(seed=" << spec.seed << ",modes=" << spec.modes << ",amplitude=" << spec.amplitude
        << ",chern=" << spec.chern_plus << "/" << spec.chern_minus << ")";
  return make_analytic_texture(std::move(chart), make(terms[0], spec.chern_plus),
                               make(terms[1], spec.chern_minus), label.str(), nonperiodic, nonperiodic);
}

GaugeTexture add_exact_form(const GaugeTexture& tex, const ScalarField& chi) {
  if (*chi.chart != *tex.chart) throw InvalidArgument("add_exact_form: chart mismatch");
  const auto dx = partial_derivative(chi, Axis::kx);
  const auto dy = partial_derivative(chi, Axis::ky);
  // F, the lattice fluxes and the quantization claim are gauge invariant and
  // carried over unchanged; only A moves.
  GaugeTexture out = sampled_copy(tex);
  for (std::size_t p = 0; p < chi.size(); ++p) {
    for (auto* a : {&out.a_plus, &out.a_minus}) {
      a->data[p][0] += dx.data[p][0];
      a->data[p][1] += dy.data[p][0];
    }
  }
  out.label = tex.label + " + d(chi)";
  return out;
}

BlochTexture qwz_texture(double mass, Band band) {
  BlochTexture t;
  t.d_vector = [mass](double x, double y) {
    return Eigen::Vector3d(std::sin(x), std::sin(y), mass + std::cos(x) + std::cos(y));
  };
  t.band = band;
  t.parameters["m"] = mass;
  std::ostringstream label;
  label << "bloch qwz m=" << mass << " band=" << (band == Band::lower ? "lower" : "upper")
        << " (two-band stand-in texture)";
  t.label = label.str();
  return t;
}

GaugeTexture bloch_berry_texture(const BlochTexture& bt, std::shared_ptr<const GridChart> chart,
                                 std::array<double, 2> weights, double gap_tol) {
  const auto& c = *chart;
  std::vector<Spinor> u(c.size());
  for (std::size_t p = 0; p < c.size(); ++p) {
    const double x = c.kx(c.i_of(p));
    const double y = c.ky(c.j_of(p));
    const Eigen::Vector3d d = bt.d_vector(x, y);
    if (!(d.norm() >= gap_tol)) {
      std::ostringstream msg;
      msg << "degenerate band: |d| = " << d.norm() << " < gap_tol at grid point (" << c.i_of(p) << ", "
          << c.j_of(p) << ") k = (" << x << ", " << y << ")";
      throw DegenerateBandError(msg.str());
    }
    u[p] = band_eigenvector(d, bt.band);
  }
  auto link = [&](int i, int j, int di, int dj) {
    const auto z = overlap(u[c.index(i, j)], u[c.index(i + di, j + dj)]);
    return z / std::abs(z);
  };
  OneFormField a(chart);
  TwoFormField f(chart);
  std::vector<double> fluxes(c.size());
  for (std::size_t p = 0; p < c.size(); ++p) {
    const int i = c.i_of(p);
    const int j = c.j_of(p);
    const auto ux = link(i, j, 1, 0);
    const auto uy = link(i, j, 0, 1);
    // A = i<u|du>  =>  U = exp(-i A h).
    a.data[p] = {-std::arg(ux) / c.hx(), -std::arg(uy) / c.hy()};
    const auto plaquette = ux * link(i + 1, j, 0, 1) * std::conj(link(i, j + 1, 1, 0)) * std::conj(uy);
    fluxes[p] = -std::arg(plaquette);
    f.data[p][0] = fluxes[p] / (c.hx() * c.hy());
  }
  GaugeTexture tex;
  tex.chart = chart;
  tex.source = TextureSource::bloch;
  tex.label = bt.label;
  tex.a_plus = a;
  tex.a_minus = a;
  tex.f_plus = f;
  tex.f_minus = f;
  for (std::size_t p = 0; p < c.size(); ++p) {
    for (int s = 0; s < 2; ++s) {
      tex.a_plus.data[p][s] *= weights[0];
      tex.a_minus.data[p][s] *= weights[1];
    }
    tex.f_plus.data[p][0] *= weights[0];
    tex.f_minus.data[p][0] *= weights[1];
  }
  tex.lattice = LatticeFlux{pairwise_sum(fluxes), weights};
  tex.quantized = true;
  return tex;
}

TwoFormField curvature_2form(const OneFormField& a) {
  TwoFormField f(a.chart);
  f.seam_marked = a.seam_marked;
  const auto dxay = partial_derivative(a, 1, Axis::kx);
  const auto dyax = partial_derivative(a, 0, Axis::ky);
  for (std::size_t p = 0; p < a.size(); ++p) f.data[p][0] = dxay.data[p][0] - dyax.data[p][0];
  return f;
}

namespace {

ChernResult finish_chern(double flux, bool claim_quantized, double chern_tol) {
  ChernResult r;
  r.raw_flux = flux;
  const double q = flux / (2.0 * kPi);
  r.integer = std::lround(q);
  r.deviation = std::abs(q - static_cast<double>(r.integer));
  if (claim_quantized && r.deviation > chern_tol) {
    std::ostringstream msg;
    msg << "Chern quantization failure: flux/2pi = " << q << " deviates from " << r.integer << " by "
        << r.deviation << " > chern_tol " << chern_tol;
    throw QuantizationError(msg.str());
  }
  return r;
}

}  // namespace

ChernResult chern_number(const TwoFormField& f, bool claim_quantized, double chern_tol) {
  const auto& c = *f.chart;
  std::vector<double> w(f.size());
  for (std::size_t p = 0; p < f.size(); ++p) w[p] = f.data[p][0] * c.hx() * c.hy();
  return finish_chern(pairwise_sum(w), claim_quantized, chern_tol);
}

ChernResult chern_number(const GaugeTexture& tex, Sector sector, double chern_tol) {
  if (tex.lattice) {
    const double w = tex.lattice->weights[sector == Sector::plus ? 0 : 1];
    const bool integral_weight = std::abs(w - std::round(w)) == 0.0;
    return finish_chern(w * tex.lattice->band_phase_sum, integral_weight, chern_tol);
  }
  return chern_number(tex.f(sector), tex.quantized, chern_tol);
}

}  // namespace kkhol
