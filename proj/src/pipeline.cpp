#include "kkhol/pipeline.hpp"

#include "kkhol/errors.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace kkhol {

namespace {

template <class F>
auto in_stage(const std::string& name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const InvalidArgument& e) {
    throw StageError(name, StageError::Kind::invalid_input, e.what());
  } catch (const DegenerateBandError& e) {
    throw StageError(name, StageError::Kind::invalid_input, e.what());
  } catch (const VariantError& e) {
    throw StageError(name, StageError::Kind::invalid_input, e.what());
  } catch (const std::exception& e) {
    throw StageError(name, StageError::Kind::computation, e.what());
  }
}

std::string num(double x) {
  std::ostringstream s;
  s << std::setprecision(12) << x;
  return s.str();
}

std::string join(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? ", " : "") + num(xs[i]);
  return out;
}

std::string eps_tag(double e) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << e;
  return s.str();
}

TorsionVariant other(TorsionVariant v) {
  return v == TorsionVariant::theta ? TorsionVariant::pulled_back : TorsionVariant::theta;
}

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::certified: return "certified";
    case Verdict::failed: return "failed";
    case Verdict::degenerate: return "degenerate";
  }
  return "unknown";
}

HolonomyCertificate run_certify(const Scenario& s) {
  in_stage("scenario", [&] {
    s.validate();
    return 0;
  });
  HolonomyCertificate cert;
  cert.scenario_name = s.name;
  cert.n_kx = s.n_kx;
  cert.n_ky = s.n_ky;
  cert.seed = s.seed;
  cert.variant = s.variant;
  cert.epsilons = s.epsilons;
  cert.tol = s.tol;
  cert.nullity_grid = s.nullity_grid;
  cert.perturb_amplitude = s.perturb_amplitude;

  auto tex = in_stage("texture", [&] { return std::make_shared<const GaugeTexture>(build_texture(s)); });
  cert.texture_label = tex->label;
  cert.texture_source = to_string(tex->source);
  const GridChart& chart = *tex->chart;

  cert.cohomology = in_stage("cohomology", [&] {
    return period_matrix(torsion_form(tex, TorsionVariant::theta, 1.0), s.tol.rank, s.tol.parallel);
  });
  cert.r = cert.cohomology.r;

  const auto points = all_points(chart);
  std::shared_ptr<const MetricField> last_metric;
  std::shared_ptr<const ConnectionField> last_conn;
  for (double eps : s.epsilons) {
    EpsilonRow row;
    row.epsilon = eps;
    const MetricField metric = in_stage("metric", [&] { return assemble_metric(tex, eps); });
    row.submersion = check_submersion(metric);
    row.inverse_residual = inverse_residual(metric);
    const ConnectionField lc = in_stage("levi-civita", [&] { return christoffel(metric); });
    row.lc_compatibility = metric_compatibility_residual(lc, metric);

    const TorsionField t_cert = in_stage("torsion", [&] { return torsion_form(tex, s.variant, eps); });
    const TorsionField t_other = in_stage("torsion", [&] { return torsion_form(tex, other(s.variant), eps); });
    const TorsionField& t_theta = s.variant == TorsionVariant::theta ? t_cert : t_other;
    const ConnectionField conn = in_stage("torsion connection", [&] { return connection_with_torsion(lc, t_cert, metric); });
    const ConnectionField conn_other =
        in_stage("torsion connection", [&] { return connection_with_torsion(lc, t_other, metric); });
    row.torsion_compatibility = metric_compatibility_residual(conn, metric);
    row.torsion_recovery = torsion_recovery_residual(conn, metric, t_cert);
    row.nabla_t_norm = nabla_lc_torsion_norm(t_theta, lc);

    row.span = in_stage("holonomy", [&] {
      return offdiag_span_dim(riemann_curvature(conn, metric, Frame::adapted), points, s.tol.rank);
    });
    row.span_other = in_stage("holonomy", [&] {
      return offdiag_span_dim(riemann_curvature(conn_other, metric, Frame::adapted), points, s.tol.rank);
    });

    row.nullity = in_stage("parallel forms", [&] {
      NullityOptions opts;
      opts.max_grid = s.nullity_grid;
      opts.null_tol = s.tol.null;
      return parallel_form_nullity(metric, lc, opts);
    });
    const CohomologyReport coh_eps = in_stage("cohomology", [&] {
      return period_matrix(torsion_form(tex, TorsionVariant::theta, eps), s.tol.rank, s.tol.parallel);
    });
    row.r = coh_eps.r;
    row.kernel = r_sharp(coh_eps, row.nullity, s.tol.rank);

    row.perturb_trials = s.perturb_trials;
    double pmin = HUGE_VAL;
    for (int k = 0; k < s.perturb_trials; ++k) {
      const double v = in_stage("perturbation", [&] {
        try {
          const MetricField pm = perturb_metric(metric, s.seed + static_cast<std::uint64_t>(k), s.perturb_amplitude);
          return nabla_lc_torsion_norm(t_theta, christoffel(pm));
        } catch (const FactorizationError&) {
          return -1.0;  // the multiplicative perturbation left the cone of metrics
        }
      });
      if (v < 0.0) {
        ++row.perturbed_indefinite;
        continue;
      }
      pmin = std::min(pmin, v);
      if (v > kNablaTPositiveFloor) ++row.perturbed_positive;
    }
    row.perturbed_nabla_t_min = pmin == HUGE_VAL ? 0.0 : pmin;
    if (row.perturbed_indefinite > 0) {
      cert.notes.push_back("eps = " + num(eps) + ": " + std::to_string(row.perturbed_indefinite) +
                           " perturbation trial(s) gave an indefinite metric and were skipped");
    }
    cert.rows.push_back(std::move(row));
    last_metric = std::make_shared<const MetricField>(metric);
    last_conn = std::make_shared<const ConnectionField>(conn);
  }

  for (const std::string& spec : s.loops) {
    LoopRecord rec;
    rec.spec = spec;
    in_stage("loops", [&] {
      const LoopSpec loop = LoopSpec::parse(spec, chart);
      rec.phi_plus = loop_integral(*tex, Sector::plus, loop);
      rec.phi_minus = loop_integral(*tex, Sector::minus, loop);
      const TransportResult tr = parallel_transport_loop(*last_conn, *last_metric, loop);
      rec.transport_orthogonality = tr.orthogonality;
      rec.transport_deviation = tr.deviation;
      return 0;
    });
    cert.loops.push_back(rec);
  }

  // Certificate over eps > 0.
  bool any_positive = false;
  bool all_zero_bound = true;
  bool all_hold = true;
  int min_rs = 1 << 30, max_rs = -1, min_k = 1 << 30;
  for (const EpsilonRow& row : cert.rows) {
    if (row.epsilon <= 0.0) continue;
    any_positive = true;
    min_rs = std::min(min_rs, row.kernel.r_sharp);
    max_rs = std::max(max_rs, row.kernel.r_sharp);
    min_k = std::min(min_k, row.kernel.dim_kernel);
    if (row.kernel.r_sharp > 0) all_zero_bound = false;
    if (row.span.all_points_dim < row.kernel.r_sharp) all_hold = false;
  }
  if (!any_positive) {
    cert.verdict = Verdict::degenerate;
    cert.r_sharp = 0;
    cert.dim_kernel = cert.rows.empty() ? 0 : cert.rows.front().kernel.dim_kernel;
    cert.notes.push_back("no epsilon > 0 requested: nothing to certify");
  } else {
    cert.r_sharp = min_rs;
    cert.dim_kernel = min_k;
    if (min_rs != max_rs) cert.notes.push_back("r_sharp varies across eps > 0; the smallest value is reported");
    cert.verdict = all_zero_bound ? Verdict::degenerate : (all_hold ? Verdict::certified : Verdict::failed);
    if (all_zero_bound) cert.notes.push_back("r_sharp = 0: nothing to certify");
  }

  if (s.variant == TorsionVariant::pulled_back) {
    cert.notes.push_back(
        "torsion variant pulled-back: F^A with A a base one-form has three base legs on a 2-d base and "
        "vanishes identically, so the certified connection is Levi-Civita");
  } else {
    cert.notes.push_back(
        "torsion variant theta: T = F+ ^ Theta+ + F- ^ Theta- = F+ ^ dphi+ + F- ^ dphi- (independent of eps)");
  }
  cert.notes.push_back("periods and r always come from the theta torsion; nabla_T_norm is nabla^LC of the theta torsion");
  cert.notes.push_back("off-diagonal span: vertical x horizontal blocks of R(e_c, e_d) in the adapted orthonormal frame, all grid points");
  for (const EpsilonRow& row : cert.rows) {
    if (!row.kernel.note.empty()) cert.notes.push_back("eps " + num(row.epsilon) + ": " + row.kernel.note);
  }
  if (tex->source == TextureSource::bloch) {
    cert.notes.push_back("bloch texture is a two-band stand-in (QWZ d-vector), not a spin-orbit-coupled dressed band");
  }
  if (tex->fundamental_domain) {
    cert.notes.push_back("texture is fundamental-domain analytic: seam rings excluded from grid max-norms");
  }
  return cert;
}

HolonomyCertificate run_sweep(const Scenario& s) {
  if (s.epsilons.size() < 2) {
    throw StageError("scenario", StageError::Kind::invalid_input, "a sweep needs at least two epsilon values");
  }
  return run_certify(s);
}

void write_report(std::ostream& os, const HolonomyCertificate& c) {
  os << std::setprecision(15);
  os << "# holonomy certificate\n\n[scenario]\n"
     << "name = " << c.scenario_name << "\n"
     << "texture = " << c.texture_label << "\n"
     << "texture.source = " << c.texture_source << "\n"
     << "grid = " << c.n_kx << " x " << c.n_ky << "\n"
     << "seed = " << c.seed << "\n"
     << "torsion.variant = " << to_string(c.variant) << "\n"
     << "epsilons = " << join(c.epsilons) << "\n\n";

  const CohomologyReport& h = c.cohomology;
  os << "[cohomology]\n"
     << "basis = " << h.basis_note << "\n"
     << "c_plus = " << h.c_plus << "\n"
     << "c_minus = " << h.c_minus << "\n"
     << "lambda = " << (h.lambda ? num(*h.lambda) : std::string("undefined")) << "\n"
     << "r = " << h.r << "\n"
     << "chern_plus = " << h.chern_plus << "\n"
     << "chern_minus = " << h.chern_minus << "\n"
     << "chern_total = " << h.chern_total << "\n"
     << "curvature_parallel = " << (h.f_parallel ? "true" : "false") << "\n"
     << "curvature_parallel_deviation = " << h.f_parallel_deviation << "\n"
     << "sign_convention = " << kCurvatureSignConvention << "\n\n";

  for (const EpsilonRow& row : c.rows) {
    os << "[epsilon " << num(row.epsilon) << "]\n"
       << "measured_offdiag_dim = " << row.span.all_points_dim << "\n"
       << "per_point_max_dim = " << row.span.per_point_max << "\n"
       << "offdiag_singular_values = " << join({row.span.singular_values.begin(), row.span.singular_values.end()}) << "\n"
       << "other_variant_offdiag_dim = " << row.span_other.all_points_dim << "\n"
       << "nullity_fibre_oneforms = " << row.nullity.nullity_fibre_oneforms << "\n"
       << "nullity_base_twoforms = " << row.nullity.nullity_base_twoforms << "\n"
       << "nullity_grid = " << row.nullity.grid_n_kx << " x " << row.nullity.grid_n_ky << "\n"
       << "nullity_residual_spectrum = " << join(row.nullity.residual_spectrum) << "\n"
       << "nullity_threshold = " << row.nullity.threshold << "\n"
       << "nullity_separation = " << row.nullity.separation_below << " below, " << row.nullity.separation_above
       << " above\n"
       << "r = " << row.r << "\n"
       << "dim_kernel = " << row.kernel.dim_kernel << "\n"
       << "r_sharp = " << row.kernel.r_sharp << "\n"
       << "nabla_T_norm = " << row.nabla_t_norm << "\n"
       << "perturbed_nabla_T_positive = " << row.perturbed_positive << " / " << row.perturb_trials << "\n"
       << "perturbed_nabla_T_min = " << row.perturbed_nabla_t_min << "\n"
       << "perturbed_indefinite = " << row.perturbed_indefinite << "\n"
       << "lc_metric_compatibility = " << row.lc_compatibility << "\n"
       << "torsion_metric_compatibility = " << row.torsion_compatibility << "\n"
       << "torsion_recovery = " << row.torsion_recovery << "\n"
       << "submersion_violation = " << row.submersion.max_violation() << "\n"
       << "inverse_residual = " << row.inverse_residual << "\n\n";
  }

  if (!c.loops.empty()) {
    os << "[loops]\n";
    const double eps = c.epsilons.back();
    for (const LoopRecord& l : c.loops) {
      os << l.spec << " = phi_plus " << l.phi_plus << ", phi_minus " << l.phi_minus << ", wrapped "
         << wrap_phase(l.phi_plus) << ", " << wrap_phase(l.phi_minus) << ", transport(eps " << num(eps)
         << ") orthogonality " << l.transport_orthogonality << ", deviation " << l.transport_deviation << "\n";
    }
    os << "\n";
  }

  os << "[certificate]\n"
     << "r = " << c.r << "\n"
     << "dim_kernel = " << c.dim_kernel << "\n"
     << "r_sharp = " << c.r_sharp << "\n"
     << "measured_offdiag_dim = ";
  for (std::size_t i = 0; i < c.rows.size(); ++i) os << (i ? ", " : "") << c.rows[i].span.all_points_dim;
  os << "\n"
     << "verdict = " << to_string(c.verdict) << "\n\n";

  os << "[tolerances]\n"
     << "rank_tol = " << c.tol.rank << " (relative; absolute floor " << kRankAbsFloor << ")\n"
     << "null_tol = " << c.tol.null << " (relative to the largest singular value)\n"
     << "gap_tol = " << c.tol.gap << "\n"
     << "chern_tol = " << c.tol.chern << "\n"
     << "parallel_tol = " << c.tol.parallel << "\n"
     << "transport_tol = " << c.tol.transport << "\n"
     << "transport_steps = " << kTransportSteps << "\n"
     << "nullity_max_grid = " << c.nullity_grid << "\n"
     << "perturbation_amplitude = " << c.perturb_amplitude << "\n\n";

  os << "[notes]\n";
  for (const std::string& n : c.notes) os << "- " << n << "\n";
}

void write_sweep_csv(std::ostream& os, const HolonomyCertificate& c) {
  os << std::setprecision(15);
  os << "epsilon,measured_offdiag_dim,per_point_max_dim,other_variant_dim,nullity_fibre,nullity_base,r,dim_kernel,"
        "r_sharp,nabla_T_norm,perturbed_positive,perturb_trials,holds\n";
  for (const EpsilonRow& r : c.rows) {
    const bool holds = r.span.all_points_dim >= r.kernel.r_sharp;
    os << r.epsilon << ',' << r.span.all_points_dim << ',' << r.span.per_point_max << ','
       << r.span_other.all_points_dim << ',' << r.nullity.nullity_fibre_oneforms << ','
       << r.nullity.nullity_base_twoforms << ',' << r.r << ',' << r.kernel.dim_kernel << ',' << r.kernel.r_sharp
       << ',' << r.nabla_t_norm << ',' << r.perturbed_positive << ',' << r.perturb_trials << ','
       << (holds ? "yes" : "no") << '\n';
  }
}

void write_outputs(const Scenario& s, const HolonomyCertificate& cert) {
  namespace fs = std::filesystem;
  fs::create_directories(s.out_dir);
  {
    std::ofstream f(fs::path(s.out_dir) / "certificate.report");
    write_report(f, cert);
  }
  {
    std::ofstream f(fs::path(s.out_dir) / "sweep.csv");
    write_sweep_csv(f, cert);
  }
  if (!s.dump_fields) return;
  const fs::path dir = fs::path(s.out_dir) / "fields";
  fs::create_directories(dir);
  auto tex = std::make_shared<const GaugeTexture>(build_texture(s));
  const GridChart& chart = *tex->chart;
  for (double eps : s.epsilons) {
    const MetricField m = assemble_metric(tex, eps);
    const TorsionField t = torsion_form(tex, s.variant, eps);
    const ConnectionField conn = connection_with_torsion(christoffel(m), t, m);
    std::vector<double> gv, cv, tv;
    for (std::size_t p = 0; p < chart.size(); ++p) {
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) gv.push_back(m.g[p](a, b));
      cv.insert(cv.end(), conn.gamma[p].v.begin(), conn.gamma[p].v.end());
      tv.insert(tv.end(), t.t[p].begin(), t.t[p].end());
    }
    const std::string tag = eps_tag(eps);
    std::ofstream fm(dir / ("metric_eps" + tag + ".txt"));
    write_field_dump(fm, chart, {"metric g_mn", 2, 0, 16}, gv, m.seam_marked);
    std::ofstream fc(dir / ("connection_eps" + tag + ".txt"));
    write_field_dump(fc, chart, {"connection Gamma^m_nr (" + to_string(conn.kind) + ")", 2, 1, 64}, cv,
                     conn.seam_marked);
    std::ofstream ft(dir / ("torsion_eps" + tag + ".txt"));
    write_field_dump(ft, chart, {"torsion T_012 T_013 T_023 T_123 (" + to_string(t.variant) + ")", 3, 0, 4}, tv,
                     t.seam_marked);
  }
}

}  // namespace kkhol
