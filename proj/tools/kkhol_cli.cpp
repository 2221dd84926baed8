#include "kkhol/errors.hpp"
#include "kkhol/pipeline.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <iostream>
#include <numbers>

namespace {

using namespace kkhol;

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitInvalid = 2;

struct Overrides {
  int grid = 0;
  std::vector<std::string> epsilon;
  std::string epsilon_sweep;
  std::string variant;
  std::string out;
  std::string seed;
  bool dump_fields = false;
  std::vector<std::string> loops;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--grid", o.grid, "points per momentum direction (N x N)");
  cmd->add_option("--epsilon", o.epsilon, "epsilon value(s), comma separated or repeated");
  cmd->add_option("--epsilon-sweep", o.epsilon_sweep, "start:stop:count");
  cmd->add_option("--torsion-variant", o.variant, "pulled-back | theta");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--seed", o.seed, "seed for the perturbation harness (u64)");
  cmd->add_flag("--dump-fields", o.dump_fields, "write metric, connection and torsion field dumps");
  cmd->add_option("--loop", o.loops, "gamma1[:y0] | gamma2[:x0] | circle:cx,cy,r | rect:x0,y0,x1,y1 | poly:...");
}

void apply(Scenario& s, const Overrides& o) {
  if (o.grid != 0) s.n_kx = s.n_ky = o.grid;
  if (!o.epsilon.empty()) {
    s.epsilons.clear();
    for (const auto& e : o.epsilon) {
      const auto v = parse_real_list(e);
      s.epsilons.insert(s.epsilons.end(), v.begin(), v.end());
    }
  }
  if (!o.epsilon_sweep.empty()) s.epsilons = parse_epsilon_sweep(o.epsilon_sweep);
  if (!o.variant.empty()) s.variant = parse_torsion_variant(o.variant);
  if (!o.out.empty()) s.out_dir = o.out;
  if (!o.seed.empty()) {
    if (o.seed.find_first_not_of("0123456789") != std::string::npos) {
      throw InvalidArgument("--seed expects an unsigned 64-bit integer");
    }
    try {
      s.seed = std::stoull(o.seed);
    } catch (const std::exception&) {
      throw InvalidArgument("--seed expects an unsigned 64-bit integer");
    }
  }
  if (o.dump_fields) s.dump_fields = true;
  if (!o.loops.empty()) s.loops = o.loops;
  s.validate();
}

void print_summary(const HolonomyCertificate& c) {
  std::cout << "texture " << c.texture_label << ", grid " << c.n_kx << "x" << c.n_ky << ", torsion "
            << to_string(c.variant) << "\n";
  std::cout << "c = (" << c.cohomology.c_plus << ", " << c.cohomology.c_minus << "), r = " << c.r
            << ", dim K = " << c.dim_kernel << ", r_sharp = " << c.r_sharp << "\n";
  std::cout << std::left << std::setw(10) << "epsilon" << std::setw(8) << "dim" << std::setw(10) << "nullity"
            << std::setw(9) << "r_sharp" << "nabla_T\n";
  for (const auto& r : c.rows) {
    std::cout << std::setw(10) << r.epsilon << std::setw(8) << r.span.all_points_dim << std::setw(10)
              << r.nullity.nullity_fibre_oneforms << std::setw(9) << r.kernel.r_sharp << r.nabla_t_norm << "\n";
  }
  std::cout << "verdict: " << to_string(c.verdict) << "\n";
}

int run_pipeline(const Scenario& s, bool sweep) {
  const HolonomyCertificate cert = sweep ? run_sweep(s) : run_certify(s);
  write_outputs(s, cert);
  print_summary(cert);
  std::cout << "wrote " << s.out_dir << "/certificate.report and " << s.out_dir << "/sweep.csv\n";
  return cert.exit_code();
}

int run_chern(const Scenario& s) {
  const GaugeTexture tex = build_texture(s);
  std::cout << "texture " << tex.label << "\n" << std::setprecision(15);
  std::cout << "sector   chern   raw_flux              deviation\n";
  long total = 0;
  for (Sector sec : {Sector::plus, Sector::minus}) {
    const ChernResult r = chern_number(tex, sec, s.tol.chern);
    total += r.integer;
    std::cout << (sec == Sector::plus ? "plus     " : "minus    ") << std::setw(8) << r.integer << std::setw(22)
              << r.raw_flux << r.deviation << "\n";
  }
  std::cout << "total    " << total << "\n";
  std::cout << "sign convention: " << kCurvatureSignConvention << "\n";
  return kExitOk;
}

int run_berry(const Scenario& s) {
  const GaugeTexture tex = build_texture(s);
  std::cout << "texture " << tex.label << "\n" << std::setprecision(15);
  std::vector<LoopSpec> loops;
  for (const auto& spec : s.loops) loops.push_back(LoopSpec::parse(spec, *tex.chart));
  std::cout << "loop                      phi_plus              phi_minus             (mod 2pi)\n";
  for (const auto& l : loops) {
    const double p = loop_integral(tex, Sector::plus, l);
    const double m = loop_integral(tex, Sector::minus, l);
    std::cout << std::left << std::setw(26) << l.label << std::setw(22) << p << std::setw(22) << m
              << wrap_phase(p) << ", " << wrap_phase(m) << "\n";
  }
  if (loops.size() >= 2) {
    const BerryPhaseVector v = berry_phase_vector(tex, loops[0], loops[1]);
    std::cout << "berry phase vector (" << v.loops[0] << ", " << v.loops[1] << ") = (" << v.wrapped[0] << ", "
              << v.wrapped[1] << ", " << v.wrapped[2] << ", " << v.wrapped[3] << ")\n";
  }
  return kExitOk;
}

int run_cohomology(const Scenario& s) {
  auto tex = std::make_shared<const GaugeTexture>(build_texture(s));
  const CohomologyReport c = period_matrix(torsion_form(tex, TorsionVariant::theta), s.tol.rank, s.tol.parallel);
  std::cout << std::setprecision(15) << "texture " << tex->label << "\n" << c.basis_note << "\n";
  std::cout << "            [vol](x)[dphi+]      [vol](x)[dphi-]\n";
  std::cout << "period      " << std::left << std::setw(21) << c.c_plus << c.c_minus << "\n";
  std::cout << "chern       " << std::setw(21) << c.chern_plus << c.chern_minus << "   total " << c.chern_total << "\n";
  std::cout << "lambda = " << (c.lambda ? std::to_string(*c.lambda) : std::string("undefined")) << ", r = " << c.r
            << ", curvature parallel = " << (c.f_parallel ? "yes" : "no") << "\n";
  return kExitOk;
}

int run_example62(const Scenario& s) {
  auto tex = std::make_shared<const GaugeTexture>(build_texture(s));
  const MetricField m = assemble_metric(tex, 1.0);
  const ConnectionField lc = christoffel(m);
  const ConnectionField c = connection_with_torsion(lc, torsion_form(tex, s.variant, 1.0), m);
  const CurvatureField r = riemann_curvature(c, m, Frame::coordinate);
  std::cout << std::setprecision(15) << "counterflow at eps = 1, k = (0, 0)\n";
  const char* names[4] = {"kx", "ky", "phi+", "phi-"};
  std::cout << "nonzero mixed Christoffel symbols Gamma^a_{b c}:\n";
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int d = b; d < 4; ++d) {
        const bool base = a < 2 && b < 2 && d < 2;
        const bool fibre = a >= 2 && b >= 2 && d >= 2;
        const double v = c.gamma[0](a, b, d);
        if (!base && !fibre && std::abs(v) > 1e-14) {
          std::cout << "  Gamma^" << names[a] << "_{" << names[b] << " " << names[d] << "} = " << v << "\n";
        }
      }
  std::cout << "R(d_kx, d_ky) d_phi+ along d_phi- = " << r.r[0](kPhiMinus, kPhiPlus, 0, 1) << "\n";
  std::cout << "R(d_kx, d_ky) d_phi- along d_phi+ = " << r.r[0](kPhiPlus, kPhiMinus, 0, 1) << "\n\n";
  return run_pipeline(s, false);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Holonomy certificates for Kaluza-Klein geometries of two-sector gauge textures"};
  app.require_subcommand(1);
  Overrides o;
  std::string scenario_path;
  auto* certify = app.add_subcommand("certify", "run the full pipeline and write the certificate");
  auto* sweep = app.add_subcommand("sweep", "epsilon sweep (>= 2 values)");
  auto* chern = app.add_subcommand("chern", "Chern numbers of the scenario texture");
  auto* berry = app.add_subcommand("berry-phase", "Berry phases along loops");
  auto* cohom = app.add_subcommand("cohomology", "period matrix and rank data");
  auto* ex62 = app.add_subcommand("example62", "built-in counterflow golden scenario");
  for (auto* cmd : {certify, sweep, chern, berry, cohom}) {
    cmd->add_option("scenario", scenario_path, "scenario file")->required();
    add_overrides(cmd, o);
  }
  add_overrides(ex62, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInvalid;
  }

  try {
    Scenario s = ex62->parsed() ? example62_scenario() : load_scenario(scenario_path);
    apply(s, o);
    if (certify->parsed()) return run_pipeline(s, false);
    if (sweep->parsed()) return run_pipeline(s, true);
    if (chern->parsed()) return run_chern(s);
    if (berry->parsed()) return run_berry(s);
    if (cohom->parsed()) return run_cohomology(s);
    if (ex62->parsed()) return run_example62(s);
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == StageError::Kind::invalid_input ? kExitInvalid : kExitFailed;
  } catch (const InvalidArgument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const DegenerateBandError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const VariantError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailed;
  }
  return kExitInvalid;
}
