#include "kkhol/errors.hpp"
#include "kkhol/pipeline.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <numbers>
#include <sstream>

namespace py = pybind11;
using namespace kkhol;

namespace {

using ChartPtr = std::shared_ptr<GridChart>;
using TexturePtr = std::shared_ptr<GaugeTexture>;

std::shared_ptr<const GridChart> cchart(const ChartPtr& c) { return c; }
std::shared_ptr<const GaugeTexture> ctex(const TexturePtr& t) { return t; }

TexturePtr own(GaugeTexture t) { return std::make_shared<GaugeTexture>(std::move(t)); }

Sector sector_of(const std::string& s) {
  if (s == "plus" || s == "+") return Sector::plus;
  if (s == "minus" || s == "-") return Sector::minus;
  throw InvalidArgument("sector must be 'plus' or 'minus'");
}

py::array_t<double> field_array(const std::vector<double>& flat, std::vector<py::ssize_t> shape) {
  py::array_t<double> out(shape);
  std::copy(flat.begin(), flat.end(), out.mutable_data());
  return out;
}

py::dict span_dict(const SpanResult& s) {
  py::dict d;
  d["all_points_dim"] = s.all_points_dim;
  d["per_point_max"] = s.per_point_max;
  d["singular_values"] = std::vector<double>(s.singular_values.begin(), s.singular_values.end());
  d["points_used"] = s.points_used;
  return d;
}

py::dict cohomology_dict(const CohomologyReport& c) {
  py::dict d;
  d["c_plus"] = c.c_plus;
  d["c_minus"] = c.c_minus;
  d["lambda"] = c.lambda ? py::cast(*c.lambda) : py::none();
  d["r"] = c.r;
  d["chern_plus"] = c.chern_plus;
  d["chern_minus"] = c.chern_minus;
  d["chern_total"] = c.chern_total;
  d["curvature_parallel"] = c.f_parallel;
  d["basis"] = c.basis_note;
  return d;
}

py::dict nullity_dict(const ParallelFormReport& p) {
  py::dict d;
  d["epsilon"] = p.epsilon;
  d["nullity_fibre_oneforms"] = p.nullity_fibre_oneforms;
  d["nullity_base_twoforms"] = p.nullity_base_twoforms;
  d["residual_spectrum"] = p.residual_spectrum;
  d["threshold"] = p.threshold;
  d["separation_below"] = p.separation_below;
  d["separation_above"] = p.separation_above;
  d["parallel_forms"] = p.parallel_forms;
  return d;
}

}  // namespace

PYBIND11_MODULE(kkhol, m) {
  m.doc() = "Kaluza-Klein holonomy certificates for two-sector gauge textures";

  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<DegenerateBandError>(m, "DegenerateBandError", PyExc_ValueError);
  py::register_exception<QuantizationError>(m, "QuantizationError", PyExc_ArithmeticError);
  py::register_exception<FactorizationError>(m, "FactorizationError", PyExc_ArithmeticError);
  py::register_exception<VariantError>(m, "VariantError", PyExc_ValueError);

  py::class_<GridChart, ChartPtr>(m, "GridChart")
      .def(py::init<int, int, double, double>(), py::arg("n_kx"), py::arg("n_ky"),
           py::arg("period_kx") = 2.0 * std::numbers::pi, py::arg("period_ky") = 2.0 * std::numbers::pi)
      .def_property_readonly("n_kx", &GridChart::n_kx)
      .def_property_readonly("n_ky", &GridChart::n_ky)
      .def_property_readonly("hx", &GridChart::hx)
      .def_property_readonly("hy", &GridChart::hy)
      .def_property_readonly("size", &GridChart::size)
      .def("index", &GridChart::index);

  py::class_<GaugeTexture, TexturePtr>(m, "GaugeTexture")
      .def_readonly("label", &GaugeTexture::label)
      .def_property_readonly("source", [](const GaugeTexture& t) { return to_string(t.source); })
      .def_property_readonly("analytic", &GaugeTexture::analytic)
      .def("a", [](const GaugeTexture& t, const std::string& s) {
        const auto& f = t.a(sector_of(s));
        std::vector<double> flat;
        for (const auto& v : f.data) flat.insert(flat.end(), v.begin(), v.end());
        return field_array(flat, {static_cast<py::ssize_t>(f.size()), 2});
      })
      .def("f", [](const GaugeTexture& t, const std::string& s) {
        const auto& f = t.f(sector_of(s));
        std::vector<double> flat;
        for (const auto& v : f.data) flat.push_back(v[0]);
        return field_array(flat, {static_cast<py::ssize_t>(f.size())});
      });

  m.def("make_flat_texture", [](const ChartPtr& c) { return own(make_flat_texture(cchart(c))); });
  m.def("make_counterflow_texture", [](const ChartPtr& c) { return own(make_counterflow_texture(cchart(c))); });
  m.def(
      "make_qwz_texture",
      [](const ChartPtr& c, double mass, const std::string& band, std::array<double, 2> weights, double gap_tol) {
        Band b = band == "upper" ? Band::upper : Band::lower;
        if (band != "upper" && band != "lower") throw InvalidArgument("band must be 'lower' or 'upper'");
        return own(bloch_berry_texture(qwz_texture(mass, b), cchart(c), weights, gap_tol));
      },
      py::arg("chart"), py::arg("mass"), py::arg("band") = "lower", py::arg("weights") = std::array<double, 2>{1.0, 0.0},
      py::arg("gap_tol") = kDefaultGapTol);
  m.def(
      "make_fourier_texture",
      [](const ChartPtr& c, std::uint64_t seed, int modes, double amplitude, int chern_plus, int chern_minus) {
        return own(make_fourier_texture(cchart(c), FourierTextureSpec{seed, modes, amplitude, chern_plus, chern_minus}));
      },
      py::arg("chart"), py::arg("seed") = 1, py::arg("modes") = 2, py::arg("amplitude") = 0.1,
      py::arg("chern_plus") = 0, py::arg("chern_minus") = 0);
  m.def("sampled_copy", [](const TexturePtr& t) { return own(sampled_copy(*t)); });

  m.def(
      "chern_number",
      [](const TexturePtr& t, const std::string& s, double tol) {
        const ChernResult r = chern_number(*t, sector_of(s), tol);
        return py::make_tuple(r.integer, r.raw_flux);
      },
      py::arg("texture"), py::arg("sector"), py::arg("chern_tol") = kDefaultChernTol);

  py::class_<MetricField>(m, "MetricField")
      .def_readonly("epsilon", &MetricField::epsilon)
      .def_property_readonly("g", [](const MetricField& f) {
        std::vector<double> flat;
        for (const auto& g : f.g)
          for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) flat.push_back(g(a, b));
        return field_array(flat, {static_cast<py::ssize_t>(f.size()), 4, 4});
      });
  m.def("assemble_metric", [](const TexturePtr& t, double e) { return assemble_metric(ctex(t), e); });
  m.def("check_submersion", [](const MetricField& f) { return check_submersion(f).max_violation(); });

  py::class_<ConnectionField>(m, "ConnectionField")
      .def_property_readonly("kind", [](const ConnectionField& c) { return to_string(c.kind); })
      .def_property_readonly("gamma", [](const ConnectionField& c) {
        std::vector<double> flat;
        for (const auto& t : c.gamma) flat.insert(flat.end(), t.v.begin(), t.v.end());
        return field_array(flat, {static_cast<py::ssize_t>(c.size()), 4, 4, 4});
      });
  m.def("christoffel", &christoffel);
  m.def("metric_compatibility_residual", &metric_compatibility_residual);

  py::class_<TorsionField>(m, "TorsionField")
      .def_property_readonly("variant", [](const TorsionField& t) { return to_string(t.variant); })
      .def_property_readonly("t", [](const TorsionField& t) {
        std::vector<double> flat;
        for (const auto& v : t.t) flat.insert(flat.end(), v.begin(), v.end());
        return field_array(flat, {static_cast<py::ssize_t>(t.size()), 4});
      });
  m.def(
      "torsion_form",
      [](const TexturePtr& t, const std::string& variant, double eps) {
        return torsion_form(ctex(t), parse_torsion_variant(variant), eps);
      },
      py::arg("texture"), py::arg("variant") = "theta", py::arg("epsilon") = 1.0);
  m.def("connection_with_torsion", &connection_with_torsion);
  m.def("nabla_lc_torsion_norm", &nabla_lc_torsion_norm);

  py::class_<CurvatureField>(m, "CurvatureField")
      .def_property_readonly("frame", [](const CurvatureField& c) { return to_string(c.frame); })
      .def_property_readonly("r", [](const CurvatureField& c) {
        std::vector<double> flat;
        for (const auto& t : c.r) flat.insert(flat.end(), t.v.begin(), t.v.end());
        return field_array(flat, {static_cast<py::ssize_t>(c.size()), 4, 4, 4, 4});
      });
  m.def(
      "riemann_curvature",
      [](const ConnectionField& c, const MetricField& g, const std::string& frame) {
        if (frame != "adapted" && frame != "coordinate") throw InvalidArgument("frame must be 'coordinate' or 'adapted'");
        return riemann_curvature(c, g, frame == "adapted" ? Frame::adapted : Frame::coordinate);
      },
      py::arg("connection"), py::arg("metric"), py::arg("frame") = "adapted");
  m.def(
      "offdiag_span_dim",
      [](const CurvatureField& c, std::optional<std::vector<std::size_t>> points, double tol) {
        return span_dict(offdiag_span_dim(c, points ? *points : all_points(*c.chart), tol));
      },
      py::arg("curvature"), py::arg("points") = py::none(), py::arg("rank_tol") = kDefaultRankTol);

  m.def("period_matrix", [](const TorsionField& t) { return cohomology_dict(period_matrix(t)); });
  m.def("parallel_form_nullity", [](const MetricField& g) { return nullity_dict(parallel_form_nullity(g)); });
  m.def("r_sharp", [](const TexturePtr& t, double eps) {
    const MetricField g = assemble_metric(ctex(t), eps);
    const KernelReport k = r_sharp(period_matrix(torsion_form(ctex(t), TorsionVariant::theta, eps)), parallel_form_nullity(g));
    return py::make_tuple(k.r_sharp, k.dim_kernel);
  });

  m.def("berry_phase_vector", [](const TexturePtr& t, const std::string& l1, const std::string& l2) {
    const BerryPhaseVector v =
        berry_phase_vector(*t, LoopSpec::parse(l1, *t->chart), LoopSpec::parse(l2, *t->chart));
    py::dict d;
    d["raw"] = std::vector<double>(v.raw.begin(), v.raw.end());
    d["wrapped"] = std::vector<double>(v.wrapped.begin(), v.wrapped.end());
    return d;
  });

  m.def(
      "run_certify",
      [](const std::string& scenario_text) {
        std::istringstream in(scenario_text);
        const HolonomyCertificate c = run_certify(parse_scenario(in, "python"));
        py::dict d;
        d["verdict"] = to_string(c.verdict);
        d["r"] = c.r;
        d["dim_kernel"] = c.dim_kernel;
        d["r_sharp"] = c.r_sharp;
        std::vector<int> dims;
        for (const auto& row : c.rows) dims.push_back(row.span.all_points_dim);
        d["measured_offdiag_dim"] = dims;
        d["epsilons"] = c.epsilons;
        d["cohomology"] = cohomology_dict(c.cohomology);
        std::ostringstream report;
        write_report(report, c);
        d["report"] = report.str();
        return d;
      },
      py::arg("scenario_text"));
}
