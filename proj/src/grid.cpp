#include "kkhol/grid.hpp"

#include "kkhol/errors.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace kkhol {

GridChart::GridChart(int n_kx, int n_ky, double period_kx, double period_ky)
    : n_kx_(n_kx), n_ky_(n_ky), period_kx_(period_kx), period_ky_(period_ky) {
  if (n_kx < 4 || n_ky < 4) {
    std::ostringstream msg;
    msg << "grid sizes must be >= 4, got " << n_kx << "x" << n_ky;
    throw InvalidArgument(msg.str());
  }
  if (!(period_kx > 0.0) || !(period_ky > 0.0) || !std::isfinite(period_kx) ||
      !std::isfinite(period_ky)) {
    throw InvalidArgument("grid periods must be finite and strictly positive");
  }
  hx_ = period_kx_ / n_kx_;
  hy_ = period_ky_ / n_ky_;
}

double GridChart::spacing(Axis a) const {
  switch (a) {
    case Axis::kx: return hx_;
    case Axis::ky: return hy_;
    default: return fibre_period();
  }
}

bool GridChart::on_seam(std::size_t p) const {
  const int i = i_of(p);
  const int j = j_of(p);
  return i == 0 || i == n_kx_ - 1 || j == 0 || j == n_ky_ - 1;
}

bool GridChart::operator==(const GridChart& o) const {
  return n_kx_ == o.n_kx_ && n_ky_ == o.n_ky_ && period_kx_ == o.period_kx_ &&
         period_ky_ == o.period_ky_;
}

GridChart build_chart(int n_kx, int n_ky, double period_kx, double period_ky) {
  return GridChart(n_kx, n_ky, period_kx, period_ky);
}

double TwoFormField::component(std::size_t p, int mu, int nu) const {
  if (mu == 0 && nu == 1) return data[p][0];
  if (mu == 1 && nu == 0) return -data[p][0];
  return 0.0;
}

ScalarField make_scalar_field(std::shared_ptr<const GridChart> chart, double (*f)(double, double)) {
  ScalarField s(std::move(chart));
  for (std::size_t p = 0; p < s.size(); ++p) {
    s.data[p][0] = f(s.chart->kx(s.chart->i_of(p)), s.chart->ky(s.chart->j_of(p)));
  }
  return s;
}

double centred_difference(const GridChart& chart, std::span<const double> values, std::size_t p,
                          Axis axis) {
  const int i = chart.i_of(p);
  const int j = chart.j_of(p);
  if (axis == Axis::kx) {
    return (values[chart.index(i + 1, j)] - values[chart.index(i - 1, j)]) / (2.0 * chart.hx());
  }
  if (axis == Axis::ky) {
    return (values[chart.index(i, j + 1)] - values[chart.index(i, j - 1)]) / (2.0 * chart.hy());
  }
  return 0.0;
}

ScalarField partial_derivative(const ScalarField& f, Axis axis) {
  ScalarField out(f.chart);
  out.seam_marked = f.seam_marked;
  if (axis == Axis::phi_plus || axis == Axis::phi_minus) return out;  // zero-initialised
  std::vector<double> flat(f.size());
  for (std::size_t p = 0; p < f.size(); ++p) flat[p] = f.data[p][0];
  for (std::size_t p = 0; p < f.size(); ++p) {
    out.data[p][0] = centred_difference(*f.chart, flat, p, axis);
  }
  return out;
}

double max_abs(const ScalarField& f) {
  double m = 0.0;
  for (std::size_t p = 0; p < f.size(); ++p) {
    if (f.seam_marked && f.chart->on_seam(p)) continue;
    m = std::max(m, std::abs(f.data[p][0]));
  }
  return m;
}

double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 8) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

void write_field_dump(std::ostream& os, const GridChart& chart, const FieldDumpHeader& header,
                      std::span<const double> values, bool seam_marked) {
  if (header.slots == 0 || values.size() != header.slots * chart.size()) {
    throw InvalidArgument("field dump: component count does not match slots x grid extent");
  }
  os << "# field = " << header.name << "\n"
     << "# n_kx = " << chart.n_kx() << "\n"
     << "# n_ky = " << chart.n_ky() << "\n"
     << std::setprecision(17) << "# period_kx = " << chart.period_kx() << "\n"
     << "# period_ky = " << chart.period_ky() << "\n"
     << "# valence = (" << header.contravariant << "," << header.covariant << ")\n"
     << "# slots = " << header.slots << "\n"
     << "# dependence = base-only\n"
     << "# seam_marked = " << (seam_marked ? "true" : "false") << "\n"
     << "# columns = i j slot[0.." << header.slots - 1 << "]\n";
  for (std::size_t p = 0; p < chart.size(); ++p) {
    os << chart.i_of(p) << ' ' << chart.j_of(p);
    for (std::size_t s = 0; s < header.slots; ++s) os << ' ' << values[p * header.slots + s];
    os << '\n';
  }
}

}  // namespace kkhol
