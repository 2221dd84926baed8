#include "kkhol/cohomo.hpp"

#include "kkhol/errors.hpp"
#include "kkhol/holonomy.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace kkhol {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

int stride_for(int n, int max_grid) {
  for (int s = 1; s <= n; ++s) {
    if (n % s == 0 && n / s <= max_grid && n / s >= 4) return s;
  }
  return 1;
}

struct Subgrid {
  const GridChart& fine;
  int sx, sy, nx, ny;
  std::size_t fine_index(int i, int j) const { return fine.index(i * sx, j * sy); }
  int q(int i, int j) const { return ((i % nx + nx) % nx) * ny + ((j % ny + ny) % ny); }
  std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
};

struct NullSpace {
  int nullity = 0;
  std::vector<double> smallest;
  double threshold = 0.0;
  double sep_below = 0.0;
  double sep_above = 0.0;
  Eigen::MatrixXd vectors;  // columns
};

NullSpace analyse(const Eigen::MatrixXd& a, double null_tol, bool want_vectors) {
  NullSpace ns;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a, want_vectors ? Eigen::ComputeThinV : 0);
  const Eigen::VectorXd s = svd.singularValues();
  const Eigen::Index n = s.size();
  ns.threshold = null_tol * (n > 0 ? s[0] : 0.0);
  double largest_null = 0.0;
  double smallest_live = 0.0;
  bool have_live = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (s[i] <= ns.threshold) {
      ++ns.nullity;
      largest_null = std::max(largest_null, s[i]);
    } else {
      smallest_live = have_live ? std::min(smallest_live, s[i]) : s[i];
      have_live = true;
    }
  }
  for (Eigen::Index i = n - 1; i >= 0 && i >= n - 3; --i) ns.smallest.push_back(s[i]);
  ns.sep_below = largest_null > 0.0 ? ns.threshold / largest_null : HUGE_VAL;
  ns.sep_above = have_live && ns.threshold > 0.0 ? smallest_live / ns.threshold : HUGE_VAL;
  if (want_vectors && ns.nullity > 0) ns.vectors = svd.matrixV().rightCols(ns.nullity);
  return ns;
}

}  // namespace

CohomologyReport period_matrix(const TorsionField& t, double rank_tol, double parallel_tol) {
  if (t.variant != TorsionVariant::theta) {
    throw VariantError(
        "period_matrix needs the theta torsion variant: the pulled-back 3-form has no legs on the phase "
        "circles, so all of its periods vanish identically");
  }
  const GridChart& c = *t.chart;
  CohomologyReport rep;
  rep.rank_tol = rank_tol;
  double periods[2];
  double deviation = 0.0;
  for (int s = 0; s < 2; ++s) {
    std::vector<double> cells(c.size());
    double lo = HUGE_VAL, hi = -HUGE_VAL;
    for (std::size_t p = 0; p < c.size(); ++p) {
      const double f = t.component(p, 0, 1, kPhiPlus + s);
      cells[p] = f * c.hx() * c.hy();
      lo = std::min(lo, f);
      hi = std::max(hi, f);
    }
    const double cycle = pairwise_sum(cells) * GridChart::fibre_period();
    periods[s] = cycle / (kTwoPi * kTwoPi);
    deviation = std::max(deviation, (hi - lo) / std::max(1.0, std::max(std::abs(lo), std::abs(hi))));
  }
  rep.c_plus = periods[0];
  rep.c_minus = periods[1];
  if (std::abs(rep.c_plus) > rank_tol) rep.lambda = rep.c_minus / rep.c_plus;
  rep.r = std::max(std::abs(rep.c_plus), std::abs(rep.c_minus)) > rank_tol ? 1 : 0;
  rep.f_parallel_deviation = deviation;
  rep.f_parallel = deviation <= parallel_tol;
  if (t.texture) {
    rep.chern_plus = chern_number(*t.texture, Sector::plus).integer;
    rep.chern_minus = chern_number(*t.texture, Sector::minus).integer;
  } else {
    rep.chern_plus = std::lround(rep.c_plus);
    rep.chern_minus = std::lround(rep.c_minus);
  }
  rep.chern_total = rep.chern_plus + rep.chern_minus;
  return rep;
}

ParallelFormReport parallel_form_nullity(const MetricField& metric, const NullityOptions& opts) {
  return parallel_form_nullity(metric, christoffel(metric), opts);
}

ParallelFormReport parallel_form_nullity(const MetricField& metric, const ConnectionField& lc,
                                         const NullityOptions& opts) {
  if (*metric.chart != *lc.chart) throw InvalidArgument("parallel_form_nullity: chart mismatch");
  if (!(opts.null_tol > 0.0)) throw InvalidArgument("null_tol must be positive");
  const GridChart& c = *metric.chart;
  const int sx = stride_for(c.n_kx(), opts.max_grid);
  const int sy = stride_for(c.n_ky(), opts.max_grid);
  const Subgrid sub{c, sx, sy, c.n_kx() / sx, c.n_ky() / sy};
  const double H[2] = {sx * c.hx(), sy * c.hy()};
  const auto n = static_cast<Eigen::Index>(sub.size());

  ParallelFormReport rep;
  rep.epsilon = metric.epsilon;
  rep.grid_n_kx = sub.nx;
  rep.grid_n_ky = sub.ny;
  rep.null_tol = opts.null_tol;

  // (nabla_nu xi)_rho = d_nu xi_rho - Gamma^mu_{nu rho} xi_mu, xi_mu nonzero on fibre slots only.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(16 * n, 2 * n);
  for (int i = 0; i < sub.nx; ++i)
    for (int j = 0; j < sub.ny; ++j) {
      const int q = sub.q(i, j);
      const Tensor3& G = lc.gamma[sub.fine_index(i, j)];
      for (int nu = 0; nu < kDim; ++nu)
        for (int rho = 0; rho < kDim; ++rho) {
          const Eigen::Index row = 16 * q + 4 * nu + rho;
          for (int s = 0; s < 2; ++s) a(row, 2 * q + s) -= G(kPhiPlus + s, nu, rho);
          if (nu < 2 && rho >= kPhiPlus) {
            const int s = rho - kPhiPlus;
            const int qn = nu == 0 ? sub.q(i + 1, j) : sub.q(i, j + 1);
            a(row, 2 * qn + s) += 1.0 / H[nu];
            a(row, 2 * q + s) -= 1.0 / H[nu];
          }
        }
    }
  const NullSpace fib = analyse(a, opts.null_tol, true);
  rep.nullity_fibre_oneforms = fib.nullity;
  rep.residual_spectrum = fib.smallest;
  rep.threshold = fib.threshold;
  rep.separation_below = fib.sep_below;
  rep.separation_above = fib.sep_above;
  for (Eigen::Index k = 0; k < fib.vectors.cols(); ++k) {
    std::array<double, 2> mean{};
    double peak = 0.0;
    for (Eigen::Index q = 0; q < n; ++q)
      for (int s = 0; s < 2; ++s) {
        mean[s] += fib.vectors(2 * q + s, k) / static_cast<double>(n);
        peak = std::max(peak, std::abs(fib.vectors(2 * q + s, k)));
      }
    double spread = 0.0;
    for (Eigen::Index q = 0; q < n; ++q)
      for (int s = 0; s < 2; ++s) spread = std::max(spread, std::abs(fib.vectors(2 * q + s, k) - mean[s]));
    if (spread > 1e-6 * peak) rep.parallel_forms_constant = false;
    rep.parallel_forms.push_back(mean);
  }

  // Base 2-forms beta = h vol with the horizontal metric h_ij = g(X_i, X_j).
  std::vector<Eigen::Matrix2d> hm(sub.size());
  for (int i = 0; i < sub.nx; ++i)
    for (int j = 0; j < sub.ny; ++j) {
      const Mat4& g = metric.g[sub.fine_index(i, j)];
      Vec4 x[2];
      for (int b = 0; b < 2; ++b) {
        x[b] = Vec4::Unit(b);
        x[b][kPhiPlus] = -g(b, kPhiPlus);
        x[b][kPhiMinus] = -g(b, kPhiMinus);
      }
      Eigen::Matrix2d h;
      for (int b = 0; b < 2; ++b)
        for (int d = 0; d < 2; ++d) h(b, d) = x[b].dot(g * x[d]);
      hm[sub.q(i, j)] = h;
    }
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(2 * n, n);
  for (int i = 0; i < sub.nx; ++i)
    for (int j = 0; j < sub.ny; ++j) {
      const int q = sub.q(i, j);
      const Eigen::Matrix2d hinv = hm[q].inverse();
      Eigen::Matrix2d dh[2];
      dh[0] = (hm[sub.q(i + 1, j)] - hm[sub.q(i - 1, j)]) / (2.0 * H[0]);
      dh[1] = (hm[sub.q(i, j + 1)] - hm[sub.q(i, j - 1)]) / (2.0 * H[1]);
      for (int bb = 0; bb < 2; ++bb) {
        // trace_a gamma^a_{b a} = 1/2 h^{ac} d_b h_{ac}
        const double trace = 0.5 * (hinv * dh[bb]).trace();
        const Eigen::Index row = 2 * q + bb;
        const int qn = bb == 0 ? sub.q(i + 1, j) : sub.q(i, j + 1);
        b(row, qn) += 1.0 / H[bb];
        b(row, q) -= 1.0 / H[bb] + trace;
      }
    }
  const NullSpace base = analyse(b, opts.null_tol, false);
  rep.nullity_base_twoforms = base.nullity;
  rep.base_residual_spectrum = base.smallest;
  return rep;
}

KernelReport r_sharp(const CohomologyReport& coh, const ParallelFormReport& pf, double rank_tol) {
  KernelReport k;
  if (pf.nullity_fibre_oneforms == 0 || coh.r == 0) {
    k.dim_kernel = 0;
    k.note = pf.nullity_fibre_oneforms == 0 ? "no parallel fibre one-forms: dim K = 0"
                                            : "zero period vector: dim K = 0";
  } else if (!coh.f_parallel) {
    k.dim_kernel = 0;
    k.note = "curvature representatives are not parallel: dim K = 0";
  } else {
    // dim(span{c} ^ P) = dim span{c} + dim P - dim(span{c} + P)
    const auto m = static_cast<Eigen::Index>(pf.parallel_forms.size());
    Eigen::MatrixXd p(m, 2);
    for (Eigen::Index i = 0; i < m; ++i) p.row(i) << pf.parallel_forms[i][0], pf.parallel_forms[i][1];
    Eigen::MatrixXd both(m + 1, 2);
    both.topRows(m) = p;
    both.row(m) << coh.c_plus, coh.c_minus;
    const int dim_p = numerical_rank(p, rank_tol);
    const int dim_sum = numerical_rank(both, rank_tol);
    k.dim_kernel = std::max(0, coh.r + dim_p - dim_sum);
    std::ostringstream note;
    note << "curvature pointwise parallel (constant multiple of vol_BZ); dim K from period span vs "
         << dim_p << "-dimensional parallel fibre forms";
    if (k.dim_kernel > 0) {
      k.assumption_violated = true;
      note << "; non-parallel-curvature assumption violated - certificate restricted to eps > 0";
    }
    k.note = note.str();
  }
  k.r_sharp = std::max(0, coh.r - k.dim_kernel);
  return k;
}

}  // namespace kkhol
