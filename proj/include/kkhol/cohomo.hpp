#pragma once

#include "kkhol/kkgeom.hpp"
#include "kkhol/torsion.hpp"

#include <optional>
#include <string>
#include <vector>

namespace kkhol {

inline constexpr double kDefaultNullTol = 1e-6;
inline constexpr double kDefaultParallelTol = 1e-9;

struct CohomologyReport {
  double c_plus = 0.0;
  double c_minus = 0.0;
  std::optional<double> lambda;  // c_minus / c_plus when c_plus is nonzero
  int r = 0;
  long chern_plus = 0;
  long chern_minus = 0;
  long chern_total = 0;
  double rank_tol = 1e-8;
  // F+ and F- are pointwise constant multiples of vol_BZ (hence parallel).
  bool f_parallel = false;
  double f_parallel_deviation = 0.0;
  std::string basis_note =
      "[vol_BZ](x)[dphi+], [vol_BZ](x)[dphi-], vol_BZ = dk_x ^ dk_y; periods over T^2 x S^1_phi+- "
      "divided by (2 pi)^2";
};

/// Periods of the theta torsion over the generating 3-cycles T^2 x S^1_phi+-.
/// Throws VariantError for pulled-back torsion, whose periods vanish identically.
CohomologyReport period_matrix(const TorsionField& t_theta, double rank_tol = 1e-8,
                               double parallel_tol = kDefaultParallelTol);

struct NullityOptions {
  int max_grid = 16;  // the constraint system is assembled on a subsampled grid of at most this size
  double null_tol = kDefaultNullTol;
};

struct ParallelFormReport {
  double epsilon = 0.0;
  int nullity_fibre_oneforms = 0;
  int nullity_base_twoforms = 0;
  std::vector<double> residual_spectrum;  // smallest singular values, ascending
  std::vector<double> base_residual_spectrum;
  double threshold = 0.0;                // null_tol * sigma_max
  double separation_below = 0.0;         // threshold / largest null singular value
  double separation_above = 0.0;         // smallest non-null singular value / threshold
  int grid_n_kx = 0;
  int grid_n_ky = 0;
  // Mean (f+, f-) of each null vector, and whether it is constant over the grid.
  std::vector<std::array<double, 2>> parallel_forms;
  bool parallel_forms_constant = true;
  double null_tol = kDefaultNullTol;
};

/// Nullity of xi -> nabla^LC xi on xi = f+ dphi+ + f- dphi-, with forward
/// differences for d f on the (subsampled) grid; same for h vol on the base
/// with the horizontal metric g(X_i, X_j).
ParallelFormReport parallel_form_nullity(const MetricField& metric, const ConnectionField& lc,
                                         const NullityOptions& opts = {});
ParallelFormReport parallel_form_nullity(const MetricField& metric, const NullityOptions& opts = {});

struct KernelReport {
  int dim_kernel = 0;
  int r_sharp = 0;
  bool assumption_violated = false;
  std::string note;
};

/// dim K and r_sharp = max(0, r - dim K).
KernelReport r_sharp(const CohomologyReport& coh, const ParallelFormReport& pf, double rank_tol = 1e-8);

}  // namespace kkhol
