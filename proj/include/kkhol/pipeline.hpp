#pragma once

#include "kkhol/cohomo.hpp"
#include "kkhol/holonomy.hpp"
#include "kkhol/scenario.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace kkhol {

/// Wraps a module error with the pipeline stage it came from.
class StageError : public std::runtime_error {
 public:
  enum class Kind { invalid_input, computation };
  StageError(std::string stage, Kind kind, const std::string& what)
      : std::runtime_error("stage '" + stage + "': " + what), stage_(std::move(stage)), kind_(kind) {}
  const std::string& stage() const { return stage_; }
  Kind kind() const { return kind_; }

 private:
  std::string stage_;
  Kind kind_;
};

struct EpsilonRow {
  double epsilon = 0.0;
  SpanResult span;          // certification torsion variant
  SpanResult span_other;    // the other variant, for the record
  ParallelFormReport nullity;
  KernelReport kernel;
  int r = 0;
  double nabla_t_norm = 0.0;  // theta torsion against nabla^LC
  int perturbed_positive = 0;
  int perturb_trials = 0;
  int perturbed_indefinite = 0;  // trials skipped because the perturbed metric was not positive definite
  double perturbed_nabla_t_min = 0.0;
  double lc_compatibility = 0.0;
  double torsion_compatibility = 0.0;
  double torsion_recovery = 0.0;
  SubmersionReport submersion;
  double inverse_residual = 0.0;
};

enum class Verdict { certified, failed, degenerate };
std::string to_string(Verdict v);

struct LoopRecord {
  std::string spec;
  double phi_plus = 0.0;
  double phi_minus = 0.0;
  double transport_orthogonality = 0.0;
  double transport_deviation = 0.0;
};

struct HolonomyCertificate {
  std::string scenario_name;
  std::string texture_label;
  std::string texture_source;
  int n_kx = 0, n_ky = 0;
  std::uint64_t seed = 0;
  TorsionVariant variant = TorsionVariant::pulled_back;
  std::vector<double> epsilons;
  CohomologyReport cohomology;
  std::vector<EpsilonRow> rows;
  std::vector<LoopRecord> loops;
  int r = 0;
  int dim_kernel = 0;
  int r_sharp = 0;
  Verdict verdict = Verdict::degenerate;
  std::vector<std::string> notes;
  Tolerances tol;
  int nullity_grid = 16;
  double perturb_amplitude = 0.01;

  int exit_code() const { return verdict == Verdict::failed ? 1 : 0; }
};

/// Full pipeline: texture, metric, connections, curvature, cohomology,
/// nullities and the certificate. Module errors come back as StageError.
HolonomyCertificate run_certify(const Scenario& s);

/// Same pipeline; requires at least two epsilon values.
HolonomyCertificate run_sweep(const Scenario& s);

void write_report(std::ostream& os, const HolonomyCertificate& cert);
void write_sweep_csv(std::ostream& os, const HolonomyCertificate& cert);

/// Writes certificate.report and sweep.csv (and field dumps when requested)
/// into s.out_dir, creating it if needed.
void write_outputs(const Scenario& s, const HolonomyCertificate& cert);

}  // namespace kkhol
