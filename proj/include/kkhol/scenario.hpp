#pragma once

#include "kkhol/gauge.hpp"
#include "kkhol/torsion.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace kkhol {

struct Tolerances {
  double rank = 1e-8;
  double null = 1e-6;
  double gap = kDefaultGapTol;
  double chern = kDefaultChernTol;
  double parallel = 1e-9;
  double transport = 1e-8;
};

/// A certification run. Text form: one `key = value` per line, `#` comments,
/// dotted keys for sections (bloch.m, tol.rank, ...). Repeated `loop` lines
/// accumulate.
struct Scenario {
  std::string name = "scenario";
  std::string texture = "counterflow";  // flat | counterflow | bloch | fourier
  bool sampled = false;                 // drop analytic descriptors, use grid differences
  int n_kx = 64;
  int n_ky = 64;
  std::vector<double> epsilons{1.0};
  TorsionVariant variant = TorsionVariant::pulled_back;
  std::vector<std::string> loops{"gamma1", "gamma2"};
  Tolerances tol;
  int nullity_grid = 16;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  int perturb_trials = 10;
  double perturb_amplitude = 0.01;
  bool dump_fields = false;

  std::string bloch_d = "qwz";
  double bloch_m = 1.0;
  Band bloch_band = Band::lower;
  std::array<double, 2> weights{1.0, 0.0};

  FourierTextureSpec fourier;

  /// Throws InvalidArgument when a value is out of range.
  void validate() const;
};

Scenario parse_scenario(std::istream& in, const std::string& name = "scenario");
Scenario load_scenario(const std::string& path);

/// "start:stop:count", inclusive, count >= 2.
std::vector<double> parse_epsilon_sweep(const std::string& spec);
std::vector<double> parse_real_list(const std::string& text);

/// The built-in golden scenario: counterflow, 64^2, eps in {0.25, 0.5, 1}.
Scenario example62_scenario();

/// Builds the scenario's texture on its grid.
GaugeTexture build_texture(const Scenario& s);

}  // namespace kkhol
