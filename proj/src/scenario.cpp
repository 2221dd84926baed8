#include "kkhol/scenario.hpp"

#include "kkhol/errors.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace kkhol {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\''))) {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

double to_real(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (trim(v.substr(used)).empty() && std::isfinite(x)) return x;
  } catch (const std::exception&) {
  }
  throw InvalidArgument("scenario: '" + key + "' expects a real number, got '" + v + "'");
}

long long to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long x = std::stoll(v, &used);
    if (trim(v.substr(used)).empty()) return x;
  } catch (const std::exception&) {
  }
  throw InvalidArgument("scenario: '" + key + "' expects an integer, got '" + v + "'");
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);
    const unsigned long long x = std::stoull(v, &used);
    if (trim(v.substr(used)).empty()) return x;
  } catch (const std::exception&) {
  }
  throw InvalidArgument("scenario: '" + key + "' expects an unsigned integer, got '" + v + "'");
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw InvalidArgument("scenario: '" + key + "' expects true or false, got '" + v + "'");
}

}  // namespace

std::vector<double> parse_real_list(const std::string& text) {
  std::string body = trim(text);
  if (!body.empty() && body.front() == '[') {
    if (body.back() != ']') throw InvalidArgument("unterminated list '" + text + "'");
    body = body.substr(1, body.size() - 2);
  }
  std::vector<double> out;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw InvalidArgument("empty entry in list '" + text + "'");
    out.push_back(to_real("list", item));
  }
  if (out.empty()) throw InvalidArgument("empty list '" + text + "'");
  return out;
}

std::vector<double> parse_epsilon_sweep(const std::string& spec) {
  std::stringstream ss(spec);
  std::string a, b, c;
  if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') || !std::getline(ss, c) || c.find(':') != std::string::npos) {
    throw InvalidArgument("epsilon sweep must look like start:stop:count, got '" + spec + "'");
  }
  const double start = to_real("epsilon sweep start", trim(a));
  const double stop = to_real("epsilon sweep stop", trim(b));
  const long long count = to_int("epsilon sweep count", trim(c));
  if (count < 2) throw InvalidArgument("epsilon sweep needs count >= 2");
  std::vector<double> out;
  for (long long k = 0; k < count; ++k) {
    out.push_back(k == count - 1 ? stop : start + (stop - start) * static_cast<double>(k) / (count - 1));
  }
  return out;
}

void Scenario::validate() const {
  if (texture != "flat" && texture != "counterflow" && texture != "bloch" && texture != "fourier") {
    throw InvalidArgument("scenario: unknown texture '" + texture + "' (flat, counterflow, bloch, fourier)");
  }
  if (n_kx < 4 || n_ky < 4) throw InvalidArgument("scenario: grid sizes must be >= 4");
  if (epsilons.empty()) throw InvalidArgument("scenario: at least one epsilon is required");
  for (double e : epsilons) {
    if (!(e >= 0.0 && e <= 1.0)) {
      std::ostringstream msg;
      msg << "scenario: epsilon " << e << " outside [0, 1]";
      throw InvalidArgument(msg.str());
    }
  }
  const double tols[] = {tol.rank, tol.null, tol.gap, tol.chern, tol.parallel, tol.transport, perturb_amplitude};
  for (double t : tols) {
    if (!(t > 0.0) || !std::isfinite(t)) throw InvalidArgument("scenario: tolerances must be positive and finite");
  }
  if (nullity_grid < 4) throw InvalidArgument("scenario: nullity.grid must be >= 4");
  if (perturb_trials < 0) throw InvalidArgument("scenario: perturb.trials must be >= 0");
  if (texture == "bloch" && bloch_d != "qwz") throw InvalidArgument("scenario: bloch.d must be \"qwz\"");
  if (fourier.modes < 0) throw InvalidArgument("scenario: fourier.modes must be >= 0");
}

Scenario parse_scenario(std::istream& in, const std::string& name) {
  Scenario s;
  s.name = name;
  bool loops_given = false;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument("scenario line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string v = unquote(trim(line.substr(eq + 1)));
    if (key == "texture") s.texture = v;
    else if (key == "texture.sampled") s.sampled = to_bool(key, v);
    else if (key == "grid") s.n_kx = s.n_ky = static_cast<int>(to_int(key, v));
    else if (key == "grid.n_kx") s.n_kx = static_cast<int>(to_int(key, v));
    else if (key == "grid.n_ky") s.n_ky = static_cast<int>(to_int(key, v));
    else if (key == "epsilon") s.epsilons = parse_real_list(v);
    else if (key == "epsilon_sweep" || key == "epsilon.sweep") s.epsilons = parse_epsilon_sweep(v);
    else if (key == "torsion.variant") s.variant = parse_torsion_variant(v);
    else if (key == "loop") {
      if (!loops_given) s.loops.clear();
      loops_given = true;
      s.loops.push_back(v);
    }
    else if (key == "tol.rank") s.tol.rank = to_real(key, v);
    else if (key == "tol.null") s.tol.null = to_real(key, v);
    else if (key == "tol.gap") s.tol.gap = to_real(key, v);
    else if (key == "tol.chern") s.tol.chern = to_real(key, v);
    else if (key == "tol.parallel") s.tol.parallel = to_real(key, v);
    else if (key == "tol.transport") s.tol.transport = to_real(key, v);
    else if (key == "nullity.grid") s.nullity_grid = static_cast<int>(to_int(key, v));
    else if (key == "output.dir") s.out_dir = v;
    else if (key == "seed") s.seed = to_u64(key, v);
    else if (key == "perturb.trials") s.perturb_trials = static_cast<int>(to_int(key, v));
    else if (key == "perturb.amplitude") s.perturb_amplitude = to_real(key, v);
    else if (key == "output.dump_fields") s.dump_fields = to_bool(key, v);
    else if (key == "bloch.d") s.bloch_d = v;
    else if (key == "bloch.m") s.bloch_m = to_real(key, v);
    else if (key == "bloch.band") {
      if (v == "lower") s.bloch_band = Band::lower;
      else if (v == "upper") s.bloch_band = Band::upper;
      else throw InvalidArgument("scenario: bloch.band must be lower or upper");
    }
    else if (key == "weights") {
      const auto w = parse_real_list(v);
      if (w.size() != 2) throw InvalidArgument("scenario: weights expects [w_plus, w_minus]");
      s.weights = {w[0], w[1]};
    }
    else if (key == "fourier.seed") s.fourier.seed = to_u64(key, v);
    else if (key == "fourier.modes") s.fourier.modes = static_cast<int>(to_int(key, v));
    else if (key == "fourier.amplitude") s.fourier.amplitude = to_real(key, v);
    else if (key == "fourier.chern_plus") s.fourier.chern_plus = static_cast<int>(to_int(key, v));
    else if (key == "fourier.chern_minus") s.fourier.chern_minus = static_cast<int>(to_int(key, v));
    else throw InvalidArgument("scenario line " + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
  s.validate();
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open scenario file '" + path + "'");
  return parse_scenario(in, path);
}

Scenario example62_scenario() {
  Scenario s;
  s.name = "example62 (built-in counterflow)";
  s.texture = "counterflow";
  s.n_kx = s.n_ky = 64;
  s.epsilons = {0.25, 0.5, 1.0};
  return s;
}

GaugeTexture build_texture(const Scenario& s) {
  constexpr double twopi = 2.0 * std::numbers::pi;
  auto chart = std::make_shared<const GridChart>(s.n_kx, s.n_ky, twopi, twopi);
  GaugeTexture tex;
  if (s.texture == "flat") tex = make_flat_texture(chart);
  else if (s.texture == "counterflow") tex = make_counterflow_texture(chart);
  else if (s.texture == "bloch") {
    tex = bloch_berry_texture(qwz_texture(s.bloch_m, s.bloch_band), chart, s.weights, s.tol.gap);
  } else if (s.texture == "fourier") {
    tex = make_fourier_texture(chart, s.fourier);
  } else {
    throw InvalidArgument("unknown texture '" + s.texture + "'");
  }
  if (s.sampled && tex.analytic()) tex = sampled_copy(tex);
  return tex;
}

}  // namespace kkhol
