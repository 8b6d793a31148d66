#include "rtomo/config.hpp"

#include "rtomo/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace rtomo {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out))
    throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
  return out;
}

int to_int(const std::string& key, const std::string& v) {
  int out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError("'" + key + "' expects an integer, got '" + v + "'");
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError("'" + key + "' expects an unsigned integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("'" + key + "' expects true or false, got '" + v + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
  if (out.empty()) throw ConfigError("'" + key + "' expects a comma-separated list");
  return out;
}

std::string list_text(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += io::format_double(v[i]);
  }
  return s;
}

std::string solver_text(LinearSolver s) {
  switch (s) {
    case LinearSolver::gmres: return "gmres";
    case LinearSolver::dense_lu: return "dense";
    case LinearSolver::automatic: return "auto";
  }
  return "auto";
}

std::filesystem::path path_value(const std::string& v) { return v == "none" ? std::filesystem::path() : std::filesystem::path(v); }

std::string path_text(const std::filesystem::path& p) { return p.empty() ? "none" : p.string(); }

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"phantom", [](auto& c, auto&, auto& v) { c.phantom = v; }},
      {"n", [](auto& c, auto& k, auto& v) { c.n = to_int(k, v); }},
      {"synthesis_n", [](auto& c, auto& k, auto& v) { c.synthesis_n = to_int(k, v); }},
      {"fmax", [](auto& c, auto& k, auto& v) { c.fmax = to_double(k, v); }},
      {"cylinder_c", [](auto& c, auto& k, auto& v) { c.cylinder_c = to_double(k, v); }},
      {"frequency_count", [](auto& c, auto& k, auto& v) { c.frequency_count = to_int(k, v); }},
      {"frequencies_mhz",
       [](auto& c, auto& k, auto& v) {
         if (v == "none") c.frequencies_mhz.clear();
         else c.frequencies_mhz = to_list(k, v);
       }},
      {"noise_rel", [](auto& c, auto& k, auto& v) { c.noise_rel = to_double(k, v); }},
      {"seed", [](auto& c, auto& k, auto& v) { c.seed = to_u64(k, v); }},
      {"method",
       [](auto& c, auto&, auto& v) {
         try {
           c.method = parse_method(v);
         } catch (const std::invalid_argument& e) {
           throw ConfigError(e.what());
         }
       }},
      {"tau",
       [](auto& c, auto& k, auto& v) {
         if (v == "auto") c.tau.reset();
         else c.tau = to_double(k, v);
       }},
      {"noise_level",
       [](auto& c, auto& k, auto& v) {
         if (v == "auto") c.noise_level.reset();
         else c.noise_level = to_double(k, v);
       }},
      {"gmres_tol", [](auto& c, auto& k, auto& v) { c.gmres_tol = to_double(k, v); }},
      {"gmres_restart", [](auto& c, auto& k, auto& v) { c.gmres_restart = to_int(k, v); }},
      {"gmres_max_iterations", [](auto& c, auto& k, auto& v) { c.gmres_max_iterations = to_int(k, v); }},
      {"solver",
       [](auto& c, auto&, auto& v) {
         if (v == "gmres") c.solver = LinearSolver::gmres;
         else if (v == "dense") c.solver = LinearSolver::dense_lu;
         else if (v == "auto") c.solver = LinearSolver::automatic;
         else throw ConfigError("'solver' expects gmres, dense or auto, got '" + v + "'");
       }},
      {"max_outer", [](auto& c, auto& k, auto& v) { c.max_outer = to_int(k, v); }},
      {"cisor_max_outer", [](auto& c, auto& k, auto& v) { c.cisor_max_outer = to_int(k, v); }},
      {"inner_iterations", [](auto& c, auto& k, auto& v) { c.inner_iterations = to_int(k, v); }},
      {"prox_iterations", [](auto& c, auto& k, auto& v) { c.prox_iterations = to_int(k, v); }},
      {"grad_tol", [](auto& c, auto& k, auto& v) { c.grad_tol = to_double(k, v); }},
      {"memory", [](auto& c, auto& k, auto& v) { c.memory = to_int(k, v); }},
      {"conjugate_polar", [](auto& c, auto& k, auto& v) { c.conjugate_polar = to_bool(k, v); }},
      {"normalize", [](auto& c, auto& k, auto& v) { c.normalize = to_bool(k, v); }},
      {"threads", [](auto& c, auto& k, auto& v) { c.threads = to_int(k, v); }},
      {"out_dir", [](auto& c, auto&, auto& v) { c.out_dir = v; }},
      {"data", [](auto& c, auto&, auto& v) { c.data = path_value(v); }},
      {"image", [](auto& c, auto&, auto& v) { c.image = path_value(v); }},
      {"truth", [](auto& c, auto&, auto& v) { c.truth = path_value(v); }},
      {"c_min", [](auto& c, auto& k, auto& v) { c.c_min = to_double(k, v); }},
      {"c_max", [](auto& c, auto& k, auto& v) { c.c_max = to_double(k, v); }},
      {"c_steps", [](auto& c, auto& k, auto& v) { c.c_steps = to_int(k, v); }},
      {"landscape_n", [](auto& c, auto& k, auto& v) { c.landscape_n = to_int(k, v); }},
      {"landscape_batch", [](auto& c, auto& k, auto& v) { c.landscape_batch = to_int(k, v); }},
      {"spectrum_n", [](auto& c, auto& k, auto& v) { c.spectrum_n = to_int(k, v); }},
      {"spectrum_freqs_ghz", [](auto& c, auto& k, auto& v) { c.spectrum_freqs_ghz = to_list(k, v); }},
      {"spectrum_contrast", [](auto& c, auto& k, auto& v) { c.spectrum_contrast = to_double(k, v); }},
  };
  return table;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::set<std::string> seen;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError("line " + std::to_string(lineno) + ": repeated key '" + key + "'");
    if (value.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty value for '" + key + "'");
    it->second(cfg, key, value);
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file: " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

void ExperimentConfig::validate() const {
  static const std::set<std::string> phantoms = {"shepp-logan", "layered", "pipes", "cylinder"};
  if (!phantoms.count(phantom)) throw ConfigError("unknown phantom '" + phantom + "'");
  if (n < 8) throw ConfigError("n must be >= 8");
  if (synthesis_n != 0 && synthesis_n < 8) throw ConfigError("synthesis_n must be 0 or >= 8");
  if (!(fmax >= 0.0)) throw ConfigError("fmax must be >= 0");
  if (!(cylinder_c >= 0.0)) throw ConfigError("cylinder_c must be >= 0");
  if (frequency_count < 0 || frequency_count > 47) throw ConfigError("frequency_count must be in [0, 47]");
  if (!frequencies_mhz.empty()) {
    for (std::size_t i = 0; i < frequencies_mhz.size(); ++i) {
      if (!(frequencies_mhz[i] > 0.0)) throw ConfigError("frequencies_mhz entries must be positive");
      if (i && !(frequencies_mhz[i] > frequencies_mhz[i - 1]))
        throw ConfigError("frequencies_mhz must be strictly increasing");
    }
  }
  if (!(noise_rel >= 0.0)) throw ConfigError("noise_rel must be >= 0");
  if (tau && !(*tau >= 0.0)) throw ConfigError("tau must be >= 0 or 'auto'");
  if (noise_level && !(*noise_level >= 0.0)) throw ConfigError("noise_level must be >= 0 or 'auto'");
  if (!(gmres_tol > 0.0 && gmres_tol < 1.0)) throw ConfigError("gmres_tol must be in (0, 1)");
  if (gmres_restart < 1 || gmres_max_iterations < 1) throw ConfigError("GMRES limits must be positive");
  if (max_outer < 0 || cisor_max_outer < 0) throw ConfigError("iteration caps must be >= 0");
  if (inner_iterations < 1 || prox_iterations < 1) throw ConfigError("inner iteration counts must be positive");
  if (!(grad_tol > 0.0)) throw ConfigError("grad_tol must be positive");
  if (memory < 0) throw ConfigError("memory must be >= 0");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (!(c_max > c_min) || c_steps < 2) throw ConfigError("landscape sweep needs c_max > c_min and c_steps >= 2");
  if (landscape_n < 8 || landscape_batch < 1) throw ConfigError("landscape_n must be >= 8 and landscape_batch >= 1");
  if (spectrum_n < 8) throw ConfigError("spectrum_n must be >= 8");
  for (double f : spectrum_freqs_ghz)
    if (!(f > 0.0)) throw ConfigError("spectrum_freqs_ghz entries must be positive");
  if (!(spectrum_contrast >= 0.0)) throw ConfigError("spectrum_contrast must be >= 0");
}

FrequencySchedule ExperimentConfig::schedule() const {
  if (!frequencies_mhz.empty()) {
    std::vector<double> hz;
    for (double f : frequencies_mhz) hz.push_back(f * 1e6);
    return FrequencySchedule(hz);
  }
  const FrequencySchedule all = frequency_bands();
  return frequency_count == 0 ? all : all.subsample(frequency_count);
}

ForwardOptions ExperimentConfig::forward_options() const {
  ForwardOptions o;
  o.gmres.tol = gmres_tol;
  o.gmres.restart = gmres_restart;
  o.gmres.max_iterations = gmres_max_iterations;
  o.solver = solver;
  return o;
}

InversionConfig ExperimentConfig::inversion_config() const {
  InversionConfig c;
  c.forward = forward_options();
  c.qn.i_max = max_outer;
  c.cisor_i_max = cisor_max_outer;
  c.qn.inner_t_max = inner_iterations;
  c.qn.prox.t_max = prox_iterations;
  c.qn.grad_tol = grad_tol;
  c.qn.memory = memory;
  c.conjugate_polar = conjugate_polar;
  c.normalize = normalize;
  return c;
}

LandscapeOptions ExperimentConfig::landscape_options() const {
  LandscapeOptions o;
  o.c_star = cylinder_c;
  o.c_min = c_min;
  o.c_max = c_max;
  o.c_steps = c_steps;
  o.n = landscape_n;
  o.batch = landscape_batch;
  o.forward = forward_options();
  return o;
}

SpectrumOptions ExperimentConfig::spectrum_options() const {
  SpectrumOptions o;
  o.freqs_hz.clear();
  for (double g : spectrum_freqs_ghz) o.freqs_hz.push_back(g * 1e9);
  std::sort(o.freqs_hz.begin(), o.freqs_hz.end());
  o.n = spectrum_n;
  o.contrast = spectrum_contrast;
  o.forward = forward_options();
  return o;
}

ContrastImage ExperimentConfig::phantom_image(int cells) const {
  if (phantom == "shepp-logan") return shepp_logan_phantom(cells, fmax);
  if (phantom == "layered") return layered_phantom(cells, fmax);
  if (phantom == "pipes") return pipes_phantom(cells, fmax);
  return cylinder_scene(cylinder_c, cells);
}

std::string ExperimentConfig::canonical() const {
  std::ostringstream os;
  os << "phantom = " << phantom << '\n'
     << "n = " << n << '\n'
     << "synthesis_n = " << synthesis_n << '\n'
     << "fmax = " << io::format_double(fmax) << '\n'
     << "cylinder_c = " << io::format_double(cylinder_c) << '\n'
     << "frequency_count = " << frequency_count << '\n'
     << "frequencies_mhz = " << (frequencies_mhz.empty() ? "none" : list_text(frequencies_mhz)) << '\n'
     << "noise_rel = " << io::format_double(noise_rel) << '\n'
     << "seed = " << seed << '\n'
     << "method = " << to_string(method) << '\n'
     << "tau = " << (tau ? io::format_double(*tau) : "auto") << '\n'
     << "noise_level = " << (noise_level ? io::format_double(*noise_level) : "auto") << '\n'
     << "gmres_tol = " << io::format_double(gmres_tol) << '\n'
     << "gmres_restart = " << gmres_restart << '\n'
     << "gmres_max_iterations = " << gmres_max_iterations << '\n'
     << "solver = " << solver_text(solver) << '\n'
     << "max_outer = " << max_outer << '\n'
     << "cisor_max_outer = " << cisor_max_outer << '\n'
     << "inner_iterations = " << inner_iterations << '\n'
     << "prox_iterations = " << prox_iterations << '\n'
     << "grad_tol = " << io::format_double(grad_tol) << '\n'
     << "memory = " << memory << '\n'
     << "conjugate_polar = " << (conjugate_polar ? "true" : "false") << '\n'
     << "normalize = " << (normalize ? "true" : "false") << '\n'
     << "threads = " << threads << '\n'
     << "out_dir = " << out_dir.string() << '\n'
     << "data = " << path_text(data) << '\n'
     << "image = " << path_text(image) << '\n'
     << "truth = " << path_text(truth) << '\n'
     << "c_min = " << io::format_double(c_min) << '\n'
     << "c_max = " << io::format_double(c_max) << '\n'
     << "c_steps = " << c_steps << '\n'
     << "landscape_n = " << landscape_n << '\n'
     << "landscape_batch = " << landscape_batch << '\n'
     << "spectrum_n = " << spectrum_n << '\n'
     << "spectrum_freqs_ghz = " << list_text(spectrum_freqs_ghz) << '\n'
     << "spectrum_contrast = " << io::format_double(spectrum_contrast) << '\n';
  return os.str();
}

}  // namespace rtomo
