#pragma once

#include "rtomo/demos.hpp"
#include "rtomo/inversion.hpp"
#include "rtomo/scene.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rtomo {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Experiment description read from a `key = value` file. See README for the key list.
struct ExperimentConfig {
  std::string phantom = "layered";  // shepp-logan | layered | pipes | cylinder
  int n = 16;                       // inversion grid
  int synthesis_n = 0;              // 0: same as n
  double fmax = 1.0;
  double cylinder_c = 10.0;

  int frequency_count = 12;  // evenly subsampled from the 47-frequency band list; 0 keeps all
  std::vector<double> frequencies_mhz;  // explicit list; overrides frequency_count

  double noise_rel = 0.0;
  std::uint64_t seed = 1;

  Method method = Method::sf_tau;
  std::optional<double> tau;  // empty: TV of the true image on the inversion grid
  std::optional<double> noise_level;  // sf-sigma; empty: noise_rel

  double gmres_tol = 1e-8;
  int gmres_restart = 50;
  int gmres_max_iterations = 1000;
  LinearSolver solver = LinearSolver::automatic;
  int max_outer = 500;
  int cisor_max_outer = 5000;
  int inner_iterations = 200;
  int prox_iterations = 2000;
  double grad_tol = 1e-6;
  int memory = 10;
  bool conjugate_polar = true;
  bool normalize = true;
  int threads = 1;

  std::filesystem::path out_dir = "out";
  std::filesystem::path data;   // invert / metrics input
  std::filesystem::path image;  // metrics input
  std::filesystem::path truth;  // optional reference image for SNR

  double c_min = 0.0;
  double c_max = 20.0;
  int c_steps = 41;
  int landscape_n = 16;
  int landscape_batch = 10;

  int spectrum_n = 64;
  std::vector<double> spectrum_freqs_ghz{2.0, 3.0, 5.0};
  double spectrum_contrast = 0.05;

  /// Throws ConfigError on inconsistent values.
  void validate() const;
  [[nodiscard]] int synthesis_grid() const { return synthesis_n > 0 ? synthesis_n : n; }
  [[nodiscard]] FrequencySchedule schedule() const;
  [[nodiscard]] ForwardOptions forward_options() const;
  [[nodiscard]] InversionConfig inversion_config() const;
  [[nodiscard]] LandscapeOptions landscape_options() const;
  [[nodiscard]] SpectrumOptions spectrum_options() const;
  /// True image for the configured phantom at `cells` x `cells`.
  [[nodiscard]] ContrastImage phantom_image(int cells) const;
  /// One `key = value` line per field in a fixed order; equal configs give equal text.
  [[nodiscard]] std::string canonical() const;
};

/// Parses `key = value` lines; '#' starts a comment. Unknown or repeated keys are errors.
ExperimentConfig parse_config(const std::string& text);
/// Reads and parses a file. A missing file is a ConfigError.
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace rtomo
