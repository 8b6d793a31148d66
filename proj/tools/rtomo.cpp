// rtomo: synthesize data, run inversions, and reproduce the landscape and spectrum demos.

#include "CLI11.hpp"
#include "json.hpp"

#include "rtomo/config.hpp"
#include "rtomo/demos.hpp"
#include "rtomo/errors.hpp"
#include "rtomo/forward.hpp"
#include "rtomo/inversion.hpp"
#include "rtomo/io.hpp"
#include "rtomo/parallel.hpp"

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#ifndef RTOMO_VERSION
#define RTOMO_VERSION "unknown"
#endif

using namespace rtomo;
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

enum Exit { ok = 0, config_error = 1, solver_failure = 2, io_error = 3 };

struct Common {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<double> tol;
};

ExperimentConfig load(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : load_config(c.config);
  if (c.out) cfg.out_dir = *c.out;
  if (c.seed) cfg.seed = *c.seed;
  if (c.threads) cfg.threads = *c.threads;
  if (c.tol) cfg.gmres_tol = *c.tol;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  set_thread_count(cfg.threads);
  return cfg;
}

void write_manifest(const ExperimentConfig& cfg, const std::string& command, const json& outputs) {
  // The output location is not part of the experiment's identity.
  ExperimentConfig id = cfg;
  id.out_dir = ".";
  const std::string text = id.canonical();
  json m;
  m["command"] = command;
  m["version"] = RTOMO_VERSION;
  m["config_hash"] = io::hex64(io::fnv1a(text));
  m["seed"] = cfg.seed;
  m["threads"] = cfg.threads;
  m["config"] = text;
  m["outputs"] = outputs;
  io::write_atomic(cfg.out_dir / "manifest.json", m.dump(2) + "\n");
}

std::string matrix_csv(const Eigen::MatrixXd& m, const std::string& header) {
  std::ostringstream os;
  if (!header.empty()) os << header << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) os << (c ? "," : "") << io::format_double(m(r, c));
    os << '\n';
  }
  return os.str();
}

std::vector<GreenOperators> operators_for(const Grid& grid, const std::vector<double>& freqs_hz) {
  const AcquisitionGeometry acq = default_acquisition();
  return build_operator_bank(grid, acq, FrequencySchedule(freqs_hz), SourceSpec::flat(static_cast<int>(acq.tx.size())));
}

fs::path data_path(const ExperimentConfig& cfg) { return cfg.data.empty() ? cfg.out_dir / "data.bin" : cfg.data; }

int cmd_synthesize(const ExperimentConfig& cfg) {
  const int ns = cfg.synthesis_grid();
  // Finer synthesis grids take the inversion-grid scene by nearest-neighbour upsampling.
  const ContrastImage truth = cfg.phantom_image(cfg.n);
  const ContrastImage model = ns == cfg.n ? truth : resample_nearest(truth, ns);
  const auto bank = operators_for(model.grid, cfg.schedule().frequencies());
  ScatteredData data = simulate(bank, model, cfg.forward_options());
  if (cfg.noise_rel > 0.0) data = add_noise(data, cfg.noise_rel, cfg.seed);

  io::write_data(cfg.out_dir / "data.bin", data);
  io::write_data(cfg.out_dir / "data.csv", data);
  io::write_image_csv(cfg.out_dir / "truth.csv", truth);
  io::write_pgm(cfg.out_dir / "truth.pgm", truth);
  json out;
  out["data"] = "data.bin";
  out["data_csv"] = "data.csv";
  out["truth"] = "truth.csv";
  out["data_checksum"] = io::hex64(io::data_checksum(data));
  out["frequencies"] = data.n_freq();
  out["synthesis_grid"] = ns;
  write_manifest(cfg, "synthesize", out);
  std::cout << "wrote " << data.n_freq() << " frequencies x " << data.n_tx() << " tx x " << data.n_rx() << " rx to "
            << (cfg.out_dir / "data.bin").string() << '\n';
  return ok;
}

std::optional<ContrastImage> reference_image(const ExperimentConfig& cfg) {
  if (!cfg.truth.empty()) return io::read_image_csv(cfg.truth);
  if (cfg.phantom.empty()) return std::nullopt;
  return cfg.phantom_image(cfg.n);
}

int cmd_invert(const ExperimentConfig& cfg) {
  const ScatteredData data = io::read_data(data_path(cfg));
  const Grid grid = Grid::unit_square(cfg.n);
  const auto bank = operators_for(grid, data.freqs_hz);
  const std::optional<ContrastImage> truth = reference_image(cfg);
  if (truth && truth->grid.nx != cfg.n) throw ConfigError("truth image does not match the inversion grid");

  double param = 0.0;
  if (cfg.method == Method::sf_sigma) {
    param = cfg.noise_level.value_or(cfg.noise_rel);
  } else if (cfg.tau) {
    param = *cfg.tau;
  } else if (truth) {
    param = TVOperator(grid).tv(truth->values);
  } else {
    throw ConfigError("tau is required when no reference image is available");
  }

  InversionConfig ic = cfg.inversion_config();
  const fs::path stage_dir = cfg.out_dir / "stages";
  ic.on_stage = [&](const StageRecord& s) {
    char name[32];
    std::snprintf(name, sizeof name, "stage_%03d.csv", s.stage);
    io::write_image_csv(stage_dir / name, ContrastImage(grid, s.f));
    std::cerr << "stage " << s.stage << " tau " << s.tau << " misfit " << s.misfit << (s.failed ? " FAILED" : "")
              << '\n';
  };
  InversionReport report = run_inversion(cfg.method, data, bank, grid, param, ic);
  if (truth) report.snr = metric_snr(report.image.values, truth->values);

  io::write_image_csv(cfg.out_dir / "image.csv", report.image);
  io::write_pgm(cfg.out_dir / "image.pgm", report.image);
  io::write_atomic(cfg.out_dir / "report.json", io::report_json(report, data));
  json out;
  out["image"] = "image.csv";
  out["report"] = "report.json";
  out["data"] = data_path(cfg).string();
  out["data_checksum"] = io::hex64(io::data_checksum(data));
  write_manifest(cfg, "invert", out);

  std::cout << to_string(report.method) << " DR " << report.dr;
  if (report.snr) std::cout << " SNR " << *report.snr << " dB";
  std::cout << '\n';
  const bool last_failed = !report.stages.empty() && report.stages.back().failed;
  return last_failed ? solver_failure : ok;
}

int cmd_landscape(const ExperimentConfig& cfg) {
  const LandscapeResult r = landscape(cfg.schedule(), default_acquisition(), cfg.landscape_options());
  const Eigen::Index nc = static_cast<Eigen::Index>(r.c.size());
  const Eigen::Map<const Eigen::VectorXd> c(r.c.data(), nc);
  auto with_c = [&](const Eigen::MatrixXd& m) {
    Eigen::MatrixXd out(nc, m.cols() + 1);
    out << c, m;
    return out;
  };
  std::string freq_header = "c";
  for (double f : r.freqs_hz) freq_header += ",f" + io::format_double(f);
  std::string sliding_header = "c";
  for (Eigen::Index s = 0; s < r.sliding.cols(); ++s) sliding_header += ",batch" + std::to_string(s);

  io::write_atomic(cfg.out_dir / "landscape_per_frequency.csv", matrix_csv(with_c(r.per_frequency), freq_header));
  io::write_atomic(cfg.out_dir / "landscape_incremental.csv", matrix_csv(with_c(r.incremental), freq_header));
  io::write_atomic(cfg.out_dir / "landscape_sliding.csv", matrix_csv(with_c(r.sliding), sliding_header));
  json minima = json::array();
  for (Eigen::Index j = 0; j < r.per_frequency.cols(); ++j)
    minima.push_back({{"freq_hz", r.freqs_hz[j]}, {"local_minima", count_local_minima(r.per_frequency.col(j))}});
  json out;
  out["per_frequency"] = "landscape_per_frequency.csv";
  out["incremental"] = "landscape_incremental.csv";
  out["sliding"] = "landscape_sliding.csv";
  out["local_minima"] = minima;
  write_manifest(cfg, "demo-landscape", out);
  return ok;
}

int cmd_spectrum(const ExperimentConfig& cfg) {
  const SpectrumResult r = spectrum_demo(cfg.spectrum_options());
  io::write_atomic(cfg.out_dir / "spectrum_transmission.csv", matrix_csv(r.transmission.magnitude, ""));
  io::write_atomic(cfg.out_dir / "spectrum_reflection.csv", matrix_csv(r.reflection.magnitude, ""));
  io::write_image_csv(cfg.out_dir / "object.csv", ContrastImage(r.grid, r.object));
  io::write_image_csv(cfg.out_dir / "recon_transmission.csv", ContrastImage(r.grid, r.transmission.reconstruction));
  io::write_image_csv(cfg.out_dir / "recon_reflection.csv", ContrastImage(r.grid, r.reflection.reconstruction));
  json out;
  out["transmission"] = {{"spectrum", "spectrum_transmission.csv"},
                         {"low_band_fraction", r.transmission.low_band_fraction}};
  out["reflection"] = {{"spectrum", "spectrum_reflection.csv"}, {"low_band_fraction", r.reflection.low_band_fraction}};
  write_manifest(cfg, "demo-spectrum", out);
  std::cout << "low-band fraction: transmission " << r.transmission.low_band_fraction << ", reflection "
            << r.reflection.low_band_fraction << '\n';
  return ok;
}

int cmd_metrics(const ExperimentConfig& cfg) {
  if (cfg.image.empty()) throw ConfigError("metrics needs `image` in the config");
  const ContrastImage img = io::read_image_csv(cfg.image);
  if (img.grid.nx != cfg.n) throw ConfigError("image does not match the configured grid size n");
  const ScatteredData data = io::read_data(data_path(cfg));
  const auto bank = operators_for(img.grid, data.freqs_hz);
  json m;
  m["dr"] = metric_dr(img.values, data, bank, cfg.forward_options());
  if (const auto truth = reference_image(cfg)) m["snr_db"] = metric_snr(img.values, truth->values);
  m["tv"] = TVOperator(img.grid).tv(img.values);
  m["data_checksum"] = io::hex64(io::data_checksum(data));
  const std::string text = m.dump(2) + "\n";
  io::write_atomic(cfg.out_dir / "metrics.json", text);
  std::cout << text;
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reflection tomography: data synthesis, constrained inversion and demos"};
  app.set_version_flag("--version", RTOMO_VERSION);
  app.require_subcommand(1);
  Common common;

  auto add = [&](const std::string& name, const std::string& help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", common.config, "key = value experiment file")->check(CLI::ExistingFile);
    sub->add_option("--out", common.out, "output directory");
    sub->add_option("--seed", common.seed, "noise seed");
    sub->add_option("--threads", common.threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--tol", common.tol, "GMRES relative tolerance")->check(CLI::Range(0.0, 1.0));
    return sub;
  };
  CLI::App* synth = add("synthesize", "simulate scattered data for the configured phantom");
  CLI::App* inv = add("invert", "reconstruct the contrast from a data file");
  CLI::App* land = add("demo-landscape", "misfit versus cylinder contrast, per frequency and batched");
  CLI::App* spec = add("demo-spectrum", "spatial spectra of reflection and transmission reconstructions");
  CLI::App* met = add("metrics", "DR and SNR of an image against data and a reference");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : config_error;
  }

  try {
    const ExperimentConfig cfg = load(common);
    if (synth->parsed()) return cmd_synthesize(cfg);
    if (inv->parsed()) return cmd_invert(cfg);
    if (land->parsed()) return cmd_landscape(cfg);
    if (spec->parsed()) return cmd_spectrum(cfg);
    if (met->parsed()) return cmd_metrics(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const io::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return io_error;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << " (residual " << e.achieved_residual() << ")\n";
    return solver_failure;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return solver_failure;
  }
  return config_error;
}
