#pragma once

#include "rtomo/forward.hpp"
#include "rtomo/inversion.hpp"
#include "rtomo/scene.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

namespace rtomo::io {

/// File-system or format failure; carries the offending path.
class IoError : public std::runtime_error {
 public:
  IoError(const std::string& what, std::filesystem::path path)
      : std::runtime_error(what + ": " + path.string()), path_(std::move(path)) {}
  [[nodiscard]] const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Writes to a temporary sibling, then renames over `path`. Creates parent directories.
void write_atomic(const std::filesystem::path& path, const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

/// Shortest decimal form that round-trips a double (%.17g).
std::string format_double(double v);

/// CSV with header freq_hz,tx,rx,re,im; one row per (frequency, transmitter, receiver).
/// Noise metadata goes to `<path>.json`.
void write_data_csv(const std::filesystem::path& path, const ScatteredData& data);
ScatteredData read_data_csv(const std::filesystem::path& path);

/// Little-endian blob: "RTSD", u32 version, u32 n_freq, u32 n_tx, u32 n_rx, f64 freqs[n_freq],
/// then f64 re, f64 im for each (freq, tx, rx), then f64 noise_rel, u64 seed.
void write_data_binary(const std::filesystem::path& path, const ScatteredData& data);
ScatteredData read_data_binary(const std::filesystem::path& path);

/// Dispatches on extension (.csv or .bin).
void write_data(const std::filesystem::path& path, const ScatteredData& data);
ScatteredData read_data(const std::filesystem::path& path);

/// FNV-1a 64 over the binary serialization.
std::uint64_t data_checksum(const ScatteredData& data);
std::string hex64(std::uint64_t v);
std::uint64_t fnv1a(const std::string& bytes);

/// Rows are iy (top row iy = 0), columns ix. Square images only on read.
void write_image_csv(const std::filesystem::path& path, const ContrastImage& img);
ContrastImage read_image_csv(const std::filesystem::path& path);

/// 16-bit binary PGM scaled linearly from [lo, hi] with a `<path>.json` sidecar holding lo/hi.
/// lo = min and hi = max of the image unless given.
void write_pgm(const std::filesystem::path& path, const ContrastImage& img);
void write_pgm(const std::filesystem::path& path, const ContrastImage& img, double lo, double hi);

/// JSON summary of an inversion: method, metrics, tau schedule, per-stage timings and traces.
std::string report_json(const InversionReport& report, const ScatteredData& data);

}  // namespace rtomo::io
