#include "rtomo/io.hpp"

#include "json.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

namespace rtomo::io {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

void write_atomic(const fs::path& path, const std::string& bytes) {
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory (" + ec.message() + ")", path.parent_path());
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open for writing", tmp);
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    os.flush();
    if (!os) throw IoError("write failed", tmp);
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename temporary file into place", path);
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open for reading", path);
  std::ostringstream ss;
  ss << is.rdbuf();
  if (is.bad()) throw IoError("read failed", path);
  return ss.str();
}

std::string format_double(double v) {
  std::array<char, 40> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return buf.data();
}

namespace {

std::string noise_sidecar(const ScatteredData& data) {
  ordered_json j;
  j["noise_rel"] = data.noise.rel_energy;
  j["seed"] = data.noise.seed;
  j["n_freq"] = data.n_freq();
  j["n_tx"] = data.n_tx();
  j["n_rx"] = data.n_rx();
  return j.dump(2) + "\n";
}

fs::path sidecar_path(const fs::path& p) {
  fs::path s = p;
  s += ".json";
  return s;
}

double parse_double(const std::string& s, const fs::path& path, std::size_t line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw IoError("malformed number '" + s + "' on line " + std::to_string(line), path);
  }
}

template <class T>
void put(std::string& out, T v) {
  static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);
  std::array<char, sizeof(T)> b{};
  std::memcpy(b.data(), &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b.begin(), b.end());
  out.append(b.data(), b.size());
}

template <class T>
T get(const std::string& in, std::size_t& pos, const fs::path& path) {
  if (pos + sizeof(T) > in.size()) throw IoError("truncated binary data", path);
  std::array<char, sizeof(T)> b{};
  std::memcpy(b.data(), in.data() + pos, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b.begin(), b.end());
  pos += sizeof(T);
  T v;
  std::memcpy(&v, b.data(), sizeof(T));
  return v;
}

std::string serialize_binary(const ScatteredData& data) {
  std::string out = "RTSD";
  put<std::uint32_t>(out, 1);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(data.n_freq()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(data.n_tx()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(data.n_rx()));
  for (double f : data.freqs_hz) put<double>(out, f);
  for (const auto& y : data.Y)
    for (Eigen::Index t = 0; t < y.cols(); ++t)
      for (Eigen::Index r = 0; r < y.rows(); ++r) {
        put<double>(out, y(r, t).real());
        put<double>(out, y(r, t).imag());
      }
  put<double>(out, data.noise.rel_energy);
  put<std::uint64_t>(out, data.noise.seed);
  return out;
}

}  // namespace

void write_data_csv(const fs::path& path, const ScatteredData& data) {
  data.validate();
  std::string out = "freq_hz,tx,rx,re,im\n";
  for (int j = 0; j < data.n_freq(); ++j)
    for (int t = 0; t < data.n_tx(); ++t)
      for (int r = 0; r < data.n_rx(); ++r) {
        const cplx v = data.Y[j](r, t);
        out += format_double(data.freqs_hz[j]) + ',' + std::to_string(t) + ',' + std::to_string(r) + ',' +
               format_double(v.real()) + ',' + format_double(v.imag()) + '\n';
      }
  write_atomic(path, out);
  write_atomic(sidecar_path(path), noise_sidecar(data));
}

ScatteredData read_data_csv(const fs::path& path) {
  std::istringstream is(read_file(path));
  std::string line;
  if (!std::getline(is, line) || line != "freq_hz,tx,rx,re,im") throw IoError("missing data CSV header", path);
  std::vector<std::tuple<double, int, int, cplx>> rows;
  std::size_t lineno = 1;
  int max_tx = -1, max_rx = -1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cols.push_back(c);
    if (cols.size() != 5) throw IoError("expected 5 columns on line " + std::to_string(lineno), path);
    const double f = parse_double(cols[0], path, lineno);
    const double t = parse_double(cols[1], path, lineno);
    const double r = parse_double(cols[2], path, lineno);
    if (t < 0 || r < 0 || t != std::floor(t) || r != std::floor(r))
      throw IoError("bad transmitter/receiver index on line " + std::to_string(lineno), path);
    rows.emplace_back(f, static_cast<int>(t), static_cast<int>(r),
                      cplx(parse_double(cols[3], path, lineno), parse_double(cols[4], path, lineno)));
    max_tx = std::max(max_tx, static_cast<int>(t));
    max_rx = std::max(max_rx, static_cast<int>(r));
  }
  if (rows.empty()) throw IoError("data CSV has no rows", path);
  std::map<double, int> freq_index;
  for (const auto& row : rows) freq_index.emplace(std::get<0>(row), 0);
  ScatteredData d;
  for (auto& [f, idx] : freq_index) {
    idx = static_cast<int>(d.freqs_hz.size());
    d.freqs_hz.push_back(f);
  }
  const int nt = max_tx + 1, nr = max_rx + 1;
  if (rows.size() != d.freqs_hz.size() * static_cast<std::size_t>(nt) * static_cast<std::size_t>(nr))
    throw IoError("data CSV is not a complete frequency x tx x rx table", path);
  d.Y.assign(d.freqs_hz.size(), Eigen::MatrixXcd::Constant(nr, nt, cplx(std::nan(""), 0.0)));
  for (const auto& [f, t, r, v] : rows) d.Y[freq_index[f]](r, t) = v;
  for (const auto& y : d.Y)
    if (!y.allFinite()) throw IoError("data CSV has duplicate or missing entries", path);

  const fs::path side = sidecar_path(path);
  if (fs::exists(side)) {
    try {
      const auto j = nlohmann::json::parse(read_file(side));
      d.noise.rel_energy = j.at("noise_rel").get<double>();
      d.noise.seed = j.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
      throw IoError(std::string("malformed data sidecar (") + e.what() + ")", side);
    }
  }
  return d;
}

void write_data_binary(const fs::path& path, const ScatteredData& data) {
  data.validate();
  write_atomic(path, serialize_binary(data));
}

ScatteredData read_data_binary(const fs::path& path) {
  const std::string in = read_file(path);
  if (in.size() < 4 || in.compare(0, 4, "RTSD") != 0) throw IoError("not an RTSD data file", path);
  std::size_t pos = 4;
  const auto version = get<std::uint32_t>(in, pos, path);
  if (version != 1) throw IoError("unsupported data file version " + std::to_string(version), path);
  const auto nf = get<std::uint32_t>(in, pos, path);
  const auto nt = get<std::uint32_t>(in, pos, path);
  const auto nr = get<std::uint32_t>(in, pos, path);
  const std::size_t expected = 20 + 8ull * nf + 16ull * nf * nt * nr + 16;
  if (in.size() != expected) throw IoError("data file size does not match its header", path);
  ScatteredData d;
  for (std::uint32_t j = 0; j < nf; ++j) d.freqs_hz.push_back(get<double>(in, pos, path));
  for (std::uint32_t j = 0; j < nf; ++j) {
    Eigen::MatrixXcd y(nr, nt);
    for (std::uint32_t t = 0; t < nt; ++t)
      for (std::uint32_t r = 0; r < nr; ++r) {
        const double re = get<double>(in, pos, path);
        const double im = get<double>(in, pos, path);
        y(r, t) = cplx(re, im);
      }
    d.Y.push_back(std::move(y));
  }
  d.noise.rel_energy = get<double>(in, pos, path);
  d.noise.seed = get<std::uint64_t>(in, pos, path);
  try {
    d.validate();
  } catch (const std::invalid_argument& e) {
    throw IoError(e.what(), path);
  }
  return d;
}

void write_data(const fs::path& path, const ScatteredData& data) {
  if (path.extension() == ".bin") write_data_binary(path, data);
  else if (path.extension() == ".csv") write_data_csv(path, data);
  else throw IoError("unknown data extension (expected .csv or .bin)", path);
}

ScatteredData read_data(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("data file not found", path);
  if (path.extension() == ".bin") return read_data_binary(path);
  if (path.extension() == ".csv") return read_data_csv(path);
  throw IoError("unknown data extension (expected .csv or .bin)", path);
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t data_checksum(const ScatteredData& data) { return fnv1a(serialize_binary(data)); }

std::string hex64(std::uint64_t v) {
  std::array<char, 17> buf{};
  std::snprintf(buf.data(), buf.size(), "%016llx", static_cast<unsigned long long>(v));
  return buf.data();
}

void write_image_csv(const fs::path& path, const ContrastImage& img) {
  std::string out;
  for (int iy = 0; iy < img.grid.ny; ++iy) {
    for (int ix = 0; ix < img.grid.nx; ++ix) {
      if (ix) out += ',';
      out += format_double(img.at(ix, iy));
    }
    out += '\n';
  }
  write_atomic(path, out);
}

ContrastImage read_image_csv(const fs::path& path) {
  std::istringstream is(read_file(path));
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) row.push_back(parse_double(c, path, lineno));
    if (!rows.empty() && row.size() != rows.front().size()) throw IoError("ragged image CSV", path);
    rows.push_back(std::move(row));
  }
  const int n = static_cast<int>(rows.size());
  if (n == 0 || static_cast<int>(rows.front().size()) != n) throw IoError("image CSV must be square", path);
  const Grid g = Grid::unit_square(n);
  Eigen::VectorXd v(g.size());
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) v[g.index(ix, iy)] = rows[iy][ix];
  return ContrastImage(g, v);
}

void write_pgm(const fs::path& path, const ContrastImage& img) {
  write_pgm(path, img, img.min_value(), img.max_value());
}

void write_pgm(const fs::path& path, const ContrastImage& img, double lo, double hi) {
  std::string out = "P5\n" + std::to_string(img.grid.nx) + " " + std::to_string(img.grid.ny) + "\n65535\n";
  const double span = hi - lo;
  for (int iy = 0; iy < img.grid.ny; ++iy)
    for (int ix = 0; ix < img.grid.nx; ++ix) {
      double t = span > 0.0 ? (img.at(ix, iy) - lo) / span : 0.0;
      t = std::clamp(t, 0.0, 1.0);
      const auto q = static_cast<std::uint16_t>(std::lround(t * 65535.0));
      out += static_cast<char>(q >> 8);
      out += static_cast<char>(q & 0xff);
    }
  write_atomic(path, out);
  ordered_json j;
  j["min"] = lo;
  j["max"] = hi;
  j["maxval"] = 65535;
  j["rows"] = "iy";
  j["columns"] = "ix";
  write_atomic(sidecar_path(path), j.dump(2) + "\n");
}

std::string report_json(const InversionReport& report, const ScatteredData& data) {
  ordered_json j;
  j["method"] = to_string(report.method);
  j["dr"] = report.dr;
  if (report.snr) j["snr_db"] = *report.snr;
  else j["snr_db"] = nullptr;
  j["seconds"] = report.seconds;
  j["data_checksum"] = hex64(data_checksum(data));
  j["grid"] = {{"nx", report.image.grid.nx}, {"ny", report.image.grid.ny}};
  j["tau_schedule"] = report.tau_schedule;
  ordered_json stages = ordered_json::array();
  for (const auto& s : report.stages) {
    ordered_json st;
    st["stage"] = s.stage;
    st["batch"] = s.batch;
    st["tau"] = s.tau;
    st["sigma"] = s.sigma;
    st["misfit"] = s.misfit;
    st["iterations"] = s.trace.iterates.empty() ? 0 : s.trace.iterates.back().iter;
    st["stop"] = to_string(s.trace.reason);
    st["seconds"] = s.seconds;
    st["failed"] = s.failed;
    if (!s.note.empty()) st["note"] = s.note;
    stages.push_back(std::move(st));
  }
  j["stages"] = std::move(stages);
  return j.dump(2) + "\n";
}

}  // namespace rtomo::io
