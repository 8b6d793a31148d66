#include "doctest.h"

#include "support.hpp"

#include "rtomo/config.hpp"
#include "rtomo/io.hpp"

#include <filesystem>
#include <fstream>

using namespace rtomo;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("rtomo_io_test_" + std::to_string(::getpid())) / name;
  fs::create_directories(p.parent_path());
  return p;
}

ScatteredData sample_data() {
  std::mt19937_64 rng(5);
  ScatteredData d;
  d.freqs_hz = {1e7, 2.5e8, 1.9999e9};
  for (int j = 0; j < 3; ++j) {
    Eigen::MatrixXcd y(5, 4);
    for (int c = 0; c < 4; ++c) y.col(c) = testing::random_cvector(rng, 5) * 1e-3;
    d.Y.push_back(y);
  }
  d.noise = {0.1, 77};
  return d;
}

bool same(const ScatteredData& a, const ScatteredData& b) {
  if (a.freqs_hz != b.freqs_hz || a.Y.size() != b.Y.size()) return false;
  for (std::size_t j = 0; j < a.Y.size(); ++j)
    if (a.Y[j] != b.Y[j]) return false;
  return a.noise.rel_energy == b.noise.rel_energy && a.noise.seed == b.noise.seed;
}

}  // namespace

TEST_CASE("data files round-trip exactly in both formats") {
  const ScatteredData d = sample_data();
  for (const char* name : {"d.csv", "d.bin"}) {
    const fs::path p = scratch(name);
    io::write_data(p, d);
    const ScatteredData back = io::read_data(p);
    CHECK(same(d, back));
    const std::string first = io::read_file(p);
    io::write_data(p, back);
    CHECK(io::read_file(p) == first);
  }
  CHECK(io::data_checksum(d) == io::data_checksum(io::read_data(scratch("d.csv"))));
  ScatteredData other = d;
  other.Y[1](2, 3) += 1e-18;
  CHECK(io::data_checksum(d) != io::data_checksum(other));
  CHECK(io::hex64(0xabcULL) == "0000000000000abc");
  CHECK(io::fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(io::fnv1a("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("binary layout") {
  const ScatteredData d = sample_data();
  const fs::path p = scratch("layout.bin");
  io::write_data_binary(p, d);
  const std::string b = io::read_file(p);
  CHECK(b.substr(0, 4) == "RTSD");
  CHECK(b.size() == 4 + 4 * 4 + 8 * 3 + 16 * 3 * 4 * 5 + 16);
  CHECK(static_cast<unsigned char>(b[4]) == 1);  // version, little-endian
  CHECK(static_cast<unsigned char>(b[8]) == 3);
  CHECK(static_cast<unsigned char>(b[12]) == 4);
  CHECK(static_cast<unsigned char>(b[16]) == 5);
  double f0 = 0.0;
  std::memcpy(&f0, b.data() + 20, 8);
  CHECK(f0 == 1e7);
  double re = 0.0;
  std::memcpy(&re, b.data() + 44, 8);
  CHECK(re == d.Y[0](0, 0).real());

  io::write_atomic(p, b.substr(0, b.size() - 3));
  CHECK_THROWS_AS(io::read_data(p), io::IoError);
  io::write_atomic(p, "XXXX" + b.substr(4));
  CHECK_THROWS_AS(io::read_data(p), io::IoError);
}

TEST_CASE("missing and malformed files name the path") {
  const fs::path p = scratch("nope.bin");
  fs::remove(p);
  try {
    (void)io::read_data(p);
    FAIL("expected IoError");
  } catch (const io::IoError& e) {
    CHECK(std::string(e.what()).find("nope.bin") != std::string::npos);
    CHECK(e.path() == p);
  }
  const fs::path c = scratch("bad.csv");
  io::write_atomic(c, "freq_hz,tx,rx,re,im\n1,0,0,zz,0\n");
  CHECK_THROWS_AS(io::read_data(c), io::IoError);
  CHECK_THROWS_AS(io::read_data(scratch("x.txt")), io::IoError);
}

TEST_CASE("images round-trip through CSV and export to PGM") {
  const ContrastImage img = shepp_logan_phantom(16, 3.0);
  const fs::path p = scratch("img.csv");
  io::write_image_csv(p, img);
  const ContrastImage back = io::read_image_csv(p);
  CHECK(back.values == img.values);
  CHECK(back.grid.nx == 16);
  const std::string first = io::read_file(p);
  io::write_image_csv(p, back);
  CHECK(io::read_file(p) == first);

  const fs::path g = scratch("img.pgm");
  io::write_pgm(g, img);
  const std::string pgm = io::read_file(g);
  CHECK(pgm.rfind("P5\n16 16\n65535\n", 0) == 0);
  CHECK(pgm.size() == std::string("P5\n16 16\n65535\n").size() + 16 * 16 * 2);
  CHECK(fs::exists(g.string() + ".json"));
}

TEST_CASE("atomic writes leave no temporaries and create directories") {
  const fs::path dir = scratch("nested") / "a" / "b";
  io::write_atomic(dir / "f.txt", "hello");
  CHECK(io::read_file(dir / "f.txt") == "hello");
  int entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++entries;
  CHECK(entries == 1);
  CHECK(io::format_double(0.1) == "0.10000000000000001");
  CHECK(std::stod(io::format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("config parsing") {
  const ExperimentConfig c = parse_config(
      "# comment\n"
      "phantom = shepp-logan\n"
      "n = 16   # trailing comment\n"
      "method = sf-sigma\n"
      "noise_rel = 0.2\n"
      "tau = 3.5\n"
      "frequencies_mhz = 10, 100,1000\n"
      "solver = dense\n");
  CHECK(c.phantom == "shepp-logan");
  CHECK(c.n == 16);
  CHECK(c.method == Method::sf_sigma);
  CHECK(*c.tau == 3.5);
  CHECK(c.schedule().size() == 3);
  CHECK(c.schedule().frequency(1) == doctest::Approx(1e8));
  CHECK(c.forward_options().solver == LinearSolver::dense_lu);
  CHECK(parse_config("").schedule().size() == 12);
  CHECK(parse_config("frequency_count = 0").schedule().size() == 47);

  // canonical() is a fixed point of parsing.
  const ExperimentConfig d = parse_config(c.canonical());
  CHECK(d.canonical() == c.canonical());
  CHECK(parse_config(ExperimentConfig{}.canonical()).canonical() == ExperimentConfig{}.canonical());

  CHECK_THROWS_AS(parse_config("bogus = 1"), ConfigError);
  CHECK_THROWS_AS(parse_config("n = 16\nn = 32"), ConfigError);
  CHECK_THROWS_AS(parse_config("n = sixteen"), ConfigError);
  CHECK_THROWS_AS(parse_config("n = 4"), ConfigError);
  CHECK_THROWS_AS(parse_config("n ="), ConfigError);
  CHECK_THROWS_AS(parse_config("phantom = teapot"), ConfigError);
  CHECK_THROWS_AS(parse_config("method = newton"), ConfigError);
  CHECK_THROWS_AS(parse_config("gmres_tol = 2"), ConfigError);
  CHECK_THROWS_AS(parse_config("frequencies_mhz = 100, 50"), ConfigError);
  CHECK_THROWS_AS(parse_config("just a line"), ConfigError);
  CHECK_THROWS_AS(load_config(scratch("missing.cfg")), ConfigError);
}

TEST_CASE("config-derived objects") {
  ExperimentConfig c;
  c.phantom = "layered";
  c.n = 16;
  c.synthesis_n = 24;
  CHECK(c.synthesis_grid() == 24);
  CHECK(c.phantom_image(24).grid.nx == 24);
  c.max_outer = 7;
  c.memory = 3;
  const InversionConfig ic = c.inversion_config();
  CHECK(ic.qn.i_max == 7);
  CHECK(ic.qn.memory == 3);
  c.spectrum_freqs_ghz = {5, 2};
  CHECK(c.spectrum_options().freqs_hz.front() == doctest::Approx(2e9));
  CHECK(c.landscape_options().c_star == doctest::Approx(10.0));
}
