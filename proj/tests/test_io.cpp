#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "prft/io.hpp"

using namespace prft;
namespace fs = std::filesystem;

namespace {

const char* kSystemText = R"(# two-mode rotating-frame system
[model]
dim = 2
hamiltonian = 0.025 0  0 0  0 0  -0.025 0
period = 1.5707963267948966

[mode]
frequency = 0
amplitude = 1.0
phase = 0.0
kind = rotating
coupling = 0 0  1 0  0 0  0 0

[mode]
frequency = 0
amplitude = 1.0
phase = 1.5707963267948966
kind = rotating
coupling = 0 0  1 0  0 0  0 0

[photons]
mean = 0 0
sigma = 100 0  0 100
phases = 0 1.5707963267948966

[matter]
state = 1 0  0 0
)";

}  // namespace

TEST_CASE("system file round trip") {
  SystemFile sf = parse_system_text(kSystemText, "inline");
  CHECK(sf.system.dim() == 2);
  CHECK(sf.system.n_modes() == 2);
  CHECK(sf.system.time_independent());
  CHECK(sf.system.period() == doctest::Approx(0.5 * pi));
  CHECK(sf.photons.sigma()(0, 0) == doctest::Approx(100.0));
  REQUIRE(sf.matter_state.has_value());
  CHECK(std::abs((*sf.matter_state)[0] - Complex(1.0, 0.0)) < 1e-15);
}

TEST_CASE("unknown keys fail with a line-anchored message") {
  std::string text = kSystemText;
  text += "\n[photons]\nwidth = 3\n";
  try {
    parse_system_text(text, "inline");
    FAIL("expected SpecError");
  } catch (const SpecError& e) {
    const std::string what = e.what();
    CHECK(what.find("inline:") != std::string::npos);
    CHECK(what.find("width") != std::string::npos);
  }
}

TEST_CASE("malformed matrices are rejected") {
  std::string text = kSystemText;
  const auto pos = text.find("hamiltonian = 0.025 0  0 0  0 0  -0.025 0");
  text.replace(pos, 42, "hamiltonian = 0.025 0  0 0");
  CHECK_THROWS_AS(parse_system_text(text, "inline"), SpecError);
}

TEST_CASE("csv output is deterministic") {
  const fs::path dir = fs::temp_directory_path() / "prft_io_test";
  fs::create_directories(dir);
  auto write_once = [&](const fs::path& p) {
    CsvWriter csv(p, {"t", "value"}, config_hash("demo"));
    csv.row({0.0, 1.0 / 3.0});
    csv.row({0.1, -2.5e-17});
  };
  write_once(dir / "a.csv");
  write_once(dir / "b.csv");
  std::ifstream fa(dir / "a.csv"), fb(dir / "b.csv");
  std::stringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  CHECK(sa.str() == sb.str());
  CHECK(sa.str().find("# prft-csv 1") == 0);
  fs::remove_all(dir);
}

TEST_CASE("manifest is valid json-ish output") {
  const fs::path dir = fs::temp_directory_path() / "prft_io_manifest";
  fs::create_directories(dir);
  write_manifest(dir / "manifest.json", {{"tool", "prft 1.0"},
                                         {"wall_seconds", "1.5"}});
  std::ifstream in(dir / "manifest.json");
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str().find("\"tool\"") != std::string::npos);
  fs::remove_all(dir);
}
