#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rdc/config.hpp"
#include "rdc/errors.hpp"
#include "rdc/model.hpp"

using namespace rdc;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"(# minimal
[stack]
below = si
layer = oxide sio2 285
layer = flake hbn 100
above = air
host = flake

[emitter]
depth_nm = 30
)";

RunConfig parse(const std::string& text, const fs::path& dir = ".") {
  std::istringstream in(text);
  return parse_config(in, dir, "test.cfg");
}

template <class E>
std::size_t error_line(const std::string& text) {
  try {
    parse(text);
  } catch (const E& e) {
    return e.line();
  }
  return 0;
}

}  // namespace

TEST_CASE("minimal config uses the documented defaults") {
  const auto cfg = parse(kMinimal);
  CHECK(cfg.numerical_aperture == 0.9);
  CHECK(cfg.pump_wavelength_nm == 532.0);
  CHECK(cfg.emitter.eta0 == 0.05);
  CHECK(cfg.emitter.orientation == Orientation::in_plane_average);
  CHECK(cfg.emitter.spectrum.model() == SpectrumWeight::Model::gaussian);
  CHECK(cfg.emitter.spectrum.center_nm() == 810.0);
  CHECK(cfg.emitter.spectrum.fwhm_nm() == 80.0);
  CHECK(cfg.emitter.spectrum.band_min_nm() == 750.0);
  CHECK(cfg.emitter.spectrum.band_max_nm() == 900.0);
  CHECK_FALSE(cfg.reference.has_value());
  const auto sc = stack_scenario(cfg);
  CHECK(sc.emitter.host_layer == 1);
  CHECK(sc.emitter.depth_in_layer_nm == 30.0);
  CHECK_THROWS_AS(reference_scenario(cfg), ValidationError);
}

TEST_CASE("emitter at mid-depth when no depth is given") {
  std::string text = kMinimal;
  text.replace(text.find("depth_nm = 30"), 13, "eta0 = 0.1");
  const auto sc = stack_scenario(parse(text));
  CHECK(sc.emitter.depth_in_layer_nm == 50.0);
}

TEST_CASE("depth fraction") {
  std::string text = kMinimal;
  text.replace(text.find("depth_nm = 30"), 13, "depth_fraction = 0.25");
  CHECK(stack_scenario(parse(text)).emitter.depth_in_layer_nm == 25.0);
}

TEST_CASE("all sections") {
  const auto cfg = parse(R"(
[materials]
glass = constant 1.5
lossy = constant 1.2 0.3   # inline comment
silicon = builtin si
[stack]
below = silicon
layer = a glass 100
layer = flake hbn 80
above = air
host = flake
[reference]
below = glass
layer = flake hbn 80
above = air
host = flake
[emitter]
depth_nm = 10
orientation = isotropic_average
eta0 = 0.2
spectrum = flat 700 950
band_nm = 720 940
samples = 9
[collection]
na = 0.7
[excitation]
wavelength_nm = 488
[numerics]
rel_tol = 1e-9
u_max = 12
max_intervals = 2000
)");
  CHECK(cfg.material("lossy").index(800.0) == Complex(1.2, 0.3));
  CHECK(cfg.material("silicon").is_tabulated());
  CHECK(cfg.emitter.orientation == Orientation::isotropic_average);
  CHECK(cfg.emitter.spectrum.model() == SpectrumWeight::Model::flat);
  CHECK(cfg.emitter.spectrum.band_min_nm() == 720.0);
  CHECK(cfg.emitter.samples == 9);
  CHECK(cfg.numerical_aperture == 0.7);
  CHECK(cfg.pump_wavelength_nm == 488.0);
  CHECK(cfg.quadrature.rel_tol == 1e-9);
  CHECK(cfg.quadrature.u_max == 12.0);
  CHECK(cfg.quadrature.max_intervals == 2000);
  REQUIRE(cfg.reference.has_value());
  CHECK(reference_scenario(cfg).stack.size() == 1);
  const auto opt = enhancement_options(cfg);
  CHECK(opt.n_samples == 9);
  CHECK(opt.numerical_aperture == 0.7);
}

TEST_CASE("errors carry field and line") {
  CHECK(error_line<ValidationError>(std::string(kMinimal) + "colour = blue\n") == 11);
  CHECK(error_line<ParseError>("[stack]\nbelow = si\n[lasers]\n") == 3);
  CHECK(error_line<ValidationError>("[stack]\nbelow = si\nbelow = air\n") == 3);
  CHECK(error_line<ValidationError>(
            "[stack]\nbelow = si\nlayer = flake hbn -5\nabove = air\nhost = flake\n[emitter]\ndepth_nm = 1\n") == 3);
  CHECK(error_line<ValidationError>("[stack]\nbelow = unobtainium\nlayer = f hbn 5\nabove = air\nhost = f\n") == 2);
  CHECK(error_line<ParseError>("[stack]\njust some words\n") == 2);
  std::string deep = kMinimal;
  deep.replace(deep.find("depth_nm = 30"), 13, "depth_nm = 300");
  CHECK_THROWS_AS(parse(deep), ValidationError);
  std::string lossy_host = kMinimal;
  lossy_host.replace(lossy_host.find("host = flake"), 12, "host = nothing");
  CHECK_THROWS_AS(parse(lossy_host), ValidationError);
  CHECK_THROWS_AS(parse(std::string(kMinimal) + "eta0 = 1.5\n"), ValidationError);
  CHECK_THROWS_AS(parse(std::string(kMinimal) + "orientation = sideways\n"), ValidationError);
}

TEST_CASE("nk files resolve relative to the config") {
  const fs::path dir = fs::temp_directory_path() / "rdc_test_config";
  fs::create_directories(dir);
  {
    std::ofstream nk(dir / "glass.nk");
    nk << "# test glass\n400,1.5,0\n1000,1.5,0\n";
  }
  const auto cfg = parse(std::string("[materials]\nmy_glass = nk glass.nk\n") + kMinimal, dir);
  CHECK(cfg.material("my_glass").index(700.0) == Complex(1.5, 0.0));
  try {
    parse(std::string("[materials]\nm = nk missing.nk\n") + kMinimal, dir);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("missing.nk") != std::string::npos);
    CHECK(msg.find("not found") != std::string::npos);
    CHECK(e.line() == 2);
  }
  fs::remove_all(dir);
}

TEST_CASE("missing config file") {
  try {
    load_config("/nonexistent/dir/run.cfg");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("/nonexistent/dir/run.cfg") != std::string::npos);
  }
}

TEST_CASE("every shipped preset parses") {
  for (const auto& entry : fs::directory_iterator(RDC_PRESET_DIR)) {
    if (entry.path().extension() != ".cfg") continue;
    CAPTURE(entry.path().string());
    const auto cfg = load_config(entry.path());
    CHECK(cfg.reference.has_value());
    CHECK_NOTHROW(stack_scenario(cfg));
    CHECK_NOTHROW(reference_scenario(cfg));
  }
  const auto rdc0 = stack_scenario(load_config(std::string(RDC_PRESET_DIR) + "/rdc0.cfg"));
  const auto rdc50 = stack_scenario(load_config(std::string(RDC_PRESET_DIR) + "/rdc50.cfg"));
  CHECK(rdc0.stack.size() + 1 == rdc50.stack.size());
}
