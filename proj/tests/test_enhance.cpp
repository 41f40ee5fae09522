#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "rdc/config.hpp"
#include "rdc/enhance.hpp"
#include "rdc/errors.hpp"
#include "rdc/model.hpp"

using namespace rdc;

namespace {

Scenario preset(const char* name) {
  return stack_scenario(load_config(std::string(RDC_PRESET_DIR) + "/" + name));
}

EnhancementOptions quick_options() {
  EnhancementOptions o;
  o.n_samples = 7;
  o.threads = 2;
  return o;
}

}  // namespace

TEST_CASE("band average") {
  const auto flat = SpectrumWeight::flat(750.0, 900.0);
  const auto gauss = SpectrumWeight::gaussian(810.0, 80.0);
  SUBCASE("constants pass through") {
    for (const auto& w : {flat, gauss, SpectrumWeight::gaussian(700, 30)})
      CHECK(band_average([](double) { return 3.25; }, w) == doctest::Approx(3.25).epsilon(1e-14));
  }
  SUBCASE("flat weight and a linear quantity give the band midpoint") {
    CHECK(band_average([](double wl) { return 2.0 + 0.01 * wl; }, flat, 11) ==
          doctest::Approx(2.0 + 0.01 * 825.0).epsilon(1e-14));
  }
  SUBCASE("trapezoid by hand") {
    // weights at 750, 825, 900: gaussian centred 810 fwhm 80
    const auto w = gauss;
    const double w0 = w(750.0), w1 = w(825.0), w2 = w(900.0);
    const std::vector<double> q{1.0, 2.0, 4.0};
    const double expect = (0.5 * w0 * 1.0 + w1 * 2.0 + 0.5 * w2 * 4.0) / (0.5 * w0 + w1 + 0.5 * w2);
    CHECK(band_average(q, w) == doctest::Approx(expect).epsilon(1e-14));
  }
  SUBCASE("gaussian weight shape") {
    CHECK(gauss(810.0) == doctest::Approx(1.0));
    CHECK(gauss(850.0) == doctest::Approx(0.5).epsilon(1e-12));
    const auto wl = gauss.sample_wavelengths(31);
    CHECK(wl.front() == 750.0);
    CHECK(wl.back() == 900.0);
    CHECK(wl[15] == doctest::Approx(825.0));
  }
  SUBCASE("at least two samples") {
    CHECK_THROWS_AS(band_average([](double) { return 1.0; }, flat, 1), ValidationError);
  }
}

TEST_CASE("band-averaged Purcell factor converges in the sample count") {
  const auto sc = preset("rdc50.cfg");
  const SpectrumWeight w;
  auto F = [&](double wl) { return purcell(sc.stack, sc.emitter, wl).purcell_F; };
  const double a = band_average(F, w, 31);
  const double b = band_average(F, w, 61);
  CHECK(std::abs(a - b) < 1e-4 * std::abs(b));
}

TEST_CASE("effective quantum efficiency") {
  CHECK(effective_quantum_efficiency(1.7, 0.0) == 0.0);
  CHECK(effective_quantum_efficiency(1.7, 1.0) == doctest::Approx(1.0));
  CHECK(effective_quantum_efficiency(1.2, 0.05, 0.3) == doctest::Approx(0.05 * 0.7 * 1.2 / 1.01).epsilon(1e-14));
  CHECK(effective_quantum_efficiency(1.2, 0.05, 0.3) == doctest::Approx(0.0415842).epsilon(1e-6));
  CHECK_THROWS_AS(effective_quantum_efficiency(1.0, 1.5), ValidationError);
  for (double eta0 = 0.0; eta0 <= 1.0; eta0 += 0.125) {
    for (double F : {0.01, 0.5, 1.0, 3.0, 100.0}) {
      const double e = effective_quantum_efficiency(F, eta0);
      CHECK(e >= 0.0);
      CHECK(e <= 1.0 + 1e-15);
    }
  }
}

TEST_CASE("lifetime ratio") {
  CHECK(lifetime_ratio(1.3, 0.9, 0.0) == 1.0);
  CHECK(lifetime_ratio(1.3, 0.9, 1.0) == doctest::Approx(0.9 / 1.3));
  double prev = 2.0;
  for (double F = 0.2; F < 5.0; F += 0.2) {
    const double r = lifetime_ratio(F, 1.0, 0.1);
    CHECK(r < prev);
    prev = r;
  }
}

TEST_CASE("eta0 calibration") {
  const double target = 0.787 / 0.825;
  const double eta0 = calibrate_eta0(1.25, 0.95, target);
  CHECK(eta0 > 0.0);
  CHECK(eta0 < 1.0);
  CHECK(lifetime_ratio(1.25, 0.95, eta0) == doctest::Approx(target).epsilon(1e-12));
  // a lifetime change bigger than the rate change allows
  CHECK_THROWS_AS(calibrate_eta0(1.05, 1.0, 0.5), ValidationError);
  CHECK_THROWS_AS(calibrate_eta0(1.0, 1.0, 0.9), ValidationError);
}

TEST_CASE("pump intensity above a perfect mirror") {
  const double wl = 532.0;
  Stack s(materials::perfect_mirror(), {{materials::vacuum(), 400.0}}, materials::vacuum());
  for (double h : {20.0, 66.5, 133.0, 250.0}) {
    const double k = 2 * std::numbers::pi / wl;
    const double expect = 4 * std::sin(k * h) * std::sin(k * h);
    CHECK(pump_intensity(s, {0, 400.0 - h}, wl) == doctest::Approx(expect).epsilon(1e-5));
  }
}

TEST_CASE("identical stacks give unit gains") {
  const auto sc = preset("sio2si.cfg");
  const auto rep = pl_enhancement(sc, sc, quick_options());
  for (double v : {rep.excitation_gain, rep.effective_qe_ratio, rep.collection_ratio, rep.emission_gain,
                   rep.total_gain, rep.lifetime_ratio})
    CHECK(v == 1.0);
  CHECK(rep.band_avg_purcell == rep.ref_band_avg_purcell);
  CHECK(rep.rows.size() == 7);
  CHECK(excitation_gain(sc.stack, sc.emitter, sc.stack, sc.emitter) == 1.0);
}

TEST_CASE("reflective cavity report") {
  const auto rdc = preset("rdc50.cfg");
  const auto ref = preset("sio2si.cfg");
  const auto rep = pl_enhancement(rdc, ref, quick_options());
  CHECK(rep.excitation_gain > 1.0);
  CHECK(rep.excitation_gain ==
        doctest::Approx(pump_intensity(rdc.stack, rdc.emitter) / pump_intensity(ref.stack, ref.emitter)));
  CHECK(rep.total_gain == doctest::Approx(rep.excitation_gain * rep.emission_gain).epsilon(1e-14));
  for (const auto& row : rep.rows) {
    CHECK(row.yield == doctest::Approx(row.stack.collection_eta * 0.05 * row.stack.purcell_F /
                                       (0.95 + 0.05 * row.stack.purcell_F))
                           .epsilon(1e-12));
    CHECK(row.eta_effective >= 0.0);
    CHECK(row.eta_effective <= 1.0);
  }
  CHECK(std::isfinite(rep.total_gain));
  CHECK(rep.total_gain > 0.0);
}

TEST_CASE("property: weight scale does not matter") {
  const auto rdc = preset("rdc50.cfg");
  const auto ref = preset("sio2si.cfg");
  auto opt = quick_options();
  const auto a = pl_enhancement(rdc, ref, opt);
  opt.weight = opt.weight.scaled(37.5);
  const auto b = pl_enhancement(rdc, ref, opt);
  CHECK(a.total_gain == doctest::Approx(b.total_gain).epsilon(1e-14));
  CHECK(a.band_avg_purcell == doctest::Approx(b.band_avg_purcell).epsilon(1e-14));
  CHECK(a.lifetime_ratio == doctest::Approx(b.lifetime_ratio).epsilon(1e-14));
}

TEST_CASE("spectrum weight validation") {
  CHECK_THROWS_AS(SpectrumWeight::gaussian(810, 0), ValidationError);
  CHECK_THROWS_AS(SpectrumWeight::flat(900, 750), ValidationError);
  CHECK_THROWS_AS(SpectrumWeight::tabulated({{800, 1.0}}), ValidationError);
  CHECK_THROWS_AS(SpectrumWeight().scaled(-1.0), ValidationError);
  const auto t = SpectrumWeight::tabulated({{700, 0.0}, {800, 2.0}, {1000, 0.0}}).with_band(700, 1000);
  CHECK(t(750.0) == doctest::Approx(1.0));
  CHECK(t(900.0) == doctest::Approx(1.0));
  CHECK(t(650.0) == 0.0);
}
