#include <doctest.h>

#include <cmath>
#include <sstream>

#include "rdc/config.hpp"
#include "rdc/errors.hpp"
#include "rdc/model.hpp"
#include "rdc/sweep.hpp"

using namespace rdc;

namespace {

SweepPoint quadratic(double x) { return {-(x - 61.0) * (x - 61.0), {{"x2", x * x}}}; }

RunConfig small_config() {
  auto cfg = load_config(std::string(RDC_PRESET_DIR) + "/rdc50.cfg");
  cfg.emitter.samples = 5;
  return cfg;
}

}  // namespace

TEST_CASE("range construction") {
  CHECK(SweepSpec::range(0, 140, 2).size() == 71);
  CHECK(SweepSpec::range(10, 10, 10) == std::vector<double>{10.0});
  const auto r = SweepSpec::range(0.0, 0.3, 0.1);
  REQUIRE(r.size() == 4);
  CHECK(r.back() == doctest::Approx(0.3));
  CHECK_THROWS_AS(SweepSpec::range(0, 10, 0), ValidationError);
  CHECK_THROWS_AS(SweepSpec::range(10, 0, 1), ValidationError);
  SweepSpec bad{"x", {1.0, 1.0}, Metric::total_gain};
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  SweepSpec empty{"x", {}, Metric::total_gain};
  CHECK_THROWS_AS(empty.validate(), ValidationError);
}

TEST_CASE("metric names") {
  for (auto m : {Metric::band_avg_purcell, Metric::total_gain, Metric::collection, Metric::excitation_gain})
    CHECK(parse_metric(to_string(m)) == m);
  CHECK_THROWS_AS(parse_metric("brightness"), ValidationError);
}

TEST_CASE("single value sweep") {
  const auto res = run_sweep({"x", {42.0}, Metric::total_gain}, quadratic);
  REQUIRE(res.rows.size() == 1);
  CHECK(res.argmax_value == 42.0);
}

TEST_CASE("quadratic refinement") {
  const auto res = run_sweep({"x", SweepSpec::range(0, 140, 10), Metric::band_avg_purcell}, quadratic, 3);
  CHECK(res.argmax_value == 60.0);
  const double x = refine_optimum(res, [](double v) { return quadratic(v).metric; });
  CHECK(std::abs(x - 61.0) <= 0.5);
  // deterministic
  CHECK(x == refine_optimum(res, [](double v) { return quadratic(v).metric; }));
}

TEST_CASE("monotone metric refuses refinement") {
  auto f = [](double x) { return SweepPoint{x, {}}; };
  const auto res = run_sweep({"x", {1, 2, 3, 4}, Metric::total_gain}, f);
  try {
    refine_optimum(res, [](double x) { return x; });
    FAIL("expected BoundaryOptimum");
  } catch (const BoundaryOptimum& e) {
    CHECK(e.value() == 4.0);
  }
}

TEST_CASE("ties go to the smaller value") {
  auto f = [](double x) { return SweepPoint{x < 3 ? 1.0 : 0.0, {}}; };
  const auto res = run_sweep({"x", {0, 1, 2, 3}, Metric::total_gain}, f);
  CHECK(res.argmax_value == 0.0);
}

TEST_CASE("failed points do not abort the sweep") {
  auto f = [](double x) {
    if (x == 2.0) throw std::runtime_error("boom");
    return SweepPoint{-std::abs(x - 3.0), {}};
  };
  const auto res = run_sweep({"x", {0, 1, 2, 3, 4}, Metric::total_gain}, f, 2);
  REQUIRE(res.rows.size() == 5);
  CHECK_FALSE(res.rows[2].ok);
  CHECK(res.rows[2].error == "boom");
  CHECK(res.failed_values() == std::vector<double>{2.0});
  CHECK(res.argmax_value == 3.0);
}

TEST_CASE("property: results do not depend on thread count") {
  const auto a = run_sweep({"x", SweepSpec::range(0, 100, 1), Metric::total_gain}, quadratic, 1);
  const auto b = run_sweep({"x", SweepSpec::range(0, 100, 1), Metric::total_gain}, quadratic, 4);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].value == b.rows[i].value);
    CHECK(a.rows[i].metric == b.rows[i].metric);
  }
}

TEST_CASE("config parameters") {
  const auto cfg = small_config();
  const auto paths = parameter_paths(cfg);
  CHECK(std::find(paths.begin(), paths.end(), "stack.spacer.thickness") != paths.end());
  CHECK(std::find(paths.begin(), paths.end(), "emitter.eta0") != paths.end());
  const auto t0 = with_parameter(cfg, "stack.spacer.thickness", 0.0);
  CHECK(build_scenario(t0, t0.stack).stack.size() == stack_scenario(cfg).stack.size() - 1);
  CHECK_THROWS_AS(with_parameter(cfg, "stack.nonexistent.thickness", 3.0), ValidationError);
  CHECK_THROWS_AS(with_parameter(cfg, "stack.spacer.thickness", -3.0), ValidationError);
  CHECK(with_parameter(cfg, "collection.na", 0.5).numerical_aperture == 0.5);
}

TEST_CASE("config sweep") {
  const auto cfg = small_config();
  SUBCASE("unknown parameter path is rejected up front") {
    CHECK_THROWS_AS(run_sweep({"stack.bogus.thickness", {1.0}, Metric::total_gain}, cfg), ValidationError);
  }
  SUBCASE("bad values become failed rows") {
    const auto res = run_sweep({"stack.spacer.thickness", {-10.0, 40.0, 60.0}, Metric::band_avg_purcell}, cfg, 2);
    CHECK_FALSE(res.rows[0].ok);
    CHECK(res.rows[1].ok);
    CHECK(res.rows[2].ok);
  }
  SUBCASE("grid refinement consistency") {
    const auto coarse = run_sweep({"stack.spacer.thickness", SweepSpec::range(0, 140, 20), Metric::band_avg_purcell},
                                  cfg);
    const auto fine = run_sweep({"stack.spacer.thickness", SweepSpec::range(0, 140, 10), Metric::band_avg_purcell},
                                cfg);
    CHECK(std::abs(*coarse.argmax_value - *fine.argmax_value) <= 20.0);
  }
}
