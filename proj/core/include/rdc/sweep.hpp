#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rdc {

enum class Metric { band_avg_purcell, total_gain, collection, excitation_gain };

const char* to_string(Metric m);
Metric parse_metric(std::string_view text);

struct SweepSpec {
  std::string parameter_path;
  std::vector<double> values;  ///< strictly increasing, nonempty
  Metric metric = Metric::band_avg_purcell;

  /// start, start + step, ... up to stop (inclusive, with a 1e-9 step slack).
  static std::vector<double> range(double start, double stop, double step);
  void validate() const;
};

/// Metric value plus named auxiliary quantities for one parameter value.
struct SweepPoint {
  double metric = 0.0;
  std::vector<std::pair<std::string, double>> breakdown;
};

using PointEvaluator = std::function<SweepPoint(double value)>;

struct SweepRow {
  double value = 0.0;
  bool ok = false;
  double metric = 0.0;
  std::vector<std::pair<std::string, double>> breakdown;
  std::string error;  ///< set when !ok
};

struct SweepResult {
  std::string parameter_path;
  Metric metric = Metric::band_avg_purcell;
  std::vector<SweepRow> rows;  ///< in parameter order
  std::optional<double> argmax_value;
  std::optional<double> refined_optimum;

  std::vector<double> failed_values() const;
  /// Index of the argmax row; ties go to the smaller parameter value.
  std::optional<std::size_t> argmax_index() const;
};

/// Evaluates every value (in parallel, results stored by index). A point
/// whose evaluation throws is kept as a failed row and the sweep continues.
SweepResult run_sweep(const SweepSpec& spec, const PointEvaluator& evaluate, std::size_t threads = 0);

/// Golden-section search inside the two grid cells around the grid argmax,
/// until the bracket is narrower than tolerance. Throws BoundaryOptimum when
/// the argmax is the first or last row.
double refine_optimum(const SweepResult& result, const std::function<double(double)>& evaluate,
                      double tolerance = 0.5);

}  // namespace rdc
