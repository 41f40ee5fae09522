#include "rdc/sweep.hpp"

#include <cmath>
#include <exception>
#include <sstream>

#include "rdc/errors.hpp"
#include "rdc/parallel.hpp"

namespace rdc {

const char* to_string(Metric m) {
  switch (m) {
    case Metric::band_avg_purcell: return "band_avg_purcell";
    case Metric::total_gain: return "total_gain";
    case Metric::collection: return "collection";
    case Metric::excitation_gain: return "excitation_gain";
  }
  return "?";
}

Metric parse_metric(std::string_view text) {
  for (Metric m : {Metric::band_avg_purcell, Metric::total_gain, Metric::collection, Metric::excitation_gain}) {
    if (text == to_string(m)) return m;
  }
  throw ValidationError("metric", "unknown metric '" + std::string(text) +
                                      "' (expected band_avg_purcell, total_gain, collection or excitation_gain)");
}

std::vector<double> SweepSpec::range(double start, double stop, double step) {
  if (!std::isfinite(start) || !std::isfinite(stop) || !std::isfinite(step)) {
    throw ValidationError("range", "start, stop and step must be finite");
  }
  if (!(step > 0.0)) throw ValidationError("range", "step must be positive");
  if (stop < start) throw ValidationError("range", "stop must not be below start");
  const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = start + step * static_cast<double>(i);
  return v;
}

void SweepSpec::validate() const {
  if (parameter_path.empty()) throw ValidationError("param", "parameter path is empty");
  if (values.empty()) throw ValidationError("values", "sweep needs at least one value");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) throw ValidationError("values", "non-finite value");
    if (i > 0 && !(values[i] > values[i - 1])) throw ValidationError("values", "values must strictly increase");
  }
}

std::vector<double> SweepResult::failed_values() const {
  std::vector<double> out;
  for (const auto& r : rows) {
    if (!r.ok) out.push_back(r.value);
  }
  return out;
}

std::optional<std::size_t> SweepResult::argmax_index() const {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].ok && (!best || rows[i].metric > rows[*best].metric)) best = i;
  }
  return best;
}

SweepResult run_sweep(const SweepSpec& spec, const PointEvaluator& evaluate, std::size_t threads) {
  spec.validate();
  SweepResult res;
  res.parameter_path = spec.parameter_path;
  res.metric = spec.metric;
  res.rows.resize(spec.values.size());
  parallel_for(
      spec.values.size(),
      [&](std::size_t i) {
        auto& row = res.rows[i];
        row.value = spec.values[i];
        try {
          auto point = evaluate(row.value);
          if (!std::isfinite(point.metric)) throw NumericalAccuracyError("metric is not finite", 0.0);
          row.metric = point.metric;
          row.breakdown = std::move(point.breakdown);
          row.ok = true;
        } catch (const std::exception& e) {
          row.ok = false;
          row.error = e.what();
        }
      },
      threads);
  if (auto i = res.argmax_index()) res.argmax_value = res.rows[*i].value;
  return res;
}

double refine_optimum(const SweepResult& result, const std::function<double(double)>& evaluate, double tolerance) {
  if (!(tolerance > 0.0)) throw ValidationError("tolerance", "must be positive");
  const auto best = result.argmax_index();
  if (!best) throw ValidationError("sweep", "no successful rows to refine");
  const auto& rows = result.rows;
  if (*best == 0 || *best + 1 == rows.size()) throw BoundaryOptimum(rows[*best].value);

  double lo = rows[*best - 1].value;
  double hi = rows[*best + 1].value;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = evaluate(x1);
  double f2 = evaluate(x2);
  while (hi - lo > tolerance) {
    if (f1 >= f2) {  // ties keep the smaller parameter value
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = evaluate(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = evaluate(x2);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace rdc
