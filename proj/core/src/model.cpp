#include "rdc/model.hpp"

#include <algorithm>
#include <cmath>

#include "rdc/errors.hpp"
#include "rdc/parallel.hpp"

namespace rdc {

Scenario build_scenario(const RunConfig& cfg, const StackSpec& spec) {
  std::vector<Layer> layers;
  std::size_t host = 0;
  double host_thickness = 0.0;
  for (const auto& l : spec.layers) {
    if (l.thickness_nm == 0.0) continue;
    if (l.name == spec.host) {
      host = layers.size();
      host_thickness = l.thickness_nm;
    }
    layers.push_back({cfg.material(l.material), l.thickness_nm});
  }
  if (!(host_thickness > 0.0)) throw ValidationError("host", "host layer '" + spec.host + "' has no thickness");
  EmitterSpec em;
  em.host_layer = host;
  em.orientation = cfg.emitter.orientation;
  em.quantum_efficiency_eta0 = cfg.emitter.eta0;
  em.depth_in_layer_nm = cfg.emitter.depth_nm ? *cfg.emitter.depth_nm : *cfg.emitter.depth_fraction * host_thickness;
  if (em.depth_in_layer_nm > host_thickness) {
    throw ValidationError("emitter.depth_nm", "emitter lies below the host layer '" + spec.host + "'");
  }
  return {Stack(cfg.material(spec.below), std::move(layers), cfg.material(spec.above)), em};
}

Scenario stack_scenario(const RunConfig& cfg) { return build_scenario(cfg, cfg.stack); }

Scenario reference_scenario(const RunConfig& cfg) {
  if (!cfg.reference) throw ValidationError("reference", "config has no [reference] section");
  return build_scenario(cfg, *cfg.reference);
}

EnhancementOptions enhancement_options(const RunConfig& cfg, std::size_t threads) {
  EnhancementOptions opt;
  opt.weight = cfg.emitter.spectrum;
  opt.n_samples = cfg.emitter.samples;
  opt.numerical_aperture = cfg.numerical_aperture;
  opt.pump_wavelength_nm = cfg.pump_wavelength_nm;
  opt.quadrature = cfg.quadrature;
  opt.threads = threads;
  return opt;
}

namespace {

void set_thickness(StackSpec& spec, const std::string& section, std::string_view layer, double value) {
  for (auto& l : spec.layers) {
    if (l.name == layer) {
      if (!(value >= 0.0) || !std::isfinite(value)) {
        throw ValidationError(section + "." + std::string(layer) + ".thickness", "must be >= 0");
      }
      l.thickness_nm = value;
      return;
    }
  }
  throw ValidationError("param", "no layer '" + std::string(layer) + "' in [" + section + "]");
}

}  // namespace

RunConfig with_parameter(const RunConfig& cfg, std::string_view path, double value) {
  RunConfig out = cfg;
  const std::string p(path);
  auto in_range = [&](double lo, double hi) {
    if (!(value >= lo && value <= hi)) {
      throw ValidationError(p, "value " + std::to_string(value) + " outside [" + std::to_string(lo) + ", " +
                                   std::to_string(hi) + "]");
    }
  };
  if (p == "emitter.depth_nm") {
    in_range(0.0, INFINITY);
    out.emitter.depth_nm = value;
    out.emitter.depth_fraction.reset();
  } else if (p == "emitter.depth_fraction") {
    in_range(0.0, 1.0);
    out.emitter.depth_fraction = value;
    out.emitter.depth_nm.reset();
  } else if (p == "emitter.eta0") {
    in_range(0.0, 1.0);
    out.emitter.eta0 = value;
  } else if (p == "collection.na") {
    in_range(0.0, INFINITY);
    out.numerical_aperture = value;
  } else if (p == "excitation.wavelength_nm") {
    in_range(1e-9, INFINITY);
    out.pump_wavelength_nm = value;
  } else if (p.ends_with(".thickness") && (p.starts_with("stack.") || p.starts_with("reference."))) {
    const auto dot = p.find('.');
    const std::string section = p.substr(0, dot);
    const std::string layer = p.substr(dot + 1, p.size() - dot - 1 - std::string_view(".thickness").size());
    if (section == "stack") {
      set_thickness(out.stack, section, layer, value);
    } else {
      if (!out.reference) throw ValidationError("param", "config has no [reference] section");
      set_thickness(*out.reference, section, layer, value);
    }
  } else {
    throw ValidationError("param", "unknown parameter '" + p + "'");
  }
  return out;
}

std::vector<std::string> parameter_paths(const RunConfig& cfg) {
  std::vector<std::string> out;
  for (const auto& l : cfg.stack.layers) out.push_back("stack." + l.name + ".thickness");
  if (cfg.reference) {
    for (const auto& l : cfg.reference->layers) out.push_back("reference." + l.name + ".thickness");
  }
  for (const char* p : {"emitter.depth_nm", "emitter.depth_fraction", "emitter.eta0", "collection.na",
                        "excitation.wavelength_nm"}) {
    out.emplace_back(p);
  }
  return out;
}

double band_avg_purcell(const RunConfig& cfg, std::size_t threads) {
  const Scenario sc = stack_scenario(cfg);
  const auto wl = cfg.emitter.spectrum.sample_wavelengths(cfg.emitter.samples);
  std::vector<double> F(wl.size());
  parallel_for(
      wl.size(), [&](std::size_t i) { F[i] = purcell(sc.stack, sc.emitter, wl[i], cfg.quadrature).purcell_F; },
      threads);
  return band_average(F, cfg.emitter.spectrum);
}

SweepPoint evaluate_metric(const RunConfig& cfg, Metric metric, std::size_t threads) {
  SweepPoint pt;
  switch (metric) {
    case Metric::band_avg_purcell: {
      const Scenario sc = stack_scenario(cfg);
      const auto wl = cfg.emitter.spectrum.sample_wavelengths(cfg.emitter.samples);
      std::vector<double> F(wl.size()), par(wl.size()), perp(wl.size());
      parallel_for(
          wl.size(),
          [&](std::size_t i) {
            const auto r = purcell(sc.stack, sc.emitter, wl[i], cfg.quadrature);
            F[i] = r.purcell_F;
            par[i] = r.purcell_parallel;
            perp[i] = r.purcell_perpendicular;
          },
          threads);
      pt.metric = band_average(F, cfg.emitter.spectrum);
      pt.breakdown = {{"purcell_parallel", band_average(par, cfg.emitter.spectrum)},
                      {"purcell_perpendicular", band_average(perp, cfg.emitter.spectrum)}};
      break;
    }
    case Metric::total_gain: {
      const auto rep = pl_enhancement(stack_scenario(cfg), reference_scenario(cfg), enhancement_options(cfg, threads));
      pt.metric = rep.total_gain;
      pt.breakdown = {{"excitation_gain", rep.excitation_gain},     {"emission_gain", rep.emission_gain},
                      {"collection_ratio", rep.collection_ratio},   {"effective_qe_ratio", rep.effective_qe_ratio},
                      {"band_avg_purcell", rep.band_avg_purcell},   {"band_avg_collection", rep.band_avg_collection},
                      {"lifetime_ratio", rep.lifetime_ratio}};
      break;
    }
    case Metric::collection: {
      const Scenario sc = stack_scenario(cfg);
      const auto wl = cfg.emitter.spectrum.sample_wavelengths(cfg.emitter.samples);
      std::vector<EmissionResult> rows(wl.size());
      parallel_for(
          wl.size(),
          [&](std::size_t i) {
            rows[i] = emission(sc.stack, sc.emitter, wl[i], cfg.numerical_aperture, cfg.quadrature);
          },
          threads);
      auto avg = [&](double EmissionResult::*field) {
        std::vector<double> v(rows.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = rows[i].*field;
        return band_average(v, cfg.emitter.spectrum);
      };
      pt.metric = avg(&EmissionResult::collection_eta);
      pt.breakdown = {{"frac_up", avg(&EmissionResult::frac_up)},
                      {"frac_down", avg(&EmissionResult::frac_down)},
                      {"frac_lost", avg(&EmissionResult::frac_lost)},
                      {"band_avg_purcell", avg(&EmissionResult::purcell_F)}};
      break;
    }
    case Metric::excitation_gain: {
      const Scenario s = stack_scenario(cfg);
      const Scenario r = reference_scenario(cfg);
      pt.metric = excitation_gain(s.stack, s.emitter, r.stack, r.emitter, cfg.pump_wavelength_nm);
      pt.breakdown = {{"pump_intensity", pump_intensity(s.stack, s.emitter, cfg.pump_wavelength_nm)},
                      {"ref_pump_intensity", pump_intensity(r.stack, r.emitter, cfg.pump_wavelength_nm)}};
      break;
    }
  }
  return pt;
}

SweepResult run_sweep(const SweepSpec& spec, const RunConfig& base, std::size_t threads) {
  spec.validate();
  // A bad path fails the whole sweep, not every row.
  const auto paths = parameter_paths(base);
  if (std::find(paths.begin(), paths.end(), spec.parameter_path) == paths.end()) {
    throw ValidationError("param", "unknown parameter '" + spec.parameter_path + "'");
  }
  return run_sweep(
      spec,
      [&](double v) { return evaluate_metric(with_parameter(base, spec.parameter_path, v), spec.metric, 1); },
      threads);
}

double refine_optimum(const SweepResult& result, const RunConfig& base, double tolerance, std::size_t threads) {
  return refine_optimum(
      result,
      [&](double v) { return evaluate_metric(with_parameter(base, result.parameter_path, v), result.metric, threads).metric; },
      tolerance);
}

}  // namespace rdc
