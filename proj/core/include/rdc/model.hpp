#pragma once

// Glue between a RunConfig and the solvers: building stacks, addressing
// sweep parameters and evaluating sweep metrics.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "rdc/config.hpp"
#include "rdc/enhance.hpp"
#include "rdc/sweep.hpp"

namespace rdc {

/// Stack with zero-thickness layers dropped, plus the emitter in its host.
Scenario build_scenario(const RunConfig& cfg, const StackSpec& spec);
Scenario stack_scenario(const RunConfig& cfg);
/// Throws ValidationError when the config has no [reference] section.
Scenario reference_scenario(const RunConfig& cfg);

EnhancementOptions enhancement_options(const RunConfig& cfg, std::size_t threads = 0);

/// Sweepable parameters:
///   stack.<layer>.thickness, reference.<layer>.thickness, emitter.depth_nm,
///   emitter.depth_fraction, emitter.eta0, collection.na,
///   excitation.wavelength_nm
RunConfig with_parameter(const RunConfig& cfg, std::string_view path, double value);
std::vector<std::string> parameter_paths(const RunConfig& cfg);

/// Band-averaged decay-rate enhancement of the main stack.
double band_avg_purcell(const RunConfig& cfg, std::size_t threads = 0);

SweepPoint evaluate_metric(const RunConfig& cfg, Metric metric, std::size_t threads = 0);

/// Sweep over a config parameter; points run in parallel, each point serially.
SweepResult run_sweep(const SweepSpec& spec, const RunConfig& base, std::size_t threads = 0);
double refine_optimum(const SweepResult& result, const RunConfig& base, double tolerance = 0.5,
                      std::size_t threads = 0);

}  // namespace rdc
