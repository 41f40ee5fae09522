#include "commands.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>
#include <ostream>

#include "rdc/config.hpp"
#include "rdc/errors.hpp"
#include "rdc/fit.hpp"
#include "rdc/io.hpp"
#include "rdc/model.hpp"
#include "rdc/svg_plot.hpp"

namespace rdc::cli {

namespace {

double parse_number(std::string_view text, const char* what) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw ValidationError(what, "expected a number, got '" + std::string(text) + "'");
  }
  return v;
}

bool is_number(std::string_view text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  return !text.empty() && ec == std::errc() && ptr == end;
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    out.emplace_back(text.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

struct SimulateArgs {
  std::string config;
  std::string output;
  std::string csv;
};

struct SweepArgs {
  std::string config;
  std::string param;
  std::string range;
  std::string values;
  std::string metric = "band_avg_purcell";
  bool refine = false;
  double tolerance = 0.5;
  std::string output;
};

struct FitArgs {
  std::string mode;
  std::string input;
  std::string output;
  std::optional<double> t0;
};

struct PlotArgs {
  std::string input;
  std::string output;
};

int simulate(const SimulateArgs& a, std::ostream& out) {
  const RunConfig cfg = load_config(a.config);
  const auto rep = pl_enhancement(stack_scenario(cfg), reference_scenario(cfg), enhancement_options(cfg));
  write_file_atomic(a.output, report_to_json(rep, cfg));
  if (!a.csv.empty()) write_file_atomic(a.csv, report_to_csv(rep));
  out << "total_gain        " << rep.total_gain << '\n'
      << "excitation_gain   " << rep.excitation_gain << '\n'
      << "emission_gain     " << rep.emission_gain << '\n'
      << "band_avg_purcell  " << rep.band_avg_purcell << " (reference " << rep.ref_band_avg_purcell << ")\n"
      << "collection        " << rep.band_avg_collection << " (reference " << rep.ref_band_avg_collection << ")\n"
      << "lifetime_ratio    " << rep.lifetime_ratio << '\n';
  return ok;
}

int sweep(const SweepArgs& a, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = load_config(a.config);
  SweepSpec spec;
  spec.parameter_path = a.param;
  spec.metric = parse_metric(a.metric);
  if (!a.range.empty() == !a.values.empty()) throw ValidationError("sweep", "give exactly one of --range or --values");
  if (!a.range.empty()) {
    const auto parts = split(a.range, ':');
    if (parts.size() != 3) throw ValidationError("range", "expected start:stop:step");
    spec.values = SweepSpec::range(parse_number(parts[0], "range"), parse_number(parts[1], "range"),
                                   parse_number(parts[2], "range"));
  } else {
    for (const auto& v : split(a.values, ',')) spec.values.push_back(parse_number(v, "values"));
  }
  SweepResult res = run_sweep(spec, cfg);
  if (a.refine && res.argmax_value) {
    try {
      res.refined_optimum = refine_optimum(res, cfg, a.tolerance);
    } catch (const BoundaryOptimum& e) {
      err << "warning: not refined: " << e.what() << '\n';
    }
  }
  write_file_atomic(a.output, sweep_to_csv(res));
  out << res.rows.size() << " rows";
  if (res.argmax_value) out << ", argmax " << res.parameter_path << " = " << *res.argmax_value;
  if (res.refined_optimum) out << ", refined " << *res.refined_optimum;
  const auto failed = res.failed_values();
  if (!failed.empty()) out << ", " << failed.size() << " failed";
  out << '\n';
  return ok;
}

int fit(const FitArgs& a, std::ostream& out) {
  const CsvTable table = read_csv(a.input);
  if (a.mode == "lifetime") {
    const DecayTrace trace = decay_trace_from_csv(table);
    std::optional<DecayParams> guess;
    if (a.t0) {
      DecayParams g = initial_decay_guess(trace);
      g.a *= std::exp((*a.t0 - g.b) / g.tau_ns);
      g.b = *a.t0;
      guess = g;
    }
    const DecayFit f = fit_exp_decay(trace, guess);
    write_file_atomic(a.output, decay_fit_to_json(f, trace));
    out << "tau_ns " << f.tau_ns << "  a " << f.a << "  b " << f.b << "  c " << f.c << "  rms " << f.residual_rms
        << '\n';
  } else {
    const OdmrSpectrum sp = odmr_spectrum_from_csv(table);
    const OdmrFit f = fit_odmr(sp);
    write_file_atomic(a.output, odmr_fit_to_json(f, sp));
    const auto& p = f.params;
    out << "D_GHz " << p.D_GHz << "  E_GHz " << p.E_GHz << "  contrast " << p.contrast_minus << " / "
        << p.contrast_plus << "  width_GHz " << p.width_GHz << '\n';
    if (f.single_dip) out << "warning: only one dip resolved; E pinned at 0\n";
  }
  return ok;
}

int plot(const PlotArgs& a) {
  write_file_atomic(a.output, render_svg(plot_from_file(a.input)));
  return ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Reflective dielectric cavity simulator and measurement fitter", "rdc"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "rdc 0.1.0");

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "PL enhancement report for a config");
  c_sim->add_option("config", sim.config, "run configuration")->required();
  c_sim->add_option("-o,--output", sim.output, "JSON report")->required();
  c_sim->add_option("--csv", sim.csv, "per-wavelength CSV");

  SweepArgs sw;
  auto* c_sweep = app.add_subcommand("sweep", "scan one parameter and record a metric");
  c_sweep->add_option("config", sw.config, "run configuration")->required();
  c_sweep->add_option("--param", sw.param, "parameter path, e.g. stack.spacer.thickness")->required();
  const CLI::Validator range_syntax(
      [](std::string& text) -> std::string {
        const auto parts = split(text, ':');
        if (parts.size() != 3) return "expected start:stop:step, got '" + text + "'";
        for (const auto& p : parts)
          if (!is_number(p)) return "'" + p + "' is not a number";
        return {};
      },
      "START:STOP:STEP");
  const CLI::Validator number_list(
      [](std::string& text) -> std::string {
        for (const auto& p : split(text, ','))
          if (!is_number(p)) return "'" + p + "' is not a number";
        return {};
      },
      "V1,V2,...");
  auto* o_range = c_sweep->add_option("--range", sw.range, "start:stop:step")->check(range_syntax);
  auto* o_values = c_sweep->add_option("--values", sw.values, "comma-separated values")->check(number_list);
  o_range->excludes(o_values);
  c_sweep->add_option("--metric", sw.metric, "band_avg_purcell | total_gain | collection | excitation_gain")
      ->capture_default_str();
  c_sweep->add_flag("--refine", sw.refine, "golden-section refinement around the grid maximum");
  c_sweep->add_option("--tolerance", sw.tolerance, "refinement bracket (parameter units)")->capture_default_str();
  c_sweep->add_option("-o,--output", sw.output, "CSV output")->required();

  FitArgs ft;
  auto* c_fit = app.add_subcommand("fit", "fit a lifetime trace or an ODMR spectrum");
  c_fit->add_option("--mode", ft.mode, "lifetime | odmr")->required()->check(CLI::IsMember({"lifetime", "odmr"}));
  c_fit->add_option("data", ft.input, "CSV with t_ns,counts or freq_GHz,pl")->required();
  c_fit->add_option("-o,--output", ft.output, "JSON fit report")->required();
  c_fit->add_option("--t0", ft.t0, "lifetime: reference time b (default: time of the peak)");

  PlotArgs pl;
  auto* c_plot = app.add_subcommand("plot", "render a sweep CSV, data CSV or report JSON as SVG");
  c_plot->add_option("input", pl.input, "CSV or JSON file")->required();
  c_plot->add_option("-o,--output", pl.output, "SVG output")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : usage;
  }

  if (c_sweep->parsed() && sw.range.empty() && sw.values.empty()) {
    err << "sweep: one of --range or --values is required\n" << c_sweep->help();
    return usage;
  }

  try {
    if (c_sim->parsed()) return simulate(sim, out);
    if (c_sweep->parsed()) return sweep(sw, out, err);
    if (c_fit->parsed()) return fit(ft, out);
    if (c_plot->parsed()) return plot(pl);
  } catch (const NumericalAccuracyError& e) {
    err << "numerical error: " << e.what() << " (achieved error " << e.achieved_error() << ")\n";
    return numerical;
  } catch (const FitError& e) {
    err << "fit error: " << e.what() << " (final residual " << e.final_residual() << ")\n";
    return numerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return validation;
  }
  return usage;
}

}  // namespace rdc::cli
