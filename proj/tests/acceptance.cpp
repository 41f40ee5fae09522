// Acceptance suite: one PASS/FAIL line per primary criterion.
//
// Exit status is 0 once every criterion has been evaluated (failures are
// reported, not hidden); pass --strict to turn any FAIL into exit status 1.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../tools/src/commands.hpp"
#include "rdc/config.hpp"
#include "rdc/dipole.hpp"
#include "rdc/enhance.hpp"
#include "rdc/errors.hpp"
#include "rdc/fit.hpp"
#include "rdc/io.hpp"
#include "rdc/model.hpp"
#include "rdc/sweep.hpp"

using namespace rdc;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;
const std::string kPresets = RDC_PRESET_DIR;

struct Outcome {
  bool pass;
  std::string detail;
};

int g_failures = 0;

void report(const char* id, const char* title, const Outcome& o) {
  std::printf("[%s] %s %s: %s\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass) ++g_failures;
}

template <class F>
void criterion(const char* id, const char* title, F&& body) {
  try {
    report(id, title, body());
  } catch (const std::exception& e) {
    report(id, title, {false, std::string("exception: ") + e.what()});
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

RunConfig preset(const std::string& name) { return load_config(kPresets + "/" + name); }

// ---- 1 ----
Outcome optimum_spacer() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cfg = preset("rdc50.cfg");
  SweepSpec spec{"stack.spacer.thickness", SweepSpec::range(0, 140, 2), Metric::band_avg_purcell};
  auto res = run_sweep(spec, cfg);
  const double refined = refine_optimum(res, cfg, 0.5);
  const double secs = seconds_since(t0);
  const bool ok = refined >= 51.0 && refined <= 71.0 && secs <= 120.0;
  return {ok, fmt("refined optimum %.2f nm (grid argmax %g nm), target [51, 71] nm; %.1f s (limit 120 s)", refined,
                  *res.argmax_value, secs)};
}

// ---- 2 ----
Outcome enhancement_ordering() {
  const std::array<int, 6> t{0, 20, 50, 80, 110, 140};
  std::array<double, 6> g{};
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto cfg = preset("rdc" + std::to_string(t[i]) + ".cfg");
    g[i] = evaluate_metric(cfg, Metric::total_gain).metric;
  }
  const auto imax = static_cast<std::size_t>(std::max_element(g.begin(), g.end()) - g.begin());
  const bool ok = t[imax] == 50 && g[0] < g[2] && g[2] > g[5];
  std::string gains;
  for (std::size_t i = 0; i < t.size(); ++i) gains += fmt("%s%d:%.2f", i ? " " : "", t[i], g[i]);
  return {ok, fmt("total_gain {%s}; argmax %d nm (target 50), g(0) < g(50): %s, g(50) > g(140): %s", gains.c_str(),
                  t[imax], g[0] < g[2] ? "yes" : "no", g[2] > g[5] ? "yes" : "no")};
}

// ---- 3 ----
Outcome magnitude() {
  const auto cfg = preset("rdc50.cfg");
  const auto rep = pl_enhancement(stack_scenario(cfg), reference_scenario(cfg), enhancement_options(cfg));
  const bool ok = rep.total_gain >= 3.5 && rep.total_gain <= 14.0;
  return {ok, fmt("total_gain %.3f (excitation %.3f x emission %.3f), target [3.5, 14]", rep.total_gain,
                  rep.excitation_gain, rep.emission_gain)};
}

// ---- 4 ----
Outcome weak_purcell() {
  const auto cfg = preset("rdc50.cfg");
  const auto opt = enhancement_options(cfg);
  auto F = [&](const Scenario& sc) {
    return band_average([&](double wl) { return purcell(sc.stack, sc.emitter, wl, opt.quadrature).purcell_F; },
                        opt.weight, opt.n_samples);
  };
  const double Fs = F(stack_scenario(cfg));
  const double Fr = F(reference_scenario(cfg));
  const double target = 0.787 / 0.825;
  const double eta0 = calibrate_eta0(Fs, Fr, target);
  const double ratio = lifetime_ratio(Fs, Fr, eta0);
  const bool ok = eta0 <= 0.2 && ratio >= 0.90 && std::abs(ratio - 0.954) <= 0.001;
  return {ok, fmt("F %.4f vs reference %.4f; calibrated eta0 %.4f (limit 0.2); lifetime ratio %.5f "
                  "(>= 0.90, 0.954 +- 0.001); at default eta0 0.05: %.4f",
                  Fs, Fr, eta0, ratio, lifetime_ratio(Fs, Fr, 0.05))};
}

// ---- 5 ----
Outcome energy_conservation() {
  std::mt19937_64 rng(5001);
  std::uniform_real_distribution<double> idx(1.0, 3.5), thick(1.0, 400.0), un(0.0, 0.99), wl(400.0, 1000.0);
  std::uniform_int_distribution<int> count(0, 6);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    std::vector<Layer> layers;
    const int n = count(rng);
    for (int k = 0; k < n; ++k) layers.push_back({Material::constant("l", idx(rng)), thick(rng)});
    const double n_above = std::uniform_real_distribution<double>(1.0, 2.0)(rng);
    const Stack s(Material::constant("b", idx(rng)), layers, Material::constant("a", n_above));
    const double lambda = wl(rng);
    for (int a = 0; a < 5; ++a) {
      const double u = un(rng);
      for (auto pol : {Polarization::s, Polarization::p}) {
        const auto r = stack_rt(s, pol, lambda, u);
        worst = std::max(worst, std::abs(r.R + r.T - 1.0));
      }
    }
  }
  return {worst <= 1e-10, fmt("1000 stacks x 5 angles x 2 polarisations, max |R+T-1| = %.2e (limit 1e-10)", worst)};
}

Outcome free_space() {
  double worst = 0.0;
  const Stack s(materials::vacuum(), {{materials::vacuum(), 200.0}}, materials::vacuum());
  for (auto o : {Orientation::in_plane_average, Orientation::out_of_plane, Orientation::isotropic_average}) {
    for (double wl : {450.0, 600.0, 750.0, 810.0, 900.0}) {
      worst = std::max(worst, std::abs(purcell(s, {0, 70.0, o, 1.0}, wl).purcell_F - 1.0));
    }
  }
  return {worst <= 1e-6, fmt("5 wavelengths x 3 orientations, max |F-1| = %.2e (limit 1e-6)", worst)};
}

struct Mirror {
  Stack stack;
  EmitterSpec emitter;
};

Mirror over_mirror(double d, double wl) {
  const double h = d + 2 * wl;
  return {Stack(materials::perfect_mirror(), {{materials::vacuum(), h}}, materials::vacuum()), {0, h - d}};
}

Outcome contact_limits() {
  const double wl = 800.0;
  auto [s, e] = over_mirror(wl / 1000, wl);
  const auto r = purcell(s, e, wl);
  const bool ok = std::abs(r.purcell_parallel) <= 1e-3 && std::abs(r.purcell_perpendicular - 2.0) <= 1e-3;
  return {ok, fmt("d = lambda/1000: F_par %.2e (-> 0), F_perp %.6f (-> 2), tolerance 1e-3", r.purcell_parallel,
                  r.purcell_perpendicular)};
}

// Image-dipole rates from the field of the mirror image evaluated at the source.
double image_rate(bool perpendicular, double d, double wl) {
  const double k = 2 * kPi / wl;
  const double r = 2 * d;
  const Complex ph = std::exp(Complex(0, k * r));
  const Complex near = 1.0 / (r * r * r) - Complex(0, k) / (r * r);
  // p along z with image +p: E_z = 2 near; p along x with image -p: E_x = -(k^2/r - near)
  const Complex e = perpendicular ? ph * 2.0 * near : -ph * (k * k / r - near);
  return 1.0 + e.imag() / (2.0 / 3.0 * k * k * k);
}

Outcome image_oracle() {
  const double wl = 800.0;
  double worst = 0.0;
  for (int i = 0; i <= 40; ++i) {
    const double f = 0.05 * std::pow(40.0, i / 40.0);  // 0.05 .. 2 lambda
    auto [s, e] = over_mirror(f * wl, wl);
    const auto r = purcell(s, e, wl);
    worst = std::max(worst, std::abs(r.purcell_parallel - image_rate(false, f * wl, wl)));
    worst = std::max(worst, std::abs(r.purcell_perpendicular - image_rate(true, f * wl, wl)));
  }
  return {worst <= 1e-3, fmt("41 heights in [0.05, 2] lambda, max |F - F_image| = %.2e (limit 1e-3)", worst)};
}

Outcome quadrature_convergence() {
  QuadratureSpec fine;
  fine.rel_tol = 1e-12;
  fine.abs_tol = 1e-15;
  fine.initial_panels = 16;
  fine.u_max = 20.0;
  fine.max_intervals = 8000;
  double worst = 0.0;
  int cases = 0;
  for (const auto& entry : fs::directory_iterator(kPresets)) {
    if (entry.path().extension() != ".cfg") continue;
    const auto cfg = load_config(entry.path());
    for (const auto& sc : {stack_scenario(cfg), reference_scenario(cfg)}) {
      for (double wl = 750.0; wl <= 900.0; wl += 25.0) {
        for (auto o : {Orientation::in_plane_average, Orientation::out_of_plane}) {
          EmitterSpec e = sc.emitter;
          e.orientation = o;
          const double a = purcell(sc.stack, e, wl).purcell_F;
          const double b = purcell(sc.stack, e, wl, fine).purcell_F;
          worst = std::max(worst, std::abs(a - b) / std::abs(b));
          ++cases;
        }
      }
    }
  }
  return {worst < 1e-4, fmt("%d preset/wavelength/orientation cases, max relative change %.2e (limit 1e-4)", cases,
                            worst)};
}

// ---- 6 ----
bool within(double a, double b, double rel) { return std::abs(a - b) <= rel * std::abs(b); }

DecayTrace decay_trace(const DecayParams& p) {
  DecayTrace tr;
  for (int i = 0; i < 64; ++i) {
    const double t = 10.0 * i / 63.0;
    tr.t_ns.push_back(t);
    tr.counts.push_back(decay_model(p, t));
  }
  return tr;
}

DecayParams guess_at(const DecayTrace& tr, double b) {
  auto g = initial_decay_guess(tr);
  g.a *= std::exp((g.b - b) / g.tau_ns);
  g.b = b;
  return g;
}

OdmrSpectrum odmr_spectrum(const OdmrParams& p) {
  OdmrSpectrum s;
  for (int i = 0; i <= 200; ++i) {
    const double f = 3.0 + i / 200.0;
    s.freq_GHz.push_back(f);
    s.pl.push_back(odmr_model(p, f));
  }
  return s;
}

double worst_decay_error(const DecayFit& f, const DecayParams& t) {
  return std::max({std::abs(f.a - t.a) / t.a, std::abs(f.tau_ns - t.tau_ns) / t.tau_ns, std::abs(f.c - t.c) / t.c,
                   std::abs(f.b - t.b)});
}

double worst_odmr_error(const OdmrParams& f, const OdmrParams& t) {
  return std::max({std::abs(f.D_GHz - t.D_GHz) / t.D_GHz, std::abs(f.E_GHz - t.E_GHz) / t.E_GHz,
                   std::abs(f.contrast_minus - t.contrast_minus) / t.contrast_minus,
                   std::abs(f.contrast_plus - t.contrast_plus) / t.contrast_plus,
                   std::abs(f.width_GHz - t.width_GHz) / t.width_GHz, std::abs(f.baseline - t.baseline) / t.baseline});
}

Outcome fit_recovery() {
  const DecayParams dtruth{1000.0, 0.5, 0.8, 20.0};
  const OdmrParams otruth{3.47, 0.05, 0.18, 0.16, 0.15, 1.0};
  std::mt19937_64 rng(20240915);
  std::normal_distribution<double> noise(0.0, 0.01);

  const auto clean = decay_trace(dtruth);
  const double d_clean = worst_decay_error(fit_exp_decay(clean, guess_at(clean, 0.5)), dtruth);
  const double o_clean = worst_odmr_error(fit_odmr(odmr_spectrum(otruth)).params, otruth);

  auto noisy = clean;
  for (double& y : noisy.counts) y *= 1.0 + noise(rng);
  const double d_noisy = worst_decay_error(fit_exp_decay(noisy, guess_at(noisy, 0.5)), dtruth);
  auto onoisy = odmr_spectrum(otruth);
  for (double& y : onoisy.pl) y += otruth.baseline * noise(rng);
  const double o_noisy = worst_odmr_error(fit_odmr(onoisy).params, otruth);

  // Equivariance on the noisy trace with the default guess.
  const auto base = fit_exp_decay(noisy);
  auto shifted = noisy;
  for (double& t : shifted.t_ns) t += 1.7;
  const auto s = fit_exp_decay(shifted);
  auto scaled = noisy;
  for (double& y : scaled.counts) y *= 3.3;
  const auto k = fit_exp_decay(scaled);
  const double eq = std::max({std::abs(s.b - base.b - 1.7), std::abs(s.a - base.a) / base.a,
                              std::abs(s.tau_ns - base.tau_ns) / base.tau_ns, std::abs(s.c - base.c) / base.c,
                              std::abs(k.a - 3.3 * base.a) / k.a, std::abs(k.c - 3.3 * base.c) / k.c,
                              std::abs(k.tau_ns - base.tau_ns) / base.tau_ns, std::abs(k.b - base.b),
                              std::abs(k.residual_rms - 3.3 * base.residual_rms) / k.residual_rms});

  const bool ok = d_clean <= 1e-3 && o_clean <= 1e-3 && d_noisy <= 0.05 && o_noisy <= 0.05 && eq <= 1e-9;
  return {ok, fmt("noiseless max rel error decay %.1e / ODMR %.1e (limit 1e-3); 1%% noise decay %.2e / ODMR %.2e "
                  "(limit 5e-2); equivariance %.1e (limit 1e-9)",
                  d_clean, o_clean, d_noisy, o_noisy, eq)};
}

// ---- 7 ----
std::string run_cli_with_threads(const char* threads, const std::vector<std::string>& args, const fs::path& out) {
  ::setenv("RDC_THREADS", threads, 1);
  std::ostringstream o, e;
  const int code = cli::run(args, o, e);
  if (code != 0) throw Error("rdc " + args.front() + " failed: " + e.str());
  return read_file(out);
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "rdc_acceptance";
  fs::create_directories(dir);
  const auto json = (dir / "report.json").string();
  const auto csv = (dir / "sweep.csv").string();
  const std::vector<std::string> sim{"simulate", kPresets + "/rdc50.cfg", "-o", json};
  const std::vector<std::string> sweep{"sweep", kPresets + "/rdc50.cfg", "--param", "stack.spacer.thickness",
                                       "--range", "0:140:10", "--metric", "total_gain", "--refine", "-o", csv};
  const bool same_json = run_cli_with_threads("1", sim, json) == run_cli_with_threads("4", sim, json);
  const bool same_csv = run_cli_with_threads("1", sweep, csv) == run_cli_with_threads("4", sweep, csv);
  ::unsetenv("RDC_THREADS");
  fs::remove_all(dir);
  return {same_json && same_csv, fmt("simulate JSON %s, sweep CSV %s between 1 and 4 threads",
                                     same_json ? "identical" : "DIFFERS", same_csv ? "identical" : "DIFFERS")};
}

}  // namespace

int main(int argc, char** argv) {
  const bool strict = argc > 1 && std::string(argv[1]) == "--strict";

  criterion("1", "optimum spacer thickness", optimum_spacer);
  criterion("2", "enhancement ordering", enhancement_ordering);
  criterion("3", "enhancement magnitude", magnitude);
  criterion("4", "weak Purcell lifetime shift", weak_purcell);

  const auto t5 = std::chrono::steady_clock::now();
  criterion("5a", "R+T=1 on lossless stacks", energy_conservation);
  criterion("5b", "free-space Purcell factor", free_space);
  criterion("5c", "perfect-mirror contact limits", contact_limits);
  criterion("5d", "image-dipole oracle", image_oracle);
  criterion("5e", "quadrature self-convergence", quadrature_convergence);
  const double secs5 = seconds_since(t5);
  report("5", "electromagnetic suite runtime", {secs5 <= 60.0, fmt("%.1f s (limit 60 s)", secs5)});

  criterion("6", "fit recovery", fit_recovery);
  criterion("7", "determinism across thread counts", determinism);

  std::printf("%d criterion line(s) failed\n", g_failures);
  return strict && g_failures > 0 ? 1 : 0;
}
