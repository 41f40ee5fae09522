#pragma once

// Least-squares fitting of fluorescence decay traces and ODMR spectra.
//
// Both fitters use a Levenberg-Marquardt iteration with Marquardt's diagonal
// scaling (invariant under rescaling of individual parameters), uniform
// weights, a budget of 200 iterations and convergence on a relative change
// of the residual sum of squares below 1e-10.

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

namespace rdc {

struct FitOptions {
  std::size_t max_iterations = 200;
  double rel_tolerance = 1e-10;
};

// ---- fluorescence decay: y = a exp(-(t - b) / tau) + c ----

struct DecayTrace {
  std::vector<double> t_ns;
  std::vector<double> counts;

  std::size_t size() const noexcept { return t_ns.size(); }
  /// At least 8 samples, finite, strictly increasing time, counts >= 0.
  void validate() const;
};

struct DecayParams {
  double a = 1.0;
  double b = 0.0;
  double tau_ns = 1.0;
  double c = 0.0;
};

double decay_model(const DecayParams& p, double t_ns);
/// d model / d(a, b, tau, c).
std::array<double, 4> decay_gradient(const DecayParams& p, double t_ns);

struct DecayFit {
  double a = 0.0;
  double b = 0.0;
  double tau_ns = 0.0;
  double c = 0.0;
  double residual_rms = 0.0;
  double initial_residual_rms = 0.0;
  std::size_t iterations = 0;

  DecayParams params() const { return {a, b, tau_ns, c}; }
};

/// Data-derived starting point: c = tail mean, a = peak - c, b = time of the
/// peak, tau from the log-slope over the first decade of decay.
DecayParams initial_decay_guess(const DecayTrace& trace);

/// a and b only enter through a exp(b / tau), so b is a gauge: it stays at
/// the guess (default: time of the peak) and a, tau, c are fitted.
/// Throws FitError for a constant trace or when the budget runs out.
DecayFit fit_exp_decay(const DecayTrace& trace, const std::optional<DecayParams>& initial_guess = std::nullopt,
                       const FitOptions& options = {});

// ---- ODMR: baseline (1 - c- L(nu; D - E) - c+ L(nu; D + E)) ----

struct OdmrSpectrum {
  std::vector<double> freq_GHz;
  std::vector<double> pl;

  std::size_t size() const noexcept { return freq_GHz.size(); }
  /// At least 12 finite samples with strictly increasing frequency.
  void validate() const;
};

struct OdmrParams {
  double D_GHz = 3.5;
  double E_GHz = 0.0;
  double contrast_minus = 0.0;
  double contrast_plus = 0.0;
  double width_GHz = 0.1;  ///< full width at half minimum
  double baseline = 1.0;
};

/// Unit-peak Lorentzian of full width `width` centred on `center`.
double lorentzian(double nu, double center, double width);
double odmr_model(const OdmrParams& p, double freq_GHz);
/// d model / d(D, E, c-, c+, width, baseline).
std::array<double, 6> odmr_gradient(const OdmrParams& p, double freq_GHz);

struct OdmrFit {
  OdmrParams params;
  double residual_rms = 0.0;
  double initial_residual_rms = 0.0;
  std::size_t iterations = 0;
  /// Only one resolvable dip: E was pinned at 0 and the two contrasts share
  /// the dip depth equally.
  bool single_dip = false;
};

/// Starting point from the two deepest local minima of the lightly smoothed
/// spectrum.
OdmrParams initial_odmr_guess(const OdmrSpectrum& spectrum);

OdmrFit fit_odmr(const OdmrSpectrum& spectrum, const std::optional<OdmrParams>& initial_guess = std::nullopt,
                 const FitOptions& options = {});

}  // namespace rdc
