#pragma once

// Observable photoluminescence enhancement of an emitter in one stack
// relative to a reference stack.
//
// Per emission wavelength the detected yield per excitation is
//   yield = collection_eta * eta0 F / (1 - eta0 + eta0 F),
// where collection_eta is the fraction of all dipole power inside the
// objective's NA and the second factor is the probability of photon-like
// (radiative into the structure) decay. The same number equals
// (collected / radiated) * eta_effective with
//   eta_effective = eta0 (1 - frac_lost) F / (1 - eta0 + eta0 F).
// The total gain multiplies the band-averaged yield ratio by the pump
// intensity ratio at the emitter (linear excitation).

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rdc/dipole.hpp"

namespace rdc {

class SpectrumWeight {
 public:
  enum class Model { gaussian, flat, table };

  /// gaussian(810, 80) on [750, 900] nm.
  SpectrumWeight();
  static SpectrumWeight gaussian(double center_nm, double fwhm_nm);
  static SpectrumWeight flat(double min_nm, double max_nm);
  /// Linearly interpolated (wavelength_nm, weight) pairs; zero outside.
  static SpectrumWeight tabulated(std::vector<std::pair<double, double>> rows);

  /// Copy with a different integration band.
  SpectrumWeight with_band(double min_nm, double max_nm) const;
  /// Copy multiplied by a positive constant.
  SpectrumWeight scaled(double factor) const;

  Model model() const noexcept { return model_; }
  double center_nm() const noexcept { return a_; }
  double fwhm_nm() const noexcept { return b_; }
  double flat_min_nm() const noexcept { return a_; }
  double flat_max_nm() const noexcept { return b_; }
  const std::vector<std::pair<double, double>>& rows() const noexcept { return rows_; }
  double band_min_nm() const noexcept { return band_min_; }
  double band_max_nm() const noexcept { return band_max_; }

  /// Unnormalised weight, >= 0.
  double operator()(double wavelength_nm) const;
  /// n evenly spaced wavelengths spanning the band.
  std::vector<double> sample_wavelengths(std::size_t n) const;
  std::string describe() const;

 private:
  Model model_ = Model::gaussian;
  double a_ = 810.0;
  double b_ = 80.0;
  double scale_ = 1.0;
  std::vector<std::pair<double, double>> rows_;
  double band_min_ = 750.0;
  double band_max_ = 900.0;
};

/// Trapezoidal integral of quantity * weight over the band divided by the
/// trapezoidal integral of weight.
double band_average(const std::function<double(double)>& quantity, const SpectrumWeight& weight,
                    std::size_t n_samples = 31);
/// Same for values already sampled at weight.sample_wavelengths(values.size()).
double band_average(std::span<const double> values, const SpectrumWeight& weight);

/// |E|^2 at the emitter for a unit normal-incidence pump from above.
double pump_intensity(const Stack& stack, const EmitterSpec& emitter, double pump_wavelength_nm = 532.0);

double excitation_gain(const Stack& stack, const EmitterSpec& emitter, const Stack& ref_stack,
                       const EmitterSpec& ref_emitter, double pump_wavelength_nm = 532.0);

/// eta0 (1 - frac_lost) F / (1 - eta0 + eta0 F).
double effective_quantum_efficiency(double F, double eta0, double frac_lost = 0.0);
double effective_quantum_efficiency(const EmissionResult& emission, double eta0);

/// tau_stack / tau_ref = (1 - eta0 + eta0 F_ref) / (1 - eta0 + eta0 F_stack).
double lifetime_ratio(double F_stack, double F_ref, double eta0);

/// eta0 giving lifetime_ratio(F_stack, F_ref, eta0) == target_ratio. Throws
/// ValidationError when no eta0 in [0, 1] does.
double calibrate_eta0(double F_stack, double F_ref, double target_ratio);

/// An emitter placed in a stack.
struct Scenario {
  Stack stack;
  EmitterSpec emitter;
};

struct EnhancementOptions {
  SpectrumWeight weight;
  std::size_t n_samples = 31;
  double numerical_aperture = 0.9;
  double pump_wavelength_nm = 532.0;
  QuadratureSpec quadrature;
  std::size_t threads = 0;
};

struct SpectralRow {
  double wavelength_nm = 0.0;
  double weight = 0.0;
  EmissionResult stack;
  EmissionResult reference;
  double eta_effective = 0.0;
  double ref_eta_effective = 0.0;
  double yield = 0.0;
  double ref_yield = 0.0;
};

struct EnhancementReport {
  double excitation_gain = 1.0;
  double band_avg_purcell = 1.0;
  double ref_band_avg_purcell = 1.0;
  double band_avg_collection = 0.0;
  double ref_band_avg_collection = 0.0;
  double effective_qe_ratio = 1.0;
  double collection_ratio = 1.0;
  double emission_gain = 1.0;  ///< band-averaged yield ratio
  double total_gain = 1.0;     ///< excitation_gain * emission_gain
  double lifetime_ratio = 1.0;
  double eta0 = 0.0;
  std::vector<SpectralRow> rows;
};

EnhancementReport pl_enhancement(const Scenario& stack, const Scenario& reference,
                                 const EnhancementOptions& options = {});

}  // namespace rdc
