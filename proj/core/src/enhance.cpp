#include "rdc/enhance.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rdc/errors.hpp"
#include "rdc/parallel.hpp"

namespace rdc {

SpectrumWeight::SpectrumWeight() = default;

SpectrumWeight SpectrumWeight::gaussian(double center_nm, double fwhm_nm) {
  if (!std::isfinite(center_nm) || !(fwhm_nm > 0.0) || !std::isfinite(fwhm_nm)) {
    throw ValidationError("spectrum", "gaussian needs a finite center and a positive FWHM");
  }
  SpectrumWeight w;
  w.model_ = Model::gaussian;
  w.a_ = center_nm;
  w.b_ = fwhm_nm;
  return w;
}

SpectrumWeight SpectrumWeight::flat(double min_nm, double max_nm) {
  if (!(min_nm < max_nm) || !std::isfinite(min_nm) || !std::isfinite(max_nm)) {
    throw ValidationError("spectrum", "flat weight needs min < max");
  }
  SpectrumWeight w;
  w.model_ = Model::flat;
  w.a_ = min_nm;
  w.b_ = max_nm;
  return w;
}

SpectrumWeight SpectrumWeight::tabulated(std::vector<std::pair<double, double>> rows) {
  if (rows.size() < 2) throw ValidationError("spectrum", "table needs at least 2 rows");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!(rows[i].second >= 0.0) || !std::isfinite(rows[i].first)) {
      throw ValidationError("spectrum", "table weights must be finite and >= 0 (row " + std::to_string(i + 1) + ")");
    }
    if (i > 0 && !(rows[i].first > rows[i - 1].first)) {
      throw ValidationError("spectrum", "table wavelengths must increase (row " + std::to_string(i + 1) + ")");
    }
  }
  SpectrumWeight w;
  w.model_ = Model::table;
  w.rows_ = std::move(rows);
  return w;
}

SpectrumWeight SpectrumWeight::with_band(double min_nm, double max_nm) const {
  if (!(min_nm < max_nm) || !(min_nm > 0.0) || !std::isfinite(max_nm)) {
    throw ValidationError("band_nm", "band needs 0 < min < max");
  }
  SpectrumWeight w = *this;
  w.band_min_ = min_nm;
  w.band_max_ = max_nm;
  return w;
}

SpectrumWeight SpectrumWeight::scaled(double factor) const {
  if (!(factor > 0.0) || !std::isfinite(factor)) throw ValidationError("spectrum", "scale must be positive");
  SpectrumWeight w = *this;
  w.scale_ *= factor;
  return w;
}

double SpectrumWeight::operator()(double wl) const {
  switch (model_) {
    case Model::gaussian: {
      const double sigma = b_ / (2.0 * std::sqrt(2.0 * std::log(2.0)));
      const double x = (wl - a_) / sigma;
      return scale_ * std::exp(-0.5 * x * x);
    }
    case Model::flat:
      return (wl >= a_ && wl <= b_) ? scale_ : 0.0;
    case Model::table: {
      if (wl < rows_.front().first || wl > rows_.back().first) return 0.0;
      auto hi = std::lower_bound(rows_.begin(), rows_.end(), wl,
                                 [](const auto& row, double x) { return row.first < x; });
      if (hi->first == wl) return scale_ * hi->second;
      auto lo = hi - 1;
      const double f = (wl - lo->first) / (hi->first - lo->first);
      return scale_ * (lo->second + f * (hi->second - lo->second));
    }
  }
  return 0.0;
}

std::vector<double> SpectrumWeight::sample_wavelengths(std::size_t n) const {
  if (n < 2) throw ValidationError("n_samples", "band average needs at least 2 samples");
  std::vector<double> out(n);
  const double h = (band_max_ - band_min_) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) out[i] = band_min_ + h * static_cast<double>(i);
  out.back() = band_max_;
  return out;
}

std::string SpectrumWeight::describe() const {
  std::ostringstream s;
  switch (model_) {
    case Model::gaussian: s << "gaussian " << a_ << " " << b_; break;
    case Model::flat: s << "flat " << a_ << " " << b_; break;
    case Model::table: s << "table (" << rows_.size() << " rows)"; break;
  }
  return s.str();
}

double band_average(std::span<const double> values, const SpectrumWeight& weight) {
  const auto wl = weight.sample_wavelengths(values.size());
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < wl.size(); ++i) {
    const double trap = (i == 0 || i + 1 == wl.size()) ? 0.5 : 1.0;
    const double w = weight(wl[i]);
    num += trap * w * values[i];
    den += trap * w;
  }
  if (!(den > 0.0)) throw ValidationError("spectrum", "weight vanishes over the integration band");
  return num / den;
}

double band_average(const std::function<double(double)>& quantity, const SpectrumWeight& weight,
                    std::size_t n_samples) {
  const auto wl = weight.sample_wavelengths(n_samples);
  std::vector<double> values(wl.size());
  for (std::size_t i = 0; i < wl.size(); ++i) values[i] = quantity(wl[i]);
  return band_average(values, weight);
}

double pump_intensity(const Stack& stack, const EmitterSpec& emitter, double pump_wavelength_nm) {
  // At normal incidence s and p coincide; s is used.
  return field_profile(stack, Polarization::s, pump_wavelength_nm, 0.0, emitter_depth_from_top(stack, emitter))
      .intensity;
}

double excitation_gain(const Stack& stack, const EmitterSpec& emitter, const Stack& ref_stack,
                       const EmitterSpec& ref_emitter, double pump_wavelength_nm) {
  const double ref = pump_intensity(ref_stack, ref_emitter, pump_wavelength_nm);
  if (!(ref > 0.0)) throw NumericalAccuracyError("pump intensity vanishes at the reference emitter", 0.0);
  return pump_intensity(stack, emitter, pump_wavelength_nm) / ref;
}

namespace {

void check_eta0(double eta0) {
  if (!(eta0 >= 0.0 && eta0 <= 1.0)) throw ValidationError("eta0", "must lie in [0, 1]");
}

// Decay probability through the structure's optical channels, divided by eta0
// so that ratios stay defined as eta0 -> 0.
double optical_decay_per_eta0(double F, double eta0) { return F / (1.0 - eta0 + eta0 * F); }

}  // namespace

double effective_quantum_efficiency(double F, double eta0, double frac_lost) {
  if (!(F > 0.0)) throw ValidationError("purcell_F", "must be positive");
  check_eta0(eta0);
  return eta0 * (1.0 - frac_lost) * optical_decay_per_eta0(F, eta0);
}

double effective_quantum_efficiency(const EmissionResult& emission, double eta0) {
  return effective_quantum_efficiency(emission.purcell_F, eta0, emission.frac_lost);
}

double lifetime_ratio(double F_stack, double F_ref, double eta0) {
  if (!(F_stack > 0.0) || !(F_ref > 0.0)) throw ValidationError("purcell_F", "must be positive");
  check_eta0(eta0);
  return (1.0 - eta0 + eta0 * F_ref) / (1.0 - eta0 + eta0 * F_stack);
}

double calibrate_eta0(double F_stack, double F_ref, double target_ratio) {
  if (!(F_stack > 0.0) || !(F_ref > 0.0)) throw ValidationError("purcell_F", "must be positive");
  if (!(target_ratio > 0.0)) throw ValidationError("lifetime_ratio", "target must be positive");
  // rho (1 + eta (Fs - 1)) = 1 + eta (Fr - 1), linear in eta.
  const double slope = target_ratio * (F_stack - 1.0) - (F_ref - 1.0);
  const double rhs = 1.0 - target_ratio;
  if (std::abs(slope) < 1e-15) {
    if (std::abs(rhs) < 1e-15) return 0.0;
    throw ValidationError("lifetime_ratio", "equal decay rates cannot produce a lifetime change");
  }
  const double eta = rhs / slope;
  if (!(eta >= 0.0 && eta <= 1.0)) {
    std::ostringstream msg;
    msg << "no quantum efficiency in [0, 1] gives lifetime ratio " << target_ratio << " for F = " << F_stack
        << " vs " << F_ref << " (would need " << eta << ")";
    throw ValidationError("lifetime_ratio", msg.str());
  }
  return eta;
}

EnhancementReport pl_enhancement(const Scenario& stack, const Scenario& reference, const EnhancementOptions& opt) {
  const double eta0 = stack.emitter.quantum_efficiency_eta0;
  check_eta0(eta0);
  check_eta0(reference.emitter.quantum_efficiency_eta0);
  const double ref_eta0 = reference.emitter.quantum_efficiency_eta0;
  const auto wl = opt.weight.sample_wavelengths(opt.n_samples);

  EnhancementReport rep;
  rep.eta0 = eta0;
  rep.rows.resize(wl.size());
  parallel_for(
      wl.size(),
      [&](std::size_t i) {
        auto& row = rep.rows[i];
        row.wavelength_nm = wl[i];
        row.weight = opt.weight(wl[i]);
        row.stack = emission(stack.stack, stack.emitter, wl[i], opt.numerical_aperture, opt.quadrature);
        row.reference =
            emission(reference.stack, reference.emitter, wl[i], opt.numerical_aperture, opt.quadrature);
        row.eta_effective = effective_quantum_efficiency(row.stack, eta0);
        row.ref_eta_effective = effective_quantum_efficiency(row.reference, ref_eta0);
        row.yield = eta0 * row.stack.collection_eta * optical_decay_per_eta0(row.stack.purcell_F, eta0);
        row.ref_yield =
            ref_eta0 * row.reference.collection_eta * optical_decay_per_eta0(row.reference.purcell_F, ref_eta0);
      },
      opt.threads);

  auto average = [&](auto&& pick) {
    std::vector<double> v(rep.rows.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = pick(rep.rows[i]);
    return band_average(v, opt.weight);
  };
  rep.band_avg_purcell = average([](const SpectralRow& r) { return r.stack.purcell_F; });
  rep.ref_band_avg_purcell = average([](const SpectralRow& r) { return r.reference.purcell_F; });
  rep.band_avg_collection = average([](const SpectralRow& r) { return r.stack.collection_eta; });
  rep.ref_band_avg_collection = average([](const SpectralRow& r) { return r.reference.collection_eta; });
  rep.collection_ratio = rep.band_avg_collection / rep.ref_band_avg_collection;

  // Ratios use the eta0-stripped forms so they stay finite at eta0 = 0.
  const double qe = average([&](const SpectralRow& r) {
    return (1.0 - r.stack.frac_lost) * optical_decay_per_eta0(r.stack.purcell_F, eta0);
  });
  const double ref_qe = average([&](const SpectralRow& r) {
    return (1.0 - r.reference.frac_lost) * optical_decay_per_eta0(r.reference.purcell_F, ref_eta0);
  });
  const double yield = average(
      [&](const SpectralRow& r) { return r.stack.collection_eta * optical_decay_per_eta0(r.stack.purcell_F, eta0); });
  const double ref_yield = average([&](const SpectralRow& r) {
    return r.reference.collection_eta * optical_decay_per_eta0(r.reference.purcell_F, ref_eta0);
  });
  rep.effective_qe_ratio = qe / ref_qe;
  rep.emission_gain = yield / ref_yield;
  rep.excitation_gain = excitation_gain(stack.stack, stack.emitter, reference.stack, reference.emitter,
                                        opt.pump_wavelength_nm);
  rep.total_gain = rep.excitation_gain * rep.emission_gain;
  rep.lifetime_ratio = lifetime_ratio(rep.band_avg_purcell, rep.ref_band_avg_purcell, eta0);

  for (double v : {rep.total_gain, rep.emission_gain, rep.effective_qe_ratio, rep.collection_ratio}) {
    if (!std::isfinite(v) || !(v > 0.0)) {
      throw NumericalAccuracyError("enhancement ratio is not finite and positive", 0.0);
    }
  }
  return rep;
}

}  // namespace rdc
