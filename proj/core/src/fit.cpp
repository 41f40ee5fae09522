#include "rdc/fit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "rdc/errors.hpp"

namespace rdc {

namespace {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Residuals r = model - data and (optionally) the Jacobian. Returns false
// when the parameters leave the model's domain.
using ResidualFn = std::function<bool(const Vec& p, Vec& r, Mat* jac)>;

struct LmResult {
  Vec params;
  double cost = 0.0;  // sum of squared residuals
  double initial_cost = 0.0;
  std::size_t iterations = 0;
};

LmResult levenberg_marquardt(const ResidualFn& fn, Vec p, std::size_t n_data, const FitOptions& opt) {
  Vec r(n_data);
  Mat jac(n_data, p.size());
  if (!fn(p, r, &jac)) throw FitError("initial guess lies outside the model domain", NAN);
  double cost = r.squaredNorm();
  LmResult out;
  out.initial_cost = cost;

  double lambda = 1e-3;
  Vec trial_r(n_data);
  for (std::size_t it = 1; it <= opt.max_iterations; ++it) {
    out.iterations = it;
    const Mat jtj = jac.transpose() * jac;
    const Vec g = jac.transpose() * r;
    Vec scale = jtj.diagonal();
    for (Eigen::Index i = 0; i < scale.size(); ++i) scale[i] = std::max(scale[i], 1e-300);

    bool improved = false;
    double new_cost = cost;
    Vec trial;
    while (lambda < 1e16) {
      Mat a = jtj;
      a.diagonal() += lambda * scale;
      const Vec step = a.ldlt().solve(-g);
      trial = p + step;
      if (step.allFinite() && fn(trial, trial_r, nullptr)) {
        new_cost = trial_r.squaredNorm();
        if (new_cost < cost) {
          improved = true;
          break;
        }
      }
      lambda *= 4.0;
    }
    if (!improved) {
      // No downhill step at any damping: already at the minimum to rounding.
      break;
    }
    const double rel_change = (cost - new_cost) / std::max(cost, 1e-300);
    p = trial;
    cost = new_cost;
    fn(p, r, &jac);
    lambda = std::max(lambda / 3.0, 1e-12);
    if (rel_change < opt.rel_tolerance) break;
    if (it == opt.max_iterations) {
      std::ostringstream msg;
      msg << "fit did not converge within " << opt.max_iterations << " iterations";
      throw FitError(msg.str(), std::sqrt(cost / static_cast<double>(n_data)));
    }
  }
  out.params = p;
  out.cost = cost;
  return out;
}

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

// ---------------------------------------------------------------- decay --

void DecayTrace::validate() const {
  if (t_ns.size() != counts.size()) throw ValidationError("trace", "time and count columns differ in length");
  if (t_ns.size() < 8) {
    throw ValidationError("trace", "need at least 8 samples, got " + std::to_string(t_ns.size()));
  }
  if (!all_finite(t_ns) || !all_finite(counts)) throw ValidationError("trace", "non-finite value");
  for (std::size_t i = 0; i < t_ns.size(); ++i) {
    if (counts[i] < 0.0) throw ValidationError("counts", "negative count at sample " + std::to_string(i + 1));
    if (i > 0 && !(t_ns[i] > t_ns[i - 1])) {
      throw ValidationError("t_ns", "times must strictly increase (sample " + std::to_string(i + 1) + ")");
    }
  }
}

double decay_model(const DecayParams& p, double t) { return p.a * std::exp(-(t - p.b) / p.tau_ns) + p.c; }

std::array<double, 4> decay_gradient(const DecayParams& p, double t) {
  const double e = std::exp(-(t - p.b) / p.tau_ns);
  return {e, p.a * e / p.tau_ns, p.a * e * (t - p.b) / (p.tau_ns * p.tau_ns), 1.0};
}

DecayParams initial_decay_guess(const DecayTrace& trace) {
  trace.validate();
  const auto& t = trace.t_ns;
  const auto& y = trace.counts;
  const std::size_t n = y.size();
  const std::size_t peak = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());

  // Tail: last 10% of samples (at least 2).
  const std::size_t tail_n = std::max<std::size_t>(2, n / 10);
  const double c = std::accumulate(y.end() - static_cast<std::ptrdiff_t>(tail_n), y.end(), 0.0) /
                   static_cast<double>(tail_n);
  const double a = y[peak] - c;
  if (!(a > 0.0)) throw FitError("trace has no decay above its tail level", 0.0);

  // First decade: from the peak until the excess falls below a tenth.
  std::size_t end = peak + 1;
  while (end < n && y[end] - c > 0.1 * a) ++end;
  double tau = 0.0;
  if (end - peak >= 2) {
    // Least-squares slope of log(excess) over the decade.
    double st = 0, sl = 0, stt = 0, stl = 0;
    std::size_t m = 0;
    for (std::size_t i = peak; i < end; ++i) {
      const double ex = y[i] - c;
      if (ex <= 0.0) continue;
      const double l = std::log(ex);
      st += t[i];
      sl += l;
      stt += t[i] * t[i];
      stl += t[i] * l;
      ++m;
    }
    const double md = static_cast<double>(m);
    const double denom = md * stt - st * st;
    if (m >= 2 && denom > 0.0) {
      const double slope = (md * stl - st * sl) / denom;
      if (slope < 0.0) tau = -1.0 / slope;
    }
  }
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    const std::size_t stop = std::min(end, n - 1);
    tau = std::max(t[stop] - t[peak], t[1] - t[0]) / std::log(10.0);
  }
  return {a, t[peak], tau, c};
}

DecayFit fit_exp_decay(const DecayTrace& trace, const std::optional<DecayParams>& initial_guess,
                       const FitOptions& options) {
  trace.validate();
  const auto [ymin, ymax] = std::minmax_element(trace.counts.begin(), trace.counts.end());
  if (*ymax - *ymin <= 1e-12 * std::max(std::abs(*ymax), 1.0)) {
    throw FitError("trace is constant; the decay time is not identifiable", 0.0);
  }
  const DecayParams guess = initial_guess ? *initial_guess : initial_decay_guess(trace);
  if (!(guess.tau_ns > 0.0)) throw ValidationError("tau_ns", "initial decay time must be positive");

  const double b = guess.b;
  const auto& t = trace.t_ns;
  const auto& y = trace.counts;
  // Free parameters: a, tau, c.
  ResidualFn fn = [&](const Vec& p, Vec& r, Mat* jac) {
    if (!(p[1] > 0.0)) return false;
    const DecayParams q{p[0], b, p[1], p[2]};
    for (std::size_t i = 0; i < t.size(); ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      r[row] = decay_model(q, t[i]) - y[i];
      if (jac) {
        const auto g = decay_gradient(q, t[i]);
        (*jac)(row, 0) = g[0];
        (*jac)(row, 1) = g[2];
        (*jac)(row, 2) = g[3];
      }
    }
    return r.allFinite();
  };
  Vec p0(3);
  p0 << guess.a, guess.tau_ns, guess.c;
  const auto res = levenberg_marquardt(fn, p0, t.size(), options);

  DecayFit fit;
  fit.a = res.params[0];
  fit.b = b;
  fit.tau_ns = res.params[1];
  fit.c = res.params[2];
  const double n = static_cast<double>(t.size());
  fit.residual_rms = std::sqrt(res.cost / n);
  fit.initial_residual_rms = std::sqrt(res.initial_cost / n);
  fit.iterations = res.iterations;
  return fit;
}

// ----------------------------------------------------------------- ODMR --

void OdmrSpectrum::validate() const {
  if (freq_GHz.size() != pl.size()) throw ValidationError("spectrum", "frequency and PL columns differ in length");
  if (freq_GHz.size() < 12) {
    throw ValidationError("spectrum", "need at least 12 samples, got " + std::to_string(freq_GHz.size()));
  }
  if (!all_finite(freq_GHz) || !all_finite(pl)) throw ValidationError("spectrum", "non-finite value");
  for (std::size_t i = 1; i < freq_GHz.size(); ++i) {
    if (!(freq_GHz[i] > freq_GHz[i - 1])) {
      throw ValidationError("freq_GHz", "frequencies must strictly increase (sample " + std::to_string(i + 1) + ")");
    }
  }
}

double lorentzian(double nu, double center, double width) {
  const double hw = 0.5 * width;
  const double x = nu - center;
  return hw * hw / (x * x + hw * hw);
}

double odmr_model(const OdmrParams& p, double nu) {
  return p.baseline * (1.0 - p.contrast_minus * lorentzian(nu, p.D_GHz - p.E_GHz, p.width_GHz) -
                       p.contrast_plus * lorentzian(nu, p.D_GHz + p.E_GHz, p.width_GHz));
}

std::array<double, 6> odmr_gradient(const OdmrParams& p, double nu) {
  const double hw = 0.5 * p.width_GHz;
  const double h2 = hw * hw;
  const double xm = nu - (p.D_GHz - p.E_GHz);
  const double xp = nu - (p.D_GHz + p.E_GHz);
  const double qm = xm * xm + h2;
  const double qp = xp * xp + h2;
  const double lm = h2 / qm;
  const double lp = h2 / qp;
  // dL/dcenter = 2 x h2 / q^2 ; dL/dwidth = (hw x^2 / q^2)
  const double dlm_dc = 2.0 * xm * h2 / (qm * qm);
  const double dlp_dc = 2.0 * xp * h2 / (qp * qp);
  const double dlm_dw = hw * xm * xm / (qm * qm);
  const double dlp_dw = hw * xp * xp / (qp * qp);
  const double B = p.baseline;
  const double cm = p.contrast_minus, cp = p.contrast_plus;
  return {
      -B * (cm * dlm_dc + cp * dlp_dc),
      -B * (-cm * dlm_dc + cp * dlp_dc),
      -B * lm,
      -B * lp,
      -B * (cm * dlm_dw + cp * dlp_dw),
      1.0 - cm * lm - cp * lp,
  };
}

namespace {

std::vector<double> smoothed(const std::vector<double>& y) {
  const std::size_t n = y.size();
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= 2 ? i - 2 : 0;
    const std::size_t hi = std::min(n - 1, i + 2);
    double sum = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) sum += y[j];
    s[i] = sum / static_cast<double>(hi - lo + 1);
  }
  return s;
}

double upper_median(std::vector<double> v) {
  // Median of the upper half: a baseline estimate robust to the dips.
  std::sort(v.begin(), v.end());
  const std::size_t start = v.size() / 2;
  const std::size_t mid = start + (v.size() - start) / 2;
  return v[mid];
}

struct Dip {
  std::size_t index;
  double depth;
};

std::vector<Dip> local_minima(const std::vector<double>& s, double baseline) {
  std::vector<Dip> dips;
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    if (s[i] < s[i - 1] && s[i] <= s[i + 1]) dips.push_back({i, baseline - s[i]});
  }
  std::sort(dips.begin(), dips.end(), [](const Dip& a, const Dip& b) {
    return a.depth != b.depth ? a.depth > b.depth : a.index < b.index;
  });
  return dips;
}

// Full width at half depth around index i of the smoothed spectrum.
double half_depth_width(const std::vector<double>& f, const std::vector<double>& s, std::size_t i, double baseline) {
  const double half = baseline - 0.5 * (baseline - s[i]);
  std::size_t lo = i, hi = i;
  while (lo > 0 && s[lo] < half) --lo;
  while (hi + 1 < s.size() && s[hi] < half) ++hi;
  return std::max(f[hi] - f[lo], 2.0 * (f[1] - f[0]));
}

OdmrFit run_odmr(const OdmrSpectrum& sp, const OdmrParams& g, bool pin_e, const FitOptions& options) {
  const auto& f = sp.freq_GHz;
  const auto& y = sp.pl;
  // Free parameters: D, E, c-, c+, width, baseline; with E pinned:
  // D, c (shared by both dips), width, baseline.
  ResidualFn fn = [&](const Vec& p, Vec& r, Mat* jac) {
    OdmrParams q;
    if (pin_e) {
      q = {p[0], 0.0, 0.5 * p[1], 0.5 * p[1], p[2], p[3]};
    } else {
      q = {p[0], p[1], p[2], p[3], p[4], p[5]};
    }
    if (!(q.width_GHz > 0.0)) return false;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      r[row] = odmr_model(q, f[i]) - y[i];
      if (jac) {
        const auto d = odmr_gradient(q, f[i]);
        if (pin_e) {
          (*jac)(row, 0) = d[0];
          (*jac)(row, 1) = 0.5 * (d[2] + d[3]);
          (*jac)(row, 2) = d[4];
          (*jac)(row, 3) = d[5];
        } else {
          for (Eigen::Index k = 0; k < 6; ++k) (*jac)(row, k) = d[static_cast<std::size_t>(k)];
        }
      }
    }
    return r.allFinite();
  };
  Vec p0;
  if (pin_e) {
    p0.resize(4);
    p0 << g.D_GHz, g.contrast_minus + g.contrast_plus, g.width_GHz, g.baseline;
  } else {
    p0.resize(6);
    p0 << g.D_GHz, g.E_GHz, g.contrast_minus, g.contrast_plus, g.width_GHz, g.baseline;
  }
  const auto res = levenberg_marquardt(fn, p0, f.size(), options);
  OdmrFit fit;
  const auto& p = res.params;
  if (pin_e) {
    fit.params = {p[0], 0.0, 0.5 * p[1], 0.5 * p[1], p[2], p[3]};
  } else {
    fit.params = {p[0], p[1], p[2], p[3], p[4], p[5]};
    // Canonical labelling: E >= 0, contrast_minus belongs to D - E.
    if (fit.params.E_GHz < 0.0) {
      fit.params.E_GHz = -fit.params.E_GHz;
      std::swap(fit.params.contrast_minus, fit.params.contrast_plus);
    }
  }
  const double n = static_cast<double>(f.size());
  fit.residual_rms = std::sqrt(res.cost / n);
  fit.initial_residual_rms = std::sqrt(res.initial_cost / n);
  fit.iterations = res.iterations;
  fit.single_dip = pin_e;
  return fit;
}

}  // namespace

OdmrParams initial_odmr_guess(const OdmrSpectrum& spectrum) {
  spectrum.validate();
  const auto& f = spectrum.freq_GHz;
  const auto s = smoothed(spectrum.pl);
  const double baseline = upper_median(spectrum.pl);
  if (!(baseline > 0.0)) throw FitError("spectrum baseline is not positive", 0.0);
  const auto dips = local_minima(s, baseline);
  if (dips.empty() || dips.front().depth <= 0.0) throw FitError("spectrum shows no dip below its baseline", 0.0);

  const Dip first = dips.front();
  const double width = half_depth_width(f, s, first.index, baseline);
  // Second dip: the deepest minimum at least half a width away with a
  // depth comparable to the first.
  std::optional<Dip> second;
  for (std::size_t k = 1; k < dips.size(); ++k) {
    if (std::abs(f[dips[k].index] - f[first.index]) > 0.5 * width && dips[k].depth > 0.25 * first.depth) {
      second = dips[k];
      break;
    }
  }
  OdmrParams g;
  g.baseline = baseline;
  g.width_GHz = width;
  if (second) {
    const auto [lo, hi] = std::minmax(first.index, second->index);
    g.D_GHz = 0.5 * (f[lo] + f[hi]);
    g.E_GHz = 0.5 * (f[hi] - f[lo]);
    g.contrast_minus = (baseline - s[lo]) / baseline;
    g.contrast_plus = (baseline - s[hi]) / baseline;
    g.width_GHz = std::min(width, 2.0 * g.E_GHz);
  } else {
    g.D_GHz = f[first.index];
    g.E_GHz = 0.0;
    g.contrast_minus = g.contrast_plus = 0.5 * first.depth / baseline;
  }
  return g;
}

OdmrFit fit_odmr(const OdmrSpectrum& spectrum, const std::optional<OdmrParams>& initial_guess,
                 const FitOptions& options) {
  spectrum.validate();
  if (initial_guess) {
    if (!(initial_guess->width_GHz > 0.0)) throw ValidationError("width_GHz", "initial width must be positive");
    return run_odmr(spectrum, *initial_guess, false, options);
  }
  const OdmrParams g = initial_odmr_guess(spectrum);
  if (g.E_GHz > 0.0) return run_odmr(spectrum, g, false, options);

  // One visible minimum: the dips may still be resolvable when they overlap,
  // so try a few deterministic splittings before settling on a single dip.
  std::optional<OdmrFit> best;
  for (double split : {0.2, 0.35, 0.5, 0.75}) {
    OdmrParams start = g;
    start.E_GHz = split * g.width_GHz;
    start.width_GHz = g.width_GHz * (1.0 - split);
    try {
      auto fit = run_odmr(spectrum, start, false, options);
      if (!best || fit.residual_rms < best->residual_rms) best = fit;
    } catch (const FitError&) {
    }
  }
  const auto single = run_odmr(spectrum, g, true, options);
  if (!best) return single;
  const auto& p = best->params;
  const double cmax = std::max(p.contrast_minus, p.contrast_plus);
  const double cmin = std::min(p.contrast_minus, p.contrast_plus);
  const bool resolved = p.E_GHz > 0.1 * p.width_GHz && cmin > 0.05 * cmax &&
                        best->residual_rms < single.residual_rms * (1.0 - 1e-6);
  return resolved ? *best : single;
}

}  // namespace rdc
