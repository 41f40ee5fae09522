#include "rdc/dipole.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "rdc/errors.hpp"
#include "rdc/quadrature.hpp"

namespace rdc {

const char* to_string(Orientation o) {
  switch (o) {
    case Orientation::in_plane_average: return "in_plane_average";
    case Orientation::out_of_plane: return "out_of_plane";
    case Orientation::isotropic_average: return "isotropic_average";
  }
  return "?";
}

Orientation parse_orientation(std::string_view text) {
  if (text == "in_plane_average") return Orientation::in_plane_average;
  if (text == "out_of_plane") return Orientation::out_of_plane;
  if (text == "isotropic_average") return Orientation::isotropic_average;
  throw ValidationError("orientation", "expected in_plane_average, out_of_plane or isotropic_average, got '" +
                                           std::string(text) + "'");
}

double emitter_depth_from_top(const Stack& stack, const EmitterSpec& emitter) {
  double z = emitter.depth_in_layer_nm;
  const auto layers = stack.layers();
  for (std::size_t i = emitter.host_layer + 1; i < layers.size(); ++i) z += layers[i].thickness_nm;
  return z;
}

namespace {

constexpr Complex kI{0.0, 1.0};
constexpr double kLossyHost = 1e-6;

struct PolarizationPair {
  Complex s;
  Complex p;
};

// Per-orientation quantities: [parallel, perpendicular].
using OrientationPair = std::array<double, 2>;

double combine(Orientation o, double parallel, double perpendicular) {
  switch (o) {
    case Orientation::in_plane_average: return parallel;
    case Orientation::out_of_plane: return perpendicular;
    case Orientation::isotropic_average: return (2.0 * parallel + perpendicular) / 3.0;
  }
  return parallel;
}

// Everything about the emitter's surroundings at one wavelength. Wavenumbers
// inside are normalised to the host: w = kz / k_host, u = q / n_host.
class Environment {
 public:
  Environment(const Stack& stack, const EmitterSpec& emitter, double wavelength_nm) {
    const auto layers = stack.layers();
    if (emitter.host_layer >= layers.size()) {
      throw ValidationError("emitter.host_layer", "index " + std::to_string(emitter.host_layer) +
                                                      " is outside a stack of " + std::to_string(layers.size()) +
                                                      " layers");
    }
    const auto& host = layers[emitter.host_layer];
    const double depth = emitter.depth_in_layer_nm;
    if (!(depth >= 0.0 && depth <= host.thickness_nm)) {
      throw ValidationError("emitter.depth_in_layer_nm", "must lie within [0, " +
                                                             std::to_string(host.thickness_nm) + "] nm");
    }
    const Complex nh = host.material.index(wavelength_nm);
    if (nh.imag() >= kLossyHost) {
      std::ostringstream msg;
      msg << "emitter host '" << host.material.name() << "' is absorbing (k = " << nh.imag() << " at "
          << wavelength_nm << " nm); only lossless hosts are supported";
      throw UnsupportedConfiguration(msg.str());
    }
    n_host_ = nh.real();
    k0_ = 2.0 * std::numbers::pi / wavelength_nm;
    d_plus_ = depth;
    d_minus_ = host.thickness_nm - depth;

    up_.push_back({n_host_, 0.0});
    for (std::size_t i = emitter.host_layer + 1; i < layers.size(); ++i) {
      up_.push_back({layers[i].material.index(wavelength_nm), layers[i].thickness_nm});
    }
    up_.push_back({stack.above().index(wavelength_nm), 0.0});

    down_.push_back({n_host_, 0.0});
    for (std::size_t i = emitter.host_layer; i-- > 0;) {
      down_.push_back({layers[i].material.index(wavelength_nm), layers[i].thickness_nm});
    }
    down_.push_back({stack.below().index(wavelength_nm), 0.0});

    double highest = 1.0;
    for (const auto* path : {&up_, &down_}) {
      for (const auto& m : *path) highest = std::max(highest, m.index.real() / n_host_);
    }
    contour_end_ = 1.2 * highest + 0.3;
    contour_depth_ = std::min(0.5, 0.25 * contour_end_);

    n_above_ = up_.back().index;
    n_below_ = down_.back().index;
  }

  double n_host() const { return n_host_; }
  Complex n_above() const { return n_above_; }
  Complex n_below() const { return n_below_; }
  double contour_end() const { return contour_end_; }
  double contour_depth() const { return contour_depth_; }

  // Evanescent waves reach the nearest interface attenuated by
  // exp(-2 u k_host d_min); this is the u-distance of one e-fold.
  double evanescent_scale() const {
    const double d = std::min(d_plus_, d_minus_);
    return d > 0.0 ? 1.0 / (2.0 * n_host_ * k0_ * d) : std::numeric_limits<double>::infinity();
  }

  static Complex w_of(Complex u) { return axial_wavenumber(Complex(1.0, 0.0), u); }

  // Round-trip phase exp(2 i kz_host d).
  Complex round_trip(Complex w, double d) const { return std::exp(2.0 * kI * w * n_host_ * k0_ * d); }
  Complex one_way(Complex w, double d) const { return std::exp(kI * w * n_host_ * k0_ * d); }

  InterfaceCoefficients upper(Polarization pol, Complex u) const {
    return multilayer_rt(up_, pol, k0_, u * n_host_);
  }
  InterfaceCoefficients lower(Polarization pol, Complex u) const {
    return multilayer_rt(down_, pol, k0_, u * n_host_);
  }

  HalfStackReflection reflections(Polarization pol, Complex u) const {
    const Complex w = w_of(u);
    return {upper(pol, u).r * round_trip(w, d_plus_), lower(pol, u).r * round_trip(w, d_minus_)};
  }

  // Complex rate integrands [parallel, perpendicular] at complex u.
  std::array<Complex, 2> rate_integrand(Complex u) const {
    const Complex w = w_of(u);
    const auto s = reflections(Polarization::s, u);
    const auto p = reflections(Polarization::p, u);
    const Complex ds = 1.0 - s.r_up * s.r_down;
    const Complex dp = 1.0 - p.r_up * p.r_down;
    const Complex parallel =
        0.75 * u / w * ((1.0 + s.r_up) * (1.0 + s.r_down) / ds + w * w * (1.0 - p.r_up) * (1.0 - p.r_down) / dp);
    const Complex perpendicular = 1.5 * u * u * u / w * (1.0 + p.r_up) * (1.0 + p.r_down) / dp;
    return {parallel, perpendicular};
  }

  // Flux leaving through a half-space of index n, per |amplitude|^2.
  double flux_factor(Polarization pol, Complex n, double u) const {
    const Complex nr = n / n_host_;
    const Complex w = axial_wavenumber(nr, Complex(u, 0.0));
    return pol == Polarization::s ? w.real() : (w / (nr * nr)).real();
  }

  // Power per du radiated into the upper and lower half-spaces, divided by u:
  // {up_parallel, up_perpendicular, down_parallel, down_perpendicular}.
  std::array<double, 4> flux_over_u(double u) const {
    const Complex uc(u, 0.0);
    const Complex w = w_of(uc);
    const double w2 = std::norm(w);

    std::array<double, 4> out{};
    for (Polarization pol : {Polarization::s, Polarization::p}) {
      const auto up = upper(pol, uc);
      const auto down = lower(pol, uc);
      const Complex r_up = up.r * round_trip(w, d_plus_);
      const Complex r_down = down.r * round_trip(w, d_minus_);
      const Complex denom = 1.0 - r_up * r_down;
      const double to_top = std::norm(one_way(w, d_plus_) * up.t) * flux_factor(pol, n_above_, u);
      const double to_bottom = std::norm(one_way(w, d_minus_) * down.t) * flux_factor(pol, n_below_, u);
      if (pol == Polarization::s) {
        // Horizontal dipole, s waves: amplitude^2 = 3/8 u / |w|^2, even in z.
        const double src = 0.375 / w2;
        out[0] += src * std::norm((1.0 + r_down) / denom) * to_top;
        out[2] += src * std::norm((1.0 + r_up) / denom) * to_bottom;
      } else {
        // Horizontal dipole, p waves: 3/8 u, odd in z.
        const double src_par = 0.375;
        out[0] += src_par * std::norm((1.0 - r_down) / denom) * to_top;
        out[2] += src_par * std::norm((1.0 - r_up) / denom) * to_bottom;
        // Vertical dipole, p waves: 3/4 u^3 / |w|^2, even in z.
        const double src_perp = 0.75 * u * u / w2;
        out[1] += src_perp * std::norm((1.0 + r_down) / denom) * to_top;
        out[3] += src_perp * std::norm((1.0 + r_up) / denom) * to_bottom;
      }
    }
    return out;
  }

  std::array<double, 4> flux(double u) const {
    auto f = flux_over_u(u);
    for (double& v : f) v *= u;
    return f;
  }

 private:
  double n_host_ = 1.0;
  double k0_ = 1.0;
  double d_plus_ = 0.0;
  double d_minus_ = 0.0;
  double contour_end_ = 1.5;
  double contour_depth_ = 0.375;
  Complex n_above_{1.0, 0.0};
  Complex n_below_{1.0, 0.0};
  std::vector<Medium> up_;
  std::vector<Medium> down_;
};

template <std::size_t N>
void accumulate(QuadValues<N>& total, double& error, const QuadratureResult<N>& part, const char* what,
                const QuadratureSpec& quad) {
  for (std::size_t c = 0; c < N; ++c) total[c] += part.value[c];
  error += part.error;
  if (!part.converged) {
    double scale = 0.0;
    for (double v : part.value) scale = std::max(scale, std::abs(v));
    if (part.error > quad.fail_rel * std::max(scale, 1.0)) {
      std::ostringstream msg;
      msg << what << " quadrature did not converge: error estimate " << part.error << " after "
          << part.intervals << " intervals";
      throw NumericalAccuracyError(msg.str(), part.error);
    }
  }
}

QuadratureTolerance tolerance_of(const QuadratureSpec& q) { return {q.rel_tol, q.abs_tol, q.max_intervals}; }

// Real-axis tail from `start`, in unit panels, until a panel is negligible.
template <std::size_t N, class F>
void integrate_tail(F&& f, const Environment& env, double start, QuadValues<N>& total, double& error,
                    const char* what, const QuadratureSpec& quad) {
  // u_max bounds the tail unless the emitter sits so close to an interface
  // that the near field extends further; then 40 e-folds are covered.
  constexpr double kFolds = 40.0;
  constexpr double kHardCap = 1e7;
  const double scale = env.evanescent_scale();
  const double u_max = std::max({quad.u_max, start, std::min(kFolds * scale, kHardCap)});
  const double step = std::max(1.0, std::min(scale, kHardCap / kFolds));
  double lo = start;
  while (lo < u_max) {
    const double hi = std::min(lo + step, u_max);
    auto part = integrate_adaptive<N>(f, lo, hi, 2, tolerance_of(quad));
    accumulate(total, error, part, what, quad);
    double part_mag = 0.0, total_mag = 0.0;
    for (std::size_t c = 0; c < N; ++c) {
      part_mag = std::max(part_mag, std::abs(part.value[c]));
      total_mag = std::max(total_mag, std::abs(total[c]));
    }
    const auto edge = f(hi);
    double edge_mag = 0.0;
    for (double v : edge) edge_mag = std::max(edge_mag, std::abs(v));
    lo = hi;
    if (part_mag <= quad.tail_cutoff * total_mag && edge_mag <= quad.tail_cutoff * total_mag) break;
  }
}

struct RateIntegrals {
  double parallel;
  double perpendicular;
  double error;
};

RateIntegrals rate_integrals(const Environment& env, const QuadratureSpec& quad) {
  const double a = env.contour_end();
  const double b = env.contour_depth();
  auto on_contour = [&env, a, b](double t) {
    const Complex u(0.5 * a * (1.0 - std::cos(t)), -b * std::sin(t));
    const Complex du(0.5 * a * std::sin(t), -b * std::cos(t));
    const auto f = env.rate_integrand(u);
    return QuadValues<2>{(f[0] * du).real(), (f[1] * du).real()};
  };
  auto on_axis = [&env](double u) {
    const auto f = env.rate_integrand(Complex(u, 0.0));
    return QuadValues<2>{f[0].real(), f[1].real()};
  };
  QuadValues<2> total{};
  double error = 0.0;
  accumulate(total, error,
             integrate_adaptive<2>(on_contour, 0.0, std::numbers::pi, quad.initial_panels, tolerance_of(quad)),
             "decay-rate contour", quad);
  integrate_tail<2>(on_axis, env, a, total, error, "decay-rate tail", quad);
  return {total[0], total[1], error};
}

// Breakpoints in (1, end) where a half-space light line sits.
std::vector<double> evanescent_breaks(const Environment& env, double end, double delta) {
  std::vector<double> pts{1.0, std::min(1.0 + delta, end)};
  for (Complex n : {env.n_above(), env.n_below()}) {
    const double line = n.real() / env.n_host();
    if (line > pts.back() && line < end) pts.push_back(line);
  }
  std::sort(pts.begin(), pts.end());
  pts.push_back(end);
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

// Integrates the half-space fluxes over u in [0, u_hi]; u_hi = infinity runs
// through the evanescent range and tail.
QuadValues<4> flux_integrals(const Environment& env, double u_hi, const QuadratureSpec& quad, double& error) {
  QuadValues<4> total{};
  // Propagating range in the host through u = sin(theta).
  const double theta_hi = std::asin(std::min(u_hi, 1.0));
  auto in_host = [&env](double theta) {
    auto f = env.flux(std::sin(theta));
    const double c = std::cos(theta);
    for (double& v : f) v *= c;
    return f;
  };
  accumulate(total, error, integrate_adaptive<4>(in_host, 0.0, theta_hi, quad.initial_panels, tolerance_of(quad)),
             "radiated-flux", quad);
  if (u_hi <= 1.0) return total;

  auto on_axis = [&env](double u) { return env.flux(u); };
  const double end = std::isfinite(u_hi) ? u_hi : env.contour_end();
  const auto pts = evanescent_breaks(env, end, quad.delta);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    accumulate(total, error, integrate_adaptive<4>(on_axis, pts[i], pts[i + 1], 2, tolerance_of(quad)),
               "radiated-flux", quad);
  }
  // Nothing leaves through a lossless half-space beyond its light line.
  const bool lossy_exit = env.n_above().imag() > 0.0 || env.n_below().imag() > 0.0;
  if (!std::isfinite(u_hi) && lossy_exit) integrate_tail<4>(on_axis, env, end, total, error, "radiated-flux tail", quad);
  return total;
}

void check_numerical_aperture(const Environment& env, double na) {
  const double limit = env.n_above().real();
  if (!(na >= 0.0 && na <= limit)) {
    std::ostringstream msg;
    msg << "numerical aperture must lie in [0, " << limit << "] (index of the upper half-space), got " << na;
    throw ValidationError("collection.na", msg.str());
  }
}

EmissionResult evaluate(const Environment& env, const EmitterSpec& emitter, const QuadratureSpec& quad,
                        double na) {
  const auto rate = rate_integrals(env, quad);
  double error = rate.error;
  const auto fluxes = flux_integrals(env, std::numeric_limits<double>::infinity(), quad, error);

  EmissionResult r;
  r.purcell_parallel = rate.parallel;
  r.purcell_perpendicular = rate.perpendicular;
  r.purcell_F = combine(emitter.orientation, rate.parallel, rate.perpendicular);
  if (!(r.purcell_F > 0.0) || !std::isfinite(r.purcell_F)) {
    throw NumericalAccuracyError("decay-rate integral produced a non-positive value", rate.error);
  }
  const double up = combine(emitter.orientation, fluxes[0], fluxes[1]);
  const double down = combine(emitter.orientation, fluxes[2], fluxes[3]);
  r.frac_up = std::clamp(up / r.purcell_F, 0.0, 1.0);
  r.frac_down = std::clamp(down / r.purcell_F, 0.0, 1.0);
  r.frac_lost = 1.0 - r.frac_up - r.frac_down;
  // Lossless, mode-free stacks give lost = 0 up to quadrature noise.
  if (r.frac_lost < 0.0 && r.frac_lost > -1e-7) r.frac_lost = 0.0;

  if (na > 0.0) {
    const double u_na = na / env.n_host();
    double na_error = 0.0;
    const auto cone = flux_integrals(env, u_na, quad, na_error);
    error += na_error;
    r.collection_eta = std::min(combine(emitter.orientation, cone[0], cone[1]) / r.purcell_F, r.frac_up);
  }
  r.numerical_aperture = na;
  r.error_estimate = error;
  return r;
}

}  // namespace

HalfStackReflection half_stack_reflection(const Stack& stack, const EmitterSpec& emitter, Polarization pol,
                                          double wavelength_nm, double u) {
  const Environment env(stack, emitter, wavelength_nm);
  return env.reflections(pol, Complex(u, 0.0));
}

EmissionResult purcell(const Stack& stack, const EmitterSpec& emitter, double wavelength_nm,
                       const QuadratureSpec& quad) {
  const Environment env(stack, emitter, wavelength_nm);
  return evaluate(env, emitter, quad, 0.0);
}

EmissionResult emission(const Stack& stack, const EmitterSpec& emitter, double wavelength_nm, double na,
                        const QuadratureSpec& quad) {
  const Environment env(stack, emitter, wavelength_nm);
  check_numerical_aperture(env, na);
  return evaluate(env, emitter, quad, na);
}

FarFieldPattern far_field(const Stack& stack, const EmitterSpec& emitter, double wavelength_nm,
                          std::size_t n_theta, const QuadratureSpec& quad) {
  const Environment env(stack, emitter, wavelength_nm);
  if (env.n_above().imag() > 0.0) {
    throw UnsupportedConfiguration("far field requires a lossless upper half-space");
  }
  if (n_theta < 4) throw ValidationError("n_theta", "angular grid needs at least 4 points");
  const auto r = evaluate(env, emitter, quad, 0.0);

  FarFieldPattern pat;
  pat.n_above = env.n_above().real();
  pat.purcell_F = r.purcell_F;
  pat.frac_up = r.frac_up;
  pat.theta_rad.resize(n_theta);
  pat.power_per_sr.resize(n_theta);
  const double ratio = pat.n_above / env.n_host();
  const double h = 0.5 * std::numbers::pi / static_cast<double>(n_theta - 1);
  for (std::size_t i = 0; i < n_theta; ++i) {
    const double theta = h * static_cast<double>(i);
    // Grazing exit into a medium denser than the host is a 0/0 limit; step off it.
    const double theta_eval = i + 1 == n_theta ? theta - 1e-4 : theta;
    const double u = ratio * std::sin(theta_eval);
    const auto f = env.flux_over_u(u);
    const double g = combine(emitter.orientation, f[0], f[1]);
    // dP/dOmega = (dP/du) (du/dtheta) / (2 pi sin theta), with u = ratio sin(theta).
    pat.theta_rad[i] = theta;
    pat.power_per_sr[i] = std::max(0.0, g * ratio * ratio * std::cos(theta_eval) / (2.0 * std::numbers::pi));
  }
  return pat;
}

double collection_efficiency(const FarFieldPattern& pattern, double na, double purcell_F) {
  if (!(na >= 0.0 && na <= pattern.n_above)) {
    std::ostringstream msg;
    msg << "numerical aperture must lie in [0, " << pattern.n_above << "], got " << na;
    throw ValidationError("na", msg.str());
  }
  if (!(purcell_F > 0.0)) throw ValidationError("purcell_F", "must be positive");
  const auto& th = pattern.theta_rad;
  const auto& p = pattern.power_per_sr;
  const std::size_t n = th.size();
  if (n < 4 || p.size() != n) throw ValidationError("pattern", "angular grid needs at least 4 points");
  const double theta_na = std::asin(std::min(1.0, na / pattern.n_above));
  const double h = th[1] - th[0];

  auto integrand = [&](std::size_t i) { return 2.0 * std::numbers::pi * p[i] * std::sin(th[i]); };
  // Cubic Lagrange interpolation through four neighbouring grid points.
  auto interpolate = [&](double x) {
    std::size_t i = static_cast<std::size_t>(std::floor(x / h));
    i = std::min(i, n - 2);
    const std::size_t lo = i == 0 ? 0 : std::min(i - 1, n - 4);
    double sum = 0.0;
    for (std::size_t a = lo; a < lo + 4; ++a) {
      double basis = 1.0;
      for (std::size_t b = lo; b < lo + 4; ++b) {
        if (a != b) basis *= (x - th[b]) / (th[a] - th[b]);
      }
      sum += basis * integrand(a);
    }
    return sum;
  };
  static constexpr std::array<double, 3> kNodes = {-0.774596669241483377035853079956, 0.0,
                                                   0.774596669241483377035853079956};
  static constexpr std::array<double, 3> kWeights = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < n && th[i] < theta_na; ++i) {
    const double lo = th[i];
    const double hi = std::min(th[i + 1], theta_na);
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    for (std::size_t k = 0; k < 3; ++k) total += kWeights[k] * half * interpolate(mid + half * kNodes[k]);
  }
  return total / purcell_F;
}

double collection_efficiency(const FarFieldPattern& pattern, double na) {
  return collection_efficiency(pattern, na, pattern.purcell_F);
}

}  // namespace rdc
