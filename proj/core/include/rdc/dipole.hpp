#pragma once

// Emission of a point dipole inside a planar stack.
//
// Rates are normalised to the same dipole in the unbounded host medium and
// obtained from plane-wave (Sommerfeld) expansions in the in-plane wavenumber
// u = k_par / k_host. With R+ / R- the reflection of the sub-stacks above and
// below the emitter, referenced to the emitter plane,
//
//   F_perp = 3/2 Re Int u^3/w (1+R+p)(1+R-p) / (1 - R+p R-p) du
//   F_par  = 3/4 Re Int u/w [ (1+R+s)(1+R-s) / (1 - R+s R-s)
//                            + w^2 (1-R+p)(1-R-p) / (1 - R+p R-p) ] du
//
// with w = sqrt(1 - u^2), Im(w) >= 0. The integrands are analytic in the
// fourth quadrant of the complex u plane (guided-mode poles and branch points
// of passive stacks sit on or above the real axis), so the rate integral runs
// along a half-ellipse below the real axis and rejoins it beyond every light
// line. Radiated fluxes into the half-spaces are real-axis integrals of
// |amplitude|^2 and are integrated adaptively.

#include <cstddef>
#include <string_view>
#include <vector>

#include "rdc/tmm.hpp"

namespace rdc {

enum class Orientation { in_plane_average, out_of_plane, isotropic_average };

const char* to_string(Orientation o);
/// Accepts the enumerator spellings; throws ValidationError otherwise.
Orientation parse_orientation(std::string_view text);

struct EmitterSpec {
  std::size_t host_layer = 0;      ///< index into Stack::layers()
  double depth_in_layer_nm = 0.0;  ///< measured down from the top of the host layer
  Orientation orientation = Orientation::in_plane_average;
  double quantum_efficiency_eta0 = 0.05;
};

struct QuadratureSpec {
  double rel_tol = 1e-10;
  double abs_tol = 1e-13;
  std::size_t initial_panels = 8;
  std::size_t max_intervals = 4000;
  /// The evanescent tail stops once a panel adds less than this fraction.
  double tail_cutoff = 1e-12;
  /// Tail cap. Raised automatically to 40 e-folds of exp(-2 u k_host d) for
  /// an emitter within d of an interface.
  double u_max = 10.0;
  /// Half-width of the panel isolating the host branch point u = 1 in
  /// real-axis flux integrals.
  double delta = 1e-3;
  /// Achieved relative error above this raises NumericalAccuracyError.
  double fail_rel = 1e-6;
};

struct HalfStackReflection {
  Complex r_up;
  Complex r_down;
};

struct EmissionResult {
  double purcell_F = 1.0;       ///< total decay rate / rate in the bulk host
  double frac_up = 0.5;         ///< power into the upper half-space / total
  double frac_down = 0.5;       ///< power into the lower half-space / total
  double frac_lost = 0.0;       ///< absorbed in layers or trapped in guided modes
  double collection_eta = 0.0;  ///< power inside the NA cone / total
  double numerical_aperture = 0.0;
  double purcell_parallel = 1.0;
  double purcell_perpendicular = 1.0;
  double error_estimate = 0.0;
};

/// Angular power density in the upper half-space, per steradian, normalised
/// so that its hemisphere integral equals frac_up * purcell_F. Every
/// orientation model is azimuthally symmetric, so p depends on theta only.
struct FarFieldPattern {
  std::vector<double> theta_rad;  ///< uniform grid on [0, pi/2]
  std::vector<double> power_per_sr;
  double n_above = 1.0;
  double purcell_F = 1.0;
  double frac_up = 0.5;
};

/// Reflection of the sub-stacks above and below the emitter including the
/// round-trip phase exp(2i kz_host d+-) to the emitter plane. u is normalised
/// to the host index. Throws UnsupportedConfiguration for a lossy host.
HalfStackReflection half_stack_reflection(const Stack& stack, const EmitterSpec& emitter, Polarization pol,
                                          double wavelength_nm, double u);

/// Decay-rate enhancement and power routing (collection_eta left at 0).
EmissionResult purcell(const Stack& stack, const EmitterSpec& emitter, double wavelength_nm,
                       const QuadratureSpec& quad = {});

/// purcell() plus the fraction of all emitted power inside the numerical
/// aperture `na` of an objective in the upper half-space.
EmissionResult emission(const Stack& stack, const EmitterSpec& emitter, double wavelength_nm, double na,
                        const QuadratureSpec& quad = {});

FarFieldPattern far_field(const Stack& stack, const EmitterSpec& emitter, double wavelength_nm,
                          std::size_t n_theta = 1025, const QuadratureSpec& quad = {});

/// Fraction of all emitted power inside theta < asin(na / n_above).
double collection_efficiency(const FarFieldPattern& pattern, double na);
double collection_efficiency(const FarFieldPattern& pattern, double na, double purcell_F);

/// Emitter position measured from the top interface, positive downward.
double emitter_depth_from_top(const Stack& stack, const EmitterSpec& emitter);

}  // namespace rdc
