#pragma once

// Plane-wave optics of planar multilayers.
//
// Conventions used everywhere in the library:
//  * time dependence exp(-i w t); a wave travelling toward +z is exp(+i kz z),
//  * axial wavenumbers take the branch Im(kz) >= 0 (Re(kz) >= 0 when Im(kz) = 0),
//  * s-polarised amplitudes are tangential E, p-polarised amplitudes are
//    tangential H, so every interface transmission satisfies t = 1 + r,
//  * u is the in-plane wavevector normalised by n_ref * k0.

#include <complex>
#include <span>
#include <vector>

#include "rdc/materials.hpp"

namespace rdc {

enum class Polarization { s, p };

/// A finite layer. Half-spaces are not layers.
struct Layer {
  Material material;
  double thickness_nm;
};

/// Layers between two semi-infinite media, listed bottom to top.
class Stack {
 public:
  Stack(Material below, std::vector<Layer> layers, Material above);

  const Material& below() const noexcept { return below_; }
  const Material& above() const noexcept { return above_; }
  std::span<const Layer> layers() const noexcept { return layers_; }
  std::size_t size() const noexcept { return layers_.size(); }
  double total_thickness_nm() const noexcept;

  /// Upside-down copy: half-spaces swapped, layer order reversed.
  Stack flipped() const;

 private:
  Material below_;
  std::vector<Layer> layers_;
  Material above_;
};

/// kz = k0 * sqrt(index^2 - (n_ref u)^2) on the Im(kz) >= 0 branch.
Complex axial_wavenumber(Complex index, double u, double k0, double n_ref);
/// Same with a complex in-plane wavevector q (units of k0) and k0 = 1.
Complex axial_wavenumber(Complex index, Complex q);

struct InterfaceCoefficients {
  Complex r;
  Complex t;
};

/// Single-interface Fresnel coefficients for incidence from n1 onto n2.
///   s: r = (kz1 - kz2) / (kz1 + kz2)
///   p: r = (n2^2 kz1 - n1^2 kz2) / (n2^2 kz1 + n1^2 kz2)   (tangential-H ratio)
/// and t = 1 + r in both cases.
InterfaceCoefficients fresnel(Polarization pol, Complex n1, Complex n2, double u, double n_ref);
InterfaceCoefficients fresnel(Polarization pol, Complex n1, Complex n2, Complex q);

struct PlaneWaveResult {
  Complex r;
  Complex t;
  double R;
  double T;
  double A;
};

/// A medium in a precomputed optical path. Thickness is ignored for the
/// first (incidence) and last (exit) entries.
struct Medium {
  Complex index;
  double thickness_nm;
};

/// Interface (Airy) recursion through media.front() -> ... -> media.back().
/// Amplitudes are referenced to the first and last interfaces. Every
/// propagation factor is exp(+i kz d) with Im(kz) >= 0, so strongly evanescent
/// layers cannot overflow.
InterfaceCoefficients multilayer_rt(std::span<const Medium> media, Polarization pol, double k0, Complex q);

/// Media for incidence from above: above, layers top-to-bottom, below.
std::vector<Medium> media_from_above(const Stack& stack, double wavelength_nm);

/// Reflection/transmission for a plane wave incident from `above`.
/// n_ref defaults to Re(n_above), so u = sin(angle of incidence).
PlaneWaveResult stack_rt(const Stack& stack, Polarization pol, double wavelength_nm, double u);
PlaneWaveResult stack_rt(const Stack& stack, Polarization pol, double wavelength_nm, double u, double n_ref);

struct FieldSample {
  Complex tangential_e;  ///< E_y (s) or E_x (p)
  Complex tangential_h;  ///< H_x (s) or H_y (p), common scale across media
  double intensity;      ///< |E|^2 relative to the incident |E|^2
};

/// Field of a unit-amplitude plane wave incident from above, at depth z_nm
/// measured from the top interface (positive downward; z < 0 is in `above`).
FieldSample field_profile(const Stack& stack, Polarization pol, double wavelength_nm, double u, double z_nm);

}  // namespace rdc
