#pragma once

// Run configuration: an INI-like text format.
//
//   # comment                       (also after values: "key = v  # note")
//   [materials]
//   name = constant <n> [k]
//   name = nk <path>                (relative to the config file)
//   name = builtin <name>
//   [stack]                         (and [reference], same keys)
//   below = <material>
//   layer = <name> <material> <thickness_nm>   (repeat, bottom to top)
//   above = <material>
//   host  = <layer name>
//   [emitter]
//   depth_nm = <x> | depth_fraction = <x>   (from the top of the host layer)
//   orientation = in_plane_average | out_of_plane | isotropic_average
//   eta0 = <x>
//   spectrum = gaussian <center> <fwhm> | flat <min> <max>
//   band_nm = <min> <max>
//   samples = <n>
//   [collection]  na = <x>
//   [excitation]  wavelength_nm = <x>
//   [numerics]    rel_tol, abs_tol, u_max, tail_cutoff, max_intervals
//
// Built-in materials (si, al, sio2, al2o3, hbn, air, vacuum, perfect_mirror)
// are always available; [materials] entries may shadow them.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rdc/dipole.hpp"
#include "rdc/enhance.hpp"

namespace rdc {

struct LayerSpec {
  std::string name;
  std::string material;
  double thickness_nm = 0.0;  ///< zero-thickness layers are dropped when built
  std::size_t line = 0;
};

struct StackSpec {
  std::string below;
  std::string above;
  std::vector<LayerSpec> layers;  ///< bottom to top
  std::string host;
  std::size_t line = 0;  ///< section header line
};

struct EmitterConfig {
  std::optional<double> depth_nm;
  std::optional<double> depth_fraction;
  Orientation orientation = Orientation::in_plane_average;
  double eta0 = 0.05;
  SpectrumWeight spectrum;
  std::size_t samples = 31;
};

struct RunConfig {
  std::string source;  ///< file name, for messages
  std::map<std::string, Material> materials;
  StackSpec stack;
  std::optional<StackSpec> reference;
  EmitterConfig emitter;
  double numerical_aperture = 0.9;
  double pump_wavelength_nm = 532.0;
  QuadratureSpec quadrature;

  const Material& material(const std::string& name) const;
};

/// Parses and validates. base_dir resolves relative nk paths.
RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir, std::string source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

}  // namespace rdc
