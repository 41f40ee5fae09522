#pragma once

#include <complex>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rdc {

using Complex = std::complex<double>;

/// One row of an nk table.
struct NkRow {
  double wavelength_nm;
  double n;
  double k;
};

/// Wavelength-dependent complex refractive index n + ik of a passive medium.
///
/// Either a constant index or a table interpolated linearly in wavelength
/// (n and k separately). Tables never extrapolate. Instances are immutable and
/// cheap to copy; the table storage is shared.
class Material {
 public:
  static Material constant(std::string name, double n, double k = 0.0);
  /// Rows must be strictly increasing in wavelength, at least two, with n, k >= 0.
  static Material tabulated(std::string name, std::vector<NkRow> rows);

  const std::string& name() const noexcept { return data_->name; }
  bool is_tabulated() const noexcept { return !data_->rows.empty(); }
  std::span<const NkRow> rows() const noexcept { return data_->rows; }

  /// Covered wavelength range; unbounded for constant materials.
  double min_wavelength_nm() const noexcept;
  double max_wavelength_nm() const noexcept;

  /// Throws RangeError for a tabulated material queried outside its rows.
  Complex index(double wavelength_nm) const;

  /// Same material with `dk` added to the extinction coefficient everywhere.
  Material with_added_extinction(double dk) const;

 private:
  struct Data {
    std::string name;
    Complex constant_index;
    std::vector<NkRow> rows;
  };
  explicit Material(std::shared_ptr<const Data> data) : data_(std::move(data)) {}
  std::shared_ptr<const Data> data_;
};

/// Free-function spelling of Material::index.
inline Complex eval_index(const Material& material, double wavelength_nm) {
  return material.index(wavelength_nm);
}

/// Parses the nk text format: `#` comment lines, data lines `wavelength_nm,n,k`.
/// Throws ParseError naming the offending line.
Material load_nk_table(std::istream& in, std::string name);
/// Reads an nk file; the material is named after the file stem.
Material load_nk_file(const std::filesystem::path& path);
/// Writes the nk text format (full round-trip precision).
void write_nk_table(std::ostream& out, const Material& material);

namespace materials {

Material vacuum();
Material air();
Material sio2();   ///< constant 1.46
Material al2o3();  ///< constant 1.76
Material hbn();    ///< constant 2.0
Material si();     ///< bundled table, 450-1100 nm
Material al();     ///< bundled table, 300-1100 nm
/// Lossless plasma-like mirror n = i * 1e6; reflects with |r| = 1 at any angle.
Material perfect_mirror();

/// Lookup by name: vacuum, air, sio2, al2o3, hbn, si, al, perfect_mirror.
std::optional<Material> builtin(std::string_view name);
std::vector<std::string> builtin_names();

}  // namespace materials

}  // namespace rdc
