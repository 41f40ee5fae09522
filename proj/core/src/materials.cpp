#include "rdc/materials.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "rdc/errors.hpp"

namespace rdc {

namespace detail {
extern const std::string_view kAluminiumTable;
extern const std::string_view kSiliconTable;
}  // namespace detail

Material Material::constant(std::string name, double n, double k) {
  if (!(n >= 0.0) || !(k >= 0.0) || !std::isfinite(n) || !std::isfinite(k)) {
    throw ValidationError(name, "constant index requires finite n >= 0 and k >= 0");
  }
  auto data = std::make_shared<Data>();
  data->name = std::move(name);
  data->constant_index = Complex(n, k);
  return Material(std::move(data));
}

Material Material::tabulated(std::string name, std::vector<NkRow> rows) {
  if (rows.size() < 2) throw ValidationError(name, "nk table needs at least two rows");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (!std::isfinite(r.wavelength_nm) || r.wavelength_nm <= 0.0) {
      throw ValidationError(name, "row " + std::to_string(i + 1) + ": wavelength must be > 0");
    }
    if (!(r.n >= 0.0) || !(r.k >= 0.0) || !std::isfinite(r.n) || !std::isfinite(r.k)) {
      throw ValidationError(name, "row " + std::to_string(i + 1) + ": n and k must be finite and >= 0");
    }
    if (i > 0 && !(r.wavelength_nm > rows[i - 1].wavelength_nm)) {
      throw ValidationError(name, "row " + std::to_string(i + 1) + ": wavelengths must strictly increase");
    }
  }
  auto data = std::make_shared<Data>();
  data->name = std::move(name);
  data->rows = std::move(rows);
  return Material(std::move(data));
}

double Material::min_wavelength_nm() const noexcept {
  return is_tabulated() ? data_->rows.front().wavelength_nm : 0.0;
}

double Material::max_wavelength_nm() const noexcept {
  return is_tabulated() ? data_->rows.back().wavelength_nm : std::numeric_limits<double>::infinity();
}

Complex Material::index(double wavelength_nm) const {
  if (!is_tabulated()) return data_->constant_index;
  const auto& rows = data_->rows;
  if (!(wavelength_nm >= rows.front().wavelength_nm && wavelength_nm <= rows.back().wavelength_nm)) {
    std::ostringstream msg;
    msg << "material '" << data_->name << "' is tabulated on [" << rows.front().wavelength_nm << ", "
        << rows.back().wavelength_nm << "] nm; queried at " << wavelength_nm << " nm";
    throw RangeError(msg.str());
  }
  auto hi = std::lower_bound(rows.begin(), rows.end(), wavelength_nm,
                             [](const NkRow& r, double w) { return r.wavelength_nm < w; });
  if (hi->wavelength_nm == wavelength_nm) return {hi->n, hi->k};
  auto lo = hi - 1;
  const double s = (wavelength_nm - lo->wavelength_nm) / (hi->wavelength_nm - lo->wavelength_nm);
  return {lo->n + s * (hi->n - lo->n), lo->k + s * (hi->k - lo->k)};
}

Material Material::with_added_extinction(double dk) const {
  if (!is_tabulated()) {
    return constant(data_->name, data_->constant_index.real(), data_->constant_index.imag() + dk);
  }
  auto rows = data_->rows;
  for (auto& r : rows) r.k += dk;
  return tabulated(data_->name, std::move(rows));
}

namespace {

std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

}  // namespace

Material load_nk_table(std::istream& in, std::string name) {
  std::vector<NkRow> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto s = trim(line);
    if (lineno == 1 && s.starts_with("\xEF\xBB\xBF")) s = trim(s.substr(3));
    if (s.empty() || s.front() == '#') continue;
    double v[3];
    std::size_t field = 0;
    std::size_t start = 0;
    bool ok = true;
    while (ok) {
      const auto comma = s.find(',', start);
      const auto token = s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
      if (field >= 3 || !parse_double(token, v[field])) ok = false;
      ++field;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!ok || field != 3) throw ParseError("malformed nk row '" + std::string(s) + "', expected wavelength_nm,n,k", lineno);
    if (v[0] <= 0.0) throw ParseError("wavelength must be positive", lineno);
    if (v[1] < 0.0 || v[2] < 0.0) throw ParseError("n and k must be non-negative (passive media only)", lineno);
    if (!rows.empty() && !(v[0] > rows.back().wavelength_nm)) {
      throw ParseError("wavelengths must be strictly increasing", lineno);
    }
    rows.push_back({v[0], v[1], v[2]});
  }
  if (rows.size() < 2) throw ParseError("nk table needs at least two data rows", lineno);
  return Material::tabulated(std::move(name), std::move(rows));
}

Material load_nk_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path.string(), "file not found or unreadable");
  return load_nk_table(in, path.stem().string());
}

void write_nk_table(std::ostream& out, const Material& material) {
  out << "# " << material.name() << "\n# wavelength_nm,n,k\n";
  auto put = [&out](double x) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
    out.write(buf, p - buf);
  };
  if (material.is_tabulated()) {
    for (const auto& r : material.rows()) {
      put(r.wavelength_nm), out << ',', put(r.n), out << ',', put(r.k), out << '\n';
    }
  } else {
    // A constant index is written as a flat two-row table spanning the visible-NIR range.
    const auto idx = material.index(0.0);
    for (double w : {200.0, 2000.0}) put(w), out << ',', put(idx.real()), out << ',', put(idx.imag()), out << '\n';
  }
}

namespace materials {

Material vacuum() { return Material::constant("vacuum", 1.0); }
Material air() { return Material::constant("air", 1.0); }
Material sio2() { return Material::constant("sio2", 1.46); }
Material al2o3() { return Material::constant("al2o3", 1.76); }
Material hbn() { return Material::constant("hbn", 2.0); }

Material si() {
  static const Material m = [] {
    std::istringstream in{std::string(detail::kSiliconTable)};
    return load_nk_table(in, "si");
  }();
  return m;
}

Material al() {
  static const Material m = [] {
    std::istringstream in{std::string(detail::kAluminiumTable)};
    return load_nk_table(in, "al");
  }();
  return m;
}

Material perfect_mirror() { return Material::constant("perfect_mirror", 0.0, 1e6); }

std::optional<Material> builtin(std::string_view name) {
  if (name == "vacuum") return vacuum();
  if (name == "air") return air();
  if (name == "sio2") return sio2();
  if (name == "al2o3") return al2o3();
  if (name == "hbn") return hbn();
  if (name == "si") return si();
  if (name == "al") return al();
  if (name == "perfect_mirror") return perfect_mirror();
  return std::nullopt;
}

std::vector<std::string> builtin_names() {
  return {"vacuum", "air", "sio2", "al2o3", "hbn", "si", "al", "perfect_mirror"};
}

}  // namespace materials

}  // namespace rdc
