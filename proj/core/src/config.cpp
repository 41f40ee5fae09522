#include "rdc/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "rdc/errors.hpp"

namespace rdc {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > start) out.emplace_back(s.substr(start, i - start));
  }
  return out;
}

double to_number(std::string_view text, const std::string& field, std::size_t line) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ValidationError(field, "expected a number, got '" + std::string(text) + "'", line);
  }
  return v;
}

struct Entry {
  std::string key;
  std::string value;
  std::size_t line;
};

class Parser {
 public:
  Parser(std::filesystem::path base_dir, std::string source) : base_(std::move(base_dir)) {
    cfg_.source = std::move(source);
  }

  RunConfig run(std::istream& in) {
    std::string raw;
    std::size_t line_no = 0;
    std::string section;
    std::set<std::string> seen_sections;
    std::map<std::string, std::vector<Entry>> entries;
    std::map<std::string, std::size_t> header_line;
    while (std::getline(in, raw)) {
      ++line_no;
      std::string_view line = raw;
      if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.remove_prefix(3);
      if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') throw ParseError("unterminated section header", line_no);
        section = std::string(trim(line.substr(1, line.size() - 2)));
        static const std::set<std::string> known = {"materials", "stack",     "reference", "emitter",
                                                    "collection", "excitation", "numerics"};
        if (!known.contains(section)) throw ParseError("unknown section [" + section + "]", line_no);
        if (!seen_sections.insert(section).second) throw ParseError("duplicate section [" + section + "]", line_no);
        header_line[section] = line_no;
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line_no);
      if (section.empty()) throw ParseError("entry before any [section]", line_no);
      const std::string key(trim(line.substr(0, eq)));
      const std::string value(trim(line.substr(eq + 1)));
      if (key.empty()) throw ParseError("empty key", line_no);
      if (value.empty()) throw ParseError("empty value for '" + key + "'", line_no);
      entries[section].push_back({key, value, line_no});
    }

    materials(entries["materials"]);
    if (!seen_sections.contains("stack")) throw ValidationError("stack", "missing [stack] section");
    cfg_.stack = stack("stack", entries["stack"], header_line["stack"]);
    if (seen_sections.contains("reference")) {
      cfg_.reference = stack("reference", entries["reference"], header_line["reference"]);
    }
    emitter(entries["emitter"]);
    collection(entries["collection"]);
    excitation(entries["excitation"]);
    numerics(entries["numerics"]);
    validate_emitter();
    return std::move(cfg_);
  }

 private:
  [[noreturn]] static void unknown(const std::string& section, const Entry& e) {
    throw ValidationError(section + "." + e.key, "unknown key", e.line);
  }

  static void once(std::set<std::string>& seen, const std::string& section, const Entry& e) {
    if (!seen.insert(e.key).second) throw ValidationError(section + "." + e.key, "given more than once", e.line);
  }

  void materials(const std::vector<Entry>& list) {
    for (const auto& name : materials::builtin_names()) cfg_.materials.emplace(name, *materials::builtin(name));
    std::set<std::string> seen;
    for (const auto& e : list) {
      once(seen, "materials", e);
      const std::string field = "materials." + e.key;
      const auto words = split_words(e.value);
      const std::string& kind = words.front();
      if (kind == "constant") {
        if (words.size() < 2 || words.size() > 3) {
          throw ValidationError(field, "expected 'constant <n> [k]'", e.line);
        }
        const double n = to_number(words[1], field, e.line);
        const double k = words.size() == 3 ? to_number(words[2], field, e.line) : 0.0;
        try {
          cfg_.materials.insert_or_assign(e.key, Material::constant(e.key, n, k));
        } catch (const ValidationError& err) {
          throw ValidationError(field, err.what(), e.line);
        }
      } else if (kind == "nk") {
        if (words.size() != 2) throw ValidationError(field, "expected 'nk <path>'", e.line);
        std::filesystem::path p = words[1];
        if (p.is_relative()) p = base_ / p;
        if (!std::filesystem::is_regular_file(p)) throw ValidationError(field, "file not found: " + p.string(), e.line);
        Material m = load_nk_file(p);
        cfg_.materials.insert_or_assign(e.key, m);
      } else if (kind == "builtin") {
        if (words.size() != 2) throw ValidationError(field, "expected 'builtin <name>'", e.line);
        auto m = materials::builtin(words[1]);
        if (!m) throw ValidationError(field, "no built-in material '" + words[1] + "'", e.line);
        cfg_.materials.insert_or_assign(e.key, *m);
      } else {
        throw ValidationError(field, "expected constant, nk or builtin", e.line);
      }
    }
  }

  void require_material(const std::string& name, const std::string& field, std::size_t line) const {
    if (!cfg_.materials.contains(name)) throw ValidationError(field, "unknown material '" + name + "'", line);
  }

  StackSpec stack(const std::string& section, const std::vector<Entry>& list, std::size_t header) {
    StackSpec s;
    s.line = header;
    std::set<std::string> seen;
    std::set<std::string> layer_names;
    std::size_t host_line = header;
    for (const auto& e : list) {
      const std::string field = section + "." + e.key;
      if (e.key == "layer") {
        const auto words = split_words(e.value);
        if (words.size() != 3) throw ValidationError(field, "expected 'layer = <name> <material> <thickness_nm>'", e.line);
        LayerSpec l{words[0], words[1], to_number(words[2], field, e.line), e.line};
        if (!(l.thickness_nm >= 0.0)) throw ValidationError(field, "thickness must be >= 0", e.line);
        require_material(l.material, field, e.line);
        if (!layer_names.insert(l.name).second) {
          throw ValidationError(field, "duplicate layer name '" + l.name + "'", e.line);
        }
        s.layers.push_back(std::move(l));
        continue;
      }
      once(seen, section, e);
      if (e.key == "below" || e.key == "above") {
        if (split_words(e.value).size() != 1) throw ValidationError(field, "expected a material name", e.line);
        require_material(e.value, field, e.line);
        (e.key == "below" ? s.below : s.above) = e.value;
      } else if (e.key == "host") {
        s.host = e.value;
        host_line = e.line;
      } else {
        unknown(section, e);
      }
    }
    if (s.below.empty()) throw ValidationError(section + ".below", "missing", header);
    if (s.above.empty()) throw ValidationError(section + ".above", "missing", header);
    if (s.host.empty()) throw ValidationError(section + ".host", "missing", header);
    const LayerSpec* host = nullptr;
    for (const auto& l : s.layers) {
      if (l.name == s.host) host = &l;
    }
    if (!host) throw ValidationError(section + ".host", "no layer named '" + s.host + "'", host_line);
    if (!(host->thickness_nm > 0.0)) {
      throw ValidationError(section + ".host", "host layer must have positive thickness", host_line);
    }
    return s;
  }

  void emitter(const std::vector<Entry>& list) {
    std::set<std::string> seen;
    auto& em = cfg_.emitter;
    std::optional<std::pair<double, double>> band;
    for (const auto& e : list) {
      once(seen, "emitter", e);
      const std::string field = "emitter." + e.key;
      try {
        if (e.key == "depth_nm") {
          em.depth_nm = to_number(e.value, field, e.line);
          if (!(*em.depth_nm >= 0.0)) throw ValidationError(field, "must be >= 0", e.line);
        } else if (e.key == "depth_fraction") {
          em.depth_fraction = to_number(e.value, field, e.line);
          if (!(*em.depth_fraction >= 0.0 && *em.depth_fraction <= 1.0)) {
            throw ValidationError(field, "must lie in [0, 1]", e.line);
          }
        } else if (e.key == "orientation") {
          em.orientation = parse_orientation(e.value);
        } else if (e.key == "eta0") {
          em.eta0 = to_number(e.value, field, e.line);
          if (!(em.eta0 >= 0.0 && em.eta0 <= 1.0)) throw ValidationError(field, "must lie in [0, 1]", e.line);
        } else if (e.key == "spectrum") {
          const auto w = split_words(e.value);
          if (w.size() == 3 && w[0] == "gaussian") {
            em.spectrum = SpectrumWeight::gaussian(to_number(w[1], field, e.line), to_number(w[2], field, e.line));
          } else if (w.size() == 3 && w[0] == "flat") {
            em.spectrum = SpectrumWeight::flat(to_number(w[1], field, e.line), to_number(w[2], field, e.line));
          } else {
            throw ValidationError(field, "expected 'gaussian <center> <fwhm>' or 'flat <min> <max>'", e.line);
          }
        } else if (e.key == "band_nm") {
          const auto w = split_words(e.value);
          if (w.size() != 2) throw ValidationError(field, "expected '<min> <max>'", e.line);
          band = std::pair{to_number(w[0], field, e.line), to_number(w[1], field, e.line)};
        } else if (e.key == "samples") {
          const double n = to_number(e.value, field, e.line);
          if (!(n >= 2.0) || n != std::floor(n) || n > 100000.0) {
            throw ValidationError(field, "must be an integer >= 2", e.line);
          }
          em.samples = static_cast<std::size_t>(n);
        } else {
          unknown("emitter", e);
        }
      } catch (const ValidationError& err) {
        if (err.line() > 0) throw;
        throw ValidationError(field, err.what(), e.line);
      }
    }
    if (em.depth_nm && em.depth_fraction) {
      throw ValidationError("emitter", "give depth_nm or depth_fraction, not both");
    }
    if (!em.depth_nm && !em.depth_fraction) em.depth_fraction = 0.5;
    if (band) em.spectrum = em.spectrum.with_band(band->first, band->second);
  }

  void single_number(const std::string& section, const std::vector<Entry>& list,
                     const std::map<std::string, std::function<void(double, const std::string&, std::size_t)>>& keys) {
    std::set<std::string> seen;
    for (const auto& e : list) {
      once(seen, section, e);
      auto it = keys.find(e.key);
      if (it == keys.end()) unknown(section, e);
      const std::string field = section + "." + e.key;
      it->second(to_number(e.value, field, e.line), field, e.line);
    }
  }

  void collection(const std::vector<Entry>& list) {
    single_number("collection", list, {{"na", [this](double v, const std::string& f, std::size_t l) {
                                          if (!(v > 0.0)) throw ValidationError(f, "must be positive", l);
                                          cfg_.numerical_aperture = v;
                                        }}});
  }

  void excitation(const std::vector<Entry>& list) {
    single_number("excitation", list, {{"wavelength_nm", [this](double v, const std::string& f, std::size_t l) {
                                          if (!(v > 0.0)) throw ValidationError(f, "must be positive", l);
                                          cfg_.pump_wavelength_nm = v;
                                        }}});
  }

  void numerics(const std::vector<Entry>& list) {
    auto& q = cfg_.quadrature;
    auto positive = [](double& slot) {
      return [&slot](double v, const std::string& f, std::size_t l) {
        if (!(v > 0.0)) throw ValidationError(f, "must be positive", l);
        slot = v;
      };
    };
    single_number("numerics", list,
                  {{"rel_tol", positive(q.rel_tol)},
                   {"abs_tol", positive(q.abs_tol)},
                   {"u_max", positive(q.u_max)},
                   {"tail_cutoff", positive(q.tail_cutoff)},
                   {"max_intervals", [&q](double v, const std::string& f, std::size_t l) {
                      if (!(v >= 1.0) || v != std::floor(v)) throw ValidationError(f, "must be a positive integer", l);
                      q.max_intervals = static_cast<std::size_t>(v);
                    }}});
  }

  void validate_emitter() const {
    const auto check = [this](const StackSpec& s, const char* section) {
      if (!cfg_.emitter.depth_nm) return;
      for (const auto& l : s.layers) {
        if (l.name == s.host && *cfg_.emitter.depth_nm > l.thickness_nm) {
          throw ValidationError("emitter.depth_nm", "exceeds the " + std::string(section) + " host layer thickness (" +
                                                        std::to_string(l.thickness_nm) + " nm)");
        }
      }
    };
    check(cfg_.stack, "stack");
    if (cfg_.reference) check(*cfg_.reference, "reference");
  }

  std::filesystem::path base_;
  RunConfig cfg_;
};

}  // namespace

const Material& RunConfig::material(const std::string& name) const {
  auto it = materials.find(name);
  if (it == materials.end()) throw ValidationError("materials", "unknown material '" + name + "'");
  return it->second;
}

RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir, std::string source) {
  return Parser(base_dir, std::move(source)).run(in);
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config", "cannot open '" + path.string() + "' (file not found or unreadable)");
  return parse_config(in, path.parent_path(), path.string());
}

}  // namespace rdc
