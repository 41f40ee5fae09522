#include "rdc/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <system_error>

#include "rdc/errors.hpp"

namespace rdc {

using Json = nlohmann::ordered_json;

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_row(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_double(std::string_view text, std::size_t line, std::string_view column) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw ParseError("column '" + std::string(column) + "': expected a number, got '" + std::string(text) + "'", line);
  }
  return v;
}

}  // namespace

std::size_t CsvTable::column(std::string_view name) const {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw ValidationError("csv", "missing column '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - header.begin());
}

std::vector<double> CsvTable::numbers(std::string_view name) const {
  const std::size_t c = column(name);
  std::vector<double> out;
  out.reserve(cells.size());
  for (std::size_t r = 0; r < cells.size(); ++r) out.push_back(parse_double(cells[r][c], line_numbers[r], name));
  return out;
}

CsvTable parse_csv(std::istream& in) {
  CsvTable t;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view s = raw;
    if (line == 1 && s.starts_with("\xEF\xBB\xBF")) s.remove_prefix(3);
    s = trim(s);
    if (s.empty()) continue;
    if (s.front() == '#') {
      t.comments.emplace_back(trim(s.substr(1)));
      continue;
    }
    auto row = split_row(s);
    if (t.header.empty()) {
      for (const auto& h : row) {
        if (h.empty()) throw ParseError("empty column name in header", line);
      }
      t.header = std::move(row);
      continue;
    }
    if (row.size() != t.header.size()) {
      throw ParseError("expected " + std::to_string(t.header.size()) + " fields, got " + std::to_string(row.size()),
                       line);
    }
    t.cells.push_back(std::move(row));
    t.line_numbers.push_back(line);
  }
  if (t.header.empty()) throw ValidationError("csv", "file is empty (a header line is required)");
  return t;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("input", "cannot open '" + path.string() + "' (file not found or unreadable)");
  return parse_csv(in);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("input", "cannot open '" + path.string() + "' (file not found or unreadable)");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("output", "cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw ValidationError("output", "write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw ValidationError("output", "cannot move output into place at '" + path.string() + "': " + ec.message());
  }
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

DecayTrace decay_trace_from_csv(const CsvTable& table) {
  if (table.rows() == 0) throw ValidationError("csv", "no data rows");
  DecayTrace tr{table.numbers("t_ns"), table.numbers("counts")};
  tr.validate();
  return tr;
}

OdmrSpectrum odmr_spectrum_from_csv(const CsvTable& table) {
  if (table.rows() == 0) throw ValidationError("csv", "no data rows");
  OdmrSpectrum sp{table.numbers("freq_GHz"), table.numbers("pl")};
  sp.validate();
  return sp;
}

std::string sweep_to_csv(const SweepResult& result) {
  std::vector<std::string> extra;
  for (const auto& row : result.rows) {
    for (const auto& [name, _] : row.breakdown) {
      if (std::find(extra.begin(), extra.end(), name) == extra.end()) extra.push_back(name);
    }
  }
  std::ostringstream out;
  out << result.parameter_path << ',' << to_string(result.metric) << ",status";
  for (const auto& e : extra) out << ',' << e;
  out << '\n';
  for (const auto& row : result.rows) {
    out << format_number(row.value) << ',' << (row.ok ? format_number(row.metric) : "nan") << ','
        << (row.ok ? "ok" : "failed");
    for (const auto& e : extra) {
      auto it = std::find_if(row.breakdown.begin(), row.breakdown.end(), [&](const auto& kv) { return kv.first == e; });
      out << ',' << (it == row.breakdown.end() ? "nan" : format_number(it->second));
    }
    out << '\n';
  }
  out << "# argmax=" << (result.argmax_value ? format_number(*result.argmax_value) : "none") << '\n';
  out << "# refined=" << (result.refined_optimum ? format_number(*result.refined_optimum) : "none") << '\n';
  out << "# failed=";
  const auto failed = result.failed_values();
  for (std::size_t i = 0; i < failed.size(); ++i) out << (i ? ";" : "") << format_number(failed[i]);
  out << '\n';
  for (const auto& row : result.rows) {
    if (!row.ok) {
      std::string msg = row.error;
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      out << "# failed " << format_number(row.value) << ": " << msg << '\n';
    }
  }
  return out.str();
}

SweepResult sweep_from_csv(const CsvTable& table) {
  if (table.header.size() < 3 || table.header[2] != "status") {
    throw ValidationError("csv", "not a sweep table (expected '<param>,<metric>,status,...')");
  }
  SweepResult res;
  res.parameter_path = table.header[0];
  res.metric = parse_metric(table.header[1]);
  const auto values = table.numbers(table.header[0]);
  for (std::size_t r = 0; r < table.rows(); ++r) {
    SweepRow row;
    row.value = values[r];
    row.ok = table.cells[r][2] == "ok";
    if (row.ok) {
      row.metric = parse_double(table.cells[r][1], table.line_numbers[r], table.header[1]);
      for (std::size_t c = 3; c < table.header.size(); ++c) {
        row.breakdown.emplace_back(table.header[c],
                                   parse_double(table.cells[r][c], table.line_numbers[r], table.header[c]));
      }
    }
    res.rows.push_back(std::move(row));
  }
  for (const auto& c : table.comments) {
    auto read = [&](std::string_view key) -> std::optional<double> {
      if (!c.starts_with(key)) return std::nullopt;
      const std::string_view v = std::string_view(c).substr(key.size());
      if (v == "none") return std::nullopt;
      double x = 0.0;
      auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
      if (ec != std::errc()) return std::nullopt;
      return x;
    };
    if (auto v = read("argmax=")) res.argmax_value = v;
    if (auto v = read("refined=")) res.refined_optimum = v;
  }
  return res;
}

std::string report_to_csv(const EnhancementReport& rep) {
  std::ostringstream out;
  out << "wavelength_nm,weight,purcell_F,frac_up,frac_down,frac_lost,collection_eta,eta_effective,yield,"
         "ref_purcell_F,ref_frac_up,ref_frac_down,ref_frac_lost,ref_collection_eta,ref_eta_effective,ref_yield\n";
  for (const auto& r : rep.rows) {
    const double v[] = {r.wavelength_nm,      r.weight,
                        r.stack.purcell_F,    r.stack.frac_up,
                        r.stack.frac_down,    r.stack.frac_lost,
                        r.stack.collection_eta, r.eta_effective,
                        r.yield,              r.reference.purcell_F,
                        r.reference.frac_up,  r.reference.frac_down,
                        r.reference.frac_lost, r.reference.collection_eta,
                        r.ref_eta_effective,  r.ref_yield};
    for (std::size_t i = 0; i < std::size(v); ++i) out << (i ? "," : "") << format_number(v[i]);
    out << '\n';
  }
  return out.str();
}

std::string report_to_json(const EnhancementReport& rep, const RunConfig& cfg) {
  Json j;
  j["kind"] = "enhancement_report";
  j["config"] = cfg.source;
  j["orientation"] = to_string(cfg.emitter.orientation);
  j["eta0"] = rep.eta0;
  j["numerical_aperture"] = cfg.numerical_aperture;
  j["pump_wavelength_nm"] = cfg.pump_wavelength_nm;
  j["spectrum"] = cfg.emitter.spectrum.describe();
  j["band_nm"] = {cfg.emitter.spectrum.band_min_nm(), cfg.emitter.spectrum.band_max_nm()};
  j["total_gain"] = rep.total_gain;
  j["excitation_gain"] = rep.excitation_gain;
  j["emission_gain"] = rep.emission_gain;
  j["band_avg_purcell"] = rep.band_avg_purcell;
  j["ref_band_avg_purcell"] = rep.ref_band_avg_purcell;
  j["band_avg_collection"] = rep.band_avg_collection;
  j["ref_band_avg_collection"] = rep.ref_band_avg_collection;
  j["collection_ratio"] = rep.collection_ratio;
  j["effective_qe_ratio"] = rep.effective_qe_ratio;
  j["lifetime_ratio"] = rep.lifetime_ratio;
  Json rows = Json::array();
  for (const auto& r : rep.rows) {
    Json row;
    row["wavelength_nm"] = r.wavelength_nm;
    row["weight"] = r.weight;
    row["purcell_F"] = r.stack.purcell_F;
    row["frac_up"] = r.stack.frac_up;
    row["frac_down"] = r.stack.frac_down;
    row["frac_lost"] = r.stack.frac_lost;
    row["collection_eta"] = r.stack.collection_eta;
    row["eta_effective"] = r.eta_effective;
    row["ref_purcell_F"] = r.reference.purcell_F;
    row["ref_collection_eta"] = r.reference.collection_eta;
    row["ref_eta_effective"] = r.ref_eta_effective;
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  return j.dump(2) + "\n";
}

std::string decay_fit_to_json(const DecayFit& fit, const DecayTrace& trace) {
  Json j;
  j["kind"] = "lifetime_fit";
  j["model"] = "y = a*exp(-(t-b)/tau) + c";
  j["a"] = fit.a;
  j["b"] = fit.b;
  j["tau_ns"] = fit.tau_ns;
  j["c"] = fit.c;
  j["residual_rms"] = fit.residual_rms;
  j["initial_residual_rms"] = fit.initial_residual_rms;
  j["iterations"] = fit.iterations;
  Json model = Json::array();
  for (double t : trace.t_ns) model.push_back(decay_model(fit.params(), t));
  j["data"] = {{"x_label", "t_ns"}, {"y_label", "counts"}, {"x", trace.t_ns}, {"y", trace.counts}};
  j["fitted"] = std::move(model);
  return j.dump(2) + "\n";
}

std::string odmr_fit_to_json(const OdmrFit& fit, const OdmrSpectrum& spectrum) {
  const auto& p = fit.params;
  Json j;
  j["kind"] = "odmr_fit";
  j["model"] = "baseline*(1 - c_minus*L(D-E) - c_plus*L(D+E)), L unit-peak Lorentzian";
  j["D_GHz"] = p.D_GHz;
  j["E_GHz"] = p.E_GHz;
  j["contrast_minus"] = p.contrast_minus;
  j["contrast_plus"] = p.contrast_plus;
  j["width_GHz"] = p.width_GHz;
  j["baseline"] = p.baseline;
  j["single_dip"] = fit.single_dip;
  j["residual_rms"] = fit.residual_rms;
  j["initial_residual_rms"] = fit.initial_residual_rms;
  j["iterations"] = fit.iterations;
  Json model = Json::array();
  for (double f : spectrum.freq_GHz) model.push_back(odmr_model(p, f));
  j["data"] = {{"x_label", "freq_GHz"}, {"y_label", "pl"}, {"x", spectrum.freq_GHz}, {"y", spectrum.pl}};
  j["fitted"] = std::move(model);
  return j.dump(2) + "\n";
}

}  // namespace rdc
