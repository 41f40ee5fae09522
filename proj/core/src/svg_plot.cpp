#include "rdc/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <sstream>

#include "rdc/errors.hpp"
#include "rdc/io.hpp"

namespace rdc {

namespace {

constexpr double kWidth = 720, kHeight = 480;
constexpr double kLeft = 80, kRight = 30, kTop = 50, kBottom = 60;
constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

// "Nice" tick spacing covering [lo, hi] with about n ticks.
double tick_step(double lo, double hi, int n) {
  const double raw = (hi - lo) / n;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) return m * mag;
  }
  return 10.0 * mag;
}

}  // namespace

std::string render_svg(const Plot& plot) {
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& s : plot.series) {
    if (s.x.size() != s.y.size()) throw ValidationError("plot", "series '" + s.label + "' has mismatched lengths");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  }
  if (!std::isfinite(xmin)) throw ValidationError("plot", "nothing to plot");
  if (xmax == xmin) xmin -= 0.5, xmax += 0.5;
  if (ymax == ymin) ymin -= 0.5, ymax += 0.5;
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;

  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * pw; };
  auto sy = [&](double y) { return kTop + (ymax - y) / (ymax - ymin) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << kWidth / 2 << "\" y=\"28\" text-anchor=\"middle\" font-size=\"15\">" << escape(plot.title)
    << "</text>\n";
  o << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"#333\"/>\n";

  const double xs = tick_step(xmin, xmax, 6), ys = tick_step(ymin, ymax, 6);
  for (double t = std::ceil(xmin / xs) * xs; t <= xmax + 1e-9 * xs; t += xs) {
    o << "<line x1=\"" << num(sx(t)) << "\" y1=\"" << kTop + ph << "\" x2=\"" << num(sx(t)) << "\" y2=\""
      << kTop + ph + 5 << "\" stroke=\"#333\"/>";
    o << "<text x=\"" << num(sx(t)) << "\" y=\"" << kTop + ph + 18 << "\" text-anchor=\"middle\">" << tick_label(t)
      << "</text>\n";
  }
  for (double t = std::ceil(ymin / ys) * ys; t <= ymax + 1e-9 * ys; t += ys) {
    o << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << num(sy(t)) << "\" x2=\"" << kLeft << "\" y2=\"" << num(sy(t))
      << "\" stroke=\"#333\"/>";
    o << "<text x=\"" << kLeft - 8 << "\" y=\"" << num(sy(t) + 4) << "\" text-anchor=\"end\">" << tick_label(t)
      << "</text>\n";
  }
  o << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 15 << "\" text-anchor=\"middle\">"
    << escape(plot.x_label) << "</text>\n";
  o << "<text transform=\"translate(20," << kTop + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
    << escape(plot.y_label) << "</text>\n";

  for (std::size_t k = 0; k < plot.series.size(); ++k) {
    const auto& s = plot.series[k];
    const char* color = kColors[k % std::size(kColors)];
    if (s.markers) {
      o << "<g fill=\"" << color << "\">";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) {
          o << "<circle cx=\"" << num(sx(s.x[i])) << "\" cy=\"" << num(sy(s.y[i])) << "\" r=\"2.5\"/>";
        }
      }
      o << "</g>\n";
    } else {
      o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\" points=\"";
      bool first = true;
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        o << (first ? "" : " ") << num(sx(s.x[i])) << ',' << num(sy(s.y[i]));
        first = false;
      }
      o << "\"/>\n";
    }
    const double ly = kTop + 16 + 16 * static_cast<double>(k);
    o << "<rect x=\"" << kLeft + pw - 170 << "\" y=\"" << ly - 9 << "\" width=\"12\" height=\"10\" fill=\"" << color
      << "\"/><text x=\"" << kLeft + pw - 152 << "\" y=\"" << ly << "\">" << escape(s.label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

namespace {

std::vector<double> doubles(const nlohmann::json& a, const char* what) {
  if (!a.is_array()) throw ValidationError("plot", std::string("report field '") + what + "' is not an array");
  std::vector<double> out;
  for (const auto& v : a) out.push_back(v.is_number() ? v.get<double>() : NAN);
  return out;
}

Plot plot_json(const nlohmann::json& j, const std::string& name) {
  if (!j.is_object() || !j.contains("kind")) throw ValidationError("plot", "'" + name + "' is not a report");
  const std::string kind = j["kind"].get<std::string>();
  Plot p;
  if (kind == "lifetime_fit" || kind == "odmr_fit") {
    const auto& d = j.at("data");
    p.title = kind == "lifetime_fit" ? "Fluorescence decay fit" : "ODMR fit";
    p.x_label = d.at("x_label").get<std::string>();
    p.y_label = d.at("y_label").get<std::string>();
    const auto x = doubles(d.at("x"), "data.x");
    p.series.push_back({"data", x, doubles(d.at("y"), "data.y"), true});
    p.series.push_back({"fit", x, doubles(j.at("fitted"), "fitted"), false});
  } else if (kind == "enhancement_report") {
    p.title = "Decay-rate enhancement and collection";
    p.x_label = "wavelength (nm)";
    p.y_label = "value";
    std::vector<double> wl, F, rF, c, rc;
    for (const auto& r : j.at("rows")) {
      wl.push_back(r.at("wavelength_nm").get<double>());
      F.push_back(r.at("purcell_F").get<double>());
      rF.push_back(r.at("ref_purcell_F").get<double>());
      c.push_back(r.at("collection_eta").get<double>());
      rc.push_back(r.at("ref_collection_eta").get<double>());
    }
    p.series = {{"purcell_F", wl, F, false},
                {"ref_purcell_F", wl, rF, false},
                {"collection_eta", wl, c, false},
                {"ref_collection_eta", wl, rc, false}};
  } else {
    throw ValidationError("plot", "unsupported report kind '" + kind + "'");
  }
  return p;
}

}  // namespace

Plot plot_from_file(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) throw ValidationError("plot", "'" + path.string() + "' is empty");
  if (text[first] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("plot", "'" + path.string() + "' is not valid JSON: " + e.what());
    }
    try {
      return plot_json(j, path.string());
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("plot", "'" + path.string() + "': " + e.what());
    }
  }
  std::istringstream in(text);
  const CsvTable t = parse_csv(in);
  if (t.rows() == 0) throw ValidationError("plot", "'" + path.string() + "' has no data rows");
  Plot p;
  p.x_label = t.header[0];
  if (t.header.size() >= 3 && t.header[2] == "status") {
    const SweepResult s = sweep_from_csv(t);
    p.title = "Sweep of " + std::string(to_string(s.metric));
    p.y_label = t.header[1];
    PlotSeries series{t.header[1], {}, {}, false};
    for (const auto& r : s.rows) {
      if (!r.ok) continue;
      series.x.push_back(r.value);
      series.y.push_back(r.metric);
    }
    if (series.x.size() < 2) series.markers = true;
    p.series.push_back(std::move(series));
    return p;
  }
  if (t.header.size() < 2) throw ValidationError("plot", "'" + path.string() + "' needs at least two columns");
  p.title = t.header[1] + " vs " + t.header[0];
  p.y_label = t.header[1];
  p.series.push_back({t.header[1], t.numbers(t.header[0]), t.numbers(t.header[1]), true});
  return p;
}

}  // namespace rdc
