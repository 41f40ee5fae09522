#pragma once

// File formats: CSV tables, JSON reports and atomic output.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "rdc/config.hpp"
#include "rdc/enhance.hpp"
#include "rdc/fit.hpp"
#include "rdc/sweep.hpp"

namespace rdc {

/// Comma-separated table with a mandatory header. Lines starting with '#'
/// are kept (without the marker) in `comments`.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> comments;

  std::size_t rows() const noexcept { return cells.size(); }
  /// Column index; throws ValidationError when absent.
  std::size_t column(std::string_view name) const;
  /// Column parsed as numbers; throws ParseError (with line) on bad cells.
  std::vector<double> numbers(std::string_view name) const;

  std::vector<std::size_t> line_numbers;  ///< source line of each row
};

CsvTable parse_csv(std::istream& in);
/// Throws ValidationError naming the path when it cannot be opened.
CsvTable read_csv(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

/// Shortest representation that reads back to the same double.
std::string format_number(double v);

/// Columns t_ns,counts.
DecayTrace decay_trace_from_csv(const CsvTable& table);
/// Columns freq_GHz,pl.
OdmrSpectrum odmr_spectrum_from_csv(const CsvTable& table);

/// `<param>,<metric>,status,<breakdown...>` rows followed by `# argmax=`,
/// `# refined=` and `# failed` trailer lines.
std::string sweep_to_csv(const SweepResult& result);
SweepResult sweep_from_csv(const CsvTable& table);

/// Per-wavelength breakdown of an enhancement report.
std::string report_to_csv(const EnhancementReport& report);
std::string report_to_json(const EnhancementReport& report, const RunConfig& cfg);

std::string decay_fit_to_json(const DecayFit& fit, const DecayTrace& trace);
std::string odmr_fit_to_json(const OdmrFit& fit, const OdmrSpectrum& spectrum);

}  // namespace rdc
