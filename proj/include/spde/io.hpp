#pragma once

// Deterministic artifact output: CSV tables (LF, '.' decimal, %.17g),
// flat little-endian binary fields with JSON sidecars, and self-contained
// SVG plots. Presentation only, never computation.

#include <string>
#include <vector>

#include "spde/bounds.hpp"
#include "spde/grid.hpp"
#include "spde/simulate.hpp"

#include <json.hpp>

namespace spde {

std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

void write_csv(const std::string& path, const CsvTable& table);
void write_text_file(const std::string& path, const std::string& content);
void write_json_file(const std::string& path, const nlohmann::json& j);

// Flat binary (row-major cells, little-endian doubles) plus a JSON sidecar
// describing the grid; `label` distinguishes noise fields from solutions.
void write_binary_field(const std::string& path_base, const std::vector<double>& cells,
                        const SimGrid& grid, const std::string& label);

void write_field_series_csv(const std::string& path, const FieldSeries& series);

struct PlotSeries {
  std::string name;
  std::vector<double> x, y;
};
struct PlotSpec {
  std::string title;
  bool log_x = false;
  bool log_y = false;
  std::vector<PlotSeries> series;
};
void write_svg_plot(const std::string& path, const PlotSpec& plot);

// 64-bit FNV-1a over a byte string; used for config hashes in MANIFESTs.
uint64_t fnv1a64(const std::string& bytes);

nlohmann::json to_json(const BoundReport& report);
nlohmann::json to_json(const ChaosSeriesResult& series);

} // namespace spde
