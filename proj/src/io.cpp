#include "spde/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "spde/errors.hpp"

namespace spde {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out << content;
}

void write_csv(const std::string& path, const CsvTable& table) {
  std::string body;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) body += ',';
    body += table.header[i];
  }
  body += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) body += ',';
      body += format_double(row[i]);
    }
    body += '\n';
  }
  write_text_file(path, body);
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

void write_binary_field(const std::string& path_base, const std::vector<double>& cells,
                        const SimGrid& grid, const std::string& label) {
  std::ofstream out(path_base + ".bin", std::ios::binary);
  if (!out) throw ConfigError("cannot open for writing: " + path_base + ".bin");
  static_assert(sizeof(double) == 8);
  for (double v : cells) { // little-endian on every supported target
    out.write(reinterpret_cast<const char*>(&v), sizeof(double));
  }
  nlohmann::json side;
  side["label"] = label;
  side["layout"] = "row-major-cells";
  side["dtype"] = "float64-le";
  side["count"] = cells.size();
  side["grid"] = {{"dim", grid.dim},
                  {"half_width", grid.half_width},
                  {"points", grid.points},
                  {"time_step", grid.time_step},
                  {"horizon", grid.horizon}};
  write_json_file(path_base + ".json", side);
}

void write_field_series_csv(const std::string& path, const FieldSeries& series) {
  std::string body = "t";
  for (std::size_t j = 0; j < series.grid.n_space(); ++j)
    body += ",x" + std::to_string(j);
  body += '\n';
  for (std::size_t i = 0; i < series.times.size(); ++i) {
    body += format_double(series.times[i]);
    for (double v : series.values[i]) {
      body += ',';
      body += format_double(v);
    }
    body += '\n';
  }
  write_text_file(path, body);
}

namespace {

double plot_coord(double v, bool logscale) {
  return logscale ? std::log10(std::max(v, 1e-300)) : v;
}

} // namespace

void write_svg_plot(const std::string& path, const PlotSpec& plot) {
  const int W = 720, H = 480, ml = 70, mr = 20, mt = 40, mb = 50;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : plot.series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      double x = plot_coord(s.x[i], plot.log_x), y = plot_coord(s.y[i], plot.log_y);
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  if (!(xmax > xmin)) { xmax = xmin + 1.0; }
  if (!(ymax > ymin)) { ymax = ymin + 1.0; }
  auto px = [&](double x) {
    return ml + (plot_coord(x, plot.log_x) - xmin) / (xmax - xmin) * (W - ml - mr);
  };
  auto py = [&](double y) {
    return H - mb - (plot_coord(y, plot.log_y) - ymin) / (ymax - ymin) * (H - mt - mb);
  };
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                    std::to_string(W) + "\" height=\"" + std::to_string(H) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + std::to_string(W / 2) + "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"monospace\" font-size=\"14\">" + plot.title + "</text>\n";
  svg += "<line x1=\"" + std::to_string(ml) + "\" y1=\"" + std::to_string(H - mb) +
         "\" x2=\"" + std::to_string(W - mr) + "\" y2=\"" + std::to_string(H - mb) +
         "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + std::to_string(ml) + "\" y1=\"" + std::to_string(mt) + "\" x2=\"" +
         std::to_string(ml) + "\" y2=\"" + std::to_string(H - mb) + "\" stroke=\"black\"/>\n";
  int ci = 0;
  for (const auto& s : plot.series) {
    std::string pts;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      pts += std::to_string(px(s.x[i])) + "," + std::to_string(py(s.y[i])) + " ";
    }
    const char* col = colors[ci % 6];
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(col) +
           "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    svg += "<text x=\"" + std::to_string(W - mr - 150) + "\" y=\"" +
           std::to_string(mt + 16 * (ci + 1)) + "\" font-family=\"monospace\" " +
           "font-size=\"12\" fill=\"" + col + "\">" + s.name + "</text>\n";
    ++ci;
  }
  svg += "</svg>\n";
  write_text_file(path, svg);
}

uint64_t fnv1a64(const std::string& bytes) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

nlohmann::json to_json(const BoundReport& report) {
  nlohmann::json j;
  auto pairs = [](const std::vector<std::pair<double, double>>& xs) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [a, b] : xs) arr.push_back({a, b});
    return arr;
  };
  j["j_p_samples"] = pairs(report.j_p_samples);
  j["j_p_bound_values"] = pairs(report.j_p_bound_values);
  j["m_p"] = {report.m_p_at.first, report.m_p_at.second};
  j["linear_p_bound"] = report.linear_p_bound;
  j["a_beta_samples"] = pairs(report.a_beta_samples);
  j["beta_star"] = report.beta_star_value;
  nlohmann::json fits = nlohmann::json::array();
  for (const auto& [name, slope, se] : report.fitted_exponents)
    fits.push_back({{"name", name}, {"slope", slope}, {"stderr", se}});
  j["fitted_exponents"] = fits;
  j["constants_used"] = {{"Bp", report.Bp_used}, {"Cp", report.Cp_used}};
  return j;
}

nlohmann::json to_json(const ChaosSeriesResult& series) {
  nlohmann::json j;
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& term : series.terms)
    terms.push_back({{"n", term.n}, {"value", term.value}, {"stderr", term.mc_stderr}});
  j["terms"] = terms;
  j["partial_sum"] = series.partial_sum;
  j["n_max"] = series.n_max;
  j["eta"] = series.eta;
  j["lambda"] = series.lambda;
  j["m2"] = series.m2;
  j["xi_cut"] = series.xi_cut;
  j["neglected_mass"] = series.neglected_mass;
  return j;
}

} // namespace spde
