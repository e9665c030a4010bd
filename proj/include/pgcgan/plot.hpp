#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace pgcgan::plot {

// Minimal deterministic SVG plotting: fixed palette, fixed formatting, no
// timestamps, so identical data produces identical bytes.

struct Series {
  std::string name;
  std::vector<double> x, y;
  std::string color = "#1f6fb2";
  bool band = false;                 // fill between y_low and y_high
  std::vector<double> y_low, y_high;
};

struct ScatterGroup {
  std::string name;
  std::vector<double> x, y;
  std::string color = "#1f6fb2";
  double radius = 2.5;
};

struct Panel {
  std::string title;
  std::vector<Series> series;
};

void write_line_svg(const std::filesystem::path& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<Series>& series);

void write_scatter_svg(const std::filesystem::path& path, const std::string& title,
                       const std::string& x_label, const std::string& y_label,
                       const std::vector<ScatterGroup>& groups);

// Grid of small line plots sharing nothing but the figure title.
void write_panel_grid_svg(const std::filesystem::path& path, const std::string& title,
                          const std::vector<Panel>& panels, int columns = 3);

const std::string& palette_color(int i);

}  // namespace pgcgan::plot
