#include "pgcgan/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "pgcgan/common.hpp"

namespace fs = std::filesystem;

namespace pgcgan::plot {

namespace {

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else out += c;
  }
  return out;
}

struct Bounds {
  double xmin = std::numeric_limits<double>::infinity();
  double xmax = -std::numeric_limits<double>::infinity();
  double ymin = std::numeric_limits<double>::infinity();
  double ymax = -std::numeric_limits<double>::infinity();

  void add(double x, double y) {
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
  }

  void finalize() {
    if (!std::isfinite(xmin)) { xmin = 0; xmax = 1; }
    if (!std::isfinite(ymin)) { ymin = 0; ymax = 1; }
    if (xmax == xmin) { xmin -= 0.5; xmax += 0.5; }
    if (ymax == ymin) { ymin -= 0.5; ymax += 0.5; }
    const double mx = 0.05 * (xmax - xmin), my = 0.05 * (ymax - ymin);
    xmin -= mx; xmax += mx; ymin -= my; ymax += my;
  }
};

struct Rect {
  double x0, y0, w, h;  // plot area in SVG pixels
};

struct Mapper {
  Bounds b;
  Rect r;
  double px(double x) const { return r.x0 + (x - b.xmin) / (b.xmax - b.xmin) * r.w; }
  double py(double y) const { return r.y0 + r.h - (y - b.ymin) / (b.ymax - b.ymin) * r.h; }
};

void draw_frame(std::string& svg, const Mapper& m, const std::string& x_label,
                const std::string& y_label) {
  const Rect& r = m.r;
  svg += "<rect x='" + fmt(r.x0) + "' y='" + fmt(r.y0) + "' width='" + fmt(r.w) +
         "' height='" + fmt(r.h) + "' fill='none' stroke='#888' stroke-width='1'/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double tx = m.b.xmin + (m.b.xmax - m.b.xmin) * i / 4.0;
    const double ty = m.b.ymin + (m.b.ymax - m.b.ymin) * i / 4.0;
    svg += "<text x='" + fmt(m.px(tx)) + "' y='" + fmt(r.y0 + r.h + 16) +
           "' font-size='10' text-anchor='middle' fill='#444'>" + fmt(tx) + "</text>\n";
    svg += "<text x='" + fmt(r.x0 - 6) + "' y='" + fmt(m.py(ty) + 3) +
           "' font-size='10' text-anchor='end' fill='#444'>" + fmt(ty) + "</text>\n";
  }
  if (!x_label.empty())
    svg += "<text x='" + fmt(r.x0 + r.w / 2) + "' y='" + fmt(r.y0 + r.h + 32) +
           "' font-size='12' text-anchor='middle' fill='#222'>" + escape(x_label) +
           "</text>\n";
  if (!y_label.empty())
    svg += "<text x='14' y='" + fmt(r.y0 + r.h / 2) +
           "' font-size='12' text-anchor='middle' fill='#222' transform='rotate(-90 14 " +
           fmt(r.y0 + r.h / 2) + ")'>" + escape(y_label) + "</text>\n";
}

void draw_series(std::string& svg, const Mapper& m, const Series& s) {
  if (s.band && s.y_low.size() == s.x.size() && s.y_high.size() == s.x.size()) {
    std::string pts;
    for (std::size_t i = 0; i < s.x.size(); ++i)
      pts += fmt(m.px(s.x[i])) + "," + fmt(m.py(s.y_low[i])) + " ";
    for (std::size_t i = s.x.size(); i-- > 0;)
      pts += fmt(m.px(s.x[i])) + "," + fmt(m.py(s.y_high[i])) + " ";
    svg += "<polygon points='" + pts + "' fill='" + s.color + "' fill-opacity='0.18' stroke='none'/>\n";
  }
  std::string pts;
  for (std::size_t i = 0; i < s.x.size(); ++i)
    pts += fmt(m.px(s.x[i])) + "," + fmt(m.py(s.y[i])) + " ";
  svg += "<polyline points='" + pts + "' fill='none' stroke='" + s.color +
         "' stroke-width='1.5'/>\n";
}

void extend_bounds(Bounds& b, const Series& s) {
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    b.add(s.x[i], s.y[i]);
    if (s.band && i < s.y_low.size()) b.add(s.x[i], s.y_low[i]);
    if (s.band && i < s.y_high.size()) b.add(s.x[i], s.y_high[i]);
  }
}

void legend(std::string& svg, double x, double y,
            const std::vector<std::pair<std::string, std::string>>& entries) {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const double ly = y + 16.0 * static_cast<double>(i);
    svg += "<rect x='" + fmt(x) + "' y='" + fmt(ly - 9) +
           "' width='10' height='10' fill='" + entries[i].second + "'/>\n";
    svg += "<text x='" + fmt(x + 14) + "' y='" + fmt(ly) + "' font-size='11' fill='#222'>" +
           escape(entries[i].first) + "</text>\n";
  }
}

void write_svg(const fs::path& path, double width, double height, const std::string& body) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write plot to " + path.string());
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << fmt(width) << "' height='"
      << fmt(height) << "' viewBox='0 0 " << fmt(width) << " " << fmt(height) << "'>\n"
      << "<rect width='100%' height='100%' fill='white'/>\n"
      << body << "</svg>\n";
}

std::string title_text(const std::string& title, double width) {
  return "<text x='" + fmt(width / 2) +
         "' y='20' font-size='14' text-anchor='middle' fill='#111'>" + escape(title) +
         "</text>\n";
}

}  // namespace

const std::string& palette_color(int i) {
  static const std::vector<std::string> colors{"#1f6fb2", "#d6552c", "#3d9142", "#8458b3",
                                               "#b08c1e", "#4aa3a2", "#c23f77", "#6b6b6b"};
  return colors[static_cast<std::size_t>(i) % colors.size()];
}

void write_line_svg(const fs::path& path, const std::string& title, const std::string& x_label,
                    const std::string& y_label, const std::vector<Series>& series) {
  const double W = 800, H = 520;
  Mapper m;
  m.r = {60, 36, W - 90, H - 100};
  for (const auto& s : series) extend_bounds(m.b, s);
  m.b.finalize();

  std::string body = title_text(title, W);
  draw_frame(body, m, x_label, y_label);
  std::vector<std::pair<std::string, std::string>> entries;
  for (const auto& s : series) {
    draw_series(body, m, s);
    if (!s.name.empty()) entries.emplace_back(s.name, s.color);
  }
  legend(body, m.r.x0 + m.r.w - 130, m.r.y0 + 18, entries);
  write_svg(path, W, H, body);
}

void write_scatter_svg(const fs::path& path, const std::string& title,
                       const std::string& x_label, const std::string& y_label,
                       const std::vector<ScatterGroup>& groups) {
  const double W = 720, H = 640;
  Mapper m;
  m.r = {60, 36, W - 90, H - 100};
  for (const auto& g : groups)
    for (std::size_t i = 0; i < g.x.size(); ++i) m.b.add(g.x[i], g.y[i]);
  m.b.finalize();

  std::string body = title_text(title, W);
  draw_frame(body, m, x_label, y_label);
  std::vector<std::pair<std::string, std::string>> entries;
  for (const auto& g : groups) {
    for (std::size_t i = 0; i < g.x.size(); ++i)
      body += "<circle cx='" + fmt(m.px(g.x[i])) + "' cy='" + fmt(m.py(g.y[i])) + "' r='" +
              fmt(g.radius) + "' fill='" + g.color + "' fill-opacity='0.55'/>\n";
    if (!g.name.empty()) entries.emplace_back(g.name, g.color);
  }
  legend(body, m.r.x0 + m.r.w - 130, m.r.y0 + 18, entries);
  write_svg(path, W, H, body);
}

void write_panel_grid_svg(const fs::path& path, const std::string& title,
                          const std::vector<Panel>& panels, int columns) {
  if (panels.empty()) throw ValidationError("panel grid needs at least one panel");
  columns = std::max(1, std::min<int>(columns, static_cast<int>(panels.size())));
  const int rows = (static_cast<int>(panels.size()) + columns - 1) / columns;
  const double PW = 300, PH = 220, PAD = 18;
  const double W = PAD + columns * (PW + PAD), H = 40 + rows * (PH + PAD + 20);

  std::string body = title_text(title, W);
  std::vector<std::pair<std::string, std::string>> entries;
  for (std::size_t k = 0; k < panels.size(); ++k) {
    const int r = static_cast<int>(k) / columns, c = static_cast<int>(k) % columns;
    Mapper m;
    m.r = {PAD + c * (PW + PAD) + 38, 40 + r * (PH + PAD + 20), PW - 48, PH - 40};
    for (const auto& s : panels[k].series) extend_bounds(m.b, s);
    m.b.finalize();
    body += "<text x='" + fmt(m.r.x0 + m.r.w / 2) + "' y='" + fmt(m.r.y0 - 5) +
            "' font-size='11' text-anchor='middle' fill='#222'>" + escape(panels[k].title) +
            "</text>\n";
    draw_frame(body, m, "", "");
    for (const auto& s : panels[k].series) {
      draw_series(body, m, s);
      if (k == 0 && !s.name.empty()) entries.emplace_back(s.name, s.color);
    }
  }
  legend(body, W - 150, 16, entries);
  write_svg(path, W, H, body);
}

}  // namespace pgcgan::plot
