#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "shaperank/core/error.hpp"

namespace shaperank::cli {

namespace {

std::string esc(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string val(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::string header(double width, double height, const std::string& title,
                   const std::string& provenance) {
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) +
                    "\" height=\"" + num(height) + "\" viewBox=\"0 0 " + num(width) +
                    " " + num(height) + "\">\n";
  out += "<!-- " + esc(provenance) + " -->\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + num(width / 2) +
         "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"14\" font-weight=\"bold\">" +
         esc(title) + "</text>\n";
  return out;
}

std::string text_at(double x, double y, const std::string& s,
                    const std::string& anchor = "start", int size = 11) {
  return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" text-anchor=\"" + anchor +
         "\" font-family=\"sans-serif\" font-size=\"" + std::to_string(size) + "\">" +
         esc(s) + "</text>\n";
}

std::string line_at(double x1, double y1, double x2, double y2,
                    const std::string& stroke = "#444") {
  return "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) +
         "\" y2=\"" + num(y2) + "\" stroke=\"" + stroke + "\" stroke-width=\"1\"/>\n";
}

const char* kPalette[] = {"#2b6cb0", "#c05621", "#2f855a", "#805ad5",
                          "#b83280", "#718096"};

// Blue-white-red diverging scale for a value in [-1, 1].
std::string diverging_color(double v) {
  v = std::clamp(v, -1.0, 1.0);
  int r, g, b;
  if (v < 0) {
    const double t = -v;  // white -> blue
    r = static_cast<int>(std::lround(255 + t * (59 - 255)));
    g = static_cast<int>(std::lround(255 + t * (76 - 255)));
    b = static_cast<int>(std::lround(255 + t * (192 - 255)));
  } else {
    const double t = v;  // white -> red
    r = static_cast<int>(std::lround(255 + t * (180 - 255)));
    g = static_cast<int>(std::lround(255 + t * (4 - 255)));
    b = static_cast<int>(std::lround(255 + t * (38 - 255)));
  }
  char buf[16];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace

std::string bar_chart_svg(const std::string& title,
                          const std::vector<std::string>& labels,
                          const std::vector<double>& values,
                          const std::string& provenance) {
  if (labels.size() != values.size() || labels.empty())
    throw InputError("bar chart needs matching, non-empty labels and values");
  const double row_h = 24, left = 150, top = 40, bar_max = 420;
  const double width = left + bar_max + 70;
  const double height = top + row_h * static_cast<double>(labels.size()) + 20;
  double vmax = 0;
  for (double v : values) vmax = std::max(vmax, std::abs(v));
  if (vmax == 0) vmax = 1;

  std::string out = header(width, height, title, provenance);
  for (size_t i = 0; i < labels.size(); ++i) {
    const double y = top + row_h * static_cast<double>(i);
    const double w = std::abs(values[i]) / vmax * bar_max;
    out += text_at(left - 8, y + row_h * 0.7, labels[i], "end");
    out += "<rect x=\"" + num(left) + "\" y=\"" + num(y + 4) + "\" width=\"" + num(w) +
           "\" height=\"" + num(row_h - 8) + "\" fill=\"" +
           (values[i] < 0 ? "#c05621" : "#2b6cb0") + "\"/>\n";
    out += text_at(left + w + 6, y + row_h * 0.7, val(values[i]));
  }
  out += line_at(left, top, left, top + row_h * static_cast<double>(labels.size()));
  out += "</svg>\n";
  return out;
}

std::string line_chart_svg(const std::string& title,
                           const std::vector<Series>& series,
                           const std::string& x_label, const std::string& y_label,
                           const std::string& provenance) {
  if (series.empty()) throw InputError("line chart needs at least one series");
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const Series& s : series) {
    if (s.x.size() != s.y.size() || s.x.size() < 2)
      throw InputError("series '" + s.name + "' needs >= 2 aligned points");
    for (double v : s.x) { xmin = std::min(xmin, v); xmax = std::max(xmax, v); }
    for (double v : s.y) { ymin = std::min(ymin, v); ymax = std::max(ymax, v); }
  }
  if (xmax == xmin) { xmax += 0.5; xmin -= 0.5; }
  if (ymax == ymin) { ymax += 0.5; ymin -= 0.5; }

  const double left = 70, top = 40, plot_w = 480, plot_h = 260;
  const double width = left + plot_w + 150, height = top + plot_h + 50;
  const auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * plot_w; };
  const auto py = [&](double y) { return top + (ymax - y) / (ymax - ymin) * plot_h; };

  std::string out = header(width, height, title, provenance);
  out += line_at(left, top, left, top + plot_h);
  out += line_at(left, top + plot_h, left + plot_w, top + plot_h);
  out += text_at(left - 6, py(ymin) + 4, val(ymin), "end");
  out += text_at(left - 6, py(ymax) + 4, val(ymax), "end");
  out += text_at(px(xmin), top + plot_h + 16, val(xmin), "middle");
  out += text_at(px(xmax), top + plot_h + 16, val(xmax), "middle");
  out += text_at(left + plot_w / 2, top + plot_h + 34, x_label, "middle");
  out += text_at(left - 50, top - 10, y_label);

  for (size_t s = 0; s < series.size(); ++s) {
    const std::string color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
    std::string points;
    for (size_t i = 0; i < series[s].x.size(); ++i)
      points += num(px(series[s].x[i])) + "," + num(py(series[s].y[i])) + " ";
    out += "<polyline fill=\"none\" stroke=\"" + color +
           "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
    const double ly = top + 16 * static_cast<double>(s);
    out += line_at(left + plot_w + 14, ly + 8, left + plot_w + 34, ly + 8, color);
    out += text_at(left + plot_w + 40, ly + 12, series[s].name);
  }
  out += "</svg>\n";
  return out;
}

std::string heatmap_svg(const std::string& title,
                        const std::vector<std::string>& labels,
                        const std::vector<std::vector<double>>& matrix,
                        const std::string& provenance) {
  const size_t n = labels.size();
  if (n == 0 || matrix.size() != n)
    throw InputError("heatmap needs a square matrix matching its labels");
  for (const auto& row : matrix)
    if (row.size() != n) throw InputError("heatmap matrix is not square");

  const double cell = 56, left = 130, top = 60;
  const double width = left + cell * static_cast<double>(n) + 20;
  const double height = top + cell * static_cast<double>(n) + 20;
  std::string out = header(width, height, title, provenance);
  for (size_t j = 0; j < n; ++j)
    out += text_at(left + cell * (static_cast<double>(j) + 0.5), top - 8, labels[j],
                   "middle");
  for (size_t i = 0; i < n; ++i) {
    const double y = top + cell * static_cast<double>(i);
    out += text_at(left - 8, y + cell / 2 + 4, labels[i], "end");
    for (size_t j = 0; j < n; ++j) {
      const double x = left + cell * static_cast<double>(j);
      out += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(cell) +
             "\" height=\"" + num(cell) + "\" fill=\"" + diverging_color(matrix[i][j]) +
             "\" stroke=\"#999\"/>\n";
      const bool dark = std::abs(matrix[i][j]) > 0.6;
      out += "<text x=\"" + num(x + cell / 2) + "\" y=\"" + num(y + cell / 2 + 4) +
             "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\"" +
             (dark ? " fill=\"white\"" : "") + ">" + esc(val(matrix[i][j])) +
             "</text>\n";
    }
  }
  out += "</svg>\n";
  return out;
}

std::string dendrogram_svg(const std::string& title,
                           const crosscat::Dendrogram& dendrogram,
                           const std::string& provenance) {
  const int n = static_cast<int>(dendrogram.labels.size());
  if (n < 2 || dendrogram.merges.size() != static_cast<size_t>(n - 1))
    throw InputError("dendrogram needs n labels and n-1 merges");

  // Leaf order that avoids crossings: in-order traversal of the merge tree.
  std::vector<std::pair<int, int>> children(static_cast<size_t>(n - 1));
  for (int t = 0; t < n - 1; ++t)
    children[static_cast<size_t>(t)] = {dendrogram.merges[static_cast<size_t>(t)].a,
                                        dendrogram.merges[static_cast<size_t>(t)].b};
  std::vector<int> order;
  const auto collect = [&](auto&& self, int cluster) -> void {
    if (cluster < n) {
      order.push_back(cluster);
      return;
    }
    const auto& [a, b] = children[static_cast<size_t>(cluster - n)];
    self(self, a);
    self(self, b);
  };
  collect(collect, n + (n - 2));

  const double leaf_gap = 90, left = 60, top = 40, plot_h = 220;
  const double width = left + leaf_gap * static_cast<double>(n) + 20;
  const double height = top + plot_h + 60;
  double dmax = 0;
  for (const auto& m : dendrogram.merges) dmax = std::max(dmax, m.distance);
  if (dmax == 0) dmax = 1;
  const auto py = [&](double d) { return top + plot_h * (1.0 - d / dmax); };

  std::vector<double> x(static_cast<size_t>(2 * n - 1), 0.0);
  std::vector<double> h(static_cast<size_t>(2 * n - 1), 0.0);
  for (int i = 0; i < n; ++i)
    x[static_cast<size_t>(order[static_cast<size_t>(i)])] =
        left + leaf_gap * (static_cast<double>(i) + 0.5);

  std::string out = header(width, height, title, provenance);
  for (int i = 0; i < n; ++i)
    out += text_at(x[static_cast<size_t>(i)], top + plot_h + 18,
                   dendrogram.labels[static_cast<size_t>(i)], "middle");
  out += text_at(left - 40, py(dmax) + 4, val(dmax));
  out += text_at(left - 40, py(0) + 4, "0");

  for (int t = 0; t < n - 1; ++t) {
    const auto& m = dendrogram.merges[static_cast<size_t>(t)];
    const double xa = x[static_cast<size_t>(m.a)], xb = x[static_cast<size_t>(m.b)];
    const double y = py(m.distance);
    out += line_at(xa, py(h[static_cast<size_t>(m.a)]), xa, y, "#2b6cb0");
    out += line_at(xb, py(h[static_cast<size_t>(m.b)]), xb, y, "#2b6cb0");
    out += line_at(xa, y, xb, y, "#2b6cb0");
    x[static_cast<size_t>(n + t)] = (xa + xb) / 2;
    h[static_cast<size_t>(n + t)] = m.distance;
    out += text_at((xa + xb) / 2, y - 4, val(m.distance), "middle", 10);
  }
  out += "</svg>\n";
  return out;
}

}  // namespace shaperank::cli
