#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

namespace obspinn {

/// Minimal SVG canvas of equally sized panels laid out in a grid.
class SvgFigure {
 public:
  struct Series {
    std::vector<double> x, y;
    std::string color = "#1f77b4";
    bool line = true;   // polyline, otherwise circles
    bool dashed = false;
    std::string label;
  };

  struct Panel {
    std::string title, xlabel, ylabel;
    bool log_y = false;
    std::vector<Series> series;
    std::vector<double> vlines;  // vertical reference lines
  };

  SvgFigure(std::size_t columns, double panel_w = 360, double panel_h = 240) : columns_(columns), w_(panel_w), h_(panel_h) {}

  Panel& add_panel(std::string title) {
    panels_.push_back({});
    panels_.back().title = std::move(title);
    return panels_.back();
  }

  std::string render() const {
    const std::size_t rows = (panels_.size() + columns_ - 1) / std::max<std::size_t>(columns_, 1);
    const double W = w_ * static_cast<double>(columns_), H = h_ * static_cast<double>(std::max<std::size_t>(rows, 1));
    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(W) + "\" height=\"" + num(H) +
                      "\" font-family=\"sans-serif\" font-size=\"11\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::size_t k = 0; k < panels_.size(); ++k)
      out += render_panel(panels_[k], w_ * static_cast<double>(k % columns_), h_ * static_cast<double>(k / columns_));
    out += "</svg>\n";
    return out;
  }

 private:
  static std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
  }
  static std::string tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
  }
  static std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
      if (c == '<') out += "&lt;";
      else if (c == '>') out += "&gt;";
      else if (c == '&') out += "&amp;";
      else out += c;
    }
    return out;
  }

  std::string render_panel(const Panel& p, double ox, double oy) const {
    const double left = ox + 55, right = ox + w_ - 15, top = oy + 25, bottom = oy + h_ - 35;
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    auto ty = [&](double v) { return p.log_y ? std::log10(v) : v; };
    for (const auto& s : p.series)
      for (std::size_t k = 0; k < s.x.size(); ++k) {
        const double y = ty(s.y[k]);
        if (!std::isfinite(s.x[k]) || !std::isfinite(y)) continue;
        x0 = std::min(x0, s.x[k]);
        x1 = std::max(x1, s.x[k]);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
      }
    for (double v : p.vlines) {
      x0 = std::min(x0, v);
      x1 = std::max(x1, v);
    }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 == x0) x0 -= 0.5, x1 += 0.5;
    if (y1 == y0) y0 -= 0.5, y1 += 0.5;
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    auto X = [&](double v) { return left + (v - x0) / (x1 - x0) * (right - left); };
    auto Y = [&](double v) { return bottom - (ty(v) - y0) / (y1 - y0) * (bottom - top); };

    std::string out = "<g>\n";
    out += "<text x=\"" + num((left + right) / 2) + "\" y=\"" + num(oy + 16) + "\" text-anchor=\"middle\" font-weight=\"bold\">" +
           escape(p.title) + "</text>\n";
    out += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(right - left) + "\" height=\"" + num(bottom - top) +
           "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (int k = 0; k <= 4; ++k) {
      const double xv = x0 + (x1 - x0) * k / 4, yv = y0 + (y1 - y0) * k / 4;
      const double px = left + (right - left) * k / 4, py = bottom - (bottom - top) * k / 4;
      out += "<text x=\"" + num(px) + "\" y=\"" + num(bottom + 14) + "\" text-anchor=\"middle\">" + tick(xv) + "</text>\n";
      out += "<text x=\"" + num(left - 4) + "\" y=\"" + num(py + 4) + "\" text-anchor=\"end\">" +
             (p.log_y ? "1e" + tick(yv) : tick(yv)) + "</text>\n";
    }
    out += "<text x=\"" + num((left + right) / 2) + "\" y=\"" + num(bottom + 29) + "\" text-anchor=\"middle\">" + escape(p.xlabel) + "</text>\n";
    if (!p.ylabel.empty())
      out += "<text x=\"" + num(ox + 12) + "\" y=\"" + num((top + bottom) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 " +
             num(ox + 12) + " " + num((top + bottom) / 2) + ")\">" + escape(p.ylabel) + "</text>\n";
    for (double v : p.vlines)
      out += "<line x1=\"" + num(X(v)) + "\" y1=\"" + num(top) + "\" x2=\"" + num(X(v)) + "\" y2=\"" + num(bottom) +
             "\" stroke=\"#999\" stroke-dasharray=\"2,3\"/>\n";
    double legend_y = top + 12;
    for (const auto& s : p.series) {
      if (s.line) {
        std::string pts;
        for (std::size_t k = 0; k < s.x.size(); ++k)
          if (std::isfinite(ty(s.y[k]))) pts += num(X(s.x[k])) + "," + num(Y(s.y[k])) + " ";
        out += "<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"1.5\"" + (s.dashed ? " stroke-dasharray=\"6,4\"" : "") +
               " points=\"" + pts + "\"/>\n";
      } else {
        for (std::size_t k = 0; k < s.x.size(); ++k)
          if (std::isfinite(ty(s.y[k])))
            out += "<circle cx=\"" + num(X(s.x[k])) + "\" cy=\"" + num(Y(s.y[k])) + "\" r=\"2.5\" fill=\"" + s.color + "\"/>\n";
      }
      if (!s.label.empty()) {
        out += "<text x=\"" + num(right - 6) + "\" y=\"" + num(legend_y) + "\" text-anchor=\"end\" fill=\"" + s.color + "\">" +
               escape(s.label) + "</text>\n";
        legend_y += 13;
      }
    }
    out += "</g>\n";
    return out;
  }

  std::size_t columns_;
  double w_, h_;
  std::vector<Panel> panels_;
};

}  // namespace obspinn
