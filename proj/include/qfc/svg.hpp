#pragma once

// Minimal SVG line charts: axes, tick labels, one polyline per series and a
// legend. Presentation fidelity is out of scope; these exist so sweeps can be
// eyeballed without external tooling.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace qfc {

struct SvgSeries {
    std::string label;
    std::vector<std::pair<double, double>> points;
};

inline std::string render_svg_line_chart(const std::string& title,
                                         const std::string& x_label,
                                         const std::string& y_label,
                                         const std::vector<SvgSeries>& series) {
    constexpr double width = 720, height = 480;
    constexpr double ml = 80, mr = 24, mt = 40, mb = 56;
    const double plot_w = width - ml - mr, plot_h = height - mt - mb;

    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    bool have = false;
    for (const auto& s : series)
        for (const auto& [x, y] : s.points) {
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            if (!have) {
                xmin = xmax = x;
                ymin = ymax = y;
                have = true;
            }
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    const double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;

    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * plot_w; };
    auto py = [&](double y) { return mt + plot_h - (y - ymin) / (ymax - ymin) * plot_h; };
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4g", v);
        return std::string(buf);
    };

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b"};
    std::string out;
    out += "<svg xmlns='http://www.w3.org/2000/svg' width='720' height='480' "
           "viewBox='0 0 720 480'>\n";
    out += "<rect width='720' height='480' fill='white'/>\n";
    out += "<text x='360' y='24' text-anchor='middle' font-size='16' "
           "font-family='sans-serif'>" + title + "</text>\n";

    for (int i = 0; i <= 5; ++i) {
        const double fx = xmin + (xmax - xmin) * i / 5.0;
        const double fy = ymin + (ymax - ymin) * i / 5.0;
        out += "<line x1='" + num(px(fx)) + "' y1='" + num(mt) + "' x2='" + num(px(fx)) +
               "' y2='" + num(mt + plot_h) + "' stroke='#dddddd'/>\n";
        out += "<line x1='" + num(ml) + "' y1='" + num(py(fy)) + "' x2='" +
               num(ml + plot_w) + "' y2='" + num(py(fy)) + "' stroke='#dddddd'/>\n";
        out += "<text x='" + num(px(fx)) + "' y='" + num(mt + plot_h + 18) +
               "' text-anchor='middle' font-size='11' font-family='sans-serif'>" +
               num(fx) + "</text>\n";
        out += "<text x='" + num(ml - 8) + "' y='" + num(py(fy) + 4) +
               "' text-anchor='end' font-size='11' font-family='sans-serif'>" + num(fy) +
               "</text>\n";
    }
    out += "<rect x='" + num(ml) + "' y='" + num(mt) + "' width='" + num(plot_w) +
           "' height='" + num(plot_h) + "' fill='none' stroke='black'/>\n";
    out += "<text x='" + num(ml + plot_w / 2) + "' y='" + num(height - 12) +
           "' text-anchor='middle' font-size='13' font-family='sans-serif'>" + x_label +
           "</text>\n";
    out += "<text x='16' y='" + num(mt + plot_h / 2) +
           "' text-anchor='middle' font-size='13' font-family='sans-serif' "
           "transform='rotate(-90 16 " + num(mt + plot_h / 2) + ")'>" + y_label +
           "</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = palette[s % 6];
        std::string path;
        bool pen_down = false;
        for (const auto& [x, y] : series[s].points) {
            if (!std::isfinite(x) || !std::isfinite(y)) {
                pen_down = false;
                continue;
            }
            path += pen_down ? " L" : " M";
            path += num(px(x)) + " " + num(py(y));
            pen_down = true;
        }
        if (!path.empty())
            out += "<path d='" + path + "' fill='none' stroke='" + color +
                   "' stroke-width='1.5'/>\n";
        const double ly = mt + 16 + 16 * static_cast<double>(s);
        out += "<line x1='" + num(ml + plot_w - 150) + "' y1='" + num(ly) + "' x2='" +
               num(ml + plot_w - 126) + "' y2='" + num(ly) + "' stroke='" + color +
               "' stroke-width='2'/>\n";
        out += "<text x='" + num(ml + plot_w - 120) + "' y='" + num(ly + 4) +
               "' font-size='11' font-family='sans-serif'>" + series[s].label +
               "</text>\n";
    }
    out += "</svg>\n";
    return out;
}

}  // namespace qfc
