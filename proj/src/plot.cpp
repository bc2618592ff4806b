#include "routeflow/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace routeflow {

namespace {

constexpr int kWidth = 800;
constexpr int kHeight = 500;
constexpr int kLeft = 70, kRight = 180, kTop = 40, kBottom = 50;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf"};

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::string fixed1(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.1f", v);
    return buf;
}

double nice_step(double span, int target_ticks) {
    double raw = span / target_ticks;
    double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double frac = raw / mag;
    double step = frac <= 1 ? 1 : frac <= 2 ? 2 : frac <= 5 ? 5 : 10;
    return step * mag;
}

}  // namespace

std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<PlotSeries>& series,
                           bool log_y) {
    double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
    double y_min = x_min, y_max = -x_min;
    for (const PlotSeries& s : series) {
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            double y = s.y[i];
            if (!std::isfinite(s.x[i]) || !std::isfinite(y)) continue;
            if (log_y && !(y > 0.0)) continue;
            double yt = log_y ? std::log10(y) : y;
            x_min = std::min(x_min, s.x[i]);
            x_max = std::max(x_max, s.x[i]);
            y_min = std::min(y_min, yt);
            y_max = std::max(y_max, yt);
        }
    }

    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                      std::to_string(kWidth) + "\" height=\"" + std::to_string(kHeight) +
                      "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out += "<text x=\"" + std::to_string(kWidth / 2) +
           "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" + title + "</text>\n";

    if (!(x_min < x_max) || !(y_min <= y_max)) {
        out += "<text x=\"" + std::to_string(kWidth / 2) + "\" y=\"" +
               std::to_string(kHeight / 2) + "\" text-anchor=\"middle\">no data</text>\n</svg>\n";
        return out;
    }
    if (y_min == y_max) {
        y_min -= 0.5;
        y_max += 0.5;
    }

    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    auto sx = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * plot_w; };
    auto sy = [&](double yt) { return kTop + (y_max - yt) / (y_max - y_min) * plot_h; };

    out += "<rect x=\"" + std::to_string(kLeft) + "\" y=\"" + std::to_string(kTop) +
           "\" width=\"" + num(plot_w) + "\" height=\"" + num(plot_h) +
           "\" fill=\"none\" stroke=\"#333\"/>\n";

    double x_step = nice_step(x_max - x_min, 6);
    for (double x = std::ceil(x_min / x_step) * x_step; x <= x_max + 1e-9 * x_step;
         x += x_step) {
        double px = sx(x);
        out += "<line x1=\"" + fixed1(px) + "\" y1=\"" + std::to_string(kTop + (int)plot_h) +
               "\" x2=\"" + fixed1(px) + "\" y2=\"" +
               std::to_string(kTop + (int)plot_h + 5) + "\" stroke=\"#333\"/>\n";
        out += "<text x=\"" + fixed1(px) + "\" y=\"" +
               std::to_string(kTop + (int)plot_h + 20) + "\" text-anchor=\"middle\">" + num(x) +
               "</text>\n";
    }

    double y_step = log_y ? std::max(1.0, std::ceil((y_max - y_min) / 8.0))
                          : nice_step(y_max - y_min, 6);
    for (double yt = std::ceil(y_min / y_step) * y_step; yt <= y_max + 1e-9 * y_step;
         yt += y_step) {
        double py = sy(yt);
        out += "<line x1=\"" + std::to_string(kLeft - 5) + "\" y1=\"" + fixed1(py) +
               "\" x2=\"" + std::to_string(kLeft) + "\" y2=\"" + fixed1(py) +
               "\" stroke=\"#333\"/>\n";
        out += "<line x1=\"" + std::to_string(kLeft) + "\" y1=\"" + fixed1(py) + "\" x2=\"" +
               num(kLeft + plot_w) + "\" y2=\"" + fixed1(py) +
               "\" stroke=\"#ddd\" stroke-dasharray=\"3,3\"/>\n";
        std::string label = log_y ? "1e" + num(yt) : num(yt);
        out += "<text x=\"" + std::to_string(kLeft - 8) + "\" y=\"" + fixed1(py + 4) +
               "\" text-anchor=\"end\">" + label + "</text>\n";
    }

    out += "<text x=\"" + std::to_string(kLeft + (int)(plot_w / 2)) + "\" y=\"" +
           std::to_string(kHeight - 10) + "\" text-anchor=\"middle\">" + x_label + "</text>\n";
    out += "<text x=\"18\" y=\"" + std::to_string(kTop + (int)(plot_h / 2)) +
           "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
           std::to_string(kTop + (int)(plot_h / 2)) + ")\">" + y_label + "</text>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const PlotSeries& s = series[si];
        const char* color = kPalette[si % (sizeof kPalette / sizeof *kPalette)];
        std::string points;
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            double y = s.y[i];
            if (!std::isfinite(s.x[i]) || !std::isfinite(y)) continue;
            if (log_y && !(y > 0.0)) continue;
            double yt = log_y ? std::log10(y) : y;
            if (!points.empty()) points += " ";
            points += fixed1(sx(s.x[i])) + "," + fixed1(sy(yt));
        }
        out += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
               "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
        int ly = kTop + 10 + static_cast<int>(si) * 18;
        out += "<line x1=\"" + num(kLeft + plot_w + 12) + "\" y1=\"" + std::to_string(ly) +
               "\" x2=\"" + num(kLeft + plot_w + 36) + "\" y2=\"" + std::to_string(ly) +
               "\" stroke=\"" + color + "\" stroke-width=\"1.5\"/>\n";
        out += "<text x=\"" + num(kLeft + plot_w + 42) + "\" y=\"" + std::to_string(ly + 4) +
               "\">" + s.label + "</text>\n";
    }
    out += "</svg>\n";
    return out;
}

}  // namespace routeflow
