#include "stentx/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>

namespace stentx {

namespace {

constexpr double kWidth = 640, kHeight = 480;
constexpr double kLeft = 70, kRight = 150, kTop = 40, kBottom = 60;
constexpr std::array<const char*, 6> kColors = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void add(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void finish() {
        if (!(lo <= hi)) lo = 0, hi = 1;
        if (lo == hi) lo -= 0.5, hi += 0.5;
        const double pad = 0.05 * (hi - lo);
        lo -= pad;
        hi += pad;
    }
};

}  // namespace

std::string render_svg(const SvgPlot& plot) {
    Range xr, yr;
    bool has_bars = false;
    for (const auto& s : plot.series) {
        has_bars |= s.style == SvgStyle::bars;
        for (const auto& [x, y] : s.points) xr.add(x), yr.add(y);
    }
    if (has_bars) yr.add(0);
    if (plot.horizontal_line) yr.add(*plot.horizontal_line);
    if (plot.identity_line) {
        const double lo = std::min(xr.lo, yr.lo), hi = std::max(xr.hi, yr.hi);
        xr = yr = Range{lo, hi};
    }
    xr.finish();
    yr.finish();
    const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
    auto sx = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
    auto sy = [&](double y) { return kTop + ph - (y - yr.lo) / (yr.hi - yr.lo) * ph; };

    std::string o;
    o += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    o += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + num(kWidth) + "\" height=\"" +
         num(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o += "<text x=\"" + num(kWidth / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" + escape(plot.title) +
         "</text>\n";
    o += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
         "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double xv = xr.lo + (xr.hi - xr.lo) * i / 5, yv = yr.lo + (yr.hi - yr.lo) * i / 5;
        o += "<text x=\"" + num(sx(xv)) + "\" y=\"" + num(kTop + ph + 18) + "\" text-anchor=\"middle\">" + num(xv) +
             "</text>\n";
        o += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(sy(yv) + 4) + "\" text-anchor=\"end\">" + num(yv) +
             "</text>\n";
    }
    o += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(kHeight - 15) + "\" text-anchor=\"middle\">" +
         escape(plot.x_label) + "</text>\n";
    o += "<text transform=\"translate(18," + num(kTop + ph / 2) + ") rotate(-90)\" text-anchor=\"middle\">" +
         escape(plot.y_label) + "</text>\n";
    if (plot.identity_line) {
        const double lo = std::max(xr.lo, yr.lo), hi = std::min(xr.hi, yr.hi);
        o += "<line x1=\"" + num(sx(lo)) + "\" y1=\"" + num(sy(lo)) + "\" x2=\"" + num(sx(hi)) + "\" y2=\"" +
             num(sy(hi)) + "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
    }
    if (plot.horizontal_line) {
        const double y = sy(*plot.horizontal_line);
        o += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(y) + "\" x2=\"" + num(kLeft + pw) + "\" y2=\"" + num(y) +
             "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
    }

    int bar_series = 0, bar_index = 0;
    for (const auto& s : plot.series) bar_series += s.style == SvgStyle::bars;
    for (std::size_t k = 0; k < plot.series.size(); ++k) {
        const auto& s = plot.series[k];
        const char* color = kColors[k % kColors.size()];
        o += "<g fill=\"" + std::string(color) + "\" stroke=\"" + color + "\">\n";
        if (s.style == SvgStyle::line && !s.points.empty()) {
            // non-finite points split the line into separate runs
            std::string run;
            auto flush = [&] {
                if (!run.empty()) o += "<polyline fill=\"none\" stroke-width=\"1.5\" points=\"" + run + "\"/>\n";
                run.clear();
            };
            for (const auto& [x, y] : s.points) {
                if (std::isfinite(x) && std::isfinite(y)) {
                    run += num(sx(x)) + "," + num(sy(y)) + " ";
                } else {
                    flush();
                }
            }
            flush();
        } else if (s.style == SvgStyle::markers) {
            for (const auto& [x, y] : s.points)
                if (std::isfinite(x) && std::isfinite(y))
                    o += "<circle cx=\"" + num(sx(x)) + "\" cy=\"" + num(sy(y)) + "\" r=\"2.5\" fill-opacity=\"0.6\"/>\n";
        } else if (s.style == SvgStyle::bars) {
            const double slot = pw / std::max<std::size_t>(1, s.points.size() + 1) / std::max(1, bar_series);
            for (const auto& [x, y] : s.points) {
                if (!std::isfinite(x) || !std::isfinite(y)) continue;
                const double x0 = sx(x) - slot * bar_series / 2 + slot * bar_index;
                const double y0 = std::min(sy(y), sy(0)), h = std::abs(sy(y) - sy(0));
                o += "<rect x=\"" + num(x0) + "\" y=\"" + num(y0) + "\" width=\"" + num(slot * 0.9) + "\" height=\"" +
                     num(h) + "\" stroke=\"none\"/>\n";
            }
            ++bar_index;
        }
        const double ly = kTop + 12 + 18 * static_cast<double>(k);
        o += "<rect x=\"" + num(kWidth - kRight + 12) + "\" y=\"" + num(ly - 9) + "\" width=\"10\" height=\"10\"/>\n";
        o += "<text x=\"" + num(kWidth - kRight + 28) + "\" y=\"" + num(ly) + "\" stroke=\"none\" fill=\"black\">" +
             escape(s.name) + "</text>\n";
        o += "</g>\n";
    }
    o += "</svg>\n";
    return o;
}

}  // namespace stentx
