#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace stentx {

enum class SvgStyle { markers, line, bars };

struct SvgSeries {
    std::string name;
    std::vector<std::pair<double, double>> points;
    SvgStyle style = SvgStyle::markers;
};

struct SvgPlot {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<SvgSeries> series;
    bool identity_line = false;          // y = x
    std::optional<double> horizontal_line;
};

/// Standalone SVG 1.1 document; output depends only on the inputs.
std::string render_svg(const SvgPlot& plot);

}  // namespace stentx
