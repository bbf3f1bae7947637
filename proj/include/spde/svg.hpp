#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace spde {

/// Minimal standalone SVG line chart. Series data is also embedded as an
/// XML comment so figures stay self-describing.
struct SvgSeries {
    std::string label;
    std::string color = "#1f77b4";
    std::vector<double> x;
    std::vector<double> y;
};

struct SvgFigure {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
    std::vector<SvgSeries> series;
};

void write_svg(const SvgFigure& figure, const std::filesystem::path& path);

}  // namespace spde
