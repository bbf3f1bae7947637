#include "spde/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace spde {

namespace {

constexpr double kWidth = 720.0, kHeight = 440.0;
constexpr double kMarginL = 70.0, kMarginR = 20.0, kMarginT = 40.0, kMarginB = 50.0;

double transform(double v, bool log_scale) {
    if (!log_scale) return v;
    return std::log10(std::max(v, 1e-300));
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace

void write_svg(const SvgFigure& figure, const std::filesystem::path& path) {
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : figure.series) {
        for (size_t i = 0; i < s.x.size(); ++i) {
            const double x = transform(s.x[i], figure.log_x);
            const double y = transform(s.y[i], figure.log_y);
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            xmin = std::min(xmin, x); xmax = std::max(xmax, x);
            ymin = std::min(ymin, y); ymax = std::max(ymax, y);
        }
    }
    if (!(xmin < xmax)) { xmin -= 0.5; xmax += 0.5; }
    if (!(ymin < ymax)) { ymin -= 0.5; ymax += 0.5; }
    const double pad_y = 0.05 * (ymax - ymin);
    ymin -= pad_y; ymax += pad_y;

    auto px = [&](double x) {
        return kMarginL + (transform(x, figure.log_x) - xmin) / (xmax - xmin) *
                              (kWidth - kMarginL - kMarginR);
    };
    auto py = [&](double y) {
        return kHeight - kMarginB -
               (transform(y, figure.log_y) - ymin) / (ymax - ymin) *
                   (kHeight - kMarginT - kMarginB);
    };

    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path.string());
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
       << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
       << kHeight << "\">\n";
    os << "<!-- data\n";
    for (const auto& s : figure.series) {
        os << "series: " << s.label << "\n";
        for (size_t i = 0; i < s.x.size(); ++i)
            os << fmt(s.x[i]) << "," << fmt(s.y[i]) << "\n";
    }
    os << "-->\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
          "font-family=\"sans-serif\" font-size=\"16\">" << figure.title
       << "</text>\n";

    // axes
    os << "<line x1=\"" << kMarginL << "\" y1=\"" << kHeight - kMarginB
       << "\" x2=\"" << kWidth - kMarginR << "\" y2=\"" << kHeight - kMarginB
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << kMarginL << "\" y1=\"" << kMarginT << "\" x2=\""
       << kMarginL << "\" y2=\"" << kHeight - kMarginB
       << "\" stroke=\"black\"/>\n";
    for (int tick = 0; tick <= 4; ++tick) {
        const double fx = xmin + tick / 4.0 * (xmax - xmin);
        const double fy = ymin + tick / 4.0 * (ymax - ymin);
        const double sx = kMarginL + tick / 4.0 * (kWidth - kMarginL - kMarginR);
        const double sy = kHeight - kMarginB -
                          tick / 4.0 * (kHeight - kMarginT - kMarginB);
        const double label_x = figure.log_x ? std::pow(10.0, fx) : fx;
        const double label_y = figure.log_y ? std::pow(10.0, fy) : fy;
        os << "<text x=\"" << sx << "\" y=\"" << kHeight - kMarginB + 18
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
              "font-size=\"11\">" << fmt(label_x) << "</text>\n";
        os << "<text x=\"" << kMarginL - 6 << "\" y=\"" << sy + 4
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
              "font-size=\"11\">" << fmt(label_y) << "</text>\n";
    }
    os << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 10
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"13\">" << figure.x_label << "</text>\n";
    os << "<text x=\"16\" y=\"" << kHeight / 2
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"13\" transform=\"rotate(-90 16 " << kHeight / 2
       << ")\">" << figure.y_label << "</text>\n";

    double legend_y = kMarginT + 6;
    for (const auto& s : figure.series) {
        os << "<polyline fill=\"none\" stroke=\"" << s.color
           << "\" stroke-width=\"1.5\" points=\"";
        for (size_t i = 0; i < s.x.size(); ++i) {
            const double x = px(s.x[i]);
            const double y = py(s.y[i]);
            if (std::isfinite(x) && std::isfinite(y))
                os << fmt(x) << "," << fmt(y) << " ";
        }
        os << "\"/>\n";
        os << "<text x=\"" << kWidth - kMarginR - 6 << "\" y=\"" << legend_y
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
              "font-size=\"12\" fill=\"" << s.color << "\">" << s.label
           << "</text>\n";
        legend_y += 16;
    }
    os << "</svg>\n";
}

}  // namespace spde
