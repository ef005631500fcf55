#include "wicksell/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "wicksell/io.hpp"

namespace wicksell {
namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 560.0;
constexpr double kMarginLeft = 70.0;
constexpr double kMarginRight = 30.0;
constexpr double kMarginTop = 40.0;
constexpr double kMarginBottom = 55.0;

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                         "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string fmt_tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// Round tick step to 1/2/5 x 10^k.
double nice_step(double span) {
    const double raw = span / 6.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double r = raw / mag;
    if (r < 1.5) return mag;
    if (r < 3.5) return 2.0 * mag;
    if (r < 7.5) return 5.0 * mag;
    return 10.0 * mag;
}

}  // namespace

void emit_plot(const std::vector<PlotSeries>& series, const std::string& path,
               const std::string& title, const std::string& x_label,
               const std::string& y_label) {
    double xmin = 0.0, xmax = 0.0, ymin = 0.0, ymax = 0.0;
    bool any = false;
    for (const auto& s : series) {
        for (const auto& [x, y] : s.points) {
            if (!any) {
                xmin = xmax = x;
                ymin = ymax = y;
                any = true;
            }
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    }
    if (!any) throw std::invalid_argument("emit_plot: no points to draw");
    if (xmax == xmin) {
        xmin -= 1.0;
        xmax += 1.0;
    }
    if (ymax == ymin) {
        ymin -= 1.0;
        ymax += 1.0;
    }
    const double px0 = kMarginLeft, px1 = kWidth - kMarginRight;
    const double py0 = kHeight - kMarginBottom, py1 = kMarginTop;
    const auto sx = [&](double x) { return px0 + (x - xmin) / (xmax - xmin) * (px1 - px0); };
    const auto sy = [&](double y) { return py0 + (y - ymin) / (ymax - ymin) * (py1 - py0); };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
    svg << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
    if (!title.empty())
        svg << "<text x=\"" << kWidth / 2
            << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
               "font-size=\"16\">"
            << title << "</text>\n";

    // Axes box and ticks.
    svg << "<rect x=\"" << fmt(px0) << "\" y=\"" << fmt(py1) << "\" width=\"" << fmt(px1 - px0)
        << "\" height=\"" << fmt(py0 - py1)
        << "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    const double xstep = nice_step(xmax - xmin);
    for (double t = std::ceil(xmin / xstep) * xstep; t <= xmax + 1e-12 * xstep; t += xstep) {
        svg << "<line x1=\"" << fmt(sx(t)) << "\" y1=\"" << fmt(py0) << "\" x2=\"" << fmt(sx(t))
            << "\" y2=\"" << fmt(py0 + 5) << "\" stroke=\"#333333\"/>\n";
        svg << "<text x=\"" << fmt(sx(t)) << "\" y=\"" << fmt(py0 + 20)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << fmt_tick(t) << "</text>\n";
    }
    const double ystep = nice_step(ymax - ymin);
    for (double t = std::ceil(ymin / ystep) * ystep; t <= ymax + 1e-12 * ystep; t += ystep) {
        svg << "<line x1=\"" << fmt(px0 - 5) << "\" y1=\"" << fmt(sy(t)) << "\" x2=\""
            << fmt(px0) << "\" y2=\"" << fmt(sy(t)) << "\" stroke=\"#333333\"/>\n";
        svg << "<text x=\"" << fmt(px0 - 8) << "\" y=\"" << fmt(sy(t) + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << fmt_tick(t) << "</text>\n";
    }
    if (!x_label.empty())
        svg << "<text x=\"" << fmt((px0 + px1) / 2) << "\" y=\"" << fmt(kHeight - 12)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
            << x_label << "</text>\n";
    if (!y_label.empty())
        svg << "<text x=\"18\" y=\"" << fmt((py0 + py1) / 2)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
               "transform=\"rotate(-90 18 "
            << fmt((py0 + py1) / 2) << ")\">" << y_label << "</text>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* color = kColors[si % (sizeof(kColors) / sizeof(kColors[0]))];
        if (s.points.empty()) continue;
        if (s.style == PlotSeries::Style::kScatter) {
            for (const auto& [x, y] : s.points)
                svg << "<circle cx=\"" << fmt(sx(x)) << "\" cy=\"" << fmt(sy(y))
                    << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
        } else {
            svg << "<polyline fill=\"none\" stroke=\"" << color
                << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < s.points.size(); ++i) {
                const auto& [x, y] = s.points[i];
                if (s.style == PlotSeries::Style::kStep && i > 0)
                    svg << fmt(sx(x)) << "," << fmt(sy(s.points[i - 1].second)) << " ";
                svg << fmt(sx(x)) << "," << fmt(sy(y)) << " ";
            }
            svg << "\"/>\n";
        }
        // Legend entry.
        const double ly = kMarginTop + 16.0 * static_cast<double>(si) + 8.0;
        svg << "<rect x=\"" << fmt(px1 - 150) << "\" y=\"" << fmt(ly - 8)
            << "\" width=\"10\" height=\"10\" fill=\"" << color << "\"/>\n";
        svg << "<text x=\"" << fmt(px1 - 135) << "\" y=\"" << fmt(ly + 1)
            << "\" font-family=\"sans-serif\" font-size=\"11\">" << s.label << "</text>\n";
    }
    svg << "</svg>\n";
    write_text_file(path, svg.str());
}

}  // namespace wicksell
