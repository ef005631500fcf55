#ifndef WICKSELL_SVG_HPP_
#define WICKSELL_SVG_HPP_

#include <string>
#include <utility>
#include <vector>

namespace wicksell {

struct PlotSeries {
    enum class Style { kLine, kStep, kScatter };
    std::string label;
    std::vector<std::pair<double, double>> points;
    Style style = Style::kLine;
};

/// Renders a standalone SVG with axes, tick labels, the given series and a
/// legend. Byte-deterministic for identical input. Step series draw
/// right-continuous steps. Throws if no series has a point or the file
/// cannot be written.
void emit_plot(const std::vector<PlotSeries>& series, const std::string& path,
               const std::string& title = "", const std::string& x_label = "",
               const std::string& y_label = "");

}  // namespace wicksell

#endif  // WICKSELL_SVG_HPP_
