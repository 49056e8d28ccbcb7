#pragma once

// Minimal SVG line plots.

#include <string>
#include <vector>

namespace locmix {

struct PlotSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
    bool markers_only = false;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
};

std::string render_svg(const PlotSpec& spec, const std::vector<PlotSeries>& series);
void write_svg(const std::string& path, const PlotSpec& spec, const std::vector<PlotSeries>& series);

}  // namespace locmix
