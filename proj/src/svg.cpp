#include "locmix/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace locmix {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;
const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else if (c == '&') out += "&amp;";
        else out += c;
    }
    return out;
}

}  // namespace

std::string render_svg(const PlotSpec& spec, const std::vector<PlotSeries>& series)
{
    auto tx = [&](double v) { return spec.log_x ? std::log10(v) : v; };
    auto ty = [&](double v) { return spec.log_y ? std::log10(v) : v; };
    auto usable = [&](double x, double y) {
        return std::isfinite(x) && std::isfinite(y) && (!spec.log_x || x > 0) && (!spec.log_y || y > 0);
    };

    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series)
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i)
            if (usable(s.x[i], s.y[i])) {
                x0 = std::min(x0, tx(s.x[i]));
                x1 = std::max(x1, tx(s.x[i]));
                y0 = std::min(y0, ty(s.y[i]));
                y1 = std::max(y1, ty(s.y[i]));
            }
    if (!std::isfinite(x0)) {
        x0 = y0 = 0;
        x1 = y1 = 1;
    }
    if (x1 - x0 < 1e-300) { x0 -= 0.5; x1 += 0.5; }
    if (y1 - y0 < 1e-300) { y0 -= 0.5; y1 += 0.5; }
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;

    const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
    auto px = [&](double v) { return kLeft + (tx(v) - x0) / (x1 - x0) * pw; };
    auto py = [&](double v) { return kTop + (1.0 - (ty(v) - y0) / (y1 - y0)) * ph; };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(spec.title) << "</text>\n";
    out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double fx = x0 + (x1 - x0) * i / 4.0, fy = y0 + (y1 - y0) * i / 4.0;
        const double vx = spec.log_x ? std::pow(10.0, fx) : fx, vy = spec.log_y ? std::pow(10.0, fy) : fy;
        const double sx = kLeft + pw * i / 4.0, sy = kTop + ph * (1.0 - i / 4.0);
        out << "<text x=\"" << sx << "\" y=\"" << kTop + ph + 16 << "\" text-anchor=\"middle\" font-size=\"11\">" << num(vx) << "</text>\n";
        out << "<text x=\"" << kLeft - 6 << "\" y=\"" << sy + 4 << "\" text-anchor=\"end\" font-size=\"11\">" << num(vy) << "</text>\n";
    }
    out << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 10 << "\" text-anchor=\"middle\" font-size=\"13\">"
        << escape(spec.x_label) << (spec.log_x ? " (log)" : "") << "</text>\n";
    out << "<text x=\"16\" y=\"" << kTop + ph / 2 << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
        << kTop + ph / 2 << ")\">" << escape(spec.y_label) << (spec.log_y ? " (log)" : "") << "</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* color = kColors[k % 6];
        std::ostringstream pts;
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!usable(s.x[i], s.y[i]))
                continue;
            if (s.markers_only)
                out << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
            else
                pts << px(s.x[i]) << "," << py(s.y[i]) << " ";
        }
        if (!s.markers_only)
            out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"" << pts.str() << "\"/>\n";
        out << "<text x=\"" << kLeft + 10 << "\" y=\"" << kTop + 16 + 15 * k << "\" font-size=\"12\" fill=\"" << color
            << "\">" << escape(s.name) << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

void write_svg(const std::string& path, const PlotSpec& spec, const std::vector<PlotSeries>& series)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write '" + path + "'");
    out << render_svg(spec, series);
}

}  // namespace locmix
