#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace mtbo::harness {

namespace {

constexpr double kWidth = 760.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0, kRight = 720.0, kTop = 50.0, kBottom = 370.0;

const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                         "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string num(double v) {
    std::ostringstream os;
    os.precision(8);
    os << v;
    return os.str();
}

}  // namespace

void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<Series>& series) {
    double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
    double y_min = x_min, y_max = -x_min;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            const double b = i < s.band.size() ? s.band[i] : 0.0;
            x_min = std::min(x_min, s.x[i]);
            x_max = std::max(x_max, s.x[i]);
            y_min = std::min(y_min, s.y[i] - b);
            y_max = std::max(y_max, s.y[i] + b);
        }
    }
    if (!(x_min < x_max)) x_max = x_min + 1.0;
    if (!(y_min < y_max)) {
        y_min -= 1.0;
        y_max += 1.0;
    }

    auto px = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * (kRight - kLeft); };
    auto py = [&](double y) { return kBottom - (y - y_min) / (y_max - y_min) * (kBottom - kTop); };

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write plot: " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" data-x-min=\"" << num(x_min) << "\" data-x-max=\"" << num(x_max)
        << "\" data-y-min=\"" << num(y_min) << "\" data-y-max=\"" << num(y_max)
        << "\" data-px-left=\"" << kLeft << "\" data-px-right=\"" << kRight
        << "\" data-px-top=\"" << kTop << "\" data-px-bottom=\"" << kBottom << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
        << title << "</text>\n";

    // axes and ticks
    out << "<line x1=\"" << kLeft << "\" y1=\"" << kBottom << "\" x2=\"" << kRight << "\" y2=\""
        << kBottom << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
        << kBottom << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double fx = x_min + (x_max - x_min) * i / 5.0;
        const double fy = y_min + (y_max - y_min) * i / 5.0;
        out << "<line x1=\"" << px(fx) << "\" y1=\"" << kBottom << "\" x2=\"" << px(fx)
            << "\" y2=\"" << kBottom + 5 << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << px(fx) << "\" y=\"" << kBottom + 20
            << "\" text-anchor=\"middle\" font-size=\"11\">" << num(fx) << "</text>\n";
        out << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << py(fy) << "\" x2=\"" << kLeft
            << "\" y2=\"" << py(fy) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << kLeft - 8 << "\" y=\"" << py(fy) + 4
            << "\" text-anchor=\"end\" font-size=\"11\">" << num(fy) << "</text>\n";
    }
    out << "<text x=\"" << (kLeft + kRight) / 2 << "\" y=\"" << kHeight - 10
        << "\" text-anchor=\"middle\" font-size=\"13\">" << x_label << "</text>\n";
    out << "<text x=\"18\" y=\"" << (kTop + kBottom) / 2
        << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
        << (kTop + kBottom) / 2 << ")\">" << y_label << "</text>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* color = kColors[si % (sizeof kColors / sizeof kColors[0])];
        if (!s.band.empty()) {
            std::ostringstream pts;
            for (std::size_t i = 0; i < s.x.size(); ++i)
                pts << px(s.x[i]) << "," << py(s.y[i] + s.band[i]) << " ";
            for (std::size_t i = s.x.size(); i-- > 0;)
                pts << px(s.x[i]) << "," << py(s.y[i] - s.band[i]) << " ";
            out << "<polygon points=\"" << pts.str() << "\" fill=\"" << color
                << "\" opacity=\"0.15\" stroke=\"none\"/>\n";
        }
        std::ostringstream pts;
        for (std::size_t i = 0; i < s.x.size(); ++i) pts << px(s.x[i]) << "," << py(s.y[i]) << " ";
        out << "<polyline data-series=\"" << s.label << "\" points=\"" << pts.str()
            << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\"/>\n";
        // legend entry
        const double ly = kTop + 16.0 * static_cast<double>(si);
        out << "<line x1=\"" << kRight - 140 << "\" y1=\"" << ly << "\" x2=\"" << kRight - 120
            << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << kRight - 114 << "\" y=\"" << ly + 4 << "\" font-size=\"12\">"
            << s.label << "</text>\n";
    }
    out << "</svg>\n";
}

}  // namespace mtbo::harness
