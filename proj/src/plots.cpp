#include "tacnet/harness/plots.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "tacnet/util/strfmt.hpp"

namespace tacnet::harness {

namespace {

constexpr double kWidth = 900, kHeight = 320;
constexpr double kLeft = 64, kRight = 24, kTop = 36, kBottom = 44;

struct Bounds {
    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
};

Bounds find_bounds(const std::vector<PlotSeries>& series) {
    Bounds b;
    bool any = false;
    for (const auto& s : series) {
        if (!s.data) continue;
        for (size_t i = 0; i < s.data->size(); ++i) {
            const double x = s.data->t_s[i], y = s.data->v[i];
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            if (!any) {
                b = {x, x, y, y};
                any = true;
            } else {
                b.xmin = std::min(b.xmin, x);
                b.xmax = std::max(b.xmax, x);
                b.ymin = std::min(b.ymin, y);
                b.ymax = std::max(b.ymax, y);
            }
        }
    }
    if (!any) return {0, 1, 0, 1};
    if (b.xmax == b.xmin) b.xmax = b.xmin + 1;
    if (b.ymax == b.ymin) b.ymax = b.ymin + 1;
    return b;
}

} // namespace

void write_svg_chart(const std::filesystem::path& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<PlotSeries>& series) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_svg_chart: cannot open " + path.string());

    const Bounds b = find_bounds(series);
    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    const auto sx = [&](double x) { return kLeft + (x - b.xmin) / (b.xmax - b.xmin) * plot_w; };
    const auto sy = [&](double y) { return kTop + plot_h - (y - b.ymin) / (b.ymax - b.ymin) * plot_h; };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
        << title << "</text>\n";

    // axes
    out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
        << kTop + plot_h << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << kLeft + plot_w
        << "\" y2=\"" << kTop + plot_h << "\" stroke=\"black\"/>\n";

    for (int i = 0; i <= 4; ++i) {
        const double fx = b.xmin + (b.xmax - b.xmin) * i / 4.0;
        const double fy = b.ymin + (b.ymax - b.ymin) * i / 4.0;
        out << "<text x=\"" << sx(fx) << "\" y=\"" << kTop + plot_h + 16
            << "\" text-anchor=\"middle\" font-size=\"10\">" << fmt_g(fx) << "</text>\n";
        out << "<text x=\"" << kLeft - 6 << "\" y=\"" << sy(fy) + 3
            << "\" text-anchor=\"end\" font-size=\"10\">" << fmt_g(fy) << "</text>\n";
    }
    out << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 8
        << "\" text-anchor=\"middle\" font-size=\"11\">" << x_label << "</text>\n";
    out << "<text x=\"14\" y=\"" << kTop + plot_h / 2
        << "\" text-anchor=\"middle\" font-size=\"11\" transform=\"rotate(-90 14 "
        << kTop + plot_h / 2 << ")\">" << y_label << "</text>\n";

    double legend_y = kTop + 6;
    for (const auto& s : series) {
        if (!s.data || s.data->size() == 0) continue;
        out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.2\" points=\"";
        for (size_t i = 0; i < s.data->size(); ++i) {
            if (i) out << ' ';
            out << fmt_g(sx(s.data->t_s[i])) << ',' << fmt_g(sy(s.data->v[i]));
        }
        out << "\"/>\n";
        out << "<text x=\"" << kLeft + plot_w - 4 << "\" y=\"" << legend_y
            << "\" text-anchor=\"end\" font-size=\"10\" fill=\"" << s.color << "\">" << s.label
            << "</text>\n";
        legend_y += 13;
    }
    out << "</svg>\n";
}

} // namespace tacnet::harness
