#pragma once

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "taskcodec/io/png.hpp"

namespace taskcodec {

// Small rasterizer for RD plots: axes with nice ticks, polylines with
// square markers, optional dashed horizontal reference line, legend.
// Text uses an uppercase-only 5x7 bitmap font.
namespace plot {

struct Rgb {
    uint8_t r, g, b;
};

inline const Rgb kSeriesColors[] = {
    {204, 37, 41}, {57, 106, 177}, {62, 150, 81}, {218, 124, 48}, {107, 76, 154}, {83, 81, 84},
};

namespace detail {

// 5x7 glyphs, rows top-down, '#' = set. Uppercase letters, digits, and the
// punctuation that shows up in axis labels.
struct Glyph {
    char ch;
    const char* rows[7];
};

inline const Glyph* find_glyph(char c) {
    static const Glyph table[] = {
        {'0', {" ### ", "#   #", "#  ##", "# # #", "##  #", "#   #", " ### "}},
        {'1', {"  #  ", " ##  ", "  #  ", "  #  ", "  #  ", "  #  ", " ### "}},
        {'2', {" ### ", "#   #", "    #", "   # ", "  #  ", " #   ", "#####"}},
        {'3', {" ### ", "#   #", "    #", "  ## ", "    #", "#   #", " ### "}},
        {'4', {"   # ", "  ## ", " # # ", "#  # ", "#####", "   # ", "   # "}},
        {'5', {"#####", "#    ", "#### ", "    #", "    #", "#   #", " ### "}},
        {'6', {" ### ", "#    ", "#    ", "#### ", "#   #", "#   #", " ### "}},
        {'7', {"#####", "    #", "   # ", "  #  ", "  #  ", "  #  ", "  #  "}},
        {'8', {" ### ", "#   #", "#   #", " ### ", "#   #", "#   #", " ### "}},
        {'9', {" ### ", "#   #", "#   #", " ####", "    #", "    #", " ### "}},
        {'.', {"     ", "     ", "     ", "     ", "     ", " ##  ", " ##  "}},
        {',', {"     ", "     ", "     ", "     ", " ##  ", "  #  ", " #   "}},
        {'-', {"     ", "     ", "     ", "#####", "     ", "     ", "     "}},
        {'+', {"     ", "  #  ", "  #  ", "#####", "  #  ", "  #  ", "     "}},
        {'%', {"##   ", "##  #", "   # ", "  #  ", " #   ", "#  ##", "   ##"}},
        {'/', {"    #", "    #", "   # ", "  #  ", " #   ", "#    ", "#    "}},
        {'(', {"   # ", "  #  ", " #   ", " #   ", " #   ", "  #  ", "   # "}},
        {')', {" #   ", "  #  ", "   # ", "   # ", "   # ", "  #  ", " #   "}},
        {'=', {"     ", "     ", "#####", "     ", "#####", "     ", "     "}},
        {'_', {"     ", "     ", "     ", "     ", "     ", "     ", "#####"}},
        {':', {"     ", " ##  ", " ##  ", "     ", " ##  ", " ##  ", "     "}},
        {'[', {" ### ", " #   ", " #   ", " #   ", " #   ", " #   ", " ### "}},
        {']', {" ### ", "   # ", "   # ", "   # ", "   # ", "   # ", " ### "}},
        {'A', {" ### ", "#   #", "#   #", "#####", "#   #", "#   #", "#   #"}},
        {'B', {"#### ", "#   #", "#   #", "#### ", "#   #", "#   #", "#### "}},
        {'C', {" ### ", "#   #", "#    ", "#    ", "#    ", "#   #", " ### "}},
        {'D', {"#### ", "#   #", "#   #", "#   #", "#   #", "#   #", "#### "}},
        {'E', {"#####", "#    ", "#    ", "#### ", "#    ", "#    ", "#####"}},
        {'F', {"#####", "#    ", "#    ", "#### ", "#    ", "#    ", "#    "}},
        {'G', {" ### ", "#   #", "#    ", "# ###", "#   #", "#   #", " ### "}},
        {'H', {"#   #", "#   #", "#   #", "#####", "#   #", "#   #", "#   #"}},
        {'I', {" ### ", "  #  ", "  #  ", "  #  ", "  #  ", "  #  ", " ### "}},
        {'J', {"  ###", "   # ", "   # ", "   # ", "   # ", "#  # ", " ##  "}},
        {'K', {"#   #", "#  # ", "# #  ", "##   ", "# #  ", "#  # ", "#   #"}},
        {'L', {"#    ", "#    ", "#    ", "#    ", "#    ", "#    ", "#####"}},
        {'M', {"#   #", "## ##", "# # #", "# # #", "#   #", "#   #", "#   #"}},
        {'N', {"#   #", "##  #", "# # #", "#  ##", "#   #", "#   #", "#   #"}},
        {'O', {" ### ", "#   #", "#   #", "#   #", "#   #", "#   #", " ### "}},
        {'P', {"#### ", "#   #", "#   #", "#### ", "#    ", "#    ", "#    "}},
        {'Q', {" ### ", "#   #", "#   #", "#   #", "# # #", "#  # ", " ## #"}},
        {'R', {"#### ", "#   #", "#   #", "#### ", "# #  ", "#  # ", "#   #"}},
        {'S', {" ####", "#    ", "#    ", " ### ", "    #", "    #", "#### "}},
        {'T', {"#####", "  #  ", "  #  ", "  #  ", "  #  ", "  #  ", "  #  "}},
        {'U', {"#   #", "#   #", "#   #", "#   #", "#   #", "#   #", " ### "}},
        {'V', {"#   #", "#   #", "#   #", "#   #", "#   #", " # # ", "  #  "}},
        {'W', {"#   #", "#   #", "#   #", "# # #", "# # #", "## ##", "#   #"}},
        {'X', {"#   #", "#   #", " # # ", "  #  ", " # # ", "#   #", "#   #"}},
        {'Y', {"#   #", "#   #", " # # ", "  #  ", "  #  ", "  #  ", "  #  "}},
        {'Z', {"#####", "    #", "   # ", "  #  ", " #   ", "#    ", "#####"}},
    };
    for (const auto& g : table)
        if (g.ch == c) return &g;
    return nullptr;
}

}  // namespace detail

class Canvas {
public:
    Canvas(int w, int h) : w_(w), h_(h), px_(static_cast<size_t>(w) * h * 3, 255) {}

    int width() const { return w_; }
    int height() const { return h_; }

    void set(int x, int y, Rgb c) {
        if (x < 0 || y < 0 || x >= w_ || y >= h_) return;
        const size_t i = (static_cast<size_t>(y) * w_ + x) * 3;
        px_[i] = c.r;
        px_[i + 1] = c.g;
        px_[i + 2] = c.b;
    }

    void line(double x0, double y0, double x1, double y1, Rgb c, int dash = 0) {
        const double dx = x1 - x0, dy = y1 - y0;
        const int steps = std::max(1, static_cast<int>(std::ceil(std::max(std::fabs(dx), std::fabs(dy)))));
        for (int i = 0; i <= steps; ++i) {
            if (dash > 0 && ((i / dash) % 2)) continue;
            const double t = static_cast<double>(i) / steps;
            set(static_cast<int>(std::lround(x0 + t * dx)), static_cast<int>(std::lround(y0 + t * dy)), c);
        }
    }

    void marker(int x, int y, Rgb c) {
        for (int dy = -2; dy <= 2; ++dy)
            for (int dx = -2; dx <= 2; ++dx) set(x + dx, y + dy, c);
    }

    // uppercase 5x7 text; unknown characters render as a thin space
    void text(int x, int y, const std::string& s, Rgb c) {
        int cx = x;
        for (char raw : s) {
            const char ch = static_cast<char>(std::toupper(static_cast<unsigned char>(raw)));
            if (ch == ' ') {
                cx += 4;
                continue;
            }
            const auto* g = detail::find_glyph(ch);
            if (g) {
                for (int r = 0; r < 7; ++r)
                    for (int col = 0; col < 5; ++col)
                        if (g->rows[r][col] == '#') set(cx + col, y + r, c);
            }
            cx += 6;
        }
    }

    static int text_width(const std::string& s) {
        int w = 0;
        for (char c : s) w += (c == ' ') ? 4 : 6;
        return w;
    }

    void save(const std::filesystem::path& path) const { write_png_rgb8(path, w_, h_, px_); }

private:
    int w_, h_;
    std::vector<uint8_t> px_;
};

struct Series {
    std::string label;
    std::vector<std::pair<double, double>> points;  // (x, y)
};

namespace detail {
inline double nice_step(double span, int target_ticks) {
    const double raw = span / std::max(1, target_ticks);
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double mult : {1.0, 2.0, 5.0}) {
        if (raw <= mult * mag) return mult * mag;
    }
    return 10.0 * mag;
}

inline std::string format_tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}
}  // namespace detail

// Renders series as connected RD curves. baseline, when finite, draws a
// dashed horizontal reference line (task metric on uncompressed input).
inline void render_plot(const std::filesystem::path& path, const std::string& x_label,
                        const std::string& y_label, const std::vector<Series>& series,
                        double baseline = std::numeric_limits<double>::quiet_NaN()) {
    const int W = 720, H = 500, ml = 70, mr = 18, mt = 18, mb = 52;
    Canvas cv(W, H);
    const Rgb black{0, 0, 0}, grey{200, 200, 200}, dgrey{120, 120, 120};

    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series)
        for (const auto& [x, y] : s.points) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    if (!std::isnan(baseline)) {
        ymin = std::min(ymin, baseline);
        ymax = std::max(ymax, baseline);
    }
    if (xmin > xmax) {
        xmin = 0.0;
        xmax = 1.0;
    }
    if (ymin > ymax) {
        ymin = 0.0;
        ymax = 1.0;
    }
    const double xpad = (xmax - xmin) * 0.06 + 1e-12, ypad = (ymax - ymin) * 0.06 + 1e-12;
    xmin -= xpad;
    xmax += xpad;
    ymin -= ypad;
    ymax += ypad;

    auto sx = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr); };
    auto sy = [&](double y) { return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb); };

    // ticks + grid
    const double xstep = detail::nice_step(xmax - xmin, 6), ystep = detail::nice_step(ymax - ymin, 6);
    for (double t = std::ceil(xmin / xstep) * xstep; t <= xmax + 1e-12; t += xstep) {
        cv.line(sx(t), mt, sx(t), H - mb, grey);
        const std::string lab = detail::format_tick(t);
        cv.text(static_cast<int>(sx(t)) - Canvas::text_width(lab) / 2, H - mb + 8, lab, black);
    }
    for (double t = std::ceil(ymin / ystep) * ystep; t <= ymax + 1e-12; t += ystep) {
        cv.line(ml, sy(t), W - mr, sy(t), grey);
        const std::string lab = detail::format_tick(t);
        cv.text(ml - 8 - Canvas::text_width(lab), static_cast<int>(sy(t)) - 3, lab, black);
    }
    // frame
    cv.line(ml, mt, ml, H - mb, black);
    cv.line(ml, H - mb, W - mr, H - mb, black);
    cv.line(W - mr, mt, W - mr, H - mb, black);
    cv.line(ml, mt, W - mr, mt, black);
    cv.text((W + ml - mr) / 2 - Canvas::text_width(x_label) / 2, H - 16, x_label, black);
    cv.text(6, mt, y_label, black);

    if (!std::isnan(baseline)) cv.line(ml, sy(baseline), W - mr, sy(baseline), dgrey, 4);

    int legend_y = mt + 8;
    for (size_t i = 0; i < series.size(); ++i) {
        const Rgb c = kSeriesColors[i % (sizeof(kSeriesColors) / sizeof(Rgb))];
        auto pts = series[i].points;
        std::sort(pts.begin(), pts.end());
        for (size_t k = 0; k + 1 < pts.size(); ++k)
            cv.line(sx(pts[k].first), sy(pts[k].second), sx(pts[k + 1].first), sy(pts[k + 1].second), c);
        for (const auto& [x, y] : pts)
            cv.marker(static_cast<int>(std::lround(sx(x))), static_cast<int>(std::lround(sy(y))), c);
        // legend
        for (int dx = 0; dx < 14; ++dx) cv.set(ml + 10 + dx, legend_y + 3, c);
        cv.text(ml + 30, legend_y, series[i].label, black);
        legend_y += 12;
    }
    cv.save(path);
}

}  // namespace plot
}  // namespace taskcodec
