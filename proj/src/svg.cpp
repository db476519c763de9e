#include "epigain/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "epigain/error.hpp"

namespace epigain::svg {

namespace {

constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 130;
constexpr int kMarginTop = 40;
constexpr int kMarginBottom = 50;

const std::array<const char*, 6> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", std::fabs(v) < 1e-12 ? 0.0 : v);
    return buf;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void add(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void finish() {
        if (!(lo <= hi)) lo = 0.0, hi = 1.0;
        if (hi - lo < 1e-12) {
            const double pad = std::max(1e-6, std::fabs(lo) * 0.05);
            lo -= pad;
            hi += pad;
        }
    }
};

void open_document(std::ostringstream& out, int width, int height) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"#ffffff\"/>\n";
}

// Draws the axes and their labels for one panel at vertical offset y0.
void draw_axes(std::ostringstream& out, const LinePlot& plot, int y0, const Range& xr, const Range& yr) {
    const double left = kMarginLeft;
    const double right = plot.width - kMarginRight;
    const double top = y0 + kMarginTop;
    const double bottom = y0 + plot.height - kMarginBottom;
    out << "<text x=\"" << num((left + right) / 2) << "\" y=\"" << num(y0 + 22.0)
        << "\" text-anchor=\"middle\" font-size=\"14\">" << escape(plot.title) << "</text>\n";
    out << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(right - left)
        << "\" height=\"" << num(bottom - top) << "\" fill=\"none\" stroke=\"#333333\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double fx = xr.lo + (xr.hi - xr.lo) * i / 4.0;
        const double px = left + (right - left) * i / 4.0;
        out << "<line x1=\"" << num(px) << "\" y1=\"" << num(bottom) << "\" x2=\"" << num(px) << "\" y2=\""
            << num(bottom + 5) << "\" stroke=\"#333333\"/>\n";
        out << "<text x=\"" << num(px) << "\" y=\"" << num(bottom + 18) << "\" text-anchor=\"middle\">"
            << tick_label(fx) << "</text>\n";
        const double fy = yr.lo + (yr.hi - yr.lo) * i / 4.0;
        const double py = bottom - (bottom - top) * i / 4.0;
        out << "<line x1=\"" << num(left - 5) << "\" y1=\"" << num(py) << "\" x2=\"" << num(left) << "\" y2=\""
            << num(py) << "\" stroke=\"#333333\"/>\n";
        out << "<text x=\"" << num(left - 8) << "\" y=\"" << num(py + 4) << "\" text-anchor=\"end\">"
            << tick_label(fy) << "</text>\n";
    }
    out << "<text x=\"" << num((left + right) / 2) << "\" y=\"" << num(bottom + 38)
        << "\" text-anchor=\"middle\">" << escape(plot.x_label) << "</text>\n";
    out << "<text x=\"16\" y=\"" << num((top + bottom) / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << num((top + bottom) / 2) << ")\">" << escape(plot.y_label) << "</text>\n";
}

void draw_panel(std::ostringstream& out, const LinePlot& plot, int y0) {
    Range xr, yr;
    for (const Series& s : plot.series) {
        if (s.x.size() != s.y.size()) throw ValidationError("svg: series '" + s.name + "' has mismatched x and y");
        for (double v : s.x) xr.add(v);
        for (double v : s.y) yr.add(v);
    }
    xr.finish();
    yr.finish();
    draw_axes(out, plot, y0, xr, yr);

    const double left = kMarginLeft;
    const double right = plot.width - kMarginRight;
    const double top = y0 + kMarginTop;
    const double bottom = y0 + plot.height - kMarginBottom;
    auto px = [&](double x) { return left + (x - xr.lo) / (xr.hi - xr.lo) * (right - left); };
    auto py = [&](double y) { return bottom - (y - yr.lo) / (yr.hi - yr.lo) * (bottom - top); };

    for (std::size_t k = 0; k < plot.series.size(); ++k) {
        const Series& s = plot.series[k];
        const std::string color = s.color.empty() ? kPalette[k % kPalette.size()] : s.color;
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        bool first = true;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            if (!first) out << ' ';
            out << num(px(s.x[i])) << ',' << num(py(s.y[i]));
            first = false;
        }
        out << "\"/>\n";
        const double ly = top + 14 + 18.0 * static_cast<double>(k);
        out << "<line x1=\"" << num(right + 10) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(right + 30)
            << "\" y2=\"" << num(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << num(right + 36) << "\" y=\"" << num(ly + 4) << "\">" << escape(s.name) << "</text>\n";
    }
}

}  // namespace

std::string escape(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string render(const LinePlot& plot) { return render_stack({plot}); }

std::string render_stack(const std::vector<LinePlot>& plots) {
    int width = 0;
    int height = 0;
    for (const LinePlot& p : plots) {
        width = std::max(width, p.width);
        height += p.height;
    }
    std::ostringstream out;
    open_document(out, width, height);
    int y0 = 0;
    for (const LinePlot& p : plots) {
        draw_panel(out, p, y0);
        y0 += p.height;
    }
    out << "</svg>\n";
    return out.str();
}

std::string ramp_color(double t) {
    // Piecewise-linear through five anchor colors, dark blue to yellow.
    static constexpr std::array<std::array<double, 3>, 5> stops = {{
        {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}}};
    t = std::clamp(std::isfinite(t) ? t : 0.0, 0.0, 1.0);
    const double pos = t * (stops.size() - 1);
    const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(pos), stops.size() - 2);
    const double f = pos - static_cast<double>(i);
    char buf[8];
    int rgb[3];
    for (int c = 0; c < 3; ++c) rgb[c] = static_cast<int>(std::lround(stops[i][c] + f * (stops[i + 1][c] - stops[i][c])));
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
    return buf;
}

std::string render(const Heatmap& map) {
    const std::size_t cols = map.x_values.size();
    const std::size_t rows = map.y_values.size();
    if (map.values.size() != cols * rows) throw ValidationError("svg: heatmap value count does not match its axes");

    Range vr;
    for (double v : map.values) vr.add(v);
    vr.finish();

    const int cs = map.cell_size;
    const int left = kMarginLeft;
    const int top = kMarginTop;
    const int plot_w = static_cast<int>(cols) * cs;
    const int plot_h = static_cast<int>(rows) * cs;
    const int width = left + plot_w + 110;
    const int height = top + plot_h + kMarginBottom;

    std::ostringstream out;
    open_document(out, width, height);
    out << "<text x=\"" << num(left + plot_w / 2.0) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
        << escape(map.title) << "</text>\n";
    // Row 0 (smallest y) is drawn at the bottom.
    for (std::size_t r = 0; r < rows; ++r) {
        const int y = top + static_cast<int>(rows - 1 - r) * cs;
        for (std::size_t c = 0; c < cols; ++c) {
            const double v = map.values[r * cols + c];
            const std::string fill = std::isfinite(v) ? ramp_color((v - vr.lo) / (vr.hi - vr.lo)) : "#bbbbbb";
            out << "<rect class=\"cell\" x=\"" << left + static_cast<int>(c) * cs << "\" y=\"" << y << "\" width=\""
                << cs << "\" height=\"" << cs << "\" fill=\"" << fill << "\" data-value=\""
                << (std::isfinite(v) ? format_real(v) : std::string("nan")) << "\"/>\n";
        }
        out << "<text x=\"" << left - 6 << "\" y=\"" << num(y + cs / 2.0 + 4) << "\" text-anchor=\"end\">"
            << tick_label(map.y_values[r]) << "</text>\n";
    }
    for (std::size_t c = 0; c < cols; ++c) {
        out << "<text x=\"" << num(left + (static_cast<double>(c) + 0.5) * cs) << "\" y=\"" << top + plot_h + 16
            << "\" text-anchor=\"middle\">" << tick_label(map.x_values[c]) << "</text>\n";
    }
    out << "<text x=\"" << num(left + plot_w / 2.0) << "\" y=\"" << top + plot_h + 38
        << "\" text-anchor=\"middle\">" << escape(map.x_label) << "</text>\n";
    out << "<text x=\"16\" y=\"" << num(top + plot_h / 2.0) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << num(top + plot_h / 2.0) << ")\">" << escape(map.y_label) << "</text>\n";

    // Color bar.
    const int bar_x = left + plot_w + 20;
    constexpr int kBarSteps = 32;
    for (int i = 0; i < kBarSteps; ++i) {
        const double t = (i + 0.5) / kBarSteps;
        out << "<rect x=\"" << bar_x << "\" y=\"" << num(top + plot_h * (1.0 - (i + 1.0) / kBarSteps))
            << "\" width=\"16\" height=\"" << num(plot_h / static_cast<double>(kBarSteps) + 0.5) << "\" fill=\""
            << ramp_color(t) << "\"/>\n";
    }
    out << "<text x=\"" << bar_x + 22 << "\" y=\"" << top + 10 << "\">" << tick_label(vr.hi) << "</text>\n";
    out << "<text x=\"" << bar_x + 22 << "\" y=\"" << top + plot_h << "\">" << tick_label(vr.lo) << "</text>\n";
    out << "</svg>\n";
    return out.str();
}

Heatmap sweep_heatmap(const SweepGrid& grid, const std::string& field) {
    Heatmap map;
    map.title = field + " over (s_p, s_l)";
    map.x_label = "s_p (prior variance)";
    map.y_label = "s_l (likelihood variance)";
    map.x_values = grid.s_p_values;
    map.y_values = grid.s_l_values;
    map.values.reserve(grid.records.size());
    for (const OptimaRecord& r : grid.records) map.values.push_back(record_field(r, field));
    return map;
}

std::string render_trace(const InquiryTrace& trace) {
    LinePlot plot;
    plot.title = "Surprise during the inquiry cycle";
    plot.x_label = "step";
    plot.y_label = "surprise";
    Series s{"surprise", {}, {}, "#111111"};
    for (const InquiryStep& step : trace.steps) {
        s.x.push_back(step.index);
        s.y.push_back(step.surprise);
    }

    const OptimaRecord& o = trace.optima;
    const LabelThresholds& t = trace.config.thresholds;
    const double bored = t.boredom_frac * o.s_kld;
    const double confused = t.confusion_frac * o.s_bs;

    Range yr;
    for (double v : s.y) yr.add(v);
    yr.add(bored * 0.8);
    yr.add(confused * 1.05);
    yr.finish();
    Range xr;
    for (double v : s.x) xr.add(v);
    xr.finish();

    std::ostringstream out;
    open_document(out, plot.width, plot.height);
    const double left = kMarginLeft;
    const double right = plot.width - kMarginRight;
    const double top = kMarginTop;
    const double bottom = plot.height - kMarginBottom;
    auto py = [&](double y) { return bottom - (std::clamp(y, yr.lo, yr.hi) - yr.lo) / (yr.hi - yr.lo) * (bottom - top); };

    struct Band {
        Emotion emotion;
        double lo, hi;
        const char* fill;
    };
    const std::array<Band, 5> bands = {{{Emotion::boredom, yr.lo, bored, "#e8e8e8"},
                                        {Emotion::pleasure, bored, o.s_kld, "#dbeafe"},
                                        {Emotion::optimal_band, o.s_kld, o.s_bs, "#dcfce7"},
                                        {Emotion::interest, o.s_bs, confused, "#fef3c7"},
                                        {Emotion::confusion, confused, yr.hi, "#fee2e2"}}};
    for (const Band& b : bands) {
        const double y_hi = py(b.hi);
        const double y_lo = py(b.lo);
        if (y_lo - y_hi <= 0.0) continue;
        out << "<rect class=\"band\" x=\"" << num(left) << "\" y=\"" << num(y_hi) << "\" width=\"" << num(right - left)
            << "\" height=\"" << num(y_lo - y_hi) << "\" fill=\"" << b.fill << "\"/>\n";
        out << "<text x=\"" << num(right + 8) << "\" y=\"" << num((y_hi + y_lo) / 2 + 4) << "\">"
            << to_string(b.emotion) << "</text>\n";
    }
    // Axes and curve go after the bands so they paint on top.
    LinePlot axes = plot;
    axes.series.clear();
    draw_axes(out, axes, 0, xr, yr);
    auto px = [&](double x) { return left + (x - xr.lo) / (xr.hi - xr.lo) * (right - left); };
    out << "<polyline fill=\"none\" stroke=\"#111111\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (i) out << ' ';
        out << num(px(s.x[i])) << ',' << num(py(s.y[i]));
    }
    out << "\"/>\n";
    for (std::size_t i = 0; i < s.x.size(); ++i)
        out << "<circle cx=\"" << num(px(s.x[i])) << "\" cy=\"" << num(py(s.y[i])) << "\" r=\"2.5\" fill=\"#111111\"/>\n";
    out << "</svg>\n";
    return out.str();
}

}  // namespace epigain::svg
