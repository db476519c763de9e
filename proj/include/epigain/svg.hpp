#pragma once

// Minimal self-contained SVG rendering. Every coordinate is printed with a
// fixed number of decimals, so identical inputs give identical bytes.

#include <string>
#include <vector>

#include "epigain/inquiry.hpp"
#include "epigain/sweep.hpp"

namespace epigain::svg {

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
    std::string color;
};

struct LinePlot {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
    int width = 640;
    int height = 420;
};

std::string render(const LinePlot& plot);

/// Several plots stacked vertically in one document.
std::string render_stack(const std::vector<LinePlot>& plots);

struct Heatmap {
    std::string title;
    std::string x_label;  ///< columns
    std::string y_label;  ///< rows
    std::vector<double> x_values;
    std::vector<double> y_values;
    std::vector<double> values;  ///< row-major, rows follow y_values
    int cell_size = 28;
};

/// Non-finite cells are drawn grey. Each cell rect carries class="cell"
/// and a data-value attribute.
std::string render(const Heatmap& map);

/// Maps t in [0, 1] onto a dark-blue to yellow ramp, as "#rrggbb".
std::string ramp_color(double t);

Heatmap sweep_heatmap(const SweepGrid& grid, const std::string& field);

/// Surprise against step with the emotion regions shaded as horizontal bands.
std::string render_trace(const InquiryTrace& trace);

/// Escapes XML markup characters for text and attribute content.
std::string escape(const std::string& text);

}  // namespace epigain::svg
