#pragma once

// Minimal static SVG line charts for experiment timelines.

#include <algorithm>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dendrift/latent_io.hpp"
#include "dendrift/pipeline.hpp"

namespace dendrift {

struct PlotSeries {
    std::string name;
    std::string color;
    std::vector<std::optional<double>> values;
};

struct PlotPanel {
    std::string title;
    std::vector<PlotSeries> series;
    std::optional<double> y_max;  // autoscale when empty
};

inline void write_svg_panels(std::ostream& out, const std::vector<double>& x, const std::vector<PlotPanel>& panels) {
    const double width = 720.0, panel_h = 220.0, left = 60.0, right = 20.0, top = 30.0, bottom = 30.0;
    const double total_h = panel_h * static_cast<double>(panels.size());
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << total_h
        << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (x.empty()) {
        out << "</svg>\n";
        return;
    }
    const double x_lo = x.front(), x_hi = std::max(x.back(), x.front() + 1.0);

    for (std::size_t p = 0; p < panels.size(); ++p) {
        const auto& panel = panels[p];
        const double y0 = panel_h * static_cast<double>(p);
        double y_hi = panel.y_max.value_or(0.0);
        if (!panel.y_max) {
            for (const auto& s : panel.series)
                for (const auto& v : s.values)
                    if (v) y_hi = std::max(y_hi, *v);
            if (y_hi <= 0.0) y_hi = 1.0;
        }
        const double plot_w = width - left - right, plot_h = panel_h - top - bottom;
        auto px = [&](double v) { return left + (v - x_lo) / (x_hi - x_lo) * plot_w; };
        auto py = [&](double v) { return y0 + top + plot_h - std::clamp(v / y_hi, 0.0, 1.0) * plot_h; };

        out << "<text x=\"" << left << "\" y=\"" << y0 + 18.0 << "\" font-weight=\"bold\">" << panel.title << "</text>\n";
        out << "<rect x=\"" << left << "\" y=\"" << y0 + top << "\" width=\"" << plot_w << "\" height=\"" << plot_h
            << "\" fill=\"none\" stroke=\"#888\"/>\n";
        out << "<text x=\"" << left - 6.0 << "\" y=\"" << y0 + top + 4.0 << "\" text-anchor=\"end\">"
            << format_fixed(y_hi, 2) << "</text>\n";
        out << "<text x=\"" << left - 6.0 << "\" y=\"" << y0 + top + plot_h << "\" text-anchor=\"end\">0</text>\n";
        out << "<text x=\"" << left << "\" y=\"" << y0 + panel_h - 10.0 << "\">" << x_lo << "</text>\n";
        out << "<text x=\"" << width - right << "\" y=\"" << y0 + panel_h - 10.0 << "\" text-anchor=\"end\">" << x_hi
            << "</text>\n";

        double legend_x = left + 200.0;
        for (const auto& s : panel.series) {
            out << "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"" << s.color << "\" points=\"";
            for (std::size_t i = 0; i < s.values.size() && i < x.size(); ++i) {
                if (!s.values[i]) continue;
                out << format_fixed(px(x[i]), 2) << ',' << format_fixed(py(*s.values[i]), 2) << ' ';
            }
            out << "\"/>\n";
            out << "<text x=\"" << legend_x << "\" y=\"" << y0 + 18.0 << "\" fill=\"" << s.color << "\">" << s.name
                << "</text>\n";
            legend_x += 140.0;
        }
    }
    out << "</svg>\n";
}

/// Changed hosts on top, DenDrift vs baseline accuracy below.
inline void write_timeline_svg(std::ostream& out, const std::vector<TimelineRow>& rows) {
    std::vector<double> x;
    PlotSeries changed{"changed hosts", "#1f77b4", {}};
    PlotSeries drift_acc{"drift-aware", "#2ca02c", {}};
    PlotSeries base_acc{"baseline", "#d62728", {}};
    for (const auto& r : rows) {
        x.push_back(static_cast<double>(r.interval));
        changed.values.emplace_back(static_cast<double>(r.changed_hosts));
        drift_acc.values.push_back(r.accuracy_dendrift);
        base_acc.values.push_back(r.accuracy_baseline);
    }
    std::vector<PlotPanel> panels{{"changed hosts per interval", {changed}, std::nullopt},
                                  {"clustering accuracy", {drift_acc, base_acc}, 1.0}};
    write_svg_panels(out, x, panels);
}

}  // namespace dendrift
