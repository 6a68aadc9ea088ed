#include "pathnet/curves.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

#include "pathnet/io_util.hpp"

namespace pathnet {

namespace {

struct Point {
    std::size_t generation;
    double fitness;
    double loss;
};

using SeriesKey = std::pair<int, int>;  // (phase rank, iteration)

std::string esc(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string fmt_tick(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

const char* phase_color(Phase p) {
    switch (p) {
        case Phase::Source: return "#1f77b4";
        case Phase::Destination: return "#d62728";
        case Phase::Scratch: return "#7f7f7f";
    }
    return "#000000";
}

const char* iteration_dash(int iteration) {
    switch ((iteration - 1) % 4) {
        case 0: return "";            // solid
        case 1: return "7 3";
        case 2: return "2 2";
        default: return "8 2 2 2";
    }
}

/// Per (phase, iteration, generation): the winning (higher-fitness)
/// evaluation of the tournament; ties keep the first-drawn path.
std::map<SeriesKey, std::vector<Point>> collect_series(
    const std::vector<MetricsRecord>& records) {
    std::map<SeriesKey, std::map<std::size_t, Point>> grouped;
    for (const MetricsRecord& rec : records) {
        if (!rec.path_index.has_value()) continue;  // stage summary rows
        const SeriesKey key{static_cast<int>(rec.phase), rec.iteration};
        auto& per_gen = grouped[key];
        auto it = per_gen.find(rec.generation);
        if (it == per_gen.end() || rec.fitness > it->second.fitness) {
            per_gen[rec.generation] = Point{rec.generation, rec.fitness, rec.mean_train_loss};
        }
    }
    std::map<SeriesKey, std::vector<Point>> series;
    for (auto& [key, per_gen] : grouped) {
        auto& pts = series[key];
        pts.reserve(per_gen.size());
        for (auto& [gen, pt] : per_gen) pts.push_back(pt);
    }
    return series;
}

struct PanelSpec {
    const char* title;
    const char* y_label;
    bool use_fitness;  // otherwise loss
    double y_min;
    double y_max;
};

constexpr double kPlotW = 620.0;
constexpr double kPlotH = 330.0;
constexpr double kMarginLeft = 70.0;
constexpr double kMarginTop = 46.0;
constexpr double kLegendX = kMarginLeft + kPlotW + 24.0;
constexpr double kPanelGap = 60.0;
constexpr double kWidth = 920.0;

void render_panel(std::ostringstream& svg, const PanelSpec& panel, double y_offset,
                  const std::map<SeriesKey, std::vector<Point>>& series, std::size_t gen_min,
                  std::size_t gen_max) {
    const double x0 = kMarginLeft;
    const double y0 = y_offset + kMarginTop;
    const double gen_span = gen_max > gen_min ? double(gen_max - gen_min) : 1.0;
    const double y_span = panel.y_max - panel.y_min;

    auto sx = [&](std::size_t gen) {
        return x0 + (double(gen) - double(gen_min)) / gen_span * kPlotW;
    };
    auto sy = [&](double v) {
        double t = (v - panel.y_min) / y_span;
        t = std::clamp(t, 0.0, 1.0);
        return y0 + (1.0 - t) * kPlotH;
    };

    svg << "<text x=\"" << fmt(x0) << "\" y=\"" << fmt(y0 - 18) << "\" font-size=\"16\" "
        << "font-family=\"sans-serif\" fill=\"#222222\">" << esc(panel.title) << "</text>\n";

    // frame and gridless tick marks
    svg << "<rect x=\"" << fmt(x0) << "\" y=\"" << fmt(y0) << "\" width=\"" << fmt(kPlotW)
        << "\" height=\"" << fmt(kPlotH) << "\" fill=\"none\" stroke=\"#444444\"/>\n";

    const int ticks = 5;
    for (int t = 0; t <= ticks; ++t) {
        const double fx = double(t) / ticks;
        const double gx = x0 + fx * kPlotW;
        const double gen = double(gen_min) + fx * gen_span;
        svg << "<line x1=\"" << fmt(gx) << "\" y1=\"" << fmt(y0 + kPlotH) << "\" x2=\"" << fmt(gx)
            << "\" y2=\"" << fmt(y0 + kPlotH + 5) << "\" stroke=\"#444444\"/>\n";
        svg << "<text x=\"" << fmt(gx) << "\" y=\"" << fmt(y0 + kPlotH + 20)
            << "\" font-size=\"11\" font-family=\"sans-serif\" text-anchor=\"middle\" "
            << "fill=\"#222222\">" << fmt_tick(std::round(gen)) << "</text>\n";

        const double vy = panel.y_min + fx * y_span;
        const double gy = sy(vy);
        svg << "<line x1=\"" << fmt(x0 - 5) << "\" y1=\"" << fmt(gy) << "\" x2=\"" << fmt(x0)
            << "\" y2=\"" << fmt(gy) << "\" stroke=\"#444444\"/>\n";
        svg << "<text x=\"" << fmt(x0 - 9) << "\" y=\"" << fmt(gy + 4) << "\" font-size=\"11\" "
            << "font-family=\"sans-serif\" text-anchor=\"end\" fill=\"#222222\">" << fmt_tick(vy)
            << "</text>\n";
    }

    svg << "<text x=\"" << fmt(x0 + kPlotW / 2) << "\" y=\"" << fmt(y0 + kPlotH + 38)
        << "\" font-size=\"13\" font-family=\"sans-serif\" text-anchor=\"middle\" "
        << "fill=\"#222222\">generation</text>\n";
    svg << "<text x=\"" << fmt(x0 - 52) << "\" y=\"" << fmt(y0 + kPlotH / 2)
        << "\" font-size=\"13\" font-family=\"sans-serif\" text-anchor=\"middle\" "
        << "transform=\"rotate(-90 " << fmt(x0 - 52) << " " << fmt(y0 + kPlotH / 2) << ")\" "
        << "fill=\"#222222\">" << esc(panel.y_label) << "</text>\n";

    double legend_y = y0 + 6;
    for (const auto& [key, pts] : series) {
        const Phase phase = static_cast<Phase>(key.first);
        const int iteration = key.second;
        const char* color = phase_color(phase);
        const char* dash = iteration_dash(iteration);
        std::string dash_attr =
            *dash ? std::string(" stroke-dasharray=\"") + dash + "\"" : std::string();

        if (pts.size() == 1) {
            const Point& p = pts.front();
            const double v = panel.use_fitness ? p.fitness : p.loss;
            svg << "<circle cx=\"" << fmt(sx(p.generation)) << "\" cy=\"" << fmt(sy(v))
                << "\" r=\"3.5\" fill=\"" << color << "\"/>\n";
        } else {
            svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.6\""
                << dash_attr << " points=\"";
            for (std::size_t i = 0; i < pts.size(); ++i) {
                const double v = panel.use_fitness ? pts[i].fitness : pts[i].loss;
                if (i) svg << ' ';
                svg << fmt(sx(pts[i].generation)) << ',' << fmt(sy(v));
            }
            svg << "\"/>\n";
        }

        // legend entry
        svg << "<line x1=\"" << fmt(kLegendX) << "\" y1=\"" << fmt(legend_y) << "\" x2=\""
            << fmt(kLegendX + 26) << "\" y2=\"" << fmt(legend_y) << "\" stroke=\"" << color
            << "\" stroke-width=\"1.6\"" << dash_attr << "/>\n";
        svg << "<text x=\"" << fmt(kLegendX + 32) << "\" y=\"" << fmt(legend_y + 4)
            << "\" font-size=\"12\" font-family=\"sans-serif\" fill=\"#222222\">"
            << esc(to_string(phase) + " it" + std::to_string(iteration)) << "</text>\n";
        legend_y += 18;
    }
}

}  // namespace

std::string render_curves_svg(const std::vector<MetricsRecord>& records, CurvePanel panel) {
    const auto series = collect_series(records);
    if (series.empty()) {
        throw std::invalid_argument("render_curves: no evaluation rows to plot");
    }

    std::size_t gen_min = SIZE_MAX, gen_max = 0;
    double loss_max = 0.0;
    for (const auto& [key, pts] : series) {
        for (const Point& p : pts) {
            gen_min = std::min(gen_min, p.generation);
            gen_max = std::max(gen_max, p.generation);
            loss_max = std::max(loss_max, p.loss);
        }
    }
    if (loss_max <= 0.0) loss_max = 1.0;

    const PanelSpec fitness_panel{"fitness by generation", "fitness (training accuracy)", true,
                                  0.0, 1.0};
    const PanelSpec loss_panel{"mean training loss by generation", "mean training loss", false,
                               0.0, loss_max * 1.05};

    std::vector<PanelSpec> panels;
    if (panel == CurvePanel::Fitness || panel == CurvePanel::Both) panels.push_back(fitness_panel);
    if (panel == CurvePanel::Loss || panel == CurvePanel::Both) panels.push_back(loss_panel);

    const double panel_height = kMarginTop + kPlotH + kPanelGap;
    const double height = panel_height * double(panels.size()) + 10.0;

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(kWidth) << "\" height=\""
        << fmt(height) << "\" viewBox=\"0 0 " << fmt(kWidth) << " " << fmt(height) << "\">\n";
    svg << "<rect x=\"0\" y=\"0\" width=\"" << fmt(kWidth) << "\" height=\"" << fmt(height)
        << "\" fill=\"#ffffff\"/>\n";
    for (std::size_t i = 0; i < panels.size(); ++i) {
        render_panel(svg, panels[i], double(i) * panel_height, series, gen_min, gen_max);
    }
    svg << "</svg>\n";
    return svg.str();
}

void render_curves(const std::vector<MetricsRecord>& records, const std::string& out_path,
                   CurvePanel panel) {
    write_file_atomic(out_path, render_curves_svg(records, panel));
}

}  // namespace pathnet
