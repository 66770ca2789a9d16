#include "creepuq/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace creepuq {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string fmt_tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

void expand_range(double& lo, double& hi) {
    if (hi <= lo) {
        lo -= 0.5;
        hi += 0.5;
    } else {
        double pad = 0.05 * (hi - lo);
        lo -= pad;
        hi += pad;
    }
}

std::string svg_header(const PlotLayout& l, const std::string& title,
                       const std::string& x_label, const std::string& y_label) {
    double total_w = l.left + l.width + 24.0;
    double total_h = l.top + l.height + 56.0;
    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(total_w) +
         "\" height=\"" + fmt(total_h) + "\" viewBox=\"0 0 " + fmt(total_w) + " " +
         fmt(total_h) + "\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += "<text x=\"" + fmt(l.left + l.width / 2) + "\" y=\"20\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"14\">" + title + "</text>\n";
    s += "<rect x=\"" + fmt(l.left) + "\" y=\"" + fmt(l.top) + "\" width=\"" + fmt(l.width) +
         "\" height=\"" + fmt(l.height) + "\" fill=\"none\" stroke=\"#333333\"/>\n";
    // Axis ticks: 5 per axis.
    for (int i = 0; i <= 4; ++i) {
        double t = i / 4.0;
        double xv = l.x_min + t * (l.x_max - l.x_min);
        double yv = l.y_min + t * (l.y_max - l.y_min);
        double xp = l.x_to_px(xv);
        double yp = l.y_to_px(yv);
        s += "<line x1=\"" + fmt(xp) + "\" y1=\"" + fmt(l.top + l.height) + "\" x2=\"" + fmt(xp) +
             "\" y2=\"" + fmt(l.top + l.height + 5) + "\" stroke=\"#333333\"/>\n";
        s += "<text x=\"" + fmt(xp) + "\" y=\"" + fmt(l.top + l.height + 18) +
             "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" +
             fmt_tick(xv) + "</text>\n";
        s += "<line x1=\"" + fmt(l.left - 5) + "\" y1=\"" + fmt(yp) + "\" x2=\"" + fmt(l.left) +
             "\" y2=\"" + fmt(yp) + "\" stroke=\"#333333\"/>\n";
        s += "<text x=\"" + fmt(l.left - 8) + "\" y=\"" + fmt(yp + 3) +
             "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" +
             fmt_tick(yv) + "</text>\n";
    }
    s += "<text x=\"" + fmt(l.left + l.width / 2) + "\" y=\"" + fmt(l.top + l.height + 38) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + x_label +
         "</text>\n";
    s += "<text x=\"16\" y=\"" + fmt(l.top + l.height / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 " +
         fmt(l.top + l.height / 2) + ")\">" + y_label + "</text>\n";
    return s;
}

}  // namespace

RenderedPlot render_prediction_plot(const std::string& title,
                                    const std::vector<PredictionPlotPoint>& points) {
    if (points.empty()) throw std::invalid_argument("render_prediction_plot: empty point set");
    PlotLayout l;
    l.x_min = 0.0;
    l.x_max = static_cast<double>(points.size() - 1);
    if (points.size() == 1) l.x_max = 1.0;
    double ylo = points[0].target, yhi = points[0].target;
    for (const auto& p : points) {
        ylo = std::min({ylo, p.target, p.mean, p.has_band ? p.lower : p.mean});
        yhi = std::max({yhi, p.target, p.mean, p.has_band ? p.upper : p.mean});
    }
    expand_range(ylo, yhi);
    l.y_min = ylo;
    l.y_max = yhi;

    std::string s = svg_header(l, title, "test sample", "log10 rupture life [h]");

    bool any_band = false;
    for (const auto& p : points) any_band |= p.has_band;
    if (any_band) {
        // Band polygon: upper edge left-to-right, lower edge back.
        std::string poly;
        for (std::size_t i = 0; i < points.size(); ++i) {
            double x = l.x_to_px(static_cast<double>(i));
            double y = l.y_to_px(points[i].has_band ? points[i].upper : points[i].mean);
            poly += fmt(x) + "," + fmt(y) + " ";
        }
        for (std::size_t i = points.size(); i-- > 0;) {
            double x = l.x_to_px(static_cast<double>(i));
            double y = l.y_to_px(points[i].has_band ? points[i].lower : points[i].mean);
            poly += fmt(x) + "," + fmt(y) + " ";
        }
        s += "<polygon points=\"" + poly + "\" fill=\"#2ca02c\" fill-opacity=\"0.25\" stroke=\"none\"/>\n";
    }

    std::string line;
    for (std::size_t i = 0; i < points.size(); ++i)
        line += fmt(l.x_to_px(static_cast<double>(i))) + "," + fmt(l.y_to_px(points[i].mean)) + " ";
    s += "<polyline points=\"" + line + "\" fill=\"none\" stroke=\"" + std::string(kPalette[1]) +
         "\" stroke-width=\"1.5\"/>\n";

    for (std::size_t i = 0; i < points.size(); ++i) {
        s += "<circle cx=\"" + fmt(l.x_to_px(static_cast<double>(i))) + "\" cy=\"" +
             fmt(l.y_to_px(points[i].target)) + "\" r=\"2.2\" fill=\"" +
             std::string(kPalette[0]) + "\"/>\n";
    }

    // Legend.
    double lx = l.left + 10, ly = l.top + 14;
    s += "<circle cx=\"" + fmt(lx) + "\" cy=\"" + fmt(ly - 3) + "\" r=\"2.2\" fill=\"" +
         std::string(kPalette[0]) + "\"/>\n";
    s += "<text x=\"" + fmt(lx + 8) + "\" y=\"" + fmt(ly) +
         "\" font-family=\"sans-serif\" font-size=\"10\">target</text>\n";
    s += "<line x1=\"" + fmt(lx + 60) + "\" y1=\"" + fmt(ly - 3) + "\" x2=\"" + fmt(lx + 76) +
         "\" y2=\"" + fmt(ly - 3) + "\" stroke=\"" + std::string(kPalette[1]) + "\" stroke-width=\"1.5\"/>\n";
    s += "<text x=\"" + fmt(lx + 80) + "\" y=\"" + fmt(ly) +
         "\" font-family=\"sans-serif\" font-size=\"10\">prediction</text>\n";
    if (any_band)
        s += "<text x=\"" + fmt(lx + 150) + "\" y=\"" + fmt(ly) +
             "\" font-family=\"sans-serif\" font-size=\"10\">shaded: interval</text>\n";

    s += "</svg>\n";
    return {std::move(s), l};
}

RenderedPlot render_curves_plot(const std::string& title, const std::string& x_label,
                                const std::string& y_label,
                                const std::vector<CurveSeries>& series) {
    if (series.empty()) throw std::invalid_argument("render_curves_plot: empty series set");
    PlotLayout l;
    bool first = true;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (first) {
                l.x_min = l.x_max = s.x[i];
                l.y_min = s.lower.empty() ? s.mean[i] : s.lower[i];
                l.y_max = s.upper.empty() ? s.mean[i] : s.upper[i];
                first = false;
            }
            l.x_min = std::min(l.x_min, s.x[i]);
            l.x_max = std::max(l.x_max, s.x[i]);
            l.y_min = std::min({l.y_min, s.mean[i], s.lower.empty() ? s.mean[i] : s.lower[i]});
            l.y_max = std::max({l.y_max, s.mean[i], s.upper.empty() ? s.mean[i] : s.upper[i]});
        }
    }
    if (first) throw std::invalid_argument("render_curves_plot: series contain no points");
    expand_range(l.y_min, l.y_max);
    if (l.x_max <= l.x_min) l.x_max = l.x_min + 1.0;

    std::string s = svg_header(l, title, x_label, y_label);
    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& cs = series[si];
        const char* color = kPalette[si % 8];
        if (!cs.lower.empty() && cs.lower.size() == cs.x.size() &&
            cs.upper.size() == cs.x.size()) {
            std::string poly;
            for (std::size_t i = 0; i < cs.x.size(); ++i)
                poly += fmt(l.x_to_px(cs.x[i])) + "," + fmt(l.y_to_px(cs.upper[i])) + " ";
            for (std::size_t i = cs.x.size(); i-- > 0;)
                poly += fmt(l.x_to_px(cs.x[i])) + "," + fmt(l.y_to_px(cs.lower[i])) + " ";
            s += "<polygon points=\"" + poly + "\" fill=\"" + color +
                 "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";
        }
        std::string line;
        for (std::size_t i = 0; i < cs.x.size(); ++i)
            line += fmt(l.x_to_px(cs.x[i])) + "," + fmt(l.y_to_px(cs.mean[i])) + " ";
        s += "<polyline points=\"" + line + "\" fill=\"none\" stroke=\"" + color +
             "\" stroke-width=\"1.5\"/>\n";
        // Legend entry.
        double ly = l.top + 14 + 14 * static_cast<double>(si);
        s += "<line x1=\"" + fmt(l.left + 10) + "\" y1=\"" + fmt(ly - 3) + "\" x2=\"" +
             fmt(l.left + 26) + "\" y2=\"" + fmt(ly - 3) + "\" stroke=\"" + color +
             "\" stroke-width=\"1.5\"/>\n";
        s += "<text x=\"" + fmt(l.left + 30) + "\" y=\"" + fmt(ly) +
             "\" font-family=\"sans-serif\" font-size=\"10\">" + cs.label + "</text>\n";
    }
    s += "</svg>\n";
    return {std::move(s), l};
}

}  // namespace creepuq
