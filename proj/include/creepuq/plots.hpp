#pragma once

#include <string>
#include <vector>

namespace creepuq {

/// Data-to-pixel mapping for a fixed-size plot box; exposed so tests can
/// verify band geometry in pixel coordinates.
struct PlotLayout {
    double x_min = 0.0, x_max = 1.0;
    double y_min = 0.0, y_max = 1.0;
    double left = 64.0, top = 36.0;
    double width = 640.0, height = 400.0;

    double x_to_px(double x) const {
        return left + (x - x_min) / (x_max - x_min) * width;
    }
    double y_to_px(double y) const {
        return top + (y_max - y) / (y_max - y_min) * height;
    }
};

struct PredictionPlotPoint {
    double target = 0.0;
    double mean = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    bool has_band = false;
};

struct RenderedPlot {
    std::string svg;
    PlotLayout layout;
};

/// Targets and predictions against the test-sample index with the interval
/// band when present (log10-hours y axis). Output is timestamp-free and
/// byte-stable.
RenderedPlot render_prediction_plot(const std::string& title,
                                    const std::vector<PredictionPlotPoint>& points);

struct CurveSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> mean;
    std::vector<double> lower;  // min across seeds
    std::vector<double> upper;  // max across seeds
};

/// Learning curves (mean line + min-max band per series).
RenderedPlot render_curves_plot(const std::string& title, const std::string& x_label,
                                const std::string& y_label,
                                const std::vector<CurveSeries>& series);

}  // namespace creepuq
