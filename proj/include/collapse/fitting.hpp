#ifndef COLLAPSE_FITTING_HPP
#define COLLAPSE_FITTING_HPP

#include <optional>
#include <string>
#include <vector>

namespace collapse {

struct CurvePoint {
    double x = 0.0;        // sample size, dimension, cutoff, ...
    double y_mean = 0.0;   // measured error, > 0 for log-domain fitting
    double y_stderr = 0.0; // 0 for exact curves
};

struct ScalingCurve {
    std::vector<CurvePoint> points; // x strictly increasing
    std::string tag;                // experiment label carried into CSV
};

struct Window {
    double x_lo;
    double x_hi;
};

struct PowerFit {
    double exponent = 0.0;
    double log_amplitude = 0.0; // natural log of the amplitude
    double r_squared = 0.0;
    Window window{0.0, 0.0};
};

struct PlateauEstimate {
    double level = 0.0;
    double tail_slope = 0.0; // flatness diagnostic over the tail points
};

struct CrossoverFit {
    double plateau_level = 0.0;
    double crossover_x = 0.0;
    double late_exponent = 0.0;
};

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

// Default exponent-fit window: drop half a decade at each end to dodge
// transients and plateau onset, provided >= 3 points survive.
Window default_fit_window(const ScalingCurve& curve);

// OLS on (log x, log y) over points inside the window; needs >= 3 points
PowerFit loglog_fit(const ScalingCurve& curve, const Window& window);
PowerFit loglog_fit(const ScalingCurve& curve); // default window

// median of y over the largest-x tail_fraction of points (by count)
PlateauEstimate plateau_level(const ScalingCurve& curve, double tail_fraction);

// Two-segment flat/power fit, either orientation: plateau-then-decay
// (grokking curves) or decay-then-plateau (tail-cut curves). crossover_x
// is the segment intersection, late_exponent the power-segment slope.
// Empty when the shape diagnostic fails: the curve needs both a window
// with slope > -0.05 and one with slope < -0.1.
std::optional<CrossoverFit> crossover_detect(const ScalingCurve& curve,
                                             std::optional<double> plateau_hint = std::nullopt);

// Per-generation statistic mean(y * x^c) over the window, then a least
// squares line of that statistic against the generation index.
LineFit linearity_in_n(const std::vector<ScalingCurve>& per_generation, const Window& t_window,
                       double c);

// plain OLS helper on (x, y)
LineFit line_fit(const std::vector<double>& xs, const std::vector<double>& ys);

// geometric grid helpers used by experiments and the CLI
std::vector<double> geometric_grid(double lo, double hi, int points);
std::vector<uint64_t> geometric_grid_u64(double lo, double hi, int points);

} // namespace collapse

#endif
