#include "collapse/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace collapse {

namespace {

void check_curve(const ScalingCurve& curve) {
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
        const auto& pt = curve.points[i];
        if (!(pt.x > 0.0)) throw std::invalid_argument("curve: x must be positive");
        if (i > 0 && !(pt.x > curve.points[i - 1].x))
            throw std::invalid_argument("curve: x must be strictly increasing");
    }
}

} // namespace

LineFit line_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw std::invalid_argument("line_fit: need >= 2 paired points");
    double n = static_cast<double>(xs.size());
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) { sx += xs[i]; sy += ys[i]; }
    double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double dx = xs[i] - mx, dy = ys[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    LineFit out;
    out.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    out.intercept = my - out.slope * mx;
    if (syy > 0.0) {
        double ss_res = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            double r = ys[i] - (out.intercept + out.slope * xs[i]);
            ss_res += r * r;
        }
        out.r_squared = 1.0 - ss_res / syy;
    } else {
        out.r_squared = 1.0; // constant data, perfectly fit by the constant line
    }
    return out;
}

Window default_fit_window(const ScalingCurve& curve) {
    check_curve(curve);
    if (curve.points.empty()) throw std::invalid_argument("default_fit_window: empty curve");
    double lo = curve.points.front().x;
    double hi = curve.points.back().x;
    const double half_decade = std::sqrt(10.0);
    double wlo = lo * half_decade;
    double whi = hi / half_decade;
    int inside = 0;
    for (const auto& pt : curve.points)
        if (pt.x >= wlo && pt.x <= whi) ++inside;
    if (inside >= 3) return {wlo, whi};
    return {lo, hi};
}

PowerFit loglog_fit(const ScalingCurve& curve, const Window& window) {
    check_curve(curve);
    std::vector<double> lx, ly;
    for (const auto& pt : curve.points) {
        if (pt.x < window.x_lo || pt.x > window.x_hi) continue;
        if (!(pt.y_mean > 0.0))
            throw std::invalid_argument("loglog_fit: y must be positive inside the window");
        lx.push_back(std::log(pt.x));
        ly.push_back(std::log(pt.y_mean));
    }
    if (lx.size() < 3) throw std::invalid_argument("loglog_fit: need >= 3 points in window");
    LineFit lf = line_fit(lx, ly);
    PowerFit out;
    out.exponent = lf.slope;
    out.log_amplitude = lf.intercept;
    out.r_squared = lf.r_squared;
    out.window = window;
    return out;
}

PowerFit loglog_fit(const ScalingCurve& curve) {
    return loglog_fit(curve, default_fit_window(curve));
}

PlateauEstimate plateau_level(const ScalingCurve& curve, double tail_fraction) {
    check_curve(curve);
    if (!(tail_fraction > 0.0) || tail_fraction > 0.5)
        throw std::invalid_argument("plateau_level: tail_fraction must be in (0, 0.5]");
    std::size_t n = curve.points.size();
    if (n == 0) throw std::invalid_argument("plateau_level: empty curve");
    auto take = static_cast<std::size_t>(std::ceil(tail_fraction * static_cast<double>(n)));
    take = std::max<std::size_t>(take, 1);
    std::vector<double> tail_y;
    std::vector<double> lx, ly;
    for (std::size_t i = n - take; i < n; ++i) {
        tail_y.push_back(curve.points[i].y_mean);
        if (curve.points[i].y_mean > 0.0) {
            lx.push_back(std::log(curve.points[i].x));
            ly.push_back(std::log(curve.points[i].y_mean));
        }
    }
    std::sort(tail_y.begin(), tail_y.end());
    PlateauEstimate out;
    out.level = tail_y.size() % 2 == 1 ? tail_y[tail_y.size() / 2]
                                       : 0.5 * (tail_y[tail_y.size() / 2 - 1] + tail_y[tail_y.size() / 2]);
    out.tail_slope = lx.size() >= 2 ? line_fit(lx, ly).slope : 0.0;
    return out;
}

std::optional<CrossoverFit> crossover_detect(const ScalingCurve& curve,
                                             std::optional<double> plateau_hint) {
    check_curve(curve);
    std::size_t n = curve.points.size();
    if (n < 5) return std::nullopt;
    for (const auto& pt : curve.points)
        if (!(pt.y_mean > 0.0)) return std::nullopt;

    std::vector<double> lx(n), ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        lx[i] = std::log(curve.points[i].x);
        ly[i] = std::log(curve.points[i].y_mean);
    }

    // shape diagnostic: the curve must contain both a flat-ish window
    // (slope > -0.05) and a decaying window (slope < -0.1); pure power
    // laws and pure plateaus carry no knee to detect
    const std::size_t w = 3;
    bool has_flat = false, has_decay = false;
    for (std::size_t i = 0; i + w <= n; ++i) {
        LineFit local = line_fit({lx.begin() + i, lx.begin() + i + w},
                                 {ly.begin() + i, ly.begin() + i + w});
        if (local.slope > -0.05) has_flat = true;
        if (local.slope < -0.1) has_decay = true;
    }
    if (!has_flat || !has_decay) return std::nullopt;

    // two-segment model in either orientation (plateau-then-power for
    // grokking curves, power-then-plateau for tail-cut curves); the
    // breakpoint minimizes squared log residuals and the crossover is the
    // intersection of the two segments
    double best_cost = std::numeric_limits<double>::infinity();
    CrossoverFit best;
    bool found = false;
    auto consider = [&](double level, const LineFit& power, double cost) {
        if (!(power.slope < -0.05)) return;
        if (cost >= best_cost) return;
        best_cost = cost;
        double lx_star = (std::log(level) - power.intercept) / power.slope;
        best.plateau_level = level;
        best.crossover_x = std::exp(lx_star);
        best.late_exponent = power.slope;
        found = true;
    };
    auto flat_level = [&](std::size_t lo, std::size_t hi) {
        if (plateau_hint) return *plateau_hint;
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += ly[i];
        return std::exp(s / static_cast<double>(hi - lo));
    };
    auto segment_cost = [&](std::size_t lo, std::size_t hi, double level, const LineFit* power) {
        double cost = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            double fit_y = power ? power->intercept + power->slope * lx[i] : std::log(level);
            double r = ly[i] - fit_y;
            cost += r * r;
        }
        return cost;
    };
    for (std::size_t b = 2; b + 2 <= n; ++b) {
        // flat on [0, b), power on [b, n)
        {
            double level = flat_level(0, b);
            LineFit power = line_fit({lx.begin() + b, lx.end()}, {ly.begin() + b, ly.end()});
            double cost = segment_cost(0, b, level, nullptr) + segment_cost(b, n, 0.0, &power);
            consider(level, power, cost);
        }
        // power on [0, b), flat on [b, n)
        {
            double level = flat_level(b, n);
            LineFit power = line_fit({lx.begin(), lx.begin() + b}, {ly.begin(), ly.begin() + b});
            double cost = segment_cost(b, n, level, nullptr) + segment_cost(0, b, 0.0, &power);
            consider(level, power, cost);
        }
    }
    if (!found) return std::nullopt;
    // keep the reported crossover inside the data range
    best.crossover_x = std::clamp(best.crossover_x, curve.points.front().x, curve.points.back().x);
    return best;
}

LineFit linearity_in_n(const std::vector<ScalingCurve>& per_generation, const Window& t_window,
                       double c) {
    if (per_generation.size() < 3)
        throw std::invalid_argument("linearity_in_n: need >= 3 generations");
    std::vector<double> gs, stats;
    for (std::size_t g = 0; g < per_generation.size(); ++g) {
        const auto& curve = per_generation[g];
        double acc = 0.0;
        int cnt = 0;
        for (const auto& pt : curve.points) {
            if (pt.x < t_window.x_lo || pt.x > t_window.x_hi) continue;
            acc += pt.y_mean * std::pow(pt.x, c);
            ++cnt;
        }
        if (cnt == 0) throw std::invalid_argument("linearity_in_n: empty window for a generation");
        gs.push_back(static_cast<double>(g));
        stats.push_back(acc / cnt);
    }
    return line_fit(gs, stats);
}

std::vector<double> geometric_grid(double lo, double hi, int points) {
    if (!(lo > 0.0) || !(hi > lo) || points < 2)
        throw std::invalid_argument("geometric_grid: need 0 < lo < hi and >= 2 points");
    std::vector<double> xs(points);
    double step = std::log(hi / lo) / (points - 1);
    for (int i = 0; i < points; ++i) xs[i] = lo * std::exp(step * i);
    xs.back() = hi;
    return xs;
}

std::vector<uint64_t> geometric_grid_u64(double lo, double hi, int points) {
    auto g = geometric_grid(lo, hi, points);
    std::vector<uint64_t> xs;
    uint64_t prev = 0;
    for (double v : g) {
        auto t = static_cast<uint64_t>(std::llround(v));
        if (t <= prev) t = prev + 1;
        xs.push_back(t);
        prev = t;
    }
    return xs;
}

} // namespace collapse
