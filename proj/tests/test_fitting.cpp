#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "collapse/fitting.hpp"
#include "collapse/rng.hpp"

using namespace collapse;

namespace {

ScalingCurve synthetic(double a, double c, const std::vector<double>& xs) {
    ScalingCurve curve;
    for (double x : xs) curve.points.push_back({x, a * std::pow(x, c), 0.0});
    return curve;
}

} // namespace

TEST_CASE("loglog_fit recovers exact power laws") {
    ScalingCurve c;
    c.points = {{10, std::pow(10, -0.5), 0}, {100, 0.1, 0}, {1000, std::pow(10, -1.5), 0}};
    PowerFit f = loglog_fit(c, {1, 1e4});
    CHECK(f.exponent == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(f.r_squared == doctest::Approx(1.0).epsilon(1e-12));

    ScalingCurve flat;
    flat.points = {{1, 0.3, 0}, {10, 0.3, 0}, {100, 0.3, 0}};
    CHECK(loglog_fit(flat, {0.5, 200}).exponent == doctest::Approx(0.0));

    auto xs = geometric_grid(1.0, 1e5, 11);
    PowerFit g = loglog_fit(synthetic(3.0, -1.0 / 3.0, xs), {0.5, 2e5});
    CHECK(g.exponent == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));
    CHECK(g.log_amplitude == doctest::Approx(std::log(3.0)).epsilon(1e-12));

    CHECK_THROWS_AS(loglog_fit(synthetic(1, -1, {1, 10}), Window{0.5, 20}), std::invalid_argument);
}

TEST_CASE("loglog_fit scale equivariance") {
    auto xs = geometric_grid(1.0, 1e4, 9);
    ScalingCurve base = synthetic(2.0, -0.7, xs);
    PowerFit f0 = loglog_fit(base, {0.5, 2e4});

    ScalingCurve scaled_y = base;
    for (auto& pt : scaled_y.points) pt.y_mean *= 13.0;
    PowerFit fy = loglog_fit(scaled_y, {0.5, 2e4});
    CHECK(fy.exponent == doctest::Approx(f0.exponent).epsilon(1e-12));
    CHECK(fy.log_amplitude == doctest::Approx(f0.log_amplitude + std::log(13.0)).epsilon(1e-9));

    ScalingCurve scaled_x = base;
    for (auto& pt : scaled_x.points) pt.x *= 5.0;
    PowerFit fx = loglog_fit(scaled_x, {0.5, 1e5});
    CHECK(fx.exponent == doctest::Approx(f0.exponent).epsilon(1e-12));
}

TEST_CASE("default window trims half a decade per side when it can") {
    auto xs = geometric_grid(1e2, 1e6, 13);
    ScalingCurve c = synthetic(1.0, -0.5, xs);
    Window w = default_fit_window(c);
    CHECK(w.x_lo == doctest::Approx(1e2 * std::sqrt(10.0)).epsilon(1e-9));
    CHECK(w.x_hi == doctest::Approx(1e6 / std::sqrt(10.0)).epsilon(1e-9));

    ScalingCurve tiny = synthetic(1.0, -0.5, {1, 2, 4});
    Window wt = default_fit_window(tiny);
    CHECK(wt.x_lo == doctest::Approx(1.0));
    CHECK(wt.x_hi == doctest::Approx(4.0));
}

TEST_CASE("plateau_level takes the tail median and reports flatness") {
    ScalingCurve flat;
    for (double x : geometric_grid(1, 1e4, 9)) flat.points.push_back({x, 0.1, 0});
    PlateauEstimate p = plateau_level(flat, 0.25);
    CHECK(p.level == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(std::abs(p.tail_slope) < 1e-9);

    // max(T^-c, 0.01) sampled past the knee
    ScalingCurve knee;
    for (double x : geometric_grid(1, 1e8, 17))
        knee.points.push_back({x, std::max(std::pow(x, -0.5), 0.01), 0});
    PlateauEstimate k = plateau_level(knee, 0.25);
    CHECK(k.level == doctest::Approx(0.01).epsilon(1e-9));

    // strictly decaying curve still returns the tail median plus a warning slope
    ScalingCurve dec = synthetic(1.0, -0.5, geometric_grid(1, 1e4, 9));
    PlateauEstimate d = plateau_level(dec, 0.3);
    CHECK(d.level > 0.0);
    CHECK(d.tail_slope < -0.4);

    CHECK_THROWS_AS(plateau_level(flat, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(plateau_level(flat, 0.9), std::invalid_argument);
}

TEST_CASE("crossover_detect finds the two-segment intersection") {
    // y = max(0.1, (pi x)^-0.5), pi = 0.01: crossover at x = 1e4
    ScalingCurve c;
    for (double x : geometric_grid(1, 1e7, 22))
        c.points.push_back({x, std::max(0.1, std::pow(0.01 * x, -0.5)), 0});
    auto fit = crossover_detect(c);
    REQUIRE(fit.has_value());
    CHECK(fit->plateau_level == doctest::Approx(0.1).epsilon(0.05));
    CHECK(fit->late_exponent == doctest::Approx(-0.5).epsilon(0.05));
    // within one grid step of 1e4 (step = 10^(7/21))
    double step = std::pow(10.0, 7.0 / 21.0);
    CHECK(fit->crossover_x > 1e4 / step);
    CHECK(fit->crossover_x < 1e4 * step);
}

TEST_CASE("crossover_detect rejects pure shapes") {
    CHECK_FALSE(crossover_detect(synthetic(1.0, -0.5, geometric_grid(1, 1e6, 13))).has_value());
    ScalingCurve flat;
    for (double x : geometric_grid(1, 1e6, 13)) flat.points.push_back({x, 0.2, 0});
    CHECK_FALSE(crossover_detect(flat).has_value());
}

TEST_CASE("crossover_detect recovers the pi scaling") {
    double prev_x = 0.0;
    for (double pi : {0.04, 0.02, 0.01, 0.005}) {
        ScalingCurve c;
        for (double x : geometric_grid(1, 1e8, 25))
            c.points.push_back({x, std::max(0.1, std::pow(pi * x, -0.5)), 0});
        auto fit = crossover_detect(c);
        REQUIRE(fit.has_value());
        if (prev_x > 0.0) {
            double ratio = fit->crossover_x / prev_x;
            double step = std::pow(10.0, 8.0 / 24.0);
            CHECK(ratio > 2.0 / step);
            CHECK(ratio < 2.0 * step);
        }
        prev_x = fit->crossover_x;
    }
}

TEST_CASE("linearity_in_n on synthetic families") {
    // E^(g) = (g + 1) T^-c: slope 1 per generation, r^2 = 1
    std::vector<ScalingCurve> gens;
    auto xs = geometric_grid(1e2, 1e4, 7);
    for (int gidx = 0; gidx <= 4; ++gidx) gens.push_back(synthetic(gidx + 1.0, -0.5, xs));
    LineFit lf = linearity_in_n(gens, {1e2, 1e4}, 0.5);
    CHECK(lf.slope == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(lf.r_squared == doctest::Approx(1.0).epsilon(1e-9));

    // identical curves: slope 0
    std::vector<ScalingCurve> same(4, synthetic(2.0, -0.5, xs));
    CHECK(linearity_in_n(same, {1e2, 1e4}, 0.5).slope == doctest::Approx(0.0).epsilon(1e-12));

    // 5% multiplicative noise keeps r^2 >= 0.9
    RngStream rng(13, 0);
    std::vector<ScalingCurve> noisy;
    for (int gidx = 0; gidx <= 5; ++gidx) {
        ScalingCurve c = synthetic(gidx + 1.0, -0.5, xs);
        for (auto& pt : c.points) pt.y_mean *= 1.0 + 0.05 * (2.0 * rng.next_double() - 1.0);
        noisy.push_back(c);
    }
    CHECK(linearity_in_n(noisy, {1e2, 1e4}, 0.5).r_squared >= 0.9);

    CHECK_THROWS_AS(linearity_in_n({gens[0], gens[1]}, {1e2, 1e4}, 0.5), std::invalid_argument);
}

TEST_CASE("fitters never produce NaN on curves with zero stderr points") {
    ScalingCurve c = synthetic(1.0, -0.4, geometric_grid(1, 1e4, 9));
    for (auto& pt : c.points) pt.y_stderr = 0.0;
    PowerFit f = loglog_fit(c, {0.5, 2e4});
    CHECK(std::isfinite(f.exponent));
    CHECK(std::isfinite(f.r_squared));
    CHECK(std::isfinite(plateau_level(c, 0.25).level));
}
