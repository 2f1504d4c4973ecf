#pragma once

#include <array>
#include <cmath>
#include <random>
#include <string>

#include "weylscope/geometry.hpp"

namespace testing_support {

using weylscope::ChartPoint;

inline ChartPoint random_point(std::mt19937_64& rng, double lo = -0.8, double hi = 0.8) {
    std::uniform_real_distribution<double> d(lo, hi);
    return {d(rng), d(rng), d(rng), d(rng)};
}

inline weylscope::Expression ex(const std::string& s) { return weylscope::parse_expression(s); }

inline weylscope::MetricPtr components(const std::array<std::string, 10>& src,
                                       weylscope::Box box = weylscope::Box::cube(-1.0, 1.0)) {
    std::array<weylscope::Expression, 10> e;
    for (std::size_t i = 0; i < 10; ++i) e[i] = ex(src[i]);
    return weylscope::metric_from_components(e, box);
}

// A metric with no symmetry: every component depends on every variable.
inline weylscope::MetricPtr generic_metric() {
    return components({"1 + 0.2*sin(x0 + 2*x1) + 0.1*x2^2", "0.1*x2*x3 + 0.05*cos(x0)", "0.07*x0*x1", "0.03*exp(x3)",
                       "1.3 + 0.1*x0*x3 + 0.1*sin(x2)", "0.05*x1^2 - 0.02*x0", "0.04*atan(x0 + x2)",
                       "0.9 + 0.15*cos(x1*x3)", "0.06*x0*x3 + 0.02*sin(x1)", "1.1 + 0.1*x1*x2 + 0.05*x0^2"});
}

inline weylscope::MetricPtr round_s4() {
    const std::string c = "4/(1 + x0^2 + x1^2 + x2^2 + x3^2)^2";
    return components({c, "0", "0", "0", c, "0", "0", c, "0", c}, weylscope::Box::cube(-2.0, 2.0));
}

inline weylscope::MetricPtr fubini_study() {
    return weylscope::metric_from_kahler_potential(ex("log(1 + x0^2 + x1^2 + x2^2 + x3^2)"),
                                                   weylscope::Box::cube(-2.0, 2.0), "fs");
}

inline weylscope::MetricPtr s2xs2() {
    return weylscope::metric_from_kahler_potential(ex("2*log(1 + x0^2 + x1^2) + 2*log(1 + x2^2 + x3^2)"),
                                                   weylscope::Box::cube(-2.0, 2.0), "s2xs2");
}

inline weylscope::MetricPtr euclidean() {
    return components({"1", "0", "0", "0", "1", "0", "0", "1", "0", "1"});
}

}  // namespace testing_support
