#ifndef TAXOPT_BENCHMARKS_HPP
#define TAXOPT_BENCHMARKS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "taxopt/policy.hpp"

namespace taxopt::bench {

// Analytic two-objective test problems used to validate the optimizer apart
// from the market simulator.
struct Problem {
    std::string name;
    std::vector<GeneBounds> box;
    std::function<std::vector<double>(std::span<const double>)> objectives;
    // Point on the true front for a curve parameter s in [0, 1].
    std::function<std::pair<double, double>(double)> front_point;
};

inline Problem schaffer()
{
    return {"schaffer",
            {GeneBounds{-10.0, 10.0}},
            [](std::span<const double> x) {
                return std::vector<double>{x[0] * x[0], (x[0] - 2.0) * (x[0] - 2.0)};
            },
            [](double s) {
                const double x = 2.0 * s;
                return std::pair{x * x, (x - 2.0) * (x - 2.0)};
            }};
}

inline Problem zdt1(std::size_t variables = 30)
{
    return {"zdt1",
            std::vector<GeneBounds>(variables, GeneBounds{0.0, 1.0}),
            [](std::span<const double> x) {
                const double f1 = x[0];
                double sum = 0.0;
                for (std::size_t i = 1; i < x.size(); ++i) {
                    sum += x[i];
                }
                const double g = 1.0 + 9.0 * sum / static_cast<double>(x.size() - 1);
                return std::vector<double>{f1, g * (1.0 - std::sqrt(f1 / g))};
            },
            // s = sqrt(f1) spreads samples evenly along the steep end of the curve.
            [](double s) { return std::pair{s * s, 1.0 - s}; }};
}

inline Problem problem_by_name(const std::string& name)
{
    if (name == "schaffer") {
        return schaffer();
    }
    if (name == "zdt1") {
        return zdt1();
    }
    throw std::invalid_argument("unknown benchmark problem '" + name + "' (expected schaffer or zdt1)");
}

// Euclidean distance from an objective vector to the analytic front: dense
// sampling of the curve parameter, then golden-section refinement around the
// best sample.
inline double distance_to_front(const Problem& p, double f1, double f2)
{
    auto dist = [&](double s) {
        const auto [a, b] = p.front_point(s);
        return std::hypot(f1 - a, f2 - b);
    };
    constexpr int samples = 4096;
    int best = 0;
    double best_d = dist(0.0);
    for (int k = 1; k <= samples; ++k) {
        const double d = dist(static_cast<double>(k) / samples);
        if (d < best_d) {
            best_d = d;
            best = k;
        }
    }
    double lo = std::max(0, best - 1) / static_cast<double>(samples);
    double hi = std::min(samples, best + 1) / static_cast<double>(samples);
    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int it = 0; it < 60; ++it) {
        const double m1 = hi - ratio * (hi - lo);
        const double m2 = lo + ratio * (hi - lo);
        if (dist(m1) < dist(m2)) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    return std::min(best_d, dist(0.5 * (lo + hi)));
}

// GD = sqrt(sum of squared distances) / n over the given objective vectors.
inline double generational_distance(const Problem& p, std::span<const std::vector<double>> points)
{
    if (points.empty()) {
        throw std::invalid_argument("generational distance of an empty set");
    }
    double sum = 0.0;
    for (const auto& f : points) {
        const double d = distance_to_front(p, f.at(0), f.at(1));
        sum += d * d;
    }
    return std::sqrt(sum) / static_cast<double>(points.size());
}

} // namespace taxopt::bench

#endif
