// Minimal use of the optimizer on a user-defined problem: two conflicting
// quadratics in two variables. Prints the final first front.

#include <cstdio>
#include <span>
#include <vector>

#include "taxopt/optimizer.hpp"

int main()
{
    using namespace taxopt;

    const std::vector<GeneBounds> box{{-5.0, 5.0}, {-5.0, 5.0}};
    auto fitness = [](std::span<const double> x) {
        const double a = x[0] * x[0] + x[1] * x[1];
        const double b = (x[0] - 1.0) * (x[0] - 1.0) + (x[1] - 1.0) * (x[1] - 1.0);
        return std::vector<double>{a, b};
    };

    GAConfig cfg;
    cfg.population_size = 40;
    cfg.generations = 40;
    cfg.seed = 3;
    const auto archive = evolve(fitness, cfg, box);

    for (const auto& ind : archive.final_front()) {
        std::printf("x = (%.3f, %.3f)  f = (%.4f, %.4f)\n", ind.genome[0], ind.genome[1], ind.objectives[0],
                    ind.objectives[1]);
    }
    return 0;
}
