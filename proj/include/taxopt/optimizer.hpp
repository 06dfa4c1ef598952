#ifndef TAXOPT_OPTIMIZER_HPP
#define TAXOPT_OPTIMIZER_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "taxopt/policy.hpp"
#include "taxopt/random.hpp"

namespace taxopt {

inline constexpr double kInfiniteDistance = std::numeric_limits<double>::infinity();

struct Individual {
    std::vector<double> genome;
    std::vector<double> objectives; // minimised
    int rank = 0;                   // 1 = first front
    double crowding = 0.0;
};

enum class MutationKind {
    per_gene,  // every gene resampled independently with the mutation probability
    per_child, // with the mutation probability, one random gene of the child is resampled
};

struct GAConfig {
    std::size_t population_size = 100;
    std::size_t generations = 20;
    double crossover_probability = 0.9;
    double mutation_probability = 0.05;
    double crossover_eta = 15.0;
    MutationKind mutation = MutationKind::per_gene;
    std::uint64_t seed = 0;
    unsigned jobs = 1; // fitness worker threads; never changes results
};

inline std::vector<std::string> validate(const GAConfig& cfg)
{
    std::vector<std::string> out;
    if (cfg.population_size < 4 || cfg.population_size % 2 != 0) {
        out.emplace_back("population size must be even and at least 4");
    }
    if (!(cfg.crossover_probability >= 0.0 && cfg.crossover_probability <= 1.0)) {
        out.emplace_back("crossover probability must lie in [0, 1]");
    }
    if (!(cfg.mutation_probability >= 0.0 && cfg.mutation_probability <= 1.0)) {
        out.emplace_back("mutation probability must lie in [0, 1]");
    }
    if (!(cfg.crossover_eta >= 0.0) || !std::isfinite(cfg.crossover_eta)) {
        out.emplace_back("crossover distribution index must be non-negative");
    }
    return out;
}

inline MutationKind parse_mutation_kind(const std::string& text)
{
    if (text == "per-gene") {
        return MutationKind::per_gene;
    }
    if (text == "per-child") {
        return MutationKind::per_child;
    }
    throw std::invalid_argument("unknown mutation kind '" + text + "' (expected per-gene or per-child)");
}

inline std::string to_string(MutationKind kind)
{
    return kind == MutationKind::per_child ? "per-child" : "per-gene";
}

struct Generation {
    std::size_t index = 0;
    std::vector<Individual> population;
};

// One snapshot per generation, the initial population included.
struct FrontArchive {
    std::vector<Generation> generations;

    [[nodiscard]] std::vector<Individual> final_front() const
    {
        std::vector<Individual> out;
        if (generations.empty()) {
            return out;
        }
        for (const auto& ind : generations.back().population) {
            if (ind.rank == 1) {
                out.push_back(ind);
            }
        }
        return out;
    }
};

class EvaluationError : public std::runtime_error {
public:
    EvaluationError(const std::string& what, std::vector<double> genome)
        : std::runtime_error(what), genome_(std::move(genome))
    {
    }

    [[nodiscard]] const std::vector<double>& genome() const noexcept { return genome_; }

private:
    std::vector<double> genome_;
};

// Minimisation: a is no worse everywhere and strictly better somewhere.
inline bool dominates(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size()) {
        throw std::invalid_argument("objective vectors differ in length");
    }
    bool strictly_better = false;
    for (std::size_t j = 0; j < a.size(); ++j) {
        if (a[j] > b[j]) {
            return false;
        }
        if (a[j] < b[j]) {
            strictly_better = true;
        }
    }
    return strictly_better;
}

// Returns fronts as index lists into `population` and writes each member's
// rank (1-based front index).
inline std::vector<std::vector<std::size_t>> fast_non_dominated_sort(std::span<Individual> population)
{
    const std::size_t n = population.size();
    std::vector<std::vector<std::size_t>> dominated_by(n);
    std::vector<std::size_t> domination_count(n, 0);
    std::vector<std::vector<std::size_t>> fronts;
    std::vector<std::size_t> current;

    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = p + 1; q < n; ++q) {
            if (dominates(population[p].objectives, population[q].objectives)) {
                dominated_by[p].push_back(q);
                ++domination_count[q];
            } else if (dominates(population[q].objectives, population[p].objectives)) {
                dominated_by[q].push_back(p);
                ++domination_count[p];
            }
        }
    }
    for (std::size_t p = 0; p < n; ++p) {
        if (domination_count[p] == 0) {
            current.push_back(p);
        }
    }
    int rank = 1;
    while (!current.empty()) {
        std::vector<std::size_t> next;
        for (const auto p : current) {
            population[p].rank = rank;
            for (const auto q : dominated_by[p]) {
                if (--domination_count[q] == 0) {
                    next.push_back(q);
                }
            }
        }
        std::sort(next.begin(), next.end());
        fronts.push_back(std::move(current));
        current = std::move(next);
        ++rank;
    }
    return fronts;
}

// Normalised cuboid distance: boundary members get +inf, interior members the
// sum over objectives of (next - prev) / (max - min). Degenerate objectives
// contribute nothing.
inline void crowding_distance(std::span<Individual> population, std::span<const std::size_t> front)
{
    for (const auto i : front) {
        population[i].crowding = 0.0;
    }
    if (front.size() <= 2) {
        for (const auto i : front) {
            population[i].crowding = kInfiniteDistance;
        }
        return;
    }
    const std::size_t m = population[front[0]].objectives.size();
    std::vector<std::size_t> order(front.begin(), front.end());
    for (std::size_t j = 0; j < m; ++j) {
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return population[a].objectives[j] < population[b].objectives[j];
        });
        const double lo = population[order.front()].objectives[j];
        const double hi = population[order.back()].objectives[j];
        population[order.front()].crowding = kInfiniteDistance;
        population[order.back()].crowding = kInfiniteDistance;
        const double range = hi - lo;
        if (!(range > 0.0)) {
            continue;
        }
        for (std::size_t k = 1; k + 1 < order.size(); ++k) {
            auto& ind = population[order[k]];
            if (ind.crowding != kInfiniteDistance) {
                ind.crowding += (population[order[k + 1]].objectives[j] - population[order[k - 1]].objectives[j]) / range;
            }
        }
    }
}

// True when a (at index ia) is preferred to b (at index ib): lower rank, then
// larger crowding distance, then lower index.
inline bool crowded_compare(const Individual& a, std::size_t ia, const Individual& b, std::size_t ib)
{
    if (a.rank != b.rank) {
        return a.rank < b.rank;
    }
    if (a.crowding != b.crowding) {
        return a.crowding > b.crowding;
    }
    return ia < ib;
}

// Two picks with replacement; returns the index of the crowded-comparison winner.
inline std::size_t binary_tournament(std::span<const Individual> population, Rng& rng)
{
    if (population.empty()) {
        throw std::invalid_argument("tournament on an empty population");
    }
    const auto a = uniform_index(rng, population.size());
    const auto b = uniform_index(rng, population.size());
    return crowded_compare(population[a], a, population[b], b) ? a : b;
}

// Simulated binary crossover (bounded form, distribution index cfg.crossover_eta),
// applied to the pair with cfg.crossover_probability; children are clamped to the box.
inline std::pair<std::vector<double>, std::vector<double>> crossover(std::span<const double> p1,
                                                                     std::span<const double> p2, Rng& rng,
                                                                     const GAConfig& cfg,
                                                                     std::span<const GeneBounds> box)
{
    if (p1.size() != p2.size() || p1.size() != box.size()) {
        throw std::invalid_argument("crossover parents and bounds differ in length");
    }
    std::vector<double> c1(p1.begin(), p1.end());
    std::vector<double> c2(p2.begin(), p2.end());
    if (!(uniform01(rng) < cfg.crossover_probability)) {
        return {std::move(c1), std::move(c2)};
    }
    const double exponent = 1.0 / (cfg.crossover_eta + 1.0);
    auto spread = [&](double beta, double u) {
        const double alpha = 2.0 - std::pow(beta, -(cfg.crossover_eta + 1.0));
        return u <= 1.0 / alpha ? std::pow(u * alpha, exponent) : std::pow(1.0 / (2.0 - u * alpha), exponent);
    };
    for (std::size_t i = 0; i < c1.size(); ++i) {
        if (uniform01(rng) > 0.5) {
            continue;
        }
        if (std::abs(p1[i] - p2[i]) <= 1e-14) {
            continue;
        }
        const double y1 = std::min(p1[i], p2[i]);
        const double y2 = std::max(p1[i], p2[i]);
        const double lo = box[i].low;
        const double hi = box[i].high;
        const double u = uniform01(rng);
        const double q1 = spread(1.0 + 2.0 * (y1 - lo) / (y2 - y1), u);
        const double q2 = spread(1.0 + 2.0 * (hi - y2) / (y2 - y1), u);
        double a = box[i].clamp(0.5 * ((y1 + y2) - q1 * (y2 - y1)));
        double b = box[i].clamp(0.5 * ((y1 + y2) + q2 * (y2 - y1)));
        if (uniform01(rng) <= 0.5) {
            std::swap(a, b);
        }
        c1[i] = a;
        c2[i] = b;
    }
    return {std::move(c1), std::move(c2)};
}

// Uniform-reset mutation. Returns the number of resample events (a resample
// may land on a value close to the old one).
inline std::size_t mutate(std::vector<double>& genome, Rng& rng, const GAConfig& cfg, std::span<const GeneBounds> box)
{
    if (genome.size() != box.size()) {
        throw std::invalid_argument("genome and bounds differ in length");
    }
    std::size_t events = 0;
    if (cfg.mutation == MutationKind::per_child) {
        if (!genome.empty() && uniform01(rng) < cfg.mutation_probability) {
            const auto i = uniform_index(rng, genome.size());
            genome[i] = uniform(rng, box[i].low, box[i].high);
            ++events;
        }
        return events;
    }
    for (std::size_t i = 0; i < genome.size(); ++i) {
        if (uniform01(rng) < cfg.mutation_probability) {
            genome[i] = uniform(rng, box[i].low, box[i].high);
            ++events;
        }
    }
    return events;
}

namespace detail {

inline std::string format_genome(std::span<const double> genome)
{
    std::ostringstream out;
    out.precision(17);
    out << '[';
    for (std::size_t i = 0; i < genome.size(); ++i) {
        out << (i != 0 ? ", " : "") << genome[i];
    }
    out << ']';
    return out.str();
}

template <class Fitness>
void evaluate_one(Fitness& fitness, Individual& ind)
{
    try {
        ind.objectives = fitness(std::span<const double>(ind.genome));
    } catch (const std::exception& e) {
        throw EvaluationError("fitness evaluation failed for genome " + format_genome(ind.genome) + ": " + e.what(),
                              ind.genome);
    }
    for (const double v : ind.objectives) {
        if (!std::isfinite(v)) {
            throw EvaluationError("non-finite objective for genome " + format_genome(ind.genome), ind.genome);
        }
    }
}

} // namespace detail

// Evaluates every individual. Work is spread over `jobs` threads; results are
// written by index so the outcome does not depend on scheduling. The first
// failure in index order is rethrown.
template <class Fitness>
void evaluate_population(Fitness& fitness, std::span<Individual> population, unsigned jobs)
{
    const std::size_t n = population.size();
    const std::size_t workers = std::min<std::size_t>(std::max(1U, jobs), n);
    if (workers <= 1) {
        for (auto& ind : population) {
            detail::evaluate_one(fitness, ind);
        }
    } else {
        std::vector<std::exception_ptr> errors(n);
        std::atomic<std::size_t> next{0};
        auto work = [&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    detail::evaluate_one(fitness, population[i]);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back(work);
        }
        for (auto& t : pool) {
            t.join();
        }
        for (const auto& e : errors) {
            if (e) {
                std::rethrow_exception(e);
            }
        }
    }
    const std::size_t m = population.empty() ? 0 : population[0].objectives.size();
    for (const auto& ind : population) {
        if (ind.objectives.size() != m || m == 0) {
            throw EvaluationError("fitness returned inconsistent objective counts", ind.genome);
        }
    }
}

// Ranks the population and computes crowding distance front by front.
inline std::vector<std::vector<std::size_t>> assign_rank_and_crowding(std::span<Individual> population)
{
    auto fronts = fast_non_dominated_sort(population);
    for (const auto& front : fronts) {
        crowding_distance(population, front);
    }
    return fronts;
}

// Elitist survivor selection over the merged pool: whole fronts while they
// fit, then the overflowing front by descending crowding distance.
inline std::vector<Individual> select_survivors(std::vector<Individual> merged, std::size_t n)
{
    const auto fronts = assign_rank_and_crowding(merged);
    std::vector<Individual> next;
    next.reserve(n);
    for (const auto& front : fronts) {
        if (next.size() + front.size() <= n) {
            for (const auto i : front) {
                next.push_back(merged[i]);
            }
            continue;
        }
        std::vector<std::size_t> order(front.begin(), front.end());
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return crowded_compare(merged[a], a, merged[b], b); });
        for (std::size_t k = 0; next.size() < n; ++k) {
            next.push_back(merged[order[k]]);
        }
        break;
    }
    return next;
}

// NSGA-II. Every random draw happens on the calling thread in a fixed order:
// initial genomes, then per generation the tournaments, crossover and
// mutation of each child pair in turn.
template <class Fitness>
FrontArchive evolve(Fitness&& fitness, const GAConfig& cfg, std::span<const GeneBounds> box)
{
    if (auto problems = validate(cfg); !problems.empty()) {
        throw std::invalid_argument("invalid GA configuration: " + problems.front());
    }
    if (box.empty()) {
        throw std::invalid_argument("genome has no genes");
    }
    Rng rng(cfg.seed);
    const std::size_t n = cfg.population_size;

    std::vector<Individual> population(n);
    for (auto& ind : population) {
        ind.genome.reserve(box.size());
        for (const auto& b : box) {
            ind.genome.push_back(uniform(rng, b.low, b.high));
        }
    }
    evaluate_population(fitness, std::span<Individual>(population), cfg.jobs);
    assign_rank_and_crowding(population);

    FrontArchive archive;
    archive.generations.push_back({0, population});

    for (std::size_t t = 1; t <= cfg.generations; ++t) {
        std::vector<Individual> children;
        children.reserve(n);
        while (children.size() < n) {
            const auto a = binary_tournament(population, rng);
            const auto b = binary_tournament(population, rng);
            auto [c1, c2] = crossover(population[a].genome, population[b].genome, rng, cfg, box);
            mutate(c1, rng, cfg, box);
            mutate(c2, rng, cfg, box);
            children.push_back({std::move(c1), {}, 0, 0.0});
            if (children.size() < n) {
                children.push_back({std::move(c2), {}, 0, 0.0});
            }
        }
        evaluate_population(fitness, std::span<Individual>(children), cfg.jobs);

        std::vector<Individual> merged = std::move(population);
        merged.insert(merged.end(), std::make_move_iterator(children.begin()), std::make_move_iterator(children.end()));
        population = select_survivors(std::move(merged), n);
        archive.generations.push_back({t, population});
    }
    return archive;
}

} // namespace taxopt

#endif
