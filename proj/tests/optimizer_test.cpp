#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

#include "taxopt/benchmarks.hpp"
#include "taxopt/optimizer.hpp"
#include "oracles.hpp"

using namespace taxopt;
using taxopt::testing::brute_force_ranks;

namespace {

Individual with_objectives(std::vector<double> f)
{
    Individual ind;
    ind.objectives = std::move(f);
    return ind;
}

std::vector<Individual> random_population(std::mt19937_64& rng, std::size_t n, std::size_t m, int levels)
{
    // Small integer grid so ties and duplicates actually occur.
    std::uniform_int_distribution<int> v(0, levels);
    std::vector<Individual> pop;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> f;
        for (std::size_t j = 0; j < m; ++j) {
            f.push_back(v(rng));
        }
        pop.push_back(with_objectives(std::move(f)));
    }
    return pop;
}

auto schaffer_fitness = [](std::span<const double> x) {
    return std::vector<double>{x[0] * x[0], (x[0] - 2.0) * (x[0] - 2.0)};
};

} // namespace

TEST(Dominates, Examples)
{
    using V = std::vector<double>;
    EXPECT_TRUE(dominates(V{1, 2}, V{2, 3}));
    EXPECT_FALSE(dominates(V{1, 2}, V{1, 2}));
    EXPECT_TRUE(dominates(V{1, 2}, V{1, 3}));
    EXPECT_FALSE(dominates(V{1, 3}, V{2, 2}));
    EXPECT_FALSE(dominates(V{2, 2}, V{1, 3}));
    EXPECT_THROW(dominates(V{1}, V{1, 2}), std::invalid_argument);
}

TEST(Dominates, IrreflexiveAntisymmetricTransitive)
{
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 3000; ++trial) {
        auto pop = random_population(rng, 3, 1 + trial % 3, 3);
        const auto& a = pop[0].objectives;
        const auto& b = pop[1].objectives;
        const auto& c = pop[2].objectives;
        EXPECT_FALSE(dominates(a, a));
        EXPECT_FALSE(dominates(a, b) && dominates(b, a));
        if (dominates(a, b) && dominates(b, c)) {
            EXPECT_TRUE(dominates(a, c));
        }
    }
}

TEST(NonDominatedSort, SmallExample)
{
    std::vector<Individual> pop{with_objectives({1, 5}), with_objectives({2, 2}), with_objectives({5, 1}),
                                with_objectives({3, 3}), with_objectives({6, 6}), with_objectives({2, 2})};
    const auto fronts = fast_non_dominated_sort(pop);
    ASSERT_EQ(fronts.size(), 3U);
    EXPECT_EQ(fronts[0], (std::vector<std::size_t>{0, 1, 2, 5}));
    EXPECT_EQ(fronts[1], (std::vector<std::size_t>{3}));
    EXPECT_EQ(fronts[2], (std::vector<std::size_t>{4}));
    EXPECT_EQ(pop[4].rank, 3);
}

TEST(NonDominatedSort, MatchesBruteForce)
{
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 300; ++trial) {
        auto pop = random_population(rng, trial % 10 == 0 ? 200 : 1 + trial % 40, 2 + trial % 3, 6);
        const auto fronts = fast_non_dominated_sort(pop);
        const auto expected = brute_force_ranks(pop);
        std::size_t total = 0;
        for (std::size_t f = 0; f < fronts.size(); ++f) {
            total += fronts[f].size();
            for (const auto i : fronts[f]) {
                EXPECT_EQ(pop[i].rank, static_cast<int>(f) + 1);
                EXPECT_EQ(pop[i].rank, expected[i]);
                for (const auto j : fronts[f]) {
                    EXPECT_FALSE(dominates(pop[i].objectives, pop[j].objectives));
                }
            }
        }
        EXPECT_EQ(total, pop.size());
    }
}

TEST(Crowding, WorkedExamples)
{
    std::vector<Individual> pop{with_objectives({0, 4}), with_objectives({1, 3}), with_objectives({2, 2}),
                                with_objectives({4, 0})};
    const std::vector<std::size_t> front{0, 1, 2, 3};
    crowding_distance(pop, front);
    EXPECT_EQ(pop[0].crowding, kInfiniteDistance);
    EXPECT_EQ(pop[3].crowding, kInfiniteDistance);
    EXPECT_DOUBLE_EQ(pop[1].crowding, 2.0 / 4.0 + 2.0 / 4.0);
    EXPECT_DOUBLE_EQ(pop[2].crowding, 3.0 / 4.0 + 3.0 / 4.0);

    std::vector<Individual> line{with_objectives({0, 2}), with_objectives({1, 1}), with_objectives({2, 0})};
    crowding_distance(line, std::vector<std::size_t>{0, 1, 2});
    EXPECT_DOUBLE_EQ(line[1].crowding, 2.0);

    std::vector<Individual> pair{with_objectives({0, 1}), with_objectives({1, 0})};
    crowding_distance(pair, std::vector<std::size_t>{0, 1});
    EXPECT_EQ(pair[0].crowding, kInfiniteDistance);
    EXPECT_EQ(pair[1].crowding, kInfiniteDistance);
}

TEST(Crowding, DegenerateObjectiveContributesNothing)
{
    std::vector<Individual> pop{with_objectives({0, 5}), with_objectives({1, 5}), with_objectives({3, 5}),
                                with_objectives({4, 5})};
    crowding_distance(pop, std::vector<std::size_t>{0, 1, 2, 3});
    EXPECT_DOUBLE_EQ(pop[1].crowding, 3.0 / 4.0);
    EXPECT_DOUBLE_EQ(pop[2].crowding, 3.0 / 4.0);
}

TEST(Crowding, InteriorValuesBoundedByObjectiveCount)
{
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Individual> pop;
        for (int i = 0; i < 12; ++i) {
            const double x = u(rng);
            pop.push_back(with_objectives({x, 1.0 - x}));
        }
        std::vector<std::size_t> front(pop.size());
        for (std::size_t i = 0; i < front.size(); ++i) {
            front[i] = i;
        }
        crowding_distance(pop, front);
        int infinite = 0;
        for (const auto& ind : pop) {
            if (ind.crowding == kInfiniteDistance) {
                ++infinite;
            } else {
                EXPECT_GE(ind.crowding, 0.0);
                EXPECT_LE(ind.crowding, 2.0 + 1e-12);
            }
        }
        EXPECT_EQ(infinite, 2);
    }
}

TEST(CrowdedCompare, Ordering)
{
    Individual a;
    Individual b;
    a.rank = 1;
    b.rank = 2;
    a.crowding = 0.1;
    b.crowding = 5.0;
    EXPECT_TRUE(crowded_compare(a, 5, b, 0));
    b.rank = 1;
    EXPECT_FALSE(crowded_compare(a, 5, b, 0));
    EXPECT_TRUE(crowded_compare(b, 0, a, 5));
    b.crowding = 0.1;
    EXPECT_TRUE(crowded_compare(b, 0, a, 5));
    EXPECT_FALSE(crowded_compare(a, 5, b, 0));
}

TEST(BinaryTournament, RankDecidesRegardlessOfCrowding)
{
    std::vector<Individual> pop(2);
    pop[0].rank = 3;
    pop[0].crowding = kInfiniteDistance;
    pop[1].rank = 1;
    pop[1].crowding = 0.0;
    Rng rng(6);
    for (int k = 0; k < 1000; ++k) {
        const auto w = binary_tournament(pop, rng);
        // only a double pick of the rank-3 member can return it
        if (w == 0) {
            continue;
        }
        EXPECT_EQ(w, 1U);
    }
    std::vector<Individual> single(1);
    EXPECT_EQ(binary_tournament(single, rng), 0U);
    EXPECT_THROW(binary_tournament(std::vector<Individual>{}, rng), std::invalid_argument);
}

TEST(BinaryTournament, BestIndividualWinsAtTheExpectedRate)
{
    // The single best of n wins whenever it is drawn at least once: 1 - (1 - 1/n)^2.
    const std::size_t n = 10;
    std::vector<Individual> pop(n);
    for (std::size_t i = 0; i < n; ++i) {
        pop[i].rank = i == 3 ? 1 : 2;
        pop[i].crowding = 1.0;
    }
    Rng rng(12);
    const int draws = 200000;
    int wins = 0;
    for (int k = 0; k < draws; ++k) {
        wins += binary_tournament(pop, rng) == 3 ? 1 : 0;
    }
    const double p = 1.0 - std::pow(1.0 - 1.0 / n, 2);
    const double sigma = std::sqrt(p * (1.0 - p) / draws);
    EXPECT_NEAR(static_cast<double>(wins) / draws, p, 5.0 * sigma);
}

TEST(Crossover, ChildrenStayInBoxAndCopiesWhenSkipped)
{
    const std::vector<GeneBounds> box{{-14.0, 14.0}, {0.0, 250.0}, {0.0, 250.0}};
    GAConfig cfg;
    Rng rng(21);
    for (int trial = 0; trial < 5000; ++trial) {
        std::vector<double> p1;
        std::vector<double> p2;
        for (const auto& b : box) {
            p1.push_back(uniform(rng, b.low, b.high));
            p2.push_back(uniform(rng, b.low, b.high));
        }
        const auto [c1, c2] = crossover(p1, p2, rng, cfg, box);
        for (std::size_t i = 0; i < box.size(); ++i) {
            EXPECT_TRUE(box[i].contains(c1[i]));
            EXPECT_TRUE(box[i].contains(c2[i]));
        }
    }
    cfg.crossover_probability = 0.0;
    const std::vector<double> a{1.0, 2.0, 3.0};
    const std::vector<double> b{4.0, 5.0, 6.0};
    const auto [c1, c2] = crossover(a, b, rng, cfg, box);
    EXPECT_EQ(c1, a);
    EXPECT_EQ(c2, b);
}

TEST(Crossover, IdenticalParentsReproduce)
{
    const std::vector<GeneBounds> box(4, GeneBounds{0.0, 1.0});
    const std::vector<double> p{0.2, 0.4, 0.6, 0.8};
    GAConfig cfg;
    cfg.crossover_probability = 1.0;
    Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        const auto [c1, c2] = crossover(p, p, rng, cfg, box);
        EXPECT_EQ(c1, p);
        EXPECT_EQ(c2, p);
    }
}

TEST(Crossover, SpreadPreservesParentMeanForInteriorGenes)
{
    // Without clamping SBX is symmetric about the parent midpoint.
    const std::vector<GeneBounds> box{{-1e6, 1e6}};
    GAConfig cfg;
    cfg.crossover_probability = 1.0;
    Rng rng(5);
    for (int trial = 0; trial < 2000; ++trial) {
        const std::vector<double> p1{10.0};
        const std::vector<double> p2{20.0};
        const auto [c1, c2] = crossover(p1, p2, rng, cfg, box);
        EXPECT_NEAR(c1[0] + c2[0], 30.0, 1e-9);
    }
}

TEST(Mutation, PerGeneFrequency)
{
    const std::vector<GeneBounds> box(18, GeneBounds{0.0, 250.0});
    GAConfig cfg;
    Rng rng(99);
    std::size_t events = 0;
    std::size_t genes = 0;
    for (int trial = 0; trial < 20000; ++trial) {
        std::vector<double> g(18, 100.0);
        events += mutate(g, rng, cfg, box);
        genes += g.size();
        for (std::size_t i = 0; i < g.size(); ++i) {
            EXPECT_TRUE(box[i].contains(g[i]));
        }
    }
    EXPECT_NEAR(static_cast<double>(events) / static_cast<double>(genes), 0.05, 0.005);
}

TEST(Mutation, ZeroAndCertainProbability)
{
    const std::vector<GeneBounds> box{{-14.0, 14.0}, {0.0, 250.0}};
    GAConfig cfg;
    Rng rng(4);
    cfg.mutation_probability = 0.0;
    std::vector<double> g{3.0, 70.0};
    EXPECT_EQ(mutate(g, rng, cfg, box), 0U);
    EXPECT_EQ(g, (std::vector<double>{3.0, 70.0}));
    cfg.mutation_probability = 1.0;
    for (int trial = 0; trial < 1000; ++trial) {
        EXPECT_EQ(mutate(g, rng, cfg, box), 2U);
        EXPECT_TRUE(box[0].contains(g[0]));
        EXPECT_TRUE(box[1].contains(g[1]));
    }
}

TEST(Mutation, PerChildTouchesAtMostOneGene)
{
    const std::vector<GeneBounds> box(18, GeneBounds{0.0, 250.0});
    GAConfig cfg;
    cfg.mutation = MutationKind::per_child;
    cfg.mutation_probability = 0.5;
    Rng rng(13);
    int mutated = 0;
    const int trials = 20000;
    for (int trial = 0; trial < trials; ++trial) {
        std::vector<double> g(18, 100.0);
        const auto events = mutate(g, rng, cfg, box);
        EXPECT_LE(events, 1U);
        const auto changed = std::count_if(g.begin(), g.end(), [](double v) { return v != 100.0; });
        EXPECT_LE(changed, 1);
        mutated += static_cast<int>(events);
    }
    EXPECT_NEAR(static_cast<double>(mutated) / trials, 0.5, 0.02);
}

TEST(GAConfigValidation, RejectsBadSettings)
{
    GAConfig cfg;
    EXPECT_TRUE(validate(cfg).empty());
    cfg.population_size = 7;
    EXPECT_FALSE(validate(cfg).empty());
    cfg.population_size = 2;
    EXPECT_FALSE(validate(cfg).empty());
    cfg = GAConfig{};
    cfg.mutation_probability = 1.5;
    EXPECT_FALSE(validate(cfg).empty());
    cfg = GAConfig{};
    cfg.crossover_probability = -0.1;
    EXPECT_FALSE(validate(cfg).empty());
    EXPECT_THROW(evolve(schaffer_fitness, cfg, std::vector<GeneBounds>{{-10.0, 10.0}}), std::invalid_argument);
    EXPECT_THROW(parse_mutation_kind("sometimes"), std::invalid_argument);
}

TEST(Evolve, ZeroGenerationsReturnsRankedInitialPopulation)
{
    GAConfig cfg;
    cfg.population_size = 20;
    cfg.generations = 0;
    const std::vector<GeneBounds> box{{-10.0, 10.0}};
    const auto archive = evolve(schaffer_fitness, cfg, box);
    ASSERT_EQ(archive.generations.size(), 1U);
    EXPECT_EQ(archive.generations[0].population.size(), 20U);
    for (const auto& ind : archive.generations[0].population) {
        EXPECT_GE(ind.rank, 1);
        EXPECT_TRUE(box[0].contains(ind.genome[0]));
    }
}

TEST(Evolve, SchafferFrontConverges)
{
    GAConfig cfg;
    cfg.population_size = 40;
    cfg.generations = 40;
    cfg.seed = 1;
    const auto problem = bench::schaffer();
    const auto archive = evolve(problem.objectives, cfg, problem.box);
    ASSERT_EQ(archive.generations.size(), 41U);
    const auto front = archive.final_front();
    std::vector<std::vector<double>> points;
    for (const auto& ind : front) {
        EXPECT_GE(ind.genome[0], -1e-3);
        EXPECT_LE(ind.genome[0], 2.0 + 1e-3);
        points.push_back(ind.objectives);
    }
    EXPECT_LT(bench::generational_distance(problem, points), 1e-3);
}

TEST(Evolve, PopulationSizeRanksAndElitism)
{
    GAConfig cfg;
    cfg.population_size = 24;
    cfg.generations = 15;
    cfg.seed = 5;
    const auto problem = bench::zdt1(6);
    const auto archive = evolve(problem.objectives, cfg, problem.box);
    for (std::size_t t = 0; t < archive.generations.size(); ++t) {
        auto pop = archive.generations[t].population;
        ASSERT_EQ(pop.size(), 24U);
        for (std::size_t i = 0; i < pop.size(); ++i) {
            for (std::size_t j = 0; j < pop.size(); ++j) {
                if (pop[i].rank == pop[j].rank) {
                    EXPECT_FALSE(dominates(pop[i].objectives, pop[j].objectives));
                }
            }
        }
        if (t == 0) {
            continue;
        }
        // Elitism: an old rank-1 point is kept or dominated by a survivor,
        // unless the merged first front alone overflowed the population.
        const auto& prev = archive.generations[t - 1].population;
        const bool overflowed =
            std::all_of(pop.begin(), pop.end(), [](const Individual& ind) { return ind.rank == 1; });
        for (const auto& old : prev) {
            if (old.rank != 1) {
                continue;
            }
            const bool kept_or_beaten = std::any_of(pop.begin(), pop.end(), [&](const Individual& now) {
                return now.objectives == old.objectives || dominates(now.objectives, old.objectives);
            });
            EXPECT_TRUE(kept_or_beaten || overflowed);
        }
    }
}

TEST(Evolve, DeterministicForSeedAndIndependentOfJobs)
{
    GAConfig cfg;
    cfg.population_size = 16;
    cfg.generations = 8;
    cfg.seed = 77;
    const auto problem = bench::zdt1(5);
    const auto a = evolve(problem.objectives, cfg, problem.box);
    cfg.jobs = 4;
    const auto b = evolve(problem.objectives, cfg, problem.box);
    ASSERT_EQ(a.generations.size(), b.generations.size());
    for (std::size_t t = 0; t < a.generations.size(); ++t) {
        for (std::size_t i = 0; i < a.generations[t].population.size(); ++i) {
            EXPECT_EQ(a.generations[t].population[i].genome, b.generations[t].population[i].genome);
            EXPECT_EQ(a.generations[t].population[i].objectives, b.generations[t].population[i].objectives);
        }
    }
    cfg.seed = 78;
    const auto c = evolve(problem.objectives, cfg, problem.box);
    EXPECT_NE(a.generations.back().population[0].genome, c.generations.back().population[0].genome);
}

TEST(Evolve, FitnessFailureNamesTheGenome)
{
    GAConfig cfg;
    cfg.population_size = 8;
    cfg.generations = 2;
    cfg.jobs = 3;
    auto failing = [](std::span<const double> x) -> std::vector<double> {
        if (x[0] > 0.0) {
            throw std::runtime_error("boom");
        }
        return {x[0], -x[0]};
    };
    try {
        evolve(failing, cfg, std::vector<GeneBounds>{{-1.0, 1.0}});
        FAIL() << "expected an evaluation error";
    } catch (const EvaluationError& e) {
        ASSERT_EQ(e.genome().size(), 1U);
        EXPECT_GT(e.genome()[0], 0.0);
        EXPECT_NE(std::string(e.what()).find("boom"), std::string::npos);
    }

    auto non_finite = [](std::span<const double>) { return std::vector<double>{std::nan(""), 0.0}; };
    EXPECT_THROW(evolve(non_finite, cfg, std::vector<GeneBounds>{{-1.0, 1.0}}), EvaluationError);
}

TEST(Benchmarks, DistanceToFront)
{
    const auto s = bench::schaffer();
    EXPECT_NEAR(bench::distance_to_front(s, 1.0, 1.0), 0.0, 1e-9);
    const auto z = bench::zdt1(30);
    EXPECT_NEAR(bench::distance_to_front(z, 0.25, 0.5), 0.0, 1e-9);
    EXPECT_NEAR(bench::distance_to_front(z, 0.0, 2.0), 1.0, 1e-6);
    const std::vector<std::vector<double>> on_front{{0.0, 1.0}, {1.0, 0.0}};
    EXPECT_NEAR(bench::generational_distance(z, on_front), 0.0, 1e-9);
}
