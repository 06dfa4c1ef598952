// taxopt: simulate carbon-tax policies on an agent-based electricity market and
// search them with NSGA-II.
//
//   taxopt simulate  --scenario uk_synthetic --policy flat:0 --seed 1
//   taxopt optimize  --scenario uk_synthetic --kind linear --pop 30 --gens 5 --seed 7
//   taxopt benchmark --problem zdt1 --pop 100 --gens 100 --fail-above 0.05
//   taxopt replay    --manifest out/manifest.json --out again
//
// Exit codes: 0 success, 1 invalid input, 2 runtime failure.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "taxopt/commands.hpp"

namespace {

using namespace taxopt;

void add_ga_flags(CLI::App& cmd, GAConfig& ga, std::string& mutation)
{
    cmd.add_option("--pop", ga.population_size, "Population size N (even, >= 4)")->capture_default_str();
    cmd.add_option("--gens", ga.generations, "Number of generations T")->capture_default_str();
    cmd.add_option("--crossover-prob", ga.crossover_probability, "Probability a parent pair is recombined")
        ->capture_default_str();
    cmd.add_option("--mutation-prob", ga.mutation_probability, "Mutation probability")->capture_default_str();
    cmd.add_option("--eta", ga.crossover_eta, "SBX distribution index")->capture_default_str();
    cmd.add_option("--mutation", mutation, "Mutation kind: per-gene or per-child")->capture_default_str();
    cmd.add_option("--seed", ga.seed, "Random seed")->capture_default_str();
    cmd.add_option("--jobs", ga.jobs, "Parallel fitness workers (results do not depend on it)")
        ->capture_default_str();
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Carbon-tax policy search over an agent-based electricity market"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(TAXOPT_VERSION));

    cli::SimulateOptions sim;
    std::string sim_out = cli::default_out_dir().string();
    auto* simulate = app.add_subcommand("simulate", "Run one policy through the market simulator");
    simulate->add_option("--scenario", sim.scenario, "Scenario file or fixture name")->required();
    simulate->add_option("--policy", sim.policy, "linear:a1,a2 | free:v1,...,v18 | flat:c")->required();
    simulate->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
    simulate->add_option("--out", sim_out, "Output directory")->capture_default_str();

    cli::OptimizeOptions opt;
    opt.ga.jobs = cli::default_jobs();
    std::string opt_mutation = "per-gene";
    std::string opt_out = cli::default_out_dir().string();
    auto* optimize = app.add_subcommand("optimize", "Search carbon-tax policies with NSGA-II");
    optimize->add_option("--scenario", opt.scenario, "Scenario file or fixture name")->required();
    optimize->add_option("--kind", opt.kind, "Policy encoding: free or linear")->capture_default_str();
    add_ga_flags(*optimize, opt.ga, opt_mutation);
    optimize->add_option("--out", opt_out, "Output directory")->capture_default_str();

    cli::BenchmarkOptions bench;
    bench.ga.jobs = cli::default_jobs();
    bench.ga.population_size = 50;
    bench.ga.generations = 50;
    std::string bench_mutation = "per-gene";
    std::string bench_out = cli::default_out_dir().string();
    std::optional<double> fail_above;
    auto* benchmark = app.add_subcommand("benchmark", "Validate the optimizer on an analytic problem");
    benchmark->add_option("--problem", bench.problem, "schaffer or zdt1")->required();
    add_ga_flags(*benchmark, bench.ga, bench_mutation);
    benchmark->add_option("--fail-above", fail_above, "Exit non-zero when generational distance exceeds this");
    benchmark->add_option("--out", bench_out, "Output directory")->capture_default_str();

    std::string manifest;
    std::string replay_out = cli::default_out_dir().string();
    unsigned replay_jobs = cli::default_jobs();
    auto* replay = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
    replay->add_option("--manifest", manifest, "manifest.json written by an earlier run")->required();
    replay->add_option("--out", replay_out, "Output directory")->capture_default_str();
    replay->add_option("--jobs", replay_jobs, "Parallel fitness workers")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return cli::validation_error;
    }

    try {
        if (*simulate) {
            sim.out_dir = sim_out;
            return cli::simulate(sim, std::cout);
        }
        if (*optimize) {
            opt.ga.mutation = parse_mutation_kind(opt_mutation);
            opt.out_dir = opt_out;
            return cli::optimize(opt, std::cout);
        }
        if (*benchmark) {
            bench.ga.mutation = parse_mutation_kind(bench_mutation);
            bench.fail_above = fail_above;
            bench.out_dir = bench_out;
            return cli::benchmark(bench, std::cout);
        }
        if (*replay) {
            return cli::replay(manifest, replay_out, replay_jobs, std::cout);
        }
    } catch (const cli::UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cli::validation_error;
    } catch (const ScenarioParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cli::validation_error;
    } catch (const ScenarioValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cli::validation_error;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cli::validation_error;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << '\n';
        return cli::runtime_error;
    }
    return cli::validation_error;
}
