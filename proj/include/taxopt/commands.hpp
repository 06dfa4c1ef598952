#ifndef TAXOPT_COMMANDS_HPP
#define TAXOPT_COMMANDS_HPP

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "taxopt/benchmarks.hpp"
#include "taxopt/export.hpp"
#include "taxopt/optimizer.hpp"
#include "taxopt/policy.hpp"
#include "taxopt/scenario.hpp"
#include "taxopt/simulation.hpp"

#ifndef TAXOPT_VERSION
#define TAXOPT_VERSION "0.0.0"
#endif

#ifndef TAXOPT_DEFAULT_DATA_DIR
#define TAXOPT_DEFAULT_DATA_DIR "data"
#endif

namespace taxopt::cli {

namespace fs = std::filesystem;

enum ExitCode : int { ok = 0, validation_error = 1, runtime_error = 2 };

// Bad user input: flags, policy specs, scenario files, manifests.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline const std::vector<std::string> kSimulationObjectives{"objective_price", "objective_rci"};
inline const std::vector<std::string> kBenchmarkObjectives{"f1", "f2"};

inline fs::path default_out_dir()
{
    if (const char* env = std::getenv("TAXOPT_OUT_DIR"); env != nullptr && *env != '\0') {
        return env;
    }
    return "taxopt-out";
}

inline unsigned default_jobs()
{
    return std::max(1U, std::thread::hardware_concurrency());
}

// Accepts a path, a path without the .scenario suffix, or a bare fixture name
// looked up in $TAXOPT_DATA_DIR and then the installed data directory.
inline fs::path resolve_scenario_path(const std::string& arg)
{
    std::vector<fs::path> candidates{arg, arg + ".scenario"};
    std::vector<fs::path> dirs;
    if (const char* env = std::getenv("TAXOPT_DATA_DIR"); env != nullptr && *env != '\0') {
        dirs.emplace_back(env);
    }
    dirs.emplace_back(TAXOPT_DEFAULT_DATA_DIR);
    for (const auto& dir : dirs) {
        candidates.push_back(dir / arg);
        candidates.push_back(dir / (arg + ".scenario"));
    }
    for (const auto& c : candidates) {
        if (fs::is_regular_file(c)) {
            return c;
        }
    }
    throw UsageError("scenario '" + arg + "' not found");
}

struct LoadedScenario {
    Scenario scenario;
    fs::path path;
    std::string checksum;
};

inline LoadedScenario load_checked(const std::string& arg)
{
    LoadedScenario out;
    out.path = resolve_scenario_path(arg);
    out.checksum = "fnv1a64:" + hex64(fnv1a64(read_file(out.path)));
    out.scenario = load_scenario(out.path);
    return out;
}

inline nlohmann::json ga_json(const GAConfig& ga)
{
    return {{"population_size", ga.population_size},
            {"generations", ga.generations},
            {"crossover_probability", ga.crossover_probability},
            {"mutation_probability", ga.mutation_probability},
            {"crossover_eta", ga.crossover_eta},
            {"mutation", to_string(ga.mutation)}};
}

inline GAConfig ga_from_json(const nlohmann::json& j, std::uint64_t seed, unsigned jobs)
{
    GAConfig ga;
    ga.population_size = j.at("population_size").get<std::size_t>();
    ga.generations = j.at("generations").get<std::size_t>();
    ga.crossover_probability = j.at("crossover_probability").get<double>();
    ga.mutation_probability = j.at("mutation_probability").get<double>();
    ga.crossover_eta = j.at("crossover_eta").get<double>();
    ga.mutation = parse_mutation_kind(j.at("mutation").get<std::string>());
    ga.seed = seed;
    ga.jobs = jobs;
    return ga;
}

inline void check_ga(const GAConfig& ga)
{
    if (auto problems = validate(ga); !problems.empty()) {
        throw UsageError(problems.front());
    }
}

class Stopwatch {
public:
    [[nodiscard]] double seconds() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline nlohmann::json manifest(const std::string& command, nlohmann::json config, std::uint64_t seed,
                               const OutputSet& outputs, double seconds)
{
    nlohmann::json m;
    m["tool"] = "taxopt";
    m["version"] = TAXOPT_VERSION;
    m["command"] = command;
    m["seed"] = seed;
    m["config"] = std::move(config);
    m["outputs"] = nlohmann::json::array();
    for (const auto& [name, content] : outputs.files()) {
        m["outputs"].push_back({{"file", name}, {"checksum", "fnv1a64:" + hex64(fnv1a64(content))}});
    }
    m["timings"] = {{"wall_seconds", seconds}};
    return m;
}

inline void commit_with_manifest(OutputSet& outputs, const std::string& command, nlohmann::json config,
                                 std::uint64_t seed, const Stopwatch& clock)
{
    auto m = manifest(command, std::move(config), seed, outputs, clock.seconds());
    outputs.add("manifest.json", m.dump(2) + "\n");
    outputs.commit();
}

struct SimulateOptions {
    std::string scenario;
    std::string policy;
    std::uint64_t seed = 1;
    fs::path out_dir = default_out_dir();
};

inline int simulate(const SimulateOptions& opt, std::ostream& log)
{
    const Stopwatch clock;
    const auto loaded = load_checked(opt.scenario);
    const auto& s = loaded.scenario;
    CarbonPolicy policy;
    try {
        policy = parse_policy_spec(opt.policy, s.horizon_years);
    } catch (const PolicyError& e) {
        throw UsageError(e.what());
    }
    const auto result = run_simulation(s, policy, opt.seed);

    OutputSet outputs(opt.out_dir);
    std::ostringstream years, mix, objectives, events;
    write_years_csv(years, result, s);
    write_mix_csv(mix, result, s);
    write_objectives_csv(objectives, result);
    write_events_csv(events, result);
    outputs.add("years.csv", years.str());
    outputs.add("mix.csv", mix.str());
    outputs.add("objectives.csv", objectives.str());
    outputs.add("events.csv", events.str());

    nlohmann::json config{{"scenario", opt.scenario},
                          {"scenario_path", loaded.path.string()},
                          {"scenario_checksum", loaded.checksum},
                          {"policy", opt.policy},
                          {"policy_prices", trajectory(policy)}};
    commit_with_manifest(outputs, "simulate", std::move(config), opt.seed, clock);

    log << "objective_price " << format_number(result.objective_price) << "\n"
        << "objective_rci   " << format_number(result.objective_rci) << "\n";
    return ok;
}

struct OptimizeOptions {
    std::string scenario;
    std::string kind = "linear";
    GAConfig ga;
    fs::path out_dir = default_out_dir();
};

inline void print_front(std::ostream& log, const FrontArchive& archive, PolicyKind kind, int horizon)
{
    auto front = archive.final_front();
    std::sort(front.begin(), front.end(), [](const Individual& a, const Individual& b) {
        return a.objectives < b.objectives;
    });
    log << "final front (" << front.size() << " members)\n";
    log << std::setw(4) << "#" << std::setw(16) << "price" << std::setw(12) << "rci" << std::setw(12) << "tax y1"
        << std::setw(12) << "tax yH" << std::setw(12) << "mean tax" << "\n";
    for (std::size_t i = 0; i < front.size(); ++i) {
        const auto prices = trajectory(decode(front[i].genome, kind, horizon));
        double mean = 0.0;
        for (const double p : prices) {
            mean += p;
        }
        mean /= static_cast<double>(prices.size());
        log << std::setw(4) << i << std::fixed << std::setprecision(3) << std::setw(16) << front[i].objectives[0]
            << std::setw(12) << front[i].objectives[1] << std::setprecision(2) << std::setw(12) << prices.front()
            << std::setw(12) << prices.back() << std::setw(12) << mean << "\n";
        log << std::defaultfloat;
    }
}

inline int optimize(const OptimizeOptions& opt, std::ostream& log)
{
    const Stopwatch clock;
    PolicyKind kind;
    try {
        kind = parse_policy_kind(opt.kind);
    } catch (const PolicyError& e) {
        throw UsageError(e.what());
    }
    check_ga(opt.ga);
    const auto loaded = load_checked(opt.scenario);
    const auto& s = loaded.scenario;
    const auto box = bounds(kind, s.horizon_years);
    const std::uint64_t sim_seed = opt.ga.seed;

    auto fitness = [&](std::span<const double> genome) {
        const auto obj = evaluate_objectives(s, genome, kind, sim_seed);
        return std::vector<double>{obj.price, obj.rci};
    };
    const auto archive = evolve(fitness, opt.ga, box);

    OutputSet outputs(opt.out_dir);
    std::ostringstream generations;
    write_generations_csv(generations, archive, kSimulationObjectives);
    outputs.add("generations.csv", generations.str());
    auto pareto = pareto_json(archive, kSimulationObjectives, [&](const Individual& ind, nlohmann::json& m) {
        m["carbon_prices"] = trajectory(decode(ind.genome, kind, s.horizon_years));
    });
    pareto["kind"] = to_string(kind);
    pareto["start_year"] = s.start_year;
    outputs.add("pareto.json", pareto.dump(2) + "\n");

    nlohmann::json config{{"scenario", opt.scenario},
                          {"scenario_path", loaded.path.string()},
                          {"scenario_checksum", loaded.checksum},
                          {"kind", to_string(kind)},
                          {"ga", ga_json(opt.ga)},
                          {"jobs", opt.ga.jobs}};
    commit_with_manifest(outputs, "optimize", std::move(config), opt.ga.seed, clock);
    print_front(log, archive, kind, s.horizon_years);
    return ok;
}

struct BenchmarkOptions {
    std::string problem;
    GAConfig ga;
    std::optional<double> fail_above;
    fs::path out_dir = default_out_dir();
};

struct BenchmarkReport {
    double generational_distance = 0.0;
    bool passed = true;
};

inline BenchmarkReport run_benchmark(const bench::Problem& problem, const GAConfig& ga, std::optional<double> fail_above,
                                     FrontArchive* archive_out = nullptr)
{
    auto archive = evolve(problem.objectives, ga, problem.box);
    std::vector<std::vector<double>> points;
    for (const auto& ind : archive.final_front()) {
        points.push_back(ind.objectives);
    }
    BenchmarkReport report;
    report.generational_distance = bench::generational_distance(problem, points);
    report.passed = !fail_above || report.generational_distance <= *fail_above;
    if (archive_out != nullptr) {
        *archive_out = std::move(archive);
    }
    return report;
}

inline int benchmark(const BenchmarkOptions& opt, std::ostream& log)
{
    const Stopwatch clock;
    bench::Problem problem;
    try {
        problem = bench::problem_by_name(opt.problem);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    check_ga(opt.ga);
    FrontArchive archive;
    const auto report = run_benchmark(problem, opt.ga, opt.fail_above, &archive);

    OutputSet outputs(opt.out_dir);
    std::ostringstream generations;
    write_generations_csv(generations, archive, kBenchmarkObjectives);
    outputs.add("generations.csv", generations.str());
    nlohmann::json summary{{"problem", problem.name},
                           {"generational_distance", report.generational_distance},
                           {"passed", report.passed}};
    summary["fail_above"] = opt.fail_above ? nlohmann::json(*opt.fail_above) : nlohmann::json(nullptr);
    outputs.add("benchmark.json", summary.dump(2) + "\n");

    nlohmann::json config{{"problem", problem.name}, {"ga", ga_json(opt.ga)}, {"jobs", opt.ga.jobs}};
    config["fail_above"] = summary["fail_above"];
    commit_with_manifest(outputs, "benchmark", std::move(config), opt.ga.seed, clock);

    log << problem.name << " generational distance " << format_number(report.generational_distance) << "\n";
    if (!report.passed) {
        log << "above threshold " << format_number(*opt.fail_above) << "\n";
        return runtime_error;
    }
    return ok;
}

// Re-runs the command recorded in a manifest into `out_dir`. The scenario
// file must still match the recorded checksum.
inline int replay(const fs::path& manifest_path, const fs::path& out_dir, unsigned jobs, std::ostream& log)
{
    nlohmann::json m;
    try {
        m = nlohmann::json::parse(read_file(manifest_path));
    } catch (const std::exception& e) {
        throw UsageError(std::string("cannot read manifest: ") + e.what());
    }
    try {
        const auto command = m.at("command").get<std::string>();
        const auto seed = m.at("seed").get<std::uint64_t>();
        const auto& config = m.at("config");
        auto check_checksum = [&] {
            const auto path = config.at("scenario_path").get<std::string>();
            const auto expected = config.at("scenario_checksum").get<std::string>();
            if ("fnv1a64:" + hex64(fnv1a64(read_file(path))) != expected) {
                throw UsageError("scenario " + path + " changed since the manifest was written");
            }
            // Keep the argument as originally given (a fixture name, say)
            // when it still resolves to the same file, so the manifest matches.
            const auto given = config.at("scenario").get<std::string>();
            try {
                if (resolve_scenario_path(given).string() == path) {
                    return given;
                }
            } catch (const UsageError&) {
            }
            return path;
        };
        if (command == "simulate") {
            SimulateOptions opt;
            opt.scenario = check_checksum();
            opt.policy = config.at("policy").get<std::string>();
            opt.seed = seed;
            opt.out_dir = out_dir;
            return simulate(opt, log);
        }
        if (command == "optimize") {
            OptimizeOptions opt;
            opt.scenario = check_checksum();
            opt.kind = config.at("kind").get<std::string>();
            opt.ga = ga_from_json(config.at("ga"), seed, jobs);
            opt.out_dir = out_dir;
            return optimize(opt, log);
        }
        if (command == "benchmark") {
            BenchmarkOptions opt;
            opt.problem = config.at("problem").get<std::string>();
            opt.ga = ga_from_json(config.at("ga"), seed, jobs);
            if (!config.at("fail_above").is_null()) {
                opt.fail_above = config.at("fail_above").get<double>();
            }
            opt.out_dir = out_dir;
            return benchmark(opt, log);
        }
        throw UsageError("manifest names unknown command '" + command + "'");
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("malformed manifest: ") + e.what());
    }
}

} // namespace taxopt::cli

#endif
