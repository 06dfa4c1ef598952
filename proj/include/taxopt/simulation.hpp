#ifndef TAXOPT_SIMULATION_HPP
#define TAXOPT_SIMULATION_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "taxopt/dispatch.hpp"
#include "taxopt/investment.hpp"
#include "taxopt/policy.hpp"
#include "taxopt/random.hpp"
#include "taxopt/scenario.hpp"

namespace taxopt {

struct SimulationEvent {
    int year = 0;
    std::string kind; // invest, commission or retire
    std::string genco;
    std::string technology;
    int plant_id = 0;
    int unit_count = 0;
    double npv = 0.0;
    double capital = 0.0;
};

struct SimulationResult {
    std::vector<YearResult> per_year;
    std::vector<double> capacity_mw_by_year; // installed active capacity per year
    double base_carbon_intensity = 0.0;
    double objective_price = 0.0;
    double objective_rci = 0.0;
    std::vector<SimulationEvent> events;
};

struct Objectives {
    double price = 0.0;
    double rci = 0.0;
};

// Carbon intensity the relative objective is measured against: the scenario
// value when given, else the start-year fleet cleared at zero carbon price.
inline double resolve_base_carbon_intensity(const Scenario& s)
{
    if (s.base_carbon_intensity) {
        return *s.base_carbon_intensity;
    }
    const auto fleet = active_fleet(s.initial_fleet, s, s.start_year);
    return run_year(fleet, s.start_year, 0.0, s).carbon_intensity;
}

inline double relative_carbon_intensity(double intensity, double base)
{
    if (intensity == 0.0) {
        return 0.0;
    }
    if (!(base > 0.0)) {
        throw ConfigurationError("base carbon intensity is zero; set base_carbon_intensity in the scenario");
    }
    return intensity / base;
}

inline SimulationResult run_simulation(const Scenario& s, const CarbonPolicy& policy, std::uint64_t seed)
{
    if (horizon_of(policy) < s.horizon_years) {
        throw PolicyError("policy covers " + std::to_string(horizon_of(policy)) + " years, scenario needs " +
                          std::to_string(s.horizon_years));
    }

    SimulationResult result;
    result.base_carbon_intensity = resolve_base_carbon_intensity(s);

    Rng rng(seed);
    std::vector<PowerPlant> fleet = s.initial_fleet;
    std::vector<GenCo> gencos = s.gencos;
    std::sort(gencos.begin(), gencos.end(), [](const GenCo& a, const GenCo& b) { return a.id < b.id; });
    std::vector<PriceObservation> history;

    for (int y = 1; y <= s.horizon_years; ++y) {
        const int year = s.calendar_year(y);
        const double carbon_price = price_at(policy, y);

        std::vector<PowerPlant> kept;
        kept.reserve(fleet.size());
        for (const auto& p : fleet) {
            const auto& tech = s.technologies[p.technology];
            if (p.commission_year + tech.lifetime_years <= year) {
                result.events.push_back({year, "retire", p.owner, tech.name, p.id, p.unit_count, 0.0, 0.0});
            } else {
                kept.push_back(p);
            }
        }
        fleet = std::move(kept);

        history.emplace_back(year, carbon_price);
        for (auto& genco : gencos) {
            for (const auto& d : invest(genco, year, s, fleet, history)) {
                result.events.push_back({year, "invest", d.genco, d.technology, d.plant_id, d.unit_count, d.npv, d.capital});
            }
        }

        const auto active = active_fleet(fleet, s, year);
        for (const auto& p : active) {
            if (p.commission_year == year) {
                result.events.push_back({year, "commission", p.owner, s.technologies[p.technology].name, p.id,
                                         p.unit_count, 0.0, 0.0});
            }
        }

        double scale = demand_scale(s, year);
        if (s.demand_jitter > 0.0) {
            scale *= 1.0 + uniform(rng, -s.demand_jitter, s.demand_jitter);
        }
        double capacity = 0.0;
        for (const auto& p : active) {
            capacity += s.technologies[p.technology].capacity_mw * p.unit_count;
        }
        auto year_result = clear_year(active, {year, carbon_price, scale}, s);
        year_result.plants.clear();
        result.per_year.push_back(std::move(year_result));
        result.capacity_mw_by_year.push_back(capacity);
    }

    const auto& last = result.per_year.back();
    result.objective_price = last.average_price;
    result.objective_rci = relative_carbon_intensity(last.carbon_intensity, result.base_carbon_intensity);
    return result;
}

// Fitness handed to the optimizer: decode, simulate, read the final-year objectives.
inline Objectives evaluate_objectives(const Scenario& s, std::span<const double> genome, PolicyKind kind,
                                      std::uint64_t seed)
{
    const auto policy = decode(genome, kind, s.horizon_years);
    const auto result = run_simulation(s, policy, seed);
    return {result.objective_price, result.objective_rci};
}

} // namespace taxopt

#endif
