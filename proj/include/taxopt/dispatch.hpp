#ifndef TAXOPT_DISPATCH_HPP
#define TAXOPT_DISPATCH_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "taxopt/scenario.hpp"

namespace taxopt {

struct Bid {
    std::size_t plant = 0; // position in the fleet the bids were built from
    int plant_id = 0;
    double available_mw = 0.0;
    double srmc = 0.0;
    double emission_factor = 0.0;
};

struct SegmentClearing {
    std::vector<std::pair<std::size_t, double>> dispatched; // (plant position, MW)
    double clearing_price = 0.0;
    double unserved_mw = 0.0;
};

struct PlantOutcome {
    double energy_mwh = 0.0;
    double revenue = 0.0;        // energy × clearing price
    double operating_cost = 0.0; // energy × SRMC (fuel, variable O&M, carbon)
};

struct YearResult {
    int year = 0;
    double carbon_price = 0.0;
    std::map<std::string, double> energy_by_technology; // MWh, every catalog entry present
    double emissions_t = 0.0;
    double average_price = 0.0; // demand-weighted mean clearing price
    double unserved_mwh = 0.0;
    double served_mwh = 0.0;
    double demand_mwh = 0.0;
    double carbon_intensity = 0.0; // tCO2 per served MWh
    std::vector<PlantOutcome> plants; // parallel to the fleet passed in
};

// Conditions for one cleared year. The investment look-ahead clears years
// past the horizon, so fuel prices and demand scaling are passed explicitly.
struct MarketYear {
    int year = 0;
    double carbon_price = 0.0;
    double demand_scale = 1.0;
};

inline double srmc(const Technology& tech, double fuel_price, double carbon_price)
{
    const double fuel = tech.burns_fuel() ? fuel_price / tech.efficiency : 0.0;
    return fuel + tech.variable_om + tech.emission_factor * carbon_price;
}

// SRMC of every catalog technology for the given year and carbon price.
inline std::vector<double> technology_srmc(const Scenario& s, int year, double carbon_price)
{
    std::vector<double> out;
    out.reserve(s.technologies.size());
    for (const auto& tech : s.technologies) {
        const double fuel = tech.burns_fuel() ? fuel_price_at(s, tech.fuel_kind, year) : 0.0;
        out.push_back(srmc(tech, fuel, carbon_price));
    }
    return out;
}

namespace detail {

inline void fill_bids(std::vector<Bid>& bids, std::span<const PowerPlant> fleet, const Segment& segment,
                      std::span<const double> tech_srmc, const Scenario& s)
{
    bids.clear();
    for (std::size_t i = 0; i < fleet.size(); ++i) {
        const auto& plant = fleet[i];
        const auto& tech = s.technologies[plant.technology];
        double avail = tech.capacity_mw * plant.unit_count;
        if (tech.is_intermittent()) {
            avail *= segment.capacity_factor(tech.resource);
        }
        bids.push_back({i, plant.id, avail, tech_srmc[plant.technology], tech.emission_factor});
    }
}

inline bool merit_before(const Bid& a, const Bid& b)
{
    if (a.srmc != b.srmc) {
        return a.srmc < b.srmc;
    }
    if (a.emission_factor != b.emission_factor) {
        return a.emission_factor < b.emission_factor;
    }
    return a.plant_id < b.plant_id;
}

// Greedy fill of bids already in merit order.
inline void fill_sorted(double demand_mw, std::span<const Bid> sorted, double loss_of_load_price, SegmentClearing& out)
{
    out.dispatched.clear();
    out.clearing_price = loss_of_load_price;
    double remaining = demand_mw;
    double marginal = loss_of_load_price;
    for (const auto& bid : sorted) {
        if (remaining <= 0.0) {
            break;
        }
        if (!(bid.available_mw > 0.0)) {
            continue;
        }
        const double take = std::min(bid.available_mw, remaining);
        out.dispatched.emplace_back(bid.plant, take);
        marginal = bid.srmc;
        remaining -= take;
    }
    out.unserved_mw = remaining > 0.0 ? remaining : 0.0;
    out.clearing_price = out.unserved_mw > 0.0 ? loss_of_load_price : marginal;
}

} // namespace detail

// One bid per plant; the caller filters the fleet to plants active in `year`.
inline std::vector<Bid> build_bids(std::span<const PowerPlant> fleet, int year, const Segment& segment,
                                   double carbon_price, const Scenario& s)
{
    const auto costs = technology_srmc(s, year, carbon_price);
    std::vector<Bid> bids;
    bids.reserve(fleet.size());
    detail::fill_bids(bids, fleet, segment, costs, s);
    return bids;
}

// Uniform-price merit-order clearing. Ties in SRMC go to the lower emission
// factor, then to the lower plant id.
inline SegmentClearing clear_segment(double demand_mw, std::vector<Bid> bids, double loss_of_load_price)
{
    std::sort(bids.begin(), bids.end(), detail::merit_before);
    SegmentClearing out;
    detail::fill_sorted(demand_mw, bids, loss_of_load_price, out);
    return out;
}

inline YearResult clear_year(std::span<const PowerPlant> fleet, const MarketYear& market, const Scenario& s)
{
    YearResult result;
    result.year = market.year;
    result.carbon_price = market.carbon_price;
    result.plants.assign(fleet.size(), PlantOutcome{});
    for (const auto& tech : s.technologies) {
        result.energy_by_technology[tech.name] = 0.0;
    }

    const auto costs = technology_srmc(s, market.year, market.carbon_price);
    std::vector<Bid> bids;
    bids.reserve(fleet.size());
    SegmentClearing clearing;
    std::vector<double> tech_energy(s.technologies.size(), 0.0);
    double price_weighted = 0.0;

    for (const auto& day : s.representative_days) {
        for (const auto& segment : day.segments) {
            const double demand = segment.demand_mw * market.demand_scale;
            detail::fill_bids(bids, fleet, segment, costs, s);
            std::sort(bids.begin(), bids.end(), detail::merit_before);
            detail::fill_sorted(demand, bids, s.loss_of_load_price, clearing);

            const double hours = segment.duration_hours * day.weight_days;
            for (const auto& [plant, mw] : clearing.dispatched) {
                const double energy = mw * hours;
                const auto tech = fleet[plant].technology;
                auto& outcome = result.plants[plant];
                outcome.energy_mwh += energy;
                outcome.revenue += energy * clearing.clearing_price;
                outcome.operating_cost += energy * costs[tech];
                tech_energy[tech] += energy;
                result.emissions_t += energy * s.technologies[tech].emission_factor;
            }
            result.demand_mwh += demand * hours;
            result.unserved_mwh += clearing.unserved_mw * hours;
            price_weighted += clearing.clearing_price * demand * hours;
        }
    }

    for (std::size_t t = 0; t < s.technologies.size(); ++t) {
        result.energy_by_technology[s.technologies[t].name] = tech_energy[t];
        result.served_mwh += tech_energy[t];
    }
    result.average_price = result.demand_mwh > 0.0 ? price_weighted / result.demand_mwh : 0.0;
    result.carbon_intensity = result.served_mwh > 0.0 ? result.emissions_t / result.served_mwh : 0.0;
    return result;
}

// Clears every segment of every representative day for a fleet already
// filtered to plants active in `year`.
inline YearResult run_year(std::span<const PowerPlant> fleet, int year, double carbon_price, const Scenario& s)
{
    return clear_year(fleet, {year, carbon_price, demand_scale(s, year)}, s);
}

} // namespace taxopt

#endif
