#ifndef TAXOPT_INVESTMENT_HPP
#define TAXOPT_INVESTMENT_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "taxopt/dispatch.hpp"
#include "taxopt/scenario.hpp"

namespace taxopt {

// How far ahead GenCos simulate the market when pricing a new plant.
inline constexpr int kLookaheadYears = 10;

// Hard stop on purchases by one GenCo in one year; NPV saturation or the
// budget normally ends the loop long before this.
inline constexpr int kMaxPurchasesPerYear = 200;

using PriceObservation = std::pair<int, double>; // (calendar year, £/tCO2)

struct CarbonForecast {
    double slope = 0.0;
    double intercept = 0.0;

    [[nodiscard]] double at(double year) const { return slope * year + intercept; }
};

struct InvestmentDecision {
    std::string genco;
    std::string technology;
    int plant_id = 0;
    int unit_count = 1;
    int commission_year = 0;
    double npv = 0.0;
    double capital = 0.0;
};

// Ordinary least squares through the history. A history with a single
// distinct year gives a flat line at the mean price.
inline CarbonForecast fit_carbon_forecast(std::span<const PriceObservation> history)
{
    if (history.empty()) {
        throw std::invalid_argument("carbon price history is empty");
    }
    const double n = static_cast<double>(history.size());
    double mean_x = 0.0;
    double mean_y = 0.0;
    for (const auto& [x, y] : history) {
        mean_x += x;
        mean_y += y;
    }
    mean_x /= n;
    mean_y /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (const auto& [x, y] : history) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    if (sxx == 0.0) {
        return {0.0, mean_y};
    }
    const double slope = sxy / sxx;
    return {slope, mean_y - slope * mean_x};
}

inline double forecast_carbon_price(std::span<const PriceObservation> history, int target_year)
{
    return fit_carbon_forecast(history).at(target_year);
}

// Sum of R_t / (1 + i)^t for t = 0..N.
inline double npv(std::span<const double> cash_flows, double discount_rate)
{
    if (!(discount_rate > -1.0)) {
        throw std::invalid_argument("discount rate must exceed -1");
    }
    double total = 0.0;
    double factor = 1.0;
    for (const double r : cash_flows) {
        total += r / factor;
        factor *= 1.0 + discount_rate;
    }
    return total;
}

namespace detail {

struct RevenueContext {
    int future_year = 0;
    MarketYear market;
    std::vector<PowerPlant> future_fleet; // committed plants alive in future_year
    int candidate_id = 0;
};

inline RevenueContext revenue_context(int decision_year, const Scenario& s, std::span<const PowerPlant> fleet,
                                      const CarbonForecast& forecast)
{
    RevenueContext ctx;
    ctx.future_year = decision_year + kLookaheadYears;
    ctx.market = {ctx.future_year, forecast.at(ctx.future_year), demand_scale(s, ctx.future_year)};
    int max_id = -1;
    for (const auto& p : fleet) {
        max_id = std::max(max_id, p.id);
        if (is_active(p, s, ctx.future_year)) {
            ctx.future_fleet.push_back(p);
        }
    }
    ctx.candidate_id = max_id + 1;
    return ctx;
}

inline double candidate_cash_flow(RevenueContext& ctx, std::size_t tech_index, const std::string& owner,
                                  const Scenario& s)
{
    const auto& tech = s.technologies.at(tech_index);
    ctx.future_fleet.push_back({ctx.candidate_id, tech_index, owner, ctx.future_year, 1});
    YearResult year;
    try {
        year = clear_year(ctx.future_fleet, ctx.market, s);
    } catch (...) {
        ctx.future_fleet.pop_back();
        throw;
    }
    ctx.future_fleet.pop_back();
    const auto& outcome = year.plants.back();
    return outcome.revenue - outcome.operating_cost - tech.fixed_om * tech.capacity_mw;
}

} // namespace detail

// Net yearly cash flow of one unit of `candidate` built on top of `fleet`,
// priced by clearing the market kLookaheadYears ahead at the forecast carbon
// price. Fuel prices past the scenario's series hold at their last value.
inline double estimate_yearly_revenue(std::size_t candidate, int decision_year, const Scenario& s,
                                      std::span<const PowerPlant> fleet, const CarbonForecast& forecast,
                                      const std::string& owner = {})
{
    auto ctx = detail::revenue_context(decision_year, s, fleet, forecast);
    return detail::candidate_cash_flow(ctx, candidate, owner, s);
}

// NPV of one unit: R_0 = -capital, R_t = yearly cash flow for t = 1..lifetime.
inline double unit_npv(const Technology& tech, double yearly_cash_flow, double discount_rate)
{
    std::vector<double> flows(static_cast<std::size_t>(tech.lifetime_years) + 1, yearly_cash_flow);
    flows[0] = -tech.capital_cost * tech.capacity_mw;
    return npv(flows, discount_rate);
}

// Buys the highest-NPV affordable unit while any positive option remains.
// New plants are appended to `fleet` (ids ascending) and the budget is debited.
inline std::vector<InvestmentDecision> invest(GenCo& genco, int decision_year, const Scenario& s,
                                              std::vector<PowerPlant>& fleet,
                                              std::span<const PriceObservation> carbon_history)
{
    std::vector<InvestmentDecision> decisions;
    const auto forecast = fit_carbon_forecast(carbon_history);

    for (int round = 0; round < kMaxPurchasesPerYear; ++round) {
        auto ctx = detail::revenue_context(decision_year, s, fleet, forecast);
        std::optional<std::size_t> best;
        double best_npv = 0.0;
        for (std::size_t t = 0; t < s.technologies.size(); ++t) {
            const auto& tech = s.technologies[t];
            const double capital = tech.capital_cost * tech.capacity_mw;
            if (capital > genco.budget) {
                continue;
            }
            const double value = unit_npv(tech, detail::candidate_cash_flow(ctx, t, genco.id, s), s.discount_rate);
            if (value > 0.0 && (!best || value > best_npv)) {
                best = t;
                best_npv = value;
            }
        }
        if (!best) {
            break;
        }
        const auto& tech = s.technologies[*best];
        const double capital = tech.capital_cost * tech.capacity_mw;
        genco.budget = std::max(0.0, genco.budget - capital);
        const PowerPlant plant{ctx.candidate_id, *best, genco.id, decision_year + tech.construction_lag_years, 1};
        fleet.push_back(plant);
        decisions.push_back({genco.id, tech.name, plant.id, 1, plant.commission_year, best_npv, capital});
    }
    return decisions;
}

} // namespace taxopt

#endif
