#ifndef TAXOPT_SCENARIO_HPP
#define TAXOPT_SCENARIO_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace taxopt {

// Which representative-day capacity factor drives a plant's availability.
enum class Resource { none, solar, wind };

struct Technology {
    std::string name;
    double capacity_mw = 0.0;       // per unit
    double capital_cost = 0.0;      // £/MW
    double fixed_om = 0.0;          // £/MW/year
    double variable_om = 0.0;       // £/MWh
    std::string fuel_kind;          // empty when the technology burns no fuel
    double efficiency = 1.0;
    double emission_factor = 0.0;   // tCO2/MWh electrical
    int lifetime_years = 1;
    int construction_lag_years = 0;
    Resource resource = Resource::none;

    [[nodiscard]] bool is_intermittent() const noexcept { return resource != Resource::none; }
    [[nodiscard]] bool burns_fuel() const noexcept { return !fuel_kind.empty(); }

    friend bool operator==(const Technology&, const Technology&) = default;
};

struct PowerPlant {
    int id = 0;
    std::size_t technology = 0; // index into Scenario::technologies
    std::string owner;
    int commission_year = 0;
    int unit_count = 1;

    friend bool operator==(const PowerPlant&, const PowerPlant&) = default;
};

struct GenCo {
    std::string id;
    double budget = 0.0;

    friend bool operator==(const GenCo&, const GenCo&) = default;
};

struct Segment {
    double duration_hours = 0.0;
    double demand_mw = 0.0;
    double solar_cf = 0.0;
    double wind_cf = 0.0;

    [[nodiscard]] double capacity_factor(Resource r) const noexcept
    {
        switch (r) {
        case Resource::solar: return solar_cf;
        case Resource::wind: return wind_cf;
        case Resource::none: break;
        }
        return 1.0;
    }

    friend bool operator==(const Segment&, const Segment&) = default;
};

struct RepresentativeDay {
    std::string name;
    double weight_days = 0.0;
    std::vector<Segment> segments;

    friend bool operator==(const RepresentativeDay&, const RepresentativeDay&) = default;
};

inline constexpr double kHoursPerYear = 8760.0;
inline constexpr double kYearHoursTolerance = 1e-6;

struct Scenario {
    std::string name;
    int start_year = 2018;
    int horizon_years = 18;
    std::vector<Technology> technologies;
    std::vector<PowerPlant> initial_fleet;
    std::vector<GenCo> gencos;
    std::vector<RepresentativeDay> representative_days;
    // fuel kind -> calendar year -> £/MWh thermal
    std::map<std::string, std::map<int, double>> fuel_prices;
    double demand_growth = 1.0;
    double discount_rate = 0.06;
    // Absent means "derive from the start-year fleet at zero carbon price".
    std::optional<double> base_carbon_intensity;
    double loss_of_load_price = 6000.0;
    // Half-width of the seeded uniform yearly demand perturbation; 0 disables it.
    double demand_jitter = 0.0;

    [[nodiscard]] int end_year() const noexcept { return start_year + horizon_years - 1; }
    [[nodiscard]] int calendar_year(int year_index) const noexcept { return start_year + year_index - 1; }

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

struct Violation {
    std::string path;
    std::string message;

    friend bool operator==(const Violation&, const Violation&) = default;
};

class ScenarioParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ScenarioValidationError : public std::runtime_error {
public:
    explicit ScenarioValidationError(std::vector<Violation> violations)
        : std::runtime_error(describe(violations)), violations_(std::move(violations))
    {
    }

    [[nodiscard]] const std::vector<Violation>& violations() const noexcept { return violations_; }

private:
    static std::string describe(const std::vector<Violation>& vs)
    {
        std::string out = "invalid scenario:";
        for (const auto& v : vs) {
            out += "\n  " + v.path + ": " + v.message;
        }
        return out;
    }

    std::vector<Violation> violations_;
};

// Raised when a computation needs data the scenario does not provide.
class ConfigurationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::optional<std::size_t> find_technology(const Scenario& s, const std::string& name)
{
    for (std::size_t i = 0; i < s.technologies.size(); ++i) {
        if (s.technologies[i].name == name) {
            return i;
        }
    }
    return std::nullopt;
}

// Exact lookup inside the series; years past the last entry reuse the last
// price (the investment look-ahead runs beyond the horizon).
inline double fuel_price_at(const Scenario& s, const std::string& fuel, int year)
{
    auto series = s.fuel_prices.find(fuel);
    if (series == s.fuel_prices.end() || series->second.empty()) {
        throw ConfigurationError("no fuel price series for '" + fuel + "'");
    }
    const auto& prices = series->second;
    if (auto it = prices.find(year); it != prices.end()) {
        return it->second;
    }
    if (year > prices.rbegin()->first) {
        return prices.rbegin()->second;
    }
    throw ConfigurationError("missing fuel price for '" + fuel + "' in " + std::to_string(year));
}

inline double demand_scale(const Scenario& s, int year)
{
    return std::pow(s.demand_growth, static_cast<double>(year - s.start_year));
}

inline bool is_active(const PowerPlant& p, const Scenario& s, int year)
{
    const auto& tech = s.technologies.at(p.technology);
    return p.commission_year <= year && year < p.commission_year + tech.lifetime_years;
}

inline std::vector<PowerPlant> active_fleet(const std::vector<PowerPlant>& fleet, const Scenario& s, int year)
{
    std::vector<PowerPlant> out;
    out.reserve(fleet.size());
    std::copy_if(fleet.begin(), fleet.end(), std::back_inserter(out),
                 [&](const PowerPlant& p) { return is_active(p, s, year); });
    return out;
}

inline double weighted_year_hours(const Scenario& s)
{
    double total = 0.0;
    for (const auto& day : s.representative_days) {
        double hours = 0.0;
        for (const auto& seg : day.segments) {
            hours += seg.duration_hours;
        }
        total += day.weight_days * hours;
    }
    return total;
}

inline std::vector<Violation> validate_scenario(const Scenario& s)
{
    std::vector<Violation> out;
    auto bad = [&](std::string path, std::string msg) { out.push_back({std::move(path), std::move(msg)}); };
    auto finite = [](double v) { return std::isfinite(v); };

    if (s.horizon_years < 2) {
        bad("horizon_years", "must be at least 2");
    }
    if (!(s.discount_rate > -1.0) || !finite(s.discount_rate)) {
        bad("discount_rate", "must be greater than -1");
    }
    if (!(s.demand_growth > 0.0) || !finite(s.demand_growth)) {
        bad("demand_growth", "must be positive");
    }
    if (!(s.loss_of_load_price > 0.0) || !finite(s.loss_of_load_price)) {
        bad("loss_of_load_price", "must be positive");
    }
    if (!(s.demand_jitter >= 0.0 && s.demand_jitter < 1.0)) {
        bad("demand_jitter", "must lie in [0, 1)");
    }
    if (s.base_carbon_intensity && !(*s.base_carbon_intensity > 0.0 && finite(*s.base_carbon_intensity))) {
        bad("base_carbon_intensity", "must be positive when given");
    }

    if (s.technologies.empty()) {
        bad("technologies", "catalog is empty");
    }
    std::set<std::string> tech_names;
    std::set<std::string> fuels;
    for (std::size_t i = 0; i < s.technologies.size(); ++i) {
        const auto& t = s.technologies[i];
        const std::string p = "technologies[" + std::to_string(i) + "]";
        if (t.name.empty()) {
            bad(p + ".name", "must be non-empty");
        } else if (!tech_names.insert(t.name).second) {
            bad(p + ".name", "duplicate technology '" + t.name + "'");
        }
        if (!(t.capacity_mw > 0.0) || !finite(t.capacity_mw)) {
            bad(p + ".capacity_mw", "must be positive");
        }
        if (!(t.efficiency > 0.0 && t.efficiency <= 1.0)) {
            bad(p + ".efficiency", "must lie in (0, 1]");
        }
        if (!(t.emission_factor >= 0.0) || !finite(t.emission_factor)) {
            bad(p + ".emission_factor", "must be non-negative");
        }
        if (t.lifetime_years < 1) {
            bad(p + ".lifetime_years", "must be at least 1");
        }
        if (t.construction_lag_years < 0) {
            bad(p + ".construction_lag_years", "must be non-negative");
        }
        if (!(t.capital_cost >= 0.0) || !finite(t.capital_cost)) {
            bad(p + ".capital_cost", "must be non-negative");
        }
        if (!(t.fixed_om >= 0.0) || !finite(t.fixed_om)) {
            bad(p + ".fixed_om", "must be non-negative");
        }
        if (!finite(t.variable_om)) {
            bad(p + ".variable_om", "must be finite");
        }
        if (t.burns_fuel()) {
            fuels.insert(t.fuel_kind);
        }
    }

    for (const auto& fuel : fuels) {
        auto series = s.fuel_prices.find(fuel);
        for (int y = s.start_year; y <= s.end_year(); ++y) {
            if (series == s.fuel_prices.end() || !series->second.contains(y)) {
                bad("fuel_prices." + fuel + "." + std::to_string(y), "fuel_prices coverage: missing price");
            }
        }
        if (series != s.fuel_prices.end()) {
            for (const auto& [year, price] : series->second) {
                if (!(price >= 0.0) || !finite(price)) {
                    bad("fuel_prices." + fuel + "." + std::to_string(year), "must be non-negative");
                }
            }
        }
    }

    std::set<std::string> genco_ids;
    for (std::size_t i = 0; i < s.gencos.size(); ++i) {
        const auto& g = s.gencos[i];
        const std::string p = "gencos[" + std::to_string(i) + "]";
        if (g.id.empty() || !genco_ids.insert(g.id).second) {
            bad(p + ".id", "must be non-empty and unique");
        }
        if (!(g.budget >= 0.0) || !finite(g.budget)) {
            bad(p + ".budget", "must be non-negative");
        }
    }

    std::set<int> plant_ids;
    for (std::size_t i = 0; i < s.initial_fleet.size(); ++i) {
        const auto& pl = s.initial_fleet[i];
        const std::string p = "initial_fleet[" + std::to_string(i) + "]";
        if (pl.technology >= s.technologies.size()) {
            bad(p + ".technology", "unknown technology");
        }
        if (!genco_ids.contains(pl.owner)) {
            bad(p + ".owner", "unknown genco '" + pl.owner + "'");
        }
        if (pl.unit_count < 1) {
            bad(p + ".unit_count", "must be at least 1");
        }
        if (!plant_ids.insert(pl.id).second) {
            bad(p + ".id", "duplicate plant id");
        }
    }

    if (s.representative_days.empty()) {
        bad("representative_days", "at least one day is required");
    }
    for (std::size_t d = 0; d < s.representative_days.size(); ++d) {
        const auto& day = s.representative_days[d];
        const std::string p = "representative_days[" + std::to_string(d) + "]";
        if (!(day.weight_days > 0.0) || !finite(day.weight_days)) {
            bad(p + ".weight_days", "must be positive");
        }
        if (day.segments.empty()) {
            bad(p + ".segments", "at least one segment is required");
        }
        for (std::size_t k = 0; k < day.segments.size(); ++k) {
            const auto& seg = day.segments[k];
            const std::string q = p + ".segments[" + std::to_string(k) + "]";
            if (!(seg.duration_hours > 0.0) || !finite(seg.duration_hours)) {
                bad(q + ".duration_hours", "must be positive");
            }
            if (!(seg.demand_mw > 0.0) || !finite(seg.demand_mw)) {
                bad(q + ".demand_mw", "must be positive");
            }
            if (!(seg.solar_cf >= 0.0 && seg.solar_cf <= 1.0)) {
                bad(q + ".solar_capacity_factor", "must lie in [0, 1]");
            }
            if (!(seg.wind_cf >= 0.0 && seg.wind_cf <= 1.0)) {
                bad(q + ".wind_capacity_factor", "must lie in [0, 1]");
            }
        }
    }
    if (!s.representative_days.empty()) {
        const double hours = weighted_year_hours(s);
        if (!(std::abs(hours - kHoursPerYear) <= kYearHoursTolerance)) {
            std::ostringstream msg;
            msg << "weighted segment hours total " << hours << ", expected 8760";
            bad("representative_days", msg.str());
        }
    }
    return out;
}

namespace detail {

using nlohmann::json;

inline std::string resource_name(Resource r)
{
    switch (r) {
    case Resource::solar: return "solar";
    case Resource::wind: return "wind";
    case Resource::none: break;
    }
    return "none";
}

class Reader {
public:
    explicit Reader(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object()) {
            fail(path_, "expected an object");
        }
    }

    Reader(const Reader&) = delete;
    Reader& operator=(const Reader&) = delete;

    ~Reader() noexcept(false)
    {
        if (std::uncaught_exceptions() != 0) {
            return;
        }
        for (const auto& [key, value] : j_.items()) {
            if (!seen_.contains(key)) {
                fail(at(key), "unknown key");
            }
        }
    }

    [[noreturn]] static void fail(const std::string& path, const std::string& msg)
    {
        throw ScenarioParseError(path + ": " + msg);
    }

    [[nodiscard]] std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const json* find(const std::string& key)
    {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() || it->is_null() ? nullptr : &*it;
    }

    const json& need(const std::string& key)
    {
        const json* v = find(key);
        if (v == nullptr) {
            fail(at(key), "required key is missing");
        }
        return *v;
    }

    double number(const std::string& key)
    {
        const json& v = need(key);
        if (!v.is_number()) {
            fail(at(key), "expected a number");
        }
        return v.get<double>();
    }

    double number_or(const std::string& key, double fallback)
    {
        const json* v = find(key);
        if (v == nullptr) {
            return fallback;
        }
        if (!v->is_number()) {
            fail(at(key), "expected a number");
        }
        return v->get<double>();
    }

    int integer(const std::string& key)
    {
        const json& v = need(key);
        if (!v.is_number_integer()) {
            fail(at(key), "expected an integer");
        }
        return v.get<int>();
    }

    int integer_or(const std::string& key, int fallback)
    {
        const json* v = find(key);
        if (v == nullptr) {
            return fallback;
        }
        if (!v->is_number_integer()) {
            fail(at(key), "expected an integer");
        }
        return v->get<int>();
    }

    std::string string(const std::string& key)
    {
        const json& v = need(key);
        if (!v.is_string()) {
            fail(at(key), "expected a string");
        }
        return v.get<std::string>();
    }

    std::string string_or(const std::string& key, std::string fallback)
    {
        const json* v = find(key);
        if (v == nullptr) {
            return fallback;
        }
        if (!v->is_string()) {
            fail(at(key), "expected a string");
        }
        return v->get<std::string>();
    }

    const json& array(const std::string& key)
    {
        const json& v = need(key);
        if (!v.is_array()) {
            fail(at(key), "expected an array");
        }
        return v;
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

inline Resource parse_resource(const std::string& text, const std::string& path)
{
    if (text == "none") {
        return Resource::none;
    }
    if (text == "solar") {
        return Resource::solar;
    }
    if (text == "wind") {
        return Resource::wind;
    }
    Reader::fail(path, "expected one of none, solar, wind");
}

inline Technology parse_technology(const json& j, const std::string& path)
{
    Reader r(j, path);
    Technology t;
    t.name = r.string("name");
    t.capacity_mw = r.number("capacity_mw");
    t.capital_cost = r.number("capital_cost");
    t.fixed_om = r.number_or("fixed_om", 0.0);
    t.variable_om = r.number_or("variable_om", 0.0);
    t.fuel_kind = r.string_or("fuel_kind", "");
    t.efficiency = r.number_or("efficiency", 1.0);
    t.emission_factor = r.number_or("emission_factor", 0.0);
    t.lifetime_years = r.integer("lifetime_years");
    t.construction_lag_years = r.integer_or("construction_lag_years", 0);
    t.resource = parse_resource(r.string_or("resource", "none"), r.at("resource"));
    return t;
}

inline Segment parse_segment(const json& j, const std::string& path)
{
    Reader r(j, path);
    Segment seg;
    seg.duration_hours = r.number("duration_hours");
    seg.demand_mw = r.number("demand_mw");
    seg.solar_cf = r.number_or("solar_capacity_factor", 0.0);
    seg.wind_cf = r.number_or("wind_capacity_factor", 0.0);
    return seg;
}

} // namespace detail

// Parses the canonical JSON rendering; structural problems raise
// ScenarioParseError, invariant violations raise ScenarioValidationError.
inline Scenario scenario_from_json(const nlohmann::json& root)
{
    using detail::Reader;
    using nlohmann::json;
    Scenario s;
    {
        Reader r(root, "");
        s.name = r.string_or("name", "");
        s.start_year = r.integer("start_year");
        s.horizon_years = r.integer_or("horizon_years", 18);
        s.discount_rate = r.number_or("discount_rate", 0.06);
        s.demand_growth = r.number_or("demand_growth", 1.0);
        s.loss_of_load_price = r.number_or("loss_of_load_price", 6000.0);
        s.demand_jitter = r.number_or("demand_jitter", 0.0);
        if (const auto* v = r.find("base_carbon_intensity")) {
            if (!v->is_number()) {
                Reader::fail("base_carbon_intensity", "expected a number");
            }
            s.base_carbon_intensity = v->get<double>();
        }

        const auto& techs = r.array("technologies");
        for (std::size_t i = 0; i < techs.size(); ++i) {
            s.technologies.push_back(detail::parse_technology(techs[i], "technologies[" + std::to_string(i) + "]"));
        }

        const auto& gencos = r.array("gencos");
        for (std::size_t i = 0; i < gencos.size(); ++i) {
            Reader g(gencos[i], "gencos[" + std::to_string(i) + "]");
            s.gencos.push_back({g.string("id"), g.number("budget")});
        }

        const json* fleet = r.find("initial_fleet");
        if (fleet != nullptr && !fleet->is_array()) {
            Reader::fail("initial_fleet", "expected an array");
        }
        int next_id = 0;
        for (std::size_t i = 0; fleet != nullptr && i < fleet->size(); ++i) {
            const std::string path = "initial_fleet[" + std::to_string(i) + "]";
            Reader p((*fleet)[i], path);
            PowerPlant plant;
            const std::string tech = p.string("technology");
            auto idx = find_technology(s, tech);
            if (!idx) {
                Reader::fail(p.at("technology"), "unknown technology '" + tech + "'");
            }
            plant.technology = *idx;
            plant.owner = p.string("owner");
            plant.commission_year = p.integer("commission_year");
            plant.unit_count = p.integer_or("unit_count", 1);
            plant.id = p.integer_or("id", next_id);
            next_id = std::max(next_id, plant.id) + 1;
            s.initial_fleet.push_back(plant);
        }

        const auto& days = r.array("representative_days");
        for (std::size_t d = 0; d < days.size(); ++d) {
            const std::string path = "representative_days[" + std::to_string(d) + "]";
            Reader dr(days[d], path);
            RepresentativeDay day;
            day.name = dr.string_or("name", "");
            day.weight_days = dr.number("weight_days");
            const auto& segs = dr.array("segments");
            for (std::size_t k = 0; k < segs.size(); ++k) {
                day.segments.push_back(detail::parse_segment(segs[k], path + ".segments[" + std::to_string(k) + "]"));
            }
            s.representative_days.push_back(std::move(day));
        }

        if (const json* fp = r.find("fuel_prices")) {
            if (!fp->is_object()) {
                Reader::fail("fuel_prices", "expected an object keyed by fuel kind");
            }
            for (const auto& [fuel, series] : fp->items()) {
                const std::string path = "fuel_prices." + fuel;
                if (!series.is_object()) {
                    Reader::fail(path, "expected an object keyed by year");
                }
                auto& out = s.fuel_prices[fuel];
                for (const auto& [year, price] : series.items()) {
                    int y = 0;
                    try {
                        std::size_t used = 0;
                        y = std::stoi(year, &used);
                        if (used != year.size()) {
                            throw std::invalid_argument(year);
                        }
                    } catch (const std::exception&) {
                        Reader::fail(path + "." + year, "year keys must be integers");
                    }
                    if (!price.is_number()) {
                        Reader::fail(path + "." + year, "expected a number");
                    }
                    out[y] = price.get<double>();
                }
            }
        }
    }

    // Plants are kept in ascending id order: dispatch breaks ties by id.
    std::stable_sort(s.initial_fleet.begin(), s.initial_fleet.end(),
                     [](const PowerPlant& a, const PowerPlant& b) { return a.id < b.id; });

    if (auto violations = validate_scenario(s); !violations.empty()) {
        throw ScenarioValidationError(std::move(violations));
    }
    return s;
}

inline nlohmann::json scenario_to_json(const Scenario& s)
{
    using nlohmann::json;
    json root;
    root["name"] = s.name;
    root["start_year"] = s.start_year;
    root["horizon_years"] = s.horizon_years;
    root["discount_rate"] = s.discount_rate;
    root["demand_growth"] = s.demand_growth;
    root["loss_of_load_price"] = s.loss_of_load_price;
    root["demand_jitter"] = s.demand_jitter;
    if (s.base_carbon_intensity) {
        root["base_carbon_intensity"] = *s.base_carbon_intensity;
    }
    root["technologies"] = json::array();
    for (const auto& t : s.technologies) {
        json jt;
        jt["name"] = t.name;
        jt["capacity_mw"] = t.capacity_mw;
        jt["capital_cost"] = t.capital_cost;
        jt["fixed_om"] = t.fixed_om;
        jt["variable_om"] = t.variable_om;
        if (t.burns_fuel()) {
            jt["fuel_kind"] = t.fuel_kind;
        }
        jt["efficiency"] = t.efficiency;
        jt["emission_factor"] = t.emission_factor;
        jt["lifetime_years"] = t.lifetime_years;
        jt["construction_lag_years"] = t.construction_lag_years;
        jt["resource"] = detail::resource_name(t.resource);
        root["technologies"].push_back(std::move(jt));
    }
    root["gencos"] = json::array();
    for (const auto& g : s.gencos) {
        root["gencos"].push_back({{"id", g.id}, {"budget", g.budget}});
    }
    root["initial_fleet"] = json::array();
    for (const auto& p : s.initial_fleet) {
        root["initial_fleet"].push_back({{"id", p.id},
                                         {"technology", s.technologies.at(p.technology).name},
                                         {"owner", p.owner},
                                         {"commission_year", p.commission_year},
                                         {"unit_count", p.unit_count}});
    }
    root["representative_days"] = json::array();
    for (const auto& d : s.representative_days) {
        json jd;
        jd["name"] = d.name;
        jd["weight_days"] = d.weight_days;
        jd["segments"] = json::array();
        for (const auto& seg : d.segments) {
            jd["segments"].push_back({{"duration_hours", seg.duration_hours},
                                      {"demand_mw", seg.demand_mw},
                                      {"solar_capacity_factor", seg.solar_cf},
                                      {"wind_capacity_factor", seg.wind_cf}});
        }
        root["representative_days"].push_back(std::move(jd));
    }
    root["fuel_prices"] = json::object();
    for (const auto& [fuel, series] : s.fuel_prices) {
        json js = json::object();
        for (const auto& [year, price] : series) {
            js[std::to_string(year)] = price;
        }
        root["fuel_prices"][fuel] = std::move(js);
    }
    return root;
}

inline Scenario load_scenario(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ScenarioParseError(path.string() + ": cannot open file");
    }
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const nlohmann::json::parse_error& e) {
        throw ScenarioParseError(path.string() + ": " + e.what());
    }
    return scenario_from_json(root);
}

inline void save_scenario(const Scenario& s, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error(path.string() + ": cannot write file");
    }
    out << scenario_to_json(s).dump(2) << '\n';
}

} // namespace taxopt

#endif
