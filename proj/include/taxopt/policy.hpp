#ifndef TAXOPT_POLICY_HPP
#define TAXOPT_POLICY_HPP

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace taxopt {

inline constexpr int kDefaultHorizon = 18;
inline constexpr double kMaxYearlyTax = 250.0;
inline constexpr double kMaxLinearSlope = 14.0;

enum class PolicyKind { non_parametric, linear };

class PolicyError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct GeneBounds {
    double low = 0.0;
    double high = 0.0;

    [[nodiscard]] double clamp(double v) const { return std::clamp(v, low, high); }
    [[nodiscard]] bool contains(double v) const { return v >= low && v <= high; }

    friend bool operator==(const GeneBounds&, const GeneBounds&) = default;
};

// One tax per year: prices[y - 1] applies in year index y.
struct NonParametricPolicy {
    std::vector<double> prices;

    friend bool operator==(const NonParametricPolicy&, const NonParametricPolicy&) = default;
};

// price(y) = slope * y + intercept, y = 1..horizon. Negative values act as a subsidy.
struct LinearPolicy {
    double slope = 0.0;
    double intercept = 0.0;
    int horizon = kDefaultHorizon;

    friend bool operator==(const LinearPolicy&, const LinearPolicy&) = default;
};

using CarbonPolicy = std::variant<NonParametricPolicy, LinearPolicy>;

inline PolicyKind parse_policy_kind(std::string_view text)
{
    if (text == "free" || text == "non-parametric" || text == "nonparametric") {
        return PolicyKind::non_parametric;
    }
    if (text == "linear") {
        return PolicyKind::linear;
    }
    throw PolicyError("unknown policy kind '" + std::string(text) + "' (expected free or linear)");
}

inline std::string to_string(PolicyKind kind)
{
    return kind == PolicyKind::linear ? "linear" : "free";
}

inline PolicyKind kind_of(const CarbonPolicy& p)
{
    return std::holds_alternative<LinearPolicy>(p) ? PolicyKind::linear : PolicyKind::non_parametric;
}

inline int horizon_of(const CarbonPolicy& p)
{
    if (const auto* np = std::get_if<NonParametricPolicy>(&p)) {
        return static_cast<int>(np->prices.size());
    }
    return std::get<LinearPolicy>(p).horizon;
}

inline std::vector<GeneBounds> bounds(PolicyKind kind, int horizon = kDefaultHorizon)
{
    switch (kind) {
    case PolicyKind::non_parametric:
        return std::vector<GeneBounds>(static_cast<std::size_t>(horizon), GeneBounds{0.0, kMaxYearlyTax});
    case PolicyKind::linear:
        return {GeneBounds{-kMaxLinearSlope, kMaxLinearSlope}, GeneBounds{0.0, kMaxYearlyTax}};
    }
    throw PolicyError("unknown policy kind");
}

inline double price_at(const CarbonPolicy& policy, int year_index)
{
    const int horizon = horizon_of(policy);
    if (year_index < 1 || year_index > horizon) {
        throw PolicyError("year index " + std::to_string(year_index) + " outside 1.." + std::to_string(horizon));
    }
    if (const auto* np = std::get_if<NonParametricPolicy>(&policy)) {
        return np->prices[static_cast<std::size_t>(year_index - 1)];
    }
    const auto& lin = std::get<LinearPolicy>(policy);
    return lin.slope * year_index + lin.intercept;
}

// Price for every year index 1..horizon.
inline std::vector<double> trajectory(const CarbonPolicy& policy)
{
    std::vector<double> out;
    for (int y = 1; y <= horizon_of(policy); ++y) {
        out.push_back(price_at(policy, y));
    }
    return out;
}

inline std::vector<double> encode(const CarbonPolicy& policy)
{
    if (const auto* np = std::get_if<NonParametricPolicy>(&policy)) {
        return np->prices;
    }
    const auto& lin = std::get<LinearPolicy>(policy);
    return {lin.slope, lin.intercept};
}

// Out-of-bounds genes are an error unless `repair` is set, in which case they
// are clamped onto the box.
inline CarbonPolicy decode(std::span<const double> genome, PolicyKind kind, int horizon = kDefaultHorizon,
                           bool repair = false)
{
    const auto box = bounds(kind, horizon);
    if (genome.size() != box.size()) {
        throw PolicyError("genome has " + std::to_string(genome.size()) + " genes, " + to_string(kind) +
                          " policy expects " + std::to_string(box.size()));
    }
    std::vector<double> genes(genome.begin(), genome.end());
    for (std::size_t i = 0; i < genes.size(); ++i) {
        if (!std::isfinite(genes[i])) {
            throw PolicyError("gene " + std::to_string(i) + " is not finite");
        }
        if (!box[i].contains(genes[i])) {
            if (!repair) {
                throw PolicyError("gene " + std::to_string(i) + " = " + std::to_string(genes[i]) + " outside [" +
                                  std::to_string(box[i].low) + ", " + std::to_string(box[i].high) + "]");
            }
            genes[i] = box[i].clamp(genes[i]);
        }
    }
    if (kind == PolicyKind::linear) {
        return LinearPolicy{genes[0], genes[1], horizon};
    }
    return NonParametricPolicy{std::move(genes)};
}

namespace detail {

inline std::vector<double> parse_number_list(std::string_view text, std::string_view spec)
{
    std::vector<double> out;
    while (true) {
        const auto comma = text.find(',');
        const auto item = text.substr(0, comma);
        double v = 0.0;
        const auto* first = item.data();
        const auto* last = item.data() + item.size();
        if (!item.empty() && *first == '+') {
            ++first;
        }
        const auto [ptr, ec] = std::from_chars(first, last, v);
        if (item.empty() || ec != std::errc{} || ptr != last || !std::isfinite(v)) {
            throw PolicyError("malformed policy spec '" + std::string(spec) + "'");
        }
        out.push_back(v);
        if (comma == std::string_view::npos) {
            break;
        }
        text.remove_prefix(comma + 1);
    }
    return out;
}

} // namespace detail

// `linear:a1,a2`, `free:v1,...,vH` or `flat:c`. Values must lie inside the
// genome bounds.
inline CarbonPolicy parse_policy_spec(std::string_view spec, int horizon = kDefaultHorizon)
{
    const auto colon = spec.find(':');
    if (colon == std::string_view::npos) {
        throw PolicyError("malformed policy spec '" + std::string(spec) + "' (expected kind:values)");
    }
    const auto head = spec.substr(0, colon);
    const auto values = detail::parse_number_list(spec.substr(colon + 1), spec);
    if (head == "flat") {
        if (values.size() != 1) {
            throw PolicyError("flat policy takes exactly one value");
        }
        const std::vector<double> genome(static_cast<std::size_t>(horizon), values[0]);
        return decode(genome, PolicyKind::non_parametric, horizon);
    }
    if (head == "linear") {
        return decode(values, PolicyKind::linear, horizon);
    }
    if (head == "free") {
        return decode(values, PolicyKind::non_parametric, horizon);
    }
    throw PolicyError("unknown policy kind in spec '" + std::string(spec) + "'");
}

} // namespace taxopt

#endif
