#ifndef TAXOPT_EXPORT_HPP
#define TAXOPT_EXPORT_HPP

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "taxopt/optimizer.hpp"
#include "taxopt/policy.hpp"
#include "taxopt/scenario.hpp"
#include "taxopt/simulation.hpp"

namespace taxopt {

// Shortest representation that round-trips; infinities print as inf/-inf.
inline std::string format_number(double v)
{
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

inline std::uint64_t fnv1a64(std::string_view bytes)
{
    std::uint64_t h = 14695981039346656037ULL;
    for (const char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error(path.string() + ": cannot open file");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string hex64(std::uint64_t v)
{
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << v;
    return out.str();
}

// years.csv: one row per simulated year.
inline void write_years_csv(std::ostream& out, const SimulationResult& r, const Scenario& s)
{
    out << "year,year_index,carbon_price,average_price,carbon_intensity,emissions_t,served_mwh,unserved_mwh,"
           "demand_mwh,capacity_mw\n";
    for (std::size_t i = 0; i < r.per_year.size(); ++i) {
        const auto& y = r.per_year[i];
        out << y.year << ',' << (y.year - s.start_year + 1) << ',' << format_number(y.carbon_price) << ','
            << format_number(y.average_price) << ',' << format_number(y.carbon_intensity) << ','
            << format_number(y.emissions_t) << ',' << format_number(y.served_mwh) << ','
            << format_number(y.unserved_mwh) << ',' << format_number(y.demand_mwh) << ','
            << format_number(r.capacity_mw_by_year.at(i)) << '\n';
    }
}

// mix.csv: one row per (year, technology), catalog order.
inline void write_mix_csv(std::ostream& out, const SimulationResult& r, const Scenario& s)
{
    out << "year,technology,energy_mwh,share\n";
    for (const auto& y : r.per_year) {
        for (const auto& tech : s.technologies) {
            const double e = y.energy_by_technology.at(tech.name);
            out << y.year << ',' << tech.name << ',' << format_number(e) << ','
                << format_number(y.served_mwh > 0.0 ? e / y.served_mwh : 0.0) << '\n';
        }
    }
}

inline void write_objectives_csv(std::ostream& out, const SimulationResult& r)
{
    out << "objective_price,objective_rci,base_carbon_intensity\n";
    out << format_number(r.objective_price) << ',' << format_number(r.objective_rci) << ','
        << format_number(r.base_carbon_intensity) << '\n';
}

inline void write_events_csv(std::ostream& out, const SimulationResult& r)
{
    out << "year,event,genco,technology,plant_id,unit_count,npv,capital\n";
    for (const auto& e : r.events) {
        out << e.year << ',' << e.kind << ',' << e.genco << ',' << e.technology << ',' << e.plant_id << ','
            << e.unit_count << ',' << format_number(e.npv) << ',' << format_number(e.capital) << '\n';
    }
}

// generations.csv: generation, index, gene_0.., one column per objective, rank, crowding.
inline void write_generations_csv(std::ostream& out, const FrontArchive& archive,
                                  const std::vector<std::string>& objective_names)
{
    const std::size_t genes = archive.generations.empty() || archive.generations[0].population.empty()
                                  ? 0
                                  : archive.generations[0].population[0].genome.size();
    out << "generation,index";
    for (std::size_t g = 0; g < genes; ++g) {
        out << ",gene_" << g;
    }
    for (const auto& name : objective_names) {
        out << ',' << name;
    }
    out << ",rank,crowding\n";
    for (const auto& gen : archive.generations) {
        for (std::size_t i = 0; i < gen.population.size(); ++i) {
            const auto& ind = gen.population[i];
            out << gen.index << ',' << i;
            for (const double v : ind.genome) {
                out << ',' << format_number(v);
            }
            for (const double v : ind.objectives) {
                out << ',' << format_number(v);
            }
            out << ',' << ind.rank << ',' << format_number(ind.crowding) << '\n';
        }
    }
}

// pareto.json: the final first front. `describe` may add per-member fields
// (the CLI adds the decoded tax trajectory).
inline nlohmann::json pareto_json(const FrontArchive& archive, const std::vector<std::string>& objective_names,
                                  const std::function<void(const Individual&, nlohmann::json&)>& describe = {})
{
    nlohmann::json root;
    root["generation"] = archive.generations.empty() ? 0 : archive.generations.back().index;
    root["objectives"] = objective_names;
    root["front"] = nlohmann::json::array();
    for (const auto& ind : archive.final_front()) {
        nlohmann::json m;
        m["genome"] = ind.genome;
        m["objectives"] = ind.objectives;
        m["rank"] = ind.rank;
        m["crowding"] = std::isinf(ind.crowding) ? nlohmann::json(nullptr) : nlohmann::json(ind.crowding);
        if (describe) {
            describe(ind, m);
        }
        root["front"].push_back(std::move(m));
    }
    return root;
}

// Collects a command's outputs in memory and publishes them together:
// everything is written into a staging directory, then renamed into place.
class OutputSet {
public:
    explicit OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {}

    void add(const std::string& name, std::string content) { files_.emplace_back(name, std::move(content)); }

    [[nodiscard]] const std::vector<std::pair<std::string, std::string>>& files() const noexcept { return files_; }

    void commit() const
    {
        namespace fs = std::filesystem;
        fs::create_directories(dir_);
        const fs::path stage = dir_ / (".staging-" + hex64(fnv1a64(dir_.string()) ^ static_cast<std::uint64_t>(
                                                                  reinterpret_cast<std::uintptr_t>(this))));
        fs::remove_all(stage);
        fs::create_directories(stage);
        try {
            for (const auto& [name, content] : files_) {
                std::ofstream out(stage / name, std::ios::binary | std::ios::trunc);
                out << content;
                out.close();
                if (!out) {
                    throw std::runtime_error((stage / name).string() + ": write failed");
                }
            }
            for (const auto& [name, content] : files_) {
                fs::rename(stage / name, dir_ / name);
            }
        } catch (...) {
            std::error_code ec;
            fs::remove_all(stage, ec);
            throw;
        }
        fs::remove_all(stage);
    }

private:
    std::filesystem::path dir_;
    std::vector<std::pair<std::string, std::string>> files_;
};

} // namespace taxopt

#endif
