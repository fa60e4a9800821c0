#pragma once

// Run configuration: a JSON document with an explicit schema version. Every
// object rejects keys it does not know, and validation errors name the field
// path that failed.

#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rqgas/error.hpp"
#include "rqgas/exact_oracle.hpp"
#include "rqgas/mc_sampler.hpp"
#include "rqgas/quantum_equilibrium.hpp"
#include "rqgas/spectrum.hpp"

namespace rqgas {

inline constexpr int kConfigSchemaVersion = 1;

enum class OutputFormat { csv, json };

struct OutputConfig {
    OutputFormat format = OutputFormat::csv;
    std::string path;  ///< empty: standard output
    int precision = 12;
};

enum class ScanParameter { temperature, total_particles };

struct ScanConfig {
    ScanParameter parameter = ScanParameter::temperature;
    std::vector<double> values;
};

struct RunConfig {
    double temperature = 1.0;
    Statistics statistics = Statistics::bose;
    double total_particles = 0.0;
    std::vector<Species> species;
    SolverOptions solver;
    SamplerConfig sampler;
    std::string timeseries_path;
    std::uint64_t enumeration_cap = kDefaultEnumerationCap;
    std::optional<ScanConfig> scan;
    std::optional<std::vector<double>> split;
    OutputConfig output;

    double beta() const { return 1.0 / temperature; }
    JointSpectrum joint() const { return build_joint_spectrum(species); }
};

namespace detail {

using json = nlohmann::json;

[[noreturn]] inline void config_error(const std::string& path, const std::string& what) {
    fail(ErrorKind::config, path + ": " + what);
}

inline void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) config_error(path, "expected an object");
    const std::set<std::string> known(allowed.begin(), allowed.end());
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!known.count(key)) config_error(path, "unknown key '" + key + "'");
    }
}

inline double get_number(const json& obj, const std::string& key, const std::string& path) {
    const auto& v = obj.at(key);
    if (!v.is_number()) config_error(path + "." + key, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) config_error(path + "." + key, "must be finite");
    return d;
}

inline std::int64_t get_integer(const json& obj, const std::string& key, const std::string& path) {
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) config_error(path + "." + key, "expected an integer");
    return v.get<std::int64_t>();
}

inline bool get_bool(const json& obj, const std::string& key, const std::string& path) {
    const auto& v = obj.at(key);
    if (!v.is_boolean()) config_error(path + "." + key, "expected true or false");
    return v.get<bool>();
}

inline std::string get_string(const json& obj, const std::string& key, const std::string& path) {
    const auto& v = obj.at(key);
    if (!v.is_string()) config_error(path + "." + key, "expected a string");
    return v.get<std::string>();
}

inline std::vector<EnergyLevel> parse_levels(const json& arr, const std::string& path) {
    if (!arr.is_array() || arr.empty()) config_error(path, "expected a non-empty array of [energy, degeneracy]");
    std::vector<EnergyLevel> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const auto& item = arr[i];
        const std::string here = path + "[" + std::to_string(i) + "]";
        EnergyLevel level;
        if (item.is_array()) {
            if (item.size() != 2 || !item[0].is_number() || !item[1].is_number_integer())
                config_error(here, "expected [energy, degeneracy]");
            level.energy = item[0].get<double>();
            level.degeneracy = item[1].get<std::int64_t>();
        } else if (item.is_object()) {
            check_keys(item, here, {"energy", "degeneracy"});
            level.energy = get_number(item, "energy", here);
            level.degeneracy = item.contains("degeneracy") ? get_integer(item, "degeneracy", here) : 1;
        } else {
            config_error(here, "expected [energy, degeneracy] or an object");
        }
        if (!std::isfinite(level.energy)) config_error(here, "energy must be finite");
        if (level.degeneracy < 1) config_error(here, "degeneracy must be >= 1");
        out.push_back(level);
    }
    return out;
}

inline DofGenerator parse_generator(const json& obj, const std::string& path) {
    if (!obj.is_object() || !obj.contains("kind")) config_error(path, "generator needs a 'kind'");
    const std::string kind = get_string(obj, "kind", path);
    DofGenerator gen;
    std::string parameter_key;
    if (kind == "explicit") {
        check_keys(obj, path, {"kind", "levels"});
        gen.kind = DofKind::explicit_levels;
        if (!obj.contains("levels")) config_error(path, "explicit generator needs 'levels'");
        gen.levels = parse_levels(obj.at("levels"), path + ".levels");
        return gen;
    } else if (kind == "harmonic") {
        gen.kind = DofKind::harmonic;
        parameter_key = "quantum";
    } else if (kind == "rigid_rotor") {
        gen.kind = DofKind::rigid_rotor;
        parameter_key = "rotational_constant";
    } else if (kind == "particle_in_box_3d") {
        gen.kind = DofKind::particle_in_box_3d;
        parameter_key = "energy_scale";
    } else {
        config_error(path + ".kind", "unknown generator kind '" + kind + "'");
    }
    check_keys(obj, path, {"kind", parameter_key.c_str(), "count", "energy_offset"});
    if (!obj.contains(parameter_key)) config_error(path, "missing '" + parameter_key + "'");
    if (!obj.contains("count")) config_error(path, "missing 'count'");
    gen.parameter = get_number(obj, parameter_key, path);
    const auto count = get_integer(obj, "count", path);
    if (count < 1 || count > 1'000'000) config_error(path + ".count", "must lie in [1, 1000000]");
    gen.count = static_cast<int>(count);
    if (obj.contains("energy_offset")) gen.energy_offset = get_number(obj, "energy_offset", path);
    if (!(gen.parameter > 0.0)) config_error(path + "." + parameter_key, "must be > 0");
    return gen;
}

inline Species parse_species(const json& obj, const std::string& path) {
    check_keys(obj, path, {"name", "nu", "levels", "dof_generators", "merge_degenerate"});
    if (!obj.contains("name")) config_error(path, "missing 'name'");
    Species sp;
    sp.name = get_string(obj, "name", path);
    if (sp.name.empty()) config_error(path + ".name", "must be non-empty");
    if (obj.contains("nu")) {
        const auto nu = get_integer(obj, "nu", path);
        if (nu < 1 || nu > 64) config_error(path + ".nu", "must lie in [1, 64]");
        sp.nu = static_cast<int>(nu);
    }
    const bool merge = obj.contains("merge_degenerate") && get_bool(obj, "merge_degenerate", path);

    std::vector<std::vector<EnergyLevel>> dofs;
    if (obj.contains("levels")) dofs.push_back(parse_levels(obj.at("levels"), path + ".levels"));
    if (obj.contains("dof_generators")) {
        const auto& gens = obj.at("dof_generators");
        if (!gens.is_array() || gens.empty()) config_error(path + ".dof_generators", "expected a non-empty array");
        for (std::size_t i = 0; i < gens.size(); ++i)
            dofs.push_back(generate_dof_levels(parse_generator(gens[i], path + ".dof_generators[" + std::to_string(i) + "]")));
    }
    if (dofs.empty()) config_error(path, "needs 'levels' and/or 'dof_generators'");
    sp.levels = compose_dof(dofs, merge);
    return sp;
}

/// 1-based line and column of a byte offset.
inline std::string locate(const std::string& text, std::size_t byte) {
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
    using detail::json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(ErrorKind::config, "parse error at " + detail::locate(text, e.byte) + ": " + e.what());
    }

    const std::string root = "config";
    detail::check_keys(doc, root,
                       {"schema_version", "temperature", "statistics", "total_particles", "species", "solver",
                        "sampler", "enumeration", "scan", "split", "output"});
    for (const char* key : {"schema_version", "temperature", "statistics", "total_particles", "species"})
        if (!doc.contains(key)) detail::config_error(root, std::string("missing required key '") + key + "'");

    if (detail::get_integer(doc, "schema_version", root) != kConfigSchemaVersion)
        detail::config_error(root + ".schema_version", "unsupported version (expected " +
                                                           std::to_string(kConfigSchemaVersion) + ")");

    RunConfig cfg;
    cfg.temperature = detail::get_number(doc, "temperature", root);
    if (!(cfg.temperature > 0.0)) detail::config_error(root + ".temperature", "must be > 0");

    const std::string stats = detail::get_string(doc, "statistics", root);
    if (stats == "bose")
        cfg.statistics = Statistics::bose;
    else if (stats == "fermi")
        cfg.statistics = Statistics::fermi;
    else if (stats == "boltzmann")
        cfg.statistics = Statistics::boltzmann;
    else
        detail::config_error(root + ".statistics", "must be one of bose, fermi, boltzmann");

    cfg.total_particles = detail::get_number(doc, "total_particles", root);
    if (cfg.total_particles < 0.0) detail::config_error(root + ".total_particles", "must be >= 0");

    const auto& species = doc.at("species");
    if (!species.is_array() || species.empty()) detail::config_error(root + ".species", "expected a non-empty array");
    std::set<std::string> names;
    for (std::size_t i = 0; i < species.size(); ++i) {
        const std::string path = root + ".species[" + std::to_string(i) + "]";
        auto sp = detail::parse_species(species[i], path);
        if (!names.insert(sp.name).second) detail::config_error(path + ".name", "duplicate species name '" + sp.name + "'");
        cfg.species.push_back(std::move(sp));
    }

    if (doc.contains("solver")) {
        const auto& s = doc.at("solver");
        const std::string path = root + ".solver";
        detail::check_keys(s, path, {"tolerance", "max_iterations"});
        if (s.contains("tolerance")) cfg.solver.tolerance = detail::get_number(s, "tolerance", path);
        if (s.contains("max_iterations")) cfg.solver.max_iterations = static_cast<int>(detail::get_integer(s, "max_iterations", path));
        if (!(cfg.solver.tolerance > 0.0)) detail::config_error(path + ".tolerance", "must be > 0");
        if (cfg.solver.max_iterations < 1) detail::config_error(path + ".max_iterations", "must be >= 1");
    }

    if (doc.contains("sampler")) {
        const auto& s = doc.at("sampler");
        const std::string path = root + ".sampler";
        detail::check_keys(s, path,
                           {"steps", "burn_in", "seed", "conversion_moves_enabled", "conversion_move_probability",
                            "thinning", "timeseries_path"});
        auto& sc = cfg.sampler;
        if (s.contains("steps")) sc.steps = detail::get_integer(s, "steps", path);
        if (s.contains("burn_in")) sc.burn_in = detail::get_integer(s, "burn_in", path);
        if (s.contains("seed")) {
            if (!s.at("seed").is_number_unsigned()) detail::config_error(path + ".seed", "expected an unsigned integer");
            sc.seed = s.at("seed").get<std::uint64_t>();
        }
        if (s.contains("conversion_moves_enabled"))
            sc.conversion_moves_enabled = detail::get_bool(s, "conversion_moves_enabled", path);
        if (s.contains("conversion_move_probability"))
            sc.conversion_move_probability = detail::get_number(s, "conversion_move_probability", path);
        if (s.contains("thinning")) sc.thinning = detail::get_integer(s, "thinning", path);
        if (s.contains("timeseries_path")) cfg.timeseries_path = detail::get_string(s, "timeseries_path", path);
        try {
            validate(sc);
        } catch (const Error& e) {
            detail::config_error(path, e.what());
        }
    }

    if (doc.contains("enumeration")) {
        const auto& e = doc.at("enumeration");
        const std::string path = root + ".enumeration";
        detail::check_keys(e, path, {"cap"});
        if (e.contains("cap")) {
            const auto cap = detail::get_integer(e, "cap", path);
            if (cap < 1) detail::config_error(path + ".cap", "must be >= 1");
            cfg.enumeration_cap = static_cast<std::uint64_t>(cap);
        }
    }

    if (doc.contains("scan")) {
        const auto& s = doc.at("scan");
        const std::string path = root + ".scan";
        detail::check_keys(s, path, {"parameter", "values"});
        if (!s.contains("parameter") || !s.contains("values")) detail::config_error(path, "needs 'parameter' and 'values'");
        ScanConfig scan;
        const auto p = detail::get_string(s, "parameter", path);
        if (p == "temperature")
            scan.parameter = ScanParameter::temperature;
        else if (p == "total_particles")
            scan.parameter = ScanParameter::total_particles;
        else
            detail::config_error(path + ".parameter", "must be 'temperature' or 'total_particles'");
        const auto& values = s.at("values");
        if (!values.is_array() || values.empty()) detail::config_error(path + ".values", "expected a non-empty array");
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (!values[i].is_number()) detail::config_error(path + ".values[" + std::to_string(i) + "]", "expected a number");
            const double v = values[i].get<double>();
            if (!(v > 0.0) || !std::isfinite(v))
                detail::config_error(path + ".values[" + std::to_string(i) + "]", "must be positive and finite");
            if (!scan.values.empty() && !(v > scan.values.back()))
                detail::config_error(path + ".values", "must be strictly increasing");
            scan.values.push_back(v);
        }
        cfg.scan = std::move(scan);
    }

    if (doc.contains("split")) {
        const auto& s = doc.at("split");
        if (!s.is_array() || s.size() != cfg.species.size())
            detail::config_error(root + ".split", "expected one number per species");
        std::vector<double> split;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (!s[i].is_number()) detail::config_error(root + ".split[" + std::to_string(i) + "]", "expected a number");
            split.push_back(s[i].get<double>());
        }
        cfg.split = std::move(split);
    }

    if (doc.contains("output")) {
        const auto& o = doc.at("output");
        const std::string path = root + ".output";
        detail::check_keys(o, path, {"format", "path", "precision"});
        if (o.contains("format")) {
            const auto f = detail::get_string(o, "format", path);
            if (f == "csv")
                cfg.output.format = OutputFormat::csv;
            else if (f == "json")
                cfg.output.format = OutputFormat::json;
            else
                detail::config_error(path + ".format", "must be 'csv' or 'json'");
        }
        if (o.contains("path")) cfg.output.path = detail::get_string(o, "path", path);
        if (o.contains("precision")) {
            const auto p = detail::get_integer(o, "precision", path);
            if (p < 1 || p > 17) detail::config_error(path + ".precision", "must lie in [1, 17]");
            cfg.output.precision = static_cast<int>(p);
        }
    }

    if (cfg.statistics == Statistics::fermi) {
        double capacity = 0.0;
        for (const auto& sp : cfg.species)
            for (const auto& l : sp.levels) capacity += sp.nu * static_cast<double>(l.degeneracy);
        if (cfg.total_particles > capacity) {
            std::ostringstream msg;
            msg << root << ".total_particles: N = " << cfg.total_particles << " exceeds the fermionic capacity "
                << capacity;
            fail(ErrorKind::saturation, msg.str());
        }
    }
    return cfg;
}

}  // namespace rqgas
