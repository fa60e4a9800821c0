#pragma once

// Command dispatch and long-format tabular output. Every result is a record
//   scope, species, replica, level, quantity, value
// where scope is one of system, species, level, pair. A scan prefixes the
// columns scan_parameter and scan_value. The first record of every output is
// the schema version.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rqgas/analysis.hpp"
#include "rqgas/classical_limit.hpp"
#include "rqgas/config.hpp"
#include "rqgas/error.hpp"
#include "rqgas/exact_oracle.hpp"
#include "rqgas/mc_sampler.hpp"
#include "rqgas/quantum_equilibrium.hpp"
#include "rqgas/spectrum.hpp"

namespace rqgas {

inline constexpr int kOutputSchemaVersion = 1;

enum class Command { solve, classical, enumerate, sample, compare, scan };

inline std::optional<Command> parse_command(std::string_view name) {
    if (name == "solve") return Command::solve;
    if (name == "classical") return Command::classical;
    if (name == "enumerate") return Command::enumerate;
    if (name == "sample") return Command::sample;
    if (name == "compare") return Command::compare;
    if (name == "scan") return Command::scan;
    return std::nullopt;
}

inline std::string_view to_string(Command c) noexcept {
    switch (c) {
        case Command::solve: return "solve";
        case Command::classical: return "classical";
        case Command::enumerate: return "enumerate";
        case Command::sample: return "sample";
        case Command::compare: return "compare";
        case Command::scan: return "scan";
    }
    return "unknown";
}

/// Process exit code for an error category.
inline int exit_code(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::config:
        case ErrorKind::usage: return 2;
        case ErrorKind::domain:
        case ErrorKind::solver: return 3;
        case ErrorKind::saturation: return 4;
        case ErrorKind::enumeration_cap: return 5;
    }
    return 1;
}

struct Record {
    std::string scope;
    std::string species;
    std::optional<int> replica;
    std::optional<std::size_t> level;
    std::string quantity;
    double value = 0.0;
    std::string scan_parameter;
    std::optional<double> scan_value;
};

struct CommandResult {
    Command command = Command::solve;
    std::vector<Record> records;
    std::string timeseries_csv;  ///< sample only, when requested
};

namespace detail {

inline std::string format_number(double v, int precision) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) v = 0.0;  // drop the sign of negative zero
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    return buf;
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

class RecordBuilder {
public:
    explicit RecordBuilder(const JointSpectrum& joint) : joint_(&joint) {}

    void system(const std::string& quantity, double value) { push("system", "", {}, {}, quantity, value); }

    void species(std::size_t a, const std::string& quantity, double value) {
        push("species", joint_->species()[a].name, {}, {}, quantity, value);
    }

    void level(std::size_t entry, const std::string& quantity, double value) {
        const auto& e = joint_->entries()[entry];
        push("level", joint_->species()[e.species].name, e.replica, e.level, quantity, value);
    }

    void pair(std::size_t a, std::size_t b, const std::string& quantity, double value) {
        push("pair", joint_->species()[a].name + "/" + joint_->species()[b].name, {}, {}, quantity, value);
    }

    std::vector<Record> take() { return std::move(records_); }

private:
    void push(std::string scope, std::string species, std::optional<int> replica, std::optional<std::size_t> level,
              const std::string& quantity, double value) {
        Record r;
        r.scope = std::move(scope);
        r.species = std::move(species);
        r.replica = replica;
        r.level = level;
        r.quantity = quantity;
        r.value = value;
        records_.push_back(std::move(r));
    }

    const JointSpectrum* joint_;
    std::vector<Record> records_;
};

inline int integer_particles(const RunConfig& cfg, Command c) {
    const double n = cfg.total_particles;
    if (n != std::floor(n) || n < 1.0 || n > 1e6)
        fail(ErrorKind::config, std::string(to_string(c)) + " needs an integer total_particles in [1, 1000000]");
    return static_cast<int>(n);
}

inline void require_quantum(const RunConfig& cfg, Command c) {
    if (cfg.statistics == Statistics::boltzmann)
        fail(ErrorKind::config, std::string(to_string(c)) + " needs bose or fermi statistics");
}

inline void spectrum_records(RecordBuilder& out, const JointSpectrum& joint) {
    for (std::size_t i = 0; i < joint.total_levels(); ++i) {
        out.level(i, "energy", joint.entries()[i].value.energy);
        out.level(i, "degeneracy", static_cast<double>(joint.entries()[i].value.degeneracy));
    }
}

inline void solve_records(RecordBuilder& out, const RunConfig& cfg, const JointSpectrum& joint, bool with_levels) {
    const double beta = cfg.beta();
    const double n = cfg.total_particles;
    out.system("temperature", cfg.temperature);
    out.system("total_particles", n);
    if (cfg.statistics == Statistics::boltzmann) {
        const auto eq = classical_equilibrium(joint, beta, n);
        out.system("beta_mu", eq.beta_mu);
        out.system("mu", eq.beta_mu / beta);
        out.system("log_z_coupled", eq.log_z_coupled);
        for (std::size_t a = 0; a < joint.species_count(); ++a) out.species(a, "species_total", eq.species_totals[a]);
        if (with_levels)
            for (std::size_t i = 0; i < joint.total_levels(); ++i) out.level(i, "occupation", eq.occupations[i]);
        return;
    }
    const auto sol = solve_mu_coupled(joint, beta, n, cfg.statistics, cfg.solver);
    out.system("beta_mu", sol.beta_mu);
    out.system("mu", sol.mu);
    out.system("log_multiplicity", sol.log_multiplicity);
    out.system("residual", sol.residual);
    out.system("iterations", sol.iterations);
    out.system("mean_energy", mean_energy(joint, sol));
    const double log_xi = detail::grand_potential_log(joint, beta, sol.reduced, cfg.statistics);
    out.system("log_grand_partition", log_xi);
    out.system("log_canonical_partition", log_xi - sol.beta_mu * n);
    for (std::size_t a = 0; a < joint.species_count(); ++a) out.species(a, "species_total", sol.species_totals[a]);
    if (with_levels)
        for (std::size_t i = 0; i < joint.total_levels(); ++i) out.level(i, "occupation", sol.occupations[i]);
}

inline void classical_records(RecordBuilder& out, const RunConfig& cfg, const JointSpectrum& joint) {
    const double beta = cfg.beta();
    const double n = cfg.total_particles;
    const auto eq = classical_equilibrium(joint, beta, n);
    out.system("temperature", cfg.temperature);
    out.system("total_particles", n);
    out.system("log_z_eq", eq.log_z_eq);
    out.system("beta_mu", eq.beta_mu);
    out.system("mu", eq.beta_mu / beta);
    out.system("log_z_coupled", eq.log_z_coupled);
    out.system("log_z_frozen", eq.log_z_frozen);
    out.system("free_energy", eq.free_energy);
    for (std::size_t a = 0; a < joint.species_count(); ++a) {
        out.species(a, "log_z", eq.log_z_species[a]);
        out.species(a, "p_species", eq.p_species[a]);
        out.species(a, "species_total", eq.species_totals[a]);
        out.species(a, "mu_species", eq.mu_species[a]);
    }
    for (const auto& pair : mass_action_check(joint, eq)) {
        out.pair(pair.first, pair.second, "z_ratio", pair.z_ratio);
        out.pair(pair.first, pair.second, "n_ratio", pair.n_ratio);
        out.pair(pair.first, pair.second, "mass_action_applicable", pair.applicable ? 1.0 : 0.0);
    }

    // The Maxwell-Boltzmann oracle is attached when N is an integer and the
    // configuration space fits under the enumeration cap.
    std::optional<ExactStatistics> oracle;
    if (n == std::floor(n) && n <= 1e6) {
        const int ni = static_cast<int>(n);
        if (count_configurations(joint, ni, Statistics::boltzmann) <= cfg.enumeration_cap)
            oracle = exact_statistics(joint, ni, beta, Statistics::boltzmann, cfg.enumeration_cap);
    }
    out.system("oracle_available", oracle ? 1.0 : 0.0);
    const auto var = classical_variances(eq, n, oracle ? &*oracle : nullptr);
    for (std::size_t a = 0; a < joint.species_count(); ++a) {
        out.species(a, "variance_scaled_form", var.species_scaled_form[a]);
        out.species(a, "variance_multinomial", var.species_multinomial[a]);
        if (oracle) {
            out.species(a, "variance_oracle", (*var.species_oracle)[a]);
            out.species(a, "variance_scaled_discrepancy", var.species_scaled_discrepancy[a]);
            out.species(a, "variance_multinomial_discrepancy", var.species_multinomial_discrepancy[a]);
        }
    }
    for (std::size_t i = 0; i < joint.total_levels(); ++i) {
        out.level(i, "energy", joint.entries()[i].value.energy);
        out.level(i, "p_level", eq.p_level[i]);
        out.level(i, "occupation", eq.occupations[i]);
        out.level(i, "variance_scaled_form", var.level_scaled_form[i]);
        out.level(i, "variance_multinomial", var.level_multinomial[i]);
        if (oracle) out.level(i, "variance_oracle", (*var.level_oracle)[i]);
    }
}

inline void enumerate_records(RecordBuilder& out, const RunConfig& cfg, const JointSpectrum& joint) {
    const int n = integer_particles(cfg, Command::enumerate);
    const auto ex = exact_statistics(joint, n, cfg.beta(), cfg.statistics, cfg.enumeration_cap);
    out.system("temperature", cfg.temperature);
    out.system("total_particles", n);
    out.system("configuration_count", static_cast<double>(ex.configuration_count));
    out.system("log_z", ex.log_z);
    out.system("mean_energy", ex.mean_energy);
    for (std::size_t a = 0; a < joint.species_count(); ++a) {
        out.species(a, "species_mean", ex.species_mean[a]);
        out.species(a, "species_variance", ex.species_variance[a]);
    }
    for (std::size_t i = 0; i < joint.total_levels(); ++i) {
        out.level(i, "mean_occupation", ex.mean_occupation[i]);
        out.level(i, "mean_square_occupation", ex.mean_square_occupation[i]);
        out.level(i, "occupation_variance", ex.occupation_variance[i]);
    }
}

inline std::string timeseries_csv(const JointSpectrum& joint, const SampleStatistics& s, int precision) {
    std::string out = "step,energy";
    for (const auto& sp : joint.species()) out += "," + csv_field("N_" + sp.name);
    out += "\r\n";
    for (const auto& p : s.timeseries) {
        out += std::to_string(p.step) + "," + format_number(p.energy, precision);
        for (int c : p.species_totals) out += "," + std::to_string(c);
        out += "\r\n";
    }
    return out;
}

inline SampleStatistics sample_records(RecordBuilder& out, const RunConfig& cfg, const JointSpectrum& joint) {
    const int n = integer_particles(cfg, Command::sample);
    auto sc = cfg.sampler;
    sc.record_histogram = false;
    sc.record_timeseries = !cfg.timeseries_path.empty();
    const auto s = run_chain(joint, n, cfg.beta(), cfg.statistics, sc);
    out.system("temperature", cfg.temperature);
    out.system("total_particles", n);
    out.system("seed", static_cast<double>(sc.seed));
    out.system("samples", static_cast<double>(s.samples));
    out.system("mean_energy", s.mean_energy);
    out.system("intra_acceptance", s.intra.rate());
    out.system("conversion_acceptance", s.conversion.rate());
    for (std::size_t a = 0; a < joint.species_count(); ++a) {
        out.species(a, "species_mean", s.species_mean[a]);
        out.species(a, "species_variance", s.species_variance[a]);
        out.species(a, "species_ess", s.species_ess[a]);
    }
    for (std::size_t i = 0; i < joint.total_levels(); ++i) {
        out.level(i, "mean_occupation", s.mean_occupation[i]);
        out.level(i, "occupation_variance", s.occupation_variance[i]);
        out.level(i, "occupation_ess", s.occupation_ess[i]);
    }
    return s;
}

inline void compare_records(RecordBuilder& out, const RunConfig& cfg, const JointSpectrum& joint) {
    require_quantum(cfg, Command::compare);
    const double beta = cfg.beta();
    const double n = cfg.total_particles;
    out.system("temperature", cfg.temperature);
    out.system("total_particles", n);

    const auto weighting = mu_weighting_check(joint, beta, n, cfg.statistics, cfg.solver);
    out.system("mu_coupled", weighting.mu_coupled);
    out.system("mu_weighted", weighting.mu_weighted);
    out.system("weighting_gap", weighting.weighting_gap);
    for (std::size_t a = 0; a < joint.species_count(); ++a) {
        out.species(a, "species_total", weighting.species_totals[a]);
        out.species(a, "mu_species_at_coupled_totals", weighting.mu_species[a]);
    }

    if (cfg.split) {
        const auto gap = entropy_gap(joint, beta, n, cfg.statistics, *cfg.split, cfg.solver);
        out.system("log_w_coupled", gap.log_w_coupled);
        out.system("log_w_independent", gap.log_w_independent);
        out.system("entropy_gap", gap.entropy_gap);
        for (std::size_t a = 0; a < joint.species_count(); ++a) {
            out.species(a, "split", gap.split[a]);
            out.species(a, "mu_species_at_split", gap.mu_species[a]);
        }
    } else {
        out.system("log_w_coupled", weighting.log_w_coupled);
        out.system("log_w_independent", weighting.log_w_independent);
        out.system("entropy_gap", weighting.entropy_gap);
    }

    const auto dev = classical_deviation(joint, beta, n, cfg.statistics, cfg.solver);
    out.system("fugacity", dev.fugacity);
    out.system("classical_deviation_fixed_mu", dev.at_fixed_mu);
    out.system("classical_deviation_fixed_n", dev.at_fixed_n);
}

}  // namespace detail

inline CommandResult run_command(Command command, const RunConfig& cfg) {
    CommandResult result;
    result.command = command;
    const JointSpectrum joint = cfg.joint();
    detail::RecordBuilder out(joint);
    out.system("schema_version", kOutputSchemaVersion);

    switch (command) {
        case Command::solve:
            detail::solve_records(out, cfg, joint, true);
            detail::spectrum_records(out, joint);
            break;
        case Command::classical:
            detail::classical_records(out, cfg, joint);
            break;
        case Command::enumerate:
            detail::enumerate_records(out, cfg, joint);
            break;
        case Command::sample: {
            const auto s = detail::sample_records(out, cfg, joint);
            if (!cfg.timeseries_path.empty())
                result.timeseries_csv = detail::timeseries_csv(joint, s, cfg.output.precision);
            break;
        }
        case Command::compare:
            detail::compare_records(out, cfg, joint);
            break;
        case Command::scan: {
            if (!cfg.scan) fail(ErrorKind::config, "scan needs a 'scan' section");
            auto records = out.take();
            const std::string parameter =
                cfg.scan->parameter == ScanParameter::temperature ? "temperature" : "total_particles";
            for (double v : cfg.scan->values) {
                RunConfig point = cfg;
                if (cfg.scan->parameter == ScanParameter::temperature)
                    point.temperature = v;
                else
                    point.total_particles = v;
                detail::RecordBuilder step(joint);
                detail::solve_records(step, point, joint, false);
                for (auto& r : step.take()) {
                    r.scan_parameter = parameter;
                    r.scan_value = v;
                    records.push_back(std::move(r));
                }
            }
            result.records = std::move(records);
            return result;
        }
    }
    result.records = out.take();
    return result;
}

inline std::string render_csv(const CommandResult& result, int precision) {
    const bool scan = result.command == Command::scan;
    std::string out;
    if (scan) out += "scan_parameter,scan_value,";
    out += "scope,species,replica,level,quantity,value\r\n";
    for (const auto& r : result.records) {
        if (scan) {
            out += detail::csv_field(r.scan_parameter) + ",";
            out += (r.scan_value ? detail::format_number(*r.scan_value, precision) : std::string()) + ",";
        }
        out += detail::csv_field(r.scope) + "," + detail::csv_field(r.species) + ",";
        out += (r.replica ? std::to_string(*r.replica) : std::string()) + ",";
        out += (r.level ? std::to_string(*r.level) : std::string()) + ",";
        out += detail::csv_field(r.quantity) + "," + detail::format_number(r.value, precision) + "\r\n";
    }
    return out;
}

inline std::string render_json(const CommandResult& result, int precision) {
    using ordered = nlohmann::ordered_json;
    // Values pass through the fixed-precision text form so JSON and CSV agree.
    const auto number = [precision](double v) -> ordered {
        if (!std::isfinite(v)) return detail::format_number(v, precision);
        return std::strtod(detail::format_number(v, precision).c_str(), nullptr);
    };
    ordered doc;
    doc["schema_version"] = kOutputSchemaVersion;
    doc["command"] = std::string(to_string(result.command));
    ordered records = ordered::array();
    for (const auto& r : result.records) {
        ordered item;
        if (result.command == Command::scan) {
            item["scan_parameter"] = r.scan_parameter;
            item["scan_value"] = r.scan_value ? number(*r.scan_value) : ordered(nullptr);
        }
        item["scope"] = r.scope;
        item["species"] = r.species;
        item["replica"] = r.replica ? ordered(*r.replica) : ordered(nullptr);
        item["level"] = r.level ? ordered(*r.level) : ordered(nullptr);
        item["quantity"] = r.quantity;
        item["value"] = number(r.value);
        records.push_back(std::move(item));
    }
    doc["records"] = std::move(records);
    return doc.dump(2) + "\n";
}

inline std::string render(const CommandResult& result, const OutputConfig& output) {
    return output.format == OutputFormat::json ? render_json(result, output.precision)
                                               : render_csv(result, output.precision);
}

inline constexpr std::string_view kColumnDescription = R"(Output columns (long format, one record per row; schema version 1)
  scan_parameter  scan only: temperature or total_particles
  scan_value      scan only: value of the swept parameter
  scope           system | species | level | pair
  species         species name; "A/B" for a pair record; empty for system
  replica         stoichiometric replica index 0..nu-1 (level records)
  level           level index within the species spectrum (level records)
  quantity        name of the reported quantity, listed below
  value           number printed with 12 significant digits (%.12g)

Quantities (k_B = 1, beta = 1/T):
  schema_version            output schema version
  temperature               T
  total_particles           N = sum_s n_s over all species and replicas
  beta_mu                   beta*mu, the single multiplier of the global constraint
  mu                        chemical potential mu
  log_multiplicity          ln W = sum_s ln[(g_s+n_s-1)!/(n_s!(g_s-1)!)] (BE) or ln[g_s!/(n_s!(g_s-n_s)!)] (FD), via lgamma
  residual                  sum_s n_s - N after the root solve
  iterations                root solver iterations
  mean_energy               E = sum_s n_s e_s (solve) or exact/sampled <E>
  log_grand_partition       ln Xi = -/+ sum_s g_s ln(1 -/+ e^{-beta(e_s-mu)})
  log_canonical_partition   ln Z = ln Xi - beta*mu*N
  occupation                n_s = g_s/(e^{beta(e_s-mu)} -/+ 1); classical: N p_s
  energy, degeneracy        e_s, g_s of the level
  species_total             N_A = sum of n_s over the levels of species A
  log_z_eq                  ln Z_eq, Z_eq = sum_A (Z^A)^{nu_A}, Z^A = sum_s g_s e^{-beta e_s}
  log_z_coupled             N ln Z_eq - ln N!
  log_z_frozen              sum_A [N^A ln Z^A - ln N^A!]
  free_energy               F_eq = sum_A N^A mu^A
  log_z                     ln Z^A (species) or exact ln Z (enumerate)
  p_species                 p^A = (Z^A)^{nu_A} / Z_eq
  mu_species                mu^A = (ln N^A - ln Z^A)/beta
  z_ratio, n_ratio          Z^B/Z^A and N^B/N^A for a species pair
  mass_action_applicable    1 when both stoichiometric coefficients equal 1
  p_level                   p_s = p^A g_s e^{-beta e_s} / (nu_A Z^A)
  variance_scaled_form      N^2 p (1 - p)
  variance_multinomial      N p (1 - p)
  variance_oracle           exact Maxwell-Boltzmann variance by enumeration
  variance_*_discrepancy    variance_oracle minus the named form
  oracle_available          1 when the exact variance oracle ran
  configuration_count       number of occupation configurations enumerated
  mean_occupation           <n_s> (exact or sampled)
  mean_square_occupation    <n_s^2>
  occupation_variance       <n_s^2> - <n_s>^2
  species_mean              <N_A>
  species_variance          <N_A^2> - <N_A>^2
  seed, samples             sampler seed and number of retained samples
  intra_acceptance          acceptance rate of moves within one species
  conversion_acceptance     acceptance rate of moves between species
  occupation_ess            effective sample size of n_s (batch means)
  species_ess               effective sample size of N_A (batch means)
  mu_coupled                coupled mu
  mu_species_at_coupled_totals  independent mu^A solved at N_A = <N_A>
  mu_weighted               sum_A (<N_A>/N) mu^A
  weighting_gap             |mu_coupled - mu_weighted|
  log_w_coupled             ln W at the coupled occupations
  log_w_independent         sum_A ln W^A at independent occupations
  entropy_gap               log_w_coupled - log_w_independent
  split                     per-species particle numbers of the independent comparison
  mu_species_at_split       independent mu^A at the split
  fugacity                  e^{beta(mu - e_min)}
  classical_deviation_fixed_mu  extreme of n_quantum/n_MB - 1 at the same mu
  classical_deviation_fixed_n   extreme of (n_quantum - n_classical)/n_classical at the same N
)";

}  // namespace rqgas
