#pragma once

// Maxwell-Boltzmann limit of the coupled description. The species one-particle
// partition functions Z^A combine into Z_eq = sum_A (Z^A)^{nu_A}; a random
// particle sits in species A with probability p^A = (Z^A)^{nu_A} / Z_eq, and
// the ensemble partition function is Z_eq^N / N!.

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rqgas/detail/numeric.hpp"
#include "rqgas/error.hpp"
#include "rqgas/exact_oracle.hpp"
#include "rqgas/quantum_equilibrium.hpp"
#include "rqgas/spectrum.hpp"

namespace rqgas {

/// ln sum_s g_s e^{-beta e_s}, with the lowest energy factored out.
inline double log_mb_partition(std::span<const EnergyLevel> levels, double beta) {
    detail::check_beta(beta);
    if (levels.empty()) fail(ErrorKind::config, "partition function of an empty spectrum");
    double emin = levels.front().energy;
    for (const auto& l : levels) emin = std::min(emin, l.energy);
    double sum = 0.0;
    for (const auto& l : levels) sum += static_cast<double>(l.degeneracy) * std::exp(-beta * (l.energy - emin));
    return -beta * emin + std::log(sum);
}

inline double mb_partition(std::span<const EnergyLevel> levels, double beta) {
    return std::exp(log_mb_partition(levels, beta));
}

struct ClassicalEquilibrium {
    double beta = 1.0;
    double total_particles = 0.0;
    std::vector<double> z_species;        ///< Z^A
    std::vector<double> log_z_species;    ///< ln Z^A
    double z_eq = 0.0;
    double log_z_eq = 0.0;
    std::vector<double> p_species;        ///< p^A
    std::vector<double> p_level;          ///< p_s per joint entry, sums to 1
    std::vector<double> p_within_species; ///< p_s^A per joint entry
    std::vector<double> occupations;      ///< n_s^eq per joint entry
    std::vector<double> species_totals;   ///< N^A = p^A N
    double beta_mu = 0.0;                 ///< ln N - ln Z_eq
    double log_z_coupled = 0.0;           ///< N ln Z_eq - ln Gamma(N+1)
    double log_z_frozen = 0.0;            ///< sum_A N^A ln Z^A - ln Gamma(N^A+1)
    std::vector<double> mu_species;       ///< mu^A = (ln N^A - ln Z^A) / beta
    double free_energy = 0.0;             ///< F_eq = sum_A N^A mu^A
};

/// Classical coupled equilibrium. For nu_A > 1 the species probability uses
/// (Z^A)^{nu_A}; occupations spread N p^A evenly over the nu_A replicas so
/// species totals stay N^A = p^A N.
inline ClassicalEquilibrium classical_equilibrium(const JointSpectrum& joint, double beta, double n_total) {
    detail::check_beta(beta);
    if (!(n_total > 0.0) || !std::isfinite(n_total))
        fail(ErrorKind::config, "classical equilibrium needs N > 0");

    ClassicalEquilibrium eq;
    eq.beta = beta;
    eq.total_particles = n_total;
    const auto& species = joint.species();
    std::vector<double> log_weight;  // ln (Z^A)^{nu_A}
    for (const auto& sp : species) {
        const double lz = log_mb_partition(sp.levels, beta);
        eq.log_z_species.push_back(lz);
        eq.z_species.push_back(std::exp(lz));
        log_weight.push_back(sp.nu * lz);
    }
    eq.log_z_eq = detail::log_sum_exp(log_weight);
    eq.z_eq = std::exp(eq.log_z_eq);
    for (double lw : log_weight) eq.p_species.push_back(std::exp(lw - eq.log_z_eq));

    for (const auto& e : joint.entries()) {
        const auto& sp = species[e.species];
        const double lp = std::log(static_cast<double>(e.value.degeneracy)) - beta * e.value.energy -
                          eq.log_z_species[e.species];
        const double within = std::exp(lp);
        eq.p_within_species.push_back(within);
        eq.p_level.push_back(eq.p_species[e.species] * within / sp.nu);
        eq.occupations.push_back(n_total * eq.p_level.back());
    }

    eq.beta_mu = std::log(n_total) - eq.log_z_eq;
    eq.log_z_coupled = n_total * eq.log_z_eq - detail::log_gamma(n_total + 1.0);
    eq.log_z_frozen = 0.0;
    eq.free_energy = 0.0;
    for (std::size_t a = 0; a < species.size(); ++a) {
        const double na = eq.p_species[a] * n_total;
        eq.species_totals.push_back(na);
        eq.log_z_frozen += na * eq.log_z_species[a] - detail::log_gamma(na + 1.0);
        const double mu_a = (std::log(na) - eq.log_z_species[a]) / beta;
        eq.mu_species.push_back(mu_a);
        eq.free_energy += na * mu_a;
    }
    return eq;
}

struct MassActionPair {
    std::size_t first = 0;   ///< species A
    std::size_t second = 0;  ///< species B
    double z_ratio = 0.0;    ///< Z^B / Z^A
    double n_ratio = 0.0;    ///< N^B / N^A
    bool applicable = true;  ///< both stoichiometric coefficients are 1
    bool degenerate = false; ///< N^A vanishes, ratio undefined
};

/// Z^B/Z^A against N^B/N^A for every ordered species pair A < B.
inline std::vector<MassActionPair> mass_action_check(const JointSpectrum& joint, const ClassicalEquilibrium& eq) {
    std::vector<MassActionPair> out;
    const auto& species = joint.species();
    for (std::size_t a = 0; a < species.size(); ++a) {
        for (std::size_t b = a + 1; b < species.size(); ++b) {
            MassActionPair pair;
            pair.first = a;
            pair.second = b;
            pair.applicable = species[a].nu == 1 && species[b].nu == 1;
            pair.z_ratio = std::exp(eq.log_z_species[b] - eq.log_z_species[a]);
            pair.degenerate = !(eq.species_totals[a] > 0.0);
            pair.n_ratio = pair.degenerate ? std::nan("") : eq.species_totals[b] / eq.species_totals[a];
            out.push_back(pair);
        }
    }
    return out;
}

/// Variances of level occupations and species particle numbers in two
/// normalisations: N^2 (p - p^2), as the coupled classical formulas are
/// written, and N (p - p^2), the multinomial result for N independent
/// particles. When oracle values are attached, the differences oracle - form
/// are reported as well.
struct VarianceReport {
    std::vector<double> level_scaled_form;       ///< N^2 (p_s - p_s^2)
    std::vector<double> level_multinomial;       ///< N (p_s - p_s^2)
    std::vector<double> species_scaled_form;     ///< N^2 (p^A - (p^A)^2)
    std::vector<double> species_multinomial;     ///< N (p^A - (p^A)^2)
    std::optional<std::vector<double>> level_oracle;
    std::optional<std::vector<double>> species_oracle;
    std::vector<double> level_scaled_discrepancy;
    std::vector<double> level_multinomial_discrepancy;
    std::vector<double> species_scaled_discrepancy;
    std::vector<double> species_multinomial_discrepancy;
};

inline VarianceReport classical_variances(const ClassicalEquilibrium& eq, double n_total,
                                          const ExactStatistics* oracle = nullptr) {
    VarianceReport r;
    const auto fill = [n_total](std::span<const double> p, std::vector<double>& scaled, std::vector<double>& multi) {
        for (double q : p) {
            const double v = std::max(0.0, q - q * q);
            scaled.push_back(n_total * n_total * v);
            multi.push_back(n_total * v);
        }
    };
    fill(eq.p_level, r.level_scaled_form, r.level_multinomial);
    fill(eq.p_species, r.species_scaled_form, r.species_multinomial);
    if (oracle != nullptr) {
        if (oracle->occupation_variance.size() != eq.p_level.size() ||
            oracle->species_variance.size() != eq.p_species.size())
            fail(ErrorKind::usage, "oracle statistics describe a different system");
        r.level_oracle = oracle->occupation_variance;
        r.species_oracle = oracle->species_variance;
        const auto diff = [](const std::vector<double>& o, const std::vector<double>& f) {
            std::vector<double> d;
            for (std::size_t i = 0; i < o.size(); ++i) d.push_back(o[i] - f[i]);
            return d;
        };
        r.level_scaled_discrepancy = diff(*r.level_oracle, r.level_scaled_form);
        r.level_multinomial_discrepancy = diff(*r.level_oracle, r.level_multinomial);
        r.species_scaled_discrepancy = diff(*r.species_oracle, r.species_scaled_form);
        r.species_multinomial_discrepancy = diff(*r.species_oracle, r.species_multinomial);
    }
    return r;
}

}  // namespace rqgas
