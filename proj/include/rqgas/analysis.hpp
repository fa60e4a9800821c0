#pragma once

// Comparisons between the coupled (one global particle-number constraint) and
// the independent-subsystem descriptions, and distance to the classical limit.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "rqgas/classical_limit.hpp"
#include "rqgas/error.hpp"
#include "rqgas/exact_oracle.hpp"
#include "rqgas/quantum_equilibrium.hpp"
#include "rqgas/spectrum.hpp"

namespace rqgas {

struct ComparisonReport {
    double log_w_coupled = 0.0;
    double log_w_independent = 0.0;
    double entropy_gap = 0.0;  ///< ln W_coupled - ln W_independent
    double mu_coupled = 0.0;
    std::vector<double> mu_species;
    std::vector<double> species_totals;  ///< coupled <N_A>
    std::vector<double> split;           ///< independent targets used
    double mu_weighted = 0.0;            ///< sum_A (<N_A>/N) mu^A
    double weighting_gap = 0.0;          ///< |mu_coupled - mu_weighted|
};

namespace detail {

/// ln W of one species held at exactly n_a particles, including the empty and
/// completely filled (fermionic) boundary cases the root solver cannot reach.
inline double independent_log_w(const Species& species, double beta, double n_a, Statistics stats,
                                const SolverOptions& opts, double& mu) {
    double capacity = 0.0;
    for (const auto& l : species.levels) capacity += species.nu * static_cast<double>(l.degeneracy);
    if (n_a < 0.0) fail(ErrorKind::domain, "split for '" + species.name + "' is negative");
    if (stats == Statistics::fermi && n_a > capacity)
        fail(ErrorKind::domain, "split for '" + species.name + "' exceeds its fermionic capacity");
    if (n_a == 0.0) {
        mu = -std::numeric_limits<double>::infinity();
        return 0.0;
    }
    if (stats == Statistics::fermi && n_a == capacity) {
        mu = std::numeric_limits<double>::infinity();
        return 0.0;
    }
    const auto sol = solve_mu_independent(species, beta, n_a, stats, opts);
    mu = sol.mu;
    return sol.log_multiplicity;
}

}  // namespace detail

/// ln W of the coupled equilibrium minus ln W of independent equilibria held
/// at the given per-species particle numbers.
inline ComparisonReport entropy_gap(const JointSpectrum& joint, double beta, double n_total, Statistics stats,
                                    std::span<const double> split, const SolverOptions& opts = {}) {
    if (split.size() != joint.species_count())
        fail(ErrorKind::domain, "split needs one particle number per species");
    double sum = 0.0;
    for (double v : split) sum += v;
    if (std::abs(sum - n_total) > 1e-12 * std::max(1.0, n_total)) {
        std::ostringstream msg;
        msg << "split sums to " << sum << ", expected N = " << n_total;
        fail(ErrorKind::domain, msg.str());
    }

    const auto coupled = solve_mu_coupled(joint, beta, n_total, stats, opts);
    ComparisonReport r;
    r.log_w_coupled = coupled.log_multiplicity;
    r.mu_coupled = coupled.mu;
    r.species_totals = coupled.species_totals;
    r.split.assign(split.begin(), split.end());
    r.mu_species.resize(joint.species_count());
    for (std::size_t a = 0; a < joint.species_count(); ++a)
        r.log_w_independent +=
            detail::independent_log_w(joint.species()[a], beta, split[a], stats, opts, r.mu_species[a]);
    r.entropy_gap = r.log_w_coupled - r.log_w_independent;
    return r;
}

/// Solves every species independently at the coupled averages <N_A> and
/// compares the coupled mu with the particle-weighted species average.
inline ComparisonReport mu_weighting_check(const JointSpectrum& joint, double beta, double n_total, Statistics stats,
                                           const SolverOptions& opts = {}) {
    const auto coupled = solve_mu_coupled(joint, beta, n_total, stats, opts);
    ComparisonReport r;
    r.mu_coupled = coupled.mu;
    r.log_w_coupled = coupled.log_multiplicity;
    r.species_totals = coupled.species_totals;
    // With one species the constraint fixes <N_A> = N.
    if (joint.species_count() == 1) r.species_totals[0] = n_total;
    r.split = r.species_totals;
    r.mu_species.resize(joint.species_count());
    for (std::size_t a = 0; a < joint.species_count(); ++a) {
        if (!(r.species_totals[a] > 0.0))
            fail(ErrorKind::domain, "species '" + joint.species()[a].name + "' has no particles");
        const auto sol = solve_mu_independent(joint.species()[a], beta, r.species_totals[a], stats, opts);
        r.mu_species[a] = sol.mu;
        r.log_w_independent += sol.log_multiplicity;
        r.mu_weighted += r.species_totals[a] / n_total * sol.mu;
    }
    r.entropy_gap = r.log_w_coupled - r.log_w_independent;
    r.weighting_gap = std::abs(r.mu_coupled - r.mu_weighted);
    return r;
}

struct ExactGap {
    double log_z_coupled = 0.0;      ///< ln of the canonical sum over all splits
    double log_z_independent = 0.0;  ///< sum_A ln Z_A(N_A) at the fixed split
    double gap = 0.0;                ///< never negative: one split is one term of the coupled sum
    double relative_gap = 0.0;       ///< gap / |log_z_coupled|
};

/// Microstate-count form of the coupled-versus-independent comparison, by
/// exact enumeration: the coupled canonical partition function against the
/// product of species partition functions with particle numbers frozen at
/// an integer split.
inline ExactGap exact_entropy_gap(const JointSpectrum& joint, double beta, int n_total, Statistics stats,
                                  std::span<const int> split, std::uint64_t cap = kDefaultEnumerationCap) {
    if (split.size() != joint.species_count())
        fail(ErrorKind::domain, "split needs one particle number per species");
    int sum = 0;
    for (int v : split) sum += v;
    if (sum != n_total) fail(ErrorKind::domain, "split does not sum to N");
    ExactGap g;
    g.log_z_coupled = exact_statistics(joint, n_total, beta, stats, cap).log_z;
    for (std::size_t a = 0; a < joint.species_count(); ++a) {
        const auto& sp = joint.species()[a];
        if (split[a] < 0) fail(ErrorKind::domain, "split for '" + sp.name + "' is negative");
        const JointSpectrum own({sp});
        if (stats == Statistics::fermi && split[a] > own.capacity())
            fail(ErrorKind::domain, "split for '" + sp.name + "' exceeds its fermionic capacity");
        g.log_z_independent += exact_statistics(own, split[a], beta, stats, cap).log_z;
    }
    g.gap = g.log_z_coupled - g.log_z_independent;
    g.relative_gap = g.gap / std::max(std::abs(g.log_z_coupled), 1e-300);
    return g;
}

struct ClassicalDeviation {
    /// Signed relative deviation (n_q - n_MB)/n_MB at the entry of largest
    /// magnitude, both evaluated at the solved quantum mu.
    double at_fixed_mu = 0.0;
    /// Same, against classical_equilibrium at the same N.
    double at_fixed_n = 0.0;
    std::size_t entry_fixed_mu = 0;
    std::size_t entry_fixed_n = 0;
    double fugacity = 0.0;  ///< e^{beta (mu - e_min)}
};

inline ClassicalDeviation classical_deviation(const JointSpectrum& joint, double beta, double n_total,
                                              Statistics stats, const SolverOptions& opts = {}) {
    const auto quantum = solve_mu_coupled(joint, beta, n_total, stats, opts);
    const auto classical = classical_equilibrium(joint, beta, n_total);
    ClassicalDeviation d;
    d.fugacity = std::exp(-quantum.reduced.x(beta, joint.min_energy()));
    double worst_mu = -1.0, worst_n = -1.0;
    for (std::size_t i = 0; i < joint.total_levels(); ++i) {
        const auto& level = joint.entries()[i].value;
        const double x = quantum.reduced.x(beta, level.energy);
        const double nq = quantum.occupations[i];
        // n_q / n_MB - 1 at the same mu, written to avoid cancellation
        double rel_mu = 0.0;
        if (stats == Statistics::bose)
            rel_mu = std::exp(-x) / -std::expm1(-x);          // 1/(1-e^{-x}) - 1
        else
            rel_mu = -std::exp(-x) / (1.0 + std::exp(-x));    // 1/(1+e^{-x}) - 1
        if (std::abs(rel_mu) > worst_mu) {
            worst_mu = std::abs(rel_mu);
            d.at_fixed_mu = rel_mu;
            d.entry_fixed_mu = i;
        }
        const double rel_n = (nq - classical.occupations[i]) / classical.occupations[i];
        if (std::abs(rel_n) > worst_n) {
            worst_n = std::abs(rel_n);
            d.at_fixed_n = rel_n;
            d.entry_fixed_n = i;
        }
    }
    return d;
}

}  // namespace rqgas
