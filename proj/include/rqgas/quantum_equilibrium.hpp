#pragma once

// Bose-Einstein / Fermi-Dirac occupation laws and chemical-potential solvers
// over a joint spectrum. In coupled mode one chemical potential constrains the
// total particle number across all species; in independent mode every species
// carries its own particle number and chemical potential.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "rqgas/detail/numeric.hpp"
#include "rqgas/error.hpp"
#include "rqgas/spectrum.hpp"

namespace rqgas {

enum class Statistics { bose, fermi, boltzmann };

inline std::string_view to_string(Statistics s) noexcept {
    switch (s) {
        case Statistics::bose: return "bose";
        case Statistics::fermi: return "fermi";
        case Statistics::boltzmann: return "boltzmann";
    }
    return "unknown";
}

enum class SolutionMode { coupled, independent };

struct SolverOptions {
    double tolerance = 1e-10;  ///< relative residual |sum n - N| / N
    int max_iterations = 500;
};

/// Chemical potential in the form the solver works with:
///   beta (e - mu) = beta (e - anchor) + shift.
/// Bosons anchor at the lowest level so that shift = beta (e_min - mu) > 0 is
/// carried without cancellation; fermions anchor at zero (shift = -beta mu).
struct ReducedPotential {
    double anchor = 0.0;
    double shift = 0.0;

    double x(double beta, double energy) const { return beta * (energy - anchor) + shift; }
    double beta_mu(double beta) const { return beta * anchor - shift; }
};

struct EquilibriumSolution {
    SolutionMode mode = SolutionMode::coupled;
    Statistics statistics = Statistics::bose;
    double beta = 1.0;
    double total_particles = 0.0;
    double mu = 0.0;       ///< global chemical potential (coupled mode)
    double beta_mu = 0.0;  ///< beta * mu, carried separately for accuracy
    ReducedPotential reduced;
    std::vector<double> species_mu;      ///< per species; all equal to mu when coupled
    std::vector<double> occupations;     ///< per joint entry
    std::vector<double> species_totals;  ///< <N_A>
    double log_multiplicity = 0.0;       ///< ln W at the solved occupations
    double residual = 0.0;               ///< sum n - N
    int iterations = 0;
};

namespace detail {

/// g / (e^x -/+ 1) for a single state group, nu = 1.
inline double occupation_from_x(double g, double x, Statistics stats) {
    switch (stats) {
        case Statistics::bose:
            return g / std::expm1(x);
        case Statistics::fermi:
            if (x > 0.0) {
                const double t = std::exp(-x);
                return g * t / (1.0 + t);
            }
            return g / (std::exp(x) + 1.0);
        case Statistics::boltzmann:
            return g * std::exp(-x);
    }
    return 0.0;
}

/// d n / d x (always <= 0).
inline double occupation_slope(double g, double x, Statistics stats) {
    switch (stats) {
        case Statistics::bose: {
            // e^x / (e^x - 1)^2 = 1 / (4 sinh^2(x/2))
            const double s = std::sinh(0.5 * x);
            return -g / (4.0 * s * s);
        }
        case Statistics::fermi: {
            const double c = std::cosh(0.5 * x);
            return -g / (4.0 * c * c);
        }
        case Statistics::boltzmann:
            return -g * std::exp(-x);
    }
    return 0.0;
}

struct TotalAndSlope {
    double total = 0.0;
    double slope = 0.0;  ///< d total / d shift
};

inline TotalAndSlope totals(std::span<const JointEntry> entries, double beta, const ReducedPotential& p,
                            Statistics stats) {
    TotalAndSlope out;
    for (const auto& e : entries) {
        const double g = static_cast<double>(e.value.degeneracy);
        const double x = p.x(beta, e.value.energy);
        out.total += occupation_from_x(g, x, stats);
        out.slope += occupation_slope(g, x, stats);
    }
    return out;
}

inline void check_beta(double beta) {
    if (!(beta > 0.0) || !std::isfinite(beta)) fail(ErrorKind::config, "beta must be positive and finite");
}

/// Solves sum_s n_s(shift) = target for the shift of a reduced potential.
/// The total is strictly decreasing in the shift. Bosons search shift in
/// (0, inf) in log space; fermions search the whole real line.
inline ReducedPotential solve_shift(std::span<const JointEntry> entries, double beta, double target,
                                    Statistics stats, const SolverOptions& opts, int& iterations,
                                    double& residual) {
    const bool bose = stats == Statistics::bose;
    ReducedPotential p;
    if (bose) {
        p.anchor = entries.front().value.energy;
        for (const auto& e : entries) p.anchor = std::min(p.anchor, e.value.energy);
    }
    const auto eval = [&](double shift) {
        ReducedPotential q = p;
        q.shift = shift;
        return totals(entries, beta, q, stats);
    };
    const double tol = opts.tolerance * target;

    // Bracket [lo, hi] with total(lo) > target > total(hi).
    double lo = 0.0, hi = 0.0;
    if (bose) {
        // shift = 1 corresponds to mu = e_min - 1/beta
        double s = 1.0;
        if (eval(s).total > target) {
            lo = s;
            while (eval(s).total > target) {
                lo = s;
                s *= 2.0;
                if (!std::isfinite(s)) fail(ErrorKind::solver, "bose bracket expansion diverged");
            }
            hi = s;
        } else {
            hi = s;
            while (eval(s).total <= target) {
                hi = s;
                s *= 0.5;
                if (s < std::numeric_limits<double>::min())
                    fail(ErrorKind::solver, "bose bracket collapsed onto the condensation bound");
            }
            lo = s;
        }
    } else {
        double emin = entries.front().value.energy, emax = emin;
        for (const auto& e : entries) {
            emin = std::min(emin, e.value.energy);
            emax = std::max(emax, e.value.energy);
        }
        // shift = -beta mu; high shift means low mu
        hi = -beta * emin + 1.0;
        lo = -beta * emax - 1.0;
        for (double step = 1.0; eval(hi).total > target; step *= 2.0) {
            hi += step;
            if (!std::isfinite(hi)) fail(ErrorKind::solver, "fermi bracket expansion diverged");
        }
        for (double step = 1.0; eval(lo).total < target; step *= 2.0) {
            lo -= step;
            if (!std::isfinite(lo)) fail(ErrorKind::solver, "fermi bracket expansion diverged");
        }
    }

    // Safeguarded Newton: take the Newton step when it stays inside the
    // bracket, otherwise bisect (geometrically for the positive boson shift).
    double s = bose ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    for (iterations = 1; iterations <= opts.max_iterations; ++iterations) {
        const auto f = eval(s);
        residual = f.total - target;
        if (std::abs(residual) <= tol) {
            // One polishing Newton step, kept only if it improves the residual.
            const double polished = s - residual / f.slope;
            if (std::isfinite(polished) && (!bose || polished > 0.0)) {
                const double r = eval(polished).total - target;
                if (std::abs(r) < std::abs(residual)) {
                    s = polished;
                    residual = r;
                }
            }
            p.shift = s;
            return p;
        }
        if (residual > 0.0)
            lo = s;
        else
            hi = s;
        double next = s - residual / f.slope;
        if (!(next > lo && next < hi) || !std::isfinite(next))
            next = bose ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
        const double floor = 4.0 * std::numeric_limits<double>::epsilon() *
                             (bose ? std::abs(s) : std::max(1.0, std::abs(s)));
        if (next == s || hi - lo <= floor) {
            // The bracket is exhausted; accept only if the tolerance is met.
            const auto fn = eval(next);
            residual = fn.total - target;
            if (std::abs(residual) <= tol) {
                p.shift = next;
                return p;
            }
            break;
        }
        s = next;
    }
    std::ostringstream msg;
    msg.precision(17);
    msg << "chemical potential did not converge: bracket on beta(anchor - mu) = [" << lo << ", " << hi
        << "], residual " << residual << " for target " << target;
    fail(ErrorKind::solver, msg.str());
}

}  // namespace detail

/// Mean occupation of one level group: nu g / (e^{beta(e - mu)} -/+ 1), or
/// nu g e^{-beta(e - mu)} for Boltzmann statistics.
inline double occupation(const EnergyLevel& level, double beta, double mu, Statistics stats, int nu = 1) {
    detail::check_beta(beta);
    if (nu < 1) fail(ErrorKind::config, "nu must be >= 1");
    const double x = beta * (level.energy - mu);
    if (stats == Statistics::bose && !(x > 0.0))
        fail(ErrorKind::domain, "condensation bound violated: mu must lie below the level energy");
    return nu * detail::occupation_from_x(static_cast<double>(level.degeneracy), x, stats);
}

/// ln W for real-valued occupations, factorials extended by the gamma function.
inline double log_multiplicity(std::span<const double> occupations, std::span<const double> degeneracies,
                               Statistics stats) {
    if (occupations.size() != degeneracies.size())
        fail(ErrorKind::config, "log_multiplicity: occupation and degeneracy lengths differ");
    using detail::log_gamma;
    double sum = 0.0;
    for (std::size_t s = 0; s < occupations.size(); ++s) {
        const double n = occupations[s];
        const double g = degeneracies[s];
        if (!(n >= 0.0)) fail(ErrorKind::domain, "log_multiplicity: negative occupation");
        switch (stats) {
            case Statistics::bose:
                sum += log_gamma(g + n) - log_gamma(g) - log_gamma(n + 1.0);
                break;
            case Statistics::fermi:
                if (n > g) fail(ErrorKind::domain, "log_multiplicity: fermionic occupation exceeds degeneracy");
                sum += log_gamma(g + 1.0) - log_gamma(g - n + 1.0) - log_gamma(n + 1.0);
                break;
            case Statistics::boltzmann:
                sum += n * std::log(g) - log_gamma(n + 1.0);
                break;
        }
    }
    return sum;
}

namespace detail {

inline EquilibriumSolution solve_on_entries(const JointSpectrum& joint, std::span<const JointEntry> entries,
                                            double beta, double n_target, Statistics stats,
                                            const SolverOptions& opts) {
    check_beta(beta);
    if (stats == Statistics::boltzmann)
        fail(ErrorKind::config, "quantum solver requires bose or fermi statistics");
    if (!(n_target > 0.0) || !std::isfinite(n_target))
        fail(ErrorKind::domain, "particle number must be positive and finite");
    if (stats == Statistics::fermi) {
        double capacity = 0.0;
        for (const auto& e : entries) capacity += static_cast<double>(e.value.degeneracy);
        if (n_target >= capacity) {
            std::ostringstream msg;
            msg << "fermionic saturation: N = " << n_target << " reaches capacity " << capacity;
            fail(ErrorKind::saturation, msg.str());
        }
    }

    EquilibriumSolution sol;
    sol.statistics = stats;
    sol.beta = beta;
    sol.total_particles = n_target;
    sol.reduced = solve_shift(entries, beta, n_target, stats, opts, sol.iterations, sol.residual);
    sol.beta_mu = sol.reduced.beta_mu(beta);
    sol.mu = sol.beta_mu / beta;
    sol.species_mu.assign(joint.species_count(), sol.mu);

    sol.occupations.reserve(entries.size());
    std::vector<double> g;
    g.reserve(entries.size());
    for (const auto& e : entries) {
        g.push_back(static_cast<double>(e.value.degeneracy));
        sol.occupations.push_back(occupation_from_x(g.back(), sol.reduced.x(beta, e.value.energy), stats));
    }
    sol.log_multiplicity = log_multiplicity(sol.occupations, g, stats);
    return sol;
}

}  // namespace detail

/// Coupled (reactive) equilibrium: one chemical potential fixes the total
/// occupation of the joint spectrum to N.
inline EquilibriumSolution solve_mu_coupled(const JointSpectrum& joint, double beta, double n_total,
                                            Statistics stats, const SolverOptions& opts = {}) {
    auto sol = detail::solve_on_entries(joint, joint.entries(), beta, n_total, stats, opts);
    sol.mode = SolutionMode::coupled;
    sol.species_totals = joint.species_sums(sol.occupations);
    return sol;
}

struct IndependentSolution {
    double mu = 0.0;
    double beta_mu = 0.0;
    ReducedPotential reduced;
    std::vector<double> occupations;  ///< per entry of the species (replicas included)
    double log_multiplicity = 0.0;
    double residual = 0.0;
    int iterations = 0;
};

/// One species on its own (all nu replicas of its ladder) with a fixed N_A.
inline IndependentSolution solve_mu_independent(const Species& species, double beta, double n_species,
                                                Statistics stats, const SolverOptions& opts = {}) {
    if (!(n_species > 0.0))
        fail(ErrorKind::domain, "independent solve for '" + species.name + "' needs N_A > 0");
    const JointSpectrum own({species});
    const auto sol = detail::solve_on_entries(own, own.entries(), beta, n_species, stats, opts);
    return {sol.mu, sol.beta_mu, sol.reduced, sol.occupations, sol.log_multiplicity, sol.residual, sol.iterations};
}

/// Independent-subsystem equilibrium over a whole joint spectrum, one target
/// per species. Every target must be positive.
inline EquilibriumSolution solve_independent(const JointSpectrum& joint, double beta,
                                             std::span<const double> species_targets, Statistics stats,
                                             const SolverOptions& opts = {}) {
    if (species_targets.size() != joint.species_count())
        fail(ErrorKind::config, "one particle-number target per species is required");
    EquilibriumSolution sol;
    sol.mode = SolutionMode::independent;
    sol.statistics = stats;
    sol.beta = beta;
    sol.occupations.assign(joint.total_levels(), 0.0);
    sol.species_mu.resize(joint.species_count());
    sol.species_totals.assign(species_targets.begin(), species_targets.end());
    double total = 0.0;
    for (std::size_t a = 0; a < joint.species_count(); ++a) {
        const auto part = solve_mu_independent(joint.species()[a], beta, species_targets[a], stats, opts);
        const auto idx = joint.entries_of(a);
        for (std::size_t k = 0; k < idx.size(); ++k) sol.occupations[idx[k]] = part.occupations[k];
        sol.species_mu[a] = part.mu;
        sol.log_multiplicity += part.log_multiplicity;
        sol.residual += part.residual;
        sol.iterations += part.iterations;
        total += species_targets[a];
    }
    sol.total_particles = total;
    sol.mu = std::numeric_limits<double>::quiet_NaN();
    sol.beta_mu = sol.mu;
    return sol;
}

/// Mean energy sum_s n_s e_s of any solution over `joint`.
inline double mean_energy(const JointSpectrum& joint, const EquilibriumSolution& sol) {
    double e = 0.0;
    for (std::size_t i = 0; i < joint.total_levels(); ++i) e += sol.occupations[i] * joint.entries()[i].value.energy;
    return e;
}

namespace detail {

inline double grand_log_term(double g, double x, Statistics stats) {
    switch (stats) {
        case Statistics::bose:
            return -g * std::log1p(-std::exp(-x));
        case Statistics::fermi:
            return x > 0.0 ? g * std::log1p(std::exp(-x)) : g * (-x + std::log1p(std::exp(x)));
        case Statistics::boltzmann:
            return g * std::exp(-x);
    }
    return 0.0;
}

inline double grand_potential_log(const JointSpectrum& joint, double beta, const ReducedPotential& p,
                                  Statistics stats) {
    double sum = 0.0;
    for (const auto& e : joint.entries()) {
        const double x = p.x(beta, e.value.energy);
        if (stats == Statistics::bose && !(x > 0.0))
            fail(ErrorKind::domain, "condensation bound violated: mu must lie below the lowest level");
        sum += grand_log_term(static_cast<double>(e.value.degeneracy), x, stats);
    }
    return sum;
}

}  // namespace detail

/// ln Xi = -/+ sum_s g_s ln(1 -/+ e^{beta(mu - e_s)}), degeneracy multiplying the log.
inline double grand_potential_log(const JointSpectrum& joint, double beta, double mu, Statistics stats) {
    detail::check_beta(beta);
    return detail::grand_potential_log(joint, beta, ReducedPotential{0.0, -beta * mu}, stats);
}

/// ln Z = ln Xi(mu) - beta mu N at the mu that holds N particles (-beta F).
inline double canonical_logZ_from_grand(const JointSpectrum& joint, double beta, double n_total,
                                        Statistics stats, const SolverOptions& opts = {}) {
    const auto sol = solve_mu_coupled(joint, beta, n_total, stats, opts);
    return detail::grand_potential_log(joint, beta, sol.reduced, stats) - sol.beta_mu * n_total;
}

}  // namespace rqgas
