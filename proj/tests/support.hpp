#pragma once

// Shared fixtures, random instance generators and an independent canonical
// oracle used by the unit and acceptance tests.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "rqgas/quantum_equilibrium.hpp"
#include "rqgas/spectrum.hpp"

namespace rqgas::test {

inline Species make_species(std::string name, std::vector<EnergyLevel> levels, int nu = 1) {
    return Species{std::move(name), std::move(levels), nu};
}

/// Two entries A = (0, 1) and B = (ln 2, 1): the tiny Bose fixture.
inline JointSpectrum tiny_bose() {
    return JointSpectrum({make_species("A", {{0.0, 1}}), make_species("B", {{std::log(2.0), 1}})});
}

/// Two identical single-level species.
inline JointSpectrum equal_pair(std::int64_t g = 1) {
    return JointSpectrum({make_species("A", {{0.0, g}}), make_species("B", {{0.0, g}})});
}

class Generator {
public:
    explicit Generator(std::uint64_t seed) : rng_(seed) {}

    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    bool coin() { return integer(0, 1) == 1; }

    std::vector<EnergyLevel> levels(int min_count, int max_count, double e_max, int g_max) {
        std::vector<EnergyLevel> out(static_cast<std::size_t>(integer(min_count, max_count)));
        for (auto& l : out) l = {real(0.0, e_max), integer(1, g_max)};
        return out;
    }

    /// 2-4 species, 2-10 levels each, energies in [0, 5], g in 1..4.
    JointSpectrum joint(int min_species = 2, int max_species = 4, int max_nu = 1) {
        std::vector<Species> sp;
        const int count = integer(min_species, max_species);
        for (int a = 0; a < count; ++a)
            sp.push_back(make_species("S" + std::to_string(a), levels(2, 10, 5.0, 4), integer(1, max_nu)));
        return JointSpectrum(std::move(sp));
    }

    /// A particle number that is feasible for the statistics.
    double feasible_n(const JointSpectrum& joint, Statistics stats) {
        if (stats == Statistics::fermi) return real(0.05, 0.95) * joint.capacity();
        return real(0.1, 40.0);
    }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

/// Canonical ideal-gas recursion Z_N = (1/N) sum_k (+/-)^{k+1} C(k beta) Z_{N-k}
/// over one-particle states, with C(k beta) = sum_s g_s e^{-k beta e_s}. Mean
/// occupations follow from <n_s> = sum_k (+/-)^{k+1} g_s e^{-k beta e_s} Z_{N-k}/Z_N.
/// Energies are measured from the lowest level. Accurate for the small N used
/// in tests; independent of the enumeration code.
struct RecursionOracle {
    std::vector<double> z;          ///< Z_0 .. Z_N
    std::vector<double> occupation; ///< per level
};

inline RecursionOracle canonical_recursion(const std::vector<EnergyLevel>& levels, int n, double beta, Statistics stats) {
    double emin = levels.front().energy;
    for (const auto& l : levels) emin = std::min(emin, l.energy);
    const double sign = stats == Statistics::bose ? 1.0 : -1.0;
    std::vector<double> c(static_cast<std::size_t>(n + 1), 0.0);
    for (int k = 1; k <= n; ++k)
        for (const auto& l : levels)
            c[static_cast<std::size_t>(k)] += static_cast<double>(l.degeneracy) * std::exp(-k * beta * (l.energy - emin));
    RecursionOracle out;
    out.z.assign(static_cast<std::size_t>(n + 1), 0.0);
    out.z[0] = 1.0;
    for (int m = 1; m <= n; ++m) {
        double s = 0.0;
        for (int k = 1; k <= m; ++k)
            s += std::pow(sign, k + 1) * c[static_cast<std::size_t>(k)] * out.z[static_cast<std::size_t>(m - k)];
        out.z[static_cast<std::size_t>(m)] = s / m;
    }
    for (const auto& l : levels) {
        double s = 0.0;
        for (int k = 1; k <= n; ++k)
            s += std::pow(sign, k + 1) * static_cast<double>(l.degeneracy) * std::exp(-k * beta * (l.energy - emin)) *
                 out.z[static_cast<std::size_t>(n - k)];
        out.occupation.push_back(s / out.z[static_cast<std::size_t>(n)]);
    }
    return out;
}

/// Flattens a joint spectrum into its entry levels, replicas included.
inline std::vector<EnergyLevel> entry_levels(const JointSpectrum& joint) {
    std::vector<EnergyLevel> out;
    for (const auto& e : joint.entries()) out.push_back(e.value);
    return out;
}

inline double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return std::round(r);
}

}  // namespace rqgas::test
