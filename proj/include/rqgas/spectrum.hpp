#pragma once

// One-particle spectra: energy levels, degree-of-freedom generators, their
// Cartesian composition, and the joint spectrum of a set of interconverting
// species with stoichiometric replicas.
//
// Units: k_B = 1, energies and temperature share one unit, beta = 1/T.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rqgas/error.hpp"

namespace rqgas {

struct EnergyLevel {
    double energy = 0.0;
    std::int64_t degeneracy = 1;

    friend bool operator==(const EnergyLevel&, const EnergyLevel&) = default;
};

inline void validate(const EnergyLevel& level) {
    if (!std::isfinite(level.energy)) fail(ErrorKind::config, "energy level must be finite");
    if (level.degeneracy < 1) fail(ErrorKind::config, "energy level degeneracy must be >= 1");
}

struct Species {
    std::string name;
    std::vector<EnergyLevel> levels;
    int nu = 1;  ///< stoichiometric coefficient, always positive
};

inline void validate(const Species& species) {
    if (species.name.empty()) fail(ErrorKind::config, "species name must be non-empty");
    if (species.levels.empty())
        fail(ErrorKind::config, "species '" + species.name + "' has no levels");
    if (species.nu < 1)
        fail(ErrorKind::config, "species '" + species.name + "' must have nu >= 1");
    for (const auto& level : species.levels) validate(level);
}

// ---------------------------------------------------------------------------
// Degree-of-freedom generators

enum class DofKind { explicit_levels, harmonic, rigid_rotor, particle_in_box_3d };

/// Recipe for the level ladder of one degree of freedom.
///   harmonic:           offset + n q,                 g = 1
///   rigid_rotor:        offset + B J(J+1),            g = 2J+1
///   particle_in_box_3d: offset + c (nx^2+ny^2+nz^2),  g = number of triples
/// `parameter` is q, B or c respectively; `levels` is used by explicit_levels.
struct DofGenerator {
    DofKind kind = DofKind::explicit_levels;
    double parameter = 1.0;
    int count = 1;
    double energy_offset = 0.0;
    std::vector<EnergyLevel> levels;
};

namespace detail {

/// Number of ordered triples of positive integers with squares summing to
/// each value up to `max_sum`, indexed by the sum.
inline std::vector<std::int64_t> box_shell_counts(std::int64_t max_sum) {
    std::vector<std::int64_t> counts(static_cast<std::size_t>(max_sum + 1), 0);
    for (std::int64_t x = 1; x * x + 2 <= max_sum; ++x)
        for (std::int64_t y = 1; x * x + y * y + 1 <= max_sum; ++y)
            for (std::int64_t z = 1; x * x + y * y + z * z <= max_sum; ++z)
                ++counts[static_cast<std::size_t>(x * x + y * y + z * z)];
    return counts;
}

inline std::vector<EnergyLevel> box_levels(double scale, int count, double offset) {
    // A cube of side m holds every triple whose squared norm is <= m^2 + 2.
    for (std::int64_t side = 4;; side *= 2) {
        const std::int64_t max_sum = side * side + 2;
        const auto counts = box_shell_counts(max_sum);
        std::vector<EnergyLevel> out;
        for (std::int64_t s = 3; s <= max_sum && static_cast<int>(out.size()) < count; ++s) {
            const auto g = counts[static_cast<std::size_t>(s)];
            if (g > 0) out.push_back({offset + scale * static_cast<double>(s), g});
        }
        if (static_cast<int>(out.size()) == count) return out;
    }
}

}  // namespace detail

inline std::vector<EnergyLevel> generate_dof_levels(const DofGenerator& gen) {
    if (gen.kind == DofKind::explicit_levels) {
        if (gen.levels.empty()) fail(ErrorKind::config, "explicit generator needs at least one level");
        for (const auto& level : gen.levels) validate(level);
        return gen.levels;
    }
    if (gen.count < 1) fail(ErrorKind::config, "generator count must be >= 1");
    if (!(gen.parameter > 0.0) || !std::isfinite(gen.parameter))
        fail(ErrorKind::config, "generator energy parameter must be positive and finite");
    if (!std::isfinite(gen.energy_offset)) fail(ErrorKind::config, "generator offset must be finite");

    std::vector<EnergyLevel> out;
    out.reserve(static_cast<std::size_t>(gen.count));
    switch (gen.kind) {
        case DofKind::harmonic:
            for (int n = 0; n < gen.count; ++n)
                out.push_back({gen.energy_offset + n * gen.parameter, 1});
            break;
        case DofKind::rigid_rotor:
            for (int j = 0; j < gen.count; ++j)
                out.push_back({gen.energy_offset + gen.parameter * j * (j + 1.0), 2 * j + 1});
            break;
        case DofKind::particle_in_box_3d:
            out = detail::box_levels(gen.parameter, gen.count, gen.energy_offset);
            break;
        case DofKind::explicit_levels:
            break;
    }
    return out;
}

/// Cartesian product of per-dof ladders: energies add, degeneracies multiply.
/// The result is sorted by energy (stable with respect to the product order).
/// With `merge_degenerate`, exactly equal energies collapse into one level.
inline std::vector<EnergyLevel> compose_dof(std::span<const std::vector<EnergyLevel>> levels_per_dof,
                                            bool merge_degenerate = false) {
    if (levels_per_dof.empty()) fail(ErrorKind::config, "compose_dof needs at least one degree of freedom");
    for (const auto& dof : levels_per_dof) {
        if (dof.empty()) fail(ErrorKind::config, "compose_dof: empty degree of freedom");
        for (const auto& level : dof) validate(level);
    }

    std::vector<EnergyLevel> product = levels_per_dof.front();
    for (std::size_t d = 1; d < levels_per_dof.size(); ++d) {
        std::vector<EnergyLevel> next;
        next.reserve(product.size() * levels_per_dof[d].size());
        for (const auto& a : product)
            for (const auto& b : levels_per_dof[d])
                next.push_back({a.energy + b.energy, a.degeneracy * b.degeneracy});
        product = std::move(next);
    }
    std::stable_sort(product.begin(), product.end(),
                     [](const EnergyLevel& a, const EnergyLevel& b) { return a.energy < b.energy; });

    if (!merge_degenerate) return product;
    std::vector<EnergyLevel> merged;
    for (const auto& level : product) {
        if (!merged.empty() && merged.back().energy == level.energy)
            merged.back().degeneracy += level.degeneracy;
        else
            merged.push_back(level);
    }
    return merged;
}

/// Boltzmann weight of the highest retained level relative to the truncated
/// one-particle partition function, g e^{-beta e_max} / Z. Small values mean
/// truncation of the ladder is harmless at this temperature.
inline double truncation_weight(std::span<const EnergyLevel> levels, double beta) {
    if (levels.empty()) fail(ErrorKind::config, "truncation_weight: empty spectrum");
    const auto [lo, hi] = std::minmax_element(
        levels.begin(), levels.end(),
        [](const EnergyLevel& a, const EnergyLevel& b) { return a.energy < b.energy; });
    double z = 0.0;
    for (const auto& l : levels)
        z += static_cast<double>(l.degeneracy) * std::exp(-beta * (l.energy - lo->energy));
    double top = 0.0;
    for (const auto& l : levels)
        if (l.energy == hi->energy)
            top += static_cast<double>(l.degeneracy) * std::exp(-beta * (l.energy - lo->energy));
    return top / z;
}

// ---------------------------------------------------------------------------
// Joint spectrum

struct JointEntry {
    std::size_t species = 0;  ///< index into JointSpectrum::species()
    std::size_t level = 0;    ///< index into that species' level list
    int replica = 0;          ///< 0 .. nu-1
    EnergyLevel value;
};

/// The union of all species' levels, each species contributing nu copies of
/// its ladder. Ordered by species, then replica, then level.
class JointSpectrum {
public:
    JointSpectrum() = default;

    explicit JointSpectrum(std::vector<Species> species) : species_(std::move(species)) {
        if (species_.empty()) fail(ErrorKind::config, "joint spectrum needs at least one species");
        std::set<std::string> names;
        for (const auto& sp : species_) {
            validate(sp);
            if (!names.insert(sp.name).second)
                fail(ErrorKind::config, "duplicate species name '" + sp.name + "'");
        }
        for (std::size_t a = 0; a < species_.size(); ++a) {
            const auto& sp = species_[a];
            for (int r = 0; r < sp.nu; ++r)
                for (std::size_t s = 0; s < sp.levels.size(); ++s)
                    entries_.push_back({a, s, r, sp.levels[s]});
        }
    }

    const std::vector<Species>& species() const noexcept { return species_; }
    const std::vector<JointEntry>& entries() const noexcept { return entries_; }
    std::size_t total_levels() const noexcept { return entries_.size(); }
    std::size_t species_count() const noexcept { return species_.size(); }

    double min_energy() const {
        double m = entries_.front().value.energy;
        for (const auto& e : entries_) m = std::min(m, e.value.energy);
        return m;
    }

    /// Total fermionic capacity sum of g over all entries.
    double capacity() const {
        double c = 0.0;
        for (const auto& e : entries_) c += static_cast<double>(e.value.degeneracy);
        return c;
    }

    /// Indices of the entries (all replicas) belonging to species `a`.
    std::vector<std::size_t> entries_of(std::size_t a) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < entries_.size(); ++i)
            if (entries_[i].species == a) out.push_back(i);
        return out;
    }

    std::vector<double> degeneracies() const {
        std::vector<double> g;
        g.reserve(entries_.size());
        for (const auto& e : entries_) g.push_back(static_cast<double>(e.value.degeneracy));
        return g;
    }

    /// Sums a per-entry quantity into per-species totals.
    std::vector<double> species_sums(std::span<const double> per_entry) const {
        std::vector<double> out(species_.size(), 0.0);
        for (std::size_t i = 0; i < entries_.size(); ++i) out[entries_[i].species] += per_entry[i];
        return out;
    }

private:
    std::vector<Species> species_;
    std::vector<JointEntry> entries_;
};

inline JointSpectrum build_joint_spectrum(std::vector<Species> species) {
    return JointSpectrum(std::move(species));
}

}  // namespace rqgas
