#pragma once

// Metropolis-Hastings sampling of the canonical ensemble over occupancy
// configurations of the joint spectrum. This is a sampling device for the
// equilibrium distribution, not a model of reaction kinetics.
//
// Proposal: pick a donor uniformly among occupied entries, a recipient
// uniformly among the other S-1 entries, and move one particle. Moves whose
// donor and recipient belong to different species are conversion moves; they
// are additionally accepted with probability `conversion_move_probability`
// (0 when conversion moves are disabled), which keeps every species' particle
// number conserved in the disabled case.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "rqgas/error.hpp"
#include "rqgas/exact_oracle.hpp"
#include "rqgas/quantum_equilibrium.hpp"
#include "rqgas/spectrum.hpp"

namespace rqgas {

struct SamplerConfig {
    std::int64_t steps = 100'000;
    std::int64_t burn_in = 1'000;
    std::uint64_t seed = 1;
    bool conversion_moves_enabled = true;
    double conversion_move_probability = 1.0;
    std::int64_t thinning = 1;
    bool record_histogram = true;
    std::size_t histogram_limit = 100'000;  ///< distinct configurations kept
    bool record_timeseries = false;
    std::optional<std::vector<int>> initial_counts;
};

inline void validate(const SamplerConfig& cfg) {
    if (cfg.burn_in < 0) fail(ErrorKind::config, "sampler burn_in must be >= 0");
    if (cfg.steps <= cfg.burn_in) fail(ErrorKind::config, "sampler steps must exceed burn_in");
    if (cfg.thinning < 1) fail(ErrorKind::config, "sampler thinning must be >= 1");
    if (!(cfg.conversion_move_probability >= 0.0 && cfg.conversion_move_probability <= 1.0))
        fail(ErrorKind::config, "conversion_move_probability must lie in [0, 1]");
}

struct MoveCounters {
    std::uint64_t proposed = 0;
    std::uint64_t accepted = 0;
    double rate() const { return proposed ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0; }
};

struct TimeseriesPoint {
    std::int64_t step = 0;
    double energy = 0.0;
    std::vector<int> species_totals;
};

struct SampleStatistics {
    std::uint64_t samples = 0;
    std::vector<double> mean_occupation;
    std::vector<double> occupation_variance;
    std::vector<double> occupation_ess;
    std::vector<double> species_mean;
    std::vector<double> species_variance;
    std::vector<double> species_ess;
    double mean_energy = 0.0;
    MoveCounters intra;
    MoveCounters conversion;
    bool degenerate = false;  ///< no move can change the configuration
    bool histogram_complete = false;
    std::map<std::vector<int>, std::uint64_t> histogram;
    std::vector<TimeseriesPoint> timeseries;
    // Descriptor of the sampled system.
    std::size_t total_levels = 0;
    int total_particles = 0;
    double beta = 0.0;
    Statistics statistics = Statistics::bose;
};

namespace detail {

/// Unbiased integer in [0, n) from a 64-bit engine; portable across standard
/// libraries, unlike std::uniform_int_distribution.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t r;
    do r = rng(); while (r >= limit);
    return r % n;
}

inline double uniform_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// Target weights and proposal of the chain for one system. Shared by the
/// sampler and by the exact transition-matrix construction.
class MoveKernel {
public:
    MoveKernel(const JointSpectrum& joint, double beta, Statistics stats, double conversion_probability)
        : joint_(&joint), beta_(beta), stats_(stats), conversion_probability_(conversion_probability) {}

    std::size_t size() const noexcept { return joint_->total_levels(); }

    bool is_conversion(std::size_t donor, std::size_t recipient) const {
        return joint_->entries()[donor].species != joint_->entries()[recipient].species;
    }

    /// ln pi(X') - ln pi(X) for moving one particle donor -> recipient, or
    /// -inf when X' is not allowed.
    double log_weight_ratio(std::span<const int> counts, std::size_t donor, std::size_t recipient) const {
        const auto& d = joint_->entries()[donor].value;
        const auto& r = joint_->entries()[recipient].value;
        const double gd = static_cast<double>(d.degeneracy);
        const double gr = static_cast<double>(r.degeneracy);
        const double nd = counts[donor];
        const double nr = counts[recipient];
        double ratio = -beta_ * (r.energy - d.energy);
        switch (stats_) {
            case Statistics::bose:
                // m(n) = C(g+n-1, n): m(n+1)/m(n) = (g+n)/(n+1)
                ratio += std::log((gr + nr) / (nr + 1.0)) - std::log((gd + nd - 1.0) / nd);
                break;
            case Statistics::fermi:
                if (nr + 1.0 > gr) return detail::kNegInf;
                // m(n) = C(g, n): m(n+1)/m(n) = (g-n)/(n+1)
                ratio += std::log((gr - nr) / (nr + 1.0)) - std::log((gd - nd + 1.0) / nd);
                break;
            case Statistics::boltzmann:
                ratio += std::log(gr / (nr + 1.0)) - std::log(gd / nd);
                break;
        }
        return ratio;
    }

    /// Acceptance probability of a proposed move from a state with
    /// `occupied` occupied entries.
    double acceptance(std::span<const int> counts, std::size_t occupied, std::size_t donor,
                      std::size_t recipient) const {
        double gate = 1.0;
        if (is_conversion(donor, recipient)) {
            gate = conversion_probability_;
            if (gate == 0.0) return 0.0;
        }
        const double lr = log_weight_ratio(counts, donor, recipient);
        if (lr == detail::kNegInf) return 0.0;
        const std::size_t occupied_after =
            occupied - (counts[donor] == 1 ? 1 : 0) + (counts[recipient] == 0 ? 1 : 0);
        // Hastings factor q(X'->X)/q(X->X') = D(X)/D(X')
        const double log_a = lr + std::log(static_cast<double>(occupied)) - std::log(static_cast<double>(occupied_after));
        return gate * std::min(1.0, std::exp(log_a));
    }

private:
    const JointSpectrum* joint_;
    double beta_;
    Statistics stats_;
    double conversion_probability_;
};

/// Lowest-energy-first filling that respects fermionic capacity.
inline std::vector<int> greedy_initial_state(const JointSpectrum& joint, int n, Statistics stats) {
    std::vector<std::size_t> order(joint.total_levels());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return joint.entries()[a].value.energy < joint.entries()[b].value.energy;
    });
    std::vector<int> counts(order.size(), 0);
    int remaining = n;
    for (std::size_t i : order) {
        if (remaining == 0) break;
        const std::int64_t cap =
            stats == Statistics::fermi ? joint.entries()[i].value.degeneracy : static_cast<std::int64_t>(remaining);
        counts[i] = static_cast<int>(std::min<std::int64_t>(cap, remaining));
        remaining -= counts[i];
    }
    if (remaining > 0) fail(ErrorKind::saturation, "initial state exceeds fermionic capacity");
    return counts;
}

namespace detail {

/// Streaming mean/variance plus batch means for an effective-sample-size
/// estimate, one slot per tracked quantity.
class BatchMoments {
public:
    BatchMoments(std::size_t quantities, std::uint64_t expected_samples, std::uint64_t batches = 50)
        : sum_(quantities, 0.0), sum2_(quantities, 0.0), batch_sum_(quantities, 0.0),
          batch_means_(quantities), batch_size_(std::max<std::uint64_t>(1, expected_samples / batches)) {}

    void add(std::span<const double> values) {
        for (std::size_t q = 0; q < values.size(); ++q) {
            sum_[q] += values[q];
            sum2_[q] += values[q] * values[q];
            batch_sum_[q] += values[q];
        }
        ++count_;
        if (++in_batch_ == batch_size_) {
            for (std::size_t q = 0; q < values.size(); ++q) {
                batch_means_[q].push_back(batch_sum_[q] / static_cast<double>(batch_size_));
                batch_sum_[q] = 0.0;
            }
            in_batch_ = 0;
        }
    }

    std::uint64_t count() const noexcept { return count_; }
    double mean(std::size_t q) const { return sum_[q] / static_cast<double>(count_); }
    double variance(std::size_t q) const {
        const double m = mean(q);
        return std::max(0.0, sum2_[q] / static_cast<double>(count_) - m * m);
    }

    /// n sigma^2 / (b Var(batch means)), clamped to [1, n]; n when the
    /// quantity never varied.
    double ess(std::size_t q) const {
        const double n = static_cast<double>(count_);
        const double var = variance(q);
        const auto& bm = batch_means_[q];
        if (var <= 0.0 || bm.size() < 2) return n;
        double m = 0.0;
        for (double x : bm) m += x;
        m /= static_cast<double>(bm.size());
        double vb = 0.0;
        for (double x : bm) vb += (x - m) * (x - m);
        vb /= static_cast<double>(bm.size() - 1);
        if (vb <= 0.0) return n;
        return std::clamp(n * var / (static_cast<double>(batch_size_) * vb), 1.0, n);
    }

private:
    std::vector<double> sum_, sum2_, batch_sum_;
    std::vector<std::vector<double>> batch_means_;
    std::uint64_t batch_size_;
    std::uint64_t in_batch_ = 0;
    std::uint64_t count_ = 0;
};

}  // namespace detail

inline SampleStatistics run_chain(const JointSpectrum& joint, int n, double beta, Statistics stats,
                                  const SamplerConfig& cfg) {
    validate(cfg);
    detail::check_beta(beta);
    if (n < 1) fail(ErrorKind::config, "sampler needs N >= 1");

    std::vector<int> counts = cfg.initial_counts ? *cfg.initial_counts : greedy_initial_state(joint, n, stats);
    if (counts.size() != joint.total_levels()) fail(ErrorKind::config, "initial state has the wrong length");
    {
        long total = 0;
        for (std::size_t i = 0; i < counts.size(); ++i) {
            if (counts[i] < 0) fail(ErrorKind::config, "initial state has a negative occupation");
            if (stats == Statistics::fermi && counts[i] > joint.entries()[i].value.degeneracy)
                fail(ErrorKind::saturation, "initial state exceeds fermionic capacity");
            total += counts[i];
        }
        if (total != n) fail(ErrorKind::config, "initial state does not hold N particles");
    }

    const double conversion_p = cfg.conversion_moves_enabled ? cfg.conversion_move_probability : 0.0;
    const MoveKernel kernel(joint, beta, stats, conversion_p);
    const std::size_t levels = joint.total_levels();
    const std::size_t species = joint.species_count();

    // Occupied-entry set with O(1) insert/erase.
    std::vector<std::size_t> occupied;
    std::vector<std::size_t> position(levels, levels);
    const auto insert = [&](std::size_t i) {
        position[i] = occupied.size();
        occupied.push_back(i);
    };
    const auto erase = [&](std::size_t i) {
        const std::size_t p = position[i];
        occupied[p] = occupied.back();
        position[occupied[p]] = p;
        occupied.pop_back();
        position[i] = levels;
    };
    for (std::size_t i = 0; i < levels; ++i)
        if (counts[i] > 0) insert(i);

    SampleStatistics out;
    out.total_levels = levels;
    out.total_particles = n;
    out.beta = beta;
    out.statistics = stats;
    out.degenerate = levels < 2;

    const auto expected = static_cast<std::uint64_t>((cfg.steps - cfg.burn_in + cfg.thinning - 1) / cfg.thinning);
    detail::BatchMoments moments(levels + species + 1, expected);
    std::vector<double> values(levels + species + 1);
    std::vector<int> species_counts(species);
    bool histogram_ok = cfg.record_histogram;

    std::mt19937_64 rng(cfg.seed);
    for (std::int64_t step = 0; step < cfg.steps; ++step) {
        if (!out.degenerate) {
            const std::size_t donor = occupied[detail::uniform_below(rng, occupied.size())];
            std::size_t recipient = detail::uniform_below(rng, levels - 1);
            if (recipient >= donor) ++recipient;
            const bool conversion = kernel.is_conversion(donor, recipient);
            auto& counter = conversion ? out.conversion : out.intra;
            ++counter.proposed;
            const double a = kernel.acceptance(counts, occupied.size(), donor, recipient);
            if (a > 0.0 && (a >= 1.0 || detail::uniform_unit(rng) < a)) {
                ++counter.accepted;
                if (--counts[donor] == 0) erase(donor);
                if (counts[recipient]++ == 0) insert(recipient);
            }
        }
        if (step < cfg.burn_in || (step - cfg.burn_in) % cfg.thinning != 0) continue;

        std::fill(species_counts.begin(), species_counts.end(), 0);
        double energy = 0.0;
        for (std::size_t i = 0; i < levels; ++i) {
            values[i] = counts[i];
            species_counts[joint.entries()[i].species] += counts[i];
            energy += counts[i] * joint.entries()[i].value.energy;
        }
        for (std::size_t a = 0; a < species; ++a) values[levels + a] = species_counts[a];
        values[levels + species] = energy;
        moments.add(values);
        if (histogram_ok) {
            ++out.histogram[counts];
            if (out.histogram.size() > cfg.histogram_limit) {
                histogram_ok = false;
                out.histogram.clear();
            }
        }
        if (cfg.record_timeseries) out.timeseries.push_back({step, energy, species_counts});
    }

    out.samples = moments.count();
    out.histogram_complete = histogram_ok;
    for (std::size_t i = 0; i < levels; ++i) {
        out.mean_occupation.push_back(moments.mean(i));
        out.occupation_variance.push_back(moments.variance(i));
        out.occupation_ess.push_back(moments.ess(i));
    }
    for (std::size_t a = 0; a < species; ++a) {
        out.species_mean.push_back(moments.mean(levels + a));
        out.species_variance.push_back(moments.variance(levels + a));
        out.species_ess.push_back(moments.ess(levels + a));
    }
    out.mean_energy = moments.mean(levels + species);
    return out;
}

/// Dense one-step transition matrix of the chain over an explicit list of
/// configurations (rows sum to one; the diagonal absorbs rejections).
inline std::vector<std::vector<double>> transition_matrix(const JointSpectrum& joint, double beta, Statistics stats,
                                                          double conversion_probability,
                                                          const std::vector<std::vector<int>>& configurations) {
    const MoveKernel kernel(joint, beta, stats, conversion_probability);
    const std::size_t levels = joint.total_levels();
    std::map<std::vector<int>, std::size_t> index;
    for (std::size_t k = 0; k < configurations.size(); ++k) index[configurations[k]] = k;

    std::vector<std::vector<double>> p(configurations.size(), std::vector<double>(configurations.size(), 0.0));
    for (std::size_t k = 0; k < configurations.size(); ++k) {
        const auto& x = configurations[k];
        std::size_t occupied = 0;
        for (int c : x) occupied += c > 0 ? 1 : 0;
        double leave = 0.0;
        if (levels >= 2 && occupied > 0) {
            const double q = 1.0 / (static_cast<double>(occupied) * static_cast<double>(levels - 1));
            for (std::size_t d = 0; d < levels; ++d) {
                if (x[d] == 0) continue;
                for (std::size_t r = 0; r < levels; ++r) {
                    if (r == d) continue;
                    const double a = kernel.acceptance(x, occupied, d, r);
                    if (a == 0.0) continue;
                    auto y = x;
                    --y[d];
                    ++y[r];
                    const auto it = index.find(y);
                    if (it == index.end()) fail(ErrorKind::usage, "configuration list is not closed under moves");
                    p[k][it->second] += q * a;
                    leave += q * a;
                }
            }
        }
        p[k][k] += 1.0 - leave;
    }
    return p;
}

struct OracleComparison {
    std::vector<double> level_z;         ///< (sample mean - exact mean) / standard error
    std::vector<double> species_z;
    std::vector<double> species_variance_discrepancy;  ///< sample - exact
    std::vector<bool> species_variance_flagged;
    std::optional<double> total_variation;  ///< when both histograms exist
};

/// Compares sampler output against the exact ensemble of the same system.
/// A species-variance discrepancy is flagged when it exceeds five estimated
/// standard errors of the sampled variance (or 1e-12 when that is zero).
inline OracleComparison compare_to_oracle(
    const SampleStatistics& samples, const ExactStatistics& exact,
    const std::vector<std::pair<std::vector<int>, double>>* exact_distribution = nullptr) {
    if (samples.total_levels != exact.total_levels || samples.total_particles != exact.total_particles ||
        samples.species_mean.size() != exact.species_mean.size() || samples.beta != exact.beta ||
        samples.statistics != exact.statistics)
        fail(ErrorKind::usage, "sampler and oracle statistics describe different systems");

    OracleComparison out;
    const auto z_score = [](double m, double var, double ess, double exact_mean) {
        const double se = std::sqrt(var / std::max(ess, 1.0));
        if (se == 0.0) return m == exact_mean ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), m - exact_mean);
        return (m - exact_mean) / se;
    };
    for (std::size_t i = 0; i < samples.mean_occupation.size(); ++i)
        out.level_z.push_back(z_score(samples.mean_occupation[i], samples.occupation_variance[i],
                                      samples.occupation_ess[i], exact.mean_occupation[i]));
    for (std::size_t a = 0; a < samples.species_mean.size(); ++a) {
        out.species_z.push_back(z_score(samples.species_mean[a], samples.species_variance[a], samples.species_ess[a],
                                        exact.species_mean[a]));
        const double diff = samples.species_variance[a] - exact.species_variance[a];
        const double se = samples.species_variance[a] * std::sqrt(2.0 / std::max(samples.species_ess[a], 1.0));
        out.species_variance_discrepancy.push_back(diff);
        out.species_variance_flagged.push_back(std::abs(diff) > std::max(5.0 * se, 1e-12));
    }
    if (exact_distribution != nullptr && samples.histogram_complete && samples.samples > 0) {
        const double total = static_cast<double>(samples.samples);
        double tv = 0.0;
        double matched_mass = 0.0;
        for (const auto& [config, p] : *exact_distribution) {
            const auto it = samples.histogram.find(config);
            const double q = it == samples.histogram.end() ? 0.0 : static_cast<double>(it->second) / total;
            matched_mass += q;
            tv += std::abs(p - q);
        }
        // sampled mass outside the exact support
        tv += std::max(0.0, 1.0 - matched_mass);
        out.total_variation = 0.5 * tv;
    }
    return out;
}

}  // namespace rqgas
