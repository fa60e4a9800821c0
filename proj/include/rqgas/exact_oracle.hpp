#pragma once

// Brute-force canonical ensemble over the joint spectrum. Every distinct
// occupation vector of N indistinguishable particles is visited once; a
// degenerate level with n particles contributes its placement count
// m(n) = C(g+n-1, n) (bosons), C(g, n) (fermions) or g^n / n! (Boltzmann).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <sstream>
#include <utility>
#include <vector>

#include "rqgas/detail/numeric.hpp"
#include "rqgas/error.hpp"
#include "rqgas/quantum_equilibrium.hpp"
#include "rqgas/spectrum.hpp"

namespace rqgas {

inline constexpr std::uint64_t kDefaultEnumerationCap = 10'000'000;

struct OccupancyConfiguration {
    std::vector<int> counts;  ///< per joint entry
    double energy = 0.0;
    double log_weight = 0.0;
};

namespace detail {

/// Maximum particles an entry can hold in an N-particle configuration.
inline std::vector<int> entry_caps(const JointSpectrum& joint, int n, Statistics stats) {
    std::vector<int> caps;
    caps.reserve(joint.total_levels());
    for (const auto& e : joint.entries()) {
        if (stats == Statistics::fermi)
            caps.push_back(static_cast<int>(std::min<std::int64_t>(e.value.degeneracy, n)));
        else
            caps.push_back(n);
    }
    return caps;
}

/// ln m(n) for one level group.
inline double log_placements(double g, int n, Statistics stats) {
    if (n == 0) return 0.0;
    switch (stats) {
        case Statistics::bose:
            return g == 1.0 ? 0.0 : log_binomial(g + n - 1.0, n);
        case Statistics::fermi:
            if (n > g) fail(ErrorKind::domain, "fermionic occupation exceeds degeneracy");
            return g == 1.0 ? 0.0 : log_binomial(g, n);
        case Statistics::boltzmann:
            return n * std::log(g) - log_gamma(n + 1.0);
    }
    return 0.0;
}

}  // namespace detail

/// Exact number of configurations (saturating at 2^64 - 1).
inline std::uint64_t count_configurations(const JointSpectrum& joint, int n, Statistics stats) {
    if (n < 0) fail(ErrorKind::config, "particle number must be >= 0");
    const auto caps = detail::entry_caps(joint, n, stats);
    std::vector<std::uint64_t> ways(static_cast<std::size_t>(n) + 1, 0);
    ways[0] = 1;
    for (int cap : caps) {
        std::vector<std::uint64_t> next(ways.size(), 0);
        for (int total = 0; total <= n; ++total) {
            if (ways[static_cast<std::size_t>(total)] == 0) continue;
            for (int k = 0; k <= cap && total + k <= n; ++k)
                next[static_cast<std::size_t>(total + k)] =
                    detail::saturating_add(next[static_cast<std::size_t>(total + k)], ways[static_cast<std::size_t>(total)]);
        }
        ways = std::move(next);
    }
    return ways[static_cast<std::size_t>(n)];
}

/// Streams occupation vectors in descending lexicographic order: the first
/// configuration packs entry 0 as full as possible.
class ConfigurationEnumerator {
public:
    ConfigurationEnumerator(const JointSpectrum& joint, int n, Statistics stats)
        : caps_(detail::entry_caps(joint, n, stats)), counts_(caps_.size(), 0) {
        if (n < 0) fail(ErrorKind::config, "particle number must be >= 0");
        suffix_cap_.assign(caps_.size() + 1, 0);
        for (std::size_t i = caps_.size(); i-- > 0;)
            suffix_cap_[i] = suffix_cap_[i + 1] + static_cast<std::int64_t>(caps_[i]);
        valid_ = suffix_cap_[0] >= n;
        if (valid_) fill_from(0, n);
    }

    bool valid() const noexcept { return valid_; }
    const std::vector<int>& counts() const noexcept { return counts_; }

    /// Advances to the next configuration; false when exhausted.
    bool next() {
        if (!valid_) return false;
        // Rightmost position (not the last) that can give one particle to the
        // positions after it.
        std::int64_t tail = counts_.empty() ? 0 : counts_.back();
        for (std::size_t i = counts_.size() - 1; i-- > 0;) {
            if (counts_[i] > 0 && suffix_cap_[i + 1] >= tail + 1) {
                --counts_[i];
                fill_from(i + 1, static_cast<int>(tail + 1));
                return true;
            }
            tail += counts_[i];
        }
        valid_ = false;
        return false;
    }

private:
    void fill_from(std::size_t start, int remaining) {
        for (std::size_t j = start; j < counts_.size(); ++j) {
            counts_[j] = std::min(caps_[j], remaining);
            remaining -= counts_[j];
        }
    }

    std::vector<int> caps_;
    std::vector<int> counts_;
    std::vector<std::int64_t> suffix_cap_;
    bool valid_ = false;
};

/// -beta E_X + sum_s ln m_s(n_s).
inline double configuration_log_weight(const JointSpectrum& joint, std::span<const int> counts, double beta,
                                       Statistics stats) {
    if (counts.size() != joint.total_levels())
        fail(ErrorKind::usage, "configuration length does not match the joint spectrum");
    double lw = 0.0;
    for (std::size_t s = 0; s < counts.size(); ++s) {
        if (counts[s] < 0) fail(ErrorKind::domain, "negative occupation in configuration");
        const auto& level = joint.entries()[s].value;
        lw += -beta * level.energy * counts[s] +
              detail::log_placements(static_cast<double>(level.degeneracy), counts[s], stats);
    }
    return lw;
}

inline double configuration_energy(const JointSpectrum& joint, std::span<const int> counts) {
    double e = 0.0;
    for (std::size_t s = 0; s < counts.size(); ++s) e += joint.entries()[s].value.energy * counts[s];
    return e;
}

/// Visits every configuration (after the cap check) in enumeration order.
inline void enumerate_configurations(const JointSpectrum& joint, int n, double beta, Statistics stats,
                                     const std::function<void(const OccupancyConfiguration&)>& visit,
                                     std::uint64_t cap = kDefaultEnumerationCap) {
    const auto estimate = count_configurations(joint, n, stats);
    if (estimate > cap) {
        std::ostringstream msg;
        msg << "enumeration needs " << estimate << " configurations, cap is " << cap;
        fail(ErrorKind::enumeration_cap, msg.str());
    }
    ConfigurationEnumerator it(joint, n, stats);
    if (!it.valid()) return;
    OccupancyConfiguration config;
    do {
        config.counts = it.counts();
        config.energy = configuration_energy(joint, config.counts);
        config.log_weight = configuration_log_weight(joint, config.counts, beta, stats);
        visit(config);
    } while (it.next());
}

struct ExactStatistics {
    double log_z = 0.0;
    std::uint64_t configuration_count = 0;
    std::vector<double> mean_occupation;
    std::vector<double> mean_square_occupation;
    std::vector<double> occupation_variance;
    std::vector<double> species_mean;
    std::vector<double> species_mean_square;
    std::vector<double> species_variance;
    double mean_energy = 0.0;
    // Descriptor of the system the statistics belong to.
    std::size_t total_levels = 0;
    int total_particles = 0;
    double beta = 0.0;
    Statistics statistics = Statistics::bose;
};

/// Weighted sufficient sums sum w, sum w n, sum w n^2, each stored relative
/// to a running log-shift. merge() is associative, so disjoint ranges of the
/// enumeration may be accumulated separately and combined.
class ExactAccumulator {
public:
    ExactAccumulator(const JointSpectrum& joint, int n, double beta, Statistics stats)
        : joint_(&joint), n_(n), beta_(beta), stats_(stats),
          sum_n_(joint.total_levels(), 0.0), sum_n2_(joint.total_levels(), 0.0),
          sum_na_(joint.species_count(), 0.0), sum_na2_(joint.species_count(), 0.0) {}

    void add(const OccupancyConfiguration& config) {
        if (config.log_weight > shift_) rescale_to(config.log_weight);
        const double w = std::exp(config.log_weight - shift_);
        scratch_.assign(sum_na_.size(), 0.0);
        for (std::size_t s = 0; s < config.counts.size(); ++s) {
            const double c = config.counts[s];
            sum_n_[s] += w * c;
            sum_n2_[s] += w * c * c;
            scratch_[joint_->entries()[s].species] += c;
        }
        for (std::size_t a = 0; a < sum_na_.size(); ++a) {
            sum_na_[a] += w * scratch_[a];
            sum_na2_[a] += w * scratch_[a] * scratch_[a];
        }
        sum_w_ += w;
        sum_e_ += w * config.energy;
        ++count_;
    }

    void merge(ExactAccumulator other) {
        if (other.joint_->total_levels() != joint_->total_levels() || other.n_ != n_)
            fail(ErrorKind::usage, "cannot merge accumulators of different systems");
        if (other.count_ == 0) return;
        const double shift = std::max(shift_, other.shift_);
        rescale_to(shift);
        other.rescale_to(shift);
        const auto add_into = [](std::vector<double>& a, const std::vector<double>& b) {
            for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
        };
        add_into(sum_n_, other.sum_n_);
        add_into(sum_n2_, other.sum_n2_);
        add_into(sum_na_, other.sum_na_);
        add_into(sum_na2_, other.sum_na2_);
        sum_w_ += other.sum_w_;
        sum_e_ += other.sum_e_;
        count_ += other.count_;
    }

    ExactStatistics finish() const {
        if (count_ == 0)
            fail(ErrorKind::saturation, "no configuration can hold the requested particle number");
        ExactStatistics out;
        out.log_z = shift_ + std::log(sum_w_);
        out.configuration_count = count_;
        out.total_levels = joint_->total_levels();
        out.total_particles = n_;
        out.beta = beta_;
        out.statistics = stats_;
        const double z = sum_w_;
        const auto moments = [z](const std::vector<double>& s1, const std::vector<double>& s2,
                                 std::vector<double>& m, std::vector<double>& m2, std::vector<double>& var) {
            for (std::size_t i = 0; i < s1.size(); ++i) {
                m.push_back(s1[i] / z);
                m2.push_back(s2[i] / z);
                var.push_back(std::max(0.0, m2.back() - m.back() * m.back()));
            }
        };
        moments(sum_n_, sum_n2_, out.mean_occupation, out.mean_square_occupation, out.occupation_variance);
        moments(sum_na_, sum_na2_, out.species_mean, out.species_mean_square, out.species_variance);
        out.mean_energy = sum_e_ / z;
        return out;
    }

private:
    void rescale_to(double shift) {
        const double factor = count_ ? std::exp(shift_ - shift) : 0.0;
        shift_ = shift;
        if (factor == 1.0) return;
        for (auto* v : {&sum_n_, &sum_n2_, &sum_na_, &sum_na2_})
            for (auto& x : *v) x *= factor;
        sum_w_ *= factor;
        sum_e_ *= factor;
    }

    const JointSpectrum* joint_;
    int n_;
    double beta_;
    Statistics stats_;
    double shift_ = detail::kNegInf;
    double sum_w_ = 0.0;
    double sum_e_ = 0.0;
    std::vector<double> sum_n_, sum_n2_, sum_na_, sum_na2_, scratch_;
    std::uint64_t count_ = 0;
};

inline ExactStatistics exact_statistics(const JointSpectrum& joint, int n, double beta, Statistics stats,
                                        std::uint64_t cap = kDefaultEnumerationCap) {
    detail::check_beta(beta);
    ExactAccumulator acc(joint, n, beta, stats);
    enumerate_configurations(joint, n, beta, stats, [&](const OccupancyConfiguration& c) { acc.add(c); }, cap);
    return acc.finish();
}

/// Normalised probability of every configuration, in enumeration order.
inline std::vector<std::pair<std::vector<int>, double>> exact_distribution(
    const JointSpectrum& joint, int n, double beta, Statistics stats, std::uint64_t cap = kDefaultEnumerationCap) {
    std::vector<std::pair<std::vector<int>, double>> out;
    std::vector<double> logs;
    enumerate_configurations(
        joint, n, beta, stats,
        [&](const OccupancyConfiguration& c) {
            out.emplace_back(c.counts, 0.0);
            logs.push_back(c.log_weight);
        },
        cap);
    const double log_z = detail::log_sum_exp(logs);
    for (std::size_t i = 0; i < out.size(); ++i) out[i].second = std::exp(logs[i] - log_z);
    return out;
}

}  // namespace rqgas
