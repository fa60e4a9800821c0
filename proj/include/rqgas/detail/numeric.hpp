#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>

namespace rqgas::detail {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// ln Gamma(x) for x > 0. glibc's lgamma_r avoids the global signgam write.
inline double log_gamma(double x) {
#if defined(__GLIBC__)
    int sign = 0;
    return ::lgamma_r(x, &sign);
#else
    return std::lgamma(x);
#endif
}

/// ln C(n, k) with the factorials generalised through the gamma function.
inline double log_binomial(double n, double k) {
    return log_gamma(n + 1.0) - log_gamma(k + 1.0) - log_gamma(n - k + 1.0);
}

/// log(sum(exp(args))), -inf for an empty range.
inline double log_sum_exp(std::span<const double> args) {
    if (args.empty()) return kNegInf;
    const double top = *std::max_element(args.begin(), args.end());
    if (!std::isfinite(top)) return top;
    double sum = 0.0;
    for (double a : args) sum += std::exp(a - top);
    return top + std::log(sum);
}

/// Streaming log-sum-exp with a running maximum. Callers that keep auxiliary
/// sums scaled by exp(-shift) must rescale them by the factor returned from
/// add() whenever the shift moves.
class LogSumExp {
public:
    /// Returns the factor by which previously accumulated scaled sums must be
    /// multiplied (1 when the shift did not change).
    double add(double log_term) {
        if (log_term == kNegInf) return 1.0;
        if (log_term <= shift_) {
            sum_ += std::exp(log_term - shift_);
            return 1.0;
        }
        const double rescale = (shift_ == kNegInf) ? 0.0 : std::exp(shift_ - log_term);
        sum_ = sum_ * rescale + 1.0;
        shift_ = log_term;
        return rescale;
    }

    double shift() const noexcept { return shift_; }
    double scaled_sum() const noexcept { return sum_; }
    double value() const { return sum_ > 0.0 ? shift_ + std::log(sum_) : kNegInf; }

private:
    double shift_ = kNegInf;
    double sum_ = 0.0;
};

inline std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) {
    const std::uint64_t r = a + b;
    return r < a ? std::numeric_limits<std::uint64_t>::max() : r;
}

}  // namespace rqgas::detail
