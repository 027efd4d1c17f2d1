#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>

namespace biharp {

// Relative tolerances used by the verification routines.  Quantities built
// from O(1e4) floating operations get the long tolerance; short algebraic
// identities (a handful of operations) get the tight one.
inline constexpr double kRelTolAccumulated = 1e-9;
inline constexpr double kRelTolIdentity = 1e-12;

/// 2^e as a double, exact for |e| <= 1022.
inline double pow2d(int e) { return std::ldexp(1.0, e); }

/// Neumaier-compensated accumulator for sums that feed 1e-9 assertions.
class KahanSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    [[nodiscard]] double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// lhs <= rhs up to relative slack `rel` (scale taken from the larger side).
inline bool leq_with_slack(double lhs, double rhs, double rel = kRelTolAccumulated) {
    const double scale = std::max(std::abs(lhs), std::abs(rhs));
    return lhs <= rhs + rel * scale + std::numeric_limits<double>::min();
}

/// |a - b| within relative tolerance (absolute near zero).
inline bool close_rel(double a, double b, double rel = kRelTolAccumulated) {
    const double scale = std::max({std::abs(a), std::abs(b), 1.0});
    return std::abs(a - b) <= rel * scale;
}

}  // namespace biharp
