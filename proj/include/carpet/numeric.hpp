#pragma once

#include <cmath>
#include <limits>
#include <span>

namespace carpet {

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// log(sum(exp(v))) without overflow; -inf for an empty span.
inline double log_sum_exp(std::span<const double> v) {
    double hi = -std::numeric_limits<double>::infinity();
    for (double x : v) hi = std::max(hi, x);
    if (!std::isfinite(hi)) return hi;
    CompensatedSum s;
    for (double x : v) s.add(std::exp(x - hi));
    return hi + std::log(s.value());
}

}  // namespace carpet
