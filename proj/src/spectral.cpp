#include "carpet/spectral.hpp"

#include "carpet/error.hpp"
#include "carpet/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace carpet {

namespace {

struct LogSums {
    double log_P;
    double log_Q;
};

LogSums log_sums(const CarpetSpec& spec, double r, double t) {
    const double log_scale = -r * std::log(static_cast<double>(spec.m()));
    std::vector<double> a, b;
    a.reserve(spec.size());
    for (const auto& e : spec.entries()) a.push_back(t * (std::log(e.p) + log_scale));
    for (int j : spec.indices().gy) b.push_back(t * (spec.log_q(j) + log_scale));
    return {log_sum_exp(a), log_sum_exp(b)};
}

}  // namespace

double lhs(const CarpetSpec& spec, double r, double s) {
    const double t = s / (s + r);
    const auto [lp, lq] = log_sums(spec, r, t);
    const double theta = spec.theta().value;
    return std::exp(theta * lp + (1.0 - theta) * lq);
}

double solve_sr(const CarpetSpec& spec, double r, double tol) {
    if (!(r > 0.0)) throw CarpetError(ErrorCode::Config, "order r must be positive");
    if (lhs(spec, r, 0.0) <= 1.0) throw CarpetError(ErrorCode::NoBracket, "lhs(0) <= 1");

    double lo = 0.0;
    double hi = 2.0;
    while (lhs(spec, r, hi) >= 1.0) {
        hi *= 2.0;
        if (hi > 1e18) throw CarpetError(ErrorCode::NoBracket, "lhs does not drop below 1");
    }

    for (int step = 0; step < kMaxBisectionSteps; ++step) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double v = lhs(spec, r, mid);
        if (v == 1.0) return mid;
        if (v > 1.0) lo = mid;
        else hi = mid;
    }
    const double rlo = std::abs(lhs(spec, r, lo) - 1.0);
    const double rhi = std::abs(lhs(spec, r, hi) - 1.0);
    const double best = rlo <= rhi ? lo : hi;
    if (std::min(rlo, rhi) > tol)
        throw CarpetError(ErrorCode::NoBracket, "bisection stalled with residual above tolerance");
    return best;
}

SpectralConstants constants(const CarpetSpec& spec, double r) {
    SpectralConstants c;
    c.r = r;
    c.s = solve_sr(spec, r);
    c.t = c.s / (c.s + r);

    const auto [lp, lq] = log_sums(spec, r, c.t);
    c.P = std::exp(lp);
    c.Q = std::exp(lq);

    const double log_scale = -r * std::log(static_cast<double>(spec.m()));
    double min_p = 1.0;
    for (const auto& e : spec.entries()) min_p = std::min(min_p, e.p);
    double min_q = 1.0;
    for (int j : spec.indices().gy) min_q = std::min(min_q, spec.q(j));
    c.log_eta_lo = std::log(min_p) + std::log(min_q) + log_scale;
    c.eta_lo = std::exp(c.log_eta_lo);
    c.log_eta_hi = c.t * (std::log(spec.max_q()) + log_scale);
    c.eta_hi = std::exp(c.log_eta_hi);

    c.H1 = 1;
    while (!(c.H1 * c.log_eta_hi < c.log_eta_lo)) ++c.H1;

    c.xi = 0.0;
    for (int j : spec.indices().gy) {
        double sum = 0.0;
        for (int i : spec.indices().gx_row[j]) sum += std::pow(spec.p(i, j) / spec.q(j), c.t);
        c.xi = std::max(c.xi, sum);
    }

    c.H2 = c.P * c.P * c.P / (c.Q * c.Q) * std::exp(-c.t * c.log_eta_lo);
    const double log_inv_H2 = -std::log(c.H2);
    c.M = 1;
    while (!(c.M * c.log_eta_hi < log_inv_H2)) ++c.M;

    c.H3 = 0.0;
    for (int h = 0; h <= c.M; ++h) c.H3 += std::pow(c.xi, h);
    c.H4 = c.P * c.P / c.Q;
    c.H5 = c.Q * c.Q / (c.H3 * c.P * c.P);
    return c;
}

}  // namespace carpet
