#pragma once

#include "carpet/carpet_spec.hpp"

namespace carpet {

/// Derived constants for one order r. `t` is the moment exponent s/(s+r);
/// every "energy" in the library is a weight raised to t.
struct SpectralConstants {
    double r = 0.0;
    double s = 0.0;  // quantization dimension s_r
    double t = 0.0;  // s / (s + r)
    double P = 0.0;  // sum over G of (p_ij m^-r)^t
    double Q = 0.0;  // sum over G_y of (q_j m^-r)^t
    double eta_lo = 0.0;  // min p_ij q_k m^-r, smallest one-step weight factor
    double eta_hi = 0.0;  // (max_j q_j m^-r)^t, largest one-step energy factor
    double log_eta_lo = 0.0;
    double log_eta_hi = 0.0;
    int H1 = 0;  // min{h : eta_hi^h < eta_lo}
    double xi = 0.0;
    double H2 = 0.0;
    int M = 0;  // min{h >= 1 : eta_hi^h < 1/H2}
    double H3 = 0.0;
    double H4 = 0.0;
    double H5 = 0.0;
};

constexpr double kDefaultResidualTol = 1e-12;
constexpr int kMaxBisectionSteps = 200;

/// Left-hand side of the dimension equation evaluated at trial dimension s.
/// Strictly decreasing in s; computed in log space.
double lhs(const CarpetSpec& spec, double r, double s);

/// Unique root of lhs(s) = 1 by bracketing and bisection. Throws NoBracket if
/// lhs(0) <= 1, which cannot happen for a validated spec.
double solve_sr(const CarpetSpec& spec, double r, double tol = kDefaultResidualTol);

SpectralConstants constants(const CarpetSpec& spec, double r);

}  // namespace carpet
