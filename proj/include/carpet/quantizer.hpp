#pragma once

#include "carpet/antichain.hpp"
#include "carpet/carpet_spec.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace carpet {

struct SamplePool {
    std::vector<Point2> points;
    std::uint64_t seed = 0;
    std::size_t burn_in = 0;

    std::size_t size() const { return points.size(); }
};

constexpr std::size_t kDefaultBurnIn = 64;

/// Chaos-game realisation of the self-affine measure: i.i.d. maps drawn with
/// probabilities p_ij, the first `burn_in` iterates discarded.
SamplePool sample(const CarpetSpec& spec, std::size_t n, std::uint64_t seed, std::size_t burn_in = kDefaultBurnIn);

enum class CodebookOrigin { Lloyd, Antichain, Random };

struct Codebook {
    std::vector<Point2> points;
    CodebookOrigin origin = CodebookOrigin::Random;
    int j = -1;  // threshold index for antichain codebooks

    std::size_t k() const { return points.size(); }
};

/// Number of worker threads, from CARPET_QUANT_THREADS (default: hardware).
/// Results never depend on it: reductions run over a fixed chunking.
std::size_t worker_count();

/// Mean of d(x, codebook)^r over the pool.
double distortion(const SamplePool& pool, const Codebook& cb, double r);

struct DistortionStats {
    double mean = 0.0;
    double std_error = 0.0;  // batch-means standard error of the mean
};
constexpr std::size_t kStdErrBatches = 100;

DistortionStats distortion_stats(const SamplePool& pool, const Codebook& cb, double r);

struct LloydOptions {
    std::size_t max_iters = 200;
    double tol = 1e-7;           // stop when relative improvement < tol
    std::size_t gd_steps = 50;   // center update for r != 2
};

struct LloydResult {
    Codebook codebook;
    double distortion = 0.0;
    std::size_t iters = 0;
    std::size_t empty_repairs = 0;
    std::vector<double> history;  // distortion after each assignment step
};

/// D^r-weighted seeding (k-means++ generalised to order r).
Codebook seed_codebook(const SamplePool& pool, std::size_t k, double r, std::uint64_t seed);

LloydResult lloyd(const SamplePool& pool, double r, Codebook init, const LloydOptions& opts = {});
LloydResult lloyd(const SamplePool& pool, std::size_t k, double r, std::uint64_t seed, const LloydOptions& opts = {});

struct BestOfLloyd {
    LloydResult best;
    std::size_t restarts_used = 0;
};

/// `restarts` independently seeded runs; keeps the lowest distortion.
BestOfLloyd best_of_lloyd(const SamplePool& pool, std::size_t k, double r, std::size_t restarts, std::uint64_t seed,
                          const LloydOptions& opts = {});

/// One point per approximate square: the centers of F_sigma, sigma in the antichain.
Codebook antichain_codebook(const CarpetSpec& spec, const Antichain& antichain);

/// Sum over the antichain of mu_sigma m^{-|sigma| r}.
double theoretical_proxy(const CarpetSpec& spec, double r, const Antichain& antichain);

struct ScalingFit {
    double slope = 0.0;          // least-squares slope of log e_k against log k
    double slope_rel_err = 0.0;  // |slope + 1/s| * s
    double band_ratio = 0.0;     // max/min of k^{r/s} e_k^r
};

/// `errors` are e_{k,r} (not raised to r).
ScalingFit scaling_fit(std::span<const std::size_t> ks, std::span<const double> errors, double r, double s);

}  // namespace carpet
