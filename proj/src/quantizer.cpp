#include "carpet/quantizer.hpp"

#include "carpet/error.hpp"
#include "carpet/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <random>
#include <string>
#include <thread>

namespace carpet {

namespace {

constexpr std::size_t kChunk = 8192;

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double dist_r(Point2 a, Point2 b, double r) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    const double d2 = dx * dx + dy * dy;
    if (r == 2.0) return d2;
    return std::pow(d2, 0.5 * r);
}

// Runs body(chunk_index, begin, end) over fixed-size chunks of [0, n). Each
// chunk owns its output slot, so the schedule never affects results.
template <class Body>
void for_chunks(std::size_t n, Body&& body) {
    const std::size_t chunks = (n + kChunk - 1) / kChunk;
    const std::size_t workers = std::min(worker_count(), chunks);
    auto run = [&](std::size_t w) {
        for (std::size_t c = w; c < chunks; c += workers) body(c, c * kChunk, std::min(n, (c + 1) * kChunk));
    };
    if (workers <= 1) {
        run(0);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& t : pool) t.join();
}

struct Assignment {
    std::vector<std::uint32_t> label;
    std::vector<double> cost;  // d(x, center)^r
    double total = 0.0;        // mean cost
};

Assignment assign(const SamplePool& pool, const Codebook& cb, double r) {
    const std::size_t n = pool.size();
    Assignment a;
    a.label.resize(n);
    a.cost.resize(n);
    std::vector<double> partial((n + kChunk - 1) / kChunk, 0.0);
    for_chunks(n, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
        CompensatedSum sum;
        for (std::size_t idx = begin; idx < end; ++idx) {
            const Point2 x = pool.points[idx];
            double best = std::numeric_limits<double>::infinity();
            std::uint32_t arg = 0;
            for (std::size_t c = 0; c < cb.points.size(); ++c) {
                const double dx = x.x - cb.points[c].x;
                const double dy = x.y - cb.points[c].y;
                const double d2 = dx * dx + dy * dy;
                if (d2 < best) {
                    best = d2;
                    arg = static_cast<std::uint32_t>(c);
                }
            }
            a.label[idx] = arg;
            a.cost[idx] = r == 2.0 ? best : std::pow(best, 0.5 * r);
            sum.add(a.cost[idx]);
        }
        partial[chunk] = sum.value();
    });
    CompensatedSum total;
    for (double v : partial) total.add(v);
    a.total = n ? total.value() / static_cast<double>(n) : 0.0;
    return a;
}

double cell_cost(const SamplePool& pool, std::span<const std::size_t> cell, Point2 a, double r) {
    CompensatedSum s;
    for (std::size_t idx : cell) s.add(dist_r(pool.points[idx], a, r));
    return s.value();
}

// Damped gradient descent on sum |x - a|^r from the cell mean.
Point2 r_center(const SamplePool& pool, std::span<const std::size_t> cell, Point2 mean, double r, std::size_t steps) {
    Point2 a = mean;
    double f = cell_cost(pool, cell, a, r);
    constexpr double kFloor = 1e-12;
    double lipschitz = 0.0;
    for (std::size_t idx : cell) {
        const double d = std::max(std::hypot(pool.points[idx].x - a.x, pool.points[idx].y - a.y), kFloor);
        lipschitz += std::pow(d, r - 2.0);
    }
    lipschitz *= r * std::max(1.0, r - 1.0);
    double step = lipschitz > 0.0 ? 0.5 / lipschitz : 0.0;
    for (std::size_t it = 0; it < steps && step > 0.0; ++it) {
        double gx = 0.0, gy = 0.0;
        for (std::size_t idx : cell) {
            const double dx = a.x - pool.points[idx].x;
            const double dy = a.y - pool.points[idx].y;
            const double d = std::hypot(dx, dy);
            if (d < kFloor) continue;
            const double w = r * std::pow(d, r - 2.0);
            gx += w * dx;
            gy += w * dy;
        }
        bool moved = false;
        for (int halvings = 0; halvings < 30; ++halvings) {
            const Point2 cand{a.x - step * gx, a.y - step * gy};
            const double fc = cell_cost(pool, cell, cand, r);
            if (fc < f) {
                a = cand;
                f = fc;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) break;
    }
    return a;
}

}  // namespace

std::size_t worker_count() {
    if (const char* env = std::getenv("CARPET_QUANT_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<std::size_t>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

SamplePool sample(const CarpetSpec& spec, std::size_t n, std::uint64_t seed, std::size_t burn_in) {
    if (n < 1) throw CarpetError(ErrorCode::Config, "sample count must be >= 1");
    if (burn_in < 32) throw CarpetError(ErrorCode::Config, "burn-in must be >= 32");
    const auto entries = spec.entries();
    std::vector<double> cumulative;
    cumulative.reserve(entries.size());
    double acc = 0.0;
    for (const auto& e : entries) cumulative.push_back(acc += e.p);

    SamplePool pool;
    pool.seed = seed;
    pool.burn_in = burn_in;
    pool.points.reserve(n);
    std::mt19937_64 rng(seed);
    Point2 x{0.5, 0.5};
    for (std::size_t it = 0; it < burn_in + n; ++it) {
        const double u = uniform01(rng) * acc;
        const auto pos = std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin();
        const auto& e = entries[std::min<std::size_t>(static_cast<std::size_t>(pos), entries.size() - 1)];
        x = apply_map(spec, {e.i, e.j}, x);
        if (it >= burn_in) pool.points.push_back(x);
    }
    return pool;
}

double distortion(const SamplePool& pool, const Codebook& cb, double r) {
    if (cb.points.empty()) throw CarpetError(ErrorCode::BadK, "empty codebook");
    return assign(pool, cb, r).total;
}

DistortionStats distortion_stats(const SamplePool& pool, const Codebook& cb, double r) {
    if (cb.points.empty()) throw CarpetError(ErrorCode::BadK, "empty codebook");
    const Assignment a = assign(pool, cb, r);
    DistortionStats s;
    s.mean = a.total;
    const std::size_t n = pool.size();
    // The pool is a single chain, so neighbouring costs are correlated.
    // Batch means over contiguous blocks absorb that; tiny pools fall back to
    // the i.i.d. formula.
    const std::size_t batches = n >= 20 * kStdErrBatches ? kStdErrBatches : n;
    if (batches > 1) {
        std::vector<double> means(batches);
        for (std::size_t b = 0; b < batches; ++b) {
            const std::size_t lo = n * b / batches, hi = n * (b + 1) / batches;
            CompensatedSum sum;
            for (std::size_t x = lo; x < hi; ++x) sum.add(a.cost[x]);
            means[b] = sum.value() / static_cast<double>(hi - lo);
        }
        CompensatedSum sq;
        for (double m : means) sq.add((m - s.mean) * (m - s.mean));
        s.std_error = std::sqrt(sq.value() / static_cast<double>(batches - 1) / static_cast<double>(batches));
    }
    return s;
}

Codebook seed_codebook(const SamplePool& pool, std::size_t k, double r, std::uint64_t seed) {
    if (k < 1 || k > pool.size()) throw CarpetError(ErrorCode::BadK, "k must lie in [1, pool size]");
    std::mt19937_64 rng(seed);
    Codebook cb;
    cb.origin = CodebookOrigin::Lloyd;
    const std::size_t n = pool.size();
    cb.points.push_back(pool.points[std::min<std::size_t>(n - 1, static_cast<std::size_t>(uniform01(rng) * n))]);
    std::vector<double> best(n);
    for (std::size_t idx = 0; idx < n; ++idx) best[idx] = dist_r(pool.points[idx], cb.points[0], r);
    while (cb.points.size() < k) {
        CompensatedSum total;
        for (double b : best) total.add(b);
        std::size_t pick = 0;
        if (total.value() > 0.0) {
            const double target = uniform01(rng) * total.value();
            double acc = 0.0;
            pick = n - 1;
            for (std::size_t idx = 0; idx < n; ++idx) {
                acc += best[idx];
                if (acc > target) {
                    pick = idx;
                    break;
                }
            }
        } else {
            pick = std::min<std::size_t>(n - 1, static_cast<std::size_t>(uniform01(rng) * n));
        }
        cb.points.push_back(pool.points[pick]);
        for (std::size_t idx = 0; idx < n; ++idx)
            best[idx] = std::min(best[idx], dist_r(pool.points[idx], cb.points.back(), r));
    }
    return cb;
}

LloydResult lloyd(const SamplePool& pool, double r, Codebook init, const LloydOptions& opts) {
    if (init.points.empty()) throw CarpetError(ErrorCode::BadK, "k must be >= 1");
    if (!(r > 0.0)) throw CarpetError(ErrorCode::Config, "order r must be positive");
    const std::size_t k = init.points.size();
    const std::size_t n = pool.size();

    LloydResult res;
    res.codebook = std::move(init);
    res.codebook.origin = CodebookOrigin::Lloyd;

    Assignment a = assign(pool, res.codebook, r);
    res.history.push_back(a.total);
    std::vector<std::size_t> start(k + 1), members(n);
    while (res.iters < opts.max_iters) {
        ++res.iters;
        // Group pool indices by label (counting sort, stable).
        std::fill(start.begin(), start.end(), 0);
        for (std::uint32_t l : a.label) ++start[l + 1];
        for (std::size_t c = 0; c < k; ++c) start[c + 1] += start[c];
        {
            std::vector<std::size_t> fill(start.begin(), start.end() - 1);
            for (std::size_t idx = 0; idx < n; ++idx) members[fill[a.label[idx]]++] = idx;
        }

        std::vector<char> taken(n, 0);
        for (std::size_t c = 0; c < k; ++c) {
            const std::span<const std::size_t> cell(members.data() + start[c], start[c + 1] - start[c]);
            if (cell.empty()) {
                // Repair: move the center onto the farthest not-yet-used sample.
                std::size_t far = 0;
                double far_cost = -1.0;
                for (std::size_t idx = 0; idx < n; ++idx)
                    if (!taken[idx] && a.cost[idx] > far_cost) {
                        far_cost = a.cost[idx];
                        far = idx;
                    }
                taken[far] = 1;
                a.cost[far] = 0.0;
                res.codebook.points[c] = pool.points[far];
                ++res.empty_repairs;
                continue;
            }
            CompensatedSum sx, sy;
            for (std::size_t idx : cell) {
                sx.add(pool.points[idx].x);
                sy.add(pool.points[idx].y);
            }
            const Point2 mean{sx.value() / static_cast<double>(cell.size()), sy.value() / static_cast<double>(cell.size())};
            if (r == 2.0) {
                res.codebook.points[c] = mean;
            } else {
                const Point2 moved = r_center(pool, cell, mean, r, opts.gd_steps);
                if (cell_cost(pool, cell, moved, r) < cell_cost(pool, cell, res.codebook.points[c], r))
                    res.codebook.points[c] = moved;
            }
        }

        const double previous = a.total;
        a = assign(pool, res.codebook, r);
        res.history.push_back(a.total);
        if (previous <= 0.0 || (previous - a.total) < opts.tol * previous) break;
    }
    res.distortion = a.total;
    return res;
}

LloydResult lloyd(const SamplePool& pool, std::size_t k, double r, std::uint64_t seed, const LloydOptions& opts) {
    return lloyd(pool, r, seed_codebook(pool, k, r, seed), opts);
}

BestOfLloyd best_of_lloyd(const SamplePool& pool, std::size_t k, double r, std::size_t restarts, std::uint64_t seed,
                          const LloydOptions& opts) {
    if (restarts < 1) throw CarpetError(ErrorCode::Config, "restarts must be >= 1");
    BestOfLloyd out;
    std::seed_seq base{seed, static_cast<std::uint64_t>(k)};
    std::vector<std::uint32_t> seeds(2 * restarts);
    base.generate(seeds.begin(), seeds.end());
    for (std::size_t run = 0; run < restarts; ++run) {
        const std::uint64_t s = (static_cast<std::uint64_t>(seeds[2 * run]) << 32) | seeds[2 * run + 1];
        LloydResult res = lloyd(pool, k, r, s, opts);
        ++out.restarts_used;
        if (run == 0 || res.distortion < out.best.distortion) out.best = std::move(res);
    }
    return out;
}

Codebook antichain_codebook(const CarpetSpec& spec, const Antichain& antichain) {
    Codebook cb;
    cb.origin = CodebookOrigin::Antichain;
    cb.j = antichain.j;
    cb.points.reserve(antichain.words.size());
    for (const auto& w : antichain.words) cb.points.push_back(rect(spec, w).center());
    return cb;
}

double theoretical_proxy(const CarpetSpec& spec, double r, const Antichain& antichain) {
    CompensatedSum s;
    for (const auto& w : antichain.words) s.add(weight(spec, r, w));
    return s.value();
}

ScalingFit scaling_fit(std::span<const std::size_t> ks, std::span<const double> errors, double r, double s) {
    if (ks.size() != errors.size() || ks.size() < 2)
        throw CarpetError(ErrorCode::Config, "scaling fit needs at least two (k, e_k) pairs");
    const double n = static_cast<double>(ks.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t h = 0; h < ks.size(); ++h) {
        mx += std::log(static_cast<double>(ks[h]));
        my += std::log(errors[h]);
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t h = 0; h < ks.size(); ++h) {
        const double x = std::log(static_cast<double>(ks[h])) - mx;
        const double y = std::log(errors[h]) - my;
        sxy += x * y;
        sxx += x * x;
        const double scaled = std::pow(static_cast<double>(ks[h]), r / s) * std::pow(errors[h], r);
        lo = std::min(lo, scaled);
        hi = std::max(hi, scaled);
    }
    ScalingFit fit;
    fit.slope = sxy / sxx;
    fit.slope_rel_err = std::abs(fit.slope + 1.0 / s) * s;
    fit.band_ratio = hi / lo;
    return fit;
}

}  // namespace carpet
