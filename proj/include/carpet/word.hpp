#pragma once

#include "carpet/carpet_spec.hpp"
#include "carpet/spectral.hpp"

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace carpet {

/// Location code sigma_a * sigma_b of an approximate square. `a` holds the
/// first ell(k) digits as full (i, j) cells, `b` the remaining row digits.
/// The empty word is the root of the refinement tree (order 0).
struct Word {
    std::vector<Cell> a;
    std::vector<int> b;

    std::size_t order() const { return a.size() + b.size(); }
    bool is_root() const { return a.empty() && b.empty(); }

    friend bool operator==(const Word&, const Word&) = default;
    friend auto operator<=>(const Word&, const Word&) = default;
};

struct WordHash {
    std::size_t operator()(const Word& w) const noexcept;
};

/// Exact integer description of F_sigma:
/// [px/nx, (px+1)/nx] x [py/my, (py+1)/my] with nx = n^ell(k), my = m^k.
struct ApproxSquare {
    std::uint64_t px = 0;
    std::uint64_t nx = 1;
    std::uint64_t py = 0;
    std::uint64_t my = 1;

    double x_lo() const { return static_cast<double>(px) / static_cast<double>(nx); }
    double x_hi() const { return static_cast<double>(px + 1) / static_cast<double>(nx); }
    double y_lo() const { return static_cast<double>(py) / static_cast<double>(my); }
    double y_hi() const { return static_cast<double>(py + 1) / static_cast<double>(my); }
    double diameter() const;
    Point2 center() const { return {0.5 * (x_lo() + x_hi()), 0.5 * (y_lo() + y_hi())}; }

    friend bool operator==(const ApproxSquare&, const ApproxSquare&) = default;
};

/// outer ⊇ inner, decided in exact integer arithmetic.
bool contains(const ApproxSquare& outer, const ApproxSquare& inner);
/// True iff the interiors intersect.
bool interiors_overlap(const ApproxSquare& a, const ApproxSquare& b);

enum class Relation { Equal, Ancestor, Descendant, Incomparable };

/// True iff w is a word of Omega_k (or the root) over the spec's alphabet.
bool is_location_code(const CarpetSpec& spec, const Word& w);

std::vector<Word> children(const CarpetSpec& spec, const Word& w);

/// The order-(k-1) word whose square contains F_w. Throws EmptyWord at the root.
Word flatten(const CarpetSpec& spec, const Word& w);

double log_measure(const CarpetSpec& spec, const Word& w);
double measure(const CarpetSpec& spec, const Word& w);
/// log(mu_w m^{-k r})
double log_weight(const CarpetSpec& spec, double r, const Word& w);
double weight(const CarpetSpec& spec, double r, const Word& w);
/// t * log_weight, i.e. log of (mu_w m^{-k r})^t.
double log_energy(const CarpetSpec& spec, const SpectralConstants& c, const Word& w);
double energy(const CarpetSpec& spec, const SpectralConstants& c, const Word& w);

/// Throws EmptyWord for the root, Overflow if n^ell(k) or m^k exceed 2^63.
ApproxSquare rect(const CarpetSpec& spec, const Word& w);

/// Ancestor means F_w2 ⊆ F_w1 with w1 != w2.
Relation compare(const CarpetSpec& spec, const Word& w1, const Word& w2);

/// Canonical text form "a:(i,j)(i,j)|b:j j".
std::string encode(const Word& w);
Word decode(const std::string& text);

}  // namespace carpet
