#pragma once

#include "carpet/carpet_spec.hpp"
#include "carpet/spectral.hpp"
#include "carpet/word.hpp"

#include <span>
#include <vector>

namespace carpet {

/// Cylinder [sigma] x [omega] in G^N x G_y^N; either component may be empty.
struct CylinderPair {
    std::vector<Cell> sigma;
    std::vector<int> omega;

    std::size_t length() const { return sigma.size() + omega.size(); }
    bool empty() const { return sigma.empty() && omega.empty(); }

    friend bool operator==(const CylinderPair&, const CylinderPair&) = default;
    friend auto operator<=>(const CylinderPair&, const CylinderPair&) = default;
};

struct CylinderPairHash {
    std::size_t operator()(const CylinderPair& c) const noexcept;
};

/// Renormalised energy vectors p~_ij = (p_ij m^-r)^t / P and q~_j = (q_j m^-r)^t / Q
/// defining the Bernoulli product measure W. Also carries the alphabets.
class ProductWeights {
public:
    ProductWeights(const CarpetSpec& spec, const SpectralConstants& c);

    double log_p(Cell cell) const { return log_p_[static_cast<std::size_t>(cell.j) * n_ + cell.i]; }
    double log_q(int j) const { return log_q_[j]; }
    double p_tilde(Cell cell) const;
    double q_tilde(int j) const;

    std::span<const Cell> cells() const { return cells_; }
    std::span<const int> rows() const { return rows_; }
    const Theta& theta() const { return theta_; }
    std::size_t ell(std::size_t k) const { return carpet::ell(k, theta_); }

private:
    int n_ = 0;
    Theta theta_;
    std::vector<Cell> cells_;
    std::vector<int> rows_;
    std::vector<double> log_p_;
    std::vector<double> log_q_;
};

double log_w_mass(const ProductWeights& pw, const CylinderPair& c);
double w_mass(const ProductWeights& pw, const CylinderPair& c);

/// log of the energy (prod p * prod q * m^{-len r})^t of the word sigma*omega.
double log_pair_energy(const CarpetSpec& spec, const SpectralConstants& c, const CylinderPair& pair);

/// sigma_a * sigma_b -> [sigma_a] x [sigma_b]. Throws EmptyWord at the root.
CylinderPair embed(const Word& w);

/// |sigma| + ell(anchor) == ell(|sigma| + |omega| + anchor). With anchor 0 this
/// is the shape of embedded location codes; with anchor k_1j it defines H_j.
bool is_aligned(const ProductWeights& pw, const CylinderPair& c, std::size_t anchor);

/// One-step aligned refinements: either a cell is appended to sigma or a row
/// digit to omega, whichever keeps the alignment.
std::vector<CylinderPair> aligned_children(const ProductWeights& pw, const CylinderPair& c, std::size_t anchor);

/// All aligned sub-pairs of c with total length |c| + h.
std::vector<CylinderPair> gamma_h(const ProductWeights& pw, const CylinderPair& c, std::size_t h, std::size_t anchor);

/// Inverse of aligned_children. Throws EmptyPair for the empty pair and
/// Config if c is not aligned.
CylinderPair paired_flatten(const ProductWeights& pw, const CylinderPair& c, std::size_t anchor);

template <class T>
bool is_prefix(std::span<const T> prefix, std::span<const T> whole) {
    if (prefix.size() > whole.size()) return false;
    for (std::size_t h = 0; h < prefix.size(); ++h)
        if (!(prefix[h] == whole[h])) return false;
    return true;
}

/// Indices of tau in `family` with sigma_a ≺ tau_a and sigma_b ≺ tau_b
/// (non-strict prefixes), by a linear scan.
std::vector<std::size_t> s1_family(std::span<const Word> family, const Word& sigma);

/// s1_family for every member at once; result[i] lists the members of
/// S_1(family[i]). Uses a hash index over prefix pairs.
std::vector<std::vector<std::size_t>> s1_families(std::span<const Word> family);

}  // namespace carpet
