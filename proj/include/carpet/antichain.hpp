#pragma once

#include "carpet/carpet_spec.hpp"
#include "carpet/product_space.hpp"
#include "carpet/spectral.hpp"
#include "carpet/word.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace carpet {

constexpr std::size_t kDefaultCap = 500000;

enum class AntichainKind { Upsilon, L1, L2, Slice };

struct Antichain {
    std::vector<Word> words;
    AntichainKind kind = AntichainKind::Upsilon;
    int j = 0;
};

/// Threshold antichain: words whose weight mu m^{-kr} first drops below
/// eta_lo^j along every refinement path. Weight exactly eta_lo^j refines.
/// Throws CapExceeded when more than `cap` words would be collected.
Antichain build_upsilon(const CarpetSpec& spec, const SpectralConstants& c, int j, std::size_t cap = kDefaultCap);

struct Slices {
    std::size_t psi = 0;
    std::size_t k1 = 0;  // shortest order present
    std::size_t k2 = 0;  // longest order present
    std::map<std::size_t, std::vector<std::size_t>> by_order;  // order -> indices into words
};

Slices slices(const Antichain& upsilon);

struct S2Summary {
    std::size_t members = 0;
    double energy_ratio = 0.0;  // sum over S_2(sigma) of E(omega) / E(sigma)
    std::size_t max_gap = 0;     // max |omega| - |sigma|
    bool truncated = false;      // depth_cap was hit
    bool bound_ok = false;       // energy_ratio <= H3 and max_gap <= M
};

/// Descendants omega of sigma (sigma itself included) with
/// E(omega) >= E(sigma) / H2, by pruned depth-first search.
S2Summary s2_family(const CarpetSpec& spec, const SpectralConstants& c, const Word& sigma, std::size_t depth_cap = 64);

/// Pairs c of the aligned pair tree (anchored at `anchor`) with
/// W(parent) >= eps > W(c), eps = exp(log_eps) <= 1.
std::vector<CylinderPair> threshold_pair_antichain(const ProductWeights& pw, std::size_t anchor, double log_eps,
                                                   std::size_t cap = kDefaultCap);

struct GammaTau {
    std::vector<CylinderPair> pairs;
    double log_eps = 0.0;
};

/// Gamma(tau) for tau in Omega_{k1} outside the order-k1 slice of Upsilon_j.
/// Throws BadTau when |tau| != k1 or the weight of tau is below eta_lo^j.
GammaTau build_gamma_tau(const CarpetSpec& spec, const SpectralConstants& c, const ProductWeights& pw,
                         const Word& tau, int j, std::size_t k1, std::size_t cap = kDefaultCap);

/// All words of Omega_k in canonical order.
std::vector<Word> enumerate_order(const CarpetSpec& spec, std::size_t k, std::size_t cap = kDefaultCap);

struct LSets {
    std::vector<Word> l1;
    std::vector<Word> l2;
    std::size_t k1 = 0;
    std::size_t admissible_tau = 0;
    std::size_t slice_tau = 0;
    double max_partition_error = 0.0;  // max |sum over Gamma(tau) of W - 1|
    double max_lift_error = 0.0;       // max relative error of the lifted W sum against W(tau)
    bool all_aligned = true;
    bool all_location_codes = true;
    bool distinct = true;
    bool slice_consistent = true;      // low-weight order-k1 words are exactly the Upsilon slice
    std::optional<Word> bad_word;
};

LSets build_L1_L2(const CarpetSpec& spec, const SpectralConstants& c, const Antichain& upsilon,
                  std::size_t cap = kDefaultCap);

/// L2 from L1: for every rho the shortest member of L1 comparable with it.
std::vector<Word> reduce_to_l2(const CarpetSpec& spec, std::span<const Word> l1);

/// True when no two squares share interior points. Returns a witness pair
/// of indices otherwise. Exact integer arithmetic.
std::optional<std::pair<std::size_t, std::size_t>> find_overlap(const CarpetSpec& spec, std::span<const Word> words);

/// Constants witnessing geometric growth of phi_j: the smallest H6 with
/// H5 eta^{-(H6-1)t} > H4, and H7 = H4 / H5 * eta^{-(H6+1)t}.
struct PhiGrowth {
    int H6 = 0;
    double H7 = 0.0;
};
PhiGrowth phi_growth_constants(const SpectralConstants& c);

struct Check {
    std::string name;
    double value = 0.0;
    double bound = 0.0;
    bool pass = false;
    std::string witness;
};

struct JRecord {
    int j = 0;
    bool complete = false;  // false if a cap stopped the run
    std::size_t psi = 0;
    std::size_t k1 = 0;
    std::size_t k2 = 0;
    double sum_energy = 0.0;
    double s1_max_ratio = 0.0;
    std::size_t s1_max_gap = 0;
    double s2_max_ratio = 0.0;
    std::size_t phi = 0;
    bool h1_bound_ok = false;
    bool s12_ok = false;
    std::vector<Check> checks;

    bool all_pass() const;
    const Check* find(const std::string& name) const;
};

struct CertificateReport {
    SpectralConstants constants;
    std::vector<JRecord> records;
    bool capped = false;
    std::string cap_message;

    bool valid() const;
};

CertificateReport certify(const CarpetSpec& spec, const SpectralConstants& c, std::span<const int> j_values,
                          std::size_t cap = kDefaultCap);

}  // namespace carpet
