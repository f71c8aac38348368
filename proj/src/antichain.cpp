#include "carpet/antichain.hpp"

#include "carpet/error.hpp"
#include "carpet/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace carpet {

namespace {

__extension__ typedef unsigned __int128 u128;

using WordSet = std::unordered_set<Word, WordHash>;

Check make_check(std::string name, double value, double bound, bool pass, std::string witness = {}) {
    return {std::move(name), value, bound, pass, std::move(witness)};
}

Word concat(const Word& tau, const CylinderPair& pair) {
    Word w;
    w.a.reserve(tau.a.size() + pair.sigma.size());
    w.a = tau.a;
    w.a.insert(w.a.end(), pair.sigma.begin(), pair.sigma.end());
    w.b.reserve(tau.b.size() + pair.omega.size());
    w.b = tau.b;
    w.b.insert(w.b.end(), pair.omega.begin(), pair.omega.end());
    return w;
}

// Shortest member of `set` among rho and its ancestors.
Word shortest_comparable(const CarpetSpec& spec, const WordSet& set, const Word& rho) {
    Word best = rho;
    Word w = rho;
    while (!w.is_root()) {
        w = flatten(spec, w);
        if (set.contains(w)) best = w;
    }
    return best;
}

}  // namespace

Antichain build_upsilon(const CarpetSpec& spec, const SpectralConstants& c, int j, std::size_t cap) {
    Antichain out;
    out.kind = AntichainKind::Upsilon;
    out.j = j;
    const double threshold = j * c.log_eta_lo;
    std::vector<Word> stack{Word{}};
    while (!stack.empty()) {
        Word w = std::move(stack.back());
        stack.pop_back();
        if (log_weight(spec, c.r, w) >= threshold) {
            auto kids = children(spec, w);
            for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(std::move(*it));
        } else {
            if (out.words.size() >= cap) throw CapExceeded(out.words.size(), cap, "Upsilon_" + std::to_string(j));
            out.words.push_back(std::move(w));
        }
    }
    return out;
}

Slices slices(const Antichain& upsilon) {
    Slices s;
    s.psi = upsilon.words.size();
    s.k1 = std::numeric_limits<std::size_t>::max();
    for (std::size_t idx = 0; idx < upsilon.words.size(); ++idx) {
        const std::size_t k = upsilon.words[idx].order();
        s.k1 = std::min(s.k1, k);
        s.k2 = std::max(s.k2, k);
        s.by_order[k].push_back(idx);
    }
    if (s.psi == 0) s.k1 = 0;
    return s;
}

S2Summary s2_family(const CarpetSpec& spec, const SpectralConstants& c, const Word& sigma, std::size_t depth_cap) {
    S2Summary out;
    const double base = log_energy(spec, c, sigma);
    const double threshold = base - std::log(c.H2);
    CompensatedSum sum;
    std::vector<std::pair<Word, std::size_t>> stack{{sigma, 0}};
    while (!stack.empty()) {
        auto [w, depth] = std::move(stack.back());
        stack.pop_back();
        const double le = log_energy(spec, c, w);
        if (le < threshold) continue;
        ++out.members;
        sum.add(std::exp(le - base));
        out.max_gap = std::max(out.max_gap, depth);
        if (depth >= depth_cap) {
            out.truncated = true;
            continue;
        }
        for (auto& kid : children(spec, w)) stack.emplace_back(std::move(kid), depth + 1);
    }
    out.energy_ratio = sum.value();
    out.bound_ok = !out.truncated && out.energy_ratio <= c.H3 && out.max_gap <= static_cast<std::size_t>(c.M);
    return out;
}

std::vector<CylinderPair> threshold_pair_antichain(const ProductWeights& pw, std::size_t anchor, double log_eps,
                                                   std::size_t cap) {
    std::vector<CylinderPair> out;
    std::vector<CylinderPair> stack{CylinderPair{}};
    while (!stack.empty()) {
        CylinderPair c = std::move(stack.back());
        stack.pop_back();
        if (log_w_mass(pw, c) >= log_eps) {
            auto kids = aligned_children(pw, c, anchor);
            for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(std::move(*it));
        } else {
            if (out.size() >= cap) throw CapExceeded(out.size(), cap, "pair antichain");
            out.push_back(std::move(c));
        }
    }
    return out;
}

GammaTau build_gamma_tau(const CarpetSpec& spec, const SpectralConstants& c, const ProductWeights& pw,
                         const Word& tau, int j, std::size_t k1, std::size_t cap) {
    if (tau.order() != k1 || !is_location_code(spec, tau))
        throw CarpetError(ErrorCode::BadTau, encode(tau) + " is not a word of order " + std::to_string(k1));
    const double lw = log_weight(spec, c.r, tau);
    if (lw < j * c.log_eta_lo)
        throw CarpetError(ErrorCode::BadTau, encode(tau) + " belongs to the Upsilon slice (eps > 1)");
    GammaTau g;
    g.log_eps = c.t * (j * c.log_eta_lo - lw);
    g.pairs = threshold_pair_antichain(pw, k1, g.log_eps, cap);
    return g;
}

std::vector<Word> enumerate_order(const CarpetSpec& spec, std::size_t k, std::size_t cap) {
    std::vector<Word> level{Word{}};
    for (std::size_t d = 0; d < k; ++d) {
        std::vector<Word> next;
        for (const auto& w : level) {
            auto kids = children(spec, w);
            if (next.size() + kids.size() > cap) throw CapExceeded(next.size(), cap, "Omega_" + std::to_string(k));
            next.insert(next.end(), std::make_move_iterator(kids.begin()), std::make_move_iterator(kids.end()));
        }
        level = std::move(next);
    }
    return level;
}

std::vector<Word> reduce_to_l2(const CarpetSpec& spec, std::span<const Word> l1) {
    const WordSet members(l1.begin(), l1.end());
    WordSet chosen;
    for (const auto& rho : l1) chosen.insert(shortest_comparable(spec, members, rho));
    std::vector<Word> out(chosen.begin(), chosen.end());
    std::sort(out.begin(), out.end());
    return out;
}

LSets build_L1_L2(const CarpetSpec& spec, const SpectralConstants& c, const Antichain& upsilon, std::size_t cap) {
    LSets out;
    const Slices sl = slices(upsilon);
    out.k1 = sl.k1;
    const int j = upsilon.j;
    const ProductWeights pw(spec, c);

    WordSet slice;
    if (auto it = sl.by_order.find(sl.k1); it != sl.by_order.end())
        for (std::size_t idx : it->second) slice.insert(upsilon.words[idx]);

    WordSet seen;
    auto add = [&](Word w) {
        if (!is_location_code(spec, w)) {
            out.all_location_codes = false;
            if (!out.bad_word) out.bad_word = w;
        }
        if (!seen.insert(w).second) {
            out.distinct = false;
            if (!out.bad_word) out.bad_word = w;
        }
        if (out.l1.size() >= cap) throw CapExceeded(out.l1.size(), cap, "L1");
        out.l1.push_back(std::move(w));
    };

    const double threshold = j * c.log_eta_lo;
    for (auto& tau : enumerate_order(spec, sl.k1, cap)) {
        const bool in_slice = slice.contains(tau);
        if (log_weight(spec, c.r, tau) < threshold) {
            ++out.slice_tau;
            if (!in_slice) out.slice_consistent = false;
            add(std::move(tau));
            continue;
        }
        if (in_slice) out.slice_consistent = false;
        ++out.admissible_tau;

        const GammaTau g = build_gamma_tau(spec, c, pw, tau, j, sl.k1, cap);
        const CylinderPair tau_pair = embed(tau);
        const double log_w_tau = log_w_mass(pw, tau_pair);
        CompensatedSum partition, lifted;
        for (const auto& pair : g.pairs) {
            if (!is_aligned(pw, pair, sl.k1)) out.all_aligned = false;
            partition.add(w_mass(pw, pair));
            Word rho = concat(tau, pair);
            lifted.add(std::exp(log_w_mass(pw, embed(rho)) - log_w_tau));
            add(std::move(rho));
        }
        out.max_partition_error = std::max(out.max_partition_error, std::abs(partition.value() - 1.0));
        out.max_lift_error = std::max(out.max_lift_error, std::abs(lifted.value() - 1.0));
    }
    if (out.slice_tau != slice.size()) out.slice_consistent = false;

    out.l2 = reduce_to_l2(spec, out.l1);
    return out;
}

std::optional<std::pair<std::size_t, std::size_t>> find_overlap(const CarpetSpec& spec, std::span<const Word> words) {
    std::vector<ApproxSquare> sq;
    sq.reserve(words.size());
    for (const auto& w : words) sq.push_back(rect(spec, w));

    std::vector<std::size_t> order(words.size());
    for (std::size_t idx = 0; idx < order.size(); ++idx) order[idx] = idx;
    auto x_lo_less = [&](std::size_t a, std::size_t b) {
        return u128(sq[a].px) * sq[b].nx < u128(sq[b].px) * sq[a].nx;
    };
    std::stable_sort(order.begin(), order.end(), x_lo_less);

    // Sweep in x: `active` holds squares whose x-interval still reaches past
    // the current left edge.
    std::vector<std::size_t> active;
    for (std::size_t idx : order) {
        const ApproxSquare& cur = sq[idx];
        std::erase_if(active, [&](std::size_t a) {
            return u128(sq[a].px + 1) * cur.nx <= u128(cur.px) * sq[a].nx;
        });
        for (std::size_t a : active)
            if (interiors_overlap(sq[a], cur)) return std::make_pair(std::min(a, idx), std::max(a, idx));
        active.push_back(idx);
    }
    return std::nullopt;
}

PhiGrowth phi_growth_constants(const SpectralConstants& c) {
    PhiGrowth g;
    const double step = -c.t * c.log_eta_lo;  // log of eta^{-t} > 0
    const double target = std::log(c.H4 / c.H5);
    g.H6 = 1;
    while (!((g.H6 - 1) * step > target)) ++g.H6;
    g.H7 = c.H4 / c.H5 * std::exp((g.H6 + 1) * step);
    return g;
}

bool JRecord::all_pass() const {
    return complete && std::all_of(checks.begin(), checks.end(), [](const Check& ch) { return ch.pass; });
}

const Check* JRecord::find(const std::string& name) const {
    for (const auto& ch : checks)
        if (ch.name == name) return &ch;
    return nullptr;
}

bool CertificateReport::valid() const {
    return !capped && std::all_of(records.begin(), records.end(), [](const JRecord& r) { return r.all_pass(); });
}

namespace {

void certify_upsilon(const CarpetSpec& spec, const SpectralConstants& c, const ProductWeights& pw,
                     const Antichain& ups, JRecord& rec) {
    const int j = ups.j;
    const auto& words = ups.words;
    const double log_eta = c.log_eta_lo;

    double floor_margin = std::numeric_limits<double>::infinity();
    double ceil_margin = -std::numeric_limits<double>::infinity();
    std::size_t floor_at = 0, ceil_at = 0;
    CompensatedSum mass, energy_sum, wsum;
    std::vector<double> log_w(words.size());
    const std::size_t sandwich_from =
        static_cast<std::size_t>(std::ceil(1.0 / spec.theta().value));
    double sandwich_lo = std::numeric_limits<double>::infinity();   // min log W - log E
    double sandwich_hi = -std::numeric_limits<double>::infinity();  // max log W - log E
    std::size_t sandwich_lo_at = 0, sandwich_hi_at = 0;
    const double log_pq = std::log(c.P / c.Q);

    for (std::size_t idx = 0; idx < words.size(); ++idx) {
        const Word& w = words[idx];
        const double lw = log_weight(spec, c.r, w);
        if (lw - (j + 1) * log_eta < floor_margin) {
            floor_margin = lw - (j + 1) * log_eta;
            floor_at = idx;
        }
        if (lw - j * log_eta > ceil_margin) {
            ceil_margin = lw - j * log_eta;
            ceil_at = idx;
        }
        mass.add(measure(spec, w));
        const double le = c.t * lw;
        energy_sum.add(std::exp(le));
        log_w[idx] = log_w_mass(pw, embed(w));
        wsum.add(std::exp(log_w[idx]));
        if (w.order() >= sandwich_from) {
            const double gap = log_w[idx] - le;
            if (gap < sandwich_lo) {
                sandwich_lo = gap;
                sandwich_lo_at = idx;
            }
            if (gap > sandwich_hi) {
                sandwich_hi = gap;
                sandwich_hi_at = idx;
            }
        }
    }

    const Slices sl = slices(ups);
    rec.psi = sl.psi;
    rec.k1 = sl.k1;
    rec.k2 = sl.k2;
    rec.sum_energy = energy_sum.value();
    rec.h1_bound_ok = rec.sum_energy <= c.H1;

    auto& ch = rec.checks;
    ch.push_back(make_check("upsilon_weight_floor", floor_margin, 0.0, floor_margin >= 0.0, encode(words[floor_at])));
    ch.push_back(make_check("upsilon_weight_ceiling", ceil_margin, 0.0, ceil_margin < 0.0, encode(words[ceil_at])));
    const double mass_err = std::abs(mass.value() - 1.0);
    ch.push_back(make_check("upsilon_mass_sum", mass_err, 1e-12, mass_err <= 1e-12));
    ch.push_back(make_check("upsilon_energy_sum", rec.sum_energy, c.H1, rec.h1_bound_ok));
    const double psi_floor = static_cast<double>(sl.psi) * std::exp((j + 1) * c.t * log_eta);
    ch.push_back(make_check("psi_energy_floor", psi_floor, c.H1, psi_floor <= c.H1));
    if (std::isfinite(sandwich_lo)) {
        ch.push_back(make_check("embed_sandwich_lower", sandwich_lo, 0.0, sandwich_lo >= 0.0,
                                encode(words[sandwich_lo_at])));
        ch.push_back(make_check("embed_sandwich_upper", sandwich_hi, log_pq, sandwich_hi <= log_pq,
                                encode(words[sandwich_hi_at])));
    }

    // Overlap families S_1 and the dedup into pairwise disjoint roots.
    const auto families = s1_families(words);
    std::vector<char> is_root(words.size(), 1);
    double max_ratio = 0.0;
    std::size_t max_gap = 0, ratio_at = 0, gap_at = 0;
    for (std::size_t idx = 0; idx < words.size(); ++idx) {
        CompensatedSum fam;
        for (std::size_t member : families[idx]) {
            fam.add(std::exp(log_w[member] - log_w[idx]));
            if (member != idx) is_root[member] = 0;
            const std::size_t gap = words[member].order() - words[idx].order();
            if (gap > max_gap) {
                max_gap = gap;
                gap_at = idx;
            }
        }
        if (fam.value() > max_ratio) {
            max_ratio = fam.value();
            ratio_at = idx;
        }
    }
    rec.s1_max_ratio = max_ratio;
    rec.s1_max_gap = max_gap;
    ch.push_back(make_check("s1_overlap_ratio", max_ratio, c.H1, max_ratio <= c.H1, encode(words[ratio_at])));
    ch.push_back(make_check("s1_order_gap", static_cast<double>(max_gap), c.H1,
                            max_gap <= static_cast<std::size_t>(c.H1), encode(words[gap_at])));

    CompensatedSum root_sum;
    for (std::size_t idx = 0; idx < words.size(); ++idx)
        if (is_root[idx]) root_sum.add(std::exp(log_w[idx]));
    ch.push_back(make_check("dedup_root_mass", root_sum.value(), 1.0, root_sum.value() <= 1.0 + 1e-12));
    ch.push_back(make_check("upsilon_wmass_sum", wsum.value(), c.H1 * root_sum.value(),
                            rec.sum_energy <= wsum.value() && wsum.value() <= c.H1 * root_sum.value() * (1 + 1e-12)));
}

void certify_pipeline(const CarpetSpec& spec, const SpectralConstants& c, const Antichain& ups, std::size_t cap,
                      JRecord& rec) {
    const int j = ups.j;
    const double log_eta = c.log_eta_lo;
    const LSets ls = build_L1_L2(spec, c, ups, cap);
    auto& ch = rec.checks;
    const std::string bad = ls.bad_word ? encode(*ls.bad_word) : std::string{};

    ch.push_back(make_check("gamma_partition", ls.max_partition_error, 1e-12, ls.max_partition_error <= 1e-12));
    ch.push_back(make_check("gamma_lift", ls.max_lift_error, 1e-12, ls.max_lift_error <= 1e-12));
    ch.push_back(make_check("gamma_alignment", ls.all_aligned ? 1.0 : 0.0, 1.0, ls.all_aligned));
    ch.push_back(make_check("l1_location_codes", ls.all_location_codes ? 1.0 : 0.0, 1.0, ls.all_location_codes, bad));
    ch.push_back(make_check("l1_distinct", ls.distinct ? 1.0 : 0.0, 1.0, ls.distinct, bad));
    ch.push_back(make_check("l1_slice_consistent", ls.slice_consistent ? 1.0 : 0.0, 1.0, ls.slice_consistent));

    // Energy band for every L1 word.
    const double band_lo = std::log(c.Q / (c.P * c.P)) + (j + 1) * c.t * log_eta;
    const double band_hi = std::log(c.P / c.Q) + j * c.t * log_eta;
    double min_le = std::numeric_limits<double>::infinity();
    double max_le = -std::numeric_limits<double>::infinity();
    std::size_t min_at = 0, max_at = 0;
    for (std::size_t idx = 0; idx < ls.l1.size(); ++idx) {
        const double le = log_energy(spec, c, ls.l1[idx]);
        if (le < min_le) {
            min_le = le;
            min_at = idx;
        }
        if (le > max_le) {
            max_le = le;
            max_at = idx;
        }
    }
    if (!ls.l1.empty()) {
        ch.push_back(make_check("l1_energy_floor", min_le - band_lo, 0.0, min_le >= band_lo, encode(ls.l1[min_at])));
        ch.push_back(make_check("l1_energy_ceiling", max_le - band_hi, 0.0, max_le < band_hi, encode(ls.l1[max_at])));
    }

    const auto overlap = find_overlap(spec, ls.l2);
    ch.push_back(make_check("l2_non_overlapping", overlap ? 1.0 : 0.0, 0.0, !overlap,
                            overlap ? encode(ls.l2[overlap->first]) + " ~ " + encode(ls.l2[overlap->second])
                                    : std::string{}));

    CompensatedSum l2_energy;
    for (const auto& w : ls.l2) l2_energy.add(energy(spec, c, w));
    const double lower = c.Q / (c.H3 * c.P);
    ch.push_back(make_check("l2_energy_lower", l2_energy.value(), lower, l2_energy.value() >= lower));
    ch.push_back(make_check("l2_energy_upper", l2_energy.value(), 1.0, l2_energy.value() <= 1.0));

    rec.phi = ls.l2.size();
    const double phi = static_cast<double>(rec.phi);
    const double phi_lo = c.H5 * std::exp(-j * c.t * log_eta);
    const double phi_hi = c.H4 * std::exp(-(j + 1) * c.t * log_eta);
    rec.s12_ok = phi_lo <= phi && phi <= phi_hi;
    ch.push_back(make_check("phi_count_lower", phi, phi_lo, phi_lo <= phi));
    ch.push_back(make_check("phi_count_upper", phi, phi_hi, phi <= phi_hi));

    // Descendant energy control over L2, and the T(rho) families it feeds.
    double max_ratio = 0.0;
    std::size_t max_gap = 0, ratio_at = 0, gap_at = 0;
    bool truncated = false;
    for (std::size_t idx = 0; idx < ls.l2.size(); ++idx) {
        const S2Summary s2 = s2_family(spec, c, ls.l2[idx]);
        truncated = truncated || s2.truncated;
        if (s2.energy_ratio > max_ratio) {
            max_ratio = s2.energy_ratio;
            ratio_at = idx;
        }
        if (s2.max_gap > max_gap) {
            max_gap = s2.max_gap;
            gap_at = idx;
        }
    }
    rec.s2_max_ratio = max_ratio;
    if (!ls.l2.empty()) {
        ch.push_back(make_check("s2_energy_ratio", max_ratio, c.H3, !truncated && max_ratio <= c.H3,
                                encode(ls.l2[ratio_at])));
        ch.push_back(make_check("s2_order_gap", static_cast<double>(max_gap), c.M,
                                max_gap <= static_cast<std::size_t>(c.M), encode(ls.l2[gap_at])));
    }

    const WordSet l1_set(ls.l1.begin(), ls.l1.end());
    std::unordered_map<Word, CompensatedSum, WordHash> t_sums;
    for (const auto& w : ls.l1) {
        const Word rep = shortest_comparable(spec, l1_set, w);
        t_sums[rep].add(std::exp(log_energy(spec, c, w) - log_energy(spec, c, rep)));
    }
    double max_t = 0.0;
    for (const auto& [rep, sum] : t_sums) max_t = std::max(max_t, sum.value());
    ch.push_back(make_check("t_family_energy", max_t, c.H3, max_t <= c.H3));
}

}  // namespace

CertificateReport certify(const CarpetSpec& spec, const SpectralConstants& c, std::span<const int> j_values,
                          std::size_t cap) {
    CertificateReport report;
    report.constants = c;
    std::vector<int> js(j_values.begin(), j_values.end());
    std::sort(js.begin(), js.end());
    js.erase(std::unique(js.begin(), js.end()), js.end());

    const ProductWeights pw(spec, c);
    for (int j : js) {
        JRecord rec;
        rec.j = j;
        try {
            const Antichain ups = build_upsilon(spec, c, j, cap);
            certify_upsilon(spec, c, pw, ups, rec);
            certify_pipeline(spec, c, ups, cap, rec);
            rec.complete = true;
        } catch (const CapExceeded& e) {
            report.capped = true;
            report.cap_message = e.what();
            report.records.push_back(std::move(rec));
            break;
        }
        report.records.push_back(std::move(rec));
    }

    // Growth checks across thresholds.
    const double mn_h1 = std::pow(static_cast<double>(spec.m()) * spec.n(), c.H1);
    const PhiGrowth growth = phi_growth_constants(c);
    auto record_for = [&](int j) -> JRecord* {
        for (auto& r : report.records)
            if (r.j == j && r.complete) return &r;
        return nullptr;
    };
    for (auto& rec : report.records) {
        if (!rec.complete) continue;
        if (const JRecord* next = record_for(rec.j + 1)) {
            const double psi = static_cast<double>(rec.psi);
            const double nxt = static_cast<double>(next->psi);
            rec.checks.push_back(make_check("psi_growth", nxt / psi, mn_h1, psi <= nxt && nxt <= mn_h1 * psi));
        }
        if (const JRecord* ahead = record_for(rec.j + growth.H6)) {
            const double phi = static_cast<double>(rec.phi);
            const double later = static_cast<double>(ahead->phi);
            rec.checks.push_back(
                make_check("phi_growth", later / phi, growth.H7, phi < later && later <= growth.H7 * phi));
        }
    }
    return report;
}

}  // namespace carpet
