#include "carpet/product_space.hpp"

#include "carpet/error.hpp"

#include <cmath>
#include <unordered_map>

namespace carpet {

std::size_t CylinderPairHash::operator()(const CylinderPair& c) const noexcept {
    Word w{c.sigma, c.omega};
    return WordHash{}(w);
}

ProductWeights::ProductWeights(const CarpetSpec& spec, const SpectralConstants& c)
    : n_(spec.n()), theta_(spec.theta()) {
    const double log_scale = -c.r * std::log(static_cast<double>(spec.m()));
    const double log_P = std::log(c.P);
    const double log_Q = std::log(c.Q);
    log_p_.assign(static_cast<std::size_t>(spec.n()) * spec.m(), -INFINITY);
    log_q_.assign(spec.m(), -INFINITY);
    for (const auto& e : spec.entries()) {
        cells_.push_back({e.i, e.j});
        log_p_[static_cast<std::size_t>(e.j) * n_ + e.i] = c.t * (std::log(e.p) + log_scale) - log_P;
    }
    for (int j : spec.indices().gy) {
        rows_.push_back(j);
        log_q_[j] = c.t * (spec.log_q(j) + log_scale) - log_Q;
    }
}

double ProductWeights::p_tilde(Cell cell) const { return std::exp(log_p(cell)); }
double ProductWeights::q_tilde(int j) const { return std::exp(log_q(j)); }

double log_w_mass(const ProductWeights& pw, const CylinderPair& c) {
    double s = 0.0;
    for (const auto& cell : c.sigma) s += pw.log_p(cell);
    for (int j : c.omega) s += pw.log_q(j);
    return s;
}

double w_mass(const ProductWeights& pw, const CylinderPair& c) { return std::exp(log_w_mass(pw, c)); }

double log_pair_energy(const CarpetSpec& spec, const SpectralConstants& c, const CylinderPair& pair) {
    double s = 0.0;
    for (const auto& cell : pair.sigma) s += spec.log_p(cell.i, cell.j);
    for (int j : pair.omega) s += spec.log_q(j);
    s -= static_cast<double>(pair.length()) * c.r * std::log(static_cast<double>(spec.m()));
    return c.t * s;
}

CylinderPair embed(const Word& w) {
    if (w.is_root()) throw CarpetError(ErrorCode::EmptyWord, "the root word has no cylinder");
    return {w.a, w.b};
}

bool is_aligned(const ProductWeights& pw, const CylinderPair& c, std::size_t anchor) {
    return c.sigma.size() + pw.ell(anchor) == pw.ell(c.length() + anchor);
}

std::vector<CylinderPair> aligned_children(const ProductWeights& pw, const CylinderPair& c, std::size_t anchor) {
    std::vector<CylinderPair> out;
    const bool grow_sigma = pw.ell(c.length() + anchor + 1) == c.sigma.size() + pw.ell(anchor) + 1;
    if (grow_sigma) {
        out.reserve(pw.cells().size());
        for (const Cell& cell : pw.cells()) {
            CylinderPair child = c;
            child.sigma.push_back(cell);
            out.push_back(std::move(child));
        }
    } else {
        out.reserve(pw.rows().size());
        for (int j : pw.rows()) {
            CylinderPair child = c;
            child.omega.push_back(j);
            out.push_back(std::move(child));
        }
    }
    return out;
}

std::vector<CylinderPair> gamma_h(const ProductWeights& pw, const CylinderPair& c, std::size_t h, std::size_t anchor) {
    std::vector<CylinderPair> level{c};
    for (std::size_t step = 0; step < h; ++step) {
        std::vector<CylinderPair> next;
        for (const auto& pair : level) {
            auto kids = aligned_children(pw, pair, anchor);
            next.insert(next.end(), std::make_move_iterator(kids.begin()), std::make_move_iterator(kids.end()));
        }
        level = std::move(next);
    }
    return level;
}

CylinderPair paired_flatten(const ProductWeights& pw, const CylinderPair& c, std::size_t anchor) {
    if (c.empty()) throw CarpetError(ErrorCode::EmptyPair, "the empty pair has no parent");
    if (!is_aligned(pw, c, anchor)) throw CarpetError(ErrorCode::Config, "pair is not aligned with the anchor order");
    CylinderPair parent = c;
    if (pw.ell(c.length() + anchor - 1) == c.sigma.size() + pw.ell(anchor))
        parent.omega.pop_back();
    else
        parent.sigma.pop_back();
    return parent;
}

std::vector<std::size_t> s1_family(std::span<const Word> family, const Word& sigma) {
    std::vector<std::size_t> out;
    for (std::size_t idx = 0; idx < family.size(); ++idx) {
        const Word& tau = family[idx];
        if (is_prefix<Cell>(sigma.a, tau.a) && is_prefix<int>(sigma.b, tau.b)) out.push_back(idx);
    }
    return out;
}

std::vector<std::vector<std::size_t>> s1_families(std::span<const Word> family) {
    std::unordered_map<Word, std::size_t, WordHash> index;
    index.reserve(family.size() * 2);
    for (std::size_t idx = 0; idx < family.size(); ++idx) index.emplace(family[idx], idx);

    std::vector<std::vector<std::size_t>> out(family.size());
    Word probe;
    for (std::size_t idx = 0; idx < family.size(); ++idx) {
        const Word& tau = family[idx];
        for (std::size_t la = 0; la <= tau.a.size(); ++la) {
            probe.a.assign(tau.a.begin(), tau.a.begin() + static_cast<std::ptrdiff_t>(la));
            for (std::size_t lb = 0; lb <= tau.b.size(); ++lb) {
                probe.b.assign(tau.b.begin(), tau.b.begin() + static_cast<std::ptrdiff_t>(lb));
                if (auto it = index.find(probe); it != index.end()) out[it->second].push_back(idx);
            }
        }
    }
    for (auto& members : out) std::sort(members.begin(), members.end());
    return out;
}

}  // namespace carpet
