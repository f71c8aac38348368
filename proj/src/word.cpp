#include "carpet/word.hpp"

#include "carpet/error.hpp"

#include <cmath>
#include <sstream>

namespace carpet {

namespace {

__extension__ typedef unsigned __int128 u128;

constexpr std::uint64_t kPowLimit = std::uint64_t{1} << 63;

std::uint64_t checked_pow(std::uint64_t base, std::size_t e) {
    std::uint64_t v = 1;
    for (std::size_t h = 0; h < e; ++h) {
        if (v > kPowLimit / base) throw CarpetError(ErrorCode::Overflow, "approximate square too deep for 64-bit grid");
        v *= base;
    }
    return v;
}

}  // namespace

std::size_t WordHash::operator()(const Word& w) const noexcept {
    std::size_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::size_t v) { h = (h ^ v) * 0x100000001b3ULL; };
    mix(w.a.size());
    for (const auto& c : w.a) mix((static_cast<std::size_t>(c.i) << 16) ^ static_cast<std::size_t>(c.j));
    mix(0xffff);
    for (int j : w.b) mix(static_cast<std::size_t>(j));
    return h;
}

double ApproxSquare::diameter() const {
    const double w = 1.0 / static_cast<double>(nx);
    const double h = 1.0 / static_cast<double>(my);
    return std::hypot(w, h);
}

bool contains(const ApproxSquare& outer, const ApproxSquare& inner) {
    const u128 ox = outer.px, onx = outer.nx, ix = inner.px, inx = inner.nx;
    const u128 oy = outer.py, omy = outer.my, iy = inner.py, imy = inner.my;
    const bool x_ok = ox * inx <= ix * onx && (ix + 1) * onx <= (ox + 1) * inx;
    const bool y_ok = oy * imy <= iy * omy && (iy + 1) * omy <= (oy + 1) * imy;
    return x_ok && y_ok;
}

bool interiors_overlap(const ApproxSquare& a, const ApproxSquare& b) {
    const u128 ax = a.px, anx = a.nx, bx = b.px, bnx = b.nx;
    const u128 ay = a.py, amy = a.my, by = b.py, bmy = b.my;
    const bool x = ax * bnx < (bx + 1) * anx && bx * anx < (ax + 1) * bnx;
    const bool y = ay * bmy < (by + 1) * amy && by * amy < (ay + 1) * bmy;
    return x && y;
}

bool is_location_code(const CarpetSpec& spec, const Word& w) {
    const std::size_t k = w.order();
    if (w.a.size() != spec.ell(k)) return false;
    if (k >= 1 && w.b.empty()) return false;
    for (const auto& c : w.a)
        if (!spec.contains(c.i, c.j)) return false;
    for (int j : w.b)
        if (!spec.has_row(j)) return false;
    return true;
}

std::vector<Word> children(const CarpetSpec& spec, const Word& w) {
    const std::size_t k = w.order();
    const auto& gy = spec.indices().gy;
    std::vector<Word> out;
    if (spec.ell(k + 1) == spec.ell(k)) {
        out.reserve(gy.size());
        for (int jhat : gy) {
            Word c = w;
            c.b.push_back(jhat);
            out.push_back(std::move(c));
        }
        return out;
    }
    // The leading row digit of b becomes a full cell; a new row digit is appended.
    const int j1 = w.b.front();
    const auto& cols = spec.indices().gx_row[j1];
    out.reserve(cols.size() * gy.size());
    for (int i : cols) {
        for (int jhat : gy) {
            Word c;
            c.a.reserve(w.a.size() + 1);
            c.a = w.a;
            c.a.push_back({i, j1});
            c.b.assign(w.b.begin() + 1, w.b.end());
            c.b.push_back(jhat);
            out.push_back(std::move(c));
        }
    }
    return out;
}

Word flatten(const CarpetSpec& spec, const Word& w) {
    const std::size_t k = w.order();
    if (k == 0) throw CarpetError(ErrorCode::EmptyWord, "the root word has no parent");
    Word parent;
    if (spec.ell(k) == spec.ell(k - 1)) {
        parent.a = w.a;
        parent.b.assign(w.b.begin(), w.b.end() - 1);
    } else {
        parent.a.assign(w.a.begin(), w.a.end() - 1);
        parent.b.reserve(w.b.size());
        parent.b.push_back(w.a.back().j);
        parent.b.insert(parent.b.end(), w.b.begin(), w.b.end() - 1);
    }
    return parent;
}

double log_measure(const CarpetSpec& spec, const Word& w) {
    double s = 0.0;
    for (const auto& c : w.a) s += spec.log_p(c.i, c.j);
    for (int j : w.b) s += spec.log_q(j);
    return s;
}

double measure(const CarpetSpec& spec, const Word& w) { return std::exp(log_measure(spec, w)); }

double log_weight(const CarpetSpec& spec, double r, const Word& w) {
    return log_measure(spec, w) - static_cast<double>(w.order()) * r * std::log(static_cast<double>(spec.m()));
}

double weight(const CarpetSpec& spec, double r, const Word& w) { return std::exp(log_weight(spec, r, w)); }

double log_energy(const CarpetSpec& spec, const SpectralConstants& c, const Word& w) {
    return c.t * log_weight(spec, c.r, w);
}

double energy(const CarpetSpec& spec, const SpectralConstants& c, const Word& w) {
    return std::exp(log_energy(spec, c, w));
}

ApproxSquare rect(const CarpetSpec& spec, const Word& w) {
    const std::size_t k = w.order();
    if (k == 0) throw CarpetError(ErrorCode::EmptyWord, "the root word has no approximate square");
    ApproxSquare sq;
    sq.nx = checked_pow(static_cast<std::uint64_t>(spec.n()), w.a.size());
    sq.my = checked_pow(static_cast<std::uint64_t>(spec.m()), k);
    for (const auto& c : w.a) {
        sq.px = sq.px * spec.n() + static_cast<std::uint64_t>(c.i);
        sq.py = sq.py * spec.m() + static_cast<std::uint64_t>(c.j);
    }
    for (int j : w.b) sq.py = sq.py * spec.m() + static_cast<std::uint64_t>(j);
    return sq;
}

Relation compare(const CarpetSpec& spec, const Word& w1, const Word& w2) {
    const ApproxSquare r1 = rect(spec, w1);
    const ApproxSquare r2 = rect(spec, w2);
    if (r1 == r2) return Relation::Equal;
    if (contains(r1, r2)) return Relation::Ancestor;
    if (contains(r2, r1)) return Relation::Descendant;
    return Relation::Incomparable;
}

std::string encode(const Word& w) {
    std::string s = "a:";
    for (const auto& c : w.a) s += "(" + std::to_string(c.i) + "," + std::to_string(c.j) + ")";
    s += "|b:";
    for (std::size_t h = 0; h < w.b.size(); ++h) {
        if (h) s += ' ';
        s += std::to_string(w.b[h]);
    }
    return s;
}

Word decode(const std::string& text) {
    const auto bar = text.find("|b:");
    if (text.rfind("a:", 0) != 0 || bar == std::string::npos)
        throw CarpetError(ErrorCode::Config, "bad word encoding '" + text + "'");
    Word w;
    std::string a = text.substr(2, bar - 2);
    std::size_t pos = 0;
    while (pos < a.size()) {
        int i = 0, j = 0;
        int consumed = 0;
        if (std::sscanf(a.c_str() + pos, "(%d,%d)%n", &i, &j, &consumed) != 2 || consumed == 0)
            throw CarpetError(ErrorCode::Config, "bad word encoding '" + text + "'");
        w.a.push_back({i, j});
        pos += static_cast<std::size_t>(consumed);
    }
    std::istringstream bs(text.substr(bar + 3));
    int j = 0;
    while (bs >> j) w.b.push_back(j);
    if (!bs.eof()) throw CarpetError(ErrorCode::Config, "bad word encoding '" + text + "'");
    return w;
}

}  // namespace carpet
