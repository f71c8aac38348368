#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "carpet/error.hpp"
#include "carpet/spectral.hpp"
#include "carpet/word.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

using namespace carpet;

namespace {

Word W(std::vector<Cell> a, std::vector<int> b) { return Word{std::move(a), std::move(b)}; }

std::vector<Word> tree_level(const CarpetSpec& spec, std::size_t k) {
    std::vector<Word> level{Word{}};
    for (std::size_t h = 0; h < k; ++h) {
        std::vector<Word> next;
        for (const auto& w : level)
            for (auto& c : children(spec, w)) next.push_back(std::move(c));
        level.swap(next);
    }
    return level;
}

Word random_word(const CarpetSpec& spec, std::size_t k, std::mt19937_64& rng) {
    Word w;
    for (std::size_t h = 0; h < k; ++h) {
        auto kids = children(spec, w);
        w = kids[std::uniform_int_distribution<std::size_t>(0, kids.size() - 1)(rng)];
    }
    return w;
}

}  // namespace

TEST_CASE("ell on desk1") {
    const CarpetSpec spec = oracle::desk1();
    CHECK(spec.ell(0) == 0);
    CHECK(spec.ell(1) == 0);
    CHECK(spec.ell(2) == 1);
    CHECK(spec.ell(3) == 1);
    CHECK(spec.ell(4) == 2);
    for (std::size_t k = 0; k <= 40; ++k) CHECK(spec.ell(k) == oracle::ell(spec, k));
    for (std::size_t k = 1; k < 5000; ++k) {
        const std::size_t d = spec.ell(k + 1) - spec.ell(k);
        CHECK((d == 0 || d == 1));
    }
}

TEST_CASE("children of the root and of order one") {
    const CarpetSpec spec = oracle::desk1();
    const auto root_kids = children(spec, Word{});
    REQUIRE(root_kids.size() == 2);
    CHECK(root_kids[0] == W({}, {0}));
    CHECK(root_kids[1] == W({}, {1}));

    const auto k0 = children(spec, W({}, {0}));
    REQUIRE(k0.size() == 2);
    CHECK(std::count(k0.begin(), k0.end(), W({{0, 0}}, {0})) == 1);
    CHECK(std::count(k0.begin(), k0.end(), W({{0, 0}}, {1})) == 1);

    const auto k1 = children(spec, W({}, {1}));
    CHECK(k1.size() == 4);
    for (const auto& w : k1) {
        CHECK(w.a.size() == 1);
        CHECK(w.a[0].j == 1);
    }
}

TEST_CASE("flatten examples") {
    const CarpetSpec spec = oracle::desk1();
    CHECK(flatten(spec, W({{0, 0}}, {1})) == W({}, {0}));
    CHECK(flatten(spec, W({{1, 1}}, {0, 1})) == W({{1, 1}}, {0}));
    CHECK_THROWS_AS(flatten(spec, Word{}), CarpetError);
}

TEST_CASE("tree levels are exactly the product sets") {
    const CarpetSpec spec = oracle::desk1();
    for (std::size_t k = 0; k <= 8; ++k) {
        std::set<Word> lib;
        for (const auto& w : tree_level(spec, k)) {
            CHECK(is_location_code(spec, w));
            lib.insert(w);
        }
        std::set<Word> ref;
        for (const auto& f : oracle::all_words(spec, k)) ref.insert(W(f.a, f.b));
        CHECK(lib == ref);
    }
}

TEST_CASE("round trip up to order 12") {
    const CarpetSpec spec = oracle::desk1();
    std::vector<Word> level{Word{}};
    std::size_t checked = 0;
    for (std::size_t k = 0; k < 12; ++k) {
        std::vector<Word> next;
        for (const auto& w : level)
            for (auto& c : children(spec, w)) {
                if (!(flatten(spec, c) == w)) FAIL_CHECK("flatten mismatch at " << encode(c));
                ++checked;
                next.push_back(std::move(c));
            }
        level.swap(next);
    }
    CHECK(checked > 100000);
}

TEST_CASE("measure") {
    const CarpetSpec spec = oracle::desk1();
    CHECK(measure(spec, W({{1, 1}}, {0})) == doctest::Approx(0.12).epsilon(1e-14));
    CHECK(measure(spec, Word{}) == 1.0);
    CHECK(weight(spec, 2.0, Word{}) == 1.0);
    for (std::size_t k = 1; k <= 7; ++k)
        for (const auto& f : oracle::all_words(spec, k)) {
            const Word w = W(f.a, f.b);
            CHECK(measure(spec, w) == doctest::Approx(oracle::measure(spec, f)).epsilon(1e-12));
            CHECK(weight(spec, 2.0, w) ==
                  doctest::Approx(oracle::measure(spec, f) * std::pow(2.0, -2.0 * double(k))).epsilon(1e-12));
        }
}

TEST_CASE("mass conservation over children") {
    const CarpetSpec spec = oracle::desk1();
    for (std::size_t k = 0; k <= 8; ++k)
        for (const auto& w : tree_level(spec, k)) {
            double sum = 0.0;
            for (const auto& c : children(spec, w)) sum += measure(spec, c);
            CHECK(std::abs(sum - measure(spec, w)) <= 1e-14);
        }
}

TEST_CASE("step bound on weights") {
    const CarpetSpec spec = oracle::desk1();
    const SpectralConstants c = constants(spec, 2.0);
    const double upper = spec.max_q() * 0.25;
    std::mt19937_64 rng(17);
    for (int rep = 0; rep < 1000; ++rep) {
        const Word parent = random_word(spec, std::uniform_int_distribution<std::size_t>(0, 20)(rng), rng);
        for (const auto& child : children(spec, parent)) {
            const double ratio = weight(spec, 2.0, child) / weight(spec, 2.0, parent);
            CHECK(ratio >= c.eta_lo * (1 - 1e-12));
            CHECK(ratio <= upper * (1 + 1e-12));
            CHECK(ratio < 1.0);
        }
    }
}

TEST_CASE("approximate squares") {
    const CarpetSpec spec = oracle::desk1();
    const ApproxSquare a = rect(spec, W({{1, 1}}, {0}));
    CHECK(a.x_lo() == doctest::Approx(1.0 / 3.0));
    CHECK(a.x_hi() == doctest::Approx(2.0 / 3.0));
    CHECK(a.y_lo() == doctest::Approx(0.5));
    CHECK(a.y_hi() == doctest::Approx(0.75));

    const ApproxSquare b = rect(spec, W({}, {0}));
    CHECK(b.x_lo() == 0.0);
    CHECK(b.x_hi() == 1.0);
    CHECK(b.y_lo() == 0.0);
    CHECK(b.y_hi() == 0.5);

    CHECK_THROWS_AS(rect(spec, Word{}), CarpetError);
}

TEST_CASE("rect matches composed maps, nests, and has bounded diameter") {
    const CarpetSpec spec = oracle::desk1();
    for (std::size_t k = 1; k <= 8; ++k) {
        const double side = std::pow(2.0, -double(k));
        for (const auto& f : oracle::all_words(spec, k)) {
            const Word w = W(f.a, f.b);
            const ApproxSquare r = rect(spec, w);
            const oracle::Box bx = oracle::box(spec, f);
            CHECK(std::abs(r.x_lo() - bx.x0) <= 1e-12);
            CHECK(std::abs(r.x_hi() - bx.x1) <= 1e-12);
            CHECK(std::abs(r.y_lo() - bx.y0) <= 1e-12);
            CHECK(std::abs(r.y_hi() - bx.y1) <= 1e-12);
            CHECK(r.diameter() >= side * (1 - 1e-12));
            CHECK(r.diameter() <= side * std::sqrt(10.0) * (1 + 1e-12));
            for (const auto& c : children(spec, w)) {
                CHECK(contains(r, rect(spec, c)));
                CHECK(compare(spec, w, c) == Relation::Ancestor);
                CHECK(compare(spec, c, w) == Relation::Descendant);
            }
        }
    }
}

TEST_CASE("compare") {
    const CarpetSpec spec = oracle::desk1();
    CHECK(compare(spec, W({}, {0}), W({}, {1})) == Relation::Incomparable);
    CHECK(compare(spec, W({{1, 1}}, {0}), W({{1, 1}}, {0})) == Relation::Equal);
    CHECK(compare(spec, W({{1, 1}}, {0}), W({{2, 1}}, {0})) == Relation::Incomparable);
}

TEST_CASE("same-order words never overlap") {
    const CarpetSpec spec = oracle::desk1();
    const auto level = tree_level(spec, 4);
    for (std::size_t x = 0; x < level.size(); ++x)
        for (std::size_t y = x + 1; y < level.size(); ++y)
            CHECK_FALSE(interiors_overlap(rect(spec, level[x]), rect(spec, level[y])));
}

TEST_CASE("location codes") {
    const CarpetSpec spec = oracle::desk1();
    CHECK(is_location_code(spec, Word{}));
    CHECK(is_location_code(spec, W({{1, 1}}, {0})));
    CHECK_FALSE(is_location_code(spec, W({}, {0, 1})));
    CHECK_FALSE(is_location_code(spec, W({{0, 1}}, {0})));
    CHECK_FALSE(is_location_code(spec, W({{1, 1}}, {5})));
}

TEST_CASE("encode and decode") {
    const CarpetSpec spec = oracle::desk1();
    std::mt19937_64 rng(2);
    CHECK(encode(W({{1, 1}}, {0, 1})) == "a:(1,1)|b:0 1");
    for (int rep = 0; rep < 200; ++rep) {
        const Word w = random_word(spec, std::uniform_int_distribution<std::size_t>(0, 30)(rng), rng);
        CHECK(decode(encode(w)) == w);
    }
    CHECK_THROWS_AS(decode("garbage"), CarpetError);
}

TEST_CASE("deep words keep a finite log measure") {
    const CarpetSpec spec = oracle::desk1();
    std::mt19937_64 rng(4);
    const Word w = random_word(spec, 60, rng);
    CHECK(std::isfinite(log_measure(spec, w)));
    CHECK(log_measure(spec, w) < 0.0);
}
