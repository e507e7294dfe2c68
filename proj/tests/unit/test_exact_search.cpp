#include <catch_amalgamated.hpp>

#include <limits>

#include "naifs/exact_search.hpp"
#include "naifs/random.hpp"

using namespace naifs;
using naifs::exact::Mask;

namespace {

// Exhaustive oracles over all 2^n subsets.
double brute_independent(const std::vector<Mask>& conflict, const std::vector<double>& w) {
    const std::size_t n = conflict.size();
    double best = 0.0;
    for (Mask s = 0; s < (Mask{1} << n); ++s) {
        bool ok = true;
        double v = 0.0;
        for (std::size_t i = 0; i < n && ok; ++i)
            if ((s >> i) & 1u) {
                ok = !(conflict[i] & s & ~(Mask{1} << i));
                v += w[i];
            }
        if (ok) best = std::max(best, v);
    }
    return best;
}

double brute_cover(const std::vector<Mask>& ball, const std::vector<double>& w) {
    const std::size_t n = ball.size();
    const Mask all = (Mask{1} << n) - 1;
    double best = std::numeric_limits<double>::infinity();
    for (Mask s = 0; s <= all; ++s) {
        Mask cov = 0;
        double v = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if ((s >> i) & 1u) {
                cov |= ball[i];
                v += w[i];
            }
        if (cov == all) best = std::min(best, v);
    }
    return best;
}

}  // namespace

TEST_CASE("independent sets match brute force") {
    Rng rng(101);
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 1 + rng.below(14);
        std::vector<Mask> conflict(n, 0);
        const double p = rng.uniform();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (rng.uniform() < p) {
                    conflict[i] |= Mask{1} << j;
                    conflict[j] |= Mask{1} << i;
                }
        std::vector<double> w(n, 1.0);
        if (t % 2) for (auto& x : w) x = 0.1 + rng.uniform();
        const auto sel = exact::max_weight_independent(conflict, w);
        REQUIRE(sel.value == Catch::Approx(brute_independent(conflict, w)));
        for (std::size_t i = 0; i < n; ++i)
            if ((sel.members >> i) & 1u) REQUIRE_FALSE(conflict[i] & sel.members);
    }
}

TEST_CASE("set covers match brute force") {
    Rng rng(202);
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 1 + rng.below(14);
        std::vector<Mask> ball(n, 0);
        const double p = 0.5 * rng.uniform();
        for (std::size_t i = 0; i < n; ++i) {
            ball[i] |= Mask{1} << i;
            for (std::size_t j = 0; j < n; ++j)
                if (rng.uniform() < p) ball[i] |= Mask{1} << j;
        }
        std::vector<double> w(n, 1.0);
        if (t % 2) for (auto& x : w) x = 0.1 + rng.uniform();
        const auto sel = exact::min_weight_cover(ball, w);
        REQUIRE(sel.value == Catch::Approx(brute_cover(ball, w)));
        Mask cov = 0;
        for (std::size_t i = 0; i < n; ++i)
            if ((sel.members >> i) & 1u) cov |= ball[i];
        REQUIRE(cov == (Mask{1} << n) - 1);
    }
}

TEST_CASE("size guard and degenerate inputs") {
    CHECK_THROWS_AS(exact::max_weight_independent(std::vector<Mask>(25, 0), std::vector<double>(25, 1.0)), InputError);
    CHECK_THROWS_AS(exact::min_weight_cover(std::vector<Mask>(25, 0), std::vector<double>(25, 1.0)), InputError);
    CHECK(exact::max_weight_independent({}, {}).size() == 0);
    CHECK_THROWS_AS(exact::min_weight_cover({0b01, 0b01}, {1.0, 1.0}), InputError);
    // 24 isolated points: all of them are independent.
    CHECK(exact::max_weight_independent(std::vector<Mask>(24, 0), std::vector<double>(24, 1.0)).size() == 24);
}
