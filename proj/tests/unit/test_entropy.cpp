#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>

#include "naifs/entropy.hpp"

using namespace naifs;
using Catch::Approx;

namespace {

MapRef times(int k) { return make_map("circle_affine", {static_cast<double>(k)}); }
NaifsSchedule doubling() { return NaifsSchedule::constant({times(2)}); }
NaifsSchedule two_gen() { return NaifsSchedule::constant({times(2), times(3)}); }
NaifsSchedule interval_identity() { return NaifsSchedule::constant({make_map("identity", {}, Space::interval())}); }
Word zeros(std::size_t n) { return Word{1, std::vector<std::uint32_t>(n, 0)}; }

Word random_word(const NaifsSchedule& s, std::size_t n, Rng& rng) {
    Word w{1, {}};
    for (std::size_t j = 0; j < n; ++j) w.symbols.push_back(static_cast<std::uint32_t>(rng.below(s.level_size(1 + j))));
    return w;
}

// Test-side maximum independent set on up to 64 vertices (plain include/exclude recursion).
struct Mis {
    std::vector<std::uint64_t> adj;
    std::size_t best = 0;
    void run(std::uint64_t cand, std::size_t size) {
        if (!cand) {
            best = std::max(best, size);
            return;
        }
        if (size + static_cast<std::size_t>(std::popcount(cand)) <= best) return;
        const int v = std::countr_zero(cand);
        run(cand & ~adj[static_cast<std::size_t>(v)] & ~(std::uint64_t{1} << v), size + 1);
        run(cand & ~(std::uint64_t{1} << v), size);
    }
};

std::vector<std::size_t> all_of(const Grid& g) {
    std::vector<std::size_t> v(g.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = i;
    return v;
}

}  // namespace

TEST_CASE("identity on an 11-point interval grid") {
    const auto s = interval_identity();
    const Grid g(Space::interval(), 0.1);
    REQUIRE(g.size() == 11);
    const auto kept = separated_set(s, g, zeros(3), 3, 0.15);
    REQUIRE(kept.size() == 6);
    for (std::size_t i = 0; i < 6; ++i) CHECK(g.coords(kept[i])[0] == Approx(0.2 * static_cast<double>(i)));
    CHECK(separated_count(s, g, zeros(3), 3, 0.15) == 6);
    CHECK(separated_count(s, g, zeros(3), 3, 0.15, true) == 6);
    CHECK(spanning_count(s, g, zeros(3), 3, 0.15, true) == 4);
    CHECK(spanning_count(s, g, zeros(3), 3, 0.15) >= 4);
    CHECK(separated_count(s, g, zeros(3), 3, 1.5) == 1);
    CHECK(spanning_count(s, g, zeros(3), 3, 1.0) == 1);
    CHECK(cover_count(s, g, zeros(3), 3, 1.01) == 1);
    CHECK_THROWS_AS(separated_count(s, Grid(Space::interval(), 0.01), zeros(1), 1, 0.1, true), InputError);
}

TEST_CASE("identity circle cover at 0.26") {
    const auto s = NaifsSchedule::constant({make_map("identity", {})});
    const Grid g(Space::circle(), 1.0 / 64);
    CHECK(cover_count(s, g, zeros(2), 2, 0.26) == 2);
    // Oracle: no single open ball covers, some pair does.
    auto covers = [&](std::vector<int> centres) {
        for (int i = 0; i < 64; ++i) {
            bool hit = false;
            for (int c : centres) hit = hit || std::min(std::abs(i - c), 64 - std::abs(i - c)) < 0.26 * 64;
            if (!hit) return false;
        }
        return true;
    };
    bool one = false, two = false;
    for (int a = 0; a < 64; ++a) {
        one = one || covers({a});
        for (int b = a + 1; b < 64; ++b) two = two || covers({a, b});
    }
    CHECK_FALSE(one);
    CHECK(two);
}

TEST_CASE("doubling n=1 separated count at 0.3 against an exact oracle") {
    const Grid g(Space::circle(), 1.0 / 64);
    // Integer arithmetic in units of 1/64: conflict iff max(d, d(2x, 2y)) <= 19.2.
    auto cd = [](int a, int b) { return std::min(std::abs(a - b), 64 - std::abs(a - b)); };
    Mis mis;
    mis.adj.assign(64, 0);
    for (int i = 0; i < 64; ++i)
        for (int j = 0; j < 64; ++j)
            if (i != j && std::max(cd(i, j), cd(2 * i % 64, 2 * j % 64)) <= 19) mis.adj[static_cast<std::size_t>(i)] |= std::uint64_t{1} << j;
    mis.run(~std::uint64_t{0}, 0);
    CHECK(mis.best == 6);
    const std::size_t greedy = separated_count(doubling(), g, zeros(1), 1, 0.3);
    CHECK(greedy <= mis.best);
    CHECK(greedy >= 3);
    CHECK(spanning_count(doubling(), g, zeros(1), 1, 0.3) <= greedy);
}

TEST_CASE("doubling cover counts roughly double with n") {
    const Grid g(Space::circle(), 1.0 / 4096);
    double prev = 0.0;
    for (std::size_t n = 2; n <= 8; ++n) {
        const double c = static_cast<double>(cover_count(doubling(), g, zeros(n), n, 1.0 / 16));
        if (n > 2) {
            CHECK(c / prev >= 1.8);
            CHECK(c / prev <= 2.2);
        }
        prev = c;
    }
}

TEST_CASE("averaged counts") {
    const Grid g(Space::circle(), 1.0 / 256);
    CountOptions o;
    o.budget = 16;
    const auto single = averaged_counts(doubling(), g, {0.125}, {3}, o);
    REQUIRE(single.size() == 1);
    CHECK(single[0].s_mean == static_cast<double>(separated_count(doubling(), g, zeros(3), 3, 0.125)));
    CHECK(single[0].s_stderr == 0.0);
    CHECK_FALSE(single[0].sampled);

    const auto two = averaged_counts(two_gen(), g, {0.125}, {2}, o);
    double sum = 0.0;
    for (std::uint32_t a = 0; a < 2; ++a)
        for (std::uint32_t b = 0; b < 2; ++b) sum += static_cast<double>(separated_count(two_gen(), g, Word{1, {a, b}}, 2, 0.125));
    CHECK(two[0].s_mean == sum / 4.0);
    CHECK(two[0].ensemble_size == 4);

    // Two seeds agree within three combined standard errors.
    const Grid fine(Space::circle(), 1.0 / 4096);
    o.budget = 32;
    o.seed = 1;
    const auto a = averaged_counts(two_gen(), fine, {0.125}, {6}, o);
    o.seed = 2;
    const auto b = averaged_counts(two_gen(), fine, {0.125}, {6}, o);
    REQUIRE(a[0].sampled);
    CHECK(a[0].s_stderr > 0.0);
    CHECK(std::fabs(a[0].s_mean - b[0].s_mean) <= 3.0 * std::hypot(a[0].s_stderr, b[0].s_stderr));
    CHECK(a[0].s_mean >= 1.0);
    CHECK(a[0].r_mean >= 1.0);
    CHECK_THROWS_AS(averaged_counts(two_gen(), g, {}, {2}, o), InputError);
}

TEST_CASE("entropy estimates") {
    const Grid g(Space::circle(), 1.0 / 16384);
    CountOptions o;
    const auto recs = averaged_counts(doubling(), g, {0.125, 0.0625}, {2, 3, 4, 5, 6}, o);
    const auto est = entropy_estimate(recs);
    CHECK(est.value == Approx(std::log(2.0)).margin(0.05));

    const auto id = entropy_estimate(averaged_counts(NaifsSchedule::constant({make_map("identity", {})}), g,
                                                     {0.125, 0.0625}, {2, 3, 4}, o));
    CHECK(id.value == Approx(0.0).margin(1e-12));

    CHECK_THROWS_AS(entropy_estimate(averaged_counts(doubling(), g, {0.125}, {2, 3, 4}, o)), InputError);
    CHECK_THROWS_AS(entropy_estimate(averaged_counts(doubling(), g, {0.125, 0.0625}, {2, 3}, o)), InputError);

    // A grid too coarse for the word lengths saturates every row.
    const Grid tiny(Space::circle(), 1.0 / 16);
    CHECK_THROWS_AS(entropy_estimate(averaged_counts(doubling(), tiny, {0.125, 0.0625}, {6, 7, 8}, o)), SaturationError);
}

TEST_CASE("exact sandwich r(eps) <= s(eps) <= r(eps/2)") {
    const Grid g(Space::circle(), 1.0 / 20);
    REQUIRE(g.size() == 20);
    Rng rng(31);
    const auto s = two_gen();
    for (int t = 0; t < 60; ++t) {
        const std::size_t n = 1 + rng.below(3);
        const Word w = random_word(s, n, rng);
        const double eps = 0.05 + 0.25 * rng.uniform();
        const auto sv = separated_count(s, g, w, n, eps, true);
        REQUIRE(spanning_count(s, g, w, n, eps, true) <= sv);
        REQUIRE(sv <= spanning_count(s, g, w, n, eps / 2, true));
        REQUIRE(separated_count(s, g, w, n, eps) <= sv);
        REQUIRE(spanning_count(s, g, w, n, eps) >= spanning_count(s, g, w, n, eps, true));
    }
}

TEST_CASE("greedy separated sets are separated and spanning") {
    const Grid g(Space::circle(), 1.0 / 512);
    Rng rng(5);
    const auto s = two_gen();
    for (int t = 0; t < 10; ++t) {
        const std::size_t n = 1 + rng.below(5);
        const Word w = random_word(s, n, rng);
        const double eps = 0.02 + 0.2 * rng.uniform();
        const auto kept = separated_set(s, g, w, n, eps);
        for (std::size_t a = 0; a < kept.size(); ++a)
            for (std::size_t b = a + 1; b < kept.size(); ++b)
                REQUIRE(bowen_distance(s, w, n, g.point(kept[a]), g.point(kept[b])) > eps);
        for (std::size_t i = 0; i < g.size(); i += 7) {
            bool near = false;
            for (std::size_t k : kept) near = near || bowen_distance(s, w, n, g.point(i), g.point(k)) <= eps;
            REQUIRE(near);
        }
    }
}

TEST_CASE("counts grow as eps shrinks") {
    const Grid g(Space::circle(), 1.0 / 512);
    Rng rng(6);
    const auto s = two_gen();
    for (int t = 0; t < 10; ++t) {
        const Word w = random_word(s, 4, rng);
        const double e1 = 0.05 + 0.2 * rng.uniform();
        const double e2 = e1 * (0.3 + 0.6 * rng.uniform());
        REQUIRE(separated_count(s, g, w, 4, e2) >= separated_count(s, g, w, 4, e1));
        REQUIRE(spanning_count(s, g, w, 4, e2) >= spanning_count(s, g, w, 4, e1));
    }
}

TEST_CASE("monotone interval maps obey the linear count bound") {
    const auto s = NaifsSchedule::constant({make_map("square", {}, Space::interval()),
                                            make_map("half_shift", {0.5}, Space::interval()),
                                            make_map("shift_scale", {0.3, 1.3}, Space::interval())});
    const Grid g(Space::interval(), 1.0 / 1024);
    CountOptions o;
    o.budget = 64;
    o.keep_per_word = true;
    for (const auto& rec : averaged_counts(s, g, {0.125, 0.05}, {2, 4, 6, 8}, o)) {
        const double bound = 1.0 + static_cast<double>(rec.n + 1) * std::floor(1.0 / rec.eps);
        for (double v : rec.per_word_s) REQUIRE(v <= bound);
    }
}

TEST_CASE("cover count of a union is at most the sum") {
    const Grid g(Space::circle(), 1.0 / 24);
    std::vector<std::size_t> left, right;
    for (std::size_t i = 0; i < g.size(); ++i) (i < 12 ? left : right).push_back(i);
    const auto whole = all_of(g);
    Rng rng(9);
    const auto s = two_gen();
    for (int t = 0; t < 20; ++t) {
        const Word w = random_word(s, 2, rng);
        const double eps = 0.05 + 0.2 * rng.uniform();
        const auto nx = cover_count(s, g, w, 2, eps, true, &whole);
        REQUIRE(nx <= cover_count(s, g, w, 2, eps, true, &left) + cover_count(s, g, w, 2, eps, true, &right));
    }
}

TEST_CASE("blocking and shifting at estimator level") {
    const Grid g(Space::circle(), 1.0 / 4096);
    CountOptions o;
    const auto base = entropy_estimate(averaged_counts(doubling(), g, {0.125, 0.0625}, {2, 3, 4, 5, 6}, o));
    const auto blk = entropy_estimate(averaged_counts(blocked(doubling(), 2), g, {0.125, 0.0625}, {1, 2, 3}, o));
    CHECK(blk.value <= 2.0 * base.value + std::hypot(blk.uncertainty, 2.0 * base.uncertainty) + 0.05);

    const auto sched = NaifsSchedule::constant_tail({{make_map("identity", {})}, {make_map("identity", {})}, {times(2)}});
    const auto a = asymptotic_entropy(sched, Grid(Space::circle(), 1.0 / 16384), {0.125, 0.0625}, {2, 3, 4, 5, 6},
                                      {1, 2, 3, 4}, o, 0.05);
    CHECK(a.monotone);
    CHECK(a.value == Approx(std::log(2.0)).margin(0.05));
    CHECK(a.chaotic);
    CHECK_THROWS_AS(asymptotic_entropy(sched, g, {0.125, 0.0625}, {2, 3, 4}, {2, 1}, o), InputError);
}

TEST_CASE("nonwandering sets") {
    const Grid iv(Space::interval(), 1.0 / 256);
    const auto half = NaifsSchedule::constant({make_map("affine", {0.5, 0.0}, Space::interval())});
    const double r = 0.05;
    const auto nw = nonwandering_set(half, iv, r, 4, 2, 16, 1, 1);
    REQUIRE_FALSE(nw.points.empty());
    for (std::size_t i : nw.points) CHECK(iv.coords(i)[0] < r + 2.0 * iv.spacing());
    CHECK(nw.marked[0] == 1);

    // Doubling permutes a grid of 127 points (2^7 = 1 mod 127), so every grid point is periodic.
    const Grid c(Space::circle(), 1.0 / 127);
    const auto dbl = nonwandering_set(doubling(), c, 0.05, 8, 1, 4, 1, 1);
    CHECK(dbl.points.size() == c.size());
    const auto id = nonwandering_set(NaifsSchedule::constant({make_map("identity", {})}), c, 0.05, 1, 1, 4, 1, 1);
    CHECK(id.points.size() == c.size());
    CHECK_THROWS_AS(nonwandering_set(doubling(), c, 0.01, 2, 1, 4, 1, 1), InputError);
}

TEST_CASE("entropy point probes") {
    const Grid g(Space::circle(), 1.0 / 1024);
    CountOptions o;
    const auto whole = entropy_point_probe(doubling(), g, Point{0.3}, 0.5, {0.125, 0.0625}, {2, 3, 4, 5}, o);
    CHECK(whole.gap == 0.0);
    CHECK(whole.y_size == g.size());

    const Grid iv(Space::interval(), 1.0 / 1024);
    const auto half = NaifsSchedule::constant({make_map("affine", {0.5, 0.0}, Space::interval())});
    const auto c = entropy_point_probe(half, iv, Point{0.6}, 0.1, {0.125, 0.0625}, {2, 3, 4, 5}, o);
    CHECK(c.local.value == Approx(0.0).margin(1e-12));
    CHECK(c.global.value == Approx(0.0).margin(1e-12));
    CHECK_THROWS_AS(entropy_point_probe(doubling(), Grid(Space::circle(), 1.0 / 64), Point{0.3}, 0.07, {0.125, 0.0625},
                                        {2, 3, 4}, o),
                    ResolutionError);
}

TEST_CASE("counts are deterministic across thread counts") {
    const Grid g(Space::circle(), 1.0 / 512);
    CountOptions o;
    o.budget = 32;
    o.seed = 77;
    o.threads = 1;
    const auto a = averaged_counts(two_gen(), g, {0.125, 0.0625}, {3, 7}, o);
    o.threads = 3;
    const auto b = averaged_counts(two_gen(), g, {0.125, 0.0625}, {3, 7}, o);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].s_mean == b[i].s_mean);
        CHECK(a[i].s_stderr == b[i].s_stderr);
        CHECK(a[i].r_mean == b[i].r_mean);
        CHECK(a[i].cover_mean == b[i].cover_mean);
    }
}
