#include <catch_amalgamated.hpp>

#include <cmath>

#include "naifs/entropy.hpp"
#include "naifs/pressure.hpp"
#include "naifs/properties.hpp"

using namespace naifs;
using Catch::Approx;

namespace {

MapRef times(int k) { return make_map("circle_affine", {static_cast<double>(k)}); }
NaifsSchedule doubling() { return NaifsSchedule::constant({times(2)}); }
NaifsSchedule two_gen() { return NaifsSchedule::constant({times(2), times(3)}); }
Word zeros(std::size_t n) { return Word{1, std::vector<std::uint32_t>(n, 0)}; }

Word random_word(const NaifsSchedule& s, std::size_t n, Rng& rng) {
    Word w{1, {}};
    for (std::size_t j = 0; j < n; ++j) w.symbols.push_back(static_cast<std::uint32_t>(rng.below(s.level_size(1 + j))));
    return w;
}

const std::vector<Potential> kPotentials{Potential::zero(), Potential::constant(0.37), Potential::cos2pi(),
                                         Potential::hat(0.3, 0.2, 1.5)};

}  // namespace

TEST_CASE("Birkhoff sums have n+1 terms") {
    const auto d = doubling();
    CHECK(birkhoff_sum(d, zeros(4), 4, Potential::zero(), Point{0.3}) == 0.0);
    CHECK(birkhoff_sum(d, zeros(4), 4, Potential::constant(0.5), Point{0.3}) == Approx(2.5));
    CHECK(birkhoff_sum(d, zeros(2), 2, Potential::cos2pi(), Point{0.0}) == Approx(3.0));
    CHECK(birkhoff_sum(d, zeros(1), 1, Potential::cos2pi(), Point{0.25}) == Approx(std::cos(0.5 * M_PI) + std::cos(M_PI)));
    CHECK_THROWS_AS(birkhoff_sum(d, zeros(1), 2, Potential::zero(), Point{0.0}), InputError);
}

TEST_CASE("potential catalog") {
    CHECK(make_potential("hat", {0.5, 0.25, 2.0})(Point{0.5}, Space::interval()) == 2.0);
    CHECK(make_potential("hat", {0.05, 0.1, 1.0})(Point{0.95}, Space::circle()) == Approx(0.0).margin(1e-12));
    CHECK(make_potential("hat", {0.05, 0.2, 1.0})(Point{0.95}, Space::circle()) == Approx(0.5));
    CHECK_THROWS_AS(make_potential("hat", {0.5, 0.0, 1.0}), InputError);
    CHECK_THROWS_AS(make_potential("nope", {}), InputError);
    CHECK_THROWS_AS(make_potential("constant", {}), InputError);
    Rng rng(12);
    for (const auto& psi : kPotentials)
        for (int t = 0; t < 10000; ++t) {
            const Point x{rng.uniform()}, y{rng.uniform()};
            const double a = psi(x, Space::circle()), b = psi(y, Space::circle());
            REQUIRE(std::fabs(a) <= psi.sup_bound() + 1e-12);
            REQUIRE(std::fabs(a - b) <= psi.lipschitz_bound() * Space::circle().distance(x, y) + 1e-12);
        }
}

TEST_CASE("zero potential reduces to counts") {
    const Grid g(Space::circle(), 1.0 / 512);
    Rng rng(2);
    const auto s = two_gen();
    for (int t = 0; t < 8; ++t) {
        const std::size_t n = 1 + rng.below(5);
        const Word w = random_word(s, n, rng);
        const double eps = 0.03 + 0.2 * rng.uniform();
        CHECK(weighted_separated_sup(s, g, w, n, eps, Potential::zero()).value() ==
              Approx(static_cast<double>(separated_count(s, g, w, n, eps))).epsilon(1e-12));
        CHECK(weighted_spanning_inf(s, g, w, n, eps, Potential::zero()).value() ==
              Approx(static_cast<double>(spanning_count(s, g, w, n, eps))).epsilon(1e-12));
        CHECK(cover_pressure_sum(s, g, w, n, eps, Potential::zero()).value() ==
              Approx(static_cast<double>(cover_count(s, g, w, n, eps / 2))).epsilon(1e-12));
    }
}

TEST_CASE("hat potential on a 5-point interval grid against enumeration") {
    const auto s = NaifsSchedule::constant({make_map("identity", {}, Space::interval())});
    const Grid g(Space::interval(), 0.25);
    REQUIRE(g.size() == 5);
    const auto psi = Potential::hat(0.5, 0.5, 1.0);
    const std::size_t n = 2;
    const double eps = 0.3;
    std::vector<double> wt(5);
    for (std::size_t i = 0; i < 5; ++i) wt[i] = std::exp(3.0 * psi(g.point(i), g.space()));
    double best_p = 0.0, best_q = 1e300;
    for (unsigned m = 1; m < 32; ++m) {
        double sum = 0.0;
        bool separated = true, spanning = true;
        for (std::size_t i = 0; i < 5; ++i) {
            if (!((m >> i) & 1u)) continue;
            sum += wt[i];
            for (std::size_t j = i + 1; j < 5; ++j)
                if (((m >> j) & 1u) && 0.25 * static_cast<double>(j - i) <= eps) separated = false;
        }
        for (std::size_t i = 0; i < 5; ++i) {
            bool near = false;
            for (std::size_t j = 0; j < 5; ++j) near = near || (((m >> j) & 1u) && 0.25 * std::fabs(double(i) - double(j)) <= eps);
            spanning = spanning && near;
        }
        if (separated) best_p = std::max(best_p, sum);
        if (spanning) best_q = std::min(best_q, sum);
    }
    CHECK(weighted_separated_sup(s, g, zeros(n), n, eps, psi, true).value() == Approx(best_p).epsilon(1e-12));
    CHECK(weighted_spanning_inf(s, g, zeros(n), n, eps, psi, true).value() == Approx(best_q).epsilon(1e-12));
}

TEST_CASE("exact-mode relations on small grids") {
    const Grid g(Space::circle(), 1.0 / 20);
    Rng rng(41);
    const auto s = two_gen();
    for (int t = 0; t < 40; ++t) {
        const std::size_t n = 1 + rng.below(3);
        const Word w = random_word(s, n, rng);
        const double eps = 0.06 + 0.2 * rng.uniform();
        const double nn = static_cast<double>(n + 1);
        for (const auto& psi : kPotentials) {
            const double q = weighted_spanning_inf(s, g, w, n, eps, psi, true).value();
            const double p = weighted_separated_sup(s, g, w, n, eps, psi, true).value();
            REQUIRE(q > 0.0);
            REQUIRE(q <= p * (1 + 1e-12));
            REQUIRE(q <= std::exp(nn * psi.sup_bound()) * static_cast<double>(spanning_count(s, g, w, n, eps, true)) *
                             (1 + 1e-12));
            // Scale relation with the measured oscillation at eps/2.
            const double osc = orbit_oscillation(s, g, w, n, eps / 2, psi);
            REQUIRE(osc <= psi.lipschitz_bound() * eps / 2 + 1e-12);
            const double q_half = weighted_spanning_inf(s, g, w, n, eps / 2, psi, true).value();
            REQUIRE(p <= std::exp(nn * osc) * q_half * (1 + 1e-12));
            // Monotone in eps.
            const double e2 = eps * 0.6;
            REQUIRE(weighted_spanning_inf(s, g, w, n, e2, psi, true).value() >= q * (1 - 1e-12));
            REQUIRE(weighted_separated_sup(s, g, w, n, e2, psi, true).value() >= p * (1 - 1e-12));
            // Heuristics bracket the exact values.
            REQUIRE(weighted_separated_sup(s, g, w, n, eps, psi).value() <= p * (1 + 1e-12));
            REQUIRE(weighted_spanning_inf(s, g, w, n, eps, psi).value() >= q * (1 - 1e-12));
            REQUIRE(cover_pressure_sum(s, g, w, n, eps, psi).value() >= p * (1 - 1e-12));
        }
    }
}

TEST_CASE("constant potentials factor out") {
    const Grid g(Space::circle(), 1.0 / 20);
    const Grid big(Space::circle(), 1.0 / 300);
    Rng rng(43);
    const auto s = two_gen();
    for (int t = 0; t < 30; ++t) {
        const std::size_t n = 1 + rng.below(3);
        const Word w = random_word(s, n, rng);
        const double eps = 0.06 + 0.2 * rng.uniform();
        const double c = rng.uniform(-2.0, 2.0);
        const double f = std::exp(static_cast<double>(n + 1) * c);
        const auto k = Potential::constant(c);
        REQUIRE(weighted_spanning_inf(s, g, w, n, eps, k, true).value() ==
                Approx(f * static_cast<double>(spanning_count(s, g, w, n, eps, true))).epsilon(1e-12));
        REQUIRE(weighted_separated_sup(s, g, w, n, eps, k, true).value() ==
                Approx(f * static_cast<double>(separated_count(s, g, w, n, eps, true))).epsilon(1e-12));
        REQUIRE(cover_pressure_sum(s, big, w, n, eps, k).value() ==
                Approx(f * cover_pressure_sum(s, big, w, n, eps, Potential::zero()).value()).epsilon(1e-12));
    }
}

TEST_CASE("variation on dynamical balls") {
    const Grid g(Space::circle(), 1.0 / 1024);
    const double eps = 0.05;
    CHECK(variation(doubling(), g, zeros(5), 5, eps, Potential::constant(2.0)) == 0.0);
    const auto id = NaifsSchedule::constant({make_map("identity", {})});
    const auto cos = Potential::cos2pi();
    const double vid = variation(id, g, zeros(4), 4, eps, cos);
    CHECK(vid <= 5.0 * cos.lipschitz_bound() * eps);
    CHECK(vid > 0.0);
    Rng rng(7);
    for (std::size_t n = 1; n <= 8; ++n) {
        const double v = variation(doubling(), g, zeros(n), n, eps, cos);
        CHECK(v <= 2.0 * cos.lipschitz_bound() * eps);
    }
}

TEST_CASE("pressure estimates") {
    const Grid g(Space::circle(), 1.0 / 16384);
    CountOptions o;
    const std::vector<double> eps{0.125, 0.0625};
    const std::vector<std::size_t> ns{2, 3, 4, 5, 6};
    const double h = entropy_estimate(averaged_counts(doubling(), g, eps, ns, o)).value;
    const auto zero = pressure_estimate(averaged_pressure(doubling(), g, eps, ns, Potential::zero(), o));
    CHECK(zero.value() == Approx(h).epsilon(1e-12));
    const auto shift = pressure_estimate(averaged_pressure(doubling(), g, eps, ns, Potential::constant(0.37), o));
    CHECK(shift.value() == Approx(h + 0.37).margin(0.02));
    const auto cos = pressure_estimate(averaged_pressure(doubling(), g, eps, ns, Potential::cos2pi(), o));
    CHECK(cos.value() >= h - 1.0);
    CHECK(cos.value() <= h + 1.0);

    const auto single = averaged_pressure(doubling(), g, {0.125}, {3}, Potential::cos2pi(), o);
    CHECK(single[0].log_p_se == 0.0);
    CHECK(single[0].q_mean() <= single[0].p_mean() * (1 + 1e-9));

    const Grid small(Space::circle(), 1.0 / 256);
    const auto two = averaged_pressure(two_gen(), small, {0.125}, {2}, Potential::cos2pi(), o);
    double sum = 0.0;
    for (std::uint32_t a = 0; a < 2; ++a)
        for (std::uint32_t b = 0; b < 2; ++b)
            sum += weighted_separated_sup(two_gen(), small, Word{1, {a, b}}, 2, 0.125, Potential::cos2pi()).value();
    CHECK(two[0].p_mean() == Approx(sum / 4.0).epsilon(1e-12));
}

TEST_CASE("fixed-scale pressure needs a certificate") {
    const Grid g(Space::circle(), 1.0 / 16384);
    CountOptions o;
    const auto cert = expansivity_check(doubling(), 0.2, {1.0 / 64});
    REQUIRE(cert.expansive);
    CHECK(cert.delta == 0.125);
    const std::vector<std::size_t> ns{2, 3, 4, 5, 6, 7};
    const auto zero = fixed_scale_pressure(doubling(), g, 0.1, cert, Potential::zero(), ns, o);
    CHECK(zero.value() == Approx(std::log(2.0)).margin(0.05));
    const auto c = fixed_scale_pressure(doubling(), g, 0.1, cert, Potential::constant(0.2), ns, o);
    CHECK(c.value() == Approx(zero.value() + 0.2).margin(1e-9));

    CHECK_THROWS_AS(fixed_scale_pressure(doubling(), g, 0.2, cert, Potential::zero(), ns, o), PreconditionError);
    CHECK_THROWS_AS(fixed_scale_pressure(two_gen(), g, 0.1, cert, Potential::zero(), ns, o), PreconditionError);
    const auto id = NaifsSchedule::constant({make_map("identity", {})});
    const auto bad = expansivity_check(id, 0.1, {0.05});
    CHECK_FALSE(bad.expansive);
    CHECK_THROWS_AS(fixed_scale_pressure(id, g, 0.05, bad, Potential::zero(), ns, o), PreconditionError);
}
