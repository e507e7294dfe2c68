#include <catch_amalgamated.hpp>

#include <cmath>

#include "naifs/map_zoo.hpp"
#include "naifs/random.hpp"

using namespace naifs;
using Catch::Approx;

namespace {

Point eval(const MapRef& m, Point x) { return (*m)(x); }

}  // namespace

TEST_CASE("map values") {
    CHECK(eval(make_map("circle_affine", {2.0, 0.0}), Point{0.3})[0] == Approx(0.6));
    CHECK(eval(make_map("circle_affine", {3.0}), Point{0.5})[0] == Approx(0.5));
    CHECK(eval(make_map("pomeau_manneville", {0.5}), Point{0.25})[0] == Approx(0.25 + std::sqrt(2.0) * std::pow(0.25, 1.5)).epsilon(1e-14));
    CHECK(eval(make_map("pomeau_manneville", {0.5}), Point{0.25})[0] == Approx(0.426776695).epsilon(1e-9));
    CHECK(eval(make_map("pomeau_manneville", {0.5}), Point{0.75})[0] == Approx(0.5));
    CHECK(eval(make_map("square", {}, Space::interval()), Point{0.5})[0] == 0.25);
    CHECK(eval(make_map("shift_scale", {0.3, 1.3}, Space::interval()), Point{1.0})[0] == Approx(1.0));
    CHECK(eval(make_map("half_shift", {0.0}, Space::interval()), Point{0.5})[0] == 0.25);
    CHECK(eval(make_map("rotation", {0.25}), Point{0.9})[0] == Approx(0.15));
    const Point t = eval(make_map("torus_endo", {3, 1, 1, 2}), Point{0.1, 0.3});
    CHECK(t[0] == Approx(0.6));
    CHECK(t[1] == Approx(0.7));
}

TEST_CASE("construction errors") {
    CHECK_THROWS_AS(make_map("torus_endo", {2, 1, 1, 1}), InputError);  // eigenvalue (3 - sqrt 5)/2
    CHECK_THROWS_AS(make_map("torus_endo", {2, 4, 1, 2}), InputError);  // singular
    CHECK_THROWS_AS(make_map("pomeau_manneville", {0.0}), InputError);
    CHECK_THROWS_AS(make_map("pomeau_manneville", {1.0}), InputError);
    CHECK_THROWS_AS(make_map("circle_affine", {0.0}), InputError);
    CHECK_THROWS_AS(make_map("circle_affine", {2.5}), InputError);
    CHECK_THROWS_AS(make_map("no_such_family", {}), InputError);
    CHECK_THROWS_AS(make_map("square", {}, Space::circle()), InputError);
}

TEST_CASE("derivatives") {
    auto d3 = derivative(make_map("circle_affine", {3.0}), Point{0.7});
    REQUIRE(d3);
    CHECK((*d3)(0, 0) == 3.0);
    auto pm = make_map("pomeau_manneville", {0.5});
    auto dp = derivative(pm, Point{0.25});
    REQUIRE(dp);
    CHECK((*dp)(0, 0) == Approx(1.0 + 1.5 * std::sqrt(2.0) * 0.5).epsilon(1e-12));
    CHECK((*dp)(0, 0) == Approx(2.0606601718).epsilon(1e-9));
    CHECK_FALSE(derivative(pm, Point{0.5}).has_value());
    auto da = derivative(make_map("torus_endo", {3, 1, 1, 2}), Point{0.2, 0.2});
    REQUIRE(da);
    CHECK((*da)(0, 0) == 3.0);
    CHECK((*da)(0, 1) == 1.0);
    CHECK((*da)(1, 1) == 2.0);
}

TEST_CASE("inverse branches") {
    auto b2 = inverse_branches(make_map("circle_affine", {2.0}), Point{0.5});
    REQUIRE(b2.size() == 2);
    CHECK(b2[0][0] == Approx(0.25));
    CHECK(b2[1][0] == Approx(0.75));
    auto b3 = inverse_branches(make_map("circle_affine", {3.0}), Point{0.0});
    REQUIRE(b3.size() == 3);
    CHECK(b3[0][0] == Approx(0.0).margin(1e-15));
    CHECK(b3[1][0] == Approx(1.0 / 3));
    CHECK(b3[2][0] == Approx(2.0 / 3));
    auto bt = inverse_branches(make_map("torus_endo", {2, 0, 0, 2}), Point{0.5, 0.5});
    REQUIRE(bt.size() == 4);
    for (const auto& p : bt) {
        CHECK((p[0] == Approx(0.25) || p[0] == Approx(0.75)));
        CHECK((p[1] == Approx(0.25) || p[1] == Approx(0.75)));
    }
    CHECK(inverse_branches(make_map("torus_endo", {3, 1, 1, 2}), Point{0.3, 0.6}).size() == 5);
    CHECK_THROWS_AS(inverse_branches(make_map("square", {}, Space::interval()), Point{0.5}), UnsupportedCapability);
}

TEST_CASE("preimages map back to the point") {
    Rng rng(21);
    const std::vector<MapRef> maps{make_map("circle_affine", {2.0}), make_map("circle_affine", {3.0, 0.37}),
                                   make_map("torus_endo", {3, 1, 1, 2}), make_map("torus_endo", {2, 0, 0, 2}),
                                   make_map("pomeau_manneville", {0.4})};
    for (const auto& m : maps) {
        const Space sp = m->space();
        for (int t = 0; t < 500; ++t) {
            Point y;
            y.dim = sp.dim();
            for (int a = 0; a < y.dim; ++a) y[a] = rng.uniform();
            const auto pre = inverse_branches(m, y);
            REQUIRE(pre.size() == static_cast<std::size_t>(m->info().degree));
            for (const auto& x : pre) REQUIRE(sp.distance((*m)(x), y) <= 1e-12);
        }
    }
}

TEST_CASE("expansion on rho-balls and contracting branches") {
    Rng rng(8);
    for (int k = 2; k <= 5; ++k) {
        auto m = make_map("circle_affine", {static_cast<double>(k)});
        const double rho = m->info().rho;
        CHECK(rho == Approx(1.0 / (4 * k)));
        CHECK(m->info().sigma == k);
        const Space sp = m->space();
        for (int t = 0; t < 2000; ++t) {
            const Point x{rng.uniform()};
            const Point y = sp.canonical(Point{x[0] + rng.uniform(-rho, rho)});
            REQUIRE(sp.distance((*m)(x), (*m)(y)) >= k * sp.distance(x, y) - 1e-12);
            // Local inverse along x is a 1/k contraction.
            const Point fy = (*m)(y);
            const Point back = m->local_inverse(x, fy);
            REQUIRE(sp.distance(back, y) <= 1e-12);
        }
    }
}

TEST_CASE("monotone family scan") {
    const std::vector<MapRef> maps{make_map("square", {}, Space::interval()), make_map("power", {3.5}, Space::interval()),
                                   make_map("half_shift", {0.4}, Space::interval()),
                                   make_map("shift_scale", {0.3, 1.3}, Space::interval()),
                                   make_map("tabulated", {0.0, 0.1, 0.5, 0.55, 1.0}, Space::interval())};
    for (const auto& m : maps) {
        REQUIRE(m->info().monotone);
        double prev = -1.0;
        for (int i = 0; i <= 10000; ++i) {
            const double v = (*m)(Point{i / 10000.0})[0];
            REQUIRE(v >= prev);
            REQUIRE(v >= 0.0);
            REQUIRE(v <= 1.0);
            prev = v;
        }
    }
    CHECK_THROWS_AS(make_map("tabulated", {0.0, 0.6, 0.5}, Space::interval()), InputError);
}

TEST_CASE("Pomeau-Manneville is continuous on the circle at 1/2") {
    auto m = make_map("pomeau_manneville", {0.7});
    const Space sp = m->space();
    const double left = (*m)(Point{0.5 - 1e-13})[0];
    const double right = (*m)(Point{0.5})[0];
    CHECK(sp.distance(Point{left}, Point{right}) <= 1e-12);
    CHECK((*m)(Point{0.0})[0] == 0.0);
    CHECK(m->info().weakly_expanding);
    CHECK_FALSE(m->info().expanding);
}

TEST_CASE("metadata") {
    auto rot = make_map("rotation", {0.1});
    CHECK(rot->info().isometry);
    CHECK_FALSE(rot->info().expanding);
    auto cat = make_map("torus_endo", {3, 1, 1, 2});
    CHECK(cat->info().expanding);
    CHECK(cat->info().sigma == Approx(1.25));  // 1 / ||A^{-1}||_inf
    CHECK(cat->info().degree == 5);
    auto id = make_map("identity", {}, Space::interval());
    CHECK(id->info().isometry);
    CHECK(id->space() == Space::interval());
}
