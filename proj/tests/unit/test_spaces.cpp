#include <catch_amalgamated.hpp>

#include <cmath>

#include "naifs/random.hpp"
#include "naifs/spaces.hpp"

using namespace naifs;
using Catch::Approx;

TEST_CASE("distance on each space kind") {
    CHECK(Space::circle().distance(Point{0.1}, Point{0.9}) == Approx(0.2).margin(1e-15));
    CHECK(Space::interval().distance(Point{0.25}, Point{0.75}) == 0.5);
    CHECK(Space::torus(2).distance(Point{0.0, 0.4}, Point{0.9, 0.5}) == Approx(0.1).margin(1e-15));
    CHECK_THROWS_AS(Space::torus(2).distance(Point{0.1}, Point{0.1, 0.2}), InputError);
}

TEST_CASE("diameters") {
    CHECK(Space::interval().diameter() == 1.0);
    CHECK(Space::circle().diameter() == 0.5);
    CHECK(Space::torus(3).diameter() == 0.5);
}

TEST_CASE("grid sizes and order") {
    const Grid c(Space::circle(), 0.25);
    REQUIRE(c.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(c.coords(i)[0] == 0.25 * static_cast<double>(i));

    const Grid iv(Space::interval(), 0.5);
    REQUIRE(iv.size() == 3);
    CHECK(iv.coords(2)[0] == 1.0);

    const Grid t(Space::torus(2), 0.5);
    REQUIRE(t.size() == 4);
    CHECK(t.point(1) == Point{0.0, 0.5});  // lexicographic
    CHECK(t.point(2) == Point{0.5, 0.0});

    CHECK_THROWS_AS(Grid(Space::circle(), 0.0), InputError);
    CHECK_THROWS_AS(Grid(Space::circle(), -1.0), InputError);
    CHECK(Grid(Space::circle(), 1.0 / 4096).size() == 4096);
    CHECK(Grid(Space::interval(), 1.0 / 1024).size() == 1025);
}

TEST_CASE("ball_points is an open ball") {
    const Grid g(Space::circle(), 0.25);
    const auto b = ball_points(g, Point{0.0}, 0.3);
    REQUIRE(b.size() == 3);
    CHECK(b == std::vector<std::size_t>{0, 1, 3});
    CHECK(ball_points(g, Point{0.0}, 0.25) == std::vector<std::size_t>{0});
    CHECK(closed_ball_points(g, Point{0.0}, 0.25).size() == 3);
    CHECK(ball_points(g, Point{0.1}, 10.0).size() == 4);
    CHECK(ball_points(g, Point{0.125}, 0.1).empty());
}

TEST_CASE("ball_points agrees with a linear scan") {
    Rng rng(5);
    for (const Space sp : {Space::interval(), Space::circle(), Space::torus(2)}) {
        const Grid g(sp, sp.dim() == 1 ? 1.0 / 64 : 1.0 / 16);
        for (int t = 0; t < 50; ++t) {
            Point c;
            c.dim = sp.dim();
            for (int a = 0; a < c.dim; ++a) c[a] = rng.uniform();
            const double r = rng.uniform(0.0, 0.3);
            std::vector<std::size_t> scan;
            for (std::size_t i = 0; i < g.size(); ++i)
                if (sp.distance(g.point(i), c) < r) scan.push_back(i);
            CHECK(ball_points(g, c, r) == scan);
        }
    }
}

TEST_CASE("metric axioms on random triples") {
    Rng rng(11);
    for (const Space sp : {Space::interval(), Space::circle(), Space::torus(2), Space::torus(3)}) {
        for (int t = 0; t < 10000; ++t) {
            Point x, y, z;
            x.dim = y.dim = z.dim = sp.dim();
            for (int a = 0; a < sp.dim(); ++a) {
                x[a] = rng.uniform();
                y[a] = rng.uniform();
                z[a] = rng.uniform();
            }
            const double xy = sp.distance(x, y), yz = sp.distance(y, z), xz = sp.distance(x, z);
            REQUIRE(xy >= 0.0);
            REQUIRE(xy == sp.distance(y, x));
            REQUIRE(xz <= xy + yz);
            REQUIRE(xy <= sp.diameter());
        }
    }
}

TEST_CASE("canonicalization") {
    const Space c = Space::circle();
    CHECK(c.canonical(Point{1.25}) == Point{0.25});
    CHECK(c.canonical(Point{-0.25}) == Point{0.75});
    CHECK(c.distance(Point{0.3}, c.canonical(Point{3.3})) == Approx(0.0).margin(1e-15));
    const Point p = c.canonical(Point{7.6});
    CHECK(c.canonical(p) == p);
    CHECK(Space::interval().canonical(Point{1.5}) == Point{1.0});
    CHECK(Space::torus(2).canonical(Point{-0.5, 2.25}) == Point{0.5, 0.25});
}

TEST_CASE("grids cover the space") {
    Rng rng(3);
    for (const Space sp : {Space::interval(), Space::circle(), Space::torus(2)}) {
        const double h = sp.dim() == 1 ? 1.0 / 100 : 1.0 / 20;
        const Grid g(sp, h);
        for (int t = 0; t < 2000; ++t) {
            Point p;
            p.dim = sp.dim();
            for (int a = 0; a < p.dim; ++a) p[a] = rng.uniform();
            REQUIRE(sp.distance(p, g.point(g.nearest(p))) <= g.spacing() / 2.0 + 1e-12);
        }
    }
}
