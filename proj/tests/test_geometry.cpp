#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "setreg/geometry.hpp"
#include "setreg/numeric.hpp"

using namespace setreg;
using doctest::Approx;

namespace {

std::mt19937_64 rng(271828182845904523ULL);

Vec random_point(int dim, double scale) {
    std::uniform_real_distribution<double> u(-scale, scale);
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v[i] = u(rng);
    return v;
}

// Random primitive trees over R^2/R^3 for the oracle-equivalence checks.
SetPtr random_set(int dim, int depth = 0) {
    std::uniform_int_distribution<int> pick(0, depth >= 2 ? 5 : 7);
    switch (pick(rng)) {
        case 0: {
            Vec a = random_point(dim, 1.0);
            if (norm2(a) < 1e-3) a[0] = 1.0;
            return make_halfspace(a, std::uniform_real_distribution<double>(-1, 1)(rng));
        }
        case 1:
            return make_ball(random_point(dim, 1.0),
                             std::uniform_real_distribution<double>(0.1, 1.5)(rng));
        case 2: {
            Vec lo = random_point(dim, 1.0), hi = lo;
            for (int i = 0; i < dim; ++i)
                hi[i] += std::uniform_real_distribution<double>(0.1, 2.0)(rng);
            return make_box(lo, hi);
        }
        case 3: {
            std::vector<Vec> basis;
            int k = std::uniform_int_distribution<int>(0, dim - 1)(rng);
            for (int i = 0; i < k; ++i) basis.push_back(random_point(dim, 1.0));
            try {
                return make_affine(random_point(dim, 1.0), basis);
            } catch (const input_error&) {
                return make_affine(random_point(dim, 1.0), {});
            }
        }
        case 4: {
            std::vector<Halfspace> rows;
            Vec inside = random_point(dim, 0.5);
            int k = std::uniform_int_distribution<int>(2, 4)(rng);
            for (int i = 0; i < k; ++i) {
                Vec a = random_point(dim, 1.0);
                if (norm2(a) < 1e-3) a[0] = 1.0;
                rows.push_back({a, dot(a, inside) +
                                       std::uniform_real_distribution<double>(0.05, 1.0)(rng)});
            }
            return make_polyhedron(rows);
        }
        case 5:
            if (dim == 2)
                return make_parabola_epi(std::uniform_real_distribution<double>(0.3, 3.0)(rng));
            return make_ball(random_point(dim, 1.0), 0.7);
        case 6:
            return make_union({random_set(dim, depth + 1), random_set(dim, depth + 1)});
        default:
            return make_translate(random_set(dim, depth + 1), random_point(dim, 0.7));
    }
}

}  // namespace

TEST_CASE("halfspace distance and projection") {
    SetPtr h = make_halfspace(Vec{0, 1}, 0.0);
    CHECK(distance(h, Vec{3, 2}) == Approx(2.0));
    CHECK(distance(h, Vec{3, -2}) == 0.0);
    Vec pr = project(h, Vec{3, 2});
    CHECK(pr[0] == Approx(3.0));
    CHECK(pr[1] == Approx(0.0));
}

TEST_CASE("union distance is the min over children") {
    SetPtr u = make_union({make_halfspace(Vec{1, 0}, 0), make_halfspace(Vec{0, 1}, 0)});
    CHECK(distance(u, Vec{1, 1}) == Approx(1.0));
    CHECK(distance(u, Vec{2, 1}) == Approx(1.0));
    CHECK(distance(u, Vec{-1, 5}) == 0.0);
}

TEST_CASE("ball and affine projections") {
    SetPtr b = make_ball(Vec{0, 0}, 1.0);
    Vec pr = project(b, Vec{2, 0});
    CHECK(pr[0] == Approx(1.0));
    CHECK(pr[1] == Approx(0.0));
    SetPtr a = make_affine(Vec{0, 0}, {Vec{1, 0}});
    Vec pa = project(a, Vec{3, 4});
    CHECK(pa[0] == Approx(3.0));
    CHECK(pa[1] == Approx(0.0));
    CHECK(distance(a, Vec{3, 4}) == Approx(4.0));
}

TEST_CASE("parabola epigraph boundary and cubic projection") {
    SetPtr pe = make_parabola_epi(1.0);
    CHECK(distance(pe, Vec{std::sqrt(0.01), 0.01}) == Approx(0.0).epsilon(1e-12));
    CHECK(membership(pe, Vec{1, 0.5}, 1e-6) == false);
    // x = (0,-1): the cubic reduces to u(2u^2 + 3) = 0, projection is the apex.
    Vec pr = project(pe, Vec{0, -1});
    CHECK(pr[0] == Approx(0.0));
    CHECK(pr[1] == Approx(0.0));
    // Cross-check against the brute oracle.
    GridSpec g{2.0, 41, 6};
    auto br = brute_distance(pe, Vec{0, -1}, g);
    CHECK(br.found);
    CHECK(std::abs(br.value - distance(pe, Vec{0, -1})) < 0.1);
}

TEST_CASE("polyhedron exact distance in 2D") {
    // Triangle with vertices (0,0), (1,0), (0,1).
    SetPtr tri = make_polyhedron({{Vec{-1, 0}, 0}, {Vec{0, -1}, 0}, {Vec{1, 1}, 1}});
    CHECK(distance(tri, Vec{0.2, 0.2}) == 0.0);
    CHECK(distance(tri, Vec{-1, 0.5}) == Approx(1.0));
    CHECK(distance(tri, Vec{1, 1}) == Approx(std::sqrt(2.0) / 2));
    CHECK(distance(tri, Vec{-1, -1}) == Approx(std::sqrt(2.0)));
    CHECK_THROWS_AS(make_polyhedron({{Vec{1, 0}, -1}, {Vec{-1, 0}, -1}}), input_error);
}

TEST_CASE("box with infinite bounds") {
    double inf = std::numeric_limits<double>::infinity();
    SetPtr plane = make_box(Vec{-inf, -inf}, Vec{inf, inf});
    CHECK(distance(plane, Vec{100, -40}) == 0.0);
    SetPtr strip = make_box(Vec{-inf, 0}, Vec{inf, 0});
    CHECK(distance(strip, Vec{5, 2}) == Approx(2.0));
}

TEST_CASE("brute oracle on known sets") {
    SetPtr h = make_halfspace(Vec{0, 1}, 0.0);
    GridSpec g{2.0, 81, 0};
    auto r = brute_distance(h, Vec{0, 1}, g);
    CHECK(r.found);
    CHECK(std::abs(r.value - 1.0) <= 0.05 * std::sqrt(2.0) + 1e-12);

    auto inside = brute_distance(h, Vec{0.3, -0.2}, g);
    CHECK(inside.found);
    CHECK(inside.value == Approx(0.0));

    // Example 3.4 wedge: max distance over the r-ball is attained at (-r, 0)
    // with value r/2.
    const double r3 = std::sqrt(3.0);
    SetPtr wedge = make_union({make_halfspace(Vec{-1, r3}, 0),
                               make_halfspace(Vec{-1, -r3}, 0)});
    GridSpec g2{1.5, 61, 4};
    auto w = brute_distance(wedge, Vec{-1, 0}, g2);
    CHECK(w.found);
    CHECK(std::abs(w.value - 0.5) <= 0.05 * std::sqrt(2.0) + 1e-12);
    CHECK(std::abs(distance(wedge, Vec{-1, 0}) - 0.5) < 1e-12);
}

TEST_CASE("brute oracle flags empty grids") {
    SetPtr ball = make_ball(Vec{100, 100}, 0.1);
    GridSpec g{1.0, 11, 2};
    auto r = brute_distance(ball, Vec{0, 0}, g);
    CHECK(!r.found);
}

TEST_CASE("projection and oracle equivalence on random trees") {
    for (int trial = 0; trial < 120; ++trial) {
        int dim = (trial % 3 == 2) ? 3 : 2;
        SetPtr s = random_set(dim);
        Vec x = random_point(dim, 1.5);
        double d = distance(s, x);
        Vec pr = project(s, x);
        CHECK(std::abs(dist2(x, pr) - d) < 1e-10);
        CHECK(membership(s, pr, 1e-8));
        double radius = 2.0 * std::max(1.0, d);
        GridSpec g{radius, dim == 3 ? 21 : 41, 3};
        auto br = brute_distance(s, x, g);
        double cell = 2.0 * radius / (g.points_per_axis - 1);
        CHECK(br.found);
        CHECK(std::abs(br.value - d) <= cell * std::sqrt(double(dim)) + 1e-12);
    }
}

TEST_CASE("distance is 1-Lipschitz and translation-covariant") {
    for (int trial = 0; trial < 60; ++trial) {
        SetPtr s = random_set(2);
        Vec x = random_point(2, 1.5), y = random_point(2, 1.5);
        CHECK(std::abs(distance(s, x) - distance(s, y)) <= dist2(x, y) + 1e-12);
        Vec t = random_point(2, 1.0);
        SetPtr st = make_translate(s, t);
        CHECK(distance(st, x) == Approx(distance(s, x - t)).epsilon(1e-12));
    }
}

TEST_CASE("union projection lands in the argmin child") {
    SetPtr c0 = make_ball(Vec{-2, 0}, 1.0);
    SetPtr c1 = make_ball(Vec{2, 0}, 1.0);
    SetPtr u = make_union({c0, c1});
    Vec pr = project(u, Vec{0.1, 0});
    CHECK(membership(c1, pr, 1e-9));
    // Equidistant: lowest-index child wins.
    Vec tie = project(u, Vec{0, 0});
    CHECK(membership(c0, tie, 1e-9));
}

TEST_CASE("max-norm distances agree with brute search") {
    Norm n({1, 1});
    // Graph of x -> 2x and the horizontal axis, the Theorem-5 pairing.
    SetPtr graph = make_affine(Vec{0, 0}, {Vec{1, 2}});
    SetPtr axis = make_affine(Vec{0, 0}, {Vec{1, 0}});
    SetPtr pe = make_parabola_epi(1.0);
    for (int trial = 0; trial < 40; ++trial) {
        Vec x = random_point(2, 1.2);
        for (const SetPtr& s : {graph, axis, pe}) {
            double dn = norm_distance(s, x, n);
            GridSpec g{2.5, 61, 4};
            auto br = brute_distance(s, x, g, n);
            CHECK(br.found);
            // Brute is accurate to one cell diagonal in either direction
            // (tolerance admits near-members).
            double slack = (2.0 * 2.5 / 60.0) * std::sqrt(2.0) + 1e-9;
            CHECK(std::abs(dn - br.value) <= slack);
        }
    }
    // Axis under max norm: distance is just the |v| component.
    CHECK(norm_distance(axis, Vec{3, 0.25}, n) == Approx(0.25));
    // Halfspace via the dual norm.
    SetPtr h = make_halfspace(Vec{1, 1}, 0.0);
    CHECK(norm_distance(h, Vec{1, 1}, n) == Approx(1.0));
}

TEST_CASE("scene validation") {
    Scene s = testutil::scene_two_axis_copies();
    CHECK(s.m() == 2);
    Scene bad = s;
    bad.xbar = Vec{0, 1};
    CHECK_THROWS_AS(validate_scene(bad), input_error);
}

TEST_CASE("scene parsing from JSON") {
    const char* text = R"({
      "dim": 2,
      "xbar": [0, 0],
      "sets": [
        {"type": "affine", "p": [0, 0], "basis": [[1, 0]]},
        {"type": "affine", "p": [0, 0], "basis": [[1, 0]]}
      ],
      "intersection": {"type": "affine", "p": [0, 0], "basis": [[1, 0]]},
      "labels": ["Omega1", "Omega2"]
    })";
    Scene s = parse_scene_text(text);
    CHECK(s.dim == 2);
    CHECK(s.m() == 2);
    CHECK(s.labels[0] == "Omega1");
    CHECK(distance(s.sets[0], Vec{1, 1}) == Approx(1.0));

    // xbar off the sets is a distinct diagnostic.
    const char* off = R"({
      "dim": 2, "xbar": [0, 1],
      "sets": [
        {"type": "affine", "p": [0, 0], "basis": [[1, 0]]},
        {"type": "affine", "p": [0, 0], "basis": [[1, 0]]}
      ]})";
    CHECK_THROWS_WITH_AS(parse_scene_text(off),
                         doctest::Contains("xbar not in intersection"), input_error);

    CHECK_THROWS_AS(parse_scene_text("{"), input_error);
    CHECK_THROWS_AS(parse_scene_text(R"({"dim": 2, "xbar": [0,0], "sets": []})"),
                    input_error);

    // Box bounds accept "inf"/"-inf" strings.
    const char* boxy = R"({
      "dim": 2, "xbar": [0, 0],
      "sets": [
        {"type": "box", "lo": ["-inf", "-inf"], "hi": ["inf", "inf"]},
        {"type": "union", "children": [
          {"type": "halfspace", "a": [-1, 1.7320508075688772], "b": 0},
          {"type": "halfspace", "a": [-1, -1.7320508075688772], "b": 0}
        ]}
      ]})";
    Scene sb = parse_scene_text(boxy);
    CHECK(distance(sb.sets[0], Vec{10, 10}) == 0.0);
}

TEST_CASE("bundled scene files load and validate") {
    for (const char* name : {"example31", "example32", "example33", "example34",
                             "orthogonal_lines", "two_lines_30deg", "interior_box"}) {
        Scene s = load_scene(testutil::scene_path(name));
        CHECK(s.m() >= 2);
        CHECK(distance(s.sets[0], s.xbar) <= 1e-12);
    }
}

TEST_CASE("example 3.4 file has the full plane and the wedge union") {
    Scene s = load_scene(testutil::scene_path("example34"));
    CHECK(distance(s.sets[0], Vec{50, -70}) == 0.0);
    CHECK(distance(s.sets[1], Vec{-1, 0}) == Approx(0.5));
}

TEST_CASE("constrained nearest point recovers exact distances") {
    Scene s = testutil::scene_parabola_vs_lower();
    // Intersection is the left halfplane; distance from (r, 0) is r.
    auto infeas = [&](const Vec& z) { return s.max_distance(z); };
    auto descend = [&](const Vec& z) {
        double v = 0;
        for (const auto& set : s.sets) {
            double d = distance(set, z);
            v += d * d;
        }
        return v;
    };
    auto near = constrained_nearest(infeas, Vec{0.5, 0}, s.xbar, 1.0, 4.0,
                                    s.norm, 15, {s.xbar}, descend);
    CHECK(near.found);
    CHECK(std::abs(near.dist - 0.5) < 5e-3);
}
