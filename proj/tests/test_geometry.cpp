#include <gtest/gtest.h>

#include <algorithm>

#include "mwlab/errors.hpp"
#include "mwlab/geometry.hpp"
#include "mwlab/rng.hpp"

using namespace mwlab;

TEST(Cube, Dilation) {
    Cube q = Cube::interval(0, 1);
    EXPECT_EQ(dilate(q, 1.0), q);
    Cube c(make_point({0.0}), 1.0);
    Cube d = dilate(c, 3.0);
    EXPECT_DOUBLE_EQ(d.edge, 3.0);
    EXPECT_DOUBLE_EQ(d.center(0), 0.0);
    EXPECT_EQ(dilate(dilate(q, 2), 2), dilate(q, 4));
    EXPECT_THROW(dilate(q, 0.0), ParameterError);
    EXPECT_THROW(dilate(q, -1.0), ParameterError);
}

TEST(Cube, HalfOpen) {
    Cube q = Cube::interval(0, 1);
    EXPECT_TRUE(q.contains(make_point({0.0})));
    EXPECT_FALSE(q.contains(make_point({1.0})));
    EXPECT_THROW(Cube(make_point({0.0}), 0.0), ParameterError);
}

TEST(Separation, Values) {
    Cube q = Cube::interval(0, 1);
    EXPECT_DOUBLE_EQ(separation_factor(q, q), 1.0);
    Cube a(make_point({0.0}), 1.0), b(make_point({5.0}), 1.0);
    EXPECT_DOUBLE_EQ(separation_factor(a, b), 6.0);
    CounterRng rng(3);
    for (int t = 0; t < 100; ++t) {
        Cube x(make_point({rng.uniform(-5, 5), rng.uniform(-5, 5)}), rng.uniform(0.1, 3));
        Cube y(make_point({rng.uniform(-5, 5), rng.uniform(-5, 5)}), rng.uniform(0.1, 3));
        EXPECT_EQ(separation_factor(x, y), separation_factor(y, x));
        EXPECT_GE(separation_factor(x, y), 1.0);
    }
}

TEST(Dyadic, IndexRealizesCube) {
    DyadicIndex d{2, {3}};
    Cube q = d.cube();
    EXPECT_DOUBLE_EQ(q.edge, 0.25);
    EXPECT_DOUBLE_EQ(q.lower()(0), 0.75);
    DyadicIndex e = DyadicIndex::containing(make_point({0.8}), 2);
    EXPECT_EQ(e.k[0], 3);
}

TEST(ProbeFamily, SingleCube) {
    Box box{make_point({0.0}), make_point({1.0})};
    ProbeFamily f = probe_family(box, 0, 0, {}, 0);
    ASSERT_EQ(f.size(), 1u);
    EXPECT_EQ(f.cubes[0], Cube::interval(0, 1));
}

TEST(ProbeFamily, SingularAnchors) {
    Box box{make_point({-1.0}), make_point({1.0})};
    ProbeFamily f = probe_family(box, 0, 2, {make_point({0.0})}, 0);
    auto has = [&](double a, double b) {
        return std::any_of(f.cubes.begin(), f.cubes.end(), [&](const Cube& q) { return q == Cube::interval(a, b); });
    };
    EXPECT_TRUE(has(0, 1));
    EXPECT_TRUE(has(-1, 0));
    EXPECT_TRUE(has(0, 0.5));
    EXPECT_TRUE(has(-0.25, 0));
    EXPECT_TRUE(has(-0.25, 0.25));
    EXPECT_TRUE(has(-0.5, 0.5));
}

TEST(ProbeFamily, CountsDyadicCubes) {
    Box box{make_point({0.0, 0.0}), make_point({1.0, 1.0})};
    EXPECT_EQ(probe_family(box, 0, 3, {}, 0).size(), 1u + 4u + 16u + 64u);
}

TEST(ProbeFamily, NestingAndDeterminism) {
    Box box{make_point({0.0}), make_point({1.0})};
    ProbeFamily f = probe_family(box, 0, 4, {}, 7, 99);
    ProbeFamily g = probe_family(box, 0, 4, {}, 7, 99);
    ASSERT_EQ(f.size(), g.size());
    for (std::size_t i = 0; i < f.size(); ++i) EXPECT_EQ(f.cubes[i], g.cubes[i]);
    for (const Cube& q : f.cubes) EXPECT_TRUE(box.contains(q));
    for (int j = 1; j <= 4; ++j)
        for (const Cube& c : dyadic_cubes_in(box, j)) {
            int parents = 0;
            for (const Cube& p : dyadic_cubes_in(box, j - 1)) parents += p.contains(c) ? 1 : 0;
            EXPECT_EQ(parents, 1);
        }
    EXPECT_THROW(probe_family(box, 3, 1, {}, 0), ConfigurationError);
}
