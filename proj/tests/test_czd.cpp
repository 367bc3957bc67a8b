#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace homspace;

namespace {

struct Tree {
    Space s;
    DyadicSystem sys;
};

Tree four_points() {
    Space s(gen::line_table({0, 1, 100, 101}), gen::counting(4));
    SystemOptions o;
    o.delta = 1.0 / 13;
    DyadicSystem sys = build_system(s, o);
    return {s, sys};
}

double avg_abs(const Space& s, const std::vector<int>& pts, const std::vector<double>& f) {
    double a = 0, m = 0;
    for (int y : pts) a += std::abs(f[y]) * s.mass(y), m += s.mass(y);
    return a / m;
}

/// Maximal cubes below Q0 (Q0 itself when `top`) with average above alpha, as sorted member lists.
std::vector<std::vector<int>> stopping_oracle(const Space& s, const DyadicSystem& sys, const std::vector<double>& f,
                                              CubeRef Q0, double alpha, bool top) {
    std::vector<std::vector<int>> out;
    const auto& root = sys.levels[Q0.L][Q0.index].members;
    for (int L = Q0.L; L < sys.generations(); ++L)
        for (std::size_t i = 0; i < sys.levels[L].size(); ++i) {
            const Cube& q = sys.levels[L][i];
            if (!std::includes(root.begin(), root.end(), q.members.begin(), q.members.end())) continue;
            if (L == Q0.L && !top) continue;
            if (!(avg_abs(s, q.members, f) > alpha)) continue;
            bool maximal = true;
            for (int La = (top ? Q0.L : Q0.L + 1); La < L; ++La) {
                const Cube& a = sys.levels[La][sys.cube_of[La][q.center]];
                if (avg_abs(s, a.members, f) > alpha) maximal = false;
            }
            if (maximal) out.push_back(q.members);
        }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::vector<int>> members_of(const CZDecomposition& d) {
    std::vector<std::vector<int>> out;
    for (const auto& c : d.cubes) out.push_back(c.members);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

TEST(CZ, WorkedExampleMaximalFunction) {
    Tree t = four_points();
    std::vector<double> f{8, 0, 0, 0};
    EXPECT_EQ(dyadic_maximal(t.sys, f, t.s.mass()), (std::vector<double>{8, 4, 2, 2}));
}

TEST(CZ, WorkedExampleDecomposition) {
    Tree t = four_points();
    std::vector<double> f{8, 0, 0, 0};
    CZDecomposition d = cz_local(t.s, t.sys, f, CubeRef{0, 0}, 3.0);
    ASSERT_EQ(d.cubes.size(), 1u);
    EXPECT_EQ(d.cubes[0].members, (std::vector<int>{0, 1}));
    EXPECT_DOUBLE_EQ(d.cubes[0].average, 4.0);
    EXPECT_EQ(d.omega, (std::vector<int>{0, 1}));
    EXPECT_TRUE(d.all_pass());
    EXPECT_DOUBLE_EQ(d.K, 2.0);
}

TEST(CZ, AlphaMustExceedTopAverage) {
    Tree t = four_points();
    std::vector<double> f{8, 0, 0, 0};
    EXPECT_THROW(cz_local(t.s, t.sys, f, CubeRef{0, 0}, 2.0), PreconditionError);
    EXPECT_THROW(cz_local(t.s, t.sys, f, CubeRef{0, 0}, -1.0), ParameterError);
    std::vector<double> outside{0, 0, 5, 0};
    EXPECT_THROW(cz_local(t.s, t.sys, outside, CubeRef{1, 0}, 3.0), PreconditionError);
    EXPECT_THROW(cz_local(t.s, t.sys, std::vector<double>{1, 2}, CubeRef{0, 0}, 3.0), InvalidInput);
}

TEST(CZ, RandomInstancesMatchStoppingOracle) {
    auto g = gen::with_masses(gen::random_doubling(90, 2, 12), gen::random_masses(90, 2), "r");
    SystemOptions o;
    o.delta = max_single_delta(g.space.A0());
    DyadicSystem sys = build_system(g.space, o);
    Rng rng(99);
    for (int it = 0; it < 60; ++it) {
        std::vector<double> f(90);
        for (auto& v : f) v = rng.coin() ? rng.uniform(-5, 5) : 0.0;
        double top = avg_abs(g.space, sys.levels[0][0].members, f);
        double alpha = top * (1.05 + 3 * rng.uniform());
        CZDecomposition d = cz_local(g.space, sys, f, CubeRef{0, 0}, alpha);
        EXPECT_EQ(members_of(d), stopping_oracle(g.space, sys, f, CubeRef{0, 0}, alpha, false));
        EXPECT_TRUE(d.all_pass());
        for (std::size_t y = 0; y < 90; ++y)
            if (!std::binary_search(d.omega.begin(), d.omega.end(), int(y))) {
                EXPECT_LE(std::abs(f[y]), alpha);
            }
        double lo = top * rng.uniform(0.2, 1.0);
        CZDecomposition gd = cz_global(g.space, sys, f, lo);
        EXPECT_EQ(members_of(gd), stopping_oracle(g.space, sys, f, CubeRef{0, 0}, lo, true));
        EXPECT_TRUE(refines(d, gd, 90));
    }
}

TEST(CZ, WeightedUsesWeightedAverages) {
    Tree t = four_points();
    std::vector<double> f{8, 0, 0, 0}, w{1, 1, 2, 2};
    CZDecomposition d = cz_weighted(t.s, t.sys, f, CubeRef{0, 0}, 3.0, w);
    ASSERT_EQ(d.cubes.size(), 1u);
    EXPECT_EQ(d.cubes[0].members, (std::vector<int>{0, 1}));
    EXPECT_DOUBLE_EQ(d.alpha0, 8.0 / 6.0);
    EXPECT_TRUE(d.all_pass());
}

TEST(Covering, BasicCoverProperties) {
    auto g = gen::random_doubling(50, 2, 3);
    const Space& s = g.space;
    Rng rng(4);
    for (int it = 0; it < 200; ++it) {
        std::vector<Ball> fam(1 + rng.index(10));
        for (auto& b : fam) b = {int(rng.index(50)), rng.uniform(0.02, 0.6), rng.coin()};
        CoverResult r = basic_cover(s, fam);
        EXPECT_TRUE(r.all_pass()) << r.failure;
        // Independent check: disjoint selection whose dilates hold every ball of the family.
        std::vector<int> hits(50, 0);
        for (int i : r.selected)
            for (std::size_t y = 0; y < 50; ++y)
                if (fam[i].closed ? s.dist(fam[i].center, y) <= fam[i].radius : s.dist(fam[i].center, y) < fam[i].radius) ++hits[y];
        for (int h : hits) EXPECT_LE(h, 1);
        const double C = s.A0() + 4 * s.A0() * s.A0();
        for (const Ball& b : fam)
            for (std::size_t y = 0; y < 50; ++y) {
                if (!(s.dist(b.center, y) <= b.radius)) continue;
                bool in = false;
                for (int i : r.selected) in = in || s.dist(fam[i].center, y) <= C * fam[i].radius;
                EXPECT_TRUE(in);
            }
    }
}

TEST(Covering, VitaliCoversExactly) {
    auto g = gen::grid2d(6, "euclid");
    const Space& s = g.space;
    std::vector<int> A{0, 3, 7, 14, 20, 35};
    std::vector<Ball> fam;
    for (int a : A) fam.push_back({a, 0.5, true}), fam.push_back({a, 2.2, true});
    CoverResult r = vitali_cover(s, A, fam);
    EXPECT_TRUE(r.all_pass()) << r.failure;
    for (int a : A) {
        bool cov = false;
        for (int i : r.selected) cov = cov || s.dist(fam[i].center, a) <= fam[i].radius;
        EXPECT_TRUE(cov);
    }
}

TEST(Covering, VitaliNeedsFineBalls) {
    auto g = gen::grid1d(6);
    try {
        vitali_cover(g.space, {0, 2}, {Ball{0, 0.5, true}, Ball{2, 3.0, true}});
        FAIL() << "expected a precondition error";
    } catch (const PreconditionError& e) {
        EXPECT_NE(std::string(e.what()).find("atom 2"), std::string::npos);
    }
    EXPECT_THROW(vitali_cover(g.space, {0}, {Ball{0, 0.5, false}}), InvalidInput);
    EXPECT_THROW(basic_cover(g.space, {Ball{9, 1.0, false}}), InvalidInput);
}
