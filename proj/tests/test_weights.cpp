#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace homspace;

namespace {

Space pair_space() {
    DistanceTable t(2);
    t.set(0, 1, 1.0);
    return Space(t, {1, 1});
}

DyadicSystem system_of(const Space& s, std::uint64_t seed = 2) {
    SystemOptions o;
    o.delta = max_single_delta(s.A0());
    o.seed = seed;
    return build_system(s, o);
}

}  // namespace

TEST(Weights, TwoPointClosedForms) {
    Space s = pair_space();
    SetCollection balls = ball_collection(s);
    // Whole-space averages: w = (1, 2) gives (3/2)(3/4) = 9/8.
    EXPECT_NEAR(ap_constant(s, std::vector<double>{1, 2}, balls, 2).value, 9.0 / 8, 1e-15);
    // w = (1, 3): sqrt((1 + 9)/2) / 2 = sqrt(5)/2.
    EXPECT_NEAR(rh_constant(s, std::vector<double>{1, 3}, balls, 2).value, std::sqrt(5.0) / 2, 1e-15);
    // f = (0, c) deviates by c/2 everywhere on the whole space.
    EXPECT_NEAR(bmo_norm(s, std::vector<double>{0, 7}, balls).value, 3.5, 1e-15);
}

TEST(Weights, ConstantsMatchBallEnumeration) {
    std::vector<gen::Generated> zoo{gen::grid1d(15), gen::cantor(3, 0.3), gen::grid2d(4, "euclid"),
                                    gen::with_masses(gen::random_doubling(20, 2, 6), gen::random_masses(20, 1), "r")};
    Rng rng(5);
    for (const auto& g : zoo) {
        std::vector<double> w(g.space.size());
        for (auto& v : w) v = std::exp(rng.uniform(-2, 2));
        SetCollection balls = ball_collection(g.space);
        SCOPED_TRACE(g.label);
        EXPECT_NEAR(ap_constant(g.space, w, balls, 2).value, oracle::ap(g.space, w, 2), 1e-12);
        EXPECT_NEAR(ap_constant(g.space, w, balls, 3.5).value, oracle::ap(g.space, w, 3.5), 1e-12);
        EXPECT_NEAR(rh_constant(g.space, w, balls, 1.5).value, oracle::rh(g.space, w, 1.5), 1e-12);
        EXPECT_NEAR(bmo_norm(g.space, log_of(w), balls).value, oracle::bmo(g.space, log_of(w)), 1e-12);
    }
}

TEST(Weights, UnitWeightIsTrivial) {
    auto g = gen::cantor(4, 1.0 / 3);
    std::vector<double> one(g.space.size(), 1.0);
    AdjacentFamily fam = build_adjacent_systems(g.space, 3, max_adjacent_delta(g.space.A0()), 1);
    LogBmoPipeline P = log_bmo_pipeline(g.space, one, 2.0, fam.systems, 1, true);
    EXPECT_EQ(P.rh_ball, 1.0);
    EXPECT_EQ(P.ball_bmo, 0.0);
    EXPECT_EQ(P.dyadic_bmo_sum, 0.0);
    EXPECT_DOUBLE_EQ(P.C_dbl, g.space.A1());
    EXPECT_TRUE(P.pass());
}

TEST(Weights, PowerWeightsPassTheChain) {
    auto g = gen::grid1d(64, true);
    AdjacentFamily fam = build_adjacent_systems(g.space, 4, max_adjacent_delta(1.0), 3);
    for (double a : {0.5, 1.0, 2.0}) {
        auto w = gen::power_weight(g.coord, a, 1.0);
        LogBmoPipeline P = log_bmo_pipeline(g.space, w, 2.0, fam.systems, 3, false);
        EXPECT_TRUE(P.pass()) << "a=" << a << ": " << P.first_failure();
        EXPECT_GT(P.ball_bmo, 0.0);
        EXPECT_NEAR(P.ball_bmo, oracle::bmo(g.space, log_of(w)), 1e-12);
    }
}

TEST(Weights, KnapsackBoundsEverySubset) {
    auto g = gen::grid1d(12);
    DyadicSystem sys = system_of(g.space);
    Rng rng(8);
    std::vector<double> w(12);
    for (auto& v : w) v = rng.uniform(0.2, 5);
    for (double gamma : {0.1, 0.3, 0.5, 0.9}) {
        double exact = 0;
        for (const auto& lvl : sys.levels)
            for (const Cube& q : lvl) {
                const std::size_t m = q.members.size();
                double wq = 0;
                for (int y : q.members) wq += w[y];
                for (std::uint64_t mask = 0; mask < (1u << m); ++mask) {
                    double we = 0, me = 0;
                    for (std::size_t i = 0; i < m; ++i)
                        if ((mask >> i) & 1) we += w[q.members[i]], me += 1;
                    if (we <= gamma * wq) exact = std::max(exact, me / double(m));
                }
            }
        double lam = knapsack_lambda(g.space, w, sys, gamma).first;
        EXPECT_GE(lam, exact);
        EXPECT_LE(lam, 1.0);
    }
}

TEST(Weights, StoppingArgumentOnRandomWeights) {
    auto g = gen::random_doubling(60, 2, 17);
    DyadicSystem sys = system_of(g.space);
    Rng rng(1);
    std::vector<double> w(60);
    for (auto& v : w) v = rng.uniform(0.5, 2);
    RhToAp r = rh_to_ap(g.space, w, sys);
    EXPECT_GT(r.q_bar, 1.0);
    EXPECT_LT(r.q_bar, r.q_bar_sup);
    EXPECT_NEAR(r.p, r.q_bar / (r.q_bar - 1), 1e-15);
    EXPECT_TRUE(r.stopping_sets.pass);
    EXPECT_TRUE(r.integral_bound.pass);
    EXPECT_TRUE(r.ap_bound.pass);
    ApLogBmo b = ap_log_bmo(g.space, w, sys, r.p);
    EXPECT_TRUE(b.upper.pass && b.lower.pass && b.bmo.pass);
}

TEST(Weights, Errors) {
    Space s = pair_space();
    SetCollection balls = ball_collection(s);
    EXPECT_THROW(ap_constant(s, std::vector<double>{1, 0}, balls, 2), InvalidInput);
    EXPECT_THROW(ap_constant(s, std::vector<double>{1, 1}, balls, 1), ParameterError);
    EXPECT_THROW(rh_constant(s, std::vector<double>{1, 1}, balls, 0.5), ParameterError);
    EXPECT_THROW(rh_constant(s, std::vector<double>{1}, balls, 2), InvalidInput);
    EXPECT_THROW(bmo_norm(s, std::vector<double>{1, 2, 3}, balls), InvalidInput);
    EXPECT_THROW(rh_absolute_continuity(s, std::vector<double>{1, 2}, system_of(s), 2, 1.5), ParameterError);
}
