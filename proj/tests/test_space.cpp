#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace homspace;

namespace {

Space two_points(double d, double m0 = 1, double m1 = 1) {
    DistanceTable t(2);
    t.set(0, 1, d);
    return Space(t, {m0, m1});
}

std::vector<gen::Generated> zoo() {
    std::vector<gen::Generated> z;
    z.push_back(gen::grid1d(17));
    z.push_back(gen::cantor(3, 1.0 / 3));
    z.push_back(gen::grid2d(4, "euclid"));
    z.push_back(gen::grid2d(4, "sup"));
    z.push_back(gen::random_doubling(40, 2, 5));
    z.push_back(gen::snowflake(gen::grid1d(9), 2.0));
    z.push_back(gen::with_masses(gen::grid1d(11), gen::random_masses(11, 3), "random"));
    return z;
}

}  // namespace

TEST(Space, GridOfEightIsAMetricLine) {
    auto g = gen::grid1d(8);
    EXPECT_EQ(g.space.size(), 8u);
    EXPECT_EQ(g.space.A0(), 1.0);
    EXPECT_TRUE(is_metric(g.space.dist()));
}

TEST(Space, SquaredThreePointLineHasA0Two) {
    auto g = gen::snowflake(gen::grid1d(3), 2.0);
    EXPECT_DOUBLE_EQ(g.space.A0(), 2.0);
    EXPECT_EQ(g.space.A0_witness().y, 1);  // the midpoint is the detour
}

TEST(Space, ConstantsMatchBruteForce) {
    for (const auto& g : zoo()) {
        SCOPED_TRACE(g.label);
        EXPECT_NEAR(g.space.A0(), oracle::A0(g.space), 1e-12);
        EXPECT_NEAR(g.space.A1(), oracle::A1(g.space), 1e-12);
    }
}

TEST(Space, CantorOfLevelThreeHasEightPointsAndFiniteDoubling) {
    auto g = gen::cantor(3, 1.0 / 3);
    EXPECT_EQ(g.space.size(), 8u);
    EXPECT_TRUE(std::isfinite(g.space.A1()));
    EXPECT_NEAR(g.space.A1(), oracle::A1(g.space), 1e-12);
}

TEST(Space, SinglePointHasUnitConstants) {
    Space s(DistanceTable(1), {2.5});
    EXPECT_EQ(s.A0(), 1.0);
    EXPECT_EQ(s.A1(), 1.0);
}

TEST(Space, TwoPointDoubling) {
    // B(x, r) is a singleton for r <= 1 while B(x, 2r) is everything once r > 1/2.
    Space s = two_points(1.0, 1.0, 3.0);
    EXPECT_DOUBLE_EQ(s.A1(), 4.0);
}

TEST(Space, BallsArePrefixes) {
    auto g = gen::random_doubling(30, 3, 9);
    const Space& s = g.space;
    for (std::size_t x = 0; x < s.size(); x += 7)
        for (double r : oracle::probe_radii(s, x)) {
            auto b = s.ball(x, r);
            std::vector<int> got(b.begin(), b.end()), want;
            std::sort(got.begin(), got.end());
            for (std::size_t y = 0; y < s.size(); ++y)
                if (s.dist(x, y) < r) want.push_back(int(y));
            EXPECT_EQ(got, want);
            EXPECT_NEAR(s.ball_mass(x, r), oracle::open_mass(s, x, r, s.mass()), 1e-12);
        }
}

TEST(Space, AhlforsConstantOfGridLine) {
    // Just above r = 1 the open ball holds three points, so sup mu(B)/r tends to 3.
    auto g = gen::grid1d(32);
    AlphaRegularity ar = check_alpha_regular(g.space, 1.0);
    EXPECT_DOUBLE_EQ(ar.kappa, 3.0);
    double probe = 0;
    for (std::size_t x = 0; x < 32; ++x)
        for (double r = 1 + 1e-9; r < 31; r += 0.25) probe = std::max(probe, oracle::open_mass(g.space, x, r, g.space.mass()) / r);
    EXPECT_NEAR(probe, 3.0, 1e-6);
    EXPECT_LE(probe, ar.kappa);
}

TEST(Space, AnnuliOnLineAndCantorSet) {
    EXPECT_TRUE(check_tau_annuli(gen::grid1d(32).space, 0.5).holds);
    // Cantor gaps leave an empty annulus at tau = 1/2; the witness is confirmed by hand.
    TauAnnuli t = check_tau_annuli(gen::cantor(3, 1.0 / 3).space, 0.5);
    EXPECT_FALSE(t.holds);
    const Space s = gen::cantor(3, 1.0 / 3).space;
    bool empty = true;
    for (std::size_t y = 0; y < s.size(); ++y)
        if (s.dist(t.x, y) >= 0.5 * t.r && s.dist(t.x, y) < t.r) empty = false;
    EXPECT_TRUE(empty);
    EXPECT_LT(oracle::open_mass(s, t.x, t.r, s.mass()), s.total_mass());
}

TEST(Space, RegularityImpliesAnnuliBelowThreshold) {
    auto g = gen::grid1d(32);
    AlphaRegularity ar = check_alpha_regular(g.space, 1.0);
    const double tau = 0.99 * std::pow(ar.kappa, -2.0);
    TauAnnuli t = check_tau_annuli(g.space, tau, std::make_pair(1.0, ar.kappa));
    EXPECT_TRUE(t.implied_by_regularity);
    EXPECT_TRUE(t.holds);
}

TEST(Space, DoublingPowers) {
    for (const auto& g : zoo())
        for (const auto& c : doubling_power_checks(g.space)) EXPECT_TRUE(c.pass) << g.label << " " << c.step;
}

TEST(Space, RadonNikodymIsExact) {
    auto g = gen::with_masses(gen::grid1d(10), gen::random_masses(10, 4), "r");
    std::vector<double> nu{0, 1, 2.5, 0, 3, 1e-3, 7, 0.25, 0, 4};
    RadonNikodym r = radon_nikodym(g.space, nu, 1, 0, 12);
    EXPECT_EQ(r.subsets_checked, 1024u);
    EXPECT_LE(r.max_identity_error, 1e-12);
    for (std::size_t i = 0; i < 10; ++i) EXPECT_DOUBLE_EQ(r.derivative[i], nu[i] / g.space.mass(i));
}

TEST(Space, RejectsInvalidTables) {
    DistanceTable neg(2);
    neg.set(0, 1, -1);
    EXPECT_THROW(Space(neg, {1, 1}), InvalidInput);
    DistanceTable zero(2);
    EXPECT_THROW(Space(zero, {1, 1}), InvalidInput);
    EXPECT_THROW(Space(DistanceTable(2, {0, 1, 2, 0}), {1, 1}), InvalidInput);
    EXPECT_THROW(Space(DistanceTable(2, {0, NAN, NAN, 0}), {1, 1}), InvalidInput);
    EXPECT_THROW(Space(DistanceTable(2, {1, 1, 1, 0}), {1, 1}), InvalidInput);
    EXPECT_THROW(DistanceTable(2, {0, 1, 1}), InvalidInput);
    EXPECT_THROW(two_points(1, 0, 1), InvalidInput);
    EXPECT_THROW(two_points(1, 1, INFINITY), InvalidInput);
    EXPECT_THROW(Space(DistanceTable(0), {}), InvalidInput);
    EXPECT_THROW(check_alpha_regular(gen::grid1d(4).space, -1), ParameterError);
    EXPECT_THROW(check_tau_annuli(gen::grid1d(4).space, 1.0), ParameterError);
}

TEST(Space, JsonRoundTrip) {
    auto g = gen::cantor(2, 0.25);
    json j = space_to_json(g.space);
    Space back = space_from_json(j);
    EXPECT_EQ(space_to_json(back).dump(), j.dump());
    EXPECT_EQ(back.A1(), g.space.A1());
    json bad = j;
    bad["dist"][1] = "x";
    EXPECT_THROW(space_from_json(bad), InvalidInput);
    bad = j;
    bad.erase("mass");
    EXPECT_THROW(space_from_json(bad), InvalidInput);
}
