#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace homspace;

namespace {

Space weighted_pair(double m0, double m1) {
    DistanceTable t(2);
    t.set(0, 1, 1.0);
    return Space(t, {m0, m1});
}

/// Smallest tabulated theta at which the envelope reaches `level`.
double envelope_inverse(const DistortionProfile& p, double level) {
    for (std::size_t i = 0; i < p.thetas.size(); ++i)
        if (p.values[i] >= level) return p.thetas[i];
    return std::numeric_limits<double>::infinity();
}

}  // namespace

TEST(Quasisym, SwapJacobian) {
    Space s = weighted_pair(1, 2);
    PointMap swap(std::vector<int>{1, 0});
    Jacobian J = generalized_jacobian(s, s, swap);
    EXPECT_EQ(J.finest, (std::vector<double>{2.0, 0.5}));
    EXPECT_EQ(J.identity.subsets_checked, 4u);
    EXPECT_EQ(J.identity.max_identity_error, 0.0);
}

TEST(Quasisym, InverseChainRule) {
    auto [src, tgt] = gen::stretch_pair(40, 1.5);
    PointMap f = PointMap::identity(40);
    Rng rng(3);
    std::vector<int> p = iota_vec(40);
    rng.shuffle(p);
    PointMap g(p);
    for (const PointMap& m : {f, g}) {
        Jacobian Jf = generalized_jacobian(src.space, tgt.space, m);
        Jacobian Ji = generalized_jacobian(tgt.space, src.space, m.inverse());
        for (std::size_t x = 0; x < 40; ++x) EXPECT_NEAR(Ji.finest[m(x)] * Jf.finest[x], 1.0, 1e-15);
    }
}

TEST(Quasisym, PullbackKeepsTotalMass) {
    auto [src, tgt] = gen::stretch_pair(30, 2.0);
    auto mu = pullback_measure(tgt.space, PointMap::identity(30));
    double a = 0;
    for (double v : mu) a += v;
    EXPECT_NEAR(a, tgt.space.total_mass(), 1e-12 * a);
}

TEST(Quasisym, EnvelopeMatchesTripleScan) {
    auto [src, tgt] = gen::stretch_pair(16, 2.0);
    PointMap f = PointMap::identity(16);
    DistortionProfile p = eta_profile(src.space, tgt.space, f);
    EXPECT_EQ(p.triples, 16u * 15u * 14u);
    for (double theta : {0.02, 0.1, 0.3, 0.5, 1.0, 2.0, 7.0, 30.0})
        EXPECT_DOUBLE_EQ(p(theta), oracle::envelope(src.space, tgt.space, f.forward(), theta)) << theta;
    Eta env = Eta::envelope(p);
    EXPECT_TRUE(is_quasisymmetric(p, env).holds);
    EXPECT_FALSE(is_quasisymmetric(p, Eta::power(1, 1)).holds);
}

TEST(Quasisym, IdentityEnvelopeIsTheDiagonal) {
    auto g = gen::grid1d(12);
    DistortionProfile p = eta_profile(g.space, g.space, PointMap::identity(12));
    for (std::size_t i = 0; i < p.thetas.size(); ++i) EXPECT_DOUBLE_EQ(p.values[i], p.thetas[i]);
    EXPECT_TRUE(is_quasisymmetric(p, Eta::power(1, 1)).holds);
}

TEST(Quasisym, InverseEnvelopeDuality) {
    auto [src, tgt] = gen::stretch_pair(24, 1.5);
    PointMap f = PointMap::identity(24);
    DistortionProfile fwd = eta_profile(src.space, tgt.space, f);
    DistortionProfile inv = eta_profile(tgt.space, src.space, f.inverse());
    for (double t : {0.05, 0.2, 0.5, 1.0, 3.0, 10.0}) {
        double s = envelope_inverse(fwd, 1 / t);
        if (!std::isfinite(s)) continue;
        EXPECT_LE(inv(t), 1 / s * (1 + 1e-12)) << t;
    }
}

TEST(Quasisym, EtaKinds) {
    Eta p = Eta::power(2, 0.5);
    EXPECT_DOUBLE_EQ(p(4), 4);
    EXPECT_DOUBLE_EQ(*p.largest_theta_below(1), 0.25);
    Eta t = Eta::tabulated({0.1, 1, 10}, {0.05, 1, 20});
    EXPECT_DOUBLE_EQ(t(0.55), 0.05 + 0.95 * 0.5);
    EXPECT_THROW(t(11), ParameterError);
    EXPECT_DOUBLE_EQ(*t.largest_theta_below(1.0 / 3), 0.1);
    Eta z = qs_transfer(p, 1.5, 0.5);
    EXPECT_NEAR(z(0.3), 2.25 * std::pow(p(std::pow(2.25 * 0.3, 2)), 0.5), 1e-15);
    EXPECT_THROW(Eta::tabulated({1, 0.5}, {1, 2}), InvalidInput);
    EXPECT_THROW(Eta::tabulated({0.5, 1}, {2, 1}), InvalidInput);
    EXPECT_THROW(Eta::power(0, 1), InvalidInput);
    EXPECT_DOUBLE_EQ(eta_from_json(json{{"kind", "power"}, {"c", 3}, {"gamma", 2}})(2), 12);
    EXPECT_DOUBLE_EQ(eta_from_json(json{{"thetas", {1, 2}}, {"values", {1, 3}}})(1.5), 2);
}

TEST(Quasisym, MapsMustBePermutations) {
    EXPECT_THROW(PointMap(std::vector<int>{0, 0}), InvalidInput);
    EXPECT_THROW(PointMap(std::vector<int>{0, 2}), InvalidInput);
    EXPECT_THROW(map_from_json(json{{"perm", {0, 1.5}}}), InvalidInput);
    EXPECT_EQ(map_from_json(json{{"perm", {1, 0, 2}}}).inverse().forward(), (std::vector<int>{1, 0, 2}));
    auto g = gen::grid1d(3);
    EXPECT_THROW(eta_profile(g.space, g.space, PointMap::identity(2)), InvalidInput);
}

TEST(Quasisym, PullbackDoublingOnStretch) {
    auto [src, tgt] = gen::stretch_pair(64, 2.0);
    PointMap f = PointMap::identity(64);
    Eta env = Eta::envelope(eta_profile(src.space, tgt.space, f));
    PullbackDoubling pd = pullback_doubling_check(src.space, tgt.space, f, env, 0.5);
    EXPECT_TRUE(pd.annuli);
    EXPECT_TRUE(pd.check.pass);
    EXPECT_LE(env(pd.theta), 1.0 / 3);
    EXPECT_GE(double(pd.k), 1 / pd.theta);
    // The measured doubling of the pulled-back measure, checked by brute force.
    const auto mu = pullback_measure(tgt.space, f);
    double worst = 1;
    for (std::size_t x = 0; x < 64; ++x)
        for (double r : oracle::probe_radii(src.space, x))
            worst = std::max(worst, oracle::open_mass(src.space, x, 2 * r, mu) / oracle::open_mass(src.space, x, r, mu));
    EXPECT_NEAR(pd.check.measured, worst, 1e-12 * worst);
    GapScan gs = distortion_gap_scan(src.space, tgt.space, f, double(pd.k), pd.theta, env);
    EXPECT_EQ(gs.failures, 0u);
    EXPECT_GT(gs.balls, 0u);
}

TEST(Quasisym, TabulatedEtaWithoutSmallValuesIsRejected) {
    auto g = gen::grid1d(8);
    Eta t = Eta::tabulated({1, 2}, {1, 2});
    EXPECT_THROW(pullback_doubling_check(g.space, g.space, PointMap::identity(8), t, 0.5), ParameterError);
}

TEST(Quasisym, IdentityPipelineIsTrivial) {
    auto g = gen::grid1d(24);
    ReimannOptions o;
    o.T = 3;
    ReimannReport R = reimann_pipeline(g.space, g.space, PointMap::identity(24), o);
    for (double j : R.jacobian.finest) EXPECT_EQ(j, 1.0);
    EXPECT_EQ(R.bmo_log_j, 0.0);
    EXPECT_EQ(R.bmo_log_j_hat, 0.0);
    EXPECT_TRUE(R.pass());
}

TEST(Quasisym, StretchPipelineBoundsHold) {
    auto [src, tgt] = gen::stretch_pair(64, 1.5);
    ReimannOptions o;
    o.T = 3;
    ReimannReport R = reimann_pipeline(src.space, tgt.space, PointMap::identity(64), o);
    for (const auto& row : R.rows)
        if (row.step != "jacobian stated constant") {
            EXPECT_TRUE(row.check.pass) << row.step << ": " << row.check.step;
        }
    EXPECT_GT(R.bmo_log_j, 0.0);
    EXPECT_TRUE(std::isfinite(R.bmo_log_j));
    EXPECT_NEAR(R.bmo_log_j, oracle::bmo(src.space, log_of(R.jacobian.finest)), 1e-12);
}

TEST(Quasisym, AInfinityModulusOfConstantJacobian) {
    auto g = gen::grid1d(20);
    std::vector<double> one(20, 1.0);
    // With J constant, mu_f(E)/mu_f(B) = mu(E)/mu(B) <= eps.
    EXPECT_NEAR(ainf_modulus(g.space, one, 0.25), 0.25, 1e-15);
}
