#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace homspace;

namespace {

/// Shortest chains by repeated relaxation until nothing changes.
std::vector<std::vector<double>> chain_oracle(const DistanceTable& rho, double eps) {
    const std::size_t n = rho.size();
    std::vector<std::vector<double>> d(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) d[i][j] = std::pow(rho(i, j), eps);
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t k = 0; k < n; ++k)
                    if (d[i][k] + d[k][j] < d[i][j] * (1 - 1e-15)) d[i][j] = d[i][k] + d[k][j], changed = true;
    }
    return d;
}

}  // namespace

TEST(Metrization, PowersOfALineAreRecovered) {
    for (std::size_t n : {8u, 64u})
        for (double beta : {1.5, 2.0, 3.0}) {
            auto g = gen::grid1d(n);
            EXPECT_LE(power_recovery_error(g.space.dist(), beta), 1e-9) << n << " " << beta;
        }
}

TEST(Metrization, ChainMetricMatchesRelaxation) {
    auto g = gen::snowflake(gen::random_doubling(24, 2, 3), 2.5);
    const DistanceTable& rho = g.space.dist();
    Metrization m = chain_metric(rho);
    EXPECT_NEAR(m.epsilon, std::log(2.0) / std::log(2 * g.space.A0()), 1e-15);
    EXPECT_TRUE(m.admissible);
    auto want = chain_oracle(rho, m.epsilon);
    double C = 1;
    for (std::size_t i = 0; i < rho.size(); ++i)
        for (std::size_t j = 0; j < rho.size(); ++j) {
            EXPECT_NEAR(m.d_eps(i, j), want[i][j], 1e-12 * std::max(1.0, want[i][j]));
            if (i != j) C = std::max({C, std::pow(rho(i, j), m.epsilon) / want[i][j], want[i][j] / std::pow(rho(i, j), m.epsilon)});
        }
    EXPECT_NEAR(m.C_eps, C, 1e-12);
    EXPECT_TRUE(is_metric(m.d_eps));
}

TEST(Metrization, BallsAreSandwiched) {
    for (const auto& g : {gen::snowflake(gen::grid1d(20), 2.0), gen::snowflake(gen::cantor(3, 0.3), 3.0)}) {
        Metrization m = chain_metric(g.space.dist());
        SandwichReport r = ball_sandwich_check(g.space.dist(), m);
        EXPECT_TRUE(r.pass_open && r.pass_closed) << g.label << ": " << r.failure;
    }
}

TEST(Metrization, PowerConstantOnCollinearPoints) {
    for (double beta : {1.5, 2.0, 3.0}) {
        PowerQuasimetric pq = power_quasimetric(gen::grid1d(16).space.dist(), beta);
        EXPECT_NEAR(pq.A0, std::pow(2.0, beta - 1), 1e-12 * pq.bound);
        EXPECT_NEAR(pq.A0, oracle::A0(Space(pq.table, gen::counting(16))), 1e-12);
    }
}

TEST(Metrization, PowerConstantNeverExceedsBound) {
    for (int i = 0; i < 40; ++i) {
        auto g = gen::random_doubling(16, 1 + i % 3, 100 + i);
        for (double beta : {1.5, 2.0, 3.0}) {
            DistanceTable p = g.space.dist().transformed([beta](double v) { return std::pow(v, beta); });
            EXPECT_LE(oracle::A0(Space(p, gen::counting(16))), std::pow(2.0, beta - 1) * (1 + 1e-12));
        }
    }
}

TEST(Metrization, Errors) {
    DistanceTable bad(3);
    bad.set(0, 1, 1);
    bad.set(1, 2, 1);
    bad.set(0, 2, 5);
    EXPECT_THROW(power_quasimetric(bad, 2.0), InvalidInput);
    EXPECT_THROW(power_quasimetric(gen::grid1d(3).space.dist(), 0.5), ParameterError);
    EXPECT_THROW(chain_metric(gen::grid1d(3).space.dist(), 1.5), ParameterError);
    EXPECT_THROW(snowflake(gen::grid1d(3).space.dist(), 0.0), ParameterError);
}

TEST(Metrization, SnowflakeOfMetricIsMetric) {
    auto g = gen::random_doubling(20, 2, 1);
    EXPECT_TRUE(is_metric(snowflake(g.space.dist(), 0.5)));
}
