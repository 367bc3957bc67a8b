#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "homspace/space.hpp"

namespace homspace {

/// d^eps for eps in (0, 1].
inline DistanceTable snowflake(const DistanceTable& d, double eps) {
    if (!(eps > 0 && eps <= 1)) throw ParameterError("snowflake exponent must lie in (0,1]");
    return d.transformed([eps](double v) { return std::pow(v, eps); });
}

struct PowerQuasimetric {
    DistanceTable table;
    double A0 = 1;
    double bound = 1;  // 2^(beta-1)
};

/// D^beta for a metric D and beta >= 1; its quasitriangle constant never exceeds 2^(beta-1).
inline PowerQuasimetric power_quasimetric(const DistanceTable& metric, double beta) {
    if (!(beta >= 1) || !std::isfinite(beta)) throw ParameterError("power exponent must be >= 1");
    metric.validate();
    if (!is_metric(metric)) throw InvalidInput("input table violates the triangle inequality");
    PowerQuasimetric out;
    out.table = metric.transformed([beta](double v) { return std::pow(v, beta); });
    out.A0 = quasitriangle_constant(out.table).value;
    out.bound = std::pow(2.0, beta - 1);
    if (!leq_rel(out.A0, out.bound, kContainmentSlack))
        throw TheoremViolation("power quasimetric", "A0 = " + fmt_num(out.A0) + " exceeds " + fmt_num(out.bound));
    return out;
}

/// Exponent with (2 A0)^eps = 2.
inline double default_chain_exponent(double A0) {
    if (A0 <= 1) return 1.0;
    return std::log(2.0) / std::log(2.0 * A0);
}

struct Metrization {
    double epsilon = 1;
    double A0 = 1;
    bool admissible = true;  // (2 A0)^eps <= 2
    DistanceTable d_eps;
    double C_eps = 1;  // max over pairs of max(rho^eps / d_eps, d_eps / rho^eps)
    int wx = -1, wy = -1;
};

/// Chain (shortest-path) metric of rho^eps.
inline Metrization chain_metric(const DistanceTable& rho, std::optional<double> eps = std::nullopt) {
    rho.validate();
    Metrization m;
    m.A0 = quasitriangle_constant(rho).value;
    m.epsilon = eps ? *eps : default_chain_exponent(m.A0);
    if (!(m.epsilon > 0 && m.epsilon <= 1)) throw ParameterError("chain exponent must lie in (0,1]");
    m.admissible = std::pow(2.0 * m.A0, m.epsilon) <= 2.0 * (1 + kContainmentSlack);
    const std::size_t n = rho.size();
    DistanceTable re = m.epsilon == 1.0 ? rho : snowflake(rho, m.epsilon);
    std::vector<double> d(re.data());
    for (std::size_t k = 0; k < n; ++k) {
        const double* dk = d.data() + k * n;
        for (std::size_t i = 0; i < n; ++i) {
            double* di = d.data() + i * n;
            const double dik = di[k];
            for (std::size_t j = 0; j < n; ++j) {
                double via = dik + dk[j];
                if (via < di[j]) di[j] = via;
            }
        }
    }
    // Enforce exact symmetry against rounding in the relaxation order.
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) d[j * n + i] = d[i * n + j] = std::min(d[i * n + j], d[j * n + i]);
    m.d_eps = DistanceTable(n, std::move(d));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double a = re(i, j), b = m.d_eps(i, j);
            double r = std::max(a / b, b / a);
            if (r > m.C_eps) m.C_eps = r, m.wx = int(i), m.wy = int(j);
        }
    return m;
}

/// Largest relative deviation between chain_metric(D^beta, 1/beta) and D.
inline double power_recovery_error(const DistanceTable& metric, double beta) {
    PowerQuasimetric pq = power_quasimetric(metric, beta);
    Metrization m = chain_metric(pq.table, 1.0 / beta);
    double err = 0;
    for (std::size_t i = 0; i < metric.size(); ++i)
        for (std::size_t j = 0; j < metric.size(); ++j)
            if (i != j) err = std::max(err, std::abs(m.d_eps(i, j) - metric(i, j)) / metric(i, j));
    return err;
}

/// Inclusions B_d(x, r^eps / C) in B_rho(x, r) in B_d(x, C r^eps), every center, every radius cell,
/// open and closed balls. C carries the containment slack.
struct SandwichReport {
    bool pass_open = true;
    bool pass_closed = true;
    double C_used = 1;
    int x = -1;
    double r = 0;
    std::string failure;
};

inline SandwichReport ball_sandwich_check(const DistanceTable& rho, const Metrization& m) {
    SandwichReport rep;
    const std::size_t n = rho.size();
    const double C = m.C_eps * (1 + kContainmentSlack), e = m.epsilon;
    rep.C_used = C;
    std::vector<double> bps;
    for (std::size_t x = 0; x < n; ++x) {
        bps.clear();
        for (std::size_t y = 0; y < n; ++y) {
            if (y == x) continue;
            const double d = m.d_eps(x, y);
            bps.push_back(rho(x, y));
            bps.push_back(std::pow(C * d, 1 / e));
            bps.push_back(std::pow(d / C, 1 / e));
        }
        std::sort(bps.begin(), bps.end());
        bps.erase(std::unique(bps.begin(), bps.end()), bps.end());
        std::vector<double> cells;
        if (!bps.empty()) {
            cells.push_back(bps.front() / 2);
            for (std::size_t i = 0; i + 1 < bps.size(); ++i) {
                cells.push_back(bps[i]);
                cells.push_back(0.5 * (bps[i] + bps[i + 1]));
            }
            cells.push_back(bps.back());
            cells.push_back(bps.back() * 2);
        }
        for (double r : cells) {
            const double re = std::pow(r, e);
            for (int closed = 0; closed < 2; ++closed) {
                auto inside = [closed](double v, double rad) { return closed ? v <= rad : v < rad; };
                for (std::size_t y = 0; y < n; ++y) {
                    const double d = m.d_eps(x, y), p = rho(x, y);
                    bool in_small = inside(d, re / C), in_mid = inside(p, r), in_big = inside(d, C * re);
                    if ((in_small && !in_mid) || (in_mid && !in_big)) {
                        (closed ? rep.pass_closed : rep.pass_open) = false;
                        if (rep.x < 0) {
                            rep.x = int(x);
                            rep.r = r;
                            rep.failure = std::string(closed ? "closed" : "open") + " inclusion fails at y=" +
                                          std::to_string(y);
                        }
                        break;
                    }
                }
            }
        }
    }
    return rep;
}

}  // namespace homspace
