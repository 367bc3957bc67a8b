#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "homspace/collection.hpp"
#include "homspace/czd.hpp"
#include "homspace/dyadic.hpp"
#include "homspace/io.hpp"

namespace homspace {

inline void validate_weight(const Space& s, std::span<const double> w) {
    if (w.size() != s.size()) throw InvalidInput("weight has wrong length");
    for (std::size_t i = 0; i < w.size(); ++i)
        if (!(w[i] > 0) || !std::isfinite(w[i]))
            throw InvalidInput("weight must be positive and finite (entry " + std::to_string(i) + ")");
}

struct ConstantResult {
    double value = 1;
    std::string witness;
};

/// sup over S of (avg_S w)(avg_S w^(-1/(p-1)))^(p-1), p > 1.
inline ConstantResult ap_constant(const Space& s, std::span<const double> w, const SetCollection& col, double p) {
    validate_weight(s, w);
    if (!(p > 1) || !std::isfinite(p)) throw ParameterError("A_p requires 1 < p < infinity");
    const std::size_t n = s.size();
    std::array<std::vector<double>, 3> at{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        at[0][i] = s.mass(i);
        at[1][i] = w[i] * s.mass(i);
        at[2][i] = std::pow(w[i], -1.0 / (p - 1)) * s.mass(i);
    }
    auto [v, wit] = sup_additive<3>(col, at, [p](const std::array<long double, 3>& S) {
        return double((S[1] / S[0]) * std::pow(S[2] / S[0], (long double)(p - 1)));
    });
    return {v, wit};
}

/// sup over S of (avg_S w^q)^(1/q) / avg_S w, q > 1.
inline ConstantResult rh_constant(const Space& s, std::span<const double> w, const SetCollection& col, double q) {
    validate_weight(s, w);
    if (!(q > 1) || !std::isfinite(q)) throw ParameterError("reverse Hoelder exponent must exceed 1");
    const std::size_t n = s.size();
    std::array<std::vector<double>, 3> at{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        at[0][i] = s.mass(i);
        at[1][i] = w[i] * s.mass(i);
        at[2][i] = std::pow(w[i], q) * s.mass(i);
    }
    auto [v, wit] = sup_additive<3>(col, at, [q](const std::array<long double, 3>& S) {
        return double(std::pow(S[2] / S[0], (long double)(1 / q)) / (S[1] / S[0]));
    });
    return {v, wit};
}

/// sup over S of the mean oscillation avg_S |f - avg_S f|.
inline ConstantResult bmo_norm(const Space& s, std::span<const double> f, const SetCollection& col) {
    if (f.size() != s.size()) throw InvalidInput("function has wrong length");
    ConstantResult best{0, ""};
    for (std::size_t c = 0; c < col.chains.size(); ++c) {
        const NestedChain& ch = col.chains[c];
        long double m = 0, fm = 0;
        std::size_t pos = 0;
        for (std::size_t k = 0; k < ch.cuts.size(); ++k) {
            for (; pos < ch.cuts[k]; ++pos) {
                int y = ch.order[pos];
                m += s.mass(y);
                fm += (long double)f[y] * s.mass(y);
            }
            const long double mean = fm / m;
            long double dev = 0;
            for (std::size_t i = 0; i < pos; ++i) {
                int y = ch.order[i];
                dev += std::abs((long double)f[y] - mean) * s.mass(y);
            }
            double v = double(dev / m);
            if (v > best.value) best = {v, col.describe(c, k)};
        }
    }
    return best;
}

inline std::vector<double> weighted_atoms(const Space& s, std::span<const double> w) {
    std::vector<double> a(s.size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = w[i] * s.mass(i);
    return a;
}

/// Doubling constant of w dmu over balls.
inline double weight_doubling(const Space& s, std::span<const double> w) {
    return s.ratio_sup(weighted_atoms(s, w), 2.0).value;
}

inline std::vector<double> log_of(std::span<const double> w) {
    std::vector<double> l(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) l[i] = std::log(w[i]);
    return l;
}

// ---------------------------------------------------------------------------------------------
// Reverse Hoelder on cubes implies a uniform absolute continuity of w against mu.

/// Largest mu(E)/mu(Q) over cubes Q and fractional subsets E of Q with w(E) <= gamma w(Q): fill E
/// with the atoms of smallest weight first. Bounds the same sup over genuine subsets.
inline std::pair<double, std::string> knapsack_lambda(const Space& s, std::span<const double> w,
                                                      const DyadicSystem& sys, double gamma) {
    double best = 0;
    std::string wit;
    std::vector<int> mem;
    for (const auto& lvl : sys.levels)
        for (const Cube& q : lvl) {
            mem = q.members;
            std::sort(mem.begin(), mem.end(), [&](int a, int b) { return w[a] != w[b] ? w[a] < w[b] : a < b; });
            long double wq = 0, mq = 0;
            for (int y : mem) wq += w[y] * s.mass(y), mq += s.mass(y);
            long double budget = gamma * wq, took = 0;
            for (int y : mem) {
                long double wy = w[y] * s.mass(y);
                if (wy <= budget) {
                    budget -= wy;
                    took += s.mass(y);
                } else {
                    took += s.mass(y) * (budget / wy);
                    break;
                }
            }
            double r = double(took / mq);
            if (r > best) best = r, wit = "Q(k=" + std::to_string(q.level) + ", centre=" + std::to_string(q.center) + ")";
        }
    return {best, wit};
}

struct AbsContinuity {
    double q = 2, eps = 0.5;  // eps = 1 - 1/q
    double rh = 1;            // dyadic reverse Hoelder constant
    double gamma = 0.5;
    double lambda = 0;         // measured sup
    double lambda_theory = 0;  // 1 - ((1 - gamma) / rh)^(1/eps)
    BoundCheck subset_bound;   // w(E)/w(Q) <= rh (mu(E)/mu(Q))^eps, worst tested ratio against 1
    BoundCheck lambda_bound;   // lambda <= lambda_theory
    std::size_t subsets = 0;
};

inline AbsContinuity rh_absolute_continuity(const Space& s, std::span<const double> w, const DyadicSystem& sys,
                                            double q, double gamma, std::uint64_t seed = 0,
                                            std::size_t random_subsets = 10000, std::size_t exhaustive_limit = 12) {
    validate_weight(s, w);
    if (!(gamma > 0 && gamma < 1)) throw ParameterError("gamma must lie in (0,1)");
    AbsContinuity r;
    r.q = q;
    r.eps = 1 - 1 / q;
    r.gamma = gamma;
    r.rh = rh_constant(s, w, dyadic_collection(sys), q).value;
    r.lambda_theory = 1 - std::pow((1 - gamma) / r.rh, 1 / r.eps);
    auto [lam, lw] = knapsack_lambda(s, w, sys, gamma);
    r.lambda = lam;
    r.lambda_bound = make_check("absolute continuity lambda", lam, r.lambda_theory, lw);

    Rng rng(seed);
    double worst = 0;
    std::string wit;
    auto test = [&](const Cube& q0, const std::vector<char>& in, long double wq, long double mq) {
        long double we = 0, me = 0;
        for (std::size_t i = 0; i < q0.members.size(); ++i)
            if (in[i]) we += w[q0.members[i]] * s.mass(q0.members[i]), me += s.mass(q0.members[i]);
        ++r.subsets;
        if (me == 0) return;
        double ratio = double((we / wq) / (r.rh * std::pow(me / mq, (long double)r.eps)));
        if (ratio > worst) worst = ratio, wit = "Q(k=" + std::to_string(q0.level) + ", centre=" + std::to_string(q0.center) + ")";
    };
    for (const auto& lvl : sys.levels)
        for (const Cube& q0 : lvl) {
            const std::size_t m = q0.members.size();
            long double wq = 0, mq = 0;
            for (int y : q0.members) wq += w[y] * s.mass(y), mq += s.mass(y);
            std::vector<char> in(m);
            if (m <= exhaustive_limit) {
                for (std::uint64_t mask = 1; mask < (std::uint64_t(1) << m); ++mask) {
                    for (std::size_t i = 0; i < m; ++i) in[i] = (mask >> i) & 1;
                    test(q0, in, wq, mq);
                }
                continue;
            }
            std::vector<int> idx = iota_vec(m);
            std::sort(idx.begin(), idx.end(), [&](int a, int b) { return w[q0.members[a]] > w[q0.members[b]]; });
            std::fill(in.begin(), in.end(), 0);
            for (int i : idx) {
                in[i] = 1;
                test(q0, in, wq, mq);
            }
            for (std::size_t t = 0; t < random_subsets; ++t) {
                for (std::size_t i = 0; i < m; ++i) in[i] = rng.coin();
                test(q0, in, wq, mq);
            }
        }
    r.subset_bound = make_check("reverse Hoelder subset bound", worst, 1.0, wit);
    return r;
}

/// Ball reverse Hoelder transfers to each system: [w]_RH(D) <= [w]_RH A1^(m/q) C_dbl^m, m = 1 + log2(C1/c1).
inline std::vector<BoundCheck> rh_to_dyadic_rh(const Space& s, std::span<const double> w,
                                               const std::vector<DyadicSystem>& systems, double q) {
    const double rh_ball = rh_constant(s, w, ball_collection(s), q).value;
    const double cdbl = weight_doubling(s, w);
    std::vector<BoundCheck> out;
    for (std::size_t t = 0; t < systems.size(); ++t) {
        const DyadicSystem& sys = systems[t];
        ConstantResult d = rh_constant(s, w, dyadic_collection(sys), q);
        const double m = sys.m();
        out.push_back(make_check("dyadic reverse Hoelder [system " + std::to_string(t) + "]", d.value,
                                 rh_ball * std::pow(s.A1(), m / q) * std::pow(cdbl, m), d.witness));
    }
    return out;
}

struct RhToAp {
    double C_dydbl = 1;  // dyadic doubling constant of w dmu
    int M = 1;           // generations of alpha per stopping step: alpha_s = C^(M s) alpha_0
    double gamma = 0.5, lambda = 0;
    double q_bar_sup = 2;  // 1 + log(1/lambda) / (M log C)
    double q_bar = 1.5;
    double p = 3;
    double c = 1;
    double ap_measured = 1;
    BoundCheck stopping_sets;  // mu(E^s) <= lambda^s mu(Q0), worst ratio against 1
    BoundCheck integral_bound; // ((1/w(Q))int_Q w^(1-q_bar))^(1/q_bar) <= c mu(Q)/w(Q), worst ratio against 1
    BoundCheck ap_bound;       // [w]_Ap(D) <= c^p
};

/// Weighted stopping time argument: reverse Hoelder on cubes gives A_p on cubes with
/// p = q_bar/(q_bar - 1). Chooses gamma on a grid to widen the admissible range of q_bar and takes
/// q_bar halfway into it.
inline RhToAp rh_to_ap(const Space& s, std::span<const double> w, const DyadicSystem& sys) {
    validate_weight(s, w);
    RhToAp r;
    const std::vector<double> nu = weighted_atoms(s, w);
    r.C_dydbl = dyadic_doubling(sys, nu).value;
    const double C = r.C_dydbl;
    const bool flat = C <= 1 + kContainmentSlack;
    double best = -1;
    for (int g = 1; g <= 19; ++g) {
        const double gamma = 0.05 * g;
        const double lam = knapsack_lambda(s, w, sys, gamma).first;
        if (!(lam < 1)) continue;
        int M = flat ? 1 : std::max(1, int(std::ceil(1 + std::log(1 / gamma) / std::log(C))));
        double width = flat ? std::numeric_limits<double>::infinity() : std::log(1 / lam) / (M * std::log(C));
        if (width > best) best = width, r.gamma = gamma, r.lambda = lam, r.M = M;
    }
    if (best < 0) throw TheoremViolation("reverse Hoelder to A_p", "no gamma gives lambda < 1");
    r.q_bar_sup = 1 + best;
    r.q_bar = std::min(1 + 0.5 * best, 3.0);
    r.p = r.q_bar / (r.q_bar - 1);
    const double t = std::pow(C, r.M * (r.q_bar - 1));
    r.c = std::pow(1 + t / (1 - t * r.lambda), 1 / r.q_bar);

    const int G = sys.generations();
    double worst_sets = 0, worst_int = 0;
    std::string wsets, wint;
    std::vector<double> finv(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) finv[i] = 1 / w[i];
    for (int L0 = 0; L0 < G; ++L0)
        for (std::size_t i0 = 0; i0 < sys.levels[L0].size(); ++i0) {
            const Cube& q0 = sys.levels[L0][i0];
            const std::string name = "Q(k=" + std::to_string(q0.level) + ", centre=" + std::to_string(q0.center) + ")";
            long double wq = 0, mq = 0, lhs = 0;
            for (int y : q0.members) {
                wq += nu[y];
                mq += s.mass(y);
                lhs += std::pow((long double)w[y], (long double)(1 - r.q_bar)) * s.mass(y);
            }
            double ratio = double(std::pow(lhs / wq, (long double)(1 / r.q_bar)) / (r.c * mq / wq));
            if (ratio > worst_int) worst_int = ratio, wint = name;
            auto Mw = dyadic_maximal(sys, finv, nu, CubeRef{L0, int(i0)});
            const double alpha0 = double(mq / wq);
            for (int st = 0;; ++st) {
                const double alpha = alpha0 * std::pow(C, r.M * st);
                long double me = 0;
                for (int y : q0.members)
                    if (Mw[y] > alpha) me += s.mass(y);
                if (me == 0) break;
                double rr = double(me / (std::pow((long double)r.lambda, st) * mq));
                if (rr > worst_sets) worst_sets = rr, wsets = name + " step " + std::to_string(st);
                if (flat || st > 4096) break;
            }
        }
    r.stopping_sets = make_check("stopping set decay", worst_sets, 1.0, wsets);
    r.integral_bound = make_check("reverse Hoelder integral bound", worst_int, 1.0, wint);
    ConstantResult ap = ap_constant(s, w, dyadic_collection(sys), r.p);
    r.ap_measured = ap.value;
    r.ap_bound = make_check("dyadic A_p from reverse Hoelder", ap.value, std::pow(r.c, r.p), ap.witness);
    return r;
}

struct ApLogBmo {
    double p = 2;
    double ap = 1;
    BoundCheck upper;  // avg_Q e^(l - l_Q) <= [w]_Ap
    BoundCheck lower;  // avg_Q e^((l_Q - l)/(p-1)) <= [w]_Ap^(1/(p-1))
    BoundCheck bmo;    // ||log w||_BMO(D) <= [w]_Ap + (p-1)[w]_Ap^(1/(p-1))
};

inline ApLogBmo ap_log_bmo(const Space& s, std::span<const double> w, const DyadicSystem& sys, double p) {
    ApLogBmo r;
    r.p = p;
    SetCollection col = dyadic_collection(sys);
    r.ap = ap_constant(s, w, col, p).value;
    const std::vector<double> l = log_of(w);
    double up = 0, lo = 0;
    std::string wu, wl;
    for (const auto& lvl : sys.levels)
        for (const Cube& q : lvl) {
            long double m = 0, lm = 0;
            for (int y : q.members) m += s.mass(y), lm += l[y] * (long double)s.mass(y);
            const long double lq = lm / m;
            long double a = 0, b = 0;
            for (int y : q.members) {
                a += std::exp((long double)l[y] - lq) * s.mass(y);
                b += std::exp((lq - l[y]) / (p - 1)) * s.mass(y);
            }
            const std::string name = "Q(k=" + std::to_string(q.level) + ", centre=" + std::to_string(q.center) + ")";
            if (double(a / m) > up) up = double(a / m), wu = name;
            if (double(b / m) > lo) lo = double(b / m), wl = name;
        }
    r.upper = make_check("exponential upper average", up, r.ap, wu);
    r.lower = make_check("exponential lower average", lo, std::pow(r.ap, 1 / (p - 1)), wl);
    ConstantResult b = bmo_norm(s, l, col);
    r.bmo = make_check("dyadic BMO of log w", b.value, r.ap + (p - 1) * std::pow(r.ap, 1 / (p - 1)), b.witness);
    return r;
}

struct PipelineRow {
    std::string step;
    BoundCheck check;
};

struct LogBmoPipeline {
    double q = 2;
    double rh_ball = 1;
    double C_dbl = 1;
    std::vector<PipelineRow> rows;
    double ball_bmo = 0;
    double dyadic_bmo_sum = 0;
    double C_empirical = 0;  // ball BMO / sum over systems of dyadic BMO (reported, not asserted)
    bool pass() const {
        return std::all_of(rows.begin(), rows.end(), [](const PipelineRow& r) { return r.check.pass; });
    }
    std::string first_failure() const {
        for (const auto& r : rows)
            if (!r.check.pass) return r.step + " (" + r.check.step + ")";
        return {};
    }
};

/// Reverse Hoelder on balls, through each adjacent system, to a BMO bound for log w on balls.
/// Throws TheoremViolation naming the first failing step when `strict`.
inline LogBmoPipeline log_bmo_pipeline(const Space& s, std::span<const double> w, double q,
                                       const std::vector<DyadicSystem>& systems, std::uint64_t seed = 0,
                                       bool strict = true) {
    validate_weight(s, w);
    LogBmoPipeline P;
    P.q = q;
    SetCollection balls = ball_collection(s);
    P.rh_ball = rh_constant(s, w, balls, q).value;
    P.C_dbl = weight_doubling(s, w);
    auto add = [&](std::string step, BoundCheck c) { P.rows.push_back({std::move(step), std::move(c)}); };
    auto dyadic = rh_to_dyadic_rh(s, w, systems, q);
    const std::vector<double> l = log_of(w);
    for (std::size_t t = 0; t < systems.size(); ++t) {
        const std::string tag = "[" + std::to_string(t) + "]";
        add("1 dyadic reverse Hoelder" + tag, dyadic[t]);
        AbsContinuity ac = rh_absolute_continuity(s, w, systems[t], q, 0.5, derive_seed(seed, t));
        add("2 subset bound" + tag, ac.subset_bound);
        add("2 absolute continuity" + tag, ac.lambda_bound);
        RhToAp ra = rh_to_ap(s, w, systems[t]);
        add("3 stopping sets" + tag, ra.stopping_sets);
        add("3 integral bound" + tag, ra.integral_bound);
        add("3 A_p" + tag, ra.ap_bound);
        ApLogBmo ab = ap_log_bmo(s, w, systems[t], ra.p);
        add("4 exponential upper" + tag, ab.upper);
        add("4 exponential lower" + tag, ab.lower);
        add("4 dyadic BMO" + tag, ab.bmo);
        P.dyadic_bmo_sum += ab.bmo.measured;
    }
    P.ball_bmo = bmo_norm(s, l, balls).value;
    P.C_empirical = P.dyadic_bmo_sum > 0 ? P.ball_bmo / P.dyadic_bmo_sum : 0.0;
    add("5 ball BMO against dyadic sum",
        BoundCheck{"empirical constant", P.C_empirical, std::numeric_limits<double>::infinity(), true,
                   "ball BMO " + fmt_num(P.ball_bmo) + ", dyadic sum " + fmt_num(P.dyadic_bmo_sum)});
    if (strict && !P.pass()) throw TheoremViolation(P.first_failure(), "bound violated");
    return P;
}

inline std::string pipeline_csv(const LogBmoPipeline& P) {
    std::ostringstream os;
    os << "step,measured,bound,slack,witness\n";
    for (const auto& r : P.rows)
        os << '"' << r.step << "\"," << fmt_num(r.check.measured) << ',' << fmt_num(r.check.bound) << ','
           << fmt_num(r.check.slack()) << ",\"" << r.check.witness << "\"\n";
    return os.str();
}

inline json pipeline_json(const LogBmoPipeline& P) {
    json j;
    j["q"] = P.q;
    j["rh_ball"] = P.rh_ball;
    j["C_dbl"] = P.C_dbl;
    j["ball_bmo"] = P.ball_bmo;
    j["dyadic_bmo_sum"] = P.dyadic_bmo_sum;
    j["C_empirical"] = P.C_empirical;
    j["pass"] = P.pass();
    return j;
}

}  // namespace homspace
