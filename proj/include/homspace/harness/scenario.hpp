#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "homspace/czd.hpp"
#include "homspace/dyadic.hpp"
#include "homspace/harness/generators.hpp"
#include "homspace/harness/report.hpp"
#include "homspace/metrization.hpp"
#include "homspace/quasisym.hpp"
#include "homspace/weights.hpp"

namespace homspace {

struct ScenarioContext {
    const json& scenario;
    const json& params;  // the check entry
    std::vector<gen::Generated>& spaces;
    std::uint64_t seed;
    std::string base_dir;
};

/// Collects rows for one check; each row is stamped with the time since the previous one.
class RowSink {
public:
    explicit RowSink(std::string check) : check_(std::move(check)), last_(clock::now()) {}

    void add(const std::string& subject, const BoundCheck& c, bool required = true) {
        auto now = clock::now();
        double ms = std::chrono::duration<double, std::milli>(now - last_).count();
        last_ = now;
        rows.push_back({check_, subject, c.step, c.measured, c.bound, c.pass, required, ms, c.witness});
    }
    /// Boolean outcome as a row: measured 0 when it holds, 1 otherwise, bound 0.
    void flag(const std::string& subject, const std::string& step, bool ok, const std::string& witness = {},
              bool required = true) {
        add(subject, BoundCheck{step, ok ? 0.0 : 1.0, 0.0, ok, witness}, required);
    }
    /// Wall-clock seconds against a limit; kept out of determinism comparisons.
    void runtime(const std::string& subject, const std::string& step, double seconds, double limit) {
        add(subject, make_check(step, seconds, limit, {}, 0.0));
        rows.back().runtime = true;
    }
    void info(const std::string& subject, const std::string& step, double value, const std::string& witness = {}) {
        add(subject, BoundCheck{step, value, std::numeric_limits<double>::infinity(), true, witness}, false);
    }

    std::vector<ReportRow> rows;

private:
    using clock = std::chrono::steady_clock;
    std::string check_;
    clock::time_point last_;
};

inline RunReport run_scenario(const json& sc, const std::string& base_dir, std::optional<std::uint64_t> seed_override);

namespace checks {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline std::vector<double> betas_of(const json& p) {
    if (p.contains("betas")) return p["betas"].get<std::vector<double>>();
    return {1.5, 2.0, 3.0};
}

inline void power_recovery(ScenarioContext& c, RowSink& out) {
    const double limit = c.params.value("max_seconds", 5.0);
    for (const auto& g : c.spaces) {
        if (!is_metric(g.space.dist())) throw InvalidInput(g.label + " is not a metric");
        for (double beta : betas_of(c.params)) {
            auto t0 = std::chrono::steady_clock::now();
            double err = power_recovery_error(g.space.dist(), beta);
            double secs = seconds_since(t0);
            out.add(g.label, make_check("chain metric of D^" + fmt_num(beta) + " at 1/beta", err, 1e-9, {}, 0.0));
            out.runtime(g.label, "runtime seconds beta=" + fmt_num(beta), secs, limit);
        }
    }
}

inline DistanceTable random_metric(std::size_t n, std::uint64_t seed, int variant) {
    Rng rng(seed);
    if (variant % 2 == 0) return gen::random_doubling(n, 1 + (variant / 2) % 4, seed).space.dist();
    DistanceTable w(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) w.set(i, j, rng.uniform(1.0, 3.0));
    return chain_metric(w, 1.0).d_eps;
}

inline void power_a0(ScenarioContext& c, RowSink& out) {
    const bool equality = c.params.value("collinear_equality", false);
    for (const auto& g : c.spaces)
        for (double beta : betas_of(c.params)) {
            PowerQuasimetric pq = power_quasimetric(g.space.dist(), beta);
            out.add(g.label, make_check("A0 of D^" + fmt_num(beta), pq.A0, pq.bound, {}, 1e-12));
            if (equality)
                out.add(g.label, make_check("collinear deviation from 2^(beta-1), beta=" + fmt_num(beta),
                                            std::abs(pq.A0 - pq.bound) / pq.bound, 1e-12, {}, 0.0));
        }
    const int count = c.params.value("random_metrics", 0);
    const std::size_t rn = c.params.value("random_n", 32);
    for (double beta : betas_of(c.params)) {
        double worst = 0;
        std::string wit;
        for (int i = 0; i < count; ++i) {
            DistanceTable d = random_metric(rn, derive_seed(c.seed, std::uint64_t(i)), i);
            DistanceTable p = d.transformed([beta](double v) { return std::pow(v, beta); });
            double r = quasitriangle_constant(p).value / std::pow(2.0, beta - 1);
            if (r > worst) worst = r, wit = "metric " + std::to_string(i);
        }
        if (count > 0)
            out.add(std::to_string(count) + " random metrics",
                    make_check("max A0 / 2^(beta-1), beta=" + fmt_num(beta), worst, 1.0, wit, 1e-12));
    }
}

inline DyadicSystem default_system(const Space& s, std::uint64_t seed, double scale = 1.0) {
    SystemOptions o;
    o.delta = max_single_delta(s.A0()) * scale;
    o.seed = seed;
    return build_system(s, o);
}

inline void dyadic_soundness(ScenarioContext& c, RowSink& out) {
    const double scale = c.params.value("delta_scale", 1.0);
    for (std::size_t i = 0; i < c.spaces.size(); ++i) {
        const auto& g = c.spaces[i];
        const std::uint64_t seed = derive_seed(c.seed, i);
        DyadicSystem sys = default_system(g.space, seed, scale);
        SystemVerification v = verify_system(g.space, sys);
        for (const auto& p : v.properties) out.flag(g.label, p.name, p.pass, p.witness, p.name != "ball_nesting");
        out.add(g.label, v.doubling);
        out.info(g.label, "effective c1 / target", sys.c1_eff / sys.c1_target);
        out.info(g.label, "effective C1 / target", sys.C1_eff / sys.C1_target);
        DyadicSystem again = default_system(g.space, seed, scale);
        out.flag(g.label, "rebuild is identical", system_to_json(sys).dump() == system_to_json(again).dump());
    }
}

inline void adjacent_coverage_check(ScenarioContext& c, RowSink& out) {
    const int T = c.params.value("T", 8);
    const double min_fraction = c.params.value("min_fraction", 0.99);
    std::size_t total = 0, covered = 0;
    for (std::size_t i = 0; i < c.spaces.size(); ++i) {
        const auto& g = c.spaces[i];
        AdjacentFamily fam = build_adjacent_systems(g.space, T, max_adjacent_delta(g.space.A0()), derive_seed(c.seed, i));
        const AdjacentCoverage& cov = fam.coverage;
        total += cov.total;
        covered += cov.covered;
        const bool line = g.kind == "grid1d";
        std::string wit = cov.x >= 0 ? "uncovered B(" + std::to_string(cov.x) + ", " + fmt_num(cov.r) + ")" : "";
        out.add(g.label, make_check("uncovered fraction", 1 - cov.fraction, line ? 0.0 : 1 - min_fraction, wit, 0.0), line);
        out.add(g.label, make_check("needed dilation", cov.C_adj, cov.C_bound));
        out.info(g.label, "covering cube centre far from ball centre", double(cov.far_centre));
    }
    const double frac = total ? double(covered) / double(total) : 1.0;
    out.add("pack", make_check("uncovered fraction over all spaces", 1 - frac, 1 - min_fraction, std::to_string(total) + " balls", 0.0));
}

inline std::vector<CubeRef> all_cubes(const DyadicSystem& sys) {
    std::vector<CubeRef> v;
    for (int L = 0; L < sys.generations(); ++L)
        for (int i = 0; i < int(sys.levels[L].size()); ++i) v.push_back({L, i});
    return v;
}

inline double abs_average(const Space& s, const Cube& q, std::span<const double> f, std::span<const double> w) {
    long double a = 0, m = 0;
    for (int y : q.members) a += std::abs(f[y]) * (long double)w[y] * s.mass(y), m += (long double)w[y] * s.mass(y);
    return double(a / m);
}

inline void cz_random(ScenarioContext& c, RowSink& out) {
    const int instances = c.params.value("instances", 200);
    for (std::size_t si = 0; si < c.spaces.size(); ++si) {
        const auto& g = c.spaces[si];
        const Space& s = g.space;
        const std::size_t n = s.size();
        DyadicSystem sys = default_system(s, derive_seed(c.seed, si));
        const auto cubes = all_cubes(sys);
        Rng rng(derive_seed(c.seed, 5000 + si));
        std::vector<double> w(n), ones(n, 1.0);
        for (auto& v : w) v = rng.uniform(0.5, 2.0);
        std::size_t bad[4] = {0, 0, 0, 0};
        std::string wit[4];
        auto note = [&](int k, bool ok, const std::string& tag) {
            if (!ok && bad[k]++ == 0) wit[k] = tag;
        };
        for (int it = 0; it < instances; ++it) {
            const std::string tag = "instance " + std::to_string(it);
            const CubeRef Q0 = cubes[rng.index(cubes.size())];
            const Cube& q = cube_at(sys, Q0);
            std::vector<double> f(n, 0.0);
            for (int y : q.members)
                if (rng.coin()) f[y] = rng.uniform(0.0, 10.0) * (rng.coin() ? 1 : -1);
            f[q.members[rng.index(q.members.size())]] = 1 + rng.uniform(0.0, 10.0);

            const double a_loc = abs_average(s, q, f, ones) * (1.01 + 4 * rng.uniform());
            note(0, cz_local(s, sys, f, Q0, a_loc).all_pass(), tag);
            const double a_w = abs_average(s, q, f, w) * (1.01 + 4 * rng.uniform());
            note(1, cz_weighted(s, sys, f, Q0, a_w, w).all_pass(), tag);

            std::vector<double> h(n);
            double hmax = 0;
            for (auto& v : h) v = rng.coin() ? rng.uniform(0.0, 10.0) : 0.0, hmax = std::max(hmax, v);
            if (hmax == 0) h[0] = hmax = 1;
            const double a1 = hmax * (0.02 + 0.9 * rng.uniform());
            const double a2 = a1 * (1 + 3 * rng.uniform());
            CZDecomposition lo = cz_global(s, sys, h, a1), hi = cz_global(s, sys, h, a2);
            note(2, lo.all_pass() && hi.all_pass(), tag);
            note(3, refines(hi, lo, n), tag);
        }
        const char* names[] = {"local decomposition failures", "weighted decomposition failures",
                               "global decomposition failures", "refinement failures"};
        for (int k = 0; k < 4; ++k) out.add(g.label, make_check(names[k], double(bad[k]), 0.0, wit[k], 0.0));
        if (c.params.value("adjacent_diagnostic", false)) {
            AdjacentFamily fam = build_adjacent_systems(s, 2, max_adjacent_delta(s.A0()), derive_seed(c.seed, 9000 + si));
            std::vector<double> f(n);
            for (auto& v : f) v = rng.uniform(0.0, 4.0);
            AdjacentPointwise ap = adjacent_pointwise_diagnostic(s, fam.systems, f, iota_vec(n), 2.0);
            out.add(g.label, make_check("pointwise size off adjacent exceptional set", ap.max_ratio, ap.bound), false);
        }
    }
}

/// The four points 0, 1, 100, 101 on a line give the binary tree {0,1,2,3} > {0,1},{2,3} > singletons.
inline gen::Generated four_point_tree() {
    return {Space(gen::line_table({0.0, 1.0, 100.0, 101.0}), gen::counting(4)), "four-point tree", "inline",
            {0.0, 1.0, 100.0, 101.0}};
}

inline void cz_example(ScenarioContext& c, RowSink& out) {
    gen::Generated g = four_point_tree();
    const Space& s = g.space;
    SystemOptions o;
    o.delta = 1.0 / 13.0;
    o.seed = c.seed;
    DyadicSystem sys = build_system(s, o);
    std::vector<std::vector<int>> mid;
    for (const auto& q : sys.levels[1]) mid.push_back(q.members);
    out.flag(g.label, "middle generation is {0,1},{2,3}", mid == std::vector<std::vector<int>>{{0, 1}, {2, 3}});
    const std::vector<double> f{8, 0, 0, 0};
    auto M = dyadic_maximal(sys, f, s.mass());
    out.flag(g.label, "maximal function is (8,4,2,2)", M == std::vector<double>{8, 4, 2, 2}, join(M));
    CZDecomposition d = cz_local(s, sys, f, CubeRef{0, 0}, 3.0);
    bool one = d.cubes.size() == 1 && d.cubes[0].members == std::vector<int>{0, 1};
    out.flag(g.label, "alpha=3 selects [{0,1}]", one, decomposition_to_json(d).dump());
    out.flag(g.label, "alpha=3 properties", d.all_pass());
    bool rejected = false;
    try {
        cz_local(s, sys, f, CubeRef{0, 0}, 2.0);
    } catch (const PreconditionError&) {
        rejected = true;
    }
    out.flag(g.label, "alpha at the top average is rejected", rejected);
    CZDecomposition top = cz_global(s, sys, f, 1.0);
    out.flag(g.label, "alpha below the top average selects the top cube",
             top.cubes.size() == 1 && top.cubes[0].members.size() == 4 && top.all_pass());
    const std::vector<double> w{1, 1, 2, 2};
    CZDecomposition wd = cz_weighted(s, sys, f, CubeRef{0, 0}, 3.0, w);
    out.flag(g.label, "weighted alpha=3 selects [{0,1}]",
             wd.cubes.size() == 1 && wd.cubes[0].members == std::vector<int>{0, 1} && wd.all_pass());
}

inline std::vector<double> weight_from(const json& desc, const gen::Generated& g, std::uint64_t seed) {
    const std::string kind = desc.value("kind", std::string("one"));
    const std::size_t n = g.space.size();
    if (kind == "one") return std::vector<double>(n, 1.0);
    if (kind == "power") {
        if (g.coord.size() != n) throw InvalidInput("power weight needs coordinates");
        return gen::power_weight(g.coord, desc.value("a", 1.0), desc.value("h", 1.0));
    }
    if (kind == "random") {
        Rng rng(seed);
        std::vector<double> w(n);
        for (auto& v : w) v = rng.uniform(desc.value("lo", 0.5), desc.value("hi", 2.0));
        return w;
    }
    throw InvalidInput("unknown weight kind '" + kind + "'");
}

inline std::string weight_label(const json& desc) {
    std::string k = desc.value("kind", std::string("one"));
    if (k == "power") return "(|x|+" + fmt_num(desc.value("h", 1.0)) + ")^" + fmt_num(desc.value("a", 1.0));
    return k;
}

inline void weight_chain(ScenarioContext& c, RowSink& out) {
    const double q = c.params.value("q", 2.0);
    const int T = c.params.value("T", 8);
    const double limit = c.params.value("max_seconds", std::numeric_limits<double>::infinity());
    json weights = c.params.contains("weights") ? c.params["weights"] : json::array({json{{"kind", "one"}}});
    auto t0 = std::chrono::steady_clock::now();
    for (std::size_t si = 0; si < c.spaces.size(); ++si) {
        const auto& g = c.spaces[si];
        AdjacentFamily fam = build_adjacent_systems(g.space, T, max_adjacent_delta(g.space.A0()), derive_seed(c.seed, si));
        for (std::size_t wi = 0; wi < weights.size(); ++wi) {
            const std::vector<double> w = weight_from(weights[wi], g, derive_seed(c.seed, 300 + wi));
            const std::string subj = g.label + " w=" + weight_label(weights[wi]);
            LogBmoPipeline P = log_bmo_pipeline(g.space, w, q, fam.systems, derive_seed(c.seed, wi), false);
            for (const auto& r : P.rows) out.add(subj, BoundCheck{r.step + ": " + r.check.step, r.check.measured, r.check.bound, r.check.pass, r.check.witness}, r.step[0] != '5');
            if (weights[wi].value("kind", std::string("one")) == "one") {
                SetCollection balls = ball_collection(g.space);
                double ap = ap_constant(g.space, w, balls, 2.0).value;
                double rh = rh_constant(g.space, w, balls, q).value;
                double cd = weight_doubling(g.space, w) / g.space.A1();
                out.add(subj, make_check("|A_2 - 1| over balls", std::abs(ap - 1), 1e-12, {}, 0.0));
                out.add(subj, make_check("|RH - 1| over balls", std::abs(rh - 1), 1e-12, {}, 0.0));
                out.add(subj, make_check("|C_dbl / A1 - 1|", std::abs(cd - 1), 1e-12, {}, 0.0));
                out.add(subj, make_check("BMO of log w over balls", P.ball_bmo, 0.0, {}, 0.0));
                out.add(subj, make_check("sum of dyadic BMO of log w", P.dyadic_bmo_sum, 0.0, {}, 0.0));
            }
        }
    }
    if (std::isfinite(limit)) out.runtime("all", "runtime seconds", seconds_since(t0), limit);
}

inline Ball random_ball(const Space& s, Rng& rng) {
    const std::size_t n = s.size();
    Ball b;
    b.center = int(rng.index(n));
    const double d = s.dist(std::size_t(b.center), rng.index(n));
    const double base = d > 0 ? d : (n > 1 ? s.min_positive_dist() : 1.0);
    b.radius = base * rng.uniform(0.25, 1.5);
    b.closed = rng.coin();
    return b;
}

inline void covering(ScenarioContext& c, RowSink& out) {
    const int families = c.params.value("families", 1000);
    const int max_balls = c.params.value("max_balls", 12);
    for (std::size_t si = 0; si < c.spaces.size(); ++si) {
        const auto& g = c.spaces[si];
        const Space& s = g.space;
        Rng rng(derive_seed(c.seed, si));
        std::size_t bad_basic = 0, bad_vitali = 0;
        std::string wb, wv;
        for (int it = 0; it < families; ++it) {
            std::vector<Ball> fam(1 + rng.index(std::size_t(max_balls)));
            for (auto& b : fam) b = random_ball(s, rng);
            CoverResult r = basic_cover(s, fam);
            if (!r.all_pass() && bad_basic++ == 0) wb = "family " + std::to_string(it) + ": " + r.failure;

            std::vector<int> A;
            for (std::size_t y = 0; y < s.size(); ++y)
                if (rng.uniform() < 0.3) A.push_back(int(y));
            if (A.empty()) A.push_back(int(rng.index(s.size())));
            std::vector<Ball> vf;
            const double tiny = s.size() > 1 ? s.min_positive_dist() / 2 : 1.0;
            for (int a : A) {
                vf.push_back({a, tiny, true});
                if (rng.coin()) {
                    Ball b = random_ball(s, rng);
                    vf.push_back({a, b.radius, true});
                }
            }
            CoverResult v = vitali_cover(s, A, vf);
            if (!v.all_pass() && bad_vitali++ == 0) wv = "family " + std::to_string(it) + ": " + v.failure;
        }
        out.add(g.label, make_check("basic covering failures", double(bad_basic), 0.0, wb, 0.0));
        out.add(g.label, make_check("Vitali covering failures", double(bad_vitali), 0.0, wv, 0.0));
        bool raised = false;
        if (s.size() > 1) {
            try {
                vitali_cover(s, {0}, {Ball{0, s.diameter(), true}});
            } catch (const PreconditionError&) {
                raised = true;
            }
            out.flag(g.label, "missing fine ball is reported", raised);
        }
    }
}

inline void reimann(ScenarioContext& c, RowSink& out) {
    const json map = c.params.value("map", json{{"kind", "identity"}});
    const std::string kind = map.value("kind", std::string("identity"));
    const double limit = c.params.value("max_seconds", std::numeric_limits<double>::infinity());
    ReimannOptions opt;
    opt.T = c.params.value("T", 8);
    opt.tau = c.params.value("tau", 0.5);
    opt.seed = c.seed;
    struct Job {
        gen::Generated src, tgt;
        PointMap f;
    };
    std::vector<Job> jobs;
    if (kind == "stretch") {
        auto [s, t] = gen::stretch_pair(map.value("n", 128), map.value("gamma", 2.0));
        PointMap f = PointMap::identity(s.space.size());
        jobs.push_back({std::move(s), std::move(t), std::move(f)});
    } else {
        for (const auto& g : c.spaces) {
            const std::size_t n = g.space.size();
            std::vector<int> p = iota_vec(n);
            if (kind == "reversal") std::reverse(p.begin(), p.end());
            else if (kind != "identity") throw InvalidInput("unknown map kind '" + kind + "'");
            jobs.push_back({g, g, PointMap(p)});
        }
    }
    for (const auto& job : jobs) {
        auto t0 = std::chrono::steady_clock::now();
        const std::string subj = job.tgt.label + (kind == "stretch" ? "" : " " + kind);
        ReimannReport R = reimann_pipeline(job.src.space, job.tgt.space, job.f, opt);
        for (const auto& r : R.rows) {
            bool required = r.step.rfind("weights 5", 0) != 0 && r.step != "jacobian stated constant";
            out.add(subj, BoundCheck{r.step + ": " + r.check.step, r.check.measured, r.check.bound, r.check.pass, r.check.witness}, required);
        }
        out.info(subj, "BMO of log J over balls", R.bmo_log_j);
        out.info(subj, "chosen reverse Hoelder exponent minus one", R.chosen_eps);
        out.info(subj, "envelope corners", double(R.profile.thetas.size()));
        if (c.params.value("expect_unit_jacobian", false)) {
            double dev = 0;
            for (double j : R.jacobian.finest) dev = std::max(dev, std::abs(j - 1));
            out.add(subj, make_check("max |J - 1|", dev, 0.0, {}, 0.0));
            out.add(subj, make_check("BMO of log J", R.bmo_log_j, 0.0, {}, 0.0));
        }
        if (std::isfinite(limit)) out.runtime(subj, "runtime seconds", seconds_since(t0), limit);
    }
}

inline void radon_nikodym_check(ScenarioContext& c, RowSink& out) {
    const std::size_t samples = c.params.value("samples", 10000);
    const std::size_t exhaustive = c.params.value("exhaustive_limit", 12);
    for (std::size_t si = 0; si < c.spaces.size(); ++si) {
        const auto& g = c.spaces[si];
        const Space& s = g.space;
        Rng rng(derive_seed(c.seed, si));
        std::vector<double> nu(s.size());
        for (auto& v : nu) v = rng.uniform() < 0.2 ? 0.0 : rng.uniform(0.0, 3.0);
        RadonNikodym r = radon_nikodym(s, nu, derive_seed(c.seed, 100 + si), samples, exhaustive);
        double dev = 0;
        for (std::size_t i = 0; i < s.size(); ++i) dev = std::max(dev, std::abs(r.derivative[i] * s.mass(i) - nu[i]) / std::max(nu[i], 1e-300));
        out.add(g.label, make_check("derivative against atom ratio", dev, 1e-15, {}, 0.0));
        out.add(g.label, make_check("integral identity relative error", r.max_identity_error, 1e-12,
                                    std::to_string(r.subsets_checked) + " subsets", 0.0));
    }
}

inline void space_diagnostics(ScenarioContext& c, RowSink& out) {
    for (const auto& g : c.spaces) {
        const Space& s = g.space;
        const Witnessed& a0 = s.A0_witness();
        out.info(g.label, "A0", s.A0(), "x=" + std::to_string(a0.x) + " y=" + std::to_string(a0.y) + " z=" + std::to_string(a0.z));
        out.info(g.label, "A1", s.A1(), "x=" + std::to_string(s.A1_witness().x) + " r=" + fmt_num(s.A1_witness().radius));
        if (c.params.contains("expect_A0"))
            out.add(g.label, make_check("|A0 - expected|", std::abs(s.A0() - c.params["expect_A0"].get<double>()), 1e-12, {}, 0.0));
        if (c.params.contains("expect_A1"))
            out.add(g.label, make_check("|A1 - expected|", std::abs(s.A1() - c.params["expect_A1"].get<double>()), 1e-12, {}, 0.0));
        for (const auto& d : doubling_power_checks(s)) out.add(g.label, d);
        std::optional<std::pair<double, double>> ak;
        if (c.params.contains("alpha")) {
            const double alpha = c.params["alpha"];
            AlphaRegularity ar = check_alpha_regular(s, alpha);
            out.info(g.label, "kappa for alpha=" + fmt_num(alpha), ar.kappa);
            if (c.params.contains("expect_kappa"))
                out.add(g.label, make_check("|kappa - expected|", std::abs(ar.kappa - c.params["expect_kappa"].get<double>()), 1e-12, {}, 0.0));
            ak = std::make_pair(alpha, ar.kappa);
        }
        if (c.params.contains("tau")) {
            TauAnnuli ta = check_tau_annuli(s, c.params["tau"], ak);
            out.flag(g.label, "annuli nonempty", ta.holds,
                     ta.holds ? "" : "x=" + std::to_string(ta.x) + " r=" + fmt_num(ta.r), c.params.value("require_annuli", false));
            out.flag(g.label, "regularity implies annuli", ta.implication_consistent);
        }
    }
}

/// Powers of a metric: the chain metric at 1/beta returns the metric, and quasiballs of D^beta are
/// metric balls with radius r^(1/beta).
inline void power_construction(ScenarioContext& c, RowSink& out) {
    const double alpha = c.params.value("alpha", 1.0), tau = c.params.value("tau", 0.5);
    for (const auto& g : c.spaces) {
        const Space& D = g.space;
        for (double beta : betas_of(c.params)) {
            const std::string b = "beta=" + fmt_num(beta);
            PowerQuasimetric pq = power_quasimetric(D.dist(), beta);
            out.add(g.label, make_check("A0 of D^beta against 2^(beta-1), " + b, pq.A0, pq.bound, {}, 1e-12));
            out.add(g.label, make_check("chain metric at eps=1/beta against D, " + b, power_recovery_error(D.dist(), beta), 1e-9, {}, 0.0));
            Space rho(pq.table, D.mass(), D.ids());
            std::size_t mismatches = 0;
            std::string wit;
            for (std::size_t x = 0; x < D.size(); ++x) {
                auto sorted = rho.sorted(x);
                std::vector<double> radii;
                for (std::size_t k = 0; k + 1 < sorted.size(); ++k)
                    if (sorted[k + 1] > sorted[k]) radii.push_back(0.5 * (sorted[k] + sorted[k + 1]));
                radii.push_back(2 * sorted.back() + 1);
                for (double r : radii)
                    if (rho.ball_count(x, r) != D.ball_count(x, std::pow(r, 1 / beta)) && mismatches++ == 0)
                        wit = "x=" + std::to_string(x) + " r=" + fmt_num(r);
            }
            out.add(g.label, make_check("quasiball against metric ball at r^(1/beta), " + b, double(mismatches), 0.0, wit, 0.0));
            AlphaRegularity ar = check_alpha_regular(rho, alpha * (1 / beta));
            out.info(g.label, "regularity kappa of D^beta at alpha/beta, " + b, ar.kappa);
            TauAnnuli ta = check_tau_annuli(rho, std::pow(tau, beta));
            out.flag(g.label, "annuli of D^beta at tau^beta, " + b, ta.holds, {}, false);
        }
        if (D.poincare()) out.info(g.label, "assumed Poincare exponent", D.poincare()->p);
    }
}


inline void determinism(ScenarioContext& c, RowSink& out) {
    for (const auto& name : c.params.at("inner_files")) {
        const std::string path = (std::filesystem::path(c.base_dir) / name.get<std::string>()).string();
        const json inner = read_json_file(path);
        RunReport a = run_scenario(inner, c.base_dir, std::nullopt);
        RunReport b = run_scenario(inner, c.base_dir, std::nullopt);
        const std::string ja = report_json(a, false).dump(2), jb = report_json(b, false).dump(2);
        out.flag(name.get<std::string>(), "JSON report identical on rerun", ja == jb, fnv1a_hex(ja) + " vs " + fnv1a_hex(jb));
    }
}

}  // namespace checks

using CheckFn = std::function<void(ScenarioContext&, RowSink&)>;

inline const std::map<std::string, CheckFn>& check_registry() {
    static const std::map<std::string, CheckFn> reg{
        {"space_diagnostics", checks::space_diagnostics},
        {"power_recovery", checks::power_recovery},
        {"power_a0", checks::power_a0},
        {"power_construction", checks::power_construction},
        {"dyadic_soundness", checks::dyadic_soundness},
        {"adjacent_coverage", checks::adjacent_coverage_check},
        {"cz_random", checks::cz_random},
        {"cz_example", checks::cz_example},
        {"weight_chain", checks::weight_chain},
        {"covering", checks::covering},
        {"reimann", checks::reimann},
        {"radon_nikodym", checks::radon_nikodym_check},
        {"determinism", checks::determinism},
    };
    return reg;
}

/// Runs every check of a scenario against its spaces. An expectation is met when the required rows
/// all pass ("pass"), some fail ("fail"), or the check raises ("error").
inline RunReport run_scenario(const json& sc, const std::string& base_dir, std::optional<std::uint64_t> seed_override) {
    RunReport rep;
    rep.scenario = sc.value("name", std::string("unnamed"));
    rep.seed = seed_override ? *seed_override : sc.value("seed", std::uint64_t(0));
    rep.input_hash = fnv1a_hex(sc.dump());
    std::vector<gen::Generated> spaces;
    if (sc.contains("spaces"))
        for (const auto& sp : sc["spaces"]) spaces.push_back(gen::from_json(sp, rep.seed));
    if (sc.contains("pack"))
        for (const auto& sp : gen::mixed_pack(sc["pack"].value("seed", rep.seed))) spaces.push_back(gen::from_json(sp, rep.seed));
    const json empty = json::object();
    for (const auto& chk : sc.value("checks", json::array())) {
        const std::string name = detail::require(chk, "check").get<std::string>();
        CheckOutcome oc;
        oc.check = name;
        oc.expect = chk.value("expect", std::string("pass"));
        auto it = check_registry().find(name);
        RowSink sink(name);
        try {
            if (it == check_registry().end()) throw InvalidInput("unknown check '" + name + "'");
            ScenarioContext ctx{sc, chk, spaces, derive_seed(rep.seed, std::hash<std::string>{}(name) & 0xffff), base_dir};
            it->second(ctx, sink);
        } catch (const std::exception& e) {
            oc.error = e.what();
        }
        for (const auto& r : sink.rows)
            if (r.required && !r.pass) ++oc.failed;
        oc.rows = sink.rows.size();
        if (oc.expect == "error") oc.met = !oc.error.empty();
        else if (oc.expect == "fail") oc.met = oc.error.empty() && oc.failed > 0;
        else oc.met = oc.error.empty() && oc.failed == 0;
        rep.outcomes.push_back(oc);
        rep.rows.insert(rep.rows.end(), sink.rows.begin(), sink.rows.end());
    }
    return rep;
}

inline RunReport run_scenario_file(const std::string& path, std::optional<std::uint64_t> seed_override = std::nullopt) {
    const json sc = read_json_file(path);
    return run_scenario(sc, std::filesystem::path(path).parent_path().string(), seed_override);
}

}  // namespace homspace
