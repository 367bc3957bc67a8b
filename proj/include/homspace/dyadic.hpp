#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "homspace/io.hpp"
#include "homspace/space.hpp"

namespace homspace {

/// Generations k_min..k_max: delta^k_min > diameter (one cube), delta^k_max < min positive distance
/// (singletons).
struct LevelRange {
    int k_min = 0;
    int k_max = 0;
    int count() const { return k_max - k_min + 1; }
};

inline LevelRange level_range(const Space& s, double delta) {
    if (s.size() == 1) return {0, 0};
    const double diam = s.diameter(), mp = s.min_positive_dist();
    int a = int(std::floor(std::log(diam) / std::log(delta)));
    while (std::pow(delta, a) <= diam) --a;
    while (std::pow(delta, a + 1) > diam) ++a;
    int b = int(std::ceil(std::log(mp) / std::log(delta)));
    while (std::pow(delta, b) >= mp) ++b;
    while (std::pow(delta, b - 1) < mp) --b;
    return {a, std::max(a, b)};
}

inline double max_single_delta(double A0) { return 1.0 / (12.0 * A0 * A0 * A0); }
inline double max_adjacent_delta(double A0) { return 1.0 / (96.0 * std::pow(A0, 6)); }

/// Nested maximal delta^k-separated sets, greedy along a seeded shuffle.
struct Nets {
    LevelRange range;
    std::vector<std::vector<int>> centers;  // per generation, in selection order
};

inline Nets build_nets(const Space& s, double delta, std::uint64_t seed, bool allow_any_delta = false) {
    if (!(delta > 0 && delta < 1)) throw ParameterError("delta must lie in (0,1)");
    if (!allow_any_delta && delta > max_single_delta(s.A0()) * (1 + kContainmentSlack))
        throw ParameterError("delta " + fmt_num(delta) + " exceeds (12 A0^3)^-1 = " + fmt_num(max_single_delta(s.A0())));
    const std::size_t n = s.size();
    Nets nets;
    nets.range = level_range(s, delta);
    std::vector<int> perm = iota_vec(n);
    Rng rng(seed);
    rng.shuffle(perm);
    std::vector<char> is_center(n, 0);
    std::vector<int> current;
    std::vector<double> near(n, std::numeric_limits<double>::infinity());
    for (int k = nets.range.k_min; k <= nets.range.k_max; ++k) {
        const double sep = std::pow(delta, k);
        for (int y : perm) {
            if (is_center[y] || near[y] < sep) continue;
            is_center[y] = 1;
            current.push_back(y);
            for (std::size_t z = 0; z < n; ++z) near[z] = std::min(near[z], s.dist(y, z));
        }
        nets.centers.push_back(current);
    }
    return nets;
}

struct Cube {
    int level = 0;  // generation k
    int center = -1;
    std::vector<int> members;  // ascending
    int parent = -1;           // index in the previous generation
    std::vector<int> children; // indices in the next generation
};

/// Nested partitions of a finite space, one per generation k_min..k_max.
struct DyadicSystem {
    double delta = 0;
    double A0 = 1;
    LevelRange range;
    std::uint64_t seed = 0;
    int attempts = 1;
    std::vector<std::vector<Cube>> levels;      // levels[k - k_min]
    std::vector<std::vector<int>> cube_of;      // cube_of[k - k_min][x]
    double c1_target = 0, C1_target = 0;
    double c1_eff = 0, C1_eff = 0;
    double c1 = 0, C1 = 0;  // constants actually guaranteed: min/max of target and effective
    int M = 1;

    int generations() const { return int(levels.size()); }
    /// Level index for generation k, clamped so that coarser generations reuse the root and finer
    /// generations reuse the singletons.
    int clamp_index(int k) const { return std::clamp(k - range.k_min, 0, generations() - 1); }
    const Cube& cube_containing(int x, int k) const {
        int L = clamp_index(k);
        return levels[L][cube_of[L][x]];
    }
    std::size_t cube_count() const {
        std::size_t c = 0;
        for (const auto& l : levels) c += l.size();
        return c;
    }
    /// 1 + log2(2 A0 C1 / (c1 delta)): a parent lies in A1^N times the inner ball of any child.
    double N() const { return 1.0 + std::log2(2.0 * A0 * C1 / (c1 * delta)); }
    /// 1 + log2(C1 / c1): a cube's outer ball relative to its inner ball.
    double m() const { return 1.0 + std::log2(C1 / c1); }
};

struct SystemOptions {
    double delta = 0;
    std::uint64_t seed = 0;
    bool allow_any_delta = false;
    double c1_target = 0;  // 0 selects 1/(3 A0^2)
    double C1_target = 0;  // 0 selects 2 A0
    int max_attempts = 8;
};

namespace detail {

inline DyadicSystem assemble_system(const Space& s, const Nets& nets, double delta) {
    const std::size_t n = s.size();
    DyadicSystem sys;
    sys.delta = delta;
    sys.A0 = s.A0();
    sys.range = nets.range;
    const int G = nets.range.count();
    // Parent center of every generation-(L+1) center: itself if already a center, else the nearest
    // generation-L center (ties to the lowest index).
    std::vector<std::vector<int>> anc(G, std::vector<int>(n, -1));
    for (int y = 0; y < int(n); ++y) anc[G - 1][y] = y;
    for (int L = G - 2; L >= 0; --L) {
        std::vector<int> up(n, -1);
        std::vector<char> is_c(n, 0);
        for (int c : nets.centers[L]) is_c[c] = 1;
        std::vector<int> sorted_c = nets.centers[L];
        std::sort(sorted_c.begin(), sorted_c.end());
        for (int z : nets.centers[L + 1]) {
            if (is_c[z]) {
                up[z] = z;
                continue;
            }
            int best = -1;
            double bd = std::numeric_limits<double>::infinity();
            for (int c : sorted_c)
                if (s.dist(z, c) < bd) bd = s.dist(z, c), best = c;
            up[z] = best;
        }
        for (std::size_t y = 0; y < n; ++y) anc[L][y] = up[anc[L + 1][y]];
    }
    sys.levels.resize(G);
    sys.cube_of.assign(G, std::vector<int>(n, -1));
    for (int L = 0; L < G; ++L) {
        std::vector<int> centers = nets.centers[L];
        std::sort(centers.begin(), centers.end());
        std::vector<int> idx(n, -1);
        for (std::size_t i = 0; i < centers.size(); ++i) {
            idx[centers[i]] = int(i);
            Cube q;
            q.level = nets.range.k_min + L;
            q.center = centers[i];
            sys.levels[L].push_back(q);
        }
        for (int y = 0; y < int(n); ++y) {
            int ci = idx[anc[L][y]];
            sys.levels[L][ci].members.push_back(y);
            sys.cube_of[L][y] = ci;
        }
        if (L > 0)
            for (std::size_t i = 0; i < sys.levels[L].size(); ++i) {
                Cube& q = sys.levels[L][i];
                q.parent = sys.cube_of[L - 1][q.center];
                sys.levels[L - 1][q.parent].children.push_back(int(i));
            }
    }
    sys.M = 1;
    for (const auto& lvl : sys.levels)
        for (const auto& q : lvl) sys.M = std::max<int>(sys.M, int(q.children.size()));
    // Effective sandwich constants.
    double inner = std::numeric_limits<double>::infinity(), outer = 0;
    std::vector<char> in(n);
    for (int L = 0; L < G; ++L) {
        const double scale = std::pow(delta, nets.range.k_min + L);
        for (const Cube& q : sys.levels[L]) {
            std::fill(in.begin(), in.end(), 0);
            for (int y : q.members) in[y] = 1;
            for (std::size_t y = 0; y < n; ++y) {
                double r = s.dist(q.center, y) / scale;
                if (in[y]) outer = std::max(outer, r);
                else inner = std::min(inner, r);
            }
        }
    }
    sys.c1_eff = inner * (1 - kContainmentSlack);
    sys.C1_eff = outer * (1 + kContainmentSlack);
    return sys;
}

}  // namespace detail

/// Builds a dyadic system, retrying with derived seeds while the effective sandwich constants miss
/// the targets; keeps the attempt with the smallest ratio C1/c1 if none meets them.
inline DyadicSystem build_system(const Space& s, const SystemOptions& opt) {
    const double c1t = opt.c1_target > 0 ? opt.c1_target : 1.0 / (3.0 * s.A0() * s.A0());
    const double C1t = opt.C1_target > 0 ? opt.C1_target : 2.0 * s.A0();
    DyadicSystem best;
    double best_ratio = std::numeric_limits<double>::infinity();
    const int attempts = std::max(1, opt.max_attempts);
    for (int a = 0; a < attempts; ++a) {
        std::uint64_t seed = a == 0 ? opt.seed : derive_seed(opt.seed, std::uint64_t(a));
        Nets nets = build_nets(s, opt.delta, seed, opt.allow_any_delta);
        DyadicSystem sys = detail::assemble_system(s, nets, opt.delta);
        sys.seed = seed;
        sys.attempts = a + 1;
        sys.c1_target = c1t;
        sys.C1_target = C1t;
        sys.c1 = std::min(c1t, sys.c1_eff);
        sys.C1 = std::max(C1t, sys.C1_eff);
        double ratio = sys.C1 / sys.c1;
        bool meets = sys.c1_eff >= c1t && sys.C1_eff <= C1t;
        if (ratio < best_ratio) best_ratio = ratio, best = std::move(sys);
        if (meets) break;
    }
    return best;
}

/// Largest parent-to-child ratio of an atomic measure over the system.
inline Witnessed dyadic_doubling(const DyadicSystem& sys, std::span<const double> atoms) {
    Witnessed best;
    std::vector<std::vector<long double>> mass(sys.levels.size());
    for (std::size_t L = 0; L < sys.levels.size(); ++L)
        for (const Cube& q : sys.levels[L]) {
            long double m = 0;
            for (int y : q.members) m += atoms[y];
            mass[L].push_back(m);
        }
    for (std::size_t L = 1; L < sys.levels.size(); ++L)
        for (std::size_t i = 0; i < sys.levels[L].size(); ++i) {
            const Cube& q = sys.levels[L][i];
            double r = double(mass[L - 1][q.parent] / mass[L][i]);
            if (r > best.value) best = {r, q.center, q.level, int(i), 0};
        }
    return best;
}

struct PropertyResult {
    std::string name;
    bool pass = true;
    std::string witness;
};

struct SystemVerification {
    std::vector<PropertyResult> properties;  // partition, nesting, ancestor, children, sandwich, ball nesting
    BoundCheck doubling;                     // dyadic doubling of mu against A1^N
    bool all(std::initializer_list<std::string> names) const {
        for (const auto& n : names)
            for (const auto& p : properties)
                if (p.name == n && !p.pass) return false;
        return true;
    }
    /// Ball nesting is informational; everything else is required.
    bool all_pass() const {
        for (const auto& p : properties)
            if (!p.pass && p.name != "ball_nesting") return false;
        return doubling.pass;
    }
    const PropertyResult& get(const std::string& name) const {
        for (const auto& p : properties)
            if (p.name == name) return p;
        throw ParameterError("unknown property " + name);
    }
};

inline SystemVerification verify_system(const Space& s, const DyadicSystem& sys) {
    const std::size_t n = s.size();
    const int G = sys.generations();
    SystemVerification v;
    auto fail = [](PropertyResult& p, std::string w) {
        if (p.pass) p.pass = false, p.witness = std::move(w);
    };
    PropertyResult part{"partition", true, {}}, nest{"nesting", true, {}}, anc{"unique_ancestor", true, {}}, kids{"children", true, {}},
        sand{"sandwich", true, {}}, bnest{"ball_nesting", true, {}};
    for (int L = 0; L < G; ++L) {
        std::vector<int> seen(n, 0);
        for (std::size_t i = 0; i < sys.levels[L].size(); ++i)
            for (int y : sys.levels[L][i].members) {
                ++seen[y];
                if (sys.cube_of[L][y] != int(i)) fail(part, "index mismatch at point " + std::to_string(y));
            }
        for (std::size_t y = 0; y < n; ++y)
            if (seen[y] != 1) fail(part, "point " + std::to_string(y) + " covered " + std::to_string(seen[y]) + " times at generation " + std::to_string(sys.range.k_min + L));
    }
    for (int Lf = 1; Lf < G; ++Lf)
        for (const Cube& q : sys.levels[Lf])
            for (int L = 0; L < Lf; ++L) {
                int a = sys.cube_of[L][q.center];
                for (int y : q.members)
                    if (sys.cube_of[L][y] != a) {
                        fail(nest, "cube centred at " + std::to_string(q.center) + " straddles generation " + std::to_string(sys.range.k_min + L));
                        fail(anc, "no unique ancestor for cube centred at " + std::to_string(q.center));
                        break;
                    }
            }
    for (int L = 0; L + 1 < G; ++L)
        for (std::size_t i = 0; i < sys.levels[L].size(); ++i) {
            const Cube& q = sys.levels[L][i];
            if (q.children.empty() || int(q.children.size()) > sys.M) fail(kids, "bad child count at centre " + std::to_string(q.center));
            std::vector<int> u;
            for (int c : q.children) {
                const Cube& ch = sys.levels[L + 1][c];
                if (ch.parent != int(i)) fail(kids, "parent link broken at centre " + std::to_string(ch.center));
                u.insert(u.end(), ch.members.begin(), ch.members.end());
            }
            std::sort(u.begin(), u.end());
            if (u != q.members) fail(kids, "children do not tile cube centred at " + std::to_string(q.center));
        }
    std::vector<char> in(n);
    for (int L = 0; L < G; ++L) {
        const double scale = std::pow(sys.delta, sys.range.k_min + L);
        for (const Cube& q : sys.levels[L]) {
            std::fill(in.begin(), in.end(), 0);
            for (int y : q.members) in[y] = 1;
            for (std::size_t y = 0; y < n; ++y) {
                double d = s.dist(q.center, y);
                if (d < sys.c1 * scale && !in[y]) fail(sand, "inner ball escapes cube centred at " + std::to_string(q.center));
                if (in[y] && !(d < sys.C1 * scale)) fail(sand, "cube centred at " + std::to_string(q.center) + " leaves its outer ball");
            }
        }
    }
    for (int Lf = 1; Lf < G; ++Lf) {
        const double sf = sys.C1 * std::pow(sys.delta, sys.range.k_min + Lf);
        for (const Cube& q : sys.levels[Lf])
            for (int L = 0; L < Lf; ++L) {
                const Cube& a = sys.levels[L][sys.cube_of[L][q.center]];
                const double sa = sys.C1 * std::pow(sys.delta, sys.range.k_min + L);
                for (std::size_t y = 0; y < n; ++y)
                    if (s.dist(q.center, y) < sf && !(s.dist(a.center, y) < sa)) {
                        fail(bnest, "outer ball of cube centred at " + std::to_string(q.center) + " leaves ancestor ball");
                        break;
                    }
            }
    }
    v.properties = {part, nest, anc, kids, sand, bnest};
    Witnessed dd = dyadic_doubling(sys, s.mass());
    v.doubling = make_check("dyadic doubling", dd.value, std::pow(s.A1(), sys.N()),
                            "child centre " + std::to_string(dd.x) + " generation " + std::to_string(dd.y));
    return v;
}

/// Adjacent systems and how well their cubes capture balls.
struct AdjacentCoverage {
    std::size_t total = 0;
    std::size_t covered = 0;
    double fraction = 1;
    double C_adj = 1;   // largest dilation actually needed among covered balls
    double C_bound = 0; // 8 A0^3 delta^-3
    std::size_t far_centre = 0;  // covering cube centre farther than 2 A0 delta^k from the ball centre
    int x = -1;                  // an uncovered ball, if any
    double r = 0;
};

struct AdjacentFamily {
    std::vector<DyadicSystem> systems;
    double delta = 0;
    AdjacentCoverage coverage;
};

/// For every ball B(x, r) with delta^(k+3) < r <= delta^(k+2), looks for a system whose
/// generation-k cube containing x contains the ball inside C B(x, r).
inline AdjacentCoverage adjacent_coverage(const Space& s, const std::vector<DyadicSystem>& systems) {
    AdjacentCoverage cov;
    if (systems.empty()) return cov;
    const std::size_t n = s.size();
    const double delta = systems.front().delta;
    const LevelRange R = systems.front().range;
    const double A0 = s.A0();
    cov.C_bound = 8 * A0 * A0 * A0 / (delta * delta * delta);
    const int kmin = R.k_min - 3, kmax = R.k_max;
    const int K = kmax - kmin + 1;
    const std::size_t T = systems.size();
    // esc[t][j][x]: prefix length of order(x) inside x's cube; far[t][j][x]: largest distance to it.
    std::vector<std::vector<std::vector<std::size_t>>> esc(T, std::vector<std::vector<std::size_t>>(K));
    std::vector<std::vector<std::vector<double>>> far(T, std::vector<std::vector<double>>(K));
    std::vector<std::vector<std::vector<double>>> cdist(T, std::vector<std::vector<double>>(K));
    for (std::size_t t = 0; t < T; ++t)
        for (int j = 0; j < K; ++j) {
            const DyadicSystem& sys = systems[t];
            const int L = sys.clamp_index(kmin + j);
            esc[t][j].resize(n);
            far[t][j].resize(n);
            cdist[t][j].resize(n);
            for (std::size_t x = 0; x < n; ++x) {
                const int c = sys.cube_of[L][x];
                auto ord = s.order(x);
                std::size_t p = 0;
                while (p < n && sys.cube_of[L][ord[p]] == c) ++p;
                esc[t][j][x] = p;
                double f = 0;
                for (int y : sys.levels[L][c].members) f = std::max(f, s.dist(x, y));
                far[t][j][x] = f;
                cdist[t][j][x] = s.dist(x, sys.levels[L][c].center);
            }
        }
    for (std::size_t x = 0; x < n; ++x) {
        auto srt = s.sorted(x);
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j < n && srt[j] == srt[i]) ++j;
            const double a = srt[i];
            const double b = j < n ? srt[j] : std::numeric_limits<double>::infinity();
            for (int kk = 0; kk < K; ++kk) {
                const int k = kmin + kk;
                const double lo = std::max(a, std::pow(delta, k + 3)), hi = std::min(b, std::pow(delta, k + 2));
                if (!(lo < hi)) continue;
                ++cov.total;
                double need = std::numeric_limits<double>::infinity();
                bool near_centre = false;
                for (std::size_t t = 0; t < T; ++t) {
                    if (j > esc[t][kk][x]) continue;
                    double c = std::max(1.0, far[t][kk][x] / lo);
                    if (c < need) need = c;
                    if (cdist[t][kk][x] < 2 * A0 * std::pow(delta, k)) near_centre = true;
                }
                if (leq_rel(need, cov.C_bound)) {
                    ++cov.covered;
                    cov.C_adj = std::max(cov.C_adj, need);
                    if (!near_centre) ++cov.far_centre;
                } else if (cov.x < 0) {
                    cov.x = int(x);
                    cov.r = hi;
                }
            }
            i = j;
        }
    }
    cov.fraction = cov.total ? double(cov.covered) / double(cov.total) : 1.0;
    return cov;
}

/// T systems with delta <= (96 A0^6)^-1 and independent seeds.
inline AdjacentFamily build_adjacent_systems(const Space& s, int T, double delta, std::uint64_t seed,
                                             bool allow_any_delta = false) {
    if (T < 1) throw ParameterError("number of adjacent systems must be positive");
    if (!allow_any_delta && delta > max_adjacent_delta(s.A0()) * (1 + kContainmentSlack))
        throw ParameterError("delta " + fmt_num(delta) + " exceeds (96 A0^6)^-1 = " + fmt_num(max_adjacent_delta(s.A0())));
    AdjacentFamily fam;
    fam.delta = delta;
    const double A0 = s.A0();
    for (int t = 0; t < T; ++t) {
        SystemOptions o;
        o.delta = delta;
        o.seed = derive_seed(seed, 1000 + std::uint64_t(t));
        o.allow_any_delta = true;
        o.c1_target = 1.0 / (12.0 * std::pow(A0, 4));
        o.C1_target = 4.0 * A0 * A0;
        fam.systems.push_back(build_system(s, o));
    }
    fam.coverage = adjacent_coverage(s, fam.systems);
    return fam;
}

inline json system_to_json(const DyadicSystem& sys) {
    json j;
    j["delta"] = sys.delta;
    j["k_min"] = sys.range.k_min;
    j["k_max"] = sys.range.k_max;
    j["seed"] = sys.seed;
    j["c1"] = sys.c1;
    j["C1"] = sys.C1;
    j["M"] = sys.M;
    json levels = json::array();
    for (const auto& lvl : sys.levels) {
        json cubes = json::array();
        for (const Cube& q : lvl)
            cubes.push_back({{"center", q.center}, {"members", q.members}, {"parent", q.parent}});
        levels.push_back({{"k", lvl.empty() ? 0 : lvl.front().level}, {"cubes", cubes}});
    }
    j["levels"] = levels;
    return j;
}

}  // namespace homspace
