#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "homspace/dyadic.hpp"
#include "homspace/io.hpp"

namespace homspace {

/// Position of a cube: level index into DyadicSystem::levels and index within that level.
struct CubeRef {
    int L = 0;
    int index = 0;
    bool operator==(const CubeRef&) const = default;
};

inline const Cube& cube_at(const DyadicSystem& sys, CubeRef r) { return sys.levels[r.L][r.index]; }

inline bool cube_within(const DyadicSystem& sys, CubeRef inner, CubeRef outer) {
    if (inner.L < outer.L) return false;
    return sys.cube_of[outer.L][cube_at(sys, inner).center] == outer.index;
}

/// Averages of |f| with respect to the atoms nu, for every cube of every generation.
inline std::vector<std::vector<double>> cube_averages(const DyadicSystem& sys, std::span<const double> f,
                                                      std::span<const double> nu) {
    std::vector<std::vector<double>> avg(sys.levels.size());
    for (std::size_t L = 0; L < sys.levels.size(); ++L)
        for (const Cube& q : sys.levels[L]) {
            long double a = 0, m = 0;
            for (int y : q.members) a += std::abs(f[y]) * (long double)nu[y], m += nu[y];
            avg[L].push_back(double(a / m));
        }
    return avg;
}

/// sup over cubes containing x (inside Q0 when given) of the nu-average of |f|; zero outside Q0.
inline std::vector<double> dyadic_maximal(const DyadicSystem& sys, std::span<const double> f,
                                          std::span<const double> nu, std::optional<CubeRef> Q0 = std::nullopt) {
    const std::size_t n = f.size();
    auto avg = cube_averages(sys, f, nu);
    std::vector<double> M(n, 0.0);
    const int L0 = Q0 ? Q0->L : 0;
    for (std::size_t x = 0; x < n; ++x) {
        if (Q0 && sys.cube_of[Q0->L][x] != Q0->index) continue;
        double m = 0;
        for (int L = L0; L < sys.generations(); ++L) m = std::max(m, avg[L][sys.cube_of[L][x]]);
        M[x] = m;
    }
    return M;
}

struct CZCube {
    CubeRef ref;
    int level = 0;
    int center = -1;
    std::vector<int> members;
    double average = 0;
    bool has_parent = true;  // false only for a selected top cube of a global decomposition
};

struct CZDecomposition {
    std::string variant;  // local | global | weighted
    double alpha = 0;
    double alpha0 = 0;    // average over the starting cube
    double K = 1;         // parent-to-child constant used in the upper bound of the averages
    std::vector<CZCube> cubes;
    std::vector<int> omega;  // union of the cubes, ascending
    std::vector<double> maximal;
    BoundCheck averages_above;  // min average > alpha, reported as alpha <= min average
    BoundCheck averages_below;  // max average <= K alpha (cubes with a parent)
    BoundCheck off_omega;       // max of the maximal function off omega <= alpha
    bool omega_is_level_set = true;
    BoundCheck measure_bound;   // nu(omega) <= (1/alpha) int |f| dnu
    bool all_pass() const {
        return averages_above.pass && averages_below.pass && off_omega.pass && omega_is_level_set && measure_bound.pass;
    }
};

namespace detail {

inline CZDecomposition cz_core(const Space& s, const DyadicSystem& sys, std::span<const double> f,
                               std::span<const double> nu, CubeRef Q0, double alpha, std::string variant,
                               bool allow_top) {
    const std::size_t n = s.size();
    if (f.size() != n) throw InvalidInput("function has wrong length");
    for (double v : f)
        if (!std::isfinite(v)) throw InvalidInput("function values must be finite");
    if (!(alpha > 0) || !std::isfinite(alpha)) throw ParameterError("alpha must be positive and finite");
    CZDecomposition d;
    d.variant = std::move(variant);
    d.alpha = alpha;
    auto avg = cube_averages(sys, f, nu);
    d.alpha0 = avg[Q0.L][Q0.index];
    if (!allow_top && !(alpha > d.alpha0))
        throw PreconditionError("alpha " + fmt_num(alpha) + " must exceed the average " + fmt_num(d.alpha0) +
                                " over the starting cube");
    d.K = dyadic_doubling(sys, nu).value;
    std::vector<CubeRef> stack{Q0};
    while (!stack.empty()) {
        CubeRef r = stack.back();
        stack.pop_back();
        const Cube& q = cube_at(sys, r);
        if (avg[r.L][r.index] > alpha) {
            d.cubes.push_back(CZCube{r, q.level, q.center, q.members, avg[r.L][r.index], !(r == Q0)});
            continue;
        }
        for (int ch : q.children) stack.push_back({r.L + 1, ch});
    }
    std::sort(d.cubes.begin(), d.cubes.end(), [](const CZCube& a, const CZCube& b) {
        return a.level != b.level ? a.level < b.level : a.center < b.center;
    });
    std::vector<char> in(n, 0);
    for (const auto& c : d.cubes)
        for (int y : c.members) in[y] = 1;
    for (std::size_t y = 0; y < n; ++y)
        if (in[y]) d.omega.push_back(int(y));
    d.maximal = dyadic_maximal(sys, f, nu, Q0);

    double min_avg = std::numeric_limits<double>::infinity(), max_ratio = 0;
    std::string wmin, wmax;
    for (const auto& c : d.cubes) {
        if (c.average < min_avg) min_avg = c.average, wmin = "centre " + std::to_string(c.center);
        if (c.has_parent && c.average / alpha > max_ratio) max_ratio = c.average / alpha, wmax = "centre " + std::to_string(c.center);
    }
    d.averages_above = BoundCheck{"averages exceed alpha", alpha, min_avg, d.cubes.empty() || alpha < min_avg, wmin};
    d.averages_below = make_check("averages at most K alpha", max_ratio, d.K, wmax);
    double off = 0;
    std::string woff;
    long double nu_omega = 0, integral = 0;
    for (std::size_t y = 0; y < n; ++y) {
        if (sys.cube_of[Q0.L][y] != Q0.index) continue;
        integral += std::abs(f[y]) * (long double)nu[y];
        if (in[y]) nu_omega += nu[y];
        else if (d.maximal[y] > off) off = d.maximal[y], woff = "point " + std::to_string(y);
        if ((d.maximal[y] > alpha) != bool(in[y])) d.omega_is_level_set = false;
    }
    d.off_omega = BoundCheck{"maximal function off omega", off, alpha, off <= alpha, woff};
    d.measure_bound = make_check("measure of omega", double(nu_omega), double(integral / alpha));
    return d;
}

inline CubeRef root_ref() { return {0, 0}; }

}  // namespace detail

/// Maximal cubes inside Q0 whose mu-average of |f| exceeds alpha > average over Q0.
inline CZDecomposition cz_local(const Space& s, const DyadicSystem& sys, std::span<const double> f, CubeRef Q0,
                                double alpha) {
    if (f.size() != s.size()) throw InvalidInput("function has wrong length");
    const Cube& q = cube_at(sys, Q0);
    std::vector<char> in(s.size(), 0);
    for (int y : q.members) in[y] = 1;
    for (std::size_t y = 0; y < s.size(); ++y)
        if (!in[y] && f[y] != 0)
            throw PreconditionError("f is nonzero at point " + std::to_string(y) + " outside the starting cube");
    return detail::cz_core(s, sys, f, s.mass(), Q0, alpha, "local", false);
}

/// Maximal cubes of the whole system with average above alpha; the top cube itself may be selected.
inline CZDecomposition cz_global(const Space& s, const DyadicSystem& sys, std::span<const double> f, double alpha) {
    return detail::cz_core(s, sys, f, s.mass(), detail::root_ref(), alpha, "global", true);
}

/// Local decomposition for the measure w dmu.
inline CZDecomposition cz_weighted(const Space& s, const DyadicSystem& sys, std::span<const double> f, CubeRef Q0,
                                   double alpha, std::span<const double> w) {
    if (w.size() != s.size()) throw InvalidInput("weight has wrong length");
    std::vector<double> nu(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!(w[i] > 0) || !std::isfinite(w[i])) throw InvalidInput("weight must be positive and finite");
        nu[i] = w[i] * s.mass(i);
    }
    return detail::cz_core(s, sys, f, nu, Q0, alpha, "weighted", false);
}

/// Every cube of `fine` lies inside a cube of `coarse`.
inline bool refines(const CZDecomposition& fine, const CZDecomposition& coarse, std::size_t n) {
    std::vector<int> owner(n, -1);
    for (std::size_t i = 0; i < coarse.cubes.size(); ++i)
        for (int y : coarse.cubes[i].members) owner[y] = int(i);
    for (const auto& c : fine.cubes) {
        int o = owner[c.members.front()];
        if (o < 0) return false;
        for (int y : c.members)
            if (owner[y] != o) return false;
    }
    return true;
}

/// Pointwise size of |f| off the exceptional set built from all cubes of several systems inside Q0,
/// against A1^m with m = 1 + log2(8 A0^3 delta^-3). Diagnostic only.
struct AdjacentPointwise {
    double max_ratio = 0;  // max |f(x)| / alpha off the exceptional set
    double bound = 1;
    bool holds = true;
};

inline AdjacentPointwise adjacent_pointwise_diagnostic(const Space& s, const std::vector<DyadicSystem>& systems,
                                                       std::span<const double> f,
                                                       const std::vector<int>& Q0_members, double alpha) {
    const std::size_t n = s.size();
    std::vector<char> inQ(n, 0);
    for (int y : Q0_members) inQ[y] = 1;
    std::vector<double> M(n, 0);
    for (const auto& sys : systems) {
        auto avg = cube_averages(sys, f, s.mass());
        for (std::size_t L = 0; L < sys.levels.size(); ++L)
            for (std::size_t i = 0; i < sys.levels[L].size(); ++i) {
                const Cube& q = sys.levels[L][i];
                bool inside = std::all_of(q.members.begin(), q.members.end(), [&](int y) { return inQ[y]; });
                if (!inside) continue;
                for (int y : q.members) M[y] = std::max(M[y], avg[L][i]);
            }
    }
    AdjacentPointwise r;
    const double delta = systems.empty() ? 1 : systems.front().delta;
    const double mexp = 1 + std::log2(8 * std::pow(s.A0(), 3) / std::pow(delta, 3));
    r.bound = std::pow(s.A1(), mexp);
    for (int y : Q0_members)
        if (!(M[y] > alpha)) r.max_ratio = std::max(r.max_ratio, std::abs(f[y]) / alpha);
    r.holds = leq_rel(r.max_ratio, r.bound);
    return r;
}

inline json decomposition_to_json(const CZDecomposition& d) {
    json j;
    j["alpha"] = d.alpha;
    json cubes = json::array();
    for (const auto& c : d.cubes) cubes.push_back({{"level", c.level}, {"center", c.center}, {"members", c.members}});
    j["cubes"] = cubes;
    j["omega"] = d.omega;
    return j;
}

// ---------------------------------------------------------------------------------------------
// Coverings by balls.

struct Ball {
    int center = 0;
    double radius = 1;
    bool closed = false;
};

struct CoverResult {
    std::vector<int> selected;  // indices into the input family, in selection order
    double C = 1;               // dilation of the selected balls that must cover the family
    bool disjoint = true;
    bool half_radius_meeting = true;  // every input ball meets a selected ball of at least half its radius
    bool dilated_cover = true;        // union of the family inside union of C-dilates of the selection
    bool covers_target = true;        // Vitali variant: the prescribed set is covered exactly
    std::string failure;
    bool all_pass() const { return disjoint && half_radius_meeting && dilated_cover && covers_target; }
};

namespace detail {

inline std::vector<int> greedy_order(const std::vector<Ball>& fam) {
    std::vector<int> idx = iota_vec(fam.size());
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        if (fam[a].radius != fam[b].radius) return fam[a].radius > fam[b].radius;
        return fam[a].center < fam[b].center;
    });
    return idx;
}

inline CoverResult greedy_disjoint(const Space& s, const std::vector<Ball>& fam, double C) {
    const std::size_t n = s.size();
    for (const Ball& b : fam)
        if (b.center < 0 || std::size_t(b.center) >= n || !(b.radius > 0) || !std::isfinite(b.radius))
            throw InvalidInput("ball must have a valid centre and a positive finite radius");
    CoverResult res;
    res.C = C;
    std::vector<int> owner(n, -1);
    for (int i : greedy_order(fam)) {
        auto pts = s.ball(fam[i].center, fam[i].radius, fam[i].closed);
        bool free = std::none_of(pts.begin(), pts.end(), [&](int y) { return owner[y] >= 0; });
        if (!free) continue;
        for (int y : pts) owner[y] = i;
        res.selected.push_back(i);
    }
    // Verification, independent of the selection logic above.
    std::vector<int> hits(n, 0);
    for (int g : res.selected)
        for (int y : s.ball(fam[g].center, fam[g].radius, fam[g].closed)) ++hits[y];
    for (std::size_t y = 0; y < n; ++y)
        if (hits[y] > 1) res.disjoint = false, res.failure = "selected balls overlap at point " + std::to_string(y);
    std::vector<char> dil(n, 0);
    for (int g : res.selected)
        for (int y : s.ball(fam[g].center, C * fam[g].radius * (1 + kContainmentSlack), fam[g].closed)) dil[y] = 1;
    for (std::size_t i = 0; i < fam.size(); ++i) {
        bool meets = false;
        for (int y : s.ball(fam[i].center, fam[i].radius, fam[i].closed)) {
            if (!dil[y] && res.dilated_cover) {
                res.dilated_cover = false;
                res.failure = "point " + std::to_string(y) + " escapes the dilated selection";
            }
            int g = owner[y];
            if (g >= 0 && fam[g].radius >= fam[i].radius / 2) meets = true;
        }
        if (!meets && res.half_radius_meeting) {
            res.half_radius_meeting = false;
            res.failure = "ball " + std::to_string(i) + " meets no selected ball of half its radius";
        }
    }
    return res;
}

}  // namespace detail

/// Disjoint subfamily, greedy by decreasing radius (ties by centre), whose (A0 + 4 A0^2)-dilates
/// cover the family.
inline CoverResult basic_cover(const Space& s, const std::vector<Ball>& fam) {
    const double A0 = s.A0();
    return detail::greedy_disjoint(s, fam, A0 + 4 * A0 * A0);
}

/// Disjoint closed balls covering A exactly; requires, at every point of A, a closed ball of
/// radius below the minimal separation.
inline CoverResult vitali_cover(const Space& s, const std::vector<int>& A, const std::vector<Ball>& fam) {
    const std::size_t n = s.size();
    std::vector<char> inA(n, 0);
    for (int a : A) {
        if (a < 0 || std::size_t(a) >= n) throw InvalidInput("point of A out of range");
        inA[a] = 1;
    }
    const double sep = n > 1 ? s.min_positive_dist() : std::numeric_limits<double>::infinity();
    std::vector<char> tiny(n, 0);
    for (const Ball& b : fam) {
        if (!b.closed) throw InvalidInput("Vitali covering takes closed balls");
        if (b.center < 0 || std::size_t(b.center) >= n || !inA[b.center])
            throw InvalidInput("ball centre " + std::to_string(b.center) + " is not in A");
        if (b.radius < sep) tiny[b.center] = 1;
    }
    for (int a : A)
        if (!tiny[a])
            throw PreconditionError("no closed ball below the separation scale at atom " + s.ids()[a]);
    CoverResult res = detail::greedy_disjoint(s, fam, s.A0() + 4 * s.A0() * s.A0());
    std::vector<char> cov(n, 0);
    for (int g : res.selected)
        for (int y : s.ball(fam[g].center, fam[g].radius, true)) cov[y] = 1;
    for (int a : A)
        if (!cov[a]) {
            res.covers_target = false;
            res.failure = "atom " + s.ids()[a] + " not covered";
            break;
        }
    return res;
}

}  // namespace homspace
