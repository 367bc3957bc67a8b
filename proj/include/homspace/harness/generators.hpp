#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "homspace/io.hpp"
#include "homspace/space.hpp"

namespace homspace::gen {

/// A generated space with optional real coordinates (first axis) for building weights.
struct Generated {
    Space space;
    std::string label;
    std::string kind;
    std::vector<double> coord;
};

inline std::vector<double> counting(std::size_t n) { return std::vector<double>(n, 1.0); }

inline std::vector<double> random_masses(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> m(n);
    for (auto& v : m) v = rng.uniform(0.5, 2.0);
    return m;
}

inline DistanceTable line_table(const std::vector<double>& x) {
    DistanceTable d(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = i + 1; j < x.size(); ++j) d.set(i, j, std::abs(x[i] - x[j]));
    return d;
}

inline std::vector<double> grid1d_coords(std::size_t n, bool symmetric) {
    std::vector<double> x(n);
    const double shift = symmetric ? 0.5 * double(n - 1) : 0.0;
    for (std::size_t i = 0; i < n; ++i) x[i] = double(i) - shift;
    return x;
}

inline Generated grid1d(std::size_t n, bool symmetric = false) {
    if (n == 0) throw ParameterError("grid1d needs n >= 1");
    auto x = grid1d_coords(n, symmetric);
    return {Space(line_table(x), counting(n)), "grid1d(" + std::to_string(n) + ")", "grid1d", x};
}

inline Generated grid2d(std::size_t n, const std::string& metric) {
    if (n == 0) throw ParameterError("grid2d needs n >= 1");
    if (metric != "sup" && metric != "euclid") throw ParameterError("grid2d metric must be sup or euclid");
    const std::size_t N = n * n;
    DistanceTable d(N);
    for (std::size_t a = 0; a < N; ++a)
        for (std::size_t b = a + 1; b < N; ++b) {
            double dx = std::abs(double(a % n) - double(b % n)), dy = std::abs(double(a / n) - double(b / n));
            d.set(a, b, metric == "sup" ? std::max(dx, dy) : std::hypot(dx, dy));
        }
    std::vector<double> x(N);
    for (std::size_t a = 0; a < N; ++a) x[a] = double(a % n);
    return {Space(std::move(d), counting(N)), "grid2d(" + std::to_string(n) + "," + metric + ")", "grid2d", x};
}

/// Left endpoints of the 2^level intervals of the Cantor construction keeping [0, r] and [1-r, 1].
inline Generated cantor(int level, double ratio) {
    if (level < 0 || level > 12) throw ParameterError("cantor level must lie in [0,12]");
    if (!(ratio > 0 && ratio < 0.5)) throw ParameterError("cantor ratio must lie in (0, 1/2)");
    std::vector<double> x{0.0};
    double len = 1.0;
    for (int l = 0; l < level; ++l) {
        std::vector<double> nx;
        for (double a : x) nx.push_back(a), nx.push_back(a + len * (1 - ratio));
        x.swap(nx);
        len *= ratio;
    }
    std::sort(x.begin(), x.end());
    const std::size_t n = x.size();
    return {Space(line_table(x), counting(n)), "cantor(" + std::to_string(level) + "," + fmt_num(ratio) + ")",
            "cantor", x};
}

/// Uniform points of [0,1]^dim with the Euclidean metric.
inline Generated random_doubling(std::size_t n, int dim, std::uint64_t seed) {
    if (n == 0 || dim < 1) throw ParameterError("random_doubling needs n >= 1 and dim >= 1");
    Rng rng(seed);
    std::vector<std::vector<double>> p(n, std::vector<double>(dim));
    for (auto& q : p)
        for (auto& c : q) c = rng.uniform();
    DistanceTable d(n);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) {
            double s = 0;
            for (int k = 0; k < dim; ++k) s += (p[a][k] - p[b][k]) * (p[a][k] - p[b][k]);
            if (s == 0) throw InvalidInput("random_doubling drew a repeated point; change the seed");
            d.set(a, b, std::sqrt(s));
        }
    std::vector<double> x(n);
    for (std::size_t a = 0; a < n; ++a) x[a] = p[a][0];
    return {Space(std::move(d), counting(n)),
            "random_doubling(" + std::to_string(n) + "," + std::to_string(dim) + "," + std::to_string(seed) + ")",
            "random_doubling", x};
}

/// Distances raised to beta: a snowflake for beta < 1, a quasimetric for beta > 1.
inline Generated snowflake(const Generated& base, double beta) {
    if (!(beta > 0) || !std::isfinite(beta)) throw ParameterError("snowflake exponent must be positive");
    DistanceTable d = base.space.dist().transformed([beta](double v) { return std::pow(v, beta); });
    return {Space(std::move(d), base.space.mass(), base.space.ids()),
            "snowflake(" + base.label + "," + fmt_num(beta) + ")", "snowflake", base.coord};
}

inline Generated with_masses(Generated g, std::vector<double> m, const std::string& tag) {
    g.space = Space(g.space.dist(), std::move(m), g.space.ids(), g.space.poincare());
    g.label += "[" + tag + "]";
    return g;
}

/// Symmetric half-integer grid and its image under x -> sign(x)|x|^gamma, the target carrying the
/// lengths of its nearest-point cells.
inline std::pair<Generated, Generated> stretch_pair(std::size_t n, double gamma) {
    if (n < 2) throw ParameterError("stretch map needs n >= 2");
    if (!(gamma > 0)) throw ParameterError("stretch exponent must be positive");
    Generated src = grid1d(n, true);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = std::copysign(std::pow(std::abs(src.coord[i]), gamma), src.coord[i]);
    std::vector<double> cell(n);
    for (std::size_t i = 0; i < n; ++i) {
        double left = i > 0 ? 0.5 * (y[i] - y[i - 1]) : 0.5 * (y[1] - y[0]);
        double right = i + 1 < n ? 0.5 * (y[i + 1] - y[i]) : 0.5 * (y[n - 1] - y[n - 2]);
        cell[i] = left + right;
    }
    Generated tgt{Space(line_table(y), cell), "stretch(" + std::to_string(n) + "," + fmt_num(gamma) + ")", "stretch", y};
    return {std::move(src), std::move(tgt)};
}

/// (|x| + h)^a on the first coordinate.
inline std::vector<double> power_weight(const std::vector<double>& coord, double a, double h) {
    std::vector<double> w(coord.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::pow(std::abs(coord[i]) + h, a);
    return w;
}

/// Builds a space from a description such as {"kind": "grid1d", "n": 64}.
inline Generated from_json(const json& j, std::uint64_t default_seed = 0) {
    const std::string kind = detail::require(j, "kind").get<std::string>();
    auto num = [&](const char* k, double dflt) { return j.contains(k) ? j[k].get<double>() : dflt; };
    auto seed = [&]() { return j.contains("seed") ? j["seed"].get<std::uint64_t>() : default_seed; };
    Generated g;
    if (kind == "grid1d") g = grid1d(std::size_t(num("n", 8)), j.value("symmetric", false));
    else if (kind == "grid2d") g = grid2d(std::size_t(num("n", 4)), j.value("metric", std::string("sup")));
    else if (kind == "cantor") g = cantor(int(num("level", 3)), num("ratio", 1.0 / 3.0));
    else if (kind == "random_doubling") g = random_doubling(std::size_t(num("n", 32)), int(num("dim", 2)), seed());
    else if (kind == "snowflake") g = snowflake(from_json(detail::require(j, "base"), default_seed), num("beta", 2));
    else if (kind == "inline") g = {space_from_json(detail::require(j, "space")), j.value("label", std::string("inline")), "inline", {}};
    else throw InvalidInput("unknown space kind '" + kind + "'");
    if (j.contains("masses")) {
        const json& m = j["masses"];
        if (m.is_string() && m == "random") g = with_masses(std::move(g), random_masses(g.space.size(), derive_seed(seed(), 77)), "random mass");
        else if (m.is_array()) g = with_masses(std::move(g), m.get<std::vector<double>>(), "supplied mass");
        else if (!(m.is_string() && m == "counting")) throw InvalidInput("masses must be counting, random or an array");
    }
    return g;
}

/// Fifty seeded spaces mixing lines, grids, Cantor sets, random clouds and powers of lines,
/// all with at most 512 points.
inline std::vector<json> mixed_pack(std::uint64_t seed) {
    std::vector<json> out;
    const int line_n[] = {2, 8, 17, 32, 64, 100, 128, 200, 256, 512};
    for (int n : line_n) out.push_back({{"kind", "grid1d"}, {"n", n}});
    const int grid_n[] = {3, 5, 8, 12, 16};
    for (int n : grid_n) {
        out.push_back({{"kind", "grid2d"}, {"n", n}, {"metric", "sup"}});
        out.push_back({{"kind", "grid2d"}, {"n", n}, {"metric", "euclid"}});
    }
    const int cl[] = {2, 3, 4, 5, 6, 7, 8, 9, 6, 7};
    const double cr[] = {1.0 / 3, 1.0 / 3, 1.0 / 3, 1.0 / 3, 1.0 / 3, 1.0 / 3, 1.0 / 3, 1.0 / 3, 0.2, 0.45};
    for (int i = 0; i < 10; ++i) out.push_back({{"kind", "cantor"}, {"level", cl[i]}, {"ratio", cr[i]}});
    const int rn[] = {16, 32, 64, 96, 128, 160, 200, 256, 384, 512};
    for (int i = 0; i < 10; ++i)
        out.push_back({{"kind", "random_doubling"}, {"n", rn[i]}, {"dim", 1 + i % 3}, {"seed", derive_seed(seed, i)}});
    const int sn[] = {8, 16, 32, 64, 128};
    const double sb[] = {0.5, 1.5, 2.0, 3.0, 0.75};
    for (int i = 0; i < 5; ++i) {
        out.push_back({{"kind", "snowflake"}, {"beta", sb[i]}, {"base", {{"kind", "grid1d"}, {"n", sn[i]}}}});
        out.push_back({{"kind", "grid1d"}, {"n", sn[i] + 3}, {"masses", "random"}, {"seed", derive_seed(seed, 100 + i)}});
    }
    return out;
}

}  // namespace homspace::gen
