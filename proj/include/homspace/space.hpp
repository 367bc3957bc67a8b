#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "homspace/core.hpp"

namespace homspace {

/// Dense symmetric n x n table of pairwise distances, row-major.
class DistanceTable {
public:
    DistanceTable() = default;
    explicit DistanceTable(std::size_t n) : n_(n), d_(n * n, 0.0) {}
    DistanceTable(std::size_t n, std::vector<double> row_major) : n_(n), d_(std::move(row_major)) {
        if (d_.size() != n * n)
            throw InvalidInput("distance table has " + std::to_string(d_.size()) + " entries, expected " +
                               std::to_string(n * n));
    }

    std::size_t size() const { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }
    void set(std::size_t i, std::size_t j, double v) {
        d_[i * n_ + j] = v;
        d_[j * n_ + i] = v;
    }
    std::span<const double> row(std::size_t i) const { return {d_.data() + i * n_, n_}; }
    const std::vector<double>& data() const { return d_; }

    template <class F>
    DistanceTable transformed(F f) const {
        DistanceTable out(n_);
        for (std::size_t k = 0; k < d_.size(); ++k) out.d_[k] = d_[k] == 0.0 ? 0.0 : f(d_[k]);
        return out;
    }

    /// Throws InvalidInput unless the table is finite, symmetric, zero exactly on the diagonal.
    void validate() const {
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = 0; j < n_; ++j) {
                double v = (*this)(i, j);
                std::string at = "dist[" + std::to_string(i) + "][" + std::to_string(j) + "]";
                if (!std::isfinite(v)) throw InvalidInput(at + " is not finite");
                if (v < 0) throw InvalidInput(at + " is negative");
                if (i == j && v != 0.0) throw InvalidInput(at + " must be zero");
                if (i != j && v == 0.0) throw InvalidInput(at + " is zero for distinct points");
                if (v != (*this)(j, i)) throw InvalidInput(at + " breaks symmetry");
            }
        }
    }

private:
    std::size_t n_ = 0;
    std::vector<double> d_;
};

/// Value of a constant together with the configuration attaining it.
struct Witnessed {
    double value = 1.0;
    int x = -1, y = -1, z = -1;
    double radius = 0.0;
};

/// Smallest A0 >= 1 with d(x,z) <= A0 (d(x,y) + d(y,z)) for all triples.
inline Witnessed quasitriangle_constant(const DistanceTable& d) {
    const std::size_t n = d.size();
    Witnessed best;
    for (std::size_t x = 0; x < n; ++x) {
        auto rx = d.row(x);
        for (std::size_t z = x + 1; z < n; ++z) {
            auto rz = d.row(z);
            double m = rx[z];
            std::size_t arg = x;
            for (std::size_t y = 0; y < n; ++y) {
                double s = rx[y] + rz[y];
                if (s < m) {
                    m = s;
                    arg = y;
                }
            }
            double ratio = rx[z] / m;
            if (ratio > best.value) best = {ratio, int(x), int(arg), int(z), 0.0};
        }
    }
    return best;
}

inline bool is_metric(const DistanceTable& d, double rel = kContainmentSlack) {
    return quasitriangle_constant(d).value <= 1.0 + rel;
}

struct PoincareAssumption {
    double p = 1.0;
    double alpha = 1.0;
};

/// Finite quasimetric measure space: points, quasimetric table, positive atom masses.
/// Neighbour orders and the structural constants are computed once at construction.
class Space {
public:
    Space() = default;
    Space(DistanceTable dist, std::vector<double> mass, std::vector<std::string> ids = {},
          std::optional<PoincareAssumption> poincare = std::nullopt)
        : dist_(std::move(dist)), mass_(std::move(mass)), ids_(std::move(ids)), poincare_(poincare) {
        const std::size_t n = dist_.size();
        if (n == 0) throw InvalidInput("space must contain at least one point");
        if (mass_.size() != n)
            throw InvalidInput("mass has " + std::to_string(mass_.size()) + " entries, expected " +
                               std::to_string(n));
        for (std::size_t i = 0; i < n; ++i)
            if (!std::isfinite(mass_[i]) || mass_[i] <= 0)
                throw InvalidInput("mass[" + std::to_string(i) + "] must be positive and finite");
        if (ids_.empty())
            for (std::size_t i = 0; i < n; ++i) ids_.push_back(std::to_string(i));
        if (ids_.size() != n) throw InvalidInput("points and dist sizes disagree");
        dist_.validate();
        index();
        a0_ = quasitriangle_constant(dist_);
        a1_ = ratio_sup(mass_, 2.0);
    }

    std::size_t size() const { return dist_.size(); }
    const DistanceTable& dist() const { return dist_; }
    double dist(std::size_t i, std::size_t j) const { return dist_(i, j); }
    const std::vector<double>& mass() const { return mass_; }
    double mass(std::size_t i) const { return mass_[i]; }
    const std::vector<std::string>& ids() const { return ids_; }
    const std::optional<PoincareAssumption>& poincare() const { return poincare_; }

    double total_mass() const { return total_; }
    double min_positive_dist() const { return min_pos_; }
    double diameter() const { return diam_; }

    double A0() const { return a0_.value; }
    const Witnessed& A0_witness() const { return a0_; }
    double A1() const { return a1_.value; }
    const Witnessed& A1_witness() const { return a1_; }

    /// Points ordered by distance from x (ties by index); x itself first.
    std::span<const int> order(std::size_t x) const { return {order_.data() + x * size(), size()}; }
    /// Distances along order(x), ascending.
    std::span<const double> sorted(std::size_t x) const { return {sorted_.data() + x * size(), size()}; }

    /// Number of leading entries of order(x) inside the open (or closed) ball of radius r.
    std::size_t ball_count(std::size_t x, double r, bool closed = false) const {
        auto s = sorted(x);
        auto it = closed ? std::upper_bound(s.begin(), s.end(), r) : std::lower_bound(s.begin(), s.end(), r);
        return std::size_t(it - s.begin());
    }
    std::span<const int> ball(std::size_t x, double r, bool closed = false) const {
        return order(x).first(ball_count(x, r, closed));
    }
    double ball_mass(std::size_t x, double r, bool closed = false) const {
        return prefix_mass_[x * (size() + 1) + ball_count(x, r, closed)];
    }
    /// Mass of the first k entries of order(x).
    double prefix_mass(std::size_t x, std::size_t k) const { return prefix_mass_[x * (size() + 1) + k]; }
    /// Atom sum of an arbitrary nonnegative vector over a ball.
    double ball_sum(std::size_t x, double r, bool closed, std::span<const double> atoms) const {
        long double s = 0;
        for (int y : ball(x, r, closed)) s += atoms[y];
        return double(s);
    }

    /// sup over x, r of atoms(B(x, lambda r)) / atoms(B(x, r)) over open balls, computed exactly
    /// by evaluating one radius in every cell on which both balls are constant.
    Witnessed ratio_sup(std::span<const double> atoms, double lambda) const {
        Witnessed best;
        const std::size_t n = size();
        std::vector<long double> pref(n + 1);
        std::vector<double> cells;
        const double factors[] = {1.0, lambda};
        for (std::size_t x = 0; x < n; ++x) {
            auto ord = order(x);
            pref[0] = 0;
            for (std::size_t i = 0; i < n; ++i) pref[i + 1] = pref[i] + atoms[ord[i]];
            radius_cells(x, factors, cells);
            for (double r : cells) {
                double num = double(pref[count_scaled(x, lambda, r)]);
                double den = double(pref[count_scaled(x, 1.0, r)]);
                double q = num / den;
                if (q > best.value) best = {q, int(x), -1, -1, r};
            }
        }
        return best;
    }

    /// Representative radii of all cells (in r) on which each B(x, c r), c in factors, is constant.
    /// Open and closed balls share the cells' interiors, so one midpoint per cell suffices.
    void radius_cells(std::size_t x, std::span<const double> factors, std::vector<double>& out) const {
        out.clear();
        std::vector<double> bps;
        auto s = sorted(x);
        for (double c : factors)
            for (std::size_t i = 1; i < s.size(); ++i) bps.push_back(s[i] / c);
        std::sort(bps.begin(), bps.end());
        bps.erase(std::unique(bps.begin(), bps.end()), bps.end());
        if (bps.empty()) {
            out.push_back(1.0);
            return;
        }
        out.push_back(bps.front() / 2);
        for (std::size_t i = 0; i + 1 < bps.size(); ++i) out.push_back(0.5 * (bps[i] + bps[i + 1]));
        out.push_back(bps.back() * 2);
    }

    /// #{y : d(x,y) / c < r}; the comparison mirrors how cell breakpoints are formed.
    std::size_t count_scaled(std::size_t x, double c, double r, bool closed = false) const {
        auto s = sorted(x);
        if (closed)
            return std::size_t(std::partition_point(s.begin(), s.end(), [&](double v) { return v / c <= r; }) -
                               s.begin());
        return std::size_t(std::partition_point(s.begin(), s.end(), [&](double v) { return v / c < r; }) -
                           s.begin());
    }

private:
    void index() {
        const std::size_t n = size();
        order_.resize(n * n);
        sorted_.resize(n * n);
        prefix_mass_.resize(n * (n + 1));
        min_pos_ = std::numeric_limits<double>::infinity();
        diam_ = 0;
        long double tot = 0;
        for (double m : mass_) tot += m;
        total_ = double(tot);
        for (std::size_t x = 0; x < n; ++x) {
            int* o = order_.data() + x * n;
            std::iota(o, o + n, 0);
            auto r = dist_.row(x);
            std::stable_sort(o, o + n, [&](int a, int b) { return r[a] < r[b]; });
            long double acc = 0;
            prefix_mass_[x * (n + 1)] = 0;
            for (std::size_t i = 0; i < n; ++i) {
                sorted_[x * n + i] = r[o[i]];
                acc += mass_[o[i]];
                prefix_mass_[x * (n + 1) + i + 1] = double(acc);
                if (r[o[i]] > 0) min_pos_ = std::min(min_pos_, r[o[i]]);
                diam_ = std::max(diam_, r[o[i]]);
            }
        }
        if (n == 1) min_pos_ = 0;
    }

    DistanceTable dist_;
    std::vector<double> mass_;
    std::vector<std::string> ids_;
    std::optional<PoincareAssumption> poincare_;
    std::vector<int> order_;
    std::vector<double> sorted_;
    std::vector<double> prefix_mass_;
    double total_ = 0, min_pos_ = 0, diam_ = 0;
    Witnessed a0_, a1_;
};

/// Checks mu(B(x, lambda r)) <= A1^(1 + log2 lambda) mu(B(x, r)) for the given dilations.
inline std::vector<BoundCheck> doubling_power_checks(const Space& s,
                                                     std::vector<double> lambdas = {2.0, 3.0, 4.0, 8.0}) {
    std::vector<BoundCheck> out;
    for (double lam : lambdas) {
        Witnessed w = s.ratio_sup(s.mass(), lam);
        double bound = std::pow(s.A1(), 1.0 + std::log2(lam));
        out.push_back(make_check("doubling lambda=" + fmt_num(lam), w.value, bound,
                                 "x=" + std::to_string(w.x) + " r=" + fmt_num(w.radius)));
    }
    return out;
}

/// Best kappa with kappa^-1 r^alpha <= mu(B(x,r)) <= kappa r^alpha for every x and every r in
/// [min positive distance, diameter), the radii a finite space resolves.
struct AlphaRegularity {
    double kappa = 1.0;
    double upper = 0.0;  // sup mu(B)/r^alpha
    double lower = 0.0;  // sup r^alpha/mu(B)
    int x_upper = -1, x_lower = -1;
    double r_upper = 0, r_lower = 0;
};

inline AlphaRegularity check_alpha_regular(const Space& s, double alpha) {
    if (!(alpha > 0) || !std::isfinite(alpha)) throw ParameterError("alpha must be positive");
    AlphaRegularity res;
    const std::size_t n = s.size();
    if (n == 1) return res;
    const double lo_dom = s.min_positive_dist(), hi_dom = s.diameter();
    for (std::size_t x = 0; x < n; ++x) {
        auto srt = s.sorted(x);
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j < n && srt[j] == srt[i]) ++j;
            // On (srt[i], next] the open ball is the prefix [0, j).
            double m = s.prefix_mass(x, j);
            double a = srt[i];
            double b = j < n ? srt[j] : std::numeric_limits<double>::infinity();
            double lo = std::max(a, lo_dom), hi = std::min(b, hi_dom);
            bool lo_in = lo_dom > a, hi_in = b < hi_dom;
            bool nonempty = lo < hi || (lo == hi && lo_in && hi_in);
            if (nonempty) {
                double up = m / std::pow(lo, alpha);
                double dn = std::pow(hi, alpha) / m;
                if (up > res.upper) res.upper = up, res.x_upper = int(x), res.r_upper = lo;
                if (dn > res.lower) res.lower = dn, res.x_lower = int(x), res.r_lower = hi;
            }
            i = j;
        }
    }
    res.kappa = std::max({1.0, res.upper, res.lower});
    return res;
}

/// Whether every ball that misses part of the space has a point in the annulus
/// tau r <= d(x,y) < r, tested for the resolved radii tau r >= min positive distance.
struct TauAnnuli {
    bool holds = true;
    int x = -1;
    double r = 0;
    bool implied_by_regularity = false;  // tau < kappa^(-2/alpha)
    bool implication_consistent = true;
};

inline TauAnnuli check_tau_annuli(const Space& s, double tau, std::optional<std::pair<double, double>>
                                                                  alpha_kappa = std::nullopt) {
    if (!(tau > 0 && tau < 1)) throw ParameterError("tau must lie in (0,1)");
    TauAnnuli res;
    const std::size_t n = s.size();
    const double start = s.min_positive_dist() / tau;
    const double factors[] = {1.0, tau};
    std::vector<double> cells;
    for (std::size_t x = 0; x < n && res.holds && n > 1; ++x) {
        s.radius_cells(x, factors, cells);
        cells.push_back(start);
        for (double r : cells) {
            if (r < start) continue;
            std::size_t in_ball = s.count_scaled(x, 1.0, r);
            if (in_ball == n) continue;
            std::size_t inner = s.count_scaled(x, tau, r);  // d / tau < r  <=>  d < tau r
            if (in_ball <= inner) {
                res.holds = false;
                res.x = int(x);
                res.r = r;
                break;
            }
        }
    }
    if (alpha_kappa) {
        auto [alpha, kappa] = *alpha_kappa;
        res.implied_by_regularity = tau < std::pow(kappa, -2.0 / alpha);
        res.implication_consistent = !res.implied_by_regularity || res.holds;
    }
    return res;
}

/// Derivative of an atomic measure nu with respect to mu, read off closed balls below the
/// resolution scale, plus the largest relative error of nu(S) = sum_S D mu over tested subsets.
struct RadonNikodym {
    std::vector<double> derivative;
    double max_identity_error = 0;
    std::size_t subsets_checked = 0;
};

inline double identity_error(const Space& s, std::span<const double> nu, std::span<const double> D,
                             const std::vector<char>& in) {
    long double lhs = 0, rhs = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (in[i]) lhs += nu[i], rhs += (long double)D[i] * s.mass(i);
    if (lhs == 0 && rhs == 0) return 0;
    return double(std::abs(lhs - rhs) / std::max(std::abs(lhs), std::abs(rhs)));
}

/// Exhaustive over all subsets when n <= exhaustive_limit, otherwise `samples` random subsets.
inline RadonNikodym radon_nikodym(const Space& s, std::span<const double> nu, std::uint64_t seed = 0,
                                  std::size_t samples = 50, std::size_t exhaustive_limit = 0) {
    const std::size_t n = s.size();
    if (nu.size() != n) throw InvalidInput("measure has wrong length");
    for (std::size_t i = 0; i < n; ++i)
        if (!std::isfinite(nu[i]) || nu[i] < 0) throw InvalidInput("measure atoms must be finite and nonnegative");
    RadonNikodym res;
    const double r = n > 1 ? s.min_positive_dist() / 2 : 1.0;
    for (std::size_t x = 0; x < n; ++x) {
        double num = s.ball_sum(x, r, true, nu);
        double den = s.ball_mass(x, r, true);
        res.derivative.push_back(num / den);
    }
    std::vector<char> in(n);
    if (n <= exhaustive_limit) {
        for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << n); ++mask) {
            for (std::size_t i = 0; i < n; ++i) in[i] = (mask >> i) & 1;
            res.max_identity_error = std::max(res.max_identity_error, identity_error(s, nu, res.derivative, in));
            ++res.subsets_checked;
        }
    } else {
        Rng rng(seed);
        for (std::size_t t = 0; t < samples; ++t) {
            for (std::size_t i = 0; i < n; ++i) in[i] = rng.coin();
            res.max_identity_error = std::max(res.max_identity_error, identity_error(s, nu, res.derivative, in));
            ++res.subsets_checked;
        }
    }
    return res;
}

}  // namespace homspace
