#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "homspace/collection.hpp"
#include "homspace/dyadic.hpp"
#include "homspace/io.hpp"
#include "homspace/metrization.hpp"
#include "homspace/weights.hpp"

namespace homspace {

/// Bijection between the points of a source and a target space with the same number of points.
class PointMap {
public:
    PointMap() = default;
    explicit PointMap(std::vector<int> perm) : fwd_(std::move(perm)), inv_(fwd_.size(), -1) {
        for (std::size_t i = 0; i < fwd_.size(); ++i) {
            int j = fwd_[i];
            if (j < 0 || std::size_t(j) >= fwd_.size() || inv_[j] >= 0)
                throw InvalidInput("map is not a permutation (entry " + std::to_string(i) + ")");
            inv_[j] = int(i);
        }
    }
    static PointMap identity(std::size_t n) { return PointMap(iota_vec(n)); }

    std::size_t size() const { return fwd_.size(); }
    int operator()(std::size_t x) const { return fwd_[x]; }
    const std::vector<int>& forward() const { return fwd_; }
    PointMap inverse() const { return PointMap(inv_); }

private:
    std::vector<int> fwd_, inv_;
};

inline void check_map(const Space& src, const Space& tgt, const PointMap& f) {
    if (f.size() != src.size() || src.size() != tgt.size())
        throw InvalidInput("map, source and target sizes disagree");
}

/// Upper envelope of the distortion ratios: eta_hat(theta) = max ratio over triples whose
/// source quotient is <= theta. Stored as its staircase corners.
struct DistortionProfile {
    std::vector<double> thetas;  // strictly increasing
    std::vector<double> values;  // strictly increasing
    std::size_t triples = 0;

    double operator()(double theta) const {
        auto it = std::upper_bound(thetas.begin(), thetas.end(), theta);
        if (it == thetas.begin()) return 0.0;
        return values[std::size_t(it - thetas.begin()) - 1];
    }
    bool empty() const { return thetas.empty(); }
};

namespace detail {

inline void pareto(std::vector<std::pair<double, double>>& pts) {
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first < b.first : a.second > b.second;
    });
    std::vector<std::pair<double, double>> out;
    double best = -1;
    for (const auto& p : pts)
        if (p.second > best) {
            if (!out.empty() && out.back().first == p.first) out.back().second = p.second;
            else out.push_back(p);
            best = p.second;
        }
    pts.swap(out);
}

}  // namespace detail

inline DistortionProfile eta_profile(const Space& src, const Space& tgt, const PointMap& f) {
    check_map(src, tgt, f);
    const std::size_t n = src.size();
    DistortionProfile prof;
    if (n < 3) return prof;
    std::vector<std::pair<double, double>> all, local;
    for (std::size_t x = 0; x < n; ++x) {
        local.clear();
        const int fx = f(x);
        for (std::size_t a = 0; a < n; ++a) {
            if (a == x) continue;
            for (std::size_t b = 0; b < n; ++b) {
                if (b == x || b == a) continue;
                local.emplace_back(src.dist(x, a) / src.dist(x, b), tgt.dist(fx, f(a)) / tgt.dist(fx, f(b)));
                ++prof.triples;
            }
        }
        detail::pareto(local);
        all.insert(all.end(), local.begin(), local.end());
    }
    detail::pareto(all);
    for (const auto& p : all) prof.thetas.push_back(p.first), prof.values.push_back(p.second);
    return prof;
}

/// Distortion function: tabulated (linear interpolation on its domain), power c t^gamma, a
/// measured envelope, or the transfer theta -> C^2 eta((C^2 theta)^(1/eps))^eps of another one.
class Eta {
public:
    enum class Kind { tabulated, power, envelope, transfer };

    static Eta tabulated(std::vector<double> thetas, std::vector<double> values) {
        if (thetas.empty() || thetas.size() != values.size()) throw InvalidInput("eta table needs matching, nonempty arrays");
        for (std::size_t i = 0; i < thetas.size(); ++i) {
            if (!std::isfinite(thetas[i]) || !std::isfinite(values[i]) || thetas[i] < 0 || values[i] < 0)
                throw InvalidInput("eta table entries must be finite and nonnegative");
            if (i && !(thetas[i] > thetas[i - 1])) throw InvalidInput("eta thetas must increase strictly");
            if (i && values[i] < values[i - 1]) throw InvalidInput("eta values must be nondecreasing");
        }
        Eta e;
        e.kind_ = Kind::tabulated;
        e.thetas_ = std::move(thetas);
        e.values_ = std::move(values);
        return e;
    }
    static Eta power(double c, double gamma) {
        if (!(c > 0) || !(gamma > 0) || !std::isfinite(c) || !std::isfinite(gamma))
            throw InvalidInput("power eta needs positive c and gamma");
        Eta e;
        e.kind_ = Kind::power;
        e.c_ = c;
        e.gamma_ = gamma;
        return e;
    }
    static Eta envelope(DistortionProfile p) {
        Eta e;
        e.kind_ = Kind::envelope;
        e.profile_ = std::make_shared<DistortionProfile>(std::move(p));
        return e;
    }
    static Eta transfer(const Eta& inner, double C, double eps) {
        Eta e;
        e.kind_ = Kind::transfer;
        e.inner_ = std::make_shared<Eta>(inner);
        e.c_ = C;
        e.gamma_ = eps;
        return e;
    }

    Kind kind() const { return kind_; }

    double operator()(double t) const {
        switch (kind_) {
            case Kind::power: return c_ * std::pow(t, gamma_);
            case Kind::envelope: return (*profile_)(t);
            case Kind::transfer: {
                const double C2 = c_ * c_;
                return C2 * std::pow((*inner_)(std::pow(C2 * t, 1 / gamma_)), gamma_);
            }
            case Kind::tabulated: break;
        }
        if (t < thetas_.front() || t > thetas_.back())
            throw ParameterError("eta is not tabulated at " + fmt_num(t) + " (domain [" + fmt_num(thetas_.front()) +
                                 ", " + fmt_num(thetas_.back()) + "])");
        auto it = std::lower_bound(thetas_.begin(), thetas_.end(), t);
        std::size_t j = std::size_t(it - thetas_.begin());
        if (thetas_[j] == t) return values_[j];
        const double a = thetas_[j - 1], b = thetas_[j];
        return values_[j - 1] + (values_[j] - values_[j - 1]) * (t - a) / (b - a);
    }

    /// Largest available theta with eta(theta) <= level; nullopt when eta stays below level
    /// everywhere (envelope) or nowhere.
    std::optional<double> largest_theta_below(double level) const {
        switch (kind_) {
            case Kind::power: return std::pow(level / c_, 1 / gamma_);
            case Kind::tabulated: {
                std::optional<double> best;
                for (std::size_t i = 0; i < thetas_.size(); ++i)
                    if (values_[i] <= level) best = thetas_[i];
                return best;
            }
            case Kind::envelope: {
                const auto& P = *profile_;
                for (std::size_t j = 0; j < P.thetas.size(); ++j)
                    if (P.values[j] > level) {
                        double t = P.thetas[j] * (1 - 1e-9);
                        if (j > 0) t = std::max(t, P.thetas[j - 1]);
                        return t;
                    }
                return std::nullopt;
            }
            case Kind::transfer: break;
        }
        throw ParameterError("threshold search is not available for transferred eta");
    }

private:
    Kind kind_ = Kind::power;
    std::vector<double> thetas_, values_;
    double c_ = 1, gamma_ = 1;
    std::shared_ptr<const DistortionProfile> profile_;
    std::shared_ptr<const Eta> inner_;
};

inline Eta eta_from_json(const json& j) {
    if (j.contains("kind")) {
        if (j["kind"] != "power") throw InvalidInput("unknown eta kind");
        return Eta::power(detail::finite_number(detail::require(j, "c"), "eta.c"),
                          detail::finite_number(detail::require(j, "gamma"), "eta.gamma"));
    }
    std::vector<double> t, v;
    for (const auto& x : detail::require(j, "thetas")) t.push_back(detail::finite_number(x, "eta theta"));
    for (const auto& x : detail::require(j, "values")) v.push_back(detail::finite_number(x, "eta value"));
    return Eta::tabulated(std::move(t), std::move(v));
}

inline PointMap map_from_json(const json& j) {
    std::vector<int> p;
    for (const auto& x : detail::require(j, "perm")) {
        if (!x.is_number_integer()) throw InvalidInput("perm entries must be integers");
        p.push_back(x.get<int>());
    }
    return PointMap(std::move(p));
}

struct QsVerdict {
    bool holds = true;
    double worst_ratio = 0;  // max sample ratio / eta(theta)
    double theta = 0;
};

/// Every sampled ratio is at most eta(theta); corner points of the envelope suffice since eta is
/// nondecreasing.
inline QsVerdict is_quasisymmetric(const DistortionProfile& prof, const Eta& eta) {
    QsVerdict v;
    for (std::size_t i = 0; i < prof.thetas.size(); ++i) {
        double e = eta(prof.thetas[i]);
        double r = e > 0 ? prof.values[i] / e : std::numeric_limits<double>::infinity();
        if (r > v.worst_ratio) v.worst_ratio = r, v.theta = prof.thetas[i];
        if (!leq_rel(prof.values[i], e)) v.holds = false;
    }
    return v;
}

inline std::vector<double> pullback_measure(const Space& tgt, const PointMap& f) {
    std::vector<double> m(f.size());
    for (std::size_t x = 0; x < f.size(); ++x) m[x] = tgt.mass(f(x));
    return m;
}

struct PullbackDoubling {
    double theta = 0;
    long k = 1;
    double tau = 0.5;
    bool annuli = true;
    BoundCheck check;  // doubling of mu_f against A1^(1 + log2(eta(2k^3) eta(k^2)))
};

inline PullbackDoubling pullback_doubling_check(const Space& src, const Space& tgt, const PointMap& f, const Eta& eta,
                                                double tau) {
    check_map(src, tgt, f);
    PullbackDoubling r;
    r.tau = tau;
    r.annuli = check_tau_annuli(src, tau).holds;
    auto th = eta.largest_theta_below(1.0 / 3.0);
    if (!th && eta.kind() != Eta::Kind::envelope) throw ParameterError("eta exceeds 1/3 at every tabulated theta");
    r.theta = th ? *th : std::numeric_limits<double>::infinity();
    if (th && !(*th > 0)) throw ParameterError("no positive theta with eta(theta) <= 1/3");
    r.k = long(std::ceil(std::max(th ? 1 / *th : 0.0, 1 / tau)));
    const double kk = double(r.k);
    const double prod = eta(2 * kk * kk * kk) * eta(kk * kk);
    const double bound = prod > 0 ? std::pow(tgt.A1(), 1 + std::log2(prod)) : 0.0;
    Witnessed m = src.ratio_sup(pullback_measure(tgt, f), 2.0);
    r.check = make_check("pullback doubling", m.value, bound,
                         "x=" + std::to_string(m.x) + " r=" + fmt_num(m.radius));
    return r;
}

struct DistortionGap {
    double s = 0, t = std::numeric_limits<double>::infinity();
    bool pass = true;
};

/// s = sup of target distance from f(x) over f(B(x,r)); t = inf over the image of the complement
/// of B(x, k r). Requires eta(theta) <= 1/3 and k >= 1/theta.
inline DistortionGap distortion_gap(const Space& src, const Space& tgt, const PointMap& f, int x, double r, double k,
                                    double theta, const Eta& eta) {
    if (!(eta(theta) <= 1.0 / 3.0)) throw ParameterError("distortion gap needs eta(theta) <= 1/3");
    if (!(k * theta >= 1 - kContainmentSlack)) throw ParameterError("distortion gap needs k >= 1/theta");
    DistortionGap g;
    for (std::size_t y = 0; y < src.size(); ++y) {
        const double d = src.dist(x, y), e = tgt.dist(f(x), f(y));
        if (d < r) g.s = std::max(g.s, e);
        if (!(d < k * r)) g.t = std::min(g.t, e);
    }
    g.pass = g.s < g.t;
    return g;
}

struct GapScan {
    std::size_t balls = 0;
    std::size_t failures = 0;
    int x = -1;
    double r = 0;
};

inline GapScan distortion_gap_scan(const Space& src, const Space& tgt, const PointMap& f, double k, double theta,
                                   const Eta& eta) {
    GapScan sc;
    const double factors[] = {1.0, k};
    std::vector<double> cells;
    for (std::size_t x = 0; x < src.size(); ++x) {
        src.radius_cells(x, factors, cells);
        for (double r : cells) {
            ++sc.balls;
            if (!distortion_gap(src, tgt, f, int(x), r, k, theta, eta).pass) {
                if (sc.failures++ == 0) sc.x = int(x), sc.r = r;
            }
        }
    }
    return sc;
}

/// Jacobian of the pulled-back measure: at the finest scale and on a table of coarser radii.
struct Jacobian {
    std::vector<double> finest;
    std::vector<double> radii;
    std::vector<std::vector<double>> multiscale;  // [radius][x]
    RadonNikodym identity;
};

inline std::vector<double> sample_radii(const Space& s, std::size_t cap = 48) {
    std::vector<double> r(s.dist().data());
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
    if (!r.empty() && r.front() == 0) r.erase(r.begin());
    if (r.size() <= cap) return r;
    std::vector<double> out;
    for (std::size_t i = 0; i < cap; ++i) out.push_back(r[i * (r.size() - 1) / (cap - 1)]);
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

inline Jacobian generalized_jacobian(const Space& src, const Space& tgt, const PointMap& f, std::uint64_t seed = 0,
                                     std::size_t samples = 10000, std::size_t exhaustive_limit = 12) {
    check_map(src, tgt, f);
    Jacobian J;
    const std::vector<double> muf = pullback_measure(tgt, f);
    J.identity = radon_nikodym(src, muf, seed, samples, exhaustive_limit);
    J.finest = J.identity.derivative;
    J.radii = sample_radii(src);
    for (double r : J.radii) {
        std::vector<double> row(src.size());
        for (std::size_t x = 0; x < src.size(); ++x) row[x] = src.ball_sum(x, r, true, muf) / src.ball_mass(x, r, true);
        J.multiscale.push_back(std::move(row));
    }
    return J;
}

/// Jacobians read off d_eps balls against rho balls.
struct JacobianComparability {
    std::vector<double> finest_hat, finest_tilde;
    double finest_max_deviation = 0;  // max |J_hat/J_tilde - 1| at the finest scale
    double finest_constant = 1;       // max of J_hat/J_tilde and its inverse at the finest scale
    double stated_constant = 1;       // C_muf^(2 + log2 C^(1/eps)) / A1^(-log2 C^(-1/eps))
    BoundCheck hat_over_tilde;        // multiscale, against (C_muf A1)^(1 + log2 C^(1/eps)) over rho balls
    BoundCheck tilde_over_hat;        // multiscale, against (C_muf A1)^(1 + log2 C) over d_eps balls
};

inline JacobianComparability jacobian_comparability(const Space& src_rho, const Space& src_hat, const Space& tgt,
                                                    const PointMap& f, const Metrization& m) {
    JacobianComparability jc;
    const std::vector<double> muf = pullback_measure(tgt, f);
    const double C = m.C_eps * (1 + kContainmentSlack), e = m.epsilon;
    const double cmuf_rho = src_rho.ratio_sup(muf, 2.0).value, cmuf_hat = src_hat.ratio_sup(muf, 2.0).value;
    jc.stated_constant = std::pow(cmuf_rho, 2 + std::log2(std::pow(C, 1 / e))) /
                         std::pow(src_rho.A1(), -std::log2(std::pow(C, -1 / e)));
    const double rfin_rho = src_rho.size() > 1 ? src_rho.min_positive_dist() / 2 : 1.0;
    const double rfin_hat = src_hat.size() > 1 ? src_hat.min_positive_dist() / 2 : 1.0;
    for (std::size_t x = 0; x < src_rho.size(); ++x) {
        double jt = src_rho.ball_sum(x, rfin_rho, true, muf) / src_rho.ball_mass(x, rfin_rho, true);
        double jh = src_hat.ball_sum(x, rfin_hat, true, muf) / src_hat.ball_mass(x, rfin_hat, true);
        jc.finest_hat.push_back(jh);
        jc.finest_tilde.push_back(jt);
        jc.finest_max_deviation = std::max(jc.finest_max_deviation, std::abs(jh / jt - 1));
        jc.finest_constant = std::max({jc.finest_constant, jh / jt, jt / jh});
    }
    double worst_ht = 0, worst_th = 0;
    std::string wht, wth;
    for (double r : sample_radii(src_rho)) {
        const double re = std::pow(r, e);
        for (std::size_t x = 0; x < src_rho.size(); ++x) {
            double jt = src_rho.ball_sum(x, r, true, muf) / src_rho.ball_mass(x, r, true);
            double jh = src_hat.ball_sum(x, re, true, muf) / src_hat.ball_mass(x, re, true);
            if (jh / jt > worst_ht) worst_ht = jh / jt, wht = "x=" + std::to_string(x) + " r=" + fmt_num(r);
            if (jt / jh > worst_th) worst_th = jt / jh, wth = "x=" + std::to_string(x) + " r=" + fmt_num(r);
        }
    }
    jc.hat_over_tilde = make_check("jacobian ratio over rho scales", worst_ht,
                                   std::pow(cmuf_rho * src_rho.A1(), 1 + std::log2(std::pow(C, 1 / e))), wht);
    jc.tilde_over_hat = make_check("jacobian ratio over metric scales", worst_th,
                                   std::pow(cmuf_hat * src_hat.A1(), 1 + std::log2(C)), wth);
    return jc;
}

inline Eta qs_transfer(const Eta& eta, double C_eps, double eps) { return Eta::transfer(eta, C_eps, eps); }

/// sup over balls B and fractional E in B with mu(E) <= eps mu(B) of mu_f(E)/mu_f(B).
inline double ainf_modulus(const Space& s, std::span<const double> J, double eps) {
    double best = 0;
    std::vector<int> mem;
    const std::size_t n = s.size();
    for (std::size_t x = 0; x < n; ++x) {
        auto srt = s.sorted(x);
        for (std::size_t i = 0; i < n;) {
            std::size_t j = i;
            while (j < n && srt[j] == srt[i]) ++j;
            auto pts = s.order(x).first(j);
            mem.assign(pts.begin(), pts.end());
            std::sort(mem.begin(), mem.end(), [&](int a, int b) { return J[a] != J[b] ? J[a] > J[b] : a < b; });
            long double mb = 0, fb = 0;
            for (int y : mem) mb += s.mass(y), fb += J[y] * (long double)s.mass(y);
            long double budget = eps * mb, took = 0;
            for (int y : mem) {
                if (s.mass(y) <= budget) {
                    budget -= s.mass(y);
                    took += J[y] * (long double)s.mass(y);
                } else {
                    took += J[y] * budget;
                    break;
                }
            }
            best = std::max(best, double(took / fb));
            i = j;
        }
    }
    return best;
}

struct ReimannOptions {
    std::vector<double> rh_eps_grid{0.1, 0.25, 0.5, 1.0, 2.0};
    double rh_threshold = 4.0;
    int T = 8;
    double tau = 0.5;
    std::uint64_t seed = 0;
};

struct ReimannReport {
    std::vector<PipelineRow> rows;
    DistortionProfile profile;
    Jacobian jacobian;
    std::vector<std::pair<double, double>> rh_table;  // (eps, RH_{1+eps} over balls)
    double chosen_eps = 1;
    double bmo_log_j = 0;      // over rho balls
    double bmo_log_j_hat = 0;  // over d_eps balls
    double C_eps = 1, epsilon = 1;
    double stated_comparability_constant = 1;
    LogBmoPipeline weights;
    bool pass() const {
        return std::all_of(rows.begin(), rows.end(), [](const PipelineRow& r) { return r.check.pass; });
    }
};

/// Quasisymmetric image of a doubling measure: distortion, doubling of the pullback, its Jacobian,
/// the weight chain applied to the Jacobian, and the transfer to the chain metric.
inline ReimannReport reimann_pipeline(const Space& src, const Space& tgt, const PointMap& f,
                                      const ReimannOptions& opt = {}) {
    check_map(src, tgt, f);
    ReimannReport R;
    auto add = [&](std::string step, BoundCheck c) { R.rows.push_back({std::move(step), std::move(c)}); };

    R.profile = eta_profile(src, tgt, f);
    const Eta env = Eta::envelope(R.profile);
    PullbackDoubling pd = pullback_doubling_check(src, tgt, f, env, opt.tau);
    add("annuli", BoundCheck{"tau annuli", pd.annuli ? 0.0 : 1.0, 0.0, pd.annuli, "tau=" + fmt_num(opt.tau)});
    add("pullback doubling", pd.check);
    if (std::isfinite(pd.theta) && src.size() >= 3) {
        GapScan gs = distortion_gap_scan(src, tgt, f, double(pd.k), pd.theta, env);
        add("distortion gap", BoundCheck{"failing balls", double(gs.failures), 0.0, gs.failures == 0,
                                         std::to_string(gs.balls) + " balls"});
    }

    R.jacobian = generalized_jacobian(src, tgt, f, opt.seed);
    const std::vector<double>& J = R.jacobian.finest;
    add("jacobian identity", make_check("integral identity error", R.jacobian.identity.max_identity_error, 1e-12));

    SetCollection balls = ball_collection(src);
    R.chosen_eps = 0;
    double chosen_rh = 1;
    for (double e : opt.rh_eps_grid) {
        double v = rh_constant(src, J, balls, 1 + e).value;
        R.rh_table.emplace_back(e, v);
        if (v <= opt.rh_threshold && e > R.chosen_eps) R.chosen_eps = e, chosen_rh = v;
    }
    if (R.chosen_eps == 0) R.chosen_eps = opt.rh_eps_grid.front(), chosen_rh = R.rh_table.front().second;
    const double q = 1 + R.chosen_eps;
    for (double e : {0.01, 0.05, 0.1, 0.25, 0.5})
        add("A-infinity modulus eps=" + fmt_num(e),
            make_check("mu_f(E)/mu_f(B)", ainf_modulus(src, J, e), chosen_rh * std::pow(e, 1 - 1 / q)));

    AdjacentFamily fam = build_adjacent_systems(src, opt.T, max_adjacent_delta(src.A0()), opt.seed);
    R.weights = log_bmo_pipeline(src, J, q, fam.systems, opt.seed, false);
    for (const auto& r : R.weights.rows) add("weights " + r.step, r.check);

    const std::vector<double> lj = log_of(J);
    R.bmo_log_j = bmo_norm(src, lj, balls).value;

    const double eps = std::min(default_chain_exponent(src.A0()), default_chain_exponent(tgt.A0()));
    Metrization ms = chain_metric(src.dist(), eps), mt = chain_metric(tgt.dist(), eps);
    R.epsilon = eps;
    R.C_eps = std::max(ms.C_eps, mt.C_eps);
    Space src_hat(ms.d_eps, src.mass(), src.ids()), tgt_hat(mt.d_eps, tgt.mass(), tgt.ids());
    JacobianComparability jc = jacobian_comparability(src, src_hat, tgt, f, ms);
    R.stated_comparability_constant = jc.stated_constant;
    add("jacobian finest-scale ratio", BoundCheck{"max |ratio - 1|", jc.finest_max_deviation, 0.0,
                                                 jc.finest_max_deviation == 0.0, ""});
    add("jacobian stated constant", make_check("finest ratio against stated constant", 1.0 + jc.finest_max_deviation,
                                               std::max(jc.stated_constant, 1.0),
                                               "stated " + fmt_num(jc.stated_constant)));
    add("jacobian rho scales", jc.hat_over_tilde);
    add("jacobian metric scales", jc.tilde_over_hat);

    if (src.size() >= 3) {
        DistortionProfile hat = eta_profile(src_hat, tgt_hat, f);
        QsVerdict v = is_quasisymmetric(hat, qs_transfer(env, R.C_eps * (1 + kContainmentSlack), eps));
        add("distortion transfer", make_check("ratio against transferred eta", v.worst_ratio, 1.0,
                                              "theta=" + fmt_num(v.theta)));
    }

    SetCollection hat_balls = ball_collection(src_hat);
    R.bmo_log_j_hat = bmo_norm(src_hat, log_of(jc.finest_hat), hat_balls).value;
    const double tilde_on_hat = bmo_norm(src_hat, log_of(jc.finest_tilde), hat_balls).value;
    add("BMO additive transfer", make_check("BMO of log J_tilde over metric balls", tilde_on_hat,
                                            2 * std::log(jc.finest_constant) + R.bmo_log_j_hat));
    const double C = R.C_eps * (1 + kContainmentSlack);
    add("BMO rho from metric", make_check("BMO over rho balls", R.bmo_log_j,
                                          2 * std::pow(src_hat.A1(), 1 + std::log2(C * C)) * R.bmo_log_j_hat));
    add("BMO metric from rho", make_check("BMO over metric balls", R.bmo_log_j_hat,
                                          2 * std::pow(src.A1(), 1 + (2 / eps) * std::log2(C)) * R.bmo_log_j));
    return R;
}

}  // namespace homspace
