#pragma once

#include <array>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "homspace/dyadic.hpp"
#include "homspace/space.hpp"

namespace homspace {

/// A family of nested sets stored as prefixes order[0:cut) of one ordering.
struct NestedChain {
    std::span<const int> order;
    std::vector<std::size_t> cuts;
    std::vector<double> radii;  // open-ball radius for each cut (balls only)
    int center = -1;
    int level = 0;  // generation (cubes only)
    int system = -1;
};

/// Sets over which a sup is taken: all distinct open balls, or the cubes of one or several systems.
/// Views into the owning Space / DyadicSystem, which must outlive the collection.
struct SetCollection {
    enum class Kind { balls, dyadic };
    Kind kind = Kind::balls;
    std::vector<NestedChain> chains;

    std::size_t set_count() const {
        std::size_t c = 0;
        for (const auto& ch : chains) c += ch.cuts.size();
        return c;
    }
    std::string describe(std::size_t chain, std::size_t cut) const {
        const NestedChain& c = chains[chain];
        if (kind == Kind::balls) return "B(" + std::to_string(c.center) + ", " + fmt_num(c.radii[cut]) + ")";
        std::string s = "Q(k=" + std::to_string(c.level) + ", centre=" + std::to_string(c.center) + ")";
        if (c.system >= 0) s += "[system " + std::to_string(c.system) + "]";
        return s;
    }
};

inline SetCollection ball_collection(const Space& s) {
    SetCollection col;
    col.kind = SetCollection::Kind::balls;
    const std::size_t n = s.size();
    for (std::size_t x = 0; x < n; ++x) {
        NestedChain ch;
        ch.order = s.order(x);
        ch.center = int(x);
        auto srt = s.sorted(x);
        for (std::size_t i = 0; i < n;) {
            std::size_t j = i;
            while (j < n && srt[j] == srt[i]) ++j;
            ch.cuts.push_back(j);
            ch.radii.push_back(j < n ? srt[j] : std::numeric_limits<double>::infinity());
            i = j;
        }
        col.chains.push_back(std::move(ch));
    }
    return col;
}

inline void append_cubes(SetCollection& col, const DyadicSystem& sys, int system_index) {
    for (const auto& lvl : sys.levels)
        for (const Cube& q : lvl) {
            NestedChain ch;
            ch.order = q.members;
            ch.cuts = {q.members.size()};
            ch.center = q.center;
            ch.level = q.level;
            ch.system = system_index;
            col.chains.push_back(std::move(ch));
        }
}

inline SetCollection dyadic_collection(const DyadicSystem& sys) {
    SetCollection col;
    col.kind = SetCollection::Kind::dyadic;
    append_cubes(col, sys, -1);
    return col;
}

inline SetCollection adjacent_collection(const std::vector<DyadicSystem>& systems) {
    SetCollection col;
    col.kind = SetCollection::Kind::dyadic;
    for (std::size_t t = 0; t < systems.size(); ++t) append_cubes(col, systems[t], int(t));
    return col;
}

/// Sup over the collection of value(S0, S1, ..., S_{K-1}) where S_i is the atom sum of the i-th vector.
template <std::size_t K, class Value>
inline std::pair<double, std::string> sup_additive(const SetCollection& col,
                                                   const std::array<std::vector<double>, K>& atoms, Value value) {
    double best = -std::numeric_limits<double>::infinity();
    std::size_t bc = 0, bk = 0;
    for (std::size_t c = 0; c < col.chains.size(); ++c) {
        const NestedChain& ch = col.chains[c];
        std::array<long double, K> acc{};
        std::size_t pos = 0;
        for (std::size_t k = 0; k < ch.cuts.size(); ++k) {
            for (; pos < ch.cuts[k]; ++pos)
                for (std::size_t i = 0; i < K; ++i) acc[i] += atoms[i][ch.order[pos]];
            double v = value(acc);
            if (v > best) best = v, bc = c, bk = k;
        }
    }
    if (col.chains.empty()) return {0.0, ""};
    return {best, col.describe(bc, bk)};
}

}  // namespace homspace
