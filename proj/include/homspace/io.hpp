#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "homspace/space.hpp"

namespace homspace {

using json = nlohmann::ordered_json;

namespace detail {

inline double finite_number(const json& v, const std::string& what) {
    if (!v.is_number()) throw InvalidInput(what + " must be a number");
    double d = v.get<double>();
    if (!std::isfinite(d)) throw InvalidInput(what + " must be finite");
    return d;
}

inline const json& require(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw InvalidInput(std::string("missing field '") + key + "'");
    return j.at(key);
}

}  // namespace detail

/// Parses {points, dist (row-major n*n), mass, assumed_poincare?}.
inline Space space_from_json(const json& j) {
    const json& pts = detail::require(j, "points");
    if (!pts.is_array()) throw InvalidInput("'points' must be an array");
    std::vector<std::string> ids;
    for (const auto& p : pts) {
        if (!p.is_string()) throw InvalidInput("point ids must be strings");
        ids.push_back(p.get<std::string>());
    }
    const std::size_t n = ids.size();
    const json& dj = detail::require(j, "dist");
    if (!dj.is_array() || dj.size() != n * n)
        throw InvalidInput("'dist' must be an array of " + std::to_string(n * n) + " numbers");
    std::vector<double> d;
    d.reserve(n * n);
    for (std::size_t k = 0; k < dj.size(); ++k) d.push_back(detail::finite_number(dj[k], "dist entry " + std::to_string(k)));
    const json& mj = detail::require(j, "mass");
    if (!mj.is_array() || mj.size() != n) throw InvalidInput("'mass' must be an array of " + std::to_string(n) + " numbers");
    std::vector<double> m;
    for (std::size_t k = 0; k < n; ++k) m.push_back(detail::finite_number(mj[k], "mass entry " + std::to_string(k)));
    std::optional<PoincareAssumption> pc;
    if (j.contains("assumed_poincare")) {
        const json& a = j["assumed_poincare"];
        pc = PoincareAssumption{detail::finite_number(detail::require(a, "p"), "assumed_poincare.p"),
                                detail::finite_number(detail::require(a, "alpha"), "assumed_poincare.alpha")};
    }
    return Space(DistanceTable(n, std::move(d)), std::move(m), std::move(ids), pc);
}

inline json space_to_json(const Space& s) {
    json j;
    j["points"] = s.ids();
    j["dist"] = s.dist().data();
    j["mass"] = s.mass();
    if (s.poincare()) j["assumed_poincare"] = {{"p", s.poincare()->p}, {"alpha", s.poincare()->alpha}};
    return j;
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InvalidInput(path + ": " + e.what());
    }
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot write " + path);
    out << text;
}

}  // namespace homspace
