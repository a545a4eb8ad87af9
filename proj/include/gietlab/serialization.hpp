#pragma once

#include <json.hpp>

#include "gietlab/giet.hpp"

namespace gietlab {

using json = nlohmann::json;

/// On-disk experiment state format: grids and Hermite data as JSON arrays of
/// binary doubles (nlohmann prints shortest-round-trip decimals, so parsing
/// reproduces the bits).
inline json to_json(const MonotoneMap& m) {
    return json{{"grid", m.grid()},
                {"values", m.values()},
                {"d1", m.deriv1_data()},
                {"d2", m.deriv2_data()},
                {"d3", m.deriv3_data()},
                {"order", 5}};
}

inline MonotoneMap monotone_map_from_json(const json& j) {
    return MonotoneMap(j.at("grid").get<std::vector<double>>(),
                       j.at("values").get<std::vector<double>>(),
                       j.at("d1").get<std::vector<double>>(),
                       j.at("d2").get<std::vector<double>>(),
                       j.at("d3").get<std::vector<double>>());
}

inline json to_json(const Aiet& a) {
    return json{{"permutation", a.sigma.to_one_based()}, {"lambda", a.lambda}, {"rho", a.rho}};
}

inline Aiet aiet_from_json(const json& j) {
    return Aiet(Permutation(j.at("permutation").get<std::vector<int>>()),
                j.at("lambda").get<std::vector<double>>(),
                j.at("rho").get<std::vector<double>>());
}

inline json to_json(const Giet& t) {
    json profiles = json::array();
    for (const auto& p : t.profiles) profiles.push_back(to_json(p));
    return json{{"affine", to_json(t.affine)}, {"profiles", profiles}};
}

inline Giet giet_from_json(const json& j) {
    std::vector<MonotoneMap> profiles;
    for (const auto& p : j.at("profiles")) profiles.push_back(monotone_map_from_json(p));
    return Giet(aiet_from_json(j.at("affine")), std::move(profiles));
}

}  // namespace gietlab
