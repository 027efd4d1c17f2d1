#pragma once

// JSON (de)serialization for the CLI surfaces.
//
// HaarExpansion schema:
//   { "maxLevel": L,
//     "coeffs": [ {"iLevel": a, "iIndex": k, "jLevel": b, "jIndex": l,
//                  "value": v}, ... ] }
// Doubles round-trip losslessly (shortest-representation printing).

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "biharp/atomic.hpp"
#include "biharp/dyadic.hpp"
#include "biharp/errors.hpp"
#include "biharp/factorize.hpp"
#include "biharp/haar.hpp"
#include "biharp/pietsch.hpp"

namespace biharp {

using json = nlohmann::json;

inline json rectangle_to_json(const DyadicRectangle& r) {
    return json{{"iLevel", r.iside.level},
                {"iIndex", r.iside.index},
                {"jLevel", r.jside.level},
                {"jIndex", r.jside.index}};
}

inline DyadicRectangle rectangle_from_json(const json& j) {
    try {
        return DyadicRectangle(j.at("iLevel").get<int>(), j.at("iIndex").get<std::int64_t>(),
                               j.at("jLevel").get<int>(), j.at("jIndex").get<std::int64_t>());
    } catch (const DomainError& e) {
        throw IoError(std::string("invalid rectangle in input: ") + e.what());
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed rectangle entry: ") + e.what());
    }
}

inline json expansion_to_json(const HaarExpansion& f) {
    json coeffs = json::array();
    for (const auto& [r, v] : f.coeffs()) {
        json entry = rectangle_to_json(r);
        entry["value"] = v;
        coeffs.push_back(std::move(entry));
    }
    return json{{"maxLevel", f.max_level()}, {"coeffs", std::move(coeffs)}};
}

inline HaarExpansion expansion_from_json(const json& j) {
    HaarExpansion f;
    try {
        for (const auto& entry : j.at("coeffs")) {
            const DyadicRectangle r = rectangle_from_json(entry);
            if (f.coeffs().contains(r)) {
                throw IoError("duplicate rectangle in coefficient list");
            }
            f.set(r, entry.at("value").get<double>());
        }
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed expansion: ") + e.what());
    }
    return f;
}

/// Accept either a single expansion object or an array of them.
inline std::vector<HaarExpansion> expansions_from_json(const json& j) {
    std::vector<HaarExpansion> out;
    if (j.is_array()) {
        for (const auto& item : j) out.push_back(expansion_from_json(item));
    } else {
        out.push_back(expansion_from_json(j));
    }
    return out;
}

inline json weights_to_json(const PietschWeights& w) {
    json entries = json::array();
    for (const auto& [r, omega] : w.weights) {
        json entry = rectangle_to_json(r);
        entry["omega"] = omega;
        entries.push_back(std::move(entry));
    }
    json out{{"p", w.p},
             {"normalization", w.mode == WeightMode::BNormalized ? "B" : "Ap"},
             {"B", w.B},
             {"dominationConstant", w.domination_constant},
             {"sumOmega", w.sum_weights},
             {"weights", std::move(entries)}};
    if (w.mode == WeightMode::ApNormalized) {
        out["ApValue"] = w.ap_value;
        out["lowApWarning"] = w.low_ap_warning;
    }
    return out;
}

inline json decomposition_to_json(const AtomicDecomposition& dec) {
    json levels = json::array();
    for (const auto& lev : dec.levels) {
        json rects = json::array();
        for (const auto& r : lev.rects) rects.push_back(rectangle_to_json(r));
        levels.push_back(json{{"n", lev.n},
                              {"rectangles", std::move(rects)},
                              // exact dyadic measure: cells / 2^denomLog2
                              {"pointsetMeasure",
                               json{{"cells", lev.rn_star_cells()},
                                    {"denomLog2", 2 * dec.grid}}},
                              {"atomL2", lev.atom_l2},
                              {"atomHp", lev.atom_hp}});
    }
    return json{{"p", dec.p},
                {"grid", dec.grid},
                {"levels", std::move(levels)},
                {"B", dec.B},
                {"fHp", dec.f_hp},
                {"apSample", dec.B / std::pow(dec.f_hp, dec.p)},
                {"nearTieCells", dec.near_tie_cells}};
}

inline json factor_pair_to_json(const FactorPair& pair) {
    return json{{"theta", pair.theta},
                {"x", expansion_to_json(pair.x)},
                {"y", expansion_to_json(pair.y)},
                {"defect", pair.defect},
                {"yH2", pair.y_h2},
                {"xX0Lower", pair.x_x0_lower},
                {"xX0Upper", pair.x_x0_upper},
                {"impliedC", pair.implied_c}};
}

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw IoError("JSON parse failure in " + path + ": " + e.what());
    }
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << text;
    if (!out) throw IoError("write failure: " + path);
}

}  // namespace biharp
