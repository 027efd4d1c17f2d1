#pragma once

// Brute-force reference path for tiny expansions.
//
// Everything here is recomputed from first principles with plain loops over
// a dense grid: square function, level sets, the rectangle classification,
// atom norms, the chain constant B, the weights and the domination ratios
// for every sign-pattern multiplier.  Shares no computation with the main
// code path (no CellSet, no GridFunction, no classify).  Cost is exponential
// in the support size; inputs are capped accordingly.

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "biharp/errors.hpp"
#include "biharp/haar.hpp"
#include "biharp/numeric.hpp"

namespace biharp {

struct OracleRecord {
    double p = 1.0;
    int grid = 0;
    double f_hp = 0.0;
    double f_h2 = 0.0;
    std::map<DyadicRectangle, int> level_of;        // classification per support rectangle
    std::map<int, double> atom_l2;                  // per occupied level
    std::map<int, double> atom_hp;
    std::map<int, std::int64_t> rn_star_cells;
    double B = 0.0;
    std::map<DyadicRectangle, double> omega;
    std::vector<double> sign_pattern_ratios;        // index = bitmask over sorted support
};

inline OracleRecord brute_force_oracle(const HaarExpansion& f, double p) {
    if (!(p > 0.0) || p > 2.0) throw DomainError("exponent p must lie in (0, 2]");
    if (f.support_size() > 6) {
        throw DomainError("oracle refuses supports larger than 6 coefficients");
    }
    if (f.max_level() > 2) throw DomainError("oracle refuses levels above 2");
    if (f.empty()) throw DegenerateInputError("oracle needs a nonzero expansion");

    std::vector<DyadicRectangle> rects;
    std::vector<double> coeff;
    for (const auto& [r, v] : f.coeffs()) {
        rects.push_back(r);
        coeff.push_back(v);
    }
    const std::size_t k = rects.size();

    OracleRecord rec;
    rec.p = p;
    rec.grid = f.max_level() + 1;
    const int g = rec.grid;
    const std::int64_t side = std::int64_t{1} << g;

    auto cell_in_rect = [g](const DyadicRectangle& r, std::int64_t ix, std::int64_t iy) {
        return (ix >> (g - r.iside.level)) == r.iside.index &&
               (iy >> (g - r.jside.level)) == r.jside.index;
    };

    // Dense square function and the H^p integral from scratch.
    std::vector<double> s2(static_cast<std::size_t>(side * side), 0.0);
    for (std::int64_t ix = 0; ix < side; ++ix) {
        for (std::int64_t iy = 0; iy < side; ++iy) {
            double acc = 0.0;
            for (std::size_t t = 0; t < k; ++t) {
                if (cell_in_rect(rects[t], ix, iy)) acc += coeff[t] * coeff[t];
            }
            s2[static_cast<std::size_t>(ix * side + iy)] = acc;
        }
    }
    auto hp_of_sq = [&](const std::vector<double>& sq) {
        double total = 0.0;
        for (double v : sq) total += std::pow(v, 0.5 * p);
        return std::pow(total / static_cast<double>(side * side), 1.0 / p);
    };
    rec.f_hp = hp_of_sq(s2);
    double l2sq = 0.0;
    for (std::size_t t = 0; t < k; ++t) {
        l2sq += coeff[t] * coeff[t] *
                std::ldexp(1.0, -(rects[t].iside.level + rects[t].jside.level));
    }
    rec.f_h2 = std::sqrt(l2sq);

    // Classification: n(r) = max{ m : #(cells of r with S > 2^m) * 2 > #cells of r }.
    double min_abs = std::abs(coeff[0]);
    double max_s = 0.0;
    for (double c : coeff) min_abs = std::min(min_abs, std::abs(c));
    for (double v : s2) max_s = std::max(max_s, std::sqrt(v));
    const int lo = static_cast<int>(std::floor(std::log2(min_abs))) - 3;
    const int hi = static_cast<int>(std::ceil(std::log2(max_s))) + 2;
    for (std::size_t t = 0; t < k; ++t) {
        const DyadicRectangle& r = rects[t];
        std::int64_t cells_in_r = 0;
        int assigned = lo - 1;
        for (int m = hi; m >= lo; --m) {
            std::int64_t inside = 0;
            cells_in_r = 0;
            const double threshold = std::ldexp(1.0, m);
            for (std::int64_t ix = 0; ix < side; ++ix) {
                for (std::int64_t iy = 0; iy < side; ++iy) {
                    if (!cell_in_rect(r, ix, iy)) continue;
                    ++cells_in_r;
                    if (std::sqrt(s2[static_cast<std::size_t>(ix * side + iy)]) > threshold) {
                        ++inside;
                    }
                }
            }
            if (2 * inside > cells_in_r) {
                assigned = m;
                break;
            }
        }
        if (assigned < lo) throw VerificationError("oracle classification fell out of range");
        rec.level_of[r] = assigned;
    }

    // Per-level norms, pointset sizes, B and the weights.
    std::map<int, std::vector<std::size_t>> by_level;
    for (std::size_t t = 0; t < k; ++t) by_level[rec.level_of[rects[t]]].push_back(t);
    for (const auto& [n, members] : by_level) {
        double al2 = 0.0;
        std::vector<double> sq(static_cast<std::size_t>(side * side), 0.0);
        for (std::size_t t : members) {
            al2 += coeff[t] * coeff[t] *
                   std::ldexp(1.0, -(rects[t].iside.level + rects[t].jside.level));
            for (std::int64_t ix = 0; ix < side; ++ix) {
                for (std::int64_t iy = 0; iy < side; ++iy) {
                    if (cell_in_rect(rects[t], ix, iy)) {
                        sq[static_cast<std::size_t>(ix * side + iy)] += coeff[t] * coeff[t];
                    }
                }
            }
        }
        rec.atom_l2[n] = std::sqrt(al2);
        rec.atom_hp[n] = hp_of_sq(sq);
        std::int64_t covered = 0;
        for (std::int64_t ix = 0; ix < side; ++ix) {
            for (std::int64_t iy = 0; iy < side; ++iy) {
                for (std::size_t t : members) {
                    if (cell_in_rect(rects[t], ix, iy)) {
                        ++covered;
                        break;
                    }
                }
            }
        }
        rec.rn_star_cells[n] = covered;
    }
    double b = 0.0;
    for (const auto& [n, al2] : rec.atom_l2) {
        const double star =
            static_cast<double>(rec.rn_star_cells[n]) / static_cast<double>(side * side);
        b += std::pow(star, 1.0 - 0.5 * p) * std::pow(al2, p);
    }
    rec.B = b;
    for (std::size_t t = 0; t < k; ++t) {
        const int n = rec.level_of[rects[t]];
        const double star =
            static_cast<double>(rec.rn_star_cells[n]) / static_cast<double>(side * side);
        rec.omega[rects[t]] =
            std::pow(star, 1.0 - 0.5 * p) * coeff[t] * coeff[t] *
            std::ldexp(1.0, -(rects[t].iside.level + rects[t].jside.level)) /
            (std::pow(rec.atom_l2[n], 2.0 - p) * b);
    }

    // Domination ratio for every sign pattern over the support.
    const std::size_t patterns = std::size_t{1} << k;
    rec.sign_pattern_ratios.resize(patterns);
    for (std::size_t mask = 0; mask < patterns; ++mask) {
        std::vector<double> sq(static_cast<std::size_t>(side * side), 0.0);
        double weight_sum = 0.0;
        for (std::size_t t = 0; t < k; ++t) {
            const double sign = (mask >> t) & 1 ? -1.0 : 1.0;
            const double c = sign * coeff[t];
            weight_sum += rec.omega[rects[t]];  // phi_t^2 = 1
            for (std::int64_t ix = 0; ix < side; ++ix) {
                for (std::int64_t iy = 0; iy < side; ++iy) {
                    if (cell_in_rect(rects[t], ix, iy)) {
                        sq[static_cast<std::size_t>(ix * side + iy)] += c * c;
                    }
                }
            }
        }
        const double lhs = hp_of_sq(sq);
        const double rhs = std::pow(b, 1.0 / p) * std::sqrt(weight_sum);
        rec.sign_pattern_ratios[mask] = lhs / rhs;
    }
    return rec;
}

}  // namespace biharp
