#pragma once

// Atomic decomposition machinery for finite bi-parameter Haar expansions.
//
// For a nonzero expansion f and n in Z, the level sets and rectangle classes
//
//     F_n  = { S(f) > 2^n }
//     R_n  = { r in support(f) : |r cap F_n| > |r|/2,  |r cap F_{n+1}| <= |r|/2 }
//
// partition the support (F_n decreases in n, so each rectangle has a unique
// switch-over level n = max{ m : |r cap F_m| > |r|/2 }).  The atoms
// f_n = f restricted to R_n satisfy the exactly checkable chains
//
//     ||f||_p^p  <=  sum_n ||f_n||_p^p  <=  sum_n |R_n^*|^(1-p/2) ||f_n||_2^p  =: B
//
// (both inequalities constant-free) and, per level,
//
//     ||f_n||_2^2 <= 2 int S^2(f_n) 1_{F_{n+1}^c}
//                 <= 2 * 2^(2(n+1)) |R_n^*|
//                 <= 8 * 2^(2n) |{ M_S(1_{F_n}) > 1/2 }|
//
// where M_S is the dyadic strong maximal operator and R_n^* the pointset of
// R_n.  All set measures are integer cell counts, so every majority test and
// the inclusion R_n^* <= {M_S > 1/2} are tie-exact.

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "biharp/dyadic.hpp"
#include "biharp/errors.hpp"
#include "biharp/haar.hpp"
#include "biharp/numeric.hpp"

namespace biharp {

// Level thresholds 4^n must stay exactly representable.
inline constexpr int kMinAtomicLevel = -500;
inline constexpr int kMaxAtomicLevel = 500;

/// Strict super-level set { S(f) > 2^n }, computed as S^2 > 4^n so the
/// comparison path avoids square roots.
inline CellSet level_set_from_sq(const GridFunction& s2, int n) {
    return s2.super_level_set(pow2d(2 * n));
}
inline CellSet level_set(const HaarExpansion& f, int n, int grid) {
    return level_set_from_sq(square_function_sq(f, grid), n);
}

/// One stored decomposition level: the rectangles of R_n, the atom f_n, the
/// pointset R_n^* and the level set F_n (plus F_{n+1} for the l2 chain).
struct AtomicLevel {
    int n = 0;
    std::vector<DyadicRectangle> rects;
    HaarExpansion atom;
    CellSet rn_star;
    CellSet fn_set;
    CellSet fnext_set;
    double atom_l2 = 0.0;  // ||f_n||_2 via the coefficient sum
    double atom_hp = 0.0;  // ||f_n||_{H^p} on the decomposition grid

    AtomicLevel(int grid) : rn_star(grid), fn_set(grid), fnext_set(grid) {}

    [[nodiscard]] std::int64_t rn_star_cells() const { return rn_star.cell_count(); }
    [[nodiscard]] double rn_star_measure() const { return rn_star.measure(); }
};

struct AtomicDecomposition {
    double p = 1.0;
    int grid = 0;
    std::vector<AtomicLevel> levels;  // ascending in n; empty levels omitted
    double B = 0.0;                   // sum_n |R_n^*|^(1-p/2) ||f_n||_2^p
    double f_hp = 0.0;                // ||f||_{H^p} at the same grid
    GridFunction s_squared{0};        // S(f)^2, kept for reuse
    int scan_lo = 0, scan_hi = 0;     // level window examined
    std::int64_t near_tie_cells = 0;  // diagnostic: cells with S^2 ~ 4^n

    [[nodiscard]] const AtomicLevel* level(int n) const {
        for (const auto& l : levels) {
            if (l.n == n) return &l;
        }
        return nullptr;
    }
};

/// Build the atomic decomposition of f at exponent p on a grid of exponent
/// `grid` (>= max level of f).  Every support rectangle receives the unique
/// level n = max{ m : 2 * |r cap F_m| > |r| }, scanned over a window that
/// provably brackets all switch-overs.
inline AtomicDecomposition classify(const HaarExpansion& f, double p, int grid) {
    detail::require_p(p);
    if (f.empty()) {
        throw DegenerateInputError("zero expansion admits no atomic decomposition");
    }
    if (grid < f.max_level()) {
        throw ResolutionError("grid too small for atomic classification");
    }

    AtomicDecomposition dec;
    dec.p = p;
    dec.grid = grid;
    dec.s_squared = square_function_sq(f, grid);

    // Scan window: below scan_lo every support rectangle is fully inside
    // F_m (S >= min |f_r| > 2^m there); at scan_hi the level set is empty.
    double min_abs = f.max_abs_coeff();
    for (const auto& [r, v] : f.coeffs()) min_abs = std::min(min_abs, std::abs(v));
    const double max_s = std::sqrt(dec.s_squared.max_value());
    const int n_lo = std::ilogb(min_abs) - 2;
    const int n_hi = std::ilogb(max_s) + 2;
    if (n_lo < kMinAtomicLevel || n_hi > kMaxAtomicLevel) {
        throw DomainError("coefficient magnitudes outside the supported level window");
    }
    dec.scan_lo = n_lo;
    dec.scan_hi = n_hi;

    std::vector<CellSet> level_sets;
    level_sets.reserve(static_cast<std::size_t>(n_hi - n_lo + 1));
    for (int m = n_lo; m <= n_hi; ++m) {
        level_sets.push_back(level_set_from_sq(dec.s_squared, m));
        const double threshold = pow2d(2 * m);
        for (double v : dec.s_squared.flat()) {
            if (v != threshold && std::abs(v - threshold) < 1e-12 * threshold) {
                ++dec.near_tie_cells;
            }
        }
    }

    std::map<int, std::vector<DyadicRectangle>> groups;
    for (const auto& [r, v] : f.coeffs()) {
        const std::int64_t cells = rect_measure_cells(r, grid);
        int assigned = n_lo - 1;
        for (int m = n_hi; m >= n_lo; --m) {
            if (2 * intersect_count(r, level_sets[static_cast<std::size_t>(m - n_lo)]) > cells) {
                assigned = m;
                break;
            }
        }
        if (assigned < n_lo) {
            throw VerificationError("support rectangle escaped the classification window");
        }
        groups[assigned].push_back(r);
    }

    KahanSum b_acc;
    const double star_exp = 1.0 - 0.5 * p;
    for (auto& [n, rects] : groups) {
        AtomicLevel lev(grid);
        lev.n = n;
        lev.rects = std::move(rects);
        for (const auto& r : lev.rects) {
            lev.atom.set(r, f.at(r));
            lev.rn_star.set_rectangle(r);
        }
        lev.fn_set = level_sets[static_cast<std::size_t>(n - n_lo)];
        lev.fnext_set = level_sets[static_cast<std::size_t>(n + 1 - n_lo)];
        lev.atom_l2 = h2_norm_coeff(lev.atom);
        lev.atom_hp = hp_norm(lev.atom, p, grid);
        b_acc.add(std::pow(lev.rn_star_measure(), star_exp) * std::pow(lev.atom_l2, p));
        dec.levels.push_back(std::move(lev));
    }
    dec.B = b_acc.value();

    const double half_p = 0.5 * p;
    KahanSum hp_acc;
    for (double v : dec.s_squared.flat()) hp_acc.add(std::pow(v, half_p));
    dec.f_hp = std::pow(hp_acc.value() * pow2d(-2 * grid), 1.0 / p);
    return dec;
}
inline AtomicDecomposition classify(const HaarExpansion& f, double p) {
    return classify(f, p, f.natural_grid());
}

/// Result of checking the decomposition chain
/// ||f||_p^p <= sum_n ||f_n||_p^p <= B; the third comparison carries an
/// existential constant and is only sampled, never asserted.
struct AtomicChainReport {
    double f_hp_p = 0.0;        // ||f||_p^p
    double sum_atom_hp_p = 0.0; // sum_n ||f_n||_p^p
    double B = 0.0;
    double ap_sample = 0.0;     // B / ||f||_p^p
};

/// Assert the two constant-free inequalities of the decomposition chain
/// (relative slack 1e-9) and the exact coefficientwise partition
/// sum_n f_n = f.  Returns the three chain quantities.
inline AtomicChainReport verify_atomic_chain(const AtomicDecomposition& dec,
                                             const HaarExpansion& f) {
    HaarExpansion merged;
    for (const auto& lev : dec.levels) {
        for (const auto& [r, v] : lev.atom.coeffs()) merged.set(r, v);
    }
    if (!(merged == f)) {
        throw VerificationError("atoms do not reassemble the input coefficientwise");
    }

    AtomicChainReport rep;
    rep.f_hp_p = std::pow(dec.f_hp, dec.p);
    KahanSum acc;
    for (const auto& lev : dec.levels) acc.add(std::pow(lev.atom_hp, dec.p));
    rep.sum_atom_hp_p = acc.value();
    rep.B = dec.B;
    rep.ap_sample = rep.B / rep.f_hp_p;

    if (!leq_with_slack(rep.f_hp_p, rep.sum_atom_hp_p)) {
        throw VerificationError("||f||_p^p exceeds the atom sum: " +
                                std::to_string(rep.f_hp_p) + " vs " +
                                std::to_string(rep.sum_atom_hp_p));
    }
    if (!leq_with_slack(rep.sum_atom_hp_p, rep.B)) {
        throw VerificationError("atom sum exceeds the pointset-weighted bound B");
    }
    return rep;
}

namespace detail {

/// Visit per-cell intersection counts of `s` against every dyadic ancestor
/// rectangle shape (x-level a, y-level b).  The callback receives
/// (cell ix, cell iy, count, log2 of the ancestor's cell total).
template <typename Visit>
void for_each_dyadic_ancestor(const CellSet& s, Visit&& visit) {
    const int g = s.grid();
    const std::int64_t side = s.side();
    std::vector<std::int64_t> tx(static_cast<std::size_t>(side * side));
    for (std::int64_t ix = 0; ix < side; ++ix) {
        for (std::int64_t iy = 0; iy < side; ++iy) {
            tx[static_cast<std::size_t>(ix * side + iy)] = s.test(ix, iy) ? 1 : 0;
        }
    }
    // tx holds counts for x-level a over the full-resolution y axis;
    // ty refines to y-level b inside the a-loop.
    for (int a = g; a >= 0; --a) {
        const std::int64_t rows = std::int64_t{1} << a;
        if (a < g) {
            for (std::int64_t x = 0; x < rows; ++x) {
                for (std::int64_t iy = 0; iy < side; ++iy) {
                    tx[static_cast<std::size_t>(x * side + iy)] =
                        tx[static_cast<std::size_t>((2 * x) * side + iy)] +
                        tx[static_cast<std::size_t>((2 * x + 1) * side + iy)];
                }
            }
        }
        std::vector<std::int64_t> ty(tx.begin(), tx.begin() + rows * side);
        for (int b = g; b >= 0; --b) {
            const std::int64_t cols = std::int64_t{1} << b;
            if (b < g) {
                for (std::int64_t x = 0; x < rows; ++x) {
                    for (std::int64_t y = 0; y < cols; ++y) {
                        ty[static_cast<std::size_t>(x * side + y)] =
                            ty[static_cast<std::size_t>(x * side + 2 * y)] +
                            ty[static_cast<std::size_t>(x * side + 2 * y + 1)];
                    }
                }
            }
            const int total_log2 = 2 * g - a - b;
            for (std::int64_t ix = 0; ix < side; ++ix) {
                const std::int64_t x = ix >> (g - a);
                for (std::int64_t iy = 0; iy < side; ++iy) {
                    const std::int64_t y = iy >> (g - b);
                    visit(ix, iy, ty[static_cast<std::size_t>(x * side + y)], total_log2);
                }
            }
        }
    }
}

}  // namespace detail

/// Dyadic strong maximal function of an indicator:
/// M_S(1_s)(cell) = max over dyadic ancestor rectangles R of |R cap s| / |R|.
/// Counts and denominators are dyadic, so each output value is exact.
inline GridFunction strong_maximal(const CellSet& s) {
    GridFunction out(s.grid());
    detail::for_each_dyadic_ancestor(
        s, [&](std::int64_t ix, std::int64_t iy, std::int64_t count, int total_log2) {
            const double frac = std::ldexp(static_cast<double>(count), -total_log2);
            double& v = out(ix, iy);
            v = std::max(v, frac);
        });
    return out;
}

/// Exact strict super-level set { M_S(1_s) > 1/2 } via integer comparison:
/// a cell qualifies iff some dyadic ancestor R has 2 |R cap s| > |R|.
inline CellSet strong_maximal_half_superlevel(const CellSet& s) {
    CellSet out(s.grid());
    detail::for_each_dyadic_ancestor(
        s, [&](std::int64_t ix, std::int64_t iy, std::int64_t count, int total_log2) {
            if (2 * count > (std::int64_t{1} << total_log2)) out.set(ix, iy);
        });
    return out;
}

/// Per-level record of the l2 atom chain with explicit constants 2,
/// 2^(2(n+1)) and 8.
struct L2AtomLevelReport {
    int n = 0;
    double atom_l2_sq = 0.0;        // ||f_n||_2^2
    double tail_integral = 0.0;     // int S^2(f_n) 1_{F_{n+1}^c}
    double star_bound = 0.0;        // 2^(2(n+1)) |R_n^*|
    double maximal_measure = 0.0;   // |{ M_S(1_{F_n}) > 1/2 }|
    bool inclusion_exact = false;   // R_n^* subset of the maximal superlevel
};

/// Assert, per stored level, the chain
///   ||f_n||_2^2 <= 2 * tail_integral <= 2 * 2^(2(n+1)) |R_n^*|
///                <= 8 * 2^(2n) |{M_S(1_{F_n}) > 1/2}|
/// with the set inclusion checked exactly in integers.
inline std::vector<L2AtomLevelReport> verify_l2_atom_bound(const AtomicDecomposition& dec) {
    std::vector<L2AtomLevelReport> reports;
    reports.reserve(dec.levels.size());
    for (const auto& lev : dec.levels) {
        L2AtomLevelReport rep;
        rep.n = lev.n;
        rep.atom_l2_sq = lev.atom_l2 * lev.atom_l2;

        KahanSum tail;
        for (const auto& r : lev.rects) {
            const std::int64_t inside = intersect_count(r, lev.fnext_set);
            const std::int64_t outside = rect_measure_cells(r, dec.grid) - inside;
            const double v = lev.atom.at(r);
            tail.add(v * v * static_cast<double>(outside));
        }
        rep.tail_integral = tail.value() * pow2d(-2 * dec.grid);
        rep.star_bound = pow2d(2 * (lev.n + 1)) * lev.rn_star_measure();

        const CellSet superlevel = strong_maximal_half_superlevel(lev.fn_set);
        rep.inclusion_exact = lev.rn_star.is_subset_of(superlevel);
        rep.maximal_measure = superlevel.measure();

        if (!leq_with_slack(rep.atom_l2_sq, 2.0 * rep.tail_integral)) {
            throw VerificationError("l2 atom bound (a) failed at level " + std::to_string(lev.n));
        }
        if (!leq_with_slack(rep.tail_integral, rep.star_bound)) {
            throw VerificationError("l2 atom bound (b) failed at level " + std::to_string(lev.n));
        }
        if (!rep.inclusion_exact) {
            throw VerificationError("pointset escapes the maximal-function superlevel at level " +
                                    std::to_string(lev.n));
        }
        if (!leq_with_slack(rep.atom_l2_sq,
                            8.0 * pow2d(2 * lev.n) * rep.maximal_measure)) {
            throw VerificationError("l2 atom chain end failed at level " + std::to_string(lev.n));
        }
        reports.push_back(rep);
    }
    return reports;
}

/// Both sides of the square-function comparison with thinned indicator
/// supports E_r inside each rectangle r.
struct FSCheckReport {
    double epsilon = 0.0;
    double lhs = 0.0;              // ||f||_{H^p}
    double rhs = 0.0;              // || (sum f_r^2 1_{E_r})^(1/2) ||_{L^p}
    double implied_constant = 0.0; // lhs / rhs
    bool degenerate = false;       // f == 0
};

/// Fefferman-Stein style check: every E_r must sit inside r and fill more
/// than an epsilon fraction of it (integer-exact).  Thinning the indicators
/// can only shrink the right-hand side, so lhs/rhs >= 1 up to round-off;
/// the size of the implied constant is recorded, never asserted.
inline FSCheckReport fefferman_stein_check(const HaarExpansion& f, double p,
                                           const std::map<DyadicRectangle, CellSet>& e_family,
                                           double epsilon) {
    detail::require_p(p);
    FSCheckReport rep;
    rep.epsilon = epsilon;
    if (f.empty()) {
        rep.degenerate = true;
        rep.implied_constant = 1.0;
        return rep;
    }

    int grid = f.max_level();
    for (const auto& [r, e] : e_family) grid = std::max(grid, e.grid());

    GridFunction thinned_sq(grid);
    for (const auto& [r, v] : f.coeffs()) {
        auto it = e_family.find(r);
        if (it == e_family.end()) {
            throw PreconditionError("support rectangle lacks a thinned subset E");
        }
        const CellSet& e = it->second;
        if (e.grid() != grid) {
            throw ResolutionError("thinned subsets must share one resolution");
        }
        const std::int64_t rect_cells = rect_measure_cells(r, grid);
        const std::int64_t inside = intersect_count(r, e);
        if (inside != e.cell_count()) {
            throw PreconditionError("thinned subset leaks outside its rectangle");
        }
        // count / 2^k is exact in double, so the fraction test is tie-safe.
        if (!(static_cast<double>(inside) / static_cast<double>(rect_cells) > epsilon)) {
            throw PreconditionError("thinned subset fraction not above epsilon");
        }
        const double v2 = v * v;
        const std::int64_t sside = std::int64_t{1} << grid;
        for (std::int64_t ix = 0; ix < sside; ++ix) {
            for (std::int64_t iy = 0; iy < sside; ++iy) {
                if (e.test(ix, iy)) thinned_sq(ix, iy) += v2;
            }
        }
    }

    const double half_p = 0.5 * p;
    KahanSum acc;
    for (double v : thinned_sq.flat()) acc.add(std::pow(v, half_p));
    rep.rhs = std::pow(acc.value() * pow2d(-2 * grid), 1.0 / p);
    rep.lhs = hp_norm(f, p, grid);
    if (!(rep.rhs > 0.0)) {
        throw VerificationError("thinned square function vanished for a nonzero input");
    }
    rep.implied_constant = rep.lhs / rep.rhs;
    if (rep.implied_constant < 1.0 - kRelTolAccumulated) {
        throw VerificationError("thinned norm exceeded the full norm");
    }
    return rep;
}

/// The thinned family used throughout: E_r = r cap F_n for r in R_n.  Each
/// fraction exceeds 1/2 by the classification rule.
inline std::map<DyadicRectangle, CellSet> atomic_e_family(const AtomicDecomposition& dec) {
    std::map<DyadicRectangle, CellSet> family;
    for (const auto& lev : dec.levels) {
        for (const auto& r : lev.rects) {
            CellSet e = embed(r, dec.grid);
            e &= lev.fn_set;
            family.emplace(r, std::move(e));
        }
    }
    return family;
}

}  // namespace biharp
