#pragma once

// Finite anisotropic 2D Haar expansions.
//
// An expansion f = sum_r f_r h_r over dyadic rectangles r = I x J, with
// h_{IxJ}(s,t) = h_I(s) h_J(t) and h_I the L^inf-normalised Haar function
// (+1 on the left half of I, -1 on the right half).  The square function
//
//     S(f) = ( sum_r f_r^2 1_r )^(1/2)
//
// is exactly piecewise constant on grid cells once the grid exponent reaches
// the maximal level, so H^p quasi-norms
//
//     ||f||_{H^p} = ( integral S(f)^p dm )^(1/p),   0 < p <= 2,
//
// reduce to exact finite sums (up to floating round-off).  Coefficients are
// stored sparsely in a deterministic (ordered) map; dense grids materialise
// only inside norm computations.

#include <cmath>
#include <map>
#include <utility>

#include "biharp/dyadic.hpp"
#include "biharp/errors.hpp"
#include "biharp/numeric.hpp"

namespace biharp {

/// Sparse Haar coefficient vector; absent rectangles carry coefficient 0.
class HaarExpansion {
public:
    using CoeffMap = std::map<DyadicRectangle, double>;

    HaarExpansion() = default;

    /// Set f_r = v; v == 0 erases the entry so support stays exact.
    void set(const DyadicRectangle& r, double v) {
        if (v == 0.0) {
            coeffs_.erase(r);
        } else {
            coeffs_[r] = v;
        }
    }

    [[nodiscard]] double at(const DyadicRectangle& r) const {
        auto it = coeffs_.find(r);
        return it == coeffs_.end() ? 0.0 : it->second;
    }

    [[nodiscard]] const CoeffMap& coeffs() const { return coeffs_; }
    [[nodiscard]] bool empty() const { return coeffs_.empty(); }
    [[nodiscard]] std::size_t support_size() const { return coeffs_.size(); }

    /// Largest per-side level appearing in the support (0 for the zero
    /// expansion).
    [[nodiscard]] int max_level() const {
        int m = 0;
        for (const auto& [r, v] : coeffs_) m = std::max(m, r.max_level());
        return m;
    }

    /// Grid exponent used by default for dense computations: every Haar
    /// function and square function in play is constant on its cells.
    [[nodiscard]] int natural_grid() const { return max_level() + 1; }

    [[nodiscard]] double max_abs_coeff() const {
        double m = 0.0;
        for (const auto& [r, v] : coeffs_) m = std::max(m, std::abs(v));
        return m;
    }

    [[nodiscard]] HaarExpansion scaled(double c) const {
        HaarExpansion out;
        if (c == 0.0) return out;
        for (const auto& [r, v] : coeffs_) out.coeffs_[r] = c * v;
        return out;
    }

    /// Coefficientwise modulus |f|.
    [[nodiscard]] HaarExpansion modulus() const {
        HaarExpansion out;
        for (const auto& [r, v] : coeffs_) out.coeffs_[r] = std::abs(v);
        return out;
    }

    friend bool operator==(const HaarExpansion& a, const HaarExpansion& b) {
        return a.coeffs_ == b.coeffs_;
    }

private:
    CoeffMap coeffs_;
};

/// Bounded multiplier sequence phi indexed by dyadic rectangles; entries not
/// stored are treated as 0.
class MultiplierSequence {
public:
    using EntryMap = std::map<DyadicRectangle, double>;

    MultiplierSequence() = default;

    void set(const DyadicRectangle& r, double v) { entries_[r] = v; }
    [[nodiscard]] double at(const DyadicRectangle& r) const {
        auto it = entries_.find(r);
        return it == entries_.end() ? 0.0 : it->second;
    }
    [[nodiscard]] const EntryMap& entries() const { return entries_; }

    [[nodiscard]] double sup_norm() const {
        double m = 0.0;
        for (const auto& [r, v] : entries_) m = std::max(m, std::abs(v));
        return m;
    }

    /// phi == 1 on a given support.
    static MultiplierSequence ones(const HaarExpansion& f) {
        MultiplierSequence phi;
        for (const auto& [r, v] : f.coeffs()) phi.set(r, 1.0);
        return phi;
    }

private:
    EntryMap entries_;
};

/// Pointwise evaluation sum_r f_r h_I(s) h_J(t), exact on cells of side
/// 2^-grid.  Requires grid >= max_level + 1 so each Haar sign pattern is
/// constant per cell.
inline GridFunction evaluate(const HaarExpansion& f, int grid) {
    if (grid < f.max_level() + 1) {
        throw ResolutionError("grid too small to resolve Haar sign patterns");
    }
    GridFunction out(grid);
    for (const auto& [r, v] : f.coeffs()) {
        const CellRange c = cell_range(r, grid);
        const std::int64_t hx = (c.x1 - c.x0) / 2;
        const std::int64_t hy = (c.y1 - c.y0) / 2;
        for (std::int64_t ix = c.x0; ix < c.x1; ++ix) {
            const double sx = (ix - c.x0) < hx ? 1.0 : -1.0;
            for (std::int64_t iy = c.y0; iy < c.y1; ++iy) {
                const double sy = (iy - c.y0) < hy ? 1.0 : -1.0;
                out(ix, iy) += v * sx * sy;
            }
        }
    }
    return out;
}

/// S(f)^2 = sum_r f_r^2 1_r on the grid; exact piecewise-constant data for
/// grid >= max_level.
inline GridFunction square_function_sq(const HaarExpansion& f, int grid) {
    if (grid < f.max_level()) {
        throw ResolutionError("grid too small to resolve indicator supports");
    }
    GridFunction out(grid);
    for (const auto& [r, v] : f.coeffs()) {
        const CellRange c = cell_range(r, grid);
        const double v2 = v * v;
        for (std::int64_t ix = c.x0; ix < c.x1; ++ix) {
            for (std::int64_t iy = c.y0; iy < c.y1; ++iy) out(ix, iy) += v2;
        }
    }
    return out;
}

/// Square function S(f) on the grid.
inline GridFunction square_function(const HaarExpansion& f, int grid) {
    GridFunction out = square_function_sq(f, grid);
    for (double& v : out.flat()) v = std::sqrt(v);
    return out;
}
inline GridFunction square_function(const HaarExpansion& f) {
    return square_function(f, f.natural_grid());
}

namespace detail {
inline void require_p(double p) {
    if (!(p > 0.0) || p > 2.0) {
        throw DomainError("exponent p must lie in (0, 2]");
    }
}
}  // namespace detail

/// ||f||_{H^p} = (4^-G sum_cells (S^2)^(p/2))^(1/p) at an explicit grid.
inline double hp_norm(const HaarExpansion& f, double p, int grid) {
    detail::require_p(p);
    if (f.empty()) return 0.0;
    const GridFunction s2 = square_function_sq(f, grid);
    const double half_p = 0.5 * p;
    KahanSum acc;
    for (double v : s2.flat()) acc.add(std::pow(v, half_p));
    return std::pow(acc.value() * pow2d(-2 * grid), 1.0 / p);
}
inline double hp_norm(const HaarExpansion& f, double p) {
    return hp_norm(f, p, f.natural_grid());
}

/// ||f||_2 from the coefficient side: (sum f_r^2 |I||J|)^(1/2).  Agrees with
/// hp_norm(f, 2) to ~1e-10 relative (Parseval cross-check).
inline double h2_norm_coeff(const HaarExpansion& f) {
    KahanSum acc;
    for (const auto& [r, v] : f.coeffs()) {
        acc.add(v * v * pow2d(-(r.iside.level + r.jside.level)));
    }
    return std::sqrt(acc.value());
}

/// Haar multiplier action: (phi, f) -> sum phi_r f_r h_r.  Exact zeros drop
/// out of the support.
inline HaarExpansion multiplier_apply(const HaarExpansion& f, const MultiplierSequence& phi) {
    HaarExpansion out;
    for (const auto& [r, v] : f.coeffs()) out.set(r, phi.at(r) * v);
    return out;
}

/// Coefficientwise lattice product |x|^(1-theta) |y|^theta.  When either
/// coefficient vanishes the product is 0, matching the sparse-support
/// convention for lattice moduli.
inline HaarExpansion lattice_interpolant(const HaarExpansion& x, const HaarExpansion& y,
                                         double theta) {
    if (!(theta > 0.0 && theta < 1.0)) {
        throw DomainError("interpolation parameter theta must lie in (0, 1)");
    }
    HaarExpansion out;
    const auto& ym = y.coeffs();
    for (const auto& [r, xv] : x.coeffs()) {
        auto it = ym.find(r);
        if (it == ym.end() || it->second == 0.0) continue;
        out.set(r, std::pow(std::abs(xv), 1.0 - theta) * std::pow(std::abs(it->second), theta));
    }
    return out;
}

}  // namespace biharp
