#pragma once

// Exact dyadic geometry on the unit square.
//
// Every set measure in this library is an integer count of grid cells at a
// fixed resolution G (cells of side 2^-G), so that majority tests such as
// |R cap F| > |R|/2 are integer comparisons and never float ties.  Grid
// cells are indexed (ix, iy) with ix along the first (s) coordinate; the
// linear index is ix * 2^G + iy.

#include <bit>
#include <cmath>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "biharp/errors.hpp"
#include "biharp/numeric.hpp"

namespace biharp {

inline constexpr int kMaxLevel = 20;  // per-side level cap for intervals
inline constexpr int kMaxGrid = 12;   // grid exponent cap (4^12 cells)

/// Half-open dyadic interval [k 2^-n, (k+1) 2^-n) in [0,1).
struct DyadicInterval {
    int level = 0;
    std::int64_t index = 0;

    DyadicInterval() = default;
    DyadicInterval(int n, std::int64_t k) : level(n), index(k) {
        if (n < 0 || n > kMaxLevel) {
            throw DomainError("dyadic interval level out of range: " + std::to_string(n));
        }
        if (k < 0 || k >= (std::int64_t{1} << n)) {
            throw DomainError("dyadic interval index out of range");
        }
    }

    [[nodiscard]] double measure() const { return pow2d(-level); }
    [[nodiscard]] double left() const { return static_cast<double>(index) * pow2d(-level); }

    friend auto operator<=>(const DyadicInterval&, const DyadicInterval&) = default;
};

/// Product I x J of two dyadic intervals; I lives on the s-axis, J on t.
struct DyadicRectangle {
    DyadicInterval iside;
    DyadicInterval jside;

    DyadicRectangle() = default;
    DyadicRectangle(DyadicInterval i, DyadicInterval j) : iside(i), jside(j) {}
    DyadicRectangle(int ni, std::int64_t ki, int nj, std::int64_t kj)
        : iside(ni, ki), jside(nj, kj) {}

    [[nodiscard]] double measure() const { return pow2d(-(iside.level + jside.level)); }
    [[nodiscard]] int max_level() const { return std::max(iside.level, jside.level); }

    friend auto operator<=>(const DyadicRectangle&, const DyadicRectangle&) = default;
};

namespace detail {
inline void require_grid(int grid) {
    if (grid < 0 || grid > kMaxGrid) {
        throw ResolutionError("grid exponent out of range: " + std::to_string(grid));
    }
}
inline void require_embeds(const DyadicRectangle& r, int grid) {
    require_grid(grid);
    if (r.iside.level > grid || r.jside.level > grid) {
        throw ResolutionError("rectangle level exceeds grid resolution");
    }
}
}  // namespace detail

/// Number of grid cells covered by r at resolution `grid`:
/// 2^(2 grid - n_I - n_J).  Exact measure is count * 4^-grid.
inline std::int64_t rect_measure_cells(const DyadicRectangle& r, int grid) {
    detail::require_embeds(r, grid);
    return std::int64_t{1} << (2 * grid - r.iside.level - r.jside.level);
}

/// Cell-index bounds [x0,x1) x [y0,y1) of a rectangle at resolution `grid`.
struct CellRange {
    std::int64_t x0, x1, y0, y1;
};
inline CellRange cell_range(const DyadicRectangle& r, int grid) {
    detail::require_embeds(r, grid);
    const int sx = grid - r.iside.level;
    const int sy = grid - r.jside.level;
    return {r.iside.index << sx, (r.iside.index + 1) << sx,
            r.jside.index << sy, (r.jside.index + 1) << sy};
}

/// Subset of grid cells with exact integer cardinality.  Backed by a packed
/// 64-bit-word bitset over the 2^G x 2^G cell grid.
class CellSet {
public:
    explicit CellSet(int grid) : grid_(grid), side_(std::int64_t{1} << grid) {
        detail::require_grid(grid);
        words_.assign(static_cast<std::size_t>((side_ * side_ + 63) / 64), 0);
    }

    static CellSet full(int grid) {
        CellSet s(grid);
        const std::int64_t total = s.side_ * s.side_;
        for (std::size_t w = 0; w < s.words_.size(); ++w) s.words_[w] = ~std::uint64_t{0};
        const int tail = static_cast<int>(total % 64);
        if (tail != 0) s.words_.back() = (std::uint64_t{1} << tail) - 1;
        s.count_ = total;
        return s;
    }

    [[nodiscard]] int grid() const { return grid_; }
    [[nodiscard]] std::int64_t side() const { return side_; }
    [[nodiscard]] std::int64_t cell_count() const { return count_; }
    [[nodiscard]] bool empty() const { return count_ == 0; }
    [[nodiscard]] double measure() const {
        return static_cast<double>(count_) * pow2d(-2 * grid_);
    }

    [[nodiscard]] bool test(std::int64_t ix, std::int64_t iy) const {
        const std::int64_t b = ix * side_ + iy;
        return (words_[static_cast<std::size_t>(b >> 6)] >> (b & 63)) & 1u;
    }

    void set(std::int64_t ix, std::int64_t iy) {
        const std::int64_t b = ix * side_ + iy;
        std::uint64_t& w = words_[static_cast<std::size_t>(b >> 6)];
        const std::uint64_t m = std::uint64_t{1} << (b & 63);
        if (!(w & m)) {
            w |= m;
            ++count_;
        }
    }

    /// Set every cell of `r`.
    void set_rectangle(const DyadicRectangle& r) {
        const CellRange c = cell_range(r, grid_);
        for (std::int64_t ix = c.x0; ix < c.x1; ++ix) set_row_range(ix, c.y0, c.y1);
    }

    CellSet& operator|=(const CellSet& o) {
        require_same(o);
        for (std::size_t w = 0; w < words_.size(); ++w) words_[w] |= o.words_[w];
        recount();
        return *this;
    }
    CellSet& operator&=(const CellSet& o) {
        require_same(o);
        for (std::size_t w = 0; w < words_.size(); ++w) words_[w] &= o.words_[w];
        recount();
        return *this;
    }
    /// this \ o
    CellSet& subtract(const CellSet& o) {
        require_same(o);
        for (std::size_t w = 0; w < words_.size(); ++w) words_[w] &= ~o.words_[w];
        recount();
        return *this;
    }

    [[nodiscard]] bool is_subset_of(const CellSet& o) const {
        require_same(o);
        for (std::size_t w = 0; w < words_.size(); ++w) {
            if (words_[w] & ~o.words_[w]) return false;
        }
        return true;
    }

    friend bool operator==(const CellSet& a, const CellSet& b) {
        return a.grid_ == b.grid_ && a.words_ == b.words_;
    }

    /// Exact number of member cells inside rectangle-range [x0,x1) x [y0,y1).
    [[nodiscard]] std::int64_t count_in_range(std::int64_t x0, std::int64_t x1,
                                              std::int64_t y0, std::int64_t y1) const {
        std::int64_t total = 0;
        for (std::int64_t ix = x0; ix < x1; ++ix) total += count_row_range(ix, y0, y1);
        return total;
    }

private:
    void require_same(const CellSet& o) const {
        if (grid_ != o.grid_) throw ResolutionError("cell sets live at different resolutions");
    }
    void recount() {
        std::int64_t c = 0;
        for (std::uint64_t w : words_) c += std::popcount(w);
        count_ = c;
    }
    void set_row_range(std::int64_t ix, std::int64_t y0, std::int64_t y1) {
        std::int64_t b0 = ix * side_ + y0;
        std::int64_t b1 = ix * side_ + y1;
        while (b0 < b1) {
            const std::int64_t w = b0 >> 6;
            const int lo = static_cast<int>(b0 & 63);
            const int hi = static_cast<int>(std::min<std::int64_t>(b1 - (w << 6), 64));
            std::uint64_t mask = ~std::uint64_t{0} << lo;
            if (hi < 64) mask &= (std::uint64_t{1} << hi) - 1;
            std::uint64_t& word = words_[static_cast<std::size_t>(w)];
            count_ += std::popcount(mask & ~word);
            word |= mask;
            b0 = (w << 6) + hi;
        }
    }
    [[nodiscard]] std::int64_t count_row_range(std::int64_t ix, std::int64_t y0,
                                               std::int64_t y1) const {
        std::int64_t b0 = ix * side_ + y0;
        const std::int64_t b1 = ix * side_ + y1;
        std::int64_t total = 0;
        while (b0 < b1) {
            const std::int64_t w = b0 >> 6;
            const int lo = static_cast<int>(b0 & 63);
            const int hi = static_cast<int>(std::min<std::int64_t>(b1 - (w << 6), 64));
            std::uint64_t mask = ~std::uint64_t{0} << lo;
            if (hi < 64) mask &= (std::uint64_t{1} << hi) - 1;
            total += std::popcount(words_[static_cast<std::size_t>(w)] & mask);
            b0 = (w << 6) + hi;
        }
        return total;
    }

    int grid_;
    std::int64_t side_;
    std::vector<std::uint64_t> words_;
    std::int64_t count_ = 0;
};

/// Rectangle embedded as a CellSet.
inline CellSet embed(const DyadicRectangle& r, int grid) {
    CellSet s(grid);
    s.set_rectangle(r);
    return s;
}

/// Exact count of cells of `s` inside `r`.  Comparisons against half of
/// rect_measure_cells(r) stay in integers.
inline std::int64_t intersect_count(const DyadicRectangle& r, const CellSet& s) {
    const CellRange c = cell_range(r, s.grid());
    return s.count_in_range(c.x0, c.x1, c.y0, c.y1);
}

/// Pointset covered by the union of a rectangle collection.
inline CellSet union_pointset(std::span<const DyadicRectangle> rects, int grid) {
    CellSet s(grid);
    for (const auto& r : rects) s.set_rectangle(r);
    return s;
}

/// Piecewise-constant real function on the 2^G x 2^G cell grid.  Integrals
/// of such data over the unit square are exact finite sums.
class GridFunction {
public:
    explicit GridFunction(int grid, double fill = 0.0)
        : grid_(grid), side_(std::int64_t{1} << grid) {
        detail::require_grid(grid);
        values_.assign(static_cast<std::size_t>(side_ * side_), fill);
    }

    [[nodiscard]] int grid() const { return grid_; }
    [[nodiscard]] std::int64_t side() const { return side_; }

    [[nodiscard]] double operator()(std::int64_t ix, std::int64_t iy) const {
        return values_[static_cast<std::size_t>(ix * side_ + iy)];
    }
    double& operator()(std::int64_t ix, std::int64_t iy) {
        return values_[static_cast<std::size_t>(ix * side_ + iy)];
    }

    // Ref-qualified: a span into a temporary would dangle.
    [[nodiscard]] std::span<const double> flat() const& { return values_; }
    [[nodiscard]] std::span<double> flat() & { return values_; }
    std::span<const double> flat() const&& = delete;

    /// Integral over the unit square: 4^-G * sum of cell values.
    [[nodiscard]] double integral() const {
        KahanSum acc;
        for (double v : values_) acc.add(v);
        return acc.value() * pow2d(-2 * grid_);
    }

    /// Strict super-level set { value > threshold } at the same resolution.
    [[nodiscard]] CellSet super_level_set(double threshold) const {
        CellSet s(grid_);
        for (std::int64_t ix = 0; ix < side_; ++ix) {
            for (std::int64_t iy = 0; iy < side_; ++iy) {
                if ((*this)(ix, iy) > threshold) s.set(ix, iy);
            }
        }
        return s;
    }

    [[nodiscard]] double max_value() const {
        double m = values_.front();
        for (double v : values_) m = std::max(m, v);
        return m;
    }

private:
    int grid_;
    std::int64_t side_;
    std::vector<double> values_;
};

}  // namespace biharp
