#pragma once

// Seeded random-function ensembles.  (spec, seed) reproduces the identical
// ensemble bit for bit: the generator state is integer-only xoshiro256++
// and every fixture consumes a deterministic number-free-form draw stream.

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "biharp/errors.hpp"
#include "biharp/haar.hpp"
#include "biharp/rng.hpp"

namespace biharp {

enum class EnsembleKind {
    SingleAtom,        // one random rectangle, coefficient = scale
    SparseRandom,      // each rectangle kept with given density, Gaussian coefficient
    DenseGaussian,     // all rectangles up to the depth
    LacunaryDiagonal,  // nested diagonal squares with geometric coefficients
    RectangleComb,     // disjoint thin rectangles at one scale, random signs
    Mixed              // cycles sparse / lacunary / comb per fixture
};

inline EnsembleKind ensemble_kind_from_string(const std::string& s) {
    if (s == "single") return EnsembleKind::SingleAtom;
    if (s == "sparse") return EnsembleKind::SparseRandom;
    if (s == "dense") return EnsembleKind::DenseGaussian;
    if (s == "lacunary") return EnsembleKind::LacunaryDiagonal;
    if (s == "comb") return EnsembleKind::RectangleComb;
    if (s == "mixed") return EnsembleKind::Mixed;
    throw ConfigError("unknown ensemble kind: " + s);
}

inline const char* to_string(EnsembleKind k) {
    switch (k) {
        case EnsembleKind::SingleAtom: return "single";
        case EnsembleKind::SparseRandom: return "sparse";
        case EnsembleKind::DenseGaussian: return "dense";
        case EnsembleKind::LacunaryDiagonal: return "lacunary";
        case EnsembleKind::RectangleComb: return "comb";
        case EnsembleKind::Mixed: return "mixed";
    }
    return "?";
}

struct EnsembleSpec {
    EnsembleKind kind = EnsembleKind::SparseRandom;
    int max_level = 4;
    int count = 1;
    std::uint64_t seed = 0;
    double coefficient_scale = 1.0;
    double density = 0.2;  // SparseRandom
    double ratio = 4.0;    // LacunaryDiagonal coefficient ratio
};

namespace detail {

/// Interval with level <= L from a flat index in [0, 2^(L+1)-1), enumerated
/// breadth-first: level n occupies flat indices [2^n - 1, 2^(n+1) - 1).
inline DyadicInterval interval_from_flat(std::int64_t flat) {
    const int level = std::bit_width(static_cast<std::uint64_t>(flat) + 1) - 1;
    return DyadicInterval(level, flat + 1 - (std::int64_t{1} << level));
}

inline void append_all_rectangles(int max_level, std::vector<DyadicRectangle>& out) {
    for (int a = 0; a <= max_level; ++a) {
        for (std::int64_t k = 0; k < (std::int64_t{1} << a); ++k) {
            for (int b = 0; b <= max_level; ++b) {
                for (std::int64_t l = 0; l < (std::int64_t{1} << b); ++l) {
                    out.emplace_back(a, k, b, l);
                }
            }
        }
    }
}

inline HaarExpansion generate_one(EnsembleKind kind, const EnsembleSpec& spec,
                                  Xoshiro256pp& rng) {
    const int L = spec.max_level;
    HaarExpansion f;
    switch (kind) {
        case EnsembleKind::SingleAtom: {
            const std::int64_t m = (std::int64_t{1} << (L + 1)) - 1;
            const DyadicInterval i = interval_from_flat(static_cast<std::int64_t>(
                rng.below(static_cast<std::uint64_t>(m))));
            const DyadicInterval j = interval_from_flat(static_cast<std::int64_t>(
                rng.below(static_cast<std::uint64_t>(m))));
            f.set({i, j}, spec.coefficient_scale);
            break;
        }
        case EnsembleKind::SparseRandom: {
            std::vector<DyadicRectangle> all;
            append_all_rectangles(L, all);
            while (f.empty()) {
                for (const auto& r : all) {
                    const bool keep = rng.uniform01() < spec.density;
                    const double coeff = rng.gaussian();  // drawn unconditionally: keeps the
                                                          // stream layout independent of keeps
                    if (keep) f.set(r, spec.coefficient_scale * coeff);
                }
            }
            break;
        }
        case EnsembleKind::DenseGaussian: {
            std::vector<DyadicRectangle> all;
            append_all_rectangles(L, all);
            while (f.empty()) {
                for (const auto& r : all) f.set(r, spec.coefficient_scale * rng.gaussian());
            }
            break;
        }
        case EnsembleKind::LacunaryDiagonal: {
            double coeff = spec.coefficient_scale;
            for (int a = 0; a <= L; ++a) {
                f.set({a, 0, a, 0}, coeff * rng.sign());
                coeff *= spec.ratio;
            }
            break;
        }
        case EnsembleKind::RectangleComb: {
            if (L < 1) throw ConfigError("rectangle comb needs depth >= 1");
            const std::int64_t teeth = std::int64_t{1} << (L - 1);
            const std::int64_t phase = static_cast<std::int64_t>(rng.below(2));
            for (std::int64_t k = 0; k < teeth; ++k) {
                f.set({DyadicInterval(L, 2 * k + phase), DyadicInterval(0, 0)},
                      spec.coefficient_scale * rng.sign());
            }
            break;
        }
        case EnsembleKind::Mixed:
            throw ConfigError("mixed resolves per fixture, not per draw");
    }
    return f;
}

}  // namespace detail

/// Generate the ensemble described by `spec`, deterministically in
/// (spec, seed).  Every returned expansion is nonzero.
inline std::vector<HaarExpansion> generate(const EnsembleSpec& spec) {
    if (spec.max_level < 0 || spec.max_level > 8) {
        throw ConfigError("ensemble depth must lie in [0, 8]");
    }
    if (spec.count < 1) throw ConfigError("ensemble count must be >= 1");
    if (!(spec.density > 0.0) || spec.density > 1.0) {
        throw ConfigError("density must lie in (0, 1]");
    }
    if (spec.coefficient_scale == 0.0) throw ConfigError("coefficient scale must be nonzero");
    if (!(spec.ratio > 0.0)) throw ConfigError("lacunary ratio must be positive");

    static constexpr EnsembleKind mixed_cycle[3] = {
        EnsembleKind::SparseRandom, EnsembleKind::LacunaryDiagonal,
        EnsembleKind::RectangleComb};

    std::vector<HaarExpansion> out;
    out.reserve(static_cast<std::size_t>(spec.count));
    for (int i = 0; i < spec.count; ++i) {
        // Per-fixture generator: fixture i is reproducible in isolation.
        Xoshiro256pp rng(derive_seed(spec.seed, static_cast<std::uint64_t>(i)));
        const EnsembleKind kind = spec.kind == EnsembleKind::Mixed
                                      ? mixed_cycle[i % 3]
                                      : spec.kind;
        out.push_back(detail::generate_one(kind, spec, rng));
    }
    return out;
}

}  // namespace biharp
