#include <gtest/gtest.h>

#include <cmath>

#include "biharp/atomic.hpp"
#include "biharp/rng.hpp"

using namespace biharp;

namespace {

const DyadicRectangle kUnit{0, 0, 0, 0};
const DyadicRectangle kQuarter{1, 0, 1, 0};

HaarExpansion two_coeff_fixture() {
    HaarExpansion f;
    f.set(kUnit, 1.0);
    f.set(kQuarter, 3.0);
    return f;
}

HaarExpansion random_expansion(Xoshiro256pp& rng, int max_level, double density) {
    HaarExpansion f;
    for (int a = 0; a <= max_level; ++a) {
        for (std::int64_t k = 0; k < (std::int64_t{1} << a); ++k) {
            for (int b = 0; b <= max_level; ++b) {
                for (std::int64_t l = 0; l < (std::int64_t{1} << b); ++l) {
                    if (rng.uniform01() < density) f.set({a, k, b, l}, rng.gaussian());
                }
            }
        }
    }
    return f;
}

}  // namespace

TEST(LevelSet, SingleHaarFunction) {
    HaarExpansion f;
    f.set(kUnit, 1.0);  // S == 1 everywhere; strict threshold
    EXPECT_EQ(level_set(f, -1, 2).cell_count(), 16);
    EXPECT_EQ(level_set(f, -5, 2).cell_count(), 16);
    EXPECT_EQ(level_set(f, 0, 2).cell_count(), 0);
    EXPECT_EQ(level_set(f, 3, 2).cell_count(), 0);
}

TEST(LevelSet, TwoCoefficientFixture) {
    const HaarExpansion f = two_coeff_fixture();
    // S = sqrt(10) ~ 3.162 on the quarter, 1 elsewhere
    EXPECT_TRUE(level_set(f, 0, 2) == embed(kQuarter, 2));
    EXPECT_TRUE(level_set(f, 1, 2) == embed(kQuarter, 2));
    EXPECT_EQ(level_set(f, 2, 2).cell_count(), 0);
    EXPECT_EQ(level_set(HaarExpansion{}, 0, 1).cell_count(), 0);
}

TEST(Classify, SingleCoefficient) {
    HaarExpansion f;
    f.set(kUnit, 1.0);
    const AtomicDecomposition dec = classify(f, 1.0);
    ASSERT_EQ(dec.levels.size(), 1u);
    EXPECT_EQ(dec.levels[0].n, -1);
    ASSERT_EQ(dec.levels[0].rects.size(), 1u);
    EXPECT_EQ(dec.levels[0].rects[0], kUnit);
    EXPECT_NEAR(dec.B, 1.0, 1e-12);
    EXPECT_THROW(classify(HaarExpansion{}, 1.0, 2), DegenerateInputError);
    EXPECT_THROW(classify(f, 3.0, 2), DomainError);
}

TEST(Classify, TwoCoefficientFixture) {
    const HaarExpansion f = two_coeff_fixture();
    const AtomicDecomposition dec = classify(f, 1.0, 2);
    ASSERT_EQ(dec.levels.size(), 2u);

    const AtomicLevel* lm1 = dec.level(-1);
    ASSERT_NE(lm1, nullptr);
    ASSERT_EQ(lm1->rects.size(), 1u);
    EXPECT_EQ(lm1->rects[0], kUnit);
    EXPECT_EQ(lm1->rn_star_cells(), 16);  // full square at G=2
    EXPECT_NEAR(lm1->atom_l2, 1.0, 1e-15);

    const AtomicLevel* l1 = dec.level(1);
    ASSERT_NE(l1, nullptr);
    ASSERT_EQ(l1->rects.size(), 1u);
    EXPECT_EQ(l1->rects[0], kQuarter);
    EXPECT_EQ(l1->rn_star_cells(), 4);  // quarter at G=2
    EXPECT_NEAR(l1->atom_l2, 1.5, 1e-15);

    // B = 1 * 1 + (1/4)^(1/2) * (3/2) = 1.75
    EXPECT_NEAR(dec.B, 1.75, 1e-12);

    // p = 2: B collapses to ||f||_2^2 = 3.25
    const AtomicDecomposition dec2 = classify(f, 2.0, 2);
    EXPECT_NEAR(dec2.B, 3.25, 1e-12);
}

TEST(Classify, BoundaryConditionsInIntegers) {
    Xoshiro256pp rng(31);
    for (int trial = 0; trial < 15; ++trial) {
        const HaarExpansion f = random_expansion(rng, 3, 0.2);
        if (f.empty()) continue;
        const AtomicDecomposition dec = classify(f, 1.0);
        for (const auto& lev : dec.levels) {
            for (const auto& r : lev.rects) {
                const std::int64_t cells = rect_measure_cells(r, dec.grid);
                EXPECT_GT(2 * intersect_count(r, lev.fn_set), cells);
                EXPECT_LE(2 * intersect_count(r, lev.fnext_set), cells);
            }
        }
    }
}

TEST(Classify, LevelSetNesting) {
    Xoshiro256pp rng(37);
    for (int trial = 0; trial < 10; ++trial) {
        const HaarExpansion f = random_expansion(rng, 3, 0.25);
        if (f.empty()) continue;
        const AtomicDecomposition dec = classify(f, 1.0);
        CellSet prev = level_set_from_sq(dec.s_squared, dec.scan_lo);
        for (int n = dec.scan_lo + 1; n <= dec.scan_hi; ++n) {
            const CellSet next = level_set_from_sq(dec.s_squared, n);
            EXPECT_TRUE(next.is_subset_of(prev));
            prev = next;
        }
    }
}

TEST(VerifyAtomicChain, SingleAtomEqualities) {
    HaarExpansion f;
    f.set(kUnit, 1.0);
    const AtomicDecomposition dec = classify(f, 1.0);
    const AtomicChainReport rep = verify_atomic_chain(dec, f);
    EXPECT_NEAR(rep.f_hp_p, 1.0, 1e-12);
    EXPECT_NEAR(rep.sum_atom_hp_p, 1.0, 1e-12);
    EXPECT_NEAR(rep.B, 1.0, 1e-12);
    EXPECT_NEAR(rep.ap_sample, 1.0, 1e-12);

    // any single scaled Haar function: equalities throughout
    HaarExpansion g;
    g.set({2, 1, 1, 0}, -0.7);
    const AtomicDecomposition dg = classify(g, 0.5);
    const AtomicChainReport rg = verify_atomic_chain(dg, g);
    EXPECT_NEAR(rg.f_hp_p, rg.sum_atom_hp_p, 1e-12);
    EXPECT_NEAR(rg.sum_atom_hp_p, rg.B, 1e-12);
}

TEST(VerifyAtomicChain, TwoCoefficientNumbers) {
    const HaarExpansion f = two_coeff_fixture();
    const AtomicChainReport rep = verify_atomic_chain(classify(f, 1.0, 2), f);
    const double f_h1 = 0.75 + std::sqrt(10.0) / 4.0;
    EXPECT_NEAR(rep.f_hp_p, f_h1, 1e-12);
    EXPECT_NEAR(rep.B, 1.75, 1e-12);
    EXPECT_NEAR(rep.ap_sample, 1.75 / f_h1, 1e-12);
    EXPECT_LE(rep.f_hp_p, rep.sum_atom_hp_p + 1e-12);
    EXPECT_LE(rep.sum_atom_hp_p, rep.B + 1e-12);
}

TEST(VerifyAtomicChain, PartitionIsExact) {
    Xoshiro256pp rng(41);
    for (int trial = 0; trial < 15; ++trial) {
        const HaarExpansion f = random_expansion(rng, 4, 0.1);
        if (f.empty()) continue;
        for (double p : {0.5, 1.0, 1.5, 2.0}) {
            const AtomicDecomposition dec = classify(f, p);
            EXPECT_NO_THROW(verify_atomic_chain(dec, f));
            std::size_t assigned = 0;
            for (const auto& lev : dec.levels) assigned += lev.rects.size();
            EXPECT_EQ(assigned, f.support_size());
        }
    }
}

TEST(StrongMaximal, ClosedForms) {
    // full square and empty set
    const GridFunction m_full = strong_maximal(CellSet::full(2));
    for (double v : m_full.flat()) EXPECT_DOUBLE_EQ(v, 1.0);
    const GridFunction m_empty = strong_maximal(CellSet(2));
    for (double v : m_empty.flat()) EXPECT_DOUBLE_EQ(v, 0.0);

    // s = [0,1/2)^2 at G=1: enumerate all dyadic ancestors
    const CellSet s = embed(kQuarter, 1);
    const GridFunction m = strong_maximal(s);
    EXPECT_DOUBLE_EQ(m(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(m(0, 1), 0.5);
    EXPECT_DOUBLE_EQ(m(1, 0), 0.5);
    EXPECT_DOUBLE_EQ(m(1, 1), 0.25);

    const CellSet half = strong_maximal_half_superlevel(s);
    EXPECT_EQ(half.cell_count(), 1);  // only the quarter cell exceeds 1/2 strictly
    EXPECT_TRUE(half.test(0, 0));
}

TEST(VerifyL2AtomBound, ClosedFormsAndFixture) {
    HaarExpansion f;
    f.set(kUnit, 1.0);
    const auto reports = verify_l2_atom_bound(classify(f, 1.0, 2));
    ASSERT_EQ(reports.size(), 1u);
    EXPECT_EQ(reports[0].n, -1);
    EXPECT_NEAR(reports[0].atom_l2_sq, 1.0, 1e-12);
    // chain end: 8 * 2^(-2) * 1 = 2
    EXPECT_NEAR(8.0 * pow2d(2 * reports[0].n) * reports[0].maximal_measure, 2.0, 1e-12);

    const auto fixture_reports = verify_l2_atom_bound(classify(two_coeff_fixture(), 1.0, 2));
    ASSERT_EQ(fixture_reports.size(), 2u);
    for (const auto& rep : fixture_reports) {
        if (rep.n == 1) {
            EXPECT_NEAR(rep.atom_l2_sq, 2.25, 1e-12);  // (3/2)^2
            // the superlevel set is exactly the quarter, so the chain end is
            // 8 * 2^2 * 1/4 = 8
            EXPECT_DOUBLE_EQ(rep.maximal_measure, 0.25);
            EXPECT_NEAR(8.0 * pow2d(2 * rep.n) * rep.maximal_measure, 8.0, 1e-12);
            EXPECT_LE(rep.atom_l2_sq, 8.0);
        }
        EXPECT_TRUE(rep.inclusion_exact);
    }
}

TEST(VerifyL2AtomBound, RandomEnsembles) {
    Xoshiro256pp rng(43);
    for (int trial = 0; trial < 10; ++trial) {
        const HaarExpansion f = random_expansion(rng, 3, 0.3);
        if (f.empty()) continue;
        for (double p : {0.5, 1.0, 2.0}) {
            EXPECT_NO_THROW(verify_l2_atom_bound(classify(f, p)));
        }
    }
}

TEST(FeffermanStein, FullSetsGiveEquality) {
    const HaarExpansion f = two_coeff_fixture();
    std::map<DyadicRectangle, CellSet> family;
    for (const auto& [r, v] : f.coeffs()) family.emplace(r, embed(r, 2));
    const FSCheckReport rep = fefferman_stein_check(f, 1.0, family, 0.5);
    EXPECT_NEAR(rep.implied_constant, 1.0, 1e-12);
    EXPECT_NEAR(rep.lhs, rep.rhs, 1e-12);
}

TEST(FeffermanStein, AtomicSetsAndErrors) {
    const HaarExpansion f = two_coeff_fixture();
    const AtomicDecomposition dec = classify(f, 1.0, 2);
    const auto family = atomic_e_family(dec);
    const FSCheckReport rep = fefferman_stein_check(f, 1.0, family, 0.5);
    EXPECT_GE(rep.implied_constant, 1.0 - 1e-9);
    EXPECT_GT(rep.rhs, 0.0);

    // fraction <= epsilon trips the precondition
    EXPECT_THROW(fefferman_stein_check(f, 1.0, family, 1.0), PreconditionError);

    // a leaking subset trips containment
    std::map<DyadicRectangle, CellSet> bad;
    bad.emplace(kUnit, embed(kUnit, 2));
    bad.emplace(kQuarter, embed(kUnit, 2));
    EXPECT_THROW(fefferman_stein_check(f, 1.0, bad, 0.5), PreconditionError);

    const FSCheckReport degenerate = fefferman_stein_check(HaarExpansion{}, 1.0, {}, 0.5);
    EXPECT_TRUE(degenerate.degenerate);
}
