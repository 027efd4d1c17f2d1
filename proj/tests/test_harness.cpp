#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "biharp/ensemble.hpp"
#include "biharp/io.hpp"
#include "biharp/oracle.hpp"
#include "biharp/pietsch.hpp"
#include "biharp/suite.hpp"

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

/// Draw a tiny fixture (<= 6 coefficients at levels <= 2) for oracle runs.
HaarExpansion tiny_fixture(std::uint64_t seed) {
    EnsembleSpec spec;
    spec.kind = EnsembleKind::SparseRandom;
    spec.max_level = 2;
    spec.density = 0.08;
    spec.count = 1;
    for (std::uint64_t bump = 0;; ++bump) {
        spec.seed = seed + 1000 * bump;
        const HaarExpansion f = generate(spec).front();
        if (f.support_size() <= 6) return f;
    }
}

}  // namespace

TEST(Ensemble, DeterminismBitForBit) {
    EnsembleSpec spec;
    spec.kind = EnsembleKind::Mixed;
    spec.max_level = 4;
    spec.count = 9;
    spec.seed = 123;
    const auto a = generate(spec);
    const auto b = generate(spec);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_TRUE(a[i] == b[i]);
}

TEST(Ensemble, KindShapes) {
    EnsembleSpec spec;
    spec.seed = 5;
    spec.count = 4;

    spec.kind = EnsembleKind::SingleAtom;
    for (const auto& f : generate(spec)) EXPECT_EQ(f.support_size(), 1u);

    // density 1 at L=1: all (2^2-1)^2 = 9 rectangles populated
    spec.kind = EnsembleKind::SparseRandom;
    spec.max_level = 1;
    spec.density = 1.0;
    for (const auto& f : generate(spec)) EXPECT_EQ(f.support_size(), 9u);

    spec.kind = EnsembleKind::DenseGaussian;
    spec.max_level = 2;
    for (const auto& f : generate(spec)) EXPECT_EQ(f.support_size(), 49u);

    // lacunary: nested diagonal squares, geometric magnitudes 1,4,16,64,256
    spec.kind = EnsembleKind::LacunaryDiagonal;
    spec.max_level = 4;
    spec.ratio = 4.0;
    for (const auto& f : generate(spec)) {
        ASSERT_EQ(f.support_size(), 5u);
        for (int a = 0; a <= 4; ++a) {
            EXPECT_DOUBLE_EQ(std::abs(f.at({a, 0, a, 0})), std::pow(4.0, a));
        }
        // many well-separated coefficient scales force >= 4 distinct levels
        const AtomicDecomposition dec = classify(f, 1.0);
        EXPECT_GE(dec.levels.size(), 4u);
    }

    spec.kind = EnsembleKind::RectangleComb;
    for (const auto& f : generate(spec)) {
        EXPECT_EQ(f.support_size(), 8u);  // 2^(L-1) teeth
        std::set<std::int64_t> indices;
        for (const auto& [r, v] : f.coeffs()) {
            EXPECT_EQ(r.iside.level, 4);
            EXPECT_EQ(r.jside.level, 0);
            EXPECT_DOUBLE_EQ(std::abs(v), 1.0);
            indices.insert(r.iside.index);
        }
        EXPECT_EQ(indices.size(), 8u);  // disjoint teeth
    }

    spec.density = 0.0;
    EXPECT_THROW(generate(spec), ConfigError);
    spec.density = 0.5;
    spec.count = 0;
    EXPECT_THROW(generate(spec), ConfigError);
    spec.count = 1;
    spec.max_level = 9;
    EXPECT_THROW(generate(spec), ConfigError);
}

TEST(Ensemble, EveryFixtureNonzero) {
    for (EnsembleKind kind : {EnsembleKind::SingleAtom, EnsembleKind::SparseRandom,
                              EnsembleKind::DenseGaussian, EnsembleKind::LacunaryDiagonal,
                              EnsembleKind::RectangleComb, EnsembleKind::Mixed}) {
        EnsembleSpec spec;
        spec.kind = kind;
        spec.max_level = 3;
        spec.count = 30;
        spec.seed = 777;
        spec.density = 0.05;
        for (const auto& f : generate(spec)) EXPECT_FALSE(f.empty());
    }
}

TEST(Oracle, TwoCoefficientFixture) {
    const HaarExpansion f = two_coeff_fixture();
    const OracleRecord rec = brute_force_oracle(f, 1.0);
    EXPECT_NEAR(rec.B, 1.75, 1e-12);
    EXPECT_NEAR(rec.omega.at(kUnit), 4.0 / 7.0, 1e-12);
    EXPECT_NEAR(rec.omega.at(kQuarter), 3.0 / 7.0, 1e-12);
    EXPECT_EQ(rec.level_of.at(kUnit), -1);
    EXPECT_EQ(rec.level_of.at(kQuarter), 1);
    EXPECT_NEAR(rec.f_hp, 0.75 + std::sqrt(10.0) / 4.0, 1e-12);
}

TEST(Oracle, TightRatiosForSinglesAndPTwo) {
    HaarExpansion single;
    single.set(kQuarter, 2.0);
    const OracleRecord rec = brute_force_oracle(single, 1.0);
    for (double ratio : rec.sign_pattern_ratios) EXPECT_NEAR(ratio, 1.0, 1e-12);

    const OracleRecord rec2 = brute_force_oracle(two_coeff_fixture(), 2.0);
    for (double ratio : rec2.sign_pattern_ratios) EXPECT_NEAR(ratio, 1.0, 1e-9);
}

TEST(Oracle, RefusesLargeInputs) {
    HaarExpansion big;
    for (int k = 0; k < 7; ++k) big.set({2, k % 4, 1, k / 4}, 1.0);
    ASSERT_EQ(big.support_size(), 7u);
    EXPECT_THROW(brute_force_oracle(big, 1.0), DomainError);
    HaarExpansion deep;
    deep.set({3, 0, 0, 0}, 1.0);
    EXPECT_THROW(brute_force_oracle(deep, 1.0), DomainError);
}

TEST(Oracle, AgreementWithMainPath) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const HaarExpansion f = tiny_fixture(seed);
        for (double p : {0.5, 1.0, 2.0}) {
            const OracleRecord rec = brute_force_oracle(f, p);
            const AtomicDecomposition dec = classify(f, p, rec.grid);
            const PietschWeights w = pietsch_weights(f, dec);

            EXPECT_NEAR(rec.f_hp, dec.f_hp, 1e-9 * std::max(1.0, dec.f_hp));
            EXPECT_NEAR(rec.f_h2, h2_norm_coeff(f), 1e-9);
            EXPECT_NEAR(rec.B, dec.B, 1e-9 * std::max(1.0, dec.B));

            for (const auto& lev : dec.levels) {
                ASSERT_TRUE(rec.atom_l2.contains(lev.n)) << "level " << lev.n;
                EXPECT_NEAR(rec.atom_l2.at(lev.n), lev.atom_l2, 1e-9);
                EXPECT_NEAR(rec.atom_hp.at(lev.n), lev.atom_hp, 1e-9);
                EXPECT_EQ(rec.rn_star_cells.at(lev.n), lev.rn_star_cells());
                for (const auto& r : lev.rects) EXPECT_EQ(rec.level_of.at(r), lev.n);
            }
            for (const auto& [r, omega] : w.weights) {
                EXPECT_NEAR(rec.omega.at(r), omega, 1e-9 * std::max(1.0, omega));
            }

            // every sign pattern, against the main-path domination ratio
            std::vector<DyadicRectangle> support;
            for (const auto& [r, v] : f.coeffs()) support.push_back(r);
            for (std::size_t mask = 0; mask < rec.sign_pattern_ratios.size(); ++mask) {
                MultiplierSequence phi;
                for (std::size_t t = 0; t < support.size(); ++t) {
                    phi.set(support[t], (mask >> t) & 1 ? -1.0 : 1.0);
                }
                const DominationReport rep = domination_check(f, p, w, phi);
                EXPECT_NEAR(rep.ratio, rec.sign_pattern_ratios[mask], 1e-9);
            }
        }
    }
}

TEST(Io, ExpansionRoundTripIsLossless) {
    Xoshiro256pp rng(2024);
    for (int trial = 0; trial < 25; ++trial) {
        HaarExpansion f;
        for (int k = 0; k < 12; ++k) {
            const int a = static_cast<int>(rng.below(5));
            const int b = static_cast<int>(rng.below(5));
            // magnitudes spanning many binades, full mantissas
            const double v = std::ldexp(rng.gaussian(), static_cast<int>(rng.below(41)) - 20);
            f.set({a, static_cast<std::int64_t>(rng.below(1ull << a)), b,
                   static_cast<std::int64_t>(rng.below(1ull << b))},
                  v);
        }
        const json j = expansion_to_json(f);
        const std::string text = j.dump();
        const HaarExpansion back = expansion_from_json(json::parse(text));
        EXPECT_TRUE(back == f);  // bitwise equality of every coefficient
    }
}

TEST(Io, SchemaFieldsAndErrors) {
    const json j = expansion_to_json(two_coeff_fixture());
    EXPECT_EQ(j.at("maxLevel").get<int>(), 1);
    ASSERT_EQ(j.at("coeffs").size(), 2u);
    const json& entry = j.at("coeffs").at(0);
    EXPECT_TRUE(entry.contains("iLevel") && entry.contains("iIndex") &&
                entry.contains("jLevel") && entry.contains("jIndex") &&
                entry.contains("value"));

    EXPECT_THROW(expansion_from_json(json::parse("{}")), IoError);
    EXPECT_THROW(expansion_from_json(json::parse(
                     R"({"maxLevel":0,"coeffs":[{"iLevel":1,"iIndex":5,"jLevel":0,"jIndex":0,"value":1}]})")),
                 IoError);
    // duplicates rejected
    EXPECT_THROW(
        expansion_from_json(json::parse(
            R"({"maxLevel":0,"coeffs":[{"iLevel":0,"iIndex":0,"jLevel":0,"jIndex":0,"value":1},
                 {"iLevel":0,"iIndex":0,"jLevel":0,"jIndex":0,"value":2}]})")),
        IoError);
}

TEST(Io, WeightAndDecompositionExports) {
    const HaarExpansion f = two_coeff_fixture();
    const AtomicDecomposition dec = classify(f, 1.0, 2);
    const json dj = decomposition_to_json(dec);
    EXPECT_NEAR(dj.at("B").get<double>(), 1.75, 1e-12);
    ASSERT_EQ(dj.at("levels").size(), 2u);
    // exact dyadic measure of the level-1 pointset: 4 cells / 2^4
    const json& l1 = dj.at("levels").at(1);
    EXPECT_EQ(l1.at("pointsetMeasure").at("cells").get<std::int64_t>(), 4);
    EXPECT_EQ(l1.at("pointsetMeasure").at("denomLog2").get<int>(), 4);

    const json wj = weights_to_json(pietsch_weights(f, dec));
    EXPECT_EQ(wj.at("normalization").get<std::string>(), "B");
    EXPECT_NEAR(wj.at("sumOmega").get<double>(), 1.0, 1e-12);
    EXPECT_EQ(wj.at("weights").size(), 2u);
}

TEST(Suite, SmallRunPassesAndIsDeterministic) {
    SuiteConfig cfg;
    cfg.p_values = {1.0, 1.5};
    cfg.count = 6;
    cfg.max_level = 3;
    cfg.seed = 31415;
    cfg.random_multipliers = 20;
    cfg.adversarial_budget = 100;
    cfg.two_summing_count = 4;
    cfg.x0_budget = 20;

    RunReport a = run_suite(cfg);
    EXPECT_TRUE(a.ok()) << (a.failures.empty() ? "" : a.failures.front().message);
    RunReport b = run_suite(cfg);
    a.timestamp = b.timestamp = "";  // excluded from the comparison
    EXPECT_EQ(report_to_json(a).dump(), report_to_json(b).dump());

    // fixture records carry the quantities the acceptance gate aggregates
    ASSERT_FALSE(a.blocks.empty());
    for (const auto& block : a.blocks) {
        ASSERT_EQ(block.fixtures.size(), 6u);
        for (const auto& fx : block.fixtures) {
            EXPECT_LE(fx.worst_random_ratio, 1.0 + 1e-9);
            EXPECT_LE(fx.adversarial_ratio, 1.0 + 1e-9);
            EXPECT_NEAR(fx.sum_omega, 1.0, 1e-9);
            if (block.p > 1.0 && block.p < 2.0) {
                ASSERT_TRUE(fx.split_defect.has_value());
                EXPECT_LE(*fx.split_defect, 1e-9);
                EXPECT_NEAR(*fx.split_y_h2, 1.0, 1e-9);
            }
        }
    }
}

// Single-atom fixtures are the exact-equality corner of every inequality:
// ratios 1, interpolation margins 0.
TEST(Suite, SingleAtomRunIsTight) {
    SuiteConfig cfg;
    cfg.p_values = {1.0};
    cfg.kind = EnsembleKind::SingleAtom;
    cfg.count = 10;
    cfg.max_level = 4;
    cfg.seed = 2718;
    cfg.random_multipliers = 10;
    cfg.adversarial_budget = 50;
    cfg.two_summing_count = 2;
    const RunReport report = run_suite(cfg);
    EXPECT_TRUE(report.ok());
    for (const auto& fx : report.blocks.front().fixtures) {
        EXPECT_NEAR(fx.worst_random_ratio, 1.0, 1e-9);
        EXPECT_NEAR(fx.adversarial_ratio, 1.0, 1e-9);
        EXPECT_NEAR(fx.interp_margin, 0.0, 1e-9);
        EXPECT_NEAR(fx.ap_sample, 1.0, 1e-9);
    }
}

TEST(Suite, RejectsOutOfDomainExponentBeforeAnyWork) {
    SuiteConfig cfg;
    cfg.p_values = {3.0};
    cfg.count = 1;
    EXPECT_THROW(run_suite(cfg), DomainError);
}

TEST(Suite, ConstantsTable) {
    EnsembleSpec spec;
    spec.kind = EnsembleKind::Mixed;
    spec.max_level = 3;
    spec.count = 12;
    spec.seed = 99;
    const auto fixtures = generate(spec);
    const ConstantsRow row = constants_row(fixtures, 1.0, 0.5);
    EXPECT_EQ(row.count, 12);
    EXPECT_GT(row.cp_lower.min, 0.0);
    EXPECT_LE(row.cp_lower.max, 1.0 + 1e-9);
    EXPECT_GE(row.ap.min, 1.0 - 1e-9);
    const std::string csv = constants_to_csv({row});
    EXPECT_NE(csv.find("p,theta,q,count"), std::string::npos);
}
