#include <gtest/gtest.h>

#include <cmath>

#include "biharp/factorize.hpp"
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

TEST(InterpolationParams, ExponentAlgebra) {
    const InterpolationParams params = make_interpolation_params(1.0, 0.5);
    EXPECT_NEAR(params.q, 4.0 / 3.0, 1e-15);

    Xoshiro256pp rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const double p = 0.3 + 1.6 * rng.uniform01();
        const double theta = 0.02 + 0.96 * rng.uniform01();
        const InterpolationParams pr = make_interpolation_params(p, theta);
        EXPECT_GT(pr.q, p);
        EXPECT_LT(pr.q, 2.0);
        // identity q - p = (q theta / 2)(2 - p) holds to 1e-12
        EXPECT_NEAR(pr.q - p, (pr.q * theta / 2.0) * (2.0 - p), 1e-12 * std::max(1.0, pr.q));
        // round-trip theta <-> q
        EXPECT_NEAR(theta_from_exponents(p, pr.q), theta, 1e-12);
    }
    EXPECT_THROW(make_interpolation_params(1.0, 0.0), DomainError);
    EXPECT_THROW(make_interpolation_params(1.0, 1.0), DomainError);
    EXPECT_THROW(make_interpolation_params(2.5, 0.5), DomainError);
    EXPECT_THROW(theta_from_exponents(2.0, 2.0), DomainError);
}

TEST(WitnessCandidate, ClosedForms) {
    // p = 2: exponent vanishes, g = |f|
    const HaarExpansion f = two_coeff_fixture();
    const WitnessCandidate w2 = h2_witness_candidate(f, classify(f, 2.0));
    EXPECT_TRUE(w2.g == f.modulus());

    // single coefficient at level n = -1, p = 1: factor 2^(1/2)
    HaarExpansion single;
    single.set(kUnit, 1.0);
    const WitnessCandidate w1 = h2_witness_candidate(single, classify(single, 1.0));
    EXPECT_NEAR(w1.g.at(kUnit), std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(w1.g_l2_sq, 2.0, 1e-12);

    // fixture at p = 1: coefficients (sqrt 2, 3/sqrt 2), ||g||_2^2 = 2 + 9/8
    const WitnessCandidate wf = h2_witness_candidate(f, classify(f, 1.0));
    EXPECT_NEAR(wf.g.at(kUnit), std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(wf.g.at(kQuarter), 3.0 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(wf.g_l2_sq, 3.125, 1e-12);
    EXPECT_NEAR(wf.cp_sample, 3.125 / (0.75 + std::sqrt(10.0) / 4.0), 1e-12);
}

TEST(InterpolationNormCheck, EqualityAndDegenerateCases) {
    HaarExpansion f;
    f.set(kUnit, 1.0);
    const InterpolationParams params = make_interpolation_params(1.0, 0.5);
    const InterpolationCheckReport rep = interpolation_norm_check(f, f, params);
    EXPECT_NEAR(rep.interpolant_hq, 1.0, 1e-12);
    EXPECT_NEAR(rep.upper_bound, 1.0, 1e-12);
    EXPECT_NEAR(rep.implied_lower, 1.0, 1e-12);

    const InterpolationCheckReport zero = interpolation_norm_check(f, HaarExpansion{}, params);
    EXPECT_FALSE(zero.lower_evaluated);
    EXPECT_NEAR(zero.margin, 1.0, 1e-12);
}

TEST(InterpolationNormCheck, FixtureWitness) {
    const HaarExpansion f = two_coeff_fixture();
    const AtomicDecomposition dec = classify(f, 1.0);
    const WitnessCandidate wc = h2_witness_candidate(f, dec);
    const InterpolationParams params = make_interpolation_params(1.0, 0.5);  // q = 4/3
    const InterpolationCheckReport rep = interpolation_norm_check(f, wc.g, params);
    EXPECT_GE(rep.margin, -1e-9);
    EXPECT_GT(rep.implied_lower, 0.0);
    EXPECT_LE(rep.implied_lower, 1.0 + 1e-9);
}

TEST(ModifiedHolder, EqualityAndRandomGrids) {
    GridFunction u(2, 2.0), v(2, 3.0);
    // constants give equality
    const ModifiedHolderReport c = modified_holder_check(u, v, 2.0);
    EXPECT_NEAR(c.lhs, c.rhs, 1e-12 * c.rhs);
    // u = v gives equality for any admissible r
    const ModifiedHolderReport e = modified_holder_check(u, u, -1.5);
    EXPECT_NEAR(e.lhs, e.rhs, 1e-12 * e.rhs);

    Xoshiro256pp rng(5);
    for (double r : {2.0, 3.5, -1.0, -0.25}) {
        GridFunction a(2), b(2);
        for (std::int64_t ix = 0; ix < 4; ++ix) {
            for (std::int64_t iy = 0; iy < 4; ++iy) {
                a(ix, iy) = 0.1 + rng.uniform01();
                b(ix, iy) = 0.1 + rng.uniform01();
            }
        }
        const ModifiedHolderReport rep = modified_holder_check(a, b, r);
        EXPECT_GE(rep.lhs, rep.rhs * (1.0 - 1e-9));
    }
}

TEST(ModifiedHolder, DomainAndPreconditionErrors) {
    GridFunction u(1, 1.0), v(1, 1.0);
    EXPECT_THROW(modified_holder_check(u, v, 0.5), DomainError);
    EXPECT_THROW(modified_holder_check(u, v, 1.0), DomainError);
    EXPECT_THROW(modified_holder_check(u, v, 0.0), DomainError);
    GridFunction w(1, 1.0);
    w(0, 0) = 0.0;  // zero cell under the negative exponent of r = 2
    EXPECT_THROW(modified_holder_check(u, w, 2.0), PreconditionError);
    // both factors zero on a cell: contributes 0, no error
    GridFunction z(1, 1.0);
    z(0, 0) = 0.0;
    EXPECT_NO_THROW(modified_holder_check(z, w, 2.0));
}

TEST(PisierSplit, SingleCoefficientAndHomogeneity) {
    HaarExpansion f;
    f.set(kUnit, 1.0);
    const double p = 1.5;
    const PietschWeights w = pietsch_weights(f, classify(f, p));
    const FactorPair pair = pisier_split(f, p, w);
    EXPECT_NEAR(pair.theta, 2.0 - 2.0 / p, 1e-15);
    EXPECT_NEAR(pair.y.at(kUnit), 1.0, 1e-12);
    EXPECT_NEAR(pair.x.at(kUnit), 1.0, 1e-12);
    EXPECT_LE(pair.defect, 1e-12);
    EXPECT_NEAR(pair.y_h2, 1.0, 1e-12);

    // scaling f leaves y untouched and sends x to |c|^(1/(1-theta)) x
    const HaarExpansion cf = f.scaled(-5.0);
    const PietschWeights wc = pietsch_weights(cf, classify(cf, p));
    const FactorPair scaled = pisier_split(cf, p, wc);
    EXPECT_NEAR(scaled.y.at(kUnit), 1.0, 1e-12);
    EXPECT_NEAR(scaled.x.at(kUnit), std::pow(5.0, 1.0 / (1.0 - pair.theta)), 1e-9);
}

TEST(PisierSplit, FixtureDefectAndDomainErrors) {
    const HaarExpansion f = two_coeff_fixture();
    const double p = 1.5;  // theta = 2/3
    const PietschWeights w = pietsch_weights(f, classify(f, p));
    const FactorPair pair = pisier_split(f, p, w);
    EXPECT_LE(pair.defect, 1e-12 * f.max_abs_coeff());
    EXPECT_NEAR(pair.y_h2, 1.0, 1e-9);
    EXPECT_LE(pair.x_x0_lower, pair.x_x0_upper + 1e-9);
    EXPECT_GT(pair.implied_c, 0.0);

    EXPECT_THROW(pisier_split(f, 1.0, w), DomainError);
    EXPECT_THROW(pisier_split(f, 2.0, w), DomainError);

    // endpoint helpers cover p = 1 and p = 2
    const FactorPair h1 = pisier_split_h1_endpoint(f);
    EXPECT_TRUE(h1.x == f.modulus());
    const FactorPair h2 = pisier_split_h2_endpoint(f);
    EXPECT_TRUE(h2.y == f.modulus());
    EXPECT_LE(h2.defect, 1e-15);
}

TEST(X0NormEstimate, ClosedForms) {
    HaarExpansion x;
    x.set(kUnit, 1.0);
    const X0Estimate est = x0_norm_estimate(x, 0.5, 4.0 / 3.0, 0, 0);
    EXPECT_NEAR(est.lower, 1.0, 1e-12);
    EXPECT_NEAR(est.upper, 1.0, 1e-12);

    const X0Estimate zero = x0_norm_estimate(HaarExpansion{}, 0.5, 4.0 / 3.0, 10, 0);
    EXPECT_DOUBLE_EQ(zero.lower, 0.0);
    EXPECT_DOUBLE_EQ(zero.upper, 0.0);

    EXPECT_THROW(x0_norm_estimate(x, 0.5, 1.9, 0, 0), DomainError);  // incompatible pair
}

TEST(X0NormEstimate, FixtureBoundsAndBudgetMonotone) {
    const HaarExpansion x = two_coeff_fixture();
    const double theta = 2.0 / 3.0;
    const double target_p = 1.5;
    const double h1 = 0.75 + std::sqrt(10.0) / 4.0;

    const X0Estimate base = x0_norm_estimate(x, theta, target_p, 0, 7);
    EXPECT_NEAR(base.upper, std::pow(h1, 1.0 / 3.0), 1e-12);
    EXPECT_LE(base.lower, base.upper + 1e-9);
    EXPECT_GT(base.lower, 0.0);

    double prev = 0.0;
    for (std::size_t budget : {std::size_t{0}, std::size_t{50}, std::size_t{200}}) {
        const X0Estimate est = x0_norm_estimate(x, theta, target_p, budget, 7);
        EXPECT_GE(est.lower, prev - 1e-15);  // non-decreasing in budget, same seed
        EXPECT_LE(est.lower, est.upper + 1e-9);
        prev = est.lower;
        // the witness itself certifies the lower bound
        const double l2 = h2_norm_coeff(est.best_witness);
        ASSERT_GT(l2, 0.0);
        const double certified = hp_norm(
            lattice_interpolant(x, est.best_witness.scaled(1.0 / l2), theta), target_p, 2);
        EXPECT_NEAR(certified, est.lower, 1e-9 * std::max(1.0, est.lower));
    }
}
