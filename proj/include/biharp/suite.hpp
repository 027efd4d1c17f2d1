#pragma once

// Per-fixture verification pipeline and report generation.
//
// For every generated fixture the suite runs: atomic classification, the
// decomposition chain checks, the per-level l2 chain, weight construction,
// domination over random multipliers, adversarial ratio search, the summed
// two-summing form, the interpolation upper bound with the decomposition
// witness, the thinned square-function comparison, and (for p in (1,2))
// the factor split with the lattice-norm estimate.  Failed assertions are
// collected per fixture rather than aborting the run; the report carries
// every number needed to reproduce a failure (seed, index, stage).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "biharp/atomic.hpp"
#include "biharp/ensemble.hpp"
#include "biharp/errors.hpp"
#include "biharp/factorize.hpp"
#include "biharp/haar.hpp"
#include "biharp/io.hpp"
#include "biharp/pietsch.hpp"
#include "biharp/rng.hpp"

namespace biharp {

struct SuiteConfig {
    std::vector<double> p_values{0.5, 1.0, 1.5, 2.0};
    EnsembleKind kind = EnsembleKind::Mixed;
    int max_level = 4;
    int grid = 0;  // 0: natural grid (max_level + 1)
    int count = 500;
    std::uint64_t seed = 42;
    double density = 0.2;
    double ratio = 4.0;
    double coefficient_scale = 1.0;
    int random_multipliers = 100;
    std::size_t adversarial_budget = 2000;
    int two_summing_count = 10;
    double theta = 0.5;
    std::size_t x0_budget = 200;
    double fs_epsilon = 0.5;
};

struct FixtureReport {
    int index = 0;
    std::uint64_t seed = 0;
    std::string kind;
    std::size_t support = 0;
    int max_level = 0;
    double hp = 0.0, h2 = 0.0;
    double B = 0.0, ap_sample = 0.0, sum_omega = 0.0;
    double worst_random_ratio = 0.0;
    double adversarial_ratio = 0.0;
    double two_summing_slack = 0.0;
    double cp_sample = 0.0;       // ||g||_2^2 / ||f||_p^p for the witness candidate
    double interp_margin = 0.0;   // interpolation upper-bound margin
    double interp_lower = 0.0;    // implied lower constant of the witness
    double fs_implied = 0.0;      // thinned square-function implied constant
    int atomic_levels = 0;
    // p in (1,2) only:
    std::optional<double> split_defect;
    std::optional<double> split_y_h2;
    std::optional<double> split_implied_c;
    std::optional<double> x0_lower;
    std::optional<double> x0_upper;
};

struct SuiteFailure {
    double p = 0.0;
    int index = 0;
    std::uint64_t seed = 0;
    std::string stage;
    std::string message;
};

struct Aggregate {
    double min = 0.0, median = 0.0, max = 0.0;
};

inline Aggregate aggregate_of(std::vector<double> values) {
    Aggregate a;
    if (values.empty()) return a;
    std::sort(values.begin(), values.end());
    a.min = values.front();
    a.max = values.back();
    a.median = values[values.size() / 2];
    return a;
}

struct SuiteBlock {
    double p = 0.0;
    std::vector<FixtureReport> fixtures;
    Aggregate ap, worst_ratio, cp, interp_lower, fs_implied;
};

struct RunReport {
    std::string schema = "biharp-report-v1";
    SuiteConfig config;
    std::string timestamp;  // excluded from determinism comparisons
    std::vector<SuiteBlock> blocks;
    std::vector<SuiteFailure> failures;

    [[nodiscard]] bool ok() const { return failures.empty(); }
};

namespace detail {

inline MultiplierSequence random_multiplier(const HaarExpansion& f, Xoshiro256pp& rng) {
    MultiplierSequence phi;
    for (const auto& [r, v] : f.coeffs()) phi.set(r, rng.gaussian());
    return phi;
}

}  // namespace detail

/// Run the full pipeline for one fixture; appends any assertion failures to
/// `failures` tagged with the stage that tripped.
inline FixtureReport run_fixture(const HaarExpansion& f, double p, const SuiteConfig& cfg,
                                 int index, std::uint64_t fixture_seed,
                                 const std::string& kind_label,
                                 std::vector<SuiteFailure>& failures) {
    FixtureReport rep;
    rep.index = index;
    rep.seed = fixture_seed;
    rep.kind = kind_label;
    rep.support = f.support_size();
    rep.max_level = f.max_level();

    const int grid = cfg.grid > 0 ? cfg.grid : f.natural_grid();
    auto fail = [&](const char* stage, const std::exception& e) {
        failures.push_back({p, index, fixture_seed, stage, e.what()});
    };

    Xoshiro256pp rng(derive_seed(fixture_seed, 0x5eedULL));
    try {
        const AtomicDecomposition dec = classify(f, p, grid);
        rep.hp = dec.f_hp;
        rep.h2 = h2_norm_coeff(f);
        rep.B = dec.B;
        rep.atomic_levels = static_cast<int>(dec.levels.size());

        try {
            const AtomicChainReport chain = verify_atomic_chain(dec, f);
            rep.ap_sample = chain.ap_sample;
        } catch (const VerificationError& e) {
            fail("atomic-chain", e);
        }
        try {
            verify_l2_atom_bound(dec);
        } catch (const VerificationError& e) {
            fail("l2-atom-bound", e);
        }

        PietschWeights w = pietsch_weights(f, dec);
        rep.sum_omega = w.sum_weights;

        try {
            double worst = 0.0;
            for (int t = 0; t < cfg.random_multipliers; ++t) {
                const MultiplierSequence phi = detail::random_multiplier(f, rng);
                worst = std::max(worst, domination_check(f, p, w, phi).ratio);
            }
            rep.worst_random_ratio = worst;
        } catch (const VerificationError& e) {
            fail("domination-random", e);
        }
        try {
            rep.adversarial_ratio =
                adversarial_search(f, p, w, cfg.adversarial_budget,
                                   derive_seed(fixture_seed, 0xadfULL))
                    .worst_ratio;
        } catch (const VerificationError& e) {
            fail("domination-adversarial", e);
        }
        try {
            std::vector<MultiplierSequence> phis;
            phis.reserve(static_cast<std::size_t>(cfg.two_summing_count));
            for (int t = 0; t < cfg.two_summing_count; ++t) {
                phis.push_back(detail::random_multiplier(f, rng));
            }
            rep.two_summing_slack = two_summing_check(f, p, w, phis).slack;
        } catch (const VerificationError& e) {
            fail("two-summing", e);
        }

        try {
            const WitnessCandidate wc = h2_witness_candidate(f, dec);
            rep.cp_sample = wc.cp_sample;
            const InterpolationParams params = make_interpolation_params(p, cfg.theta);
            const InterpolationCheckReport icr = interpolation_norm_check(f, wc.g, params);
            rep.interp_margin = icr.margin;
            rep.interp_lower = icr.implied_lower;
        } catch (const VerificationError& e) {
            fail("interpolation-upper", e);
        }

        try {
            rep.fs_implied =
                fefferman_stein_check(f, p, atomic_e_family(dec), cfg.fs_epsilon)
                    .implied_constant;
        } catch (const VerificationError& e) {
            fail("thinned-square-function", e);
        }

        if (p > 1.0 && p < 2.0) {
            try {
                const FactorPair pair = pisier_split(f, p, w, cfg.x0_budget,
                                                     derive_seed(fixture_seed, 0xf0ULL));
                rep.split_defect = pair.defect;
                rep.split_y_h2 = pair.y_h2;
                rep.split_implied_c = pair.implied_c;
                rep.x0_lower = pair.x_x0_lower;
                rep.x0_upper = pair.x_x0_upper;
            } catch (const VerificationError& e) {
                fail("factor-split", e);
            }
        }
    } catch (const VerificationError& e) {
        // classification or weight construction tripped; later stages skipped
        fail("pipeline", e);
    }
    return rep;
}

inline RunReport run_suite(const SuiteConfig& cfg) {
    for (double p : cfg.p_values) detail::require_p(p);
    if (cfg.count < 1) throw ConfigError("suite needs count >= 1");

    RunReport report;
    report.config = cfg;

    EnsembleSpec spec;
    spec.kind = cfg.kind;
    spec.max_level = cfg.max_level;
    spec.count = cfg.count;
    spec.seed = cfg.seed;
    spec.density = cfg.density;
    spec.ratio = cfg.ratio;
    spec.coefficient_scale = cfg.coefficient_scale;
    const std::vector<HaarExpansion> fixtures = generate(spec);

    static constexpr EnsembleKind mixed_cycle[3] = {EnsembleKind::SparseRandom,
                                                    EnsembleKind::LacunaryDiagonal,
                                                    EnsembleKind::RectangleComb};
    std::uint64_t block_index = 0;
    for (double p : cfg.p_values) {
        SuiteBlock block;
        block.p = p;
        ++block_index;
        std::vector<double> ap, worst, cp, interp, fs;
        for (int i = 0; i < cfg.count; ++i) {
            // distinct multiplier streams per (p-block, fixture)
            const std::uint64_t fixture_seed =
                derive_seed(cfg.seed, (block_index << 32) | static_cast<std::uint64_t>(i));
            const EnsembleKind kind =
                cfg.kind == EnsembleKind::Mixed ? mixed_cycle[i % 3] : cfg.kind;
            FixtureReport rep = run_fixture(fixtures[static_cast<std::size_t>(i)], p, cfg, i,
                                            fixture_seed, to_string(kind), report.failures);
            ap.push_back(rep.ap_sample);
            worst.push_back(std::max(rep.worst_random_ratio, rep.adversarial_ratio));
            cp.push_back(rep.cp_sample);
            interp.push_back(rep.interp_lower);
            fs.push_back(rep.fs_implied);
            block.fixtures.push_back(std::move(rep));
        }
        block.ap = aggregate_of(ap);
        block.worst_ratio = aggregate_of(worst);
        block.cp = aggregate_of(cp);
        block.interp_lower = aggregate_of(interp);
        block.fs_implied = aggregate_of(fs);
        report.blocks.push_back(std::move(block));
    }
    return report;
}

// ---------------------------------------------------------------------------
// Serialization of reports (JSON / aligned text / CSV).

inline json aggregate_to_json(const Aggregate& a) {
    return json{{"min", a.min}, {"median", a.median}, {"max", a.max}};
}

inline json report_to_json(const RunReport& report) {
    json cfg{{"pValues", report.config.p_values},
             {"kind", to_string(report.config.kind)},
             {"depth", report.config.max_level},
             {"grid", report.config.grid},
             {"count", report.config.count},
             {"seed", report.config.seed},
             {"density", report.config.density},
             {"ratio", report.config.ratio},
             {"scale", report.config.coefficient_scale},
             {"randomMultipliers", report.config.random_multipliers},
             {"adversarialBudget", report.config.adversarial_budget},
             {"twoSummingCount", report.config.two_summing_count},
             {"theta", report.config.theta},
             {"x0Budget", report.config.x0_budget},
             {"fsEpsilon", report.config.fs_epsilon}};
    json blocks = json::array();
    for (const auto& block : report.blocks) {
        json fixtures = json::array();
        for (const auto& f : block.fixtures) {
            json jf{{"index", f.index},
                    {"seed", f.seed},
                    {"kind", f.kind},
                    {"support", f.support},
                    {"maxLevel", f.max_level},
                    {"hp", f.hp},
                    {"h2", f.h2},
                    {"B", f.B},
                    {"apSample", f.ap_sample},
                    {"sumOmega", f.sum_omega},
                    {"worstRandomRatio", f.worst_random_ratio},
                    {"adversarialRatio", f.adversarial_ratio},
                    {"twoSummingSlack", f.two_summing_slack},
                    {"cpSample", f.cp_sample},
                    {"interpUpperMargin", f.interp_margin},
                    {"interpLowerConstant", f.interp_lower},
                    {"fsImplied", f.fs_implied},
                    {"atomicLevels", f.atomic_levels}};
            if (f.split_defect) {
                jf["splitDefect"] = *f.split_defect;
                jf["splitYH2"] = *f.split_y_h2;
                jf["splitImpliedC"] = *f.split_implied_c;
                jf["x0Lower"] = *f.x0_lower;
                jf["x0Upper"] = *f.x0_upper;
            }
            fixtures.push_back(std::move(jf));
        }
        blocks.push_back(json{{"p", block.p},
                              {"fixtures", std::move(fixtures)},
                              {"apSample", aggregate_to_json(block.ap)},
                              {"worstRatio", aggregate_to_json(block.worst_ratio)},
                              {"cpSample", aggregate_to_json(block.cp)},
                              {"interpLower", aggregate_to_json(block.interp_lower)},
                              {"fsImplied", aggregate_to_json(block.fs_implied)}});
    }
    json failures = json::array();
    for (const auto& f : report.failures) {
        failures.push_back(json{{"p", f.p},
                                {"index", f.index},
                                {"seed", f.seed},
                                {"stage", f.stage},
                                {"message", f.message}});
    }
    return json{{"schema", report.schema},
                {"timestamp", report.timestamp},
                {"config", std::move(cfg)},
                {"blocks", std::move(blocks)},
                {"failures", std::move(failures)}};
}

inline std::string report_to_text(const RunReport& report) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(6);
    out << "suite: kind=" << to_string(report.config.kind)
        << " depth=" << report.config.max_level << " count=" << report.config.count
        << " seed=" << report.config.seed << "\n";
    out << "  p       apSample[min/med/max]          worstRatio[max]  cp[med]    fs[max]\n";
    for (const auto& block : report.blocks) {
        out << "  " << block.p << "  " << block.ap.min << " / " << block.ap.median << " / "
            << block.ap.max << "   " << block.worst_ratio.max << "        " << block.cp.median
            << "   " << block.fs_implied.max << "\n";
    }
    if (report.failures.empty()) {
        out << "all asserted inequalities held (" << report.blocks.size() << " p-blocks)\n";
    } else {
        out << report.failures.size() << " FAILURES:\n";
        for (const auto& f : report.failures) {
            out << "  p=" << f.p << " fixture=" << f.index << " seed=" << f.seed << " stage="
                << f.stage << ": " << f.message << "\n";
        }
    }
    return out.str();
}

inline std::string report_to_csv(const RunReport& report) {
    std::ostringstream out;
    out.precision(17);
    out << "p,index,seed,kind,support,hp,h2,B,apSample,sumOmega,worstRandomRatio,"
           "adversarialRatio,twoSummingSlack,cpSample,interpUpperMargin,interpLowerConstant,"
           "fsImplied\n";
    for (const auto& block : report.blocks) {
        for (const auto& f : block.fixtures) {
            out << block.p << ',' << f.index << ',' << f.seed << ',' << f.kind << ','
                << f.support << ',' << f.hp << ',' << f.h2 << ',' << f.B << ',' << f.ap_sample
                << ',' << f.sum_omega << ',' << f.worst_random_ratio << ','
                << f.adversarial_ratio << ',' << f.two_summing_slack << ',' << f.cp_sample
                << ',' << f.interp_margin << ',' << f.interp_lower << ',' << f.fs_implied << '\n';
        }
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Constant tables: empirical chain constant and interpolation lower constant
// per (p, theta) over an ensemble.

struct ConstantsRow {
    double p = 0.0;
    double theta = 0.0;
    double q = 0.0;
    int count = 0;
    Aggregate ap;        // B / ||f||_p^p
    Aggregate cp_l2;     // ||g||_2^2 / ||f||_p^p
    Aggregate cp_lower;  // implied interpolation lower constant
};

inline ConstantsRow constants_row(const std::vector<HaarExpansion>& fixtures, double p,
                                  double theta) {
    ConstantsRow row;
    row.p = p;
    row.theta = theta;
    row.count = static_cast<int>(fixtures.size());
    const InterpolationParams params = make_interpolation_params(p, theta);
    row.q = params.q;
    std::vector<double> ap, cp2, cpl;
    for (const auto& f : fixtures) {
        const AtomicDecomposition dec = classify(f, p);
        ap.push_back(dec.B / std::pow(dec.f_hp, p));
        const WitnessCandidate wc = h2_witness_candidate(f, dec);
        cp2.push_back(wc.cp_sample);
        const InterpolationCheckReport icr = interpolation_norm_check(f, wc.g, params);
        cpl.push_back(icr.implied_lower);
    }
    row.ap = aggregate_of(ap);
    row.cp_l2 = aggregate_of(cp2);
    row.cp_lower = aggregate_of(cpl);
    return row;
}

inline std::string constants_to_csv(const std::vector<ConstantsRow>& rows) {
    std::ostringstream out;
    out.precision(17);
    out << "p,theta,q,count,ap_min,ap_median,ap_max,cpL2_min,cpL2_median,cpL2_max,"
           "cpLower_min,cpLower_median,cpLower_max\n";
    for (const auto& r : rows) {
        out << r.p << ',' << r.theta << ',' << r.q << ',' << r.count << ',' << r.ap.min << ','
            << r.ap.median << ',' << r.ap.max << ',' << r.cp_l2.min << ',' << r.cp_l2.median
            << ',' << r.cp_l2.max << ',' << r.cp_lower.min << ',' << r.cp_lower.median << ','
            << r.cp_lower.max << '\n';
    }
    return out.str();
}

}  // namespace biharp
