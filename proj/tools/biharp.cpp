// biharp: command-line front end for the bi-parameter Haar multiplier
// toolkit.  Subcommands mirror the library surfaces; every run with a fixed
// seed is reproducible bit for bit.
//
// Exit codes: 0 success, 1 assertion failure, 2 config/domain error,
// 3 I/O error.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "biharp/atomic.hpp"
#include "biharp/ensemble.hpp"
#include "biharp/errors.hpp"
#include "biharp/factorize.hpp"
#include "biharp/haar.hpp"
#include "biharp/io.hpp"
#include "biharp/oracle.hpp"
#include "biharp/pietsch.hpp"
#include "biharp/suite.hpp"

namespace {

using biharp::json;

void emit(const std::string& text, const std::string& output_path) {
    if (output_path.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
    } else {
        biharp::write_text_file(output_path, text);
    }
}

std::vector<biharp::HaarExpansion> load_expansions(const std::string& path) {
    if (path.empty()) throw biharp::ConfigError("--input is required");
    return biharp::expansions_from_json(biharp::load_json_file(path));
}

std::string timestamp_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

struct CommonFlags {
    std::string input;
    std::string output;
    std::string format = "text";
    double p = 1.0;
    int grid = 0;
    std::uint64_t seed = 42;
    int trials = 100;
};

int cmd_gen(const biharp::EnsembleSpec& spec, const std::string& output) {
    const auto fs = biharp::generate(spec);
    json out;
    if (fs.size() == 1) {
        out = biharp::expansion_to_json(fs.front());
    } else {
        out = json::array();
        for (const auto& f : fs) out.push_back(biharp::expansion_to_json(f));
    }
    emit(out.dump(2), output);
    return 0;
}

int cmd_norms(const CommonFlags& flags) {
    const auto fs = load_expansions(flags.input);
    json rows = json::array();
    for (std::size_t i = 0; i < fs.size(); ++i) {
        const auto& f = fs[i];
        const int grid = flags.grid > 0 ? flags.grid : f.natural_grid();
        rows.push_back(json{{"index", i},
                            {"support", f.support_size()},
                            {"maxLevel", f.max_level()},
                            {"hpNorm", biharp::hp_norm(f, flags.p, grid)},
                            {"h2Coeff", biharp::h2_norm_coeff(f)}});
    }
    if (flags.format == "json") {
        emit(rows.dump(2), flags.output);
    } else if (flags.format == "csv") {
        std::ostringstream out;
        out.precision(17);
        out << "index,support,maxLevel,hpNorm,h2Coeff\n";
        for (const auto& r : rows) {
            out << r["index"] << ',' << r["support"] << ',' << r["maxLevel"] << ','
                << r["hpNorm"].get<double>() << ',' << r["h2Coeff"].get<double>() << '\n';
        }
        emit(out.str(), flags.output);
    } else {
        std::ostringstream out;
        out.precision(12);
        for (const auto& r : rows) {
            out << "f[" << r["index"] << "]: support=" << r["support"]
                << " ||f||_{H^" << flags.p << "}=" << r["hpNorm"].get<double>()
                << " ||f||_2=" << r["h2Coeff"].get<double>() << "\n";
        }
        emit(out.str(), flags.output);
    }
    return 0;
}

int cmd_decompose(const CommonFlags& flags) {
    const auto fs = load_expansions(flags.input);
    json out = json::array();
    for (const auto& f : fs) {
        const int grid = flags.grid > 0 ? flags.grid : f.natural_grid();
        out.push_back(biharp::decomposition_to_json(biharp::classify(f, flags.p, grid)));
    }
    emit(fs.size() == 1 ? out.front().dump(2) : out.dump(2), flags.output);
    return 0;
}

int cmd_weights(const CommonFlags& flags, const std::string& mode, double ap_value) {
    const auto fs = load_expansions(flags.input);
    const biharp::WeightMode wm =
        mode == "ap" ? biharp::WeightMode::ApNormalized : biharp::WeightMode::BNormalized;
    json out = json::array();
    for (const auto& f : fs) {
        const int grid = flags.grid > 0 ? flags.grid : f.natural_grid();
        const auto dec = biharp::classify(f, flags.p, grid);
        out.push_back(biharp::weights_to_json(biharp::pietsch_weights(f, dec, wm, ap_value)));
    }
    emit(fs.size() == 1 ? out.front().dump(2) : out.dump(2), flags.output);
    return 0;
}

int cmd_verify_domination(const CommonFlags& flags, std::size_t adversarial) {
    const auto fs = load_expansions(flags.input);
    bool all_ok = true;
    std::ostringstream out;
    out.precision(12);
    for (std::size_t i = 0; i < fs.size(); ++i) {
        const auto& f = fs[i];
        const int grid = flags.grid > 0 ? flags.grid : f.natural_grid();
        const auto dec = biharp::classify(f, flags.p, grid);
        const auto w = biharp::pietsch_weights(f, dec);
        biharp::Xoshiro256pp rng(flags.seed);
        double worst = 0.0;
        try {
            for (int t = 0; t < flags.trials; ++t) {
                biharp::MultiplierSequence phi;
                for (const auto& [r, v] : f.coeffs()) phi.set(r, rng.gaussian());
                worst = std::max(worst, biharp::domination_check(f, flags.p, w, phi).ratio);
            }
            if (adversarial > 0) {
                worst = std::max(worst, biharp::adversarial_search(f, flags.p, w, adversarial,
                                                                   flags.seed)
                                            .worst_ratio);
            }
            out << "f[" << i << "]: worst domination ratio " << worst << " (<= 1), sum omega "
                << w.sum_weights << "\n";
        } catch (const biharp::VerificationError& e) {
            all_ok = false;
            out << "f[" << i << "]: FAILED: " << e.what() << "\n";
        }
    }
    emit(out.str(), flags.output);
    return all_ok ? 0 : 1;
}

int cmd_verify_atomic(const CommonFlags& flags) {
    const auto fs = load_expansions(flags.input);
    bool all_ok = true;
    std::ostringstream out;
    out.precision(12);
    for (std::size_t i = 0; i < fs.size(); ++i) {
        const auto& f = fs[i];
        const int grid = flags.grid > 0 ? flags.grid : f.natural_grid();
        try {
            const auto dec = biharp::classify(f, flags.p, grid);
            const auto chain = biharp::verify_atomic_chain(dec, f);
            const auto levels = biharp::verify_l2_atom_bound(dec);
            out << "f[" << i << "]: ||f||_p^p=" << chain.f_hp_p
                << " sum||f_n||_p^p=" << chain.sum_atom_hp_p << " B=" << chain.B
                << " apSample=" << chain.ap_sample << " levels=" << levels.size() << " OK\n";
        } catch (const biharp::VerificationError& e) {
            all_ok = false;
            out << "f[" << i << "]: FAILED: " << e.what() << "\n";
        }
    }
    emit(out.str(), flags.output);
    return all_ok ? 0 : 1;
}

int cmd_factorize(const CommonFlags& flags, std::size_t budget) {
    const auto fs = load_expansions(flags.input);
    json out = json::array();
    for (const auto& f : fs) {
        const int grid = flags.grid > 0 ? flags.grid : f.natural_grid();
        const auto dec = biharp::classify(f, flags.p, grid);
        const auto w = biharp::pietsch_weights(f, dec);
        out.push_back(
            biharp::factor_pair_to_json(biharp::pisier_split(f, flags.p, w, budget, flags.seed)));
    }
    emit(fs.size() == 1 ? out.front().dump(2) : out.dump(2), flags.output);
    return 0;
}

int cmd_x0(const CommonFlags& flags, double theta, bool theta_given, std::size_t budget) {
    const auto fs = load_expansions(flags.input);
    // theta and targetP are tied by theta = 2 - 2/targetP; accept either.
    double target_p = flags.p;
    double th = theta;
    if (theta_given) {
        target_p = 2.0 / (2.0 - th);
    } else {
        th = 2.0 - 2.0 / target_p;
    }
    json out = json::array();
    for (const auto& f : fs) {
        const auto est = biharp::x0_norm_estimate(f, th, target_p, budget, flags.seed);
        out.push_back(json{{"theta", th},
                           {"targetP", target_p},
                           {"lower", est.lower},
                           {"upper", est.upper},
                           {"lowerRescaled", est.lower_rescaled},
                           {"evaluations", est.evaluations},
                           {"witness", biharp::expansion_to_json(est.best_witness)}});
    }
    emit(fs.size() == 1 ? out.front().dump(2) : out.dump(2), flags.output);
    return 0;
}

int cmd_estimate_constants(const std::vector<double>& ps, const std::vector<double>& thetas,
                           const biharp::EnsembleSpec& spec, const std::string& format,
                           const std::string& output) {
    const auto fixtures = biharp::generate(spec);
    std::vector<biharp::ConstantsRow> rows;
    for (double p : ps) {
        for (double theta : thetas) rows.push_back(biharp::constants_row(fixtures, p, theta));
    }
    if (format == "json") {
        json out = json::array();
        for (const auto& r : rows) {
            out.push_back(json{{"p", r.p},
                               {"theta", r.theta},
                               {"q", r.q},
                               {"count", r.count},
                               {"ap", biharp::aggregate_to_json(r.ap)},
                               {"cpL2", biharp::aggregate_to_json(r.cp_l2)},
                               {"cpLower", biharp::aggregate_to_json(r.cp_lower)}});
        }
        emit(out.dump(2), output);
    } else {
        emit(biharp::constants_to_csv(rows), output);
    }
    return 0;
}

int cmd_suite(const biharp::SuiteConfig& cfg, const std::string& format,
              const std::string& output) {
    biharp::RunReport report = biharp::run_suite(cfg);
    report.timestamp = timestamp_now();
    if (format == "csv") {
        emit(biharp::report_to_csv(report), output);
    } else if (format == "text") {
        emit(biharp::report_to_text(report), output);
    } else {
        emit(biharp::report_to_json(report).dump(2), output);
    }
    if (!report.ok()) {
        std::cerr << report.failures.size() << " assertion failure(s); first: p="
                  << report.failures.front().p << " fixture=" << report.failures.front().index
                  << " stage=" << report.failures.front().stage << "\n";
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bi-parameter Haar multiplier toolkit"};
    app.require_subcommand(1);

    CommonFlags flags;
    biharp::EnsembleSpec spec;
    std::string kind = "sparse";
    std::string ensemble_kind = "mixed";
    std::string format = "text";
    std::string output;
    std::string mode = "b";
    double ap_value = 0.0;
    double theta = 0.5;
    std::size_t adversarial = 2000;
    std::size_t budget = 200;
    std::vector<double> ps;
    std::vector<double> thetas;
    biharp::SuiteConfig suite_cfg;

    auto add_common = [&](CLI::App* cmd, bool with_p = true) {
        cmd->add_option("--input", flags.input, "input HaarExpansion JSON (object or array)");
        cmd->add_option("--output", flags.output, "output file (stdout if omitted)");
        cmd->add_option("--format", flags.format, "json|csv|text");
        if (with_p) cmd->add_option("--p", flags.p, "exponent p in (0,2]");
        cmd->add_option("--grid", flags.grid, "grid exponent G (default maxLevel+1)");
        cmd->add_option("--seed", flags.seed, "PRNG seed");
        cmd->add_option("--trials", flags.trials, "number of random multipliers");
    };

    auto* gen = app.add_subcommand("gen", "generate a seeded random ensemble");
    gen->add_option("--kind", kind, "single|sparse|dense|lacunary|comb|mixed");
    gen->add_option("--depth", spec.max_level, "max Haar level L");
    gen->add_option("--count", spec.count, "number of functions");
    gen->add_option("--seed", spec.seed, "PRNG seed");
    gen->add_option("--density", spec.density, "sparse inclusion probability");
    gen->add_option("--ratio", spec.ratio, "lacunary coefficient ratio");
    gen->add_option("--scale", spec.coefficient_scale, "coefficient scale");
    gen->add_option("--output", output, "output file (stdout if omitted)");

    auto* norms = app.add_subcommand("norms", "H^p and H^2 norms of an expansion");
    add_common(norms);

    auto* decompose = app.add_subcommand("decompose", "atomic decomposition report");
    add_common(decompose);

    auto* weights = app.add_subcommand("weights", "Pietsch weight sequence");
    add_common(weights);
    weights->add_option("--mode", mode, "b|ap normalisation");
    weights->add_option("--ap", ap_value, "A_p constant for ap mode");

    auto* vdom = app.add_subcommand("verify-domination",
                                    "check the domination inequality over random multipliers");
    add_common(vdom);
    vdom->add_option("--adversarial", adversarial, "adversarial search budget (0 disables)");

    auto* vat = app.add_subcommand("verify-atomic", "check the decomposition chains");
    add_common(vat);

    auto* fact = app.add_subcommand("factorize", "factor split through the Pietsch weights");
    add_common(fact);
    fact->add_option("--budget", budget, "lattice-norm search budget");

    auto* x0 = app.add_subcommand("x0", "extrapolation-lattice norm estimate");
    add_common(x0);
    auto* theta_opt = x0->add_option("--theta", theta, "interpolation parameter in (0,1)");
    x0->add_option("--budget", budget, "search budget");

    auto* consts = app.add_subcommand("estimate-constants",
                                      "empirical constant tables over an ensemble");
    consts->add_option("--p", ps, "exponents (repeatable)");
    consts->add_option("--theta", thetas, "interpolation parameters (repeatable)");
    consts->add_option("--kind", ensemble_kind, "ensemble kind");
    consts->add_option("--depth", spec.max_level, "max level");
    consts->add_option("--count", spec.count, "ensemble size");
    consts->add_option("--seed", spec.seed, "PRNG seed");
    consts->add_option("--density", spec.density, "sparse density");
    consts->add_option("--ratio", spec.ratio, "lacunary ratio");
    consts->add_option("--format", format, "csv|json");
    consts->add_option("--output", output, "output file");

    auto* suite = app.add_subcommand("suite", "full verification suite");
    suite->add_option("--p", suite_cfg.p_values, "exponents (repeatable)");
    suite->add_option("--kind", ensemble_kind, "ensemble kind");
    suite->add_option("--depth", suite_cfg.max_level, "max level L");
    suite->add_option("--grid", suite_cfg.grid, "grid exponent G");
    suite->add_option("--count", suite_cfg.count, "fixtures per exponent");
    suite->add_option("--seed", suite_cfg.seed, "master seed");
    suite->add_option("--density", suite_cfg.density, "sparse density");
    suite->add_option("--ratio", suite_cfg.ratio, "lacunary ratio");
    suite->add_option("--trials", suite_cfg.random_multipliers, "random multipliers per fixture");
    suite->add_option("--adversarial", suite_cfg.adversarial_budget, "adversarial budget");
    suite->add_option("--theta", suite_cfg.theta, "interpolation parameter");
    suite->add_option("--x0-budget", suite_cfg.x0_budget, "lattice-norm search budget");
    suite->add_option("--format", format, "json|csv|text");
    suite->add_option("--output", output, "output file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            spec.kind = biharp::ensemble_kind_from_string(kind);
            return cmd_gen(spec, output);
        }
        if (norms->parsed()) return cmd_norms(flags);
        if (decompose->parsed()) return cmd_decompose(flags);
        if (weights->parsed()) {
            if (mode != "b" && mode != "ap") throw biharp::ConfigError("mode must be b or ap");
            return cmd_weights(flags, mode, ap_value);
        }
        if (vdom->parsed()) return cmd_verify_domination(flags, adversarial);
        if (vat->parsed()) return cmd_verify_atomic(flags);
        if (fact->parsed()) return cmd_factorize(flags, budget);
        if (x0->parsed()) return cmd_x0(flags, theta, theta_opt->count() > 0, budget);
        if (consts->parsed()) {
            if (ps.empty()) ps = {0.5, 1.0, 1.5};
            if (thetas.empty()) thetas = {0.25, 0.5, 0.75};
            spec.kind = biharp::ensemble_kind_from_string(ensemble_kind);
            if (format == "text") format = "csv";
            return cmd_estimate_constants(ps, thetas, spec, format, output);
        }
        if (suite->parsed()) {
            suite_cfg.kind = biharp::ensemble_kind_from_string(ensemble_kind);
            if (format == "text" && !output.empty()) format = "json";
            return cmd_suite(suite_cfg, format, output);
        }
    } catch (const biharp::VerificationError& e) {
        std::cerr << "assertion failure: " << e.what() << "\n";
        return 1;
    } catch (const biharp::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const biharp::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
