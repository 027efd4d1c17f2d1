#pragma once

// Explicit Pietsch weights for Haar multiplication operators.
//
// Given f with atomic decomposition (f_n, R_n) at exponent p, the weights
//
//     w_r = |R_n^*|^(1-p/2) f_r^2 |I||J| / ( ||f_n||_2^(2-p) * N ),   r in R_n,
//
// dominate the multiplier action.  Two normalisations N are supported:
//
//   * B-normalised, N = B = sum_n |R_n^*|^(1-p/2) ||f_n||_2^p.  Then
//     sum w = 1 exactly and the fully computable constant B^(1/p) satisfies
//
//         || sum phi_r f_r h_r ||_{H^p}  <=  B^(1/p) ( sum phi_r^2 w_r )^(1/2)
//
//     for every bounded multiplier phi.  This form carries no unknown
//     constant and is asserted.
//
//   * Ap-normalised, N = A_p ||f||_p^p for a caller-supplied A_p.  Then
//     sum w <= 1 whenever A_p >= B / ||f||_p^p; the corresponding domination
//     constant A_p ||f||_p is reported but never asserted.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "biharp/atomic.hpp"
#include "biharp/dyadic.hpp"
#include "biharp/errors.hpp"
#include "biharp/haar.hpp"
#include "biharp/numeric.hpp"
#include "biharp/rng.hpp"

namespace biharp {

enum class WeightMode { BNormalized, ApNormalized };

struct PietschWeights {
    double p = 1.0;
    WeightMode mode = WeightMode::BNormalized;
    std::map<DyadicRectangle, double> weights;
    double B = 0.0;
    double f_hp = 0.0;
    double sum_weights = 0.0;
    double domination_constant = 0.0;  // B^(1/p) in B mode, A_p ||f||_p in Ap mode
    double ap_value = 0.0;             // Ap mode only
    bool low_ap_warning = false;       // Ap below B / ||f||_p^p: sum w > 1
};

/// Construct the weight sequence from a decomposition of f.  In B mode the
/// weights sum to 1 (asserted to 1e-9); in Ap mode the caller's A_p is used
/// verbatim and a warning flag records when it is too small to guarantee
/// sum w <= 1.
inline PietschWeights pietsch_weights(const HaarExpansion& f, const AtomicDecomposition& dec,
                                      WeightMode mode = WeightMode::BNormalized,
                                      double ap_value = 0.0) {
    if (f.empty()) {
        throw DegenerateInputError("zero expansion has no weight sequence");
    }
    PietschWeights w;
    w.p = dec.p;
    w.mode = mode;
    w.B = dec.B;
    w.f_hp = dec.f_hp;

    double normalizer = 0.0;
    if (mode == WeightMode::BNormalized) {
        normalizer = dec.B;
        w.domination_constant = std::pow(dec.B, 1.0 / dec.p);
    } else {
        if (!(ap_value > 0.0)) throw DomainError("Ap normalisation needs a positive constant");
        w.ap_value = ap_value;
        normalizer = ap_value * std::pow(dec.f_hp, dec.p);
        w.domination_constant = ap_value * dec.f_hp;
        w.low_ap_warning = ap_value < dec.B / std::pow(dec.f_hp, dec.p) * (1.0 - kRelTolAccumulated);
    }

    const double star_exp = 1.0 - 0.5 * dec.p;
    KahanSum total;
    for (const auto& lev : dec.levels) {
        const double level_factor = std::pow(lev.rn_star_measure(), star_exp) /
                                    std::pow(lev.atom_l2, 2.0 - dec.p);
        for (const auto& [r, v] : lev.atom.coeffs()) {
            const double omega =
                level_factor * v * v * pow2d(-(r.iside.level + r.jside.level)) / normalizer;
            w.weights.emplace(r, omega);
            total.add(omega);
        }
    }
    w.sum_weights = total.value();
    if (mode == WeightMode::BNormalized && !close_rel(w.sum_weights, 1.0)) {
        throw VerificationError("B-normalised weights do not sum to 1: " +
                                std::to_string(w.sum_weights));
    }
    return w;
}

struct DominationReport {
    double lhs = 0.0;    // || M_f(phi) ||_{H^p}
    double rhs = 0.0;    // constant * (sum phi^2 w)^(1/2)
    double ratio = 0.0;  // lhs / rhs (0 when both vanish)
    bool asserted = false;  // true in B mode, where ratio <= 1 is a theorem
};

/// Weighted l2 size of a multiplier, (sum phi_r^2 w_r)^(1/2).
inline double weighted_multiplier_l2(const PietschWeights& w, const MultiplierSequence& phi) {
    KahanSum acc;
    for (const auto& [r, omega] : w.weights) {
        const double ph = phi.at(r);
        acc.add(ph * ph * omega);
    }
    return std::sqrt(acc.value());
}

/// Evaluate both sides of the domination inequality for one multiplier.
/// With B-normalised weights the ratio <= 1 + 1e-9 is asserted; with
/// Ap-normalised weights the report is estimate-only.
inline DominationReport domination_check(const HaarExpansion& f, double p,
                                         const PietschWeights& w,
                                         const MultiplierSequence& phi) {
    if (f.empty()) throw DegenerateInputError("domination check needs a nonzero symbol");
    DominationReport rep;
    rep.lhs = hp_norm(multiplier_apply(f, phi), p, f.natural_grid());
    rep.rhs = w.domination_constant * weighted_multiplier_l2(w, phi);
    rep.ratio = rep.rhs > 0.0 ? rep.lhs / rep.rhs : 0.0;
    rep.asserted = w.mode == WeightMode::BNormalized;
    if (rep.asserted) {
        if (rep.rhs == 0.0 && rep.lhs > 0.0) {
            throw VerificationError("domination right-hand side vanished under a nonzero action");
        }
        if (rep.ratio > 1.0 + kRelTolAccumulated) {
            throw VerificationError("domination ratio exceeded 1: " + std::to_string(rep.ratio));
        }
    }
    return rep;
}

/// Incremental evaluator for the scale-invariant domination ratio.  Keeps
/// the cellwise square function and the weighted multiplier sum in sync
/// under single-coordinate updates, so one perturbation costs only the
/// cells of the touched rectangle instead of a full grid rebuild.
class DominationEvaluator {
public:
    DominationEvaluator(const HaarExpansion& f, const PietschWeights& w, int grid)
        : grid_(grid), side_(std::int64_t{1} << grid), half_p_(0.5 * w.p), p_(w.p),
          constant_(w.domination_constant), cell_pow_(static_cast<std::size_t>(side_ * side_)),
          cell_s2_(static_cast<std::size_t>(side_ * side_)) {
        for (const auto& [r, v] : f.coeffs()) {
            auto it = w.weights.find(r);
            if (it == w.weights.end()) {
                throw DomainError("weight sequence does not cover the expansion support");
            }
            rects_.push_back(r);
            f2_.push_back(v * v);
            omega_.push_back(it->second);
            ranges_.push_back(cell_range(r, grid));
        }
        phi_.assign(rects_.size(), 1.0);
        rebuild();
    }

    [[nodiscard]] std::size_t dimension() const { return rects_.size(); }
    [[nodiscard]] const std::vector<DyadicRectangle>& rects() const { return rects_; }
    [[nodiscard]] const std::vector<double>& phi() const { return phi_; }

    /// Replace the whole multiplier vector and recompute from scratch.
    double set_phi(const std::vector<double>& phi) {
        phi_ = phi;
        rebuild();
        return ratio();
    }

    /// Set one coordinate; updates only the touched cells.
    double set_coordinate(std::size_t idx, double value) {
        const double old = phi_[idx];
        if (value != old) {
            phi_[idx] = value;
            const double delta_f2 = (value * value - old * old) * f2_[idx];
            weighted_sum_ += (value * value - old * old) * omega_[idx];
            const CellRange& c = ranges_[idx];
            for (std::int64_t ix = c.x0; ix < c.x1; ++ix) {
                for (std::int64_t iy = c.y0; iy < c.y1; ++iy) {
                    const std::size_t cell = static_cast<std::size_t>(ix * side_ + iy);
                    cell_s2_[cell] += delta_f2;
                    const double fresh = std::pow(std::max(cell_s2_[cell], 0.0), half_p_);
                    pow_sum_ += fresh - cell_pow_[cell];
                    cell_pow_[cell] = fresh;
                }
            }
            if (++updates_since_rebuild_ >= 128) rebuild();
        }
        return ratio();
    }

    [[nodiscard]] double ratio() const {
        const double lhs = std::pow(std::max(pow_sum_, 0.0) * pow2d(-2 * grid_), 1.0 / p_);
        const double rhs = constant_ * std::sqrt(std::max(weighted_sum_, 0.0));
        return rhs > 0.0 ? lhs / rhs : 0.0;
    }

    [[nodiscard]] MultiplierSequence multiplier() const {
        MultiplierSequence phi;
        for (std::size_t i = 0; i < rects_.size(); ++i) phi.set(rects_[i], phi_[i]);
        return phi;
    }

private:
    void rebuild() {
        std::fill(cell_s2_.begin(), cell_s2_.end(), 0.0);
        for (std::size_t i = 0; i < rects_.size(); ++i) {
            const double w2 = phi_[i] * phi_[i] * f2_[i];
            const CellRange& c = ranges_[i];
            for (std::int64_t ix = c.x0; ix < c.x1; ++ix) {
                for (std::int64_t iy = c.y0; iy < c.y1; ++iy) {
                    cell_s2_[static_cast<std::size_t>(ix * side_ + iy)] += w2;
                }
            }
        }
        KahanSum pow_acc;
        for (std::size_t cell = 0; cell < cell_s2_.size(); ++cell) {
            cell_pow_[cell] = std::pow(cell_s2_[cell], half_p_);
            pow_acc.add(cell_pow_[cell]);
        }
        pow_sum_ = pow_acc.value();
        KahanSum w_acc;
        for (std::size_t i = 0; i < rects_.size(); ++i) {
            w_acc.add(phi_[i] * phi_[i] * omega_[i]);
        }
        weighted_sum_ = w_acc.value();
        updates_since_rebuild_ = 0;
    }

    int grid_;
    std::int64_t side_;
    double half_p_, p_, constant_;
    std::vector<DyadicRectangle> rects_;
    std::vector<double> f2_, omega_, phi_;
    std::vector<CellRange> ranges_;
    std::vector<double> cell_pow_, cell_s2_;
    double pow_sum_ = 0.0, weighted_sum_ = 0.0;
    int updates_since_rebuild_ = 0;
};

struct AdversarialResult {
    MultiplierSequence worst_phi;
    double worst_ratio = 0.0;
    std::size_t evaluations = 0;
};

/// Counterexample search for the universal quantifier over multipliers:
/// random Gaussian draws, random sign patterns, then greedy multiplicative
/// coordinate ascent on the best candidate (the ratio is scale-invariant,
/// so perturbations are multiplicative).  The final champion is re-scored
/// through the plain domination_check path, which asserts ratio <= 1 + 1e-9.
inline AdversarialResult adversarial_search(const HaarExpansion& f, double p,
                                            const PietschWeights& w, std::size_t iterations,
                                            std::uint64_t seed) {
    if (w.mode != WeightMode::BNormalized) {
        throw DomainError("adversarial search requires B-normalised weights");
    }
    DominationEvaluator eval(f, w, f.natural_grid());
    const std::size_t dim = eval.dimension();
    Xoshiro256pp rng(seed);

    std::vector<double> best(dim, 1.0);
    double best_ratio = eval.set_phi(best);
    std::size_t used = 1;

    auto consider = [&](const std::vector<double>& cand, double ratio) {
        if (ratio > best_ratio) {
            best_ratio = ratio;
            best = cand;
        }
    };

    // Phase 1: random sign patterns (5% of budget).
    std::vector<double> cand(dim);
    for (std::size_t k = 0; used < iterations && k < std::max<std::size_t>(iterations / 20, 1);
         ++k, ++used) {
        for (double& c : cand) c = rng.sign();
        consider(cand, eval.set_phi(cand));
    }
    // Phase 2: random Gaussian multipliers (25% of budget).
    for (std::size_t k = 0; used < iterations && k < iterations / 4; ++k, ++used) {
        for (double& c : cand) c = rng.gaussian();
        consider(cand, eval.set_phi(cand));
    }
    // Phase 3: multiplicative coordinate ascent with restarts.
    double step = 0.5;
    cand = best;
    eval.set_phi(cand);
    double current = best_ratio;
    std::size_t since_improvement = 0;
    while (used < iterations && dim > 0) {
        const std::size_t idx = static_cast<std::size_t>(rng.below(dim));
        const double factor = (rng.next() & 1) ? 1.0 + step : 1.0 / (1.0 + step);
        const double old = cand[idx];
        double trial = old * factor;
        if (trial == 0.0 || !std::isfinite(trial)) trial = rng.gaussian();
        const double ratio = eval.set_coordinate(idx, trial);
        ++used;
        if (ratio > current) {
            current = ratio;
            cand[idx] = trial;
            consider(cand, ratio);
            since_improvement = 0;
        } else {
            eval.set_coordinate(idx, old);
            if (++since_improvement > 4 * dim) {
                step *= 0.5;
                since_improvement = 0;
                if (step < 1e-4) {
                    // Restart from a fresh Gaussian draw.
                    step = 0.5;
                    for (double& c : cand) c = rng.gaussian();
                    current = eval.set_phi(cand);
                    ++used;
                    consider(cand, current);
                }
            }
        }
    }

    AdversarialResult out;
    MultiplierSequence champion;
    for (std::size_t i = 0; i < dim; ++i) champion.set(eval.rects()[i], best[i]);
    out.worst_phi = champion;
    out.worst_ratio = domination_check(f, p, w, champion).ratio;  // clean-path re-score + assert
    out.evaluations = used;
    return out;
}

struct TwoSummingReport {
    double lhs = 0.0;  // ( sum_i ||M_f(phi_i)||^2 )^(1/2)
    double rhs = 0.0;  // B^(1/p) * sup_r ( sum_i phi_{i,r}^2 )^(1/2)
    double slack = 0.0;
    bool vacuous = false;
};

/// Summed form of the domination bound over a finite family of multipliers.
inline TwoSummingReport two_summing_check(const HaarExpansion& f, double p,
                                          const PietschWeights& w,
                                          const std::vector<MultiplierSequence>& phis) {
    if (w.mode != WeightMode::BNormalized) {
        throw DomainError("two-summing check requires B-normalised weights");
    }
    TwoSummingReport rep;
    if (phis.empty()) {
        rep.vacuous = true;
        return rep;
    }
    KahanSum lhs_sq;
    for (const auto& phi : phis) {
        const double norm = hp_norm(multiplier_apply(f, phi), p, f.natural_grid());
        lhs_sq.add(norm * norm);
    }
    rep.lhs = std::sqrt(lhs_sq.value());

    double sup_sq = 0.0;
    for (const auto& [r, v] : f.coeffs()) {
        KahanSum col;
        for (const auto& phi : phis) {
            const double ph = phi.at(r);
            col.add(ph * ph);
        }
        sup_sq = std::max(sup_sq, col.value());
    }
    rep.rhs = w.domination_constant * std::sqrt(sup_sq);
    rep.slack = rep.rhs - rep.lhs;
    if (!leq_with_slack(rep.lhs, rep.rhs)) {
        throw VerificationError("two-summing bound failed: lhs " + std::to_string(rep.lhs) +
                                " rhs " + std::to_string(rep.rhs));
    }
    return rep;
}

struct ApStatistics {
    std::vector<double> samples;  // B / ||f||_p^p per input, input order
    double min = 0.0, median = 0.0, max = 0.0;
};

/// Empirical distribution of the existential chain constant over an
/// ensemble.  Reported only; the theory provides no numeric value to assert
/// against.
inline ApStatistics estimate_ap(const std::vector<HaarExpansion>& ensemble, double p) {
    ApStatistics stats;
    stats.samples.reserve(ensemble.size());
    for (const auto& f : ensemble) {
        const AtomicDecomposition dec = classify(f, p);
        stats.samples.push_back(dec.B / std::pow(dec.f_hp, p));
    }
    if (!stats.samples.empty()) {
        std::vector<double> sorted = stats.samples;
        std::sort(sorted.begin(), sorted.end());
        stats.min = sorted.front();
        stats.max = sorted.back();
        stats.median = sorted[sorted.size() / 2];
    }
    return stats;
}

}  // namespace biharp
