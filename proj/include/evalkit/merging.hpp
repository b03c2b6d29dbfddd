#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "evalkit/common.hpp"
#include "evalkit/core.hpp"

namespace evk {

// Betting strategy for martingale merging: maps the strictly-prior e-values
// to a fraction in [0, 1].
using BetStrategy = std::function<double(const std::vector<double>&)>;

enum class EMergeKind {
    weighted_mean,
    ustat,
    product,
    martingale,
    empirically_adaptive,
    hit_and_stop,
};

struct EMergeRule {
    EMergeKind kind = EMergeKind::product;
    // weighted_mean: K+1 simplex weights, weights[0] on the constant 1.
    std::vector<double> weights;
    std::size_t subset_size = 1;  // ustat order n
    BetStrategy strategy;         // martingale bets; hit_and_stop inner bets
    double gamma = 1.0;           // adaptive bet cap, in (0, 1]
    double alpha = 0.05;          // hit_and_stop stopping level

    static EMergeRule weighted_mean(std::vector<double> w);
    static EMergeRule ustat(std::size_t n);
    static EMergeRule product();
    static EMergeRule martingale(BetStrategy s);
    static EMergeRule empirically_adaptive(double gamma);
    // Null strategy means: bet the empirically adaptive fraction.
    static EMergeRule hit_and_stop(double alpha, BetStrategy s = nullptr);
};

EValue merge_e(const std::vector<EValue>& es, const EMergeRule& rule);

enum class PMergeKind {
    bonferroni,
    order,
    twice_mean,
    e_geometric,
    harmonic_TK,
    hommel,
    simes_unsafe,
    calibrated,
};

struct PMergeRule {
    PMergeKind kind = PMergeKind::twice_mean;
    std::size_t k = 1;        // order-statistic index, 1..K
    bool assume_prds = false; // must be set explicitly to use simes_unsafe
    CalibratorSpec calibrator;
    std::vector<double> weights;  // calibrated: simplex weights, empty = uniform

    static PMergeRule bonferroni();
    static PMergeRule order(std::size_t k);
    static PMergeRule twice_mean();
    static PMergeRule e_geometric();
    static PMergeRule harmonic_TK();
    static PMergeRule hommel();
    static PMergeRule simes_unsafe(bool assume_prds);
    static PMergeRule calibrated(CalibratorSpec f, std::vector<double> w = {});
};

// T_K = log K + log log K + 1, the sharp harmonic-mean constant (K >= 2).
double harmonic_tk(std::size_t K);

PValue merge_p(const std::vector<PValue>& ps, const PMergeRule& rule);

// Prefix-max combination for exchangeable p-values, in input order:
// inf{eps : max over prefixes l of (1/l) sum_{k<=l} f(p_k/eps) >= 1}. The
// value can only shrink as further p-values arrive.
PValue merge_p_exchangeable(const std::vector<PValue>& ps,
                            const CalibratorSpec& calibrator);

// Randomized analogs (u uniform on [0,1], independent of the p-values):
// order(k) -> (K/k) p_(ceil(uk)); twice_mean -> (2/(2-u)) mean;
// e_geometric -> e^u geo; harmonic_TK -> (T_K u + 1) harm; calibrated ->
// infimum form with right-hand side u. u = 1 recovers the deterministic rule.
PValue merge_p_randomized(const std::vector<PValue>& ps, const PMergeRule& rule,
                          double u);

// Rejects iff mean(ps) <= 2 * alpha * u; valid for arbitrary dependence.
bool avg_p_randomized_test(const std::vector<PValue>& ps, double alpha, double u);

// p/e cross-combiners. ie and ip require independence of p and e (caller
// contract). In combine_ie a factor of infinity wins over a factor of zero.
EValue combine_ie(PValue p, EValue e, const CalibratorSpec& f);
PValue combine_ip(PValue p, EValue e);  // min(p/e, 1)
EValue combine_e_mix(PValue p, EValue e, double lambda, const CalibratorSpec& f);
PValue combine_p_min(PValue p, EValue e);  // min(2 min(p, 1/e), 1)

}  // namespace evk
