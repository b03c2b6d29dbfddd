#include "evalkit/merging.hpp"

#include <algorithm>
#include <cmath>

#include "evalkit/eprocess.hpp"

namespace evk {

namespace {

std::vector<double> values_of(const std::vector<EValue>& es) {
    std::vector<double> v;
    v.reserve(es.size());
    for (const auto& e : es) v.push_back(e.value);
    return v;
}

// Ascending order statistics; ties keep input order so the order-family
// rules are deterministic.
std::vector<double> sorted_values(const std::vector<PValue>& ps) {
    std::vector<double> v;
    v.reserve(ps.size());
    for (const auto& p : ps) v.push_back(p.value);
    std::stable_sort(v.begin(), v.end());
    return v;
}

double cap_unit(double x) { return std::min(x, 1.0); }

void check_simplex(const std::vector<double>& w, std::size_t want,
                   const char* what) {
    require(w.size() == want, "weight dimension mismatch");
    double total = 0.0;
    for (double x : w) {
        require(x >= 0.0, what);
        total += x;
    }
    require(std::abs(total - 1.0) <= 1e-12, what);
}

// Smallest eps in (0,1] with score(eps) >= rhs, by bisection; score must be
// nondecreasing in eps. Returns 1 when even eps = 1 falls short.
template <typename Score>
double bisect_eps(Score&& score, double rhs) {
    if (score(1.0) < rhs) return 1.0;
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 60 && hi - lo > 1e-8; ++it) {
        const double mid = 0.5 * (lo + hi);
        (score(mid) >= rhs ? hi : lo) = mid;
    }
    return hi;
}

double geometric_mean(const std::vector<PValue>& ps) {
    double acc = 0.0;
    for (const auto& p : ps) acc += std::log(p.value);
    return std::exp(acc / static_cast<double>(ps.size()));
}

double harmonic_mean(const std::vector<PValue>& ps) {
    double acc = 0.0;
    for (const auto& p : ps) acc += 1.0 / p.value;
    return static_cast<double>(ps.size()) / acc;
}

double arithmetic_mean(const std::vector<PValue>& ps) {
    double acc = 0.0;
    for (const auto& p : ps) acc += p.value;
    return acc / static_cast<double>(ps.size());
}

}  // namespace

EMergeRule EMergeRule::weighted_mean(std::vector<double> w) {
    EMergeRule r;
    r.kind = EMergeKind::weighted_mean;
    r.weights = std::move(w);
    return r;
}

EMergeRule EMergeRule::ustat(std::size_t n) {
    EMergeRule r;
    r.kind = EMergeKind::ustat;
    r.subset_size = n;
    return r;
}

EMergeRule EMergeRule::product() {
    EMergeRule r;
    r.kind = EMergeKind::product;
    return r;
}

EMergeRule EMergeRule::martingale(BetStrategy s) {
    EMergeRule r;
    r.kind = EMergeKind::martingale;
    r.strategy = std::move(s);
    return r;
}

EMergeRule EMergeRule::empirically_adaptive(double gamma) {
    EMergeRule r;
    r.kind = EMergeKind::empirically_adaptive;
    r.gamma = gamma;
    return r;
}

EMergeRule EMergeRule::hit_and_stop(double alpha, BetStrategy s) {
    EMergeRule r;
    r.kind = EMergeKind::hit_and_stop;
    r.alpha = alpha;
    r.strategy = std::move(s);
    return r;
}

EValue merge_e(const std::vector<EValue>& es, const EMergeRule& rule) {
    require(!es.empty(), "nothing to merge");
    const std::size_t K = es.size();

    switch (rule.kind) {
        case EMergeKind::weighted_mean: {
            check_simplex(rule.weights, K + 1,
                          "mean weights must be a nonnegative simplex");
            double acc = rule.weights[0];
            for (std::size_t k = 0; k < K; ++k)
                acc += rule.weights[k + 1] * es[k].value;
            return EValue(acc);
        }
        case EMergeKind::ustat: {
            const std::size_t n = rule.subset_size;
            require(n >= 1 && n <= K, "subset size must lie in 1..K");
            // Elementary symmetric polynomial of degree n over the inputs.
            std::vector<double> esp(n + 1, 0.0);
            esp[0] = 1.0;
            for (const auto& e : es)
                for (std::size_t j = std::min(n, K); j-- > 0;)
                    esp[j + 1] += esp[j] * e.value;
            double log_binom = std::lgamma(static_cast<double>(K + 1)) -
                               std::lgamma(static_cast<double>(n + 1)) -
                               std::lgamma(static_cast<double>(K - n + 1));
            return EValue(esp[n] / std::exp(log_binom));
        }
        case EMergeKind::product: {
            double acc = 0.0;
            for (const auto& e : es) {
                if (e.value == 0.0) return EValue(0.0);
                acc += std::log(e.value);
            }
            return EValue(std::exp(acc));
        }
        case EMergeKind::martingale:
        case EMergeKind::empirically_adaptive:
        case EMergeKind::hit_and_stop: {
            if (rule.kind == EMergeKind::martingale)
                require(static_cast<bool>(rule.strategy),
                        "martingale rule needs a strategy");
            require(rule.gamma > 0.0 && rule.gamma <= 1.0,
                    "bet cap must lie in (0, 1]");
            const bool stop_early = rule.kind == EMergeKind::hit_and_stop;
            double stop_at = kInf;
            if (stop_early) {
                require(rule.alpha > 0.0 && rule.alpha < 1.0,
                        "stopping level must lie in (0, 1)");
                stop_at = 1.0 / rule.alpha;
            }
            std::vector<double> prefix;
            prefix.reserve(K);
            double log_wealth = 0.0;
            bool dead = false;
            for (const auto& e : es) {
                double lam;
                if (rule.kind == EMergeKind::empirically_adaptive || !rule.strategy)
                    lam = adaptive_lambda(prefix, rule.gamma);
                else
                    lam = rule.strategy(prefix);
                require(std::isfinite(lam) && lam >= 0.0 && lam <= 1.0,
                        "bet must lie in [0, 1]");
                const double factor = 1.0 - lam + lam * e.value;
                if (factor == 0.0)
                    dead = true;
                else if (!dead)
                    log_wealth += std::log(factor);
                prefix.push_back(e.value);
                if (stop_early && !dead && std::exp(log_wealth) >= stop_at) break;
            }
            return EValue(dead ? 0.0 : std::exp(log_wealth));
        }
    }
    throw domain_error("unknown e-merging rule");
}

PMergeRule PMergeRule::bonferroni() { return {PMergeKind::bonferroni, 1, false, {}, {}}; }
PMergeRule PMergeRule::order(std::size_t k) { return {PMergeKind::order, k, false, {}, {}}; }
PMergeRule PMergeRule::twice_mean() { return {PMergeKind::twice_mean, 1, false, {}, {}}; }
PMergeRule PMergeRule::e_geometric() { return {PMergeKind::e_geometric, 1, false, {}, {}}; }
PMergeRule PMergeRule::harmonic_TK() { return {PMergeKind::harmonic_TK, 1, false, {}, {}}; }
PMergeRule PMergeRule::hommel() { return {PMergeKind::hommel, 1, false, {}, {}}; }
PMergeRule PMergeRule::simes_unsafe(bool assume_prds) {
    return {PMergeKind::simes_unsafe, 1, assume_prds, {}, {}};
}
PMergeRule PMergeRule::calibrated(CalibratorSpec f, std::vector<double> w) {
    return {PMergeKind::calibrated, 1, false, f, std::move(w)};
}

double harmonic_tk(std::size_t K) {
    require(K >= 2, "the harmonic constant needs K >= 2");
    const double logK = std::log(static_cast<double>(K));
    return logK + std::log(logK) + 1.0;
}

namespace {

// Weighted calibrator score (1/K or w_k weighted) at scale eps.
double calibrated_score(const std::vector<PValue>& ps,
                        const std::vector<double>& w, const CalibratorSpec& f,
                        double eps) {
    double acc = 0.0;
    for (std::size_t k = 0; k < ps.size(); ++k) {
        const double wk =
            w.empty() ? 1.0 / static_cast<double>(ps.size()) : w[k];
        if (wk == 0.0) continue;
        acc += wk * calibrate_p_to_e(PValue(std::min(ps[k].value / eps, 2.0)), f)
                        .value;
        if (acc == kInf) break;
    }
    return acc;
}

bool has_zero(const std::vector<PValue>& ps, const std::vector<double>& w) {
    for (std::size_t k = 0; k < ps.size(); ++k) {
        const double wk = w.empty() ? 1.0 : w[k];
        if (wk > 0.0 && ps[k].value == 0.0) return true;
    }
    return false;
}

}  // namespace

PValue merge_p(const std::vector<PValue>& ps, const PMergeRule& rule) {
    require(!ps.empty(), "nothing to merge");
    const std::size_t K = ps.size();
    const double Kd = static_cast<double>(K);

    switch (rule.kind) {
        case PMergeKind::bonferroni: {
            double lo = 1.0;
            for (const auto& p : ps) lo = std::min(lo, p.value);
            return PValue(cap_unit(Kd * lo));
        }
        case PMergeKind::order: {
            require(rule.k >= 1 && rule.k <= K, "order index must lie in 1..K");
            const auto s = sorted_values(ps);
            return PValue(cap_unit(Kd / static_cast<double>(rule.k) * s[rule.k - 1]));
        }
        case PMergeKind::twice_mean:
            return PValue(cap_unit(2.0 * arithmetic_mean(ps)));
        case PMergeKind::e_geometric:
            return PValue(cap_unit(std::exp(1.0) * geometric_mean(ps)));
        case PMergeKind::harmonic_TK: {
            if (K == 1) return ps[0];
            return PValue(cap_unit((harmonic_tk(K) + 1.0) * harmonic_mean(ps)));
        }
        case PMergeKind::hommel:
        case PMergeKind::simes_unsafe: {
            if (rule.kind == PMergeKind::simes_unsafe)
                require(rule.assume_prds,
                        "the Simes rule is invalid under arbitrary dependence; "
                        "set assume_prds to use it");
            const auto s = sorted_values(ps);
            double best = kInf;
            for (std::size_t k = 1; k <= K; ++k)
                best = std::min(best, Kd / static_cast<double>(k) * s[k - 1]);
            if (rule.kind == PMergeKind::simes_unsafe)
                return PValue(cap_unit(best));
            return PValue(cap_unit(harmonic_number(K) * best));
        }
        case PMergeKind::calibrated: {
            rule.calibrator.validate();
            if (!rule.weights.empty())
                check_simplex(rule.weights, K,
                              "calibrated weights must be a nonnegative simplex");
            if (has_zero(ps, rule.weights)) return PValue(0.0);
            return PValue(bisect_eps(
                [&](double eps) {
                    return calibrated_score(ps, rule.weights, rule.calibrator, eps);
                },
                1.0));
        }
    }
    throw domain_error("unknown p-merging rule");
}

PValue merge_p_exchangeable(const std::vector<PValue>& ps,
                            const CalibratorSpec& calibrator) {
    require(!ps.empty(), "nothing to merge");
    calibrator.validate();
    for (const auto& p : ps)
        if (p.value == 0.0) return PValue(0.0);
    const auto prefix_max_score = [&](double eps) {
        double best = 0.0, acc = 0.0;
        for (std::size_t k = 0; k < ps.size(); ++k) {
            acc += calibrate_p_to_e(
                       PValue(std::min(ps[k].value / eps, 2.0)), calibrator)
                       .value;
            best = std::max(best, acc / static_cast<double>(k + 1));
            if (best == kInf) break;
        }
        return best;
    };
    return PValue(bisect_eps(prefix_max_score, 1.0));
}

PValue merge_p_randomized(const std::vector<PValue>& ps, const PMergeRule& rule,
                          double u) {
    require(!ps.empty(), "nothing to merge");
    require(u >= 0.0 && u <= 1.0, "the randomizer must lie in [0, 1]");
    const std::size_t K = ps.size();
    const double Kd = static_cast<double>(K);

    switch (rule.kind) {
        case PMergeKind::bonferroni:
        case PMergeKind::order: {
            const std::size_t k =
                rule.kind == PMergeKind::bonferroni ? 1 : rule.k;
            require(k >= 1 && k <= K, "order index must lie in 1..K");
            const auto s = sorted_values(ps);
            const std::size_t idx = std::max<std::size_t>(
                1, static_cast<std::size_t>(
                       std::ceil(u * static_cast<double>(k) - 1e-12)));
            return PValue(cap_unit(Kd / static_cast<double>(k) * s[idx - 1]));
        }
        case PMergeKind::twice_mean:
            return PValue(cap_unit(2.0 / (2.0 - u) * arithmetic_mean(ps)));
        case PMergeKind::e_geometric:
            return PValue(cap_unit(std::exp(u) * geometric_mean(ps)));
        case PMergeKind::harmonic_TK: {
            if (K == 1) return ps[0];
            return PValue(cap_unit((harmonic_tk(K) * u + 1.0) * harmonic_mean(ps)));
        }
        case PMergeKind::calibrated: {
            rule.calibrator.validate();
            if (!rule.weights.empty())
                check_simplex(rule.weights, K,
                              "calibrated weights must be a nonnegative simplex");
            if (u == 0.0) return PValue(0.0);
            if (has_zero(ps, rule.weights)) return PValue(0.0);
            return PValue(bisect_eps(
                [&](double eps) {
                    return calibrated_score(ps, rule.weights, rule.calibrator, eps);
                },
                u));
        }
        case PMergeKind::hommel:
        case PMergeKind::simes_unsafe:
            throw domain_error("rule has no randomized analog");
    }
    throw domain_error("unknown p-merging rule");
}

bool avg_p_randomized_test(const std::vector<PValue>& ps, double alpha, double u) {
    require(!ps.empty(), "nothing to test");
    require(alpha > 0.0 && alpha < 1.0, "level must lie in (0, 1)");
    require(u >= 0.0 && u <= 1.0, "the randomizer must lie in [0, 1]");
    return arithmetic_mean(ps) <= 2.0 * alpha * u;
}

EValue combine_ie(PValue p, EValue e, const CalibratorSpec& f) {
    const double fp = calibrate_p_to_e(p, f).value;
    if (fp == kInf || e.value == kInf) return EValue(kInf);
    return EValue(fp * e.value);
}

PValue combine_ip(PValue p, EValue e) {
    if (p.value == 0.0) return PValue(0.0);
    if (e.value == 0.0) return PValue(1.0);
    return PValue(cap_unit(p.value / e.value));
}

EValue combine_e_mix(PValue p, EValue e, double lambda, const CalibratorSpec& f) {
    require(lambda > 0.0 && lambda < 1.0, "mixing weight must lie in (0, 1)");
    const double fp = calibrate_p_to_e(p, f).value;
    return EValue(lambda * fp + (1.0 - lambda) * e.value);
}

PValue combine_p_min(PValue p, EValue e) {
    const double inv = e.value == 0.0 ? kInf : 1.0 / e.value;
    return PValue(cap_unit(2.0 * std::min(p.value, inv)));
}

}  // namespace evk
