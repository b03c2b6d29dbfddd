#include "evalkit/core.hpp"

#include <algorithm>
#include <cmath>

namespace evk {

void CalibratorSpec::validate() const {
    switch (kind) {
        case CalKind::power:
            require(kappa > 0.0 && kappa < 1.0, "power calibrator needs kappa in (0,1)");
            break;
        case CalKind::all_or_nothing:
            require(alpha > 0.0 && alpha < 1.0, "all_or_nothing needs alpha in (0,1)");
            break;
        case CalKind::bhy_truncation:
            require(alpha > 0.0 && alpha < 1.0, "bhy_truncation needs alpha in (0,1)");
            require(K >= 1, "bhy_truncation needs K >= 1");
            break;
        default:
            break;
    }
}

CalibratorSpec parse_calibrator(const std::string& kind, double param, int K) {
    CalibratorSpec s;
    if (kind == "power") {
        s.kind = CalKind::power;
        s.kappa = param;
    } else if (kind == "mixture") {
        s.kind = CalKind::mixture;
    } else if (kind == "linear2") {
        s.kind = CalKind::linear2;
    } else if (kind == "sqrtinv") {
        s.kind = CalKind::sqrtinv;
    } else if (kind == "neglog") {
        s.kind = CalKind::neglog;
    } else if (kind == "all_or_nothing") {
        s.kind = CalKind::all_or_nothing;
        s.alpha = param;
    } else if (kind == "bhy_truncation") {
        s.kind = CalKind::bhy_truncation;
        s.alpha = param;
        s.K = K;
    } else {
        throw domain_error("unknown calibrator kind '" + kind + "'");
    }
    s.validate();
    return s;
}

double harmonic_number(int K) {
    double h = 0.0;
    for (int k = 1; k <= K; k++) h += 1.0 / k;
    return h;
}

namespace {

double mixture_f(double p) {
    if (p >= 1.0) {
        // continuous limit 1/2 at p=1 (the formula is 0/0 there)
        return p == 1.0 ? 0.5 : 0.0;
    }
    double q = 1.0 - p;
    if (q < 1e-5) return 0.5 + q / 6.0;  // series; direct form cancels badly
    double lp = std::log(p);
    return (1.0 - p + p * lp) / (p * lp * lp);
}

}  // namespace

EValue calibrate_p_to_e(PValue p, const CalibratorSpec& spec) {
    spec.validate();
    double pv = p.value;
    if (pv > 1.0) return EValue(0.0);
    switch (spec.kind) {
        case CalKind::power:
            if (pv == 0.0) return EValue(kInf);
            return EValue(spec.kappa * std::pow(pv, spec.kappa - 1.0));
        case CalKind::mixture:
            if (pv == 0.0) return EValue(kInf);
            return EValue(mixture_f(pv));
        case CalKind::linear2:
            return EValue(2.0 * (1.0 - pv));
        case CalKind::sqrtinv:
            if (pv == 0.0) return EValue(kInf);
            return EValue(1.0 / std::sqrt(pv) - 1.0);
        case CalKind::neglog:
            if (pv == 0.0) return EValue(kInf);
            return EValue(-std::log(pv));
        case CalKind::all_or_nothing:
            return EValue(pv <= spec.alpha ? 1.0 / spec.alpha : 0.0);
        case CalKind::bhy_truncation: {
            // f(p) = T(alpha/(ell_K p))/alpha; steps K/(alpha i) on
            // p in ((i-1) alpha/(K ell_K), i alpha/(K ell_K)], zero past i=K
            double ell = harmonic_number(spec.K);
            if (pv == 0.0) return EValue(spec.K / spec.alpha);
            double r = spec.K * ell * pv / spec.alpha;
            if (r > double(spec.K)) return EValue(0.0);
            double i = std::ceil(r);
            return EValue(spec.K / (spec.alpha * i));
        }
    }
    throw domain_error("unreachable calibrator kind");
}

PValue calibrate_e_to_p(EValue e) {
    if (std::isinf(e.value)) return PValue(0.0);
    if (e.value <= 1.0) return PValue(1.0);
    return PValue(1.0 / e.value);
}

double calibrator_integral(const CalibratorSpec& spec) {
    spec.validate();
    switch (spec.kind) {
        case CalKind::power:    // antiderivative p^kappa
        case CalKind::linear2:  // 2p - p^2
        case CalKind::sqrtinv:  // 2 sqrt(p) - p
        case CalKind::neglog:   // p - p log p
            return 1.0;
        case CalKind::mixture:  // antiderivative (p-1)/log p, limits 1 and 0
            return 1.0;
        case CalKind::all_or_nothing:
            return 1.0;  // alpha * (1/alpha)
        case CalKind::bhy_truncation: {
            // sum of step areas: sum_i (alpha/(K ell)) * K/(alpha i) = 1
            double ell = harmonic_number(spec.K);
            double s = 0.0;
            for (int i = 1; i <= spec.K; i++) s += 1.0 / (ell * i);
            return s;
        }
    }
    throw domain_error("unreachable calibrator kind");
}

double calibrator_inverse(const CalibratorSpec& spec, double x) {
    spec.validate();
    switch (spec.kind) {
        case CalKind::power: {
            if (x <= spec.kappa) return 1.0;  // f(1) = kappa
            return std::pow(spec.kappa / x, 1.0 / (1.0 - spec.kappa));
        }
        case CalKind::mixture: {
            if (x <= 0.5) return 1.0;
            double lo = 0.0, hi = 1.0;  // f decreasing from inf to 1/2
            for (int it = 0; it < 200; it++) {
                double mid = 0.5 * (lo + hi);
                if (mixture_f(mid) >= x)
                    lo = mid;
                else
                    hi = mid;
            }
            return lo;
        }
        case CalKind::linear2: {
            if (x <= 0.0) return 1.0;
            if (x > 2.0) return 0.0;
            return (2.0 - x) / 2.0;
        }
        case CalKind::sqrtinv: {
            if (x <= 0.0) return 1.0;
            double r = 1.0 + x;
            return 1.0 / (r * r);
        }
        case CalKind::neglog: {
            if (x <= 0.0) return 1.0;
            return std::exp(-x);
        }
        case CalKind::all_or_nothing: {
            if (x <= 0.0) return 1.0;
            return x <= 1.0 / spec.alpha ? spec.alpha : 0.0;
        }
        case CalKind::bhy_truncation: {
            if (x <= 0.0) return 1.0;
            double ell = harmonic_number(spec.K);
            // step i has value K/(alpha i); f >= x iff i <= K/(alpha x)
            double imax = std::floor(spec.K / (spec.alpha * x));
            if (imax < 1.0) return 0.0;
            if (imax >= double(spec.K)) return spec.alpha / ell;
            return imax * spec.alpha / (spec.K * ell);
        }
    }
    throw domain_error("unreachable calibrator kind");
}

bool markov_test(EValue e, double alpha) {
    require(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0,1]");
    return e.value >= 1.0 / alpha;
}

bool randomized_markov_test(EValue e, double alpha, double u) {
    require(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0,1]");
    require(u >= 0.0 && u <= 1.0, "u must lie in [0,1]");
    return e.value >= u / alpha;
}

std::optional<std::size_t> exchangeable_markov_test(
    const std::vector<double>& es, double alpha) {
    require(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0,1]");
    if (es.empty()) throw domain_error("exchangeable test needs at least one e-value");
    double thresh = 1.0 / alpha;
    double sum = 0.0;
    for (std::size_t m = 0; m < es.size(); m++) {
        require(es[m] >= 0.0, "e-values must be nonnegative");
        sum += es[m];
        if (sum / double(m + 1) >= thresh) return m + 1;
    }
    return std::nullopt;
}

bool eumi_test(EValue first, const std::vector<double>& es, double alpha,
               double u) {
    require(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0,1]");
    require(u >= 0.0 && u <= 1.0, "u must lie in [0,1]");
    if (first.value >= u / alpha) return true;
    if (es.empty()) return false;
    return exchangeable_markov_test(es, alpha).has_value();
}

std::string jeffreys_label(EValue e, const SignificanceGrid& grid) {
    // e exactly on a breakpoint falls in the lower category
    std::size_t idx = 0;
    while (idx < grid.breakpoints.size() && e.value > grid.breakpoints[idx]) idx++;
    return grid.labels[idx];
}

void LossTable::validate() const {
    require(!null_losses.empty(), "loss table must contain L(0,0)");
    require(budget > 0.0, "loss budget must be positive");
    for (std::size_t d = 0; d + 1 < null_losses.size(); d++)
        require(null_losses[d] < null_losses[d + 1],
                "null losses must be strictly increasing in the decision index");
}

std::size_t posthoc_decision(EValue e, const LossTable& losses) {
    losses.validate();
    double cover = losses.budget * e.value;
    if (losses.null_losses[0] > cover)
        throw infeasible_error("even the safest decision exceeds the loss budget");
    std::size_t best = 0;
    for (std::size_t d = 0; d < losses.null_losses.size(); d++)
        if (losses.null_losses[d] <= cover) best = d;
    return best;
}

}  // namespace evk
