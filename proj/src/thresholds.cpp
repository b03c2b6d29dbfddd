#include "evalkit/thresholds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "evalkit/common.hpp"

namespace evk {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw domain_error(msg);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// z with Phi(z) = p for p in (0,1), bisected well past double resolution.
double normal_quantile(double p) {
    double lo = -40.0, hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (normal_cdf(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// Unique root a > -log(gamma) of e^a (1 - a - log gamma) = 1. The worst
// crossing probability over decreasing densities of log E on [0,inf) is
// e^{-a}; h below is strictly decreasing past the left endpoint, where it
// starts at 1/gamma - 1 > 0.
double crossing_root(double gamma) {
    const double L = -std::log(gamma);
    auto h = [&](double a) { return std::exp(a) * (1.0 + L - a) - 1.0; };
    double lo = L, hi = L + 1.0;
    while (h(hi) > 0.0) hi += 1.0;
    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        (h(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double crossing_d_gt1(double g) { return g / (1.0 + std::sqrt(1.0 - g * g)); }

// Upper end of the known bracket for LD / LUS; the two classes share one
// worst case and only these analytic caps on it are available.
double crossing_lus_upper(double g) {
    return std::min(g / (M_E * (1.0 - g * g)), crossing_d_gt1(g));
}

// Sharper cap used when inverting the bracket into a threshold: a density
// that decreases everywhere in particular decreases over [0,inf), so the
// LD / LUS worst case never exceeds the exact LD_gt0 crossing. The extra
// term wins for gamma above roughly 0.1.
double crossing_lus_sharp(double g) {
    return std::min(crossing_lus_upper(g), std::exp(-crossing_root(g)));
}

}  // namespace

WorstCaseCrossing r_gamma(ShapeClass cls, double gamma) {
    require(gamma > 0.0 && gamma <= 1.0, "gamma must lie in (0,1]");
    WorstCaseCrossing out;
    if (gamma == 1.0) return out;  // constant E = 1 sits in every class
    switch (cls) {
        case ShapeClass::E0:
        case ShapeClass::LU:
            out.value = gamma;
            break;
        case ShapeClass::D:
            out.value = gamma / 2.0;
            break;
        case ShapeClass::D_gt1:
            out.value = crossing_d_gt1(gamma);
            break;
        case ShapeClass::U:
            out.value = std::max(gamma / 2.0, 2.0 * gamma - 1.0);
            break;
        case ShapeClass::LS:
            out.value = std::min(gamma, 0.5);
            break;
        case ShapeClass::LD_gt0:
            out.value = std::exp(-crossing_root(gamma));
            break;
        case ShapeClass::LD:
        case ShapeClass::LUS:
            out.value = crossing_lus_upper(gamma);
            out.lower_bound = gamma / M_E;
            out.exact = false;
            return out;
        case ShapeClass::LN:
            out.value = normal_cdf(-std::sqrt(-2.0 * std::log(gamma)));
            break;
    }
    out.lower_bound = out.value;
    return out;
}

double t_alpha(ShapeClass cls, double alpha) {
    require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0,1)");
    switch (cls) {
        case ShapeClass::E0:
        case ShapeClass::LU:
            return 1.0 / alpha;
        case ShapeClass::LS:
            return alpha < 0.5 ? 1.0 / alpha : 1.0;
        case ShapeClass::D:
            return std::max(1.0, 1.0 / (2.0 * alpha));
        case ShapeClass::D_gt1:
            return std::max(1.0, 1.0 / (2.0 * alpha) + alpha / 2.0);
        case ShapeClass::U:
            return std::max(1.0 / (2.0 * alpha), 2.0 / (1.0 + alpha));
        case ShapeClass::LD_gt0:
            return std::max(1.0, std::exp(alpha - 1.0) / alpha);
        case ShapeClass::LD:
        case ShapeClass::LUS: {
            // Smallest t >= 1 whose sharpened crossing cap is below alpha.
            double lo = 1.0, hi = 2.0;
            while (crossing_lus_sharp(1.0 / hi) > alpha) hi *= 2.0;
            while (hi - lo > 1e-10) {
                const double mid = 0.5 * (lo + hi);
                (crossing_lus_sharp(1.0 / mid) > alpha ? lo : hi) = mid;
            }
            return 0.5 * (lo + hi);
        }
        case ShapeClass::LN: {
            if (alpha >= 0.5) return 1.0;
            const double z = normal_quantile(1.0 - alpha);
            return std::exp(z * z / 2.0);
        }
    }
    throw domain_error("unknown shape class");
}

ConditionalPValue conditional_e_to_p(ShapeClass cls, EValue e) {
    ConditionalPValue out;
    if (!(e.value > 1.0)) return out;  // p = 1: crossing any t <= 1 is free
    if (std::isinf(e.value)) {
        out.p = PValue(0.0);
        out.exact = !(cls == ShapeClass::LD || cls == ShapeClass::LUS);
        return out;
    }
    const WorstCaseCrossing r = r_gamma(cls, 1.0 / e.value);
    out.p = PValue(std::min(1.0, r.value));
    out.exact = r.exact;
    return out;
}

bool comonotone_sup_test(const std::vector<double>& es, double alpha,
                         ShapeClass cls) {
    require(!es.empty(), "comonotone sup test needs at least one e-value");
    double sup = 0.0;
    for (const double e : es) {
        require(!std::isnan(e) && e >= 0.0, "e-values must be nonnegative");
        sup = std::max(sup, e);
    }
    return sup >= t_alpha(cls, alpha);
}

}  // namespace evk
