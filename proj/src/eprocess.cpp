#include "evalkit/eprocess.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace evk {

namespace {

// Golden-section maximization of a concave objective on [lo, hi] to an
// interval of 1e-8; both endpoints are also candidates, so monotone
// objectives return the exact boundary.
template <typename F>
double golden_max(F&& f, double lo, double hi) {
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > 1e-8) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    double best = 0.5 * (a + b);
    double fbest = f(best);
    for (double cand : {lo, hi}) {
        const double fcand = f(cand);
        if (fcand > fbest) {
            fbest = fcand;
            best = cand;
        }
    }
    return best;
}

void absorb(EProcessState& state, double factor, double raw_e) {
    require(factor >= 0.0, "betting factor must be nonnegative");
    state.t += 1;
    state.e_counts[raw_e] += 1.0;
    state.e_sum += raw_e;
    if (state.latched_zero) return;
    if (factor == 0.0) {
        state.latched_zero = true;
        state.log_wealth = -kInf;
        return;
    }
    state.log_wealth += std::log(factor);
    state.log_history_max = std::max(state.log_history_max, state.log_wealth);
}

template <typename Hist>
double best_lambda(const Hist& hist, double gamma) {
    const auto growth = [&hist](double lam) {
        double acc = 0.0;
        for (const auto& [e, n] : hist) acc += n * std::log(1.0 - lam + lam * e);
        return acc;
    };
    return golden_max(growth, 0.0, gamma);
}

}  // namespace

double EProcessState::wealth() const {
    return latched_zero ? 0.0 : std::exp(log_wealth);
}

double EProcessState::history_max() const { return std::exp(log_history_max); }

EProcessState step_product(EProcessState state, EValue e) {
    absorb(state, e.value, e.value);
    return state;
}

EProcessState step_bet(EProcessState state, EValue e, double lambda) {
    require(std::isfinite(lambda) && lambda >= 0.0 && lambda <= 1.0,
            "bet must lie in [0, 1]");
    if (state.bet_stamp != EProcessState::kNoBet) {
        require(state.bet_stamp == state.t,
                "stale bet: the fraction was computed before an earlier step");
        state.bet_stamp = EProcessState::kNoBet;
    }
    absorb(state, 1.0 - lambda + lambda * e.value, e.value);
    return state;
}

double adaptive_lambda(EProcessState& state, double gamma) {
    require(gamma > 0.0 && gamma <= 1.0, "bet cap must lie in (0, 1]");
    state.bet_stamp = state.t;
    double count = 0.0;
    for (const auto& [e, n] : state.e_counts) {
        (void)e;
        count += n;
    }
    if (count == 0.0 || state.e_sum <= count) return 0.0;
    return best_lambda(state.e_counts, gamma);
}

double adaptive_lambda(const std::vector<double>& past_es, double gamma) {
    require(gamma > 0.0 && gamma <= 1.0, "bet cap must lie in (0, 1]");
    double sum = 0.0;
    for (double e : past_es) {
        require(e >= 0.0, "e-values must be nonnegative");
        sum += e;
    }
    if (past_es.empty() || sum <= static_cast<double>(past_es.size())) return 0.0;
    std::vector<std::pair<double, double>> hist;
    hist.reserve(past_es.size());
    for (double e : past_es) hist.emplace_back(e, 1.0);
    return best_lambda(hist, gamma);
}

bool ville_test(const EProcessState& state, double alpha) {
    require(alpha > 0.0 && alpha <= 1.0, "level must lie in (0, 1]");
    return state.log_history_max >= -std::log(alpha);
}

double SprtConfig::log_gamma0() const {
    return mode == SprtMode::conservative ? std::log(beta)
                                          : std::log(beta / (1.0 - alpha));
}

double SprtConfig::log_gamma1() const {
    return mode == SprtMode::conservative ? -std::log(alpha)
                                          : std::log((1.0 - beta) / alpha);
}

void SprtConfig::validate() const {
    require(alpha > 0.0 && alpha < 1.0 && beta > 0.0 && beta < 1.0,
            "error levels must lie in (0, 1)");
    require(log_gamma0() < 0.0 && log_gamma1() > 0.0,
            "thresholds must bracket 1");
}

SprtResult sprt(const std::vector<double>& log_ratios, const SprtConfig& config) {
    config.validate();
    const double lo = config.log_gamma0();
    const double hi = config.log_gamma1();
    double acc = 0.0;
    std::size_t n = 0;
    for (double lr : log_ratios) {
        acc += lr;
        ++n;
        if (acc >= hi) return {SprtDecision::reject, n, acc};
        if (acc <= lo) return {SprtDecision::accept, n, acc};
    }
    return {SprtDecision::inconclusive, n, acc};
}

UiEProcess ui_eprocess_step(UiEProcess s, double x, const AltPredictor& alt,
                            const NullRefitter& null_mle) {
    s.alt_loglik += alt(s.points, x);
    s.points.push_back(x);
    const double null_loglik = null_mle(s.points);
    s.state.t += 1;
    s.state.log_wealth = s.alt_loglik - null_loglik;
    s.state.log_history_max =
        std::max(s.state.log_history_max, s.state.log_wealth);
    return s;
}

TimeMixture::TimeMixture(std::function<double(std::size_t)> weight)
    : weight_(std::move(weight)) {
    require(static_cast<bool>(weight_), "a weight function is required");
    state_.log_wealth = -kInf;
    state_.log_history_max = -kInf;
}

TimeMixture TimeMixture::standard() {
    // Normalizer for 1/(n log^2(n+1)): the first 10^6 terms plus the tail
    // bound int_N^inf dx/(x log^2 x) = 1/log N, which keeps total mass < 1.
    static const double norm = [] {
        double s = 0.0;
        for (std::size_t n = 1; n <= 1000000; ++n) {
            const double l = std::log(static_cast<double>(n) + 1.0);
            s += 1.0 / (static_cast<double>(n) * l * l);
        }
        return s + 1.0 / std::log(1e6);
    }();
    return TimeMixture([](std::size_t n) {
        const double l = std::log(static_cast<double>(n) + 1.0);
        return 1.0 / (static_cast<double>(n) * l * l) / norm;
    });
}

EProcessState TimeMixture::step(EValue e) {
    const std::size_t n = state_.t + 1;
    const double w = weight_(n);
    require(std::isfinite(w) && w >= 0.0, "weights must be nonnegative");
    weight_used_ += w;
    require(weight_used_ <= 1.0 + 1e-9, "weights must sum to at most 1");
    state_.t = n;
    state_.e_counts[e.value] += 1.0;
    state_.e_sum += e.value;
    sum_ += w * e.value;
    state_.log_wealth = std::log(sum_);
    state_.log_history_max = std::max(state_.log_history_max, state_.log_wealth);
    return state_;
}

EProcessState optional_continuation(const EProcessState& stopped_first,
                                    const EProcessState& second) {
    EProcessState out;
    out.t = stopped_first.t + second.t;
    out.latched_zero = stopped_first.latched_zero || second.latched_zero;
    out.log_wealth =
        out.latched_zero ? -kInf : stopped_first.log_wealth + second.log_wealth;
    // During the second stage the running maximum is the first stage's final
    // wealth times the second stage's own maximum.
    out.log_history_max = stopped_first.log_history_max;
    if (!stopped_first.latched_zero)
        out.log_history_max =
            std::max(out.log_history_max,
                     stopped_first.log_wealth + second.log_history_max);
    return out;
}

}  // namespace evk
