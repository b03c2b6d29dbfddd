#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <vector>

#include "evalkit/common.hpp"
#include "evalkit/core.hpp"

namespace evk {

// Wealth process state. Wealth lives in log-domain; a betting factor of
// exactly zero latches the process at zero permanently, which the log alone
// cannot represent once combined with an infinite factor later.
struct EProcessState {
    double log_wealth = 0.0;
    double log_history_max = 0.0;
    bool latched_zero = false;
    std::size_t t = 0;

    // Strategy summary for adaptive betting: multiplicity per distinct
    // e-value, plus the running sum for the mean shortcut.
    std::map<double, double> e_counts;
    double e_sum = 0.0;

    // Step index the last adaptive bet was computed at; guards the
    // predictability contract.
    static constexpr std::size_t kNoBet = static_cast<std::size_t>(-1);
    std::size_t bet_stamp = kNoBet;

    double wealth() const;
    double history_max() const;
};

EProcessState step_product(EProcessState state, EValue e);

// wealth *= 1 - lambda + lambda * e. The bet must be predictable: computed
// before the current observation. Bets obtained from adaptive_lambda are
// stamped and verified; manually supplied bets are the caller's contract.
EProcessState step_bet(EProcessState state, EValue e, double lambda);

// argmax over [0, gamma] of the prefix-empirical mean of log(1 - l + l e),
// by golden-section to 1e-8 with both boundaries also evaluated. Returns 0
// on an empty prefix and whenever the prefix mean is <= 1.
double adaptive_lambda(EProcessState& state, double gamma);

// Same optimizer over an explicit prefix, for one-shot merging.
double adaptive_lambda(const std::vector<double>& past_es, double gamma);

// Ever-crossing rule: true iff the running maximum ever reached 1/alpha.
bool ville_test(const EProcessState& state, double alpha);

enum class SprtMode { conservative, classical };

struct SprtConfig {
    double alpha = 0.05;
    double beta = 0.05;
    SprtMode mode = SprtMode::conservative;

    // conservative: (beta, 1/alpha); classical: (beta/(1-alpha), (1-beta)/alpha).
    double log_gamma0() const;
    double log_gamma1() const;
    void validate() const;
};

enum class SprtDecision { reject, accept, inconclusive };

struct SprtResult {
    SprtDecision decision = SprtDecision::inconclusive;
    std::size_t stopping_time = 0;  // observations consumed
    double log_wealth = 0.0;
};

// Walk the per-observation log likelihood ratios until the running product
// leaves (gamma0, gamma1); exhaustion is reported as inconclusive, never
// coerced to accept.
SprtResult sprt(const std::vector<double>& log_ratios, const SprtConfig& config);

// log q-hat_{past}(x): alternative predictor fitted on strictly past points.
using AltPredictor = std::function<double(const std::vector<double>&, double)>;
// Maximized null log-likelihood over all points seen so far.
using NullRefitter = std::function<double(const std::vector<double>&)>;

struct UiEProcess {
    std::vector<double> points;
    double alt_loglik = 0.0;
    EProcessState state;
};

// Wealth is recomputed each step as exp(alt log-lik - refitted null maximum);
// the denominator refit makes a multiplicative update impossible.
UiEProcess ui_eprocess_step(UiEProcess s, double x, const AltPredictor& alt,
                            const NullRefitter& null_mle);

// M_n = sum_{j<=n} w(j) E_j where E_j is an e-value built from the first j
// observations; monotone nondecreasing in n.
class TimeMixture {
  public:
    // weight(n) for n >= 1; must be nonnegative with total mass <= 1.
    explicit TimeMixture(std::function<double(std::size_t)> weight);

    // w(n) proportional to 1/(n log^2(n+1)), normalized over the first 10^6
    // terms plus an integral tail bound (so total mass stays below 1).
    static TimeMixture standard();

    EProcessState step(EValue e);
    const EProcessState& state() const { return state_; }

  private:
    std::function<double(std::size_t)> weight_;
    EProcessState state_;
    double sum_ = 0.0;
    double weight_used_ = 0.0;
};

// Composite wealth after optional continuation: the second process starts a
// fresh unit of capital once the first has stopped.
EProcessState optional_continuation(const EProcessState& stopped_first,
                                    const EProcessState& second);

}  // namespace evk
