#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "evalkit/core.hpp"
#include "evalkit/eprocess.hpp"
#include "evalkit/evariables.hpp"

namespace evk {

// Left beta-quantile. On a sample this is the ceil(beta*n)-th ascending
// order statistic; on a finite distribution the smallest point whose
// cumulative mass reaches beta.
double var_beta(const std::vector<double>& sample, double beta);
double var_beta(const DiscreteDist& dist, double beta);

// Tail-average risk: the exact integral of the quantile function over
// (beta, 1], scaled by 1/(1-beta). The bucket the cut lands in enters with
// its fractional width, so the value agrees with the minimization identity
// min_z { z + E(X-z)+ / (1-beta) } to rounding error, unlike a naive mean
// of the top observations.
double es_beta(const std::vector<double>& sample, double beta);
double es_beta(const DiscreteDist& dist, double beta);

// One step of a forecast stream: realized x, the primary risk forecast r
// issued before x was observed, and the auxiliary forecast z where the
// statistic needs one (variance-given-mean and ES-given-quantile).
struct ForecastRecord {
    double x = 0.0;
    double r = 0.0;
    std::optional<double> z;
    std::size_t t = 0;
};

enum class EStatKind { mean, variance_mean, quantile, expected_loss, es_var };

struct EStatSpec {
    EStatKind kind = EStatKind::mean;
    double beta = 0.975;                       // quantile / es_var
    std::function<double(double)> loss;        // expected_loss
    double loss_floor = 0.0;                   // lower bound of the loss

    void validate() const;
};

// Per-record evidence against the forecast being high enough. Division
// conventions 0/0 = 1 and c/0 = inf (c > 0) apply where the statistic's
// domain touches them; each kind is decreasing in the forecast r, so an
// overforecast can only help the forecaster.
EValue e_stat(const ForecastRecord& record, const EStatSpec& spec);

struct BacktestConfig {
    double alpha = 0.05;   // rejection boundary for the running decision
    double gamma = 0.5;    // cap for the adaptive bet search
    // When set, every step bets this fixed fraction instead of adapting.
    std::optional<double> fixed_lambda;
};

struct BacktestStep {
    std::size_t t = 0;
    double e = 0.0;       // e-statistic fed to the wealth process
    double lambda = 0.0;  // bet chosen before seeing it
    double wealth = 0.0;  // running product after the step
};

struct BacktestResult {
    std::vector<BacktestStep> steps;
    EProcessState state;
    // First step index whose running maximum reached 1/alpha, if any.
    std::optional<std::size_t> rejected_at;
};

// Sequential backtest: each record is scored by e_stat and fed into the
// betting product with a predictable bet (adaptive over the scores seen so
// far by default). Validity only needs the forecasts to precede their
// realizations; the observations may be dependent.
BacktestResult backtest(const std::vector<ForecastRecord>& stream,
                        const EStatSpec& spec,
                        const BacktestConfig& config = {});

}  // namespace evk
