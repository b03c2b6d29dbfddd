#include "evalkit/risk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "evalkit/common.hpp"

namespace evk {

namespace {

// cumulative-weight walk shared by the sample and discrete overloads:
// points ascending, weights positive, total mass 1 within rounding
double quantile_cut(const std::vector<double>& points,
                    const std::vector<double>& weights, double beta) {
    double cum = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        cum += weights[i];
        if (cum >= beta - 1e-12) return points[i];
    }
    return points.back();
}

// exact integral of the step quantile function over (beta, 1]
double tail_integral(const std::vector<double>& points,
                     const std::vector<double>& weights, double beta) {
    double out = 0.0;
    double cum = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double lo = std::max(cum, beta);
        cum += weights[i];
        if (cum > lo) out += (cum - lo) * points[i];
    }
    return out / (1.0 - beta);
}

void check_beta(double beta) {
    require(beta > 0.0 && beta < 1.0, "beta must lie in (0,1)");
}

std::vector<double> sorted_copy(const std::vector<double>& sample) {
    require(!sample.empty(), "risk measures need a nonempty sample");
    for (double x : sample)
        require(std::isfinite(x), "sample values must be finite");
    std::vector<double> xs = sample;
    std::sort(xs.begin(), xs.end());
    return xs;
}

// 0/0 = 1 and c/0 = inf for c > 0, the division convention used by the
// ratio statistics at the edge of their domains
double ratio_conv(double num, double den) {
    if (den > 0.0) return num / den;
    return num == 0.0 ? 1.0 : kInf;
}

}  // namespace

double var_beta(const std::vector<double>& sample, double beta) {
    check_beta(beta);
    const std::vector<double> xs = sorted_copy(sample);
    const std::size_t n = xs.size();
    std::size_t k = static_cast<std::size_t>(std::ceil(beta * double(n)));
    if (k == 0) k = 1;
    return xs[std::min(k, n) - 1];
}

double var_beta(const DiscreteDist& dist, double beta) {
    check_beta(beta);
    std::vector<std::size_t> order(dist.points.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return dist.points[a] < dist.points[b];
    });
    std::vector<double> pts, ws;
    for (std::size_t i : order) {
        pts.push_back(dist.points[i]);
        ws.push_back(dist.masses[i]);
    }
    return quantile_cut(pts, ws, beta);
}

double es_beta(const std::vector<double>& sample, double beta) {
    check_beta(beta);
    const std::vector<double> xs = sorted_copy(sample);
    const std::vector<double> ws(xs.size(), 1.0 / double(xs.size()));
    return tail_integral(xs, ws, beta);
}

double es_beta(const DiscreteDist& dist, double beta) {
    check_beta(beta);
    std::vector<std::size_t> order(dist.points.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return dist.points[a] < dist.points[b];
    });
    std::vector<double> pts, ws;
    for (std::size_t i : order) {
        pts.push_back(dist.points[i]);
        ws.push_back(dist.masses[i]);
    }
    return tail_integral(pts, ws, beta);
}

void EStatSpec::validate() const {
    switch (kind) {
        case EStatKind::quantile:
        case EStatKind::es_var:
            check_beta(beta);
            break;
        case EStatKind::expected_loss:
            require(static_cast<bool>(loss),
                    "expected_loss needs a loss evaluator");
            require(std::isfinite(loss_floor),
                    "expected_loss needs a finite lower bound");
            break;
        case EStatKind::mean:
        case EStatKind::variance_mean:
            break;
    }
}

EValue e_stat(const ForecastRecord& record, const EStatSpec& spec) {
    spec.validate();
    const double x = record.x;
    const double r = record.r;
    require(std::isfinite(x) && std::isfinite(r),
            "forecast records must be finite");
    auto aux = [&]() -> double {
        require(record.z.has_value(),
                "this statistic needs the auxiliary forecast z");
        require(std::isfinite(*record.z), "forecast records must be finite");
        return *record.z;
    };
    switch (spec.kind) {
        case EStatKind::mean:
            require(x >= 0.0, "mean statistic is for nonnegative outcomes");
            require(r > 0.0, "mean statistic needs a positive forecast");
            return EValue(x / r);
        case EStatKind::variance_mean: {
            const double z = aux();
            require(r >= 0.0, "variance forecast must be nonnegative");
            return EValue(ratio_conv((x - z) * (x - z), r));
        }
        case EStatKind::quantile:
            return EValue(x > r ? 1.0 / (1.0 - spec.beta) : 0.0);
        case EStatKind::expected_loss: {
            const double lx = spec.loss(x);
            require(lx >= spec.loss_floor,
                    "loss evaluator dipped below its stated lower bound");
            require(r > spec.loss_floor,
                    "expected-loss forecast must exceed the loss bound");
            return EValue((lx - spec.loss_floor) / (r - spec.loss_floor));
        }
        case EStatKind::es_var: {
            const double z = aux();
            if (r < z) return EValue(kInf);  // meaningless forecast pair
            const double num = std::max(x - z, 0.0);
            return EValue(ratio_conv(num, (1.0 - spec.beta) * (r - z)));
        }
    }
    throw domain_error("unknown e-statistic kind");
}

BacktestResult backtest(const std::vector<ForecastRecord>& stream,
                        const EStatSpec& spec, const BacktestConfig& config) {
    require(config.alpha > 0.0 && config.alpha < 1.0,
            "alpha must lie in (0,1)");
    require(config.gamma > 0.0 && config.gamma <= 1.0,
            "gamma must lie in (0,1]");
    if (config.fixed_lambda)
        require(*config.fixed_lambda >= 0.0 && *config.fixed_lambda <= 1.0,
                "fixed bet must lie in [0,1]");
    BacktestResult out;
    out.steps.reserve(stream.size());
    for (const ForecastRecord& record : stream) {
        const double lambda = config.fixed_lambda
                                  ? *config.fixed_lambda
                                  : adaptive_lambda(out.state, config.gamma);
        const EValue e = e_stat(record, spec);
        out.state = step_bet(out.state, e, lambda);
        out.steps.push_back({record.t, e.value, lambda, out.state.wealth()});
        if (!out.rejected_at && ville_test(out.state, config.alpha))
            out.rejected_at = out.steps.size() - 1;
    }
    return out;
}

}  // namespace evk
