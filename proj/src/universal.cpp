#include "evalkit/universal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "evalkit/rng.hpp"

namespace evk {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;

std::pair<std::vector<double>, std::vector<double>> folds_of(
    const std::vector<double>& sample, const SplitPlan& plan) {
    require(plan.assignment.size() == sample.size(),
            "split plan does not match the sample size");
    std::vector<double> d0, d1;
    for (std::size_t i = 0; i < sample.size(); ++i)
        (plan.assignment[i] ? d1 : d0).push_back(sample[i]);
    if (d0.empty() || d1.empty()) throw domain_error("empty fold");
    return {std::move(d0), std::move(d1)};
}

double mean_of(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double gaussian_log_density(double x, double mu, double var) {
    return -0.5 * (x - mu) * (x - mu) / var - 0.5 * std::log(var) -
           kHalfLog2Pi;
}

double mixture_log_likelihood(const std::vector<double>& xs, double w1,
                              double mu1, double mu2) {
    const double lw1 = std::log(w1), lw2 = std::log1p(-w1);
    double total = 0.0;
    for (double x : xs) {
        const double a = lw1 - 0.5 * (x - mu1) * (x - mu1);
        const double b = lw2 - 0.5 * (x - mu2) * (x - mu2);
        const double m = std::max(a, b);
        total += m + std::log(std::exp(a - m) + std::exp(b - m)) - kHalfLog2Pi;
    }
    return total;
}

}  // namespace

SplitPlan SplitPlan::swapped() const {
    SplitPlan out = *this;
    for (auto& a : out.assignment) a = a ? 0 : 1;
    out.fraction = 1.0 - fraction;
    return out;
}

SplitPlan make_split_plan(std::size_t n, double fraction, std::uint64_t seed) {
    require(n >= 2, "need at least two points to split");
    require(fraction > 0.0 && fraction < 1.0, "fold fraction must be in (0,1)");
    SplitPlan plan;
    plan.seed = seed;
    plan.fraction = fraction;
    plan.assignment.resize(n);
    for (std::uint64_t attempt = 0;; ++attempt) {
        Rng rng(derive_seed(seed, "split-plan", attempt));
        std::size_t n0 = 0;
        for (auto& a : plan.assignment) {
            a = rng.bernoulli(fraction) ? 0 : 1;
            n0 += (a == 0);
        }
        if (n0 > 0 && n0 < n) return plan;
    }
}

EValue split_lrt_e(const std::vector<double>& sample, const SplitPlan& plan,
                   const Fitter& fit_alternative, const Fitter& fit_null_mle) {
    auto [d0, d1] = folds_of(sample, plan);
    const FittedModel alt = fit_alternative(d1);
    const FittedModel nul = fit_null_mle(d0);
    double log_e = 0.0;
    bool hit_zero = false, hit_inf = false;
    for (double x : d0) {
        const double la = alt.log_density(x);
        const double ln = nul.log_density(x);
        if (la == -kInf && ln == -kInf)
            throw infeasible_error("both densities vanish at a data point");
        if (la == -kInf) hit_zero = true;
        else if (ln == -kInf) hit_inf = true;
        else log_e += la - ln;
    }
    if (hit_zero && hit_inf)
        throw infeasible_error("likelihood ratio mixes zero and infinity");
    if (hit_zero) return EValue(0.0);
    if (hit_inf) return EValue(kInf);
    return EValue(std::exp(log_e));
}

EValue crossfit_e(const std::vector<double>& sample, const SplitPlan& plan,
                  const Fitter& fit_alternative, const Fitter& fit_null_mle) {
    const double a = split_lrt_e(sample, plan, fit_alternative, fit_null_mle);
    const double b =
        split_lrt_e(sample, plan.swapped(), fit_alternative, fit_null_mle);
    return EValue(0.5 * (a + b));
}

EValue subsampled_e(const std::vector<double>& sample, std::size_t B,
                    std::uint64_t seed, double fraction,
                    const Fitter& fit_alternative, const Fitter& fit_null_mle) {
    require(B >= 1, "need at least one split");
    double sum = 0.0;
    for (std::size_t b = 0; b < B; ++b) {
        const SplitPlan plan =
            make_split_plan(sample.size(), fraction, derive_seed(seed, "split", b));
        sum += split_lrt_e(sample, plan, fit_alternative, fit_null_mle).value;
    }
    return EValue(sum / static_cast<double>(B));
}

std::pair<bool, std::size_t> subsampled_lrt_sequential_test(
    const std::vector<double>& split_e_stream, double alpha) {
    const auto hit = exchangeable_markov_test(split_e_stream, alpha);
    if (hit) return {true, *hit};
    return {false, split_e_stream.size()};
}

UncertaintySet universal_confidence_set(
    const std::vector<double>& sample, const SplitPlan& plan,
    const Fitter& fit_alternative, const std::vector<double>& theta_grid,
    const std::function<double(double, double)>& log_likelihood, double alpha) {
    require(!theta_grid.empty(), "parameter grid is empty");
    require(alpha > 0.0 && alpha < 1.0, "level must be in (0,1)");
    auto [d0, d1] = folds_of(sample, plan);
    const FittedModel alt = fit_alternative(d1);
    double alt_sum = 0.0;
    for (double x : d0) alt_sum += alt.log_density(x);

    const double threshold = std::log(1.0 / alpha);
    UncertaintySet out;
    for (std::size_t j = 0; j < theta_grid.size(); ++j) {
        double null_sum = 0.0;
        for (double x : d0) null_sum += log_likelihood(theta_grid[j], x);
        if (alt_sum - null_sum < threshold) out.members.push_back(j);
    }
    for (std::size_t i = 0; i < out.members.size();) {
        std::size_t j = i;
        while (j + 1 < out.members.size() &&
               out.members[j + 1] == out.members[j] + 1)
            ++j;
        out.intervals.push_back(
            {theta_grid[out.members[i]], theta_grid[out.members[j]]});
        i = j + 1;
    }
    out.level = 1.0 - alpha;
    return out;
}

double optimal_split_fraction(int d, double alpha) {
    require(d >= 1, "dimension must be positive");
    require(alpha > 0.0 && alpha < 1.0,
            "level must be in (0,1)");  // alpha = 1 would divide by log 1 = 0
    const double L = std::log(1.0 / alpha);
    const double dd = static_cast<double>(d);
    return 1.0 - (std::sqrt(4.0 * dd * dd + 8.0 * dd * L) - 2.0 * dd) / (4.0 * L);
}

Fitter gaussian_mean_fitter() {
    return [](const std::vector<double>& xs) {
        require(!xs.empty(), "cannot fit an empty fold");
        const double m = mean_of(xs);
        return FittedModel{
            [m](double x) { return gaussian_log_density(x, m, 1.0); },
            "gaussian-mean"};
    };
}

Fitter gaussian_mean_variance_fitter() {
    return [](const std::vector<double>& xs) {
        require(!xs.empty(), "cannot fit an empty fold");
        const double m = mean_of(xs);
        double ss = 0.0;
        for (double x : xs) ss += (x - m) * (x - m);
        const double var = ss / static_cast<double>(xs.size());
        if (var <= 0.0) throw infeasible_error("degenerate variance fit");
        return FittedModel{
            [m, var](double x) { return gaussian_log_density(x, m, var); },
            "gaussian-mean-variance"};
    };
}

Fitter bernoulli_fitter() {
    return [](const std::vector<double>& xs) {
        require(!xs.empty(), "cannot fit an empty fold");
        for (double x : xs)
            require(x == 0.0 || x == 1.0, "Bernoulli data must be 0 or 1");
        const double p = mean_of(xs);
        return FittedModel{[p](double x) {
                               require(x == 0.0 || x == 1.0,
                                       "Bernoulli data must be 0 or 1");
                               // log(0) = -inf handles the degenerate fits.
                               return x == 1.0 ? std::log(p) : std::log1p(-p);
                           },
                           "bernoulli"};
    };
}

Fitter mixture_location_fitter(double weight_first, std::uint64_t seed) {
    require(weight_first > 0.0 && weight_first < 1.0,
            "component weight must be in (0,1)");
    return [weight_first, seed](const std::vector<double>& xs) {
        require(!xs.empty(), "cannot fit an empty fold");
        const double w1 = weight_first;
        const std::size_t n = xs.size();
        double best_mu1 = xs[0], best_mu2 = xs[0];
        double best_ll = -kInf;
        for (std::uint64_t restart = 0; restart < 10; ++restart) {
            Rng rng(derive_seed(seed, "mixture-em", restart));
            double mu1 = xs[rng.below(n)];
            double mu2 = xs[rng.below(n)];
            for (int iter = 0; iter < 200; ++iter) {
                double r_sum = 0.0, rx_sum = 0.0, x_sum = 0.0;
                for (double x : xs) {
                    const double a = std::log(w1) - 0.5 * (x - mu1) * (x - mu1);
                    const double b =
                        std::log1p(-w1) - 0.5 * (x - mu2) * (x - mu2);
                    const double r = 1.0 / (1.0 + std::exp(b - a));
                    r_sum += r;
                    rx_sum += r * x;
                    x_sum += x;
                }
                // Keep a component's location if it momentarily owns no mass.
                if (r_sum > 0.0) mu1 = rx_sum / r_sum;
                if (r_sum < static_cast<double>(n))
                    mu2 = (x_sum - rx_sum) / (static_cast<double>(n) - r_sum);
            }
            const double ll = mixture_log_likelihood(xs, w1, mu1, mu2);
            if (ll > best_ll) {
                best_ll = ll;
                best_mu1 = mu1;
                best_mu2 = mu2;
            }
        }
        const double mu1 = best_mu1, mu2 = best_mu2;
        return FittedModel{
            [w1, mu1, mu2](double x) {
                const double a = std::log(w1) - 0.5 * (x - mu1) * (x - mu1);
                const double b = std::log1p(-w1) - 0.5 * (x - mu2) * (x - mu2);
                const double m = std::max(a, b);
                return m + std::log(std::exp(a - m) + std::exp(b - m)) -
                       kHalfLog2Pi;
            },
            "mixture-location-em"};
    };
}

}  // namespace evk
