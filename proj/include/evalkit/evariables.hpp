#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "evalkit/common.hpp"
#include "evalkit/core.hpp"

namespace evk {

// Caller-supplied scalar evaluators. Density callables must be safe for
// concurrent use; the library never caches their results.
using RealFn = std::function<double(double)>;
using DensityFn = std::function<double(double)>;

// Shipped density evaluators.
DensityFn gaussian_density(double mean, double sd);
DensityFn bernoulli_density(double p);  // mass function on {0, 1}
DensityFn uniform_density(double lo, double hi);
// Step density: values[i] on [edges[i], edges[i+1]), zero outside.
DensityFn piecewise_constant_density(std::vector<double> edges,
                                     std::vector<double> values);

// Finite-support distribution; masses must sum to 1 within 1e-12 and points
// must be distinct.
struct DiscreteDist {
    std::vector<double> points;
    std::vector<double> masses;

    DiscreteDist(std::vector<double> pts, std::vector<double> ms);
    double mean() const;
};

// exp(mu * S_n - n * mu^2 / 2), the one-sided Gaussian likelihood ratio.
EValue gaussian_lr_e(const std::vector<double>& sample, double mu);

// Symmetric two-point mixture (exp(dZ - d^2/2) + exp(-dZ - d^2/2)) / 2 with
// Z = S_n / sqrt(n).
EValue gaussian_two_sided_e(const std::vector<double>& sample, double delta);

// (q/p)^{S_n} ((1-q)/(1-p))^{n-S_n} over a binary sample.
EValue bernoulli_lr_e(const std::vector<double>& sample, double p, double q);

// (B+1) R_0 / sum(R_b); index 0 is the original statistic. All scores zero
// yields 1 by convention.
EValue soft_rank_e(const std::vector<double>& scores);

// 2 q(z) / (q(z) + q(-z)) with the 0/0 case mapped to 0.
EValue symmetry_e(double z, const DensityFn& q);

enum class MeanVarKind { mean_only, second_moment };

// (1-lambda) + lambda * z / mu, or (1-lambda) + lambda * z^2 / (mu^2 + sigma^2).
EValue mean_variance_e(double z, double mu, double sigma, double lambda,
                       MeanVarKind kind);

// exp(lambda z - lambda^2/2); two-sided variant mixes +/-lambda equally.
EValue subgaussian_e(double z, double lambda, bool two_sided);

// Piecewise-linear numeraire for a likelihood ratio capped at level gamma:
// E(x) = max(x, z0) / gamma with z0 the smallest nonnegative root of
// int_0^{1/gamma} max(q_t, z0) dt = 1 over the decreasing rearrangement q_t.
struct LrBoundNumeraire {
    double z0 = 0.0;
    double gamma = 1.0;

    double operator()(double x) const;
};
LrBoundNumeraire lr_bound_numeraire(const DiscreteDist& q_over_p0, double gamma);

// Root of (1 + lambda(1-mu)) / (1 - lambda mu) = e^lambda on (0, 1/mu); the
// optimal bet for a [0,1]-valued mean-mu null. E*(z) = 1 + lambda (z - mu).
double bounded_mean_numeraire_lambda(double mu);

// exp(logratio(z)); caller asserts a monotone likelihood ratio family.
EValue mlr_numeraire_e(double z, const RealFn& logratio);

// sqrt(c^2/(n+c^2)) * ((n+c^2) V_n / ((n+c^2) V_n - S_n^2))^{n/2}; V_n is the
// sum of squares. Scale-invariant, and identically 1 at n = 1.
EValue t_test_e(const std::vector<double>& sample, double c);

// Uniform mixture over suffix changepoints: (1/n) sum_k prod over the last k
// points of exp(logratio(x_i)).
EValue changepoint_e(const std::vector<double>& sample, const RealFn& logratio);

enum class CltDenom { root_mean_square, sample_sd };

// exp(lambda sqrt(n) xbar / S - lambda^2/2) or its symmetric mixture; S is
// the root mean square or the sample standard deviation.
EValue clt_asymptotic_e(const std::vector<double>& sample, double lambda,
                        bool two_sided, CltDenom denom);

// Mixture likelihood ratio sum_j q_j(x) / sum_j p_j(x); 0/0 -> 1 and
// positive/0 -> infinity.
EValue compound_separable_e(double x,
                            const std::vector<DensityFn>& null_densities,
                            const std::vector<DensityFn>& alt_densities);

// E_k = K * ss_k / sum_j vh_j from per-group sums of squares ss and variance
// estimates vh.
std::vector<EValue> compound_t_e(const std::vector<double>& group_sums_of_squares,
                                 const std::vector<double>& group_variances_hat,
                                 std::size_t K);

}  // namespace evk
