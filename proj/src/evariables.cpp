#include "evalkit/evariables.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

namespace evk {

namespace {

double sample_sum(const std::vector<double>& sample) {
    return std::accumulate(sample.begin(), sample.end(), 0.0);
}

double log_sum_exp(const std::vector<double>& logs) {
    double m = -kInf;
    for (double v : logs) m = std::max(m, v);
    if (!std::isfinite(m)) return m;  // all -inf, or an +inf term dominates
    double acc = 0.0;
    for (double v : logs) acc += std::exp(v - m);
    return m + std::log(acc);
}

}  // namespace

DensityFn gaussian_density(double mean, double sd) {
    require(std::isfinite(mean) && std::isfinite(sd) && sd > 0.0,
            "gaussian density needs finite mean and positive sd");
    const double inv_sd = 1.0 / sd;
    const double norm = inv_sd / std::sqrt(2.0 * 3.14159265358979323846);
    return [mean, inv_sd, norm](double x) {
        const double z = (x - mean) * inv_sd;
        return norm * std::exp(-0.5 * z * z);
    };
}

DensityFn bernoulli_density(double p) {
    require(p >= 0.0 && p <= 1.0, "bernoulli parameter must lie in [0, 1]");
    return [p](double x) {
        if (x == 1.0) return p;
        if (x == 0.0) return 1.0 - p;
        return 0.0;
    };
}

DensityFn uniform_density(double lo, double hi) {
    require(std::isfinite(lo) && std::isfinite(hi) && hi > lo,
            "uniform density needs lo < hi");
    const double h = 1.0 / (hi - lo);
    return [lo, hi, h](double x) { return (x >= lo && x <= hi) ? h : 0.0; };
}

DensityFn piecewise_constant_density(std::vector<double> edges,
                                     std::vector<double> values) {
    require(edges.size() >= 2 && values.size() + 1 == edges.size(),
            "piecewise density needs n+1 edges for n values");
    for (std::size_t i = 0; i + 1 < edges.size(); ++i)
        require(edges[i] < edges[i + 1], "piecewise edges must increase");
    for (double v : values)
        require(v >= 0.0, "piecewise density values must be nonnegative");
    return [edges = std::move(edges), values = std::move(values)](double x) {
        if (x < edges.front() || x >= edges.back()) return 0.0;
        const auto it = std::upper_bound(edges.begin(), edges.end(), x);
        return values[static_cast<std::size_t>(it - edges.begin()) - 1];
    };
}

DiscreteDist::DiscreteDist(std::vector<double> pts, std::vector<double> ms)
    : points(std::move(pts)), masses(std::move(ms)) {
    require(!points.empty() && points.size() == masses.size(),
            "discrete distribution needs matching nonempty points and masses");
    double total = 0.0;
    for (double m : masses) {
        require(m >= 0.0, "discrete distribution masses must be nonnegative");
        total += m;
    }
    require(std::abs(total - 1.0) <= 1e-12,
            "discrete distribution masses must sum to 1");
    auto sorted = points;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i)
        require(sorted[i] != sorted[i + 1],
                "discrete distribution points must be distinct");
}

double DiscreteDist::mean() const {
    double acc = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) acc += points[i] * masses[i];
    return acc;
}

EValue gaussian_lr_e(const std::vector<double>& sample, double mu) {
    require(!sample.empty(), "sample must be nonempty");
    const double n = static_cast<double>(sample.size());
    return EValue(std::exp(mu * sample_sum(sample) - n * mu * mu / 2.0));
}

EValue gaussian_two_sided_e(const std::vector<double>& sample, double delta) {
    require(!sample.empty(), "sample must be nonempty");
    require(delta > 0.0, "two-sided alternative scale must be positive");
    const double z = sample_sum(sample) / std::sqrt(static_cast<double>(sample.size()));
    const double drift = delta * delta / 2.0;
    return EValue(0.5 * (std::exp(delta * z - drift) + std::exp(-delta * z - drift)));
}

EValue bernoulli_lr_e(const std::vector<double>& sample, double p, double q) {
    require(!sample.empty(), "sample must be nonempty");
    require(p > 0.0 && p < 1.0 && q > 0.0 && q < 1.0,
            "bernoulli parameters must lie in (0, 1)");
    double ones = 0.0;
    for (double v : sample) {
        require(v == 0.0 || v == 1.0, "bernoulli sample entries must be 0 or 1");
        ones += v;
    }
    const double n = static_cast<double>(sample.size());
    const double log_e = ones * std::log(q / p) + (n - ones) * std::log((1.0 - q) / (1.0 - p));
    return EValue(std::exp(log_e));
}

EValue soft_rank_e(const std::vector<double>& scores) {
    require(!scores.empty(), "score sequence must be nonempty");
    double total = 0.0;
    for (double r : scores) {
        require(r >= 0.0, "scores must be nonnegative");
        total += r;
    }
    if (total == 0.0) return EValue(1.0);
    return EValue(static_cast<double>(scores.size()) * scores.front() / total);
}

EValue symmetry_e(double z, const DensityFn& q) {
    const double qz = q(z);
    const double qm = q(-z);
    require(qz >= 0.0 && qm >= 0.0, "density values must be nonnegative");
    if (qz == 0.0) return EValue(0.0);
    return EValue(2.0 * qz / (qz + qm));
}

EValue mean_variance_e(double z, double mu, double sigma, double lambda,
                       MeanVarKind kind) {
    require(lambda >= 0.0 && lambda <= 1.0, "mixing weight must lie in [0, 1]");
    require(sigma > 0.0, "sigma must be positive");
    if (kind == MeanVarKind::mean_only) {
        require(mu > 0.0, "mean bound must be positive");
        require(z >= 0.0, "mean test requires nonnegative observations");
        return EValue(1.0 - lambda + lambda * z / mu);
    }
    return EValue(1.0 - lambda + lambda * z * z / (mu * mu + sigma * sigma));
}

EValue subgaussian_e(double z, double lambda, bool two_sided) {
    const double drift = lambda * lambda / 2.0;
    if (!two_sided) {
        require(lambda >= 0.0, "one-sided bet requires lambda >= 0");
        return EValue(std::exp(lambda * z - drift));
    }
    return EValue(0.5 * (std::exp(lambda * z - drift) + std::exp(-lambda * z - drift)));
}

double LrBoundNumeraire::operator()(double x) const {
    return std::max(x, z0) / gamma;
}

LrBoundNumeraire lr_bound_numeraire(const DiscreteDist& q_over_p0, double gamma) {
    require(gamma >= 1.0, "cap level must be at least 1");
    for (double p : q_over_p0.points)
        require(p >= 0.0, "likelihood ratio values must be nonnegative");

    // Decreasing rearrangement of the ratio, truncated to total width 1/gamma.
    std::vector<std::pair<double, double>> seg;  // (value, width)
    {
        std::vector<std::size_t> idx(q_over_p0.points.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return q_over_p0.points[a] > q_over_p0.points[b];
        });
        double remaining = 1.0 / gamma;
        for (std::size_t i : idx) {
            if (remaining <= 0.0) break;
            const double w = std::min(q_over_p0.masses[i], remaining);
            if (w > 0.0) seg.emplace_back(q_over_p0.points[i], w);
            remaining -= w;
        }
    }

    const double budget = 1.0 / gamma;
    double head = 0.0;  // integral of the segments kept above the threshold
    for (const auto& [v, w] : seg) head += v * w;
    if (head > 1.0 + 1e-12)
        throw infeasible_error("capped ratio mass already exceeds 1; no threshold exists");
    if (head >= 1.0 - 1e-12) return {0.0, gamma};

    // Raise z0 past successive segment values until the flat part makes up
    // the deficit; within each bracket the integral is linear in z0.
    double kept_int = head;
    double kept_w = budget;
    for (std::size_t k = seg.size(); k-- > 0;) {
        kept_int -= seg[k].first * seg[k].second;
        kept_w -= seg[k].second;
        const double lo = seg[k].first;
        const double hi = (k == 0) ? kInf : seg[k - 1].first;
        const double slope = budget - kept_w;
        if (slope <= 0.0) continue;
        const double z = (1.0 - kept_int) / slope;
        if (z >= lo - 1e-12 && z <= hi + 1e-12)
            return {std::max(z, 0.0), gamma};
    }
    throw infeasible_error("no threshold solves the capped ratio equation");
}

double bounded_mean_numeraire_lambda(double mu) {
    require(mu > 0.0 && mu < 0.5, "mean bound must lie in (0, 1/2)");
    // Root of log(1 + lambda(1-mu)) - log(1 - lambda mu) - lambda = 0; the
    // log1p form stays accurate where the raw quotient cancels near 0.
    const auto g = [mu](double lam) {
        return std::log1p(lam * (1.0 - mu)) - std::log1p(-lam * mu) - lam;
    };
    double lo = 1e-12;
    double hi = (1.0 / mu) * (1.0 - 1e-12);
    require(g(lo) < 0.0 && g(hi) > 0.0, "bet equation bracket failed");
    for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) < 0.0 ? lo : hi) = mid;
    }
    const double lam = 0.5 * (lo + hi);
    const double lhs = (1.0 + lam * (1.0 - mu)) / (1.0 - lam * mu);
    // Both sides grow like e^lambda, so the residual test must be relative.
    const double resid = lhs - std::exp(lam);
    if (std::abs(resid) > 1e-10 * std::max(1.0, lhs))
        throw infeasible_error("bet equation bisection did not converge");
    return lam;
}

EValue mlr_numeraire_e(double z, const RealFn& logratio) {
    return EValue(std::exp(logratio(z)));
}

EValue t_test_e(const std::vector<double>& sample, double c) {
    require(!sample.empty(), "sample must be nonempty");
    require(c > 0.0, "prior scale must be positive");
    const double n = static_cast<double>(sample.size());
    if (sample.size() == 1) return EValue(1.0);
    double s = 0.0, v = 0.0;
    for (double x : sample) {
        s += x;
        v += x * x;
    }
    const double a = (n + c * c) * v;
    const double denom = a - s * s;
    if (denom <= 0.0)
        throw infeasible_error("degenerate sample: t-statistic denominator is zero");
    const double log_e = 0.5 * std::log(c * c / (n + c * c)) +
                         (n / 2.0) * (std::log(a) - std::log(denom));
    return EValue(std::exp(log_e));
}

EValue changepoint_e(const std::vector<double>& sample, const RealFn& logratio) {
    require(!sample.empty(), "sample must be nonempty");
    std::vector<double> suffix_logs(sample.size());
    double acc = 0.0;
    for (std::size_t k = sample.size(); k-- > 0;) {
        acc += logratio(sample[k]);
        suffix_logs[k] = acc;
    }
    const double log_mix =
        log_sum_exp(suffix_logs) - std::log(static_cast<double>(sample.size()));
    return EValue(std::exp(log_mix));
}

EValue clt_asymptotic_e(const std::vector<double>& sample, double lambda,
                        bool two_sided, CltDenom denom) {
    require(!sample.empty(), "sample must be nonempty");
    const double n = static_cast<double>(sample.size());
    const double mean = sample_sum(sample) / n;
    double s;
    if (denom == CltDenom::root_mean_square) {
        double v = 0.0;
        for (double x : sample) v += x * x;
        s = std::sqrt(v / n);
    } else {
        require(sample.size() >= 2, "sample sd needs at least two points");
        double v = 0.0;
        for (double x : sample) v += (x - mean) * (x - mean);
        s = std::sqrt(v / (n - 1.0));
    }
    if (s == 0.0)
        throw infeasible_error("degenerate sample: zero scale estimate");
    const double t = lambda * std::sqrt(n) * mean / s;
    const double drift = lambda * lambda / 2.0;
    if (!two_sided) return EValue(std::exp(t - drift));
    return EValue(0.5 * (std::exp(t - drift) + std::exp(-t - drift)));
}

EValue compound_separable_e(double x,
                            const std::vector<DensityFn>& null_densities,
                            const std::vector<DensityFn>& alt_densities) {
    require(!null_densities.empty() &&
                null_densities.size() == alt_densities.size(),
            "density lists must be nonempty and of equal length");
    double num = 0.0, den = 0.0;
    for (const auto& q : alt_densities) {
        const double v = q(x);
        require(v >= 0.0, "density values must be nonnegative");
        num += v;
    }
    for (const auto& p : null_densities) {
        const double v = p(x);
        require(v >= 0.0, "density values must be nonnegative");
        den += v;
    }
    if (den == 0.0) return EValue(num == 0.0 ? 1.0 : kInf);
    return EValue(num / den);
}

std::vector<EValue> compound_t_e(const std::vector<double>& group_sums_of_squares,
                                 const std::vector<double>& group_variances_hat,
                                 std::size_t K) {
    require(K >= 1 && group_sums_of_squares.size() == K &&
                group_variances_hat.size() == K,
            "group statistics must both have length K");
    double total = 0.0;
    for (double v : group_variances_hat) {
        require(v >= 0.0, "variance estimates must be nonnegative");
        total += v;
    }
    require(total > 0.0, "total variance estimate must be positive");
    for (double ss : group_sums_of_squares)
        require(ss >= 0.0, "sums of squares must be nonnegative");
    std::vector<EValue> out;
    out.reserve(K);
    for (double ss : group_sums_of_squares)
        out.emplace_back(static_cast<double>(K) * ss / total);
    return out;
}

}  // namespace evk
