#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "evalkit/common.hpp"

namespace evk {

// Nonnegative evidence value; infinity is a legal value and propagates.
struct EValue {
    double value = 1.0;
    EValue() = default;
    explicit EValue(double v) : value(v) {
        if (std::isnan(v) || v < 0.0)
            throw domain_error("e-value must be a nonnegative real or inf");
    }
    operator double() const { return value; }
};

// Values above 1 are allowed on construction; test operations cap at 1.
struct PValue {
    double value = 1.0;
    PValue() = default;
    explicit PValue(double v) : value(v) {
        if (std::isnan(v) || v < 0.0)
            throw domain_error("p-value must be a nonnegative real");
    }
    operator double() const { return value; }
};

enum class CalKind {
    power,           // kappa * p^(kappa-1), kappa in (0,1)
    mixture,         // (1 - p + p log p) / (p log^2 p)
    linear2,         // 2 (1 - p)+
    sqrtinv,         // p^(-1/2) - 1
    neglog,          // -log p
    all_or_nothing,  // 1{p <= alpha} / alpha
    bhy_truncation,  // T(alpha / (ell_K p)) / alpha with T(x) = K/ceil(K/x) 1{x>=1}
};

struct CalibratorSpec {
    CalKind kind = CalKind::sqrtinv;
    double kappa = 0.5;   // power only
    double alpha = 0.05;  // all_or_nothing / bhy_truncation
    int K = 1;            // bhy_truncation

    void validate() const;
};

CalibratorSpec parse_calibrator(const std::string& kind, double param, int K);

// f_spec(p): decreasing on [0,1], zero above 1, integral over [0,1] at most 1.
EValue calibrate_p_to_e(PValue p, const CalibratorSpec& spec);
// min(1, 1/e); this dominates every other admissible map in that direction.
PValue calibrate_e_to_p(EValue e);

// Exact value of the integral of f_spec over [0,1] via antiderivatives.
double calibrator_integral(const CalibratorSpec& spec);
// sup{p in [0,1] : f_spec(p) >= x}; sup of the empty set is 0.
double calibrator_inverse(const CalibratorSpec& spec, double x);

// sum_{k=1..K} 1/k
double harmonic_number(int K);

bool markov_test(EValue e, double alpha);
bool randomized_markov_test(EValue e, double alpha, double u);

// Rejects at the first prefix m with (e_1+...+e_m)/m >= 1/alpha. Valid when
// the caller can assert the sequence is exchangeable under the null.
std::optional<std::size_t> exchangeable_markov_test(
    const std::vector<double>& es, double alpha);

// Rejects iff first >= u/alpha or some running prefix mean of es >= 1/alpha.
bool eumi_test(EValue first, const std::vector<double>& es, double alpha,
               double u);

struct SignificanceGrid {
    std::array<double, 5> breakpoints{1.0, 3.16, 10.0, 31.6, 100.0};
    std::array<std::string, 6> labels{
        "null hypothesis is supported", "no more than a bare mention",
        "substantial",                  "strong",
        "very strong",                  "decisive"};
};

// Boundary values go to the lower category.
std::string jeffreys_label(EValue e, const SignificanceGrid& grid = {});

struct LossTable {
    std::vector<double> null_losses;  // L(0,d), strictly increasing in d
    double budget = 1.0;              // gamma

    void validate() const;
};

// max{d : L(0,d) <= budget * e}; throws infeasible_error if even d=0 fails.
std::size_t posthoc_decision(EValue e, const LossTable& losses);

}  // namespace evk
