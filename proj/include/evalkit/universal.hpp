#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "evalkit/core.hpp"
#include "evalkit/sets.hpp"

namespace evk {

// Fold labels for one data split: 0 = evaluation fold (the likelihood-ratio
// product runs over it, and the null MLE is fit on it), 1 = the fold the
// alternative is fit on.
struct SplitPlan {
    std::vector<std::uint8_t> assignment;
    std::uint64_t seed = 0;
    double fraction = 0.5;  // expected share of indices in the evaluation fold

    SplitPlan swapped() const;
};

// Per-index independent coin flips; redraws (with a derived seed) in the
// rare event one fold comes out empty, so the invariant always holds.
SplitPlan make_split_plan(std::size_t n, double fraction, std::uint64_t seed);

struct FittedModel {
    std::function<double(double)> log_density;
    std::string metadata;
};

using Fitter = std::function<FittedModel(const std::vector<double>&)>;

// exp(sum over the evaluation fold of log q1(x) - log p0(x)), where q1 is
// fit on the other fold and p0 is the null MLE fit on the evaluation fold
// itself. Valid at level alpha via Markov regardless of the fits.
EValue split_lrt_e(const std::vector<double>& sample, const SplitPlan& plan,
                   const Fitter& fit_alternative, const Fitter& fit_null_mle);

// Average of the plan's e-value and the one with the folds swapped.
EValue crossfit_e(const std::vector<double>& sample, const SplitPlan& plan,
                  const Fitter& fit_alternative, const Fitter& fit_null_mle);

// Arithmetic mean of B independent-split e-values; split b uses the plan
// seeded by derive_seed(seed, "split", b), so the B computations can run in
// any order (reduce in index order to keep results bit-identical).
EValue subsampled_e(const std::vector<double>& sample, std::size_t B,
                    std::uint64_t seed, double fraction,
                    const Fitter& fit_alternative, const Fitter& fit_null_mle);

// Rejects at the first prefix whose running average reaches 1/alpha; the
// number of splits may then be chosen adaptively. Returns (rejected, index
// of the crossing prefix, or the stream length when none crossed).
std::pair<bool, std::size_t> subsampled_lrt_sequential_test(
    const std::vector<double>& split_e_stream, double alpha);

// {theta on the grid : product over the evaluation fold of q1/p_theta is
// below 1/alpha}. Returns selected grid indices plus the interval hull of
// each contiguous run.
UncertaintySet universal_confidence_set(
    const std::vector<double>& sample, const SplitPlan& plan,
    const Fitter& fit_alternative, const std::vector<double>& theta_grid,
    const std::function<double(double, double)>& log_likelihood, double alpha);

// Evaluation-fold share minimizing the expected squared radius of the
// Gaussian set; tends to 1/2 for large d and to 1 as alpha drops to 0.
double optimal_split_fraction(int d, double alpha);

// Shipped null-MLE / plug-in fitters.
Fitter gaussian_mean_fitter();           // N(sample mean, 1)
Fitter gaussian_mean_variance_fitter();  // N(sample mean, MLE variance)
Fitter bernoulli_fitter();
// Two-component Gaussian location mixture with known component weights and
// unit variances; EM with 200 iterations and 10 seeded random restarts.
Fitter mixture_location_fitter(double weight_first, std::uint64_t seed);

}  // namespace evk
