#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "evalkit/core.hpp"
#include "evalkit/sets.hpp"

namespace evk {

// ---------------------------------------------------------------------------
// Confidence sets from e-values and robust combination of arbitrary sets.
// ---------------------------------------------------------------------------

// Confidence set {theta in grid : evaluator(theta, alpha) < 1/alpha}. The
// evaluator must return a nonnegative e-value for the point null "theta is
// the truth" (infinity allowed). Strict inequality: a point whose e-value
// equals the threshold exactly is excluded. Output carries members (grid
// indices), interval hulls of contiguous runs, and level 1 - alpha.
UncertaintySet eci_from_evaluator(const std::vector<double>& theta_grid,
                                  const std::function<double(double, double)>& evaluator,
                                  double alpha);

// A family of confidence sets indexed by an ascending alpha grid, shrinking
// as alpha grows. validate() throws std::domain_error on violations.
struct ConfidenceFamily {
    std::vector<double> alphas;
    std::vector<UncertaintySet> sets;

    void validate() const;
};

struct CalibratedSet {
    UncertaintySet set;
    double target_alpha = 0.0;     // f_inverse(1/alpha), before grid snapping
    bool truncated_to_grid = false;  // target fell below the family's range
};

// Widens a confidence family through a p-to-e calibrator: the set at level
// alpha is the family's set at f_inverse(1/alpha). The grid lookup rounds
// the target DOWN (sets grow as alpha shrinks, so rounding down preserves
// the guarantee). A target below the grid returns the largest available
// set with truncated_to_grid set.
CalibratedSet eci_calibrate(const ConfidenceFamily& family, const CalibratorSpec& spec,
                            double alpha);

// Per-selection confidence levels delta*|S|/K that bound the false coverage
// rate at delta for any selection rule; returned parallel to `selected`.
std::vector<double> eby_levels(const std::vector<std::size_t>& selected, std::size_t K,
                               double delta);

// ---------------------------------------------------------------------------
// Majority-vote merging. All operations take sets of one common kind and
// keep points winning a strict ">" vote among the inputs. Output `level`
// is derived from the input levels when all are known, else left at 0.
// ---------------------------------------------------------------------------

// Points covered by a fraction > tau of the sets, tau in [0,1). At the
// default tau = 1/2 with `sharpened_level`, the reported miscoverage for
// K sets at input miscoverage a is a*K/ceil(K/2) (equals 2a only for even
// K); without it the generic a/(1-tau) is used.
UncertaintySet majority_vote(const std::vector<UncertaintySet>& sets, double tau = 0.5,
                             bool sharpened_level = true);

// Intersection of the strict majority sets of every prefix 1..k. Valid at
// the same level as the plain majority when the sets are exchangeable;
// always a subset of it.
UncertaintySet mv_exchangeable(const std::vector<UncertaintySet>& sets);

// mv_exchangeable after reordering by `permutation` (a bijection on
// {0..K-1}); randomizing the order restores exchangeability.
UncertaintySet mv_permuted(const std::vector<UncertaintySet>& sets,
                           const std::vector<std::size_t>& permutation);

// Randomized vote thresholds, u uniform on [0,1]:
//   half_plus_u: fraction > 1/2 + u/2 (shrinks the majority set, same level)
//   plain_u:     fraction > u (grows it, at the inputs' own level)
enum class VoteRandomization { half_plus_u, plain_u };

UncertaintySet mv_randomized(const std::vector<UncertaintySet>& sets, double u,
                             VoteRandomization variant);

// Weighted vote: keeps points with sum of weights of covering sets
// > 1/2 + u/2. Weights must be nonnegative and sum to 1 (1e-12 slack).
// Uniform weights with u = 0 recover majority_vote.
UncertaintySet mv_weighted(const std::vector<UncertaintySet>& sets,
                           const std::vector<double>& weights, double u);

// Merges equal-width intervals (1e-9 relative slack) into one interval of
// the same width centered at the median midpoint for odd K; for even K,
// the intersection of the two middle intervals (possibly empty). Always
// contains the strict majority set; equals it when all inputs intersect.
UncertaintySet median_of_midpoints(const std::vector<Interval>& intervals);

// ---------------------------------------------------------------------------
// Median-of-means with repeated bucketing.
// ---------------------------------------------------------------------------

struct MomomResult {
    double estimate = 0.0;            // final stabilized value
    std::vector<double> trajectory;   // running medians, one per repetition
};

// Repeats the median-of-means estimator `repetitions` times over random
// bucketings of `data` into `buckets` groups and takes the running median
// of the per-repetition estimates (lower median throughout). repetitions
// = 1 is the plain median-of-means.
MomomResult momom(const std::vector<double>& data, std::size_t buckets,
                  std::size_t repetitions, std::uint64_t seed);

// Running intersection of prefix majority votes over a stream of sets:
// after t pushes, current() is the intersection of the strict majority
// sets of all prefixes, valid simultaneously over time for exchangeable
// streams at twice the input miscoverage.
class RunningMajorityVote {
  public:
    const UncertaintySet& push(const UncertaintySet& s);
    const UncertaintySet& current() const { return current_; }
    std::size_t count() const { return seen_.size(); }

  private:
    std::vector<UncertaintySet> seen_;
    UncertaintySet current_;
};

// Size diagnostics for a vote merge: the merged set's measure never
// exceeds (1/(K tau)) * sum of input measures, and for interval inputs
// with tau >= 1/2 it also never exceeds the widest input.
struct VoteSizeDiagnostics {
    double merged_measure = 0.0;
    double mean_input_measure = 0.0;
    double max_input_measure = 0.0;
    double sum_bound = 0.0;         // (1/(K*tau)) * sum of input measures
    bool sum_bound_ok = false;
    bool max_bound_applies = false; // interval inputs and tau >= 1/2
    bool max_bound_ok = false;
};

VoteSizeDiagnostics mv_size_check(const std::vector<UncertaintySet>& sets, double tau);

}  // namespace evk
