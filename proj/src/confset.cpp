#include "evalkit/confset.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <optional>
#include <stdexcept>

#include "evalkit/rng.hpp"
#include "evalkit/sets.hpp"

namespace evk {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw domain_error(msg);
}

SetKind common_kind(const std::vector<UncertaintySet>& sets) {
    require(!sets.empty(), "set merge needs at least one input set");
    const SetKind kind = sets.front().kind;
    for (const auto& s : sets)
        require(s.kind == kind, "set merge: inputs mix interval and label sets");
    return kind;
}

// Weighted strict-threshold vote over closed-interval unions. The vote
// function is constant on every input endpoint and on every open gap
// between consecutive endpoints, so evaluating it on those atoms gives
// the winning set exactly.
UncertaintySet vote_intervals(const std::vector<UncertaintySet>& sets,
                              const std::vector<double>& weights, double threshold) {
    std::vector<double> coords;
    for (const auto& s : sets)
        for (const auto& iv : s.intervals) {
            coords.push_back(iv.lo);
            coords.push_back(iv.hi);
        }
    std::sort(coords.begin(), coords.end());
    coords.erase(std::unique(coords.begin(), coords.end()), coords.end());

    UncertaintySet out;
    if (coords.empty()) return out;

    auto point_weight = [&](double x) {
        double w = 0.0;
        for (std::size_t k = 0; k < sets.size(); ++k)
            if (sets[k].contains(x)) w += weights[k];
        return w;
    };
    auto gap_weight = [&](double a, double b) {
        double w = 0.0;
        for (std::size_t k = 0; k < sets.size(); ++k)
            for (const auto& iv : sets[k].intervals)
                if (iv.lo <= a && b <= iv.hi) {
                    w += weights[k];
                    break;
                }
        return w;
    };

    // Pieces are closed, so an endpoint's vote is at least either adjacent
    // gap's vote: winning gaps always come with winning endpoints, and the
    // winning set closes up into runs [coords[i], coords[j]] (j == i for an
    // isolated point). A run can therefore never be open at an unselected
    // point, which keeps the state machine below two-state.
    bool in_run = false;
    double run_lo = 0.0;
    for (std::size_t i = 0; i < coords.size(); ++i) {
        if (!in_run && point_weight(coords[i]) > threshold) {
            in_run = true;
            run_lo = coords[i];
        }
        const bool gap_wins = i + 1 < coords.size() &&
                              gap_weight(coords[i], coords[i + 1]) > threshold;
        if (in_run && !gap_wins) {
            out.intervals.push_back({run_lo, coords[i]});
            in_run = false;
        }
    }
    return out;
}

UncertaintySet vote_labels(const std::vector<UncertaintySet>& sets,
                           const std::vector<double>& weights, double threshold) {
    std::vector<std::vector<std::size_t>> sorted(sets.size());
    std::vector<std::size_t> pool;
    for (std::size_t k = 0; k < sets.size(); ++k) {
        sorted[k] = sets[k].members;
        std::sort(sorted[k].begin(), sorted[k].end());
        pool.insert(pool.end(), sorted[k].begin(), sorted[k].end());
    }
    std::sort(pool.begin(), pool.end());
    pool.erase(std::unique(pool.begin(), pool.end()), pool.end());

    UncertaintySet out;
    out.kind = SetKind::label_subset;
    for (std::size_t idx : pool) {
        double w = 0.0;
        for (std::size_t k = 0; k < sets.size(); ++k)
            if (std::binary_search(sorted[k].begin(), sorted[k].end(), idx)) w += weights[k];
        if (w > threshold) out.members.push_back(idx);
    }
    return out;
}

UncertaintySet vote_merge(const std::vector<UncertaintySet>& sets,
                          const std::vector<double>& weights, double threshold) {
    return common_kind(sets) == SetKind::interval_union
               ? vote_intervals(sets, weights, threshold)
               : vote_labels(sets, weights, threshold);
}

std::vector<double> uniform_weights(std::size_t K) {
    return std::vector<double>(K, 1.0 / static_cast<double>(K));
}

// Largest miscoverage among the inputs, or nothing if any input's level
// is unrecorded; merged-set guarantees scale off the worst input.
std::optional<double> worst_alpha(const std::vector<UncertaintySet>& sets) {
    double a = 0.0;
    for (const auto& s : sets) {
        if (s.level <= 0.0 || s.level > 1.0) return std::nullopt;
        a = std::max(a, 1.0 - s.level);
    }
    return a;
}

double level_from_miscoverage(double mis) {
    return std::clamp(1.0 - mis, 0.0, 1.0);
}

double lower_median(std::vector<double>& v) {
    const std::size_t nth = (v.size() - 1) / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(nth), v.end());
    return v[nth];
}

}  // namespace

UncertaintySet make_interval_union(std::vector<Interval> pieces) {
    std::erase_if(pieces, [](const Interval& iv) { return iv.hi < iv.lo; });
    std::sort(pieces.begin(), pieces.end(),
              [](const Interval& a, const Interval& b) {
                  return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi);
              });
    UncertaintySet out;
    for (const auto& iv : pieces) {
        if (!out.intervals.empty() && iv.lo <= out.intervals.back().hi)
            out.intervals.back().hi = std::max(out.intervals.back().hi, iv.hi);
        else
            out.intervals.push_back(iv);
    }
    return out;
}

UncertaintySet intersect_sets(const UncertaintySet& a, const UncertaintySet& b) {
    require(a.kind == b.kind, "intersect_sets: inputs mix interval and label sets");
    UncertaintySet out;
    out.kind = a.kind;
    if (a.kind == SetKind::label_subset) {
        std::set_intersection(a.members.begin(), a.members.end(), b.members.begin(),
                              b.members.end(), std::back_inserter(out.members));
        return out;
    }
    std::size_t i = 0, j = 0;
    while (i < a.intervals.size() && j < b.intervals.size()) {
        const Interval& x = a.intervals[i];
        const Interval& y = b.intervals[j];
        const double lo = std::max(x.lo, y.lo);
        const double hi = std::min(x.hi, y.hi);
        if (lo <= hi) out.intervals.push_back({lo, hi});
        (x.hi < y.hi ? i : j) += 1;
    }
    return out;
}

bool set_subset(const UncertaintySet& inner, const UncertaintySet& outer) {
    require(inner.kind == outer.kind, "set_subset: inputs mix interval and label sets");
    if (inner.kind == SetKind::label_subset)
        return std::includes(outer.members.begin(), outer.members.end(),
                             inner.members.begin(), inner.members.end());
    // Both lists are sorted and merged, so each inner piece (including
    // width-0 points) must sit inside a single outer piece.
    std::size_t j = 0;
    for (const Interval& iv : inner.intervals) {
        while (j < outer.intervals.size() && outer.intervals[j].hi < iv.lo) ++j;
        if (j == outer.intervals.size() || outer.intervals[j].lo > iv.lo ||
            iv.hi > outer.intervals[j].hi)
            return false;
    }
    return true;
}

double set_measure(const UncertaintySet& s) {
    return s.kind == SetKind::label_subset ? static_cast<double>(s.members.size())
                                           : s.total_width();
}

UncertaintySet eci_from_evaluator(const std::vector<double>& theta_grid,
                                  const std::function<double(double, double)>& evaluator,
                                  double alpha) {
    require(!theta_grid.empty(), "parameter grid is empty");
    require(alpha > 0.0 && alpha < 1.0, "level must be in (0,1)");
    const double cut = 1.0 / alpha;
    UncertaintySet out;
    for (std::size_t j = 0; j < theta_grid.size(); ++j) {
        const double e = evaluator(theta_grid[j], alpha);
        require(e >= 0.0, "evaluator must return a nonnegative e-value");
        if (e < cut) out.members.push_back(j);
    }
    for (std::size_t i = 0; i < out.members.size();) {
        std::size_t j = i;
        while (j + 1 < out.members.size() && out.members[j + 1] == out.members[j] + 1) ++j;
        out.intervals.push_back({theta_grid[out.members[i]], theta_grid[out.members[j]]});
        i = j + 1;
    }
    out.level = 1.0 - alpha;
    return out;
}

void ConfidenceFamily::validate() const {
    require(!alphas.empty(), "confidence family is empty");
    require(alphas.size() == sets.size(), "confidence family: one set per level required");
    for (double a : alphas) require(a > 0.0 && a <= 1.0, "family levels must be in (0,1]");
    for (std::size_t i = 1; i < alphas.size(); ++i) {
        require(alphas[i] > alphas[i - 1], "family levels must be strictly increasing");
        require(set_subset(sets[i], sets[i - 1]), "family sets must shrink as the level grows");
    }
}

CalibratedSet eci_calibrate(const ConfidenceFamily& family, const CalibratorSpec& spec,
                            double alpha) {
    family.validate();
    spec.validate();
    require(alpha > 0.0 && alpha < 1.0, "level must be in (0,1)");
    CalibratedSet out;
    out.target_alpha = calibrator_inverse(spec, 1.0 / alpha);
    // Snap DOWN to the grid: the family grows as its level shrinks, so a
    // smaller level only widens the set and the guarantee survives.
    auto it = std::upper_bound(family.alphas.begin(), family.alphas.end(), out.target_alpha);
    if (it == family.alphas.begin()) {
        out.set = family.sets.front();
        out.truncated_to_grid = true;
    } else {
        out.set = family.sets[static_cast<std::size_t>(it - family.alphas.begin()) - 1];
    }
    out.set.level = 1.0 - alpha;
    return out;
}

std::vector<double> eby_levels(const std::vector<std::size_t>& selected, std::size_t K,
                               double delta) {
    require(K >= 1, "needs at least one coordinate");
    require(delta > 0.0 && delta < 1.0, "false coverage budget must be in (0,1)");
    require(selected.size() <= K, "more selections than coordinates");
    std::vector<char> seen(K, 0);
    for (std::size_t idx : selected) {
        require(idx < K, "selection index out of range");
        require(!seen[idx], "duplicate selection index");
        seen[idx] = 1;
    }
    const double a = delta * static_cast<double>(selected.size()) / static_cast<double>(K);
    return std::vector<double>(selected.size(), a);
}

UncertaintySet majority_vote(const std::vector<UncertaintySet>& sets, double tau,
                             bool sharpened_level) {
    require(tau >= 0.0 && tau < 1.0, "vote threshold must be in [0,1)");
    const std::size_t K = sets.size();
    UncertaintySet out = vote_merge(sets, uniform_weights(K), tau);
    if (auto a = worst_alpha(sets)) {
        // At tau = 1/2 the exact miscoverage multiplier is K/ceil(K/2),
        // which beats the generic 1/(1-tau) = 2 for odd K.
        const double mis = (sharpened_level && tau == 0.5)
                               ? *a * static_cast<double>(K) /
                                     std::ceil(static_cast<double>(K) / 2.0)
                               : *a / (1.0 - tau);
        out.level = level_from_miscoverage(mis);
    }
    return out;
}

UncertaintySet mv_exchangeable(const std::vector<UncertaintySet>& sets) {
    require(!sets.empty(), "set merge needs at least one input set");
    common_kind(sets);
    UncertaintySet acc;
    std::vector<UncertaintySet> prefix;
    prefix.reserve(sets.size());
    for (std::size_t k = 0; k < sets.size(); ++k) {
        prefix.push_back(sets[k]);
        UncertaintySet m = vote_merge(prefix, uniform_weights(k + 1), 0.5);
        acc = k == 0 ? std::move(m) : intersect_sets(acc, m);
    }
    if (auto a = worst_alpha(sets)) acc.level = level_from_miscoverage(2.0 * *a);
    return acc;
}

UncertaintySet mv_permuted(const std::vector<UncertaintySet>& sets,
                           const std::vector<std::size_t>& permutation) {
    require(permutation.size() == sets.size(), "permutation length must match set count");
    std::vector<char> seen(sets.size(), 0);
    for (std::size_t p : permutation) {
        require(p < sets.size(), "permutation entry out of range");
        require(!seen[p], "permutation entry repeated");
        seen[p] = 1;
    }
    std::vector<UncertaintySet> reordered;
    reordered.reserve(sets.size());
    for (std::size_t p : permutation) reordered.push_back(sets[p]);
    return mv_exchangeable(reordered);
}

UncertaintySet mv_randomized(const std::vector<UncertaintySet>& sets, double u,
                             VoteRandomization variant) {
    require(u >= 0.0 && u <= 1.0, "randomizer must be in [0,1]");
    const std::size_t K = sets.size();
    const bool tighter = variant == VoteRandomization::half_plus_u;
    const double threshold = tighter ? 0.5 + u / 2.0 : u;
    UncertaintySet out = vote_merge(sets, uniform_weights(K), threshold);
    if (auto a = worst_alpha(sets))
        out.level = level_from_miscoverage(tighter ? 2.0 * *a : *a);
    return out;
}

UncertaintySet mv_weighted(const std::vector<UncertaintySet>& sets,
                           const std::vector<double>& weights, double u) {
    require(weights.size() == sets.size(), "one weight per set required");
    require(u >= 0.0 && u <= 1.0, "randomizer must be in [0,1]");
    double total = 0.0;
    for (double w : weights) {
        require(w >= 0.0, "weights must be nonnegative");
        total += w;
    }
    require(std::abs(total - 1.0) <= 1e-12, "weights must sum to one");
    UncertaintySet out = vote_merge(sets, weights, 0.5 + u / 2.0);
    // Guarantee is weight-averaged: miscoverage at most 2 * sum w_k a_k.
    double mis = 0.0;
    bool known = true;
    for (std::size_t k = 0; k < sets.size(); ++k) {
        if (sets[k].level <= 0.0 || sets[k].level > 1.0) {
            known = false;
            break;
        }
        mis += weights[k] * (1.0 - sets[k].level);
    }
    if (known) out.level = level_from_miscoverage(2.0 * mis);
    return out;
}

UncertaintySet median_of_midpoints(const std::vector<Interval>& intervals) {
    require(!intervals.empty(), "needs at least one interval");
    double wmax = 0.0;
    for (const auto& iv : intervals) {
        require(iv.hi >= iv.lo, "intervals must be nonempty");
        wmax = std::max(wmax, iv.width());
    }
    for (const auto& iv : intervals)
        require(wmax - iv.width() <= 1e-9 * wmax, "intervals must share a common width");

    std::vector<std::size_t> order(intervals.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double ma = intervals[a].lo + intervals[a].hi;
        const double mb = intervals[b].lo + intervals[b].hi;
        return ma < mb || (ma == mb && a < b);
    });

    const std::size_t K = intervals.size();
    UncertaintySet out;
    if (K % 2 == 1) {
        out.intervals.push_back(intervals[order[K / 2]]);
    } else {
        // Even count: the two middle intervals need not overlap, in which
        // case the merge is empty.
        const Interval& a = intervals[order[K / 2 - 1]];
        const Interval& b = intervals[order[K / 2]];
        const double lo = std::max(a.lo, b.lo);
        const double hi = std::min(a.hi, b.hi);
        if (lo <= hi) out.intervals.push_back({lo, hi});
    }
    return out;
}

MomomResult momom(const std::vector<double>& data, std::size_t buckets,
                  std::size_t repetitions, std::uint64_t seed) {
    const std::size_t n = data.size();
    require(n >= 1, "needs data");
    require(buckets >= 1, "needs at least one bucket");
    require(buckets <= n, "more buckets than observations");
    require(repetitions >= 1, "needs at least one repetition");

    Rng rng(seed, "momom");
    MomomResult res;
    res.trajectory.reserve(repetitions);
    std::vector<double> estimates;
    estimates.reserve(repetitions);
    std::vector<double> means(buckets), scratch;
    for (std::size_t rep = 0; rep < repetitions; ++rep) {
        const auto perm = rng.permutation(n);
        for (std::size_t b = 0; b < buckets; ++b) {
            const std::size_t lo = b * n / buckets;
            const std::size_t hi = (b + 1) * n / buckets;
            double sum = 0.0;
            for (std::size_t i = lo; i < hi; ++i) sum += data[perm[i]];
            means[b] = sum / static_cast<double>(hi - lo);
        }
        scratch = means;
        estimates.push_back(lower_median(scratch));
        scratch = estimates;
        res.trajectory.push_back(lower_median(scratch));
    }
    res.estimate = res.trajectory.back();
    return res;
}

const UncertaintySet& RunningMajorityVote::push(const UncertaintySet& s) {
    seen_.push_back(s);
    UncertaintySet m = vote_merge(seen_, uniform_weights(seen_.size()), 0.5);
    current_ = seen_.size() == 1 ? std::move(m) : intersect_sets(current_, m);
    if (auto a = worst_alpha(seen_)) current_.level = level_from_miscoverage(2.0 * *a);
    return current_;
}

VoteSizeDiagnostics mv_size_check(const std::vector<UncertaintySet>& sets, double tau) {
    require(tau >= 0.0 && tau < 1.0, "vote threshold must be in [0,1)");
    const SetKind kind = common_kind(sets);
    const UncertaintySet merged = vote_merge(sets, uniform_weights(sets.size()), tau);

    VoteSizeDiagnostics d;
    d.merged_measure = set_measure(merged);
    double sum = 0.0;
    for (const auto& s : sets) {
        const double m = set_measure(s);
        sum += m;
        d.max_input_measure = std::max(d.max_input_measure, m);
    }
    d.mean_input_measure = sum / static_cast<double>(sets.size());
    d.sum_bound = tau > 0.0 ? sum / (static_cast<double>(sets.size()) * tau)
                            : std::numeric_limits<double>::infinity();
    const double slack = 1e-9 * std::max(1.0, sum);
    d.sum_bound_ok = d.merged_measure <= d.sum_bound + slack;
    d.max_bound_applies = kind == SetKind::interval_union && tau >= 0.5;
    d.max_bound_ok = !d.max_bound_applies || d.merged_measure <= d.max_input_measure + slack;
    return d;
}

}  // namespace evk
