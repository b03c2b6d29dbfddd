#pragma once

#include <cstddef>
#include <vector>

#include "evalkit/common.hpp"

namespace evk {

// Closed interval [lo, hi]; a single point is lo == hi.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double x) const { return lo <= x && x <= hi; }
    double width() const { return hi - lo; }
};

enum class SetKind { interval_union, label_subset };

// A set reported by a confidence procedure. Interval procedures fill
// `intervals` (sorted, pairwise disjoint); grid/label procedures fill
// `members` with the selected indices and may add interval hulls of
// contiguous runs as a convenience. `level` records the coverage
// guarantee attached to the set when one is known; 0 means unspecified.
struct UncertaintySet {
    std::vector<Interval> intervals;
    std::vector<std::size_t> members;
    SetKind kind = SetKind::interval_union;
    double level = 0.0;

    bool empty() const { return intervals.empty() && members.empty(); }

    bool contains(double x) const {
        for (const auto& iv : intervals)
            if (iv.contains(x)) return true;
        return false;
    }

    double total_width() const {
        double w = 0.0;
        for (const auto& iv : intervals) w += iv.width();
        return w;
    }
};

// Normalizes a list of closed intervals: drops empties (hi < lo), sorts,
// and merges overlapping or touching pieces.
UncertaintySet make_interval_union(std::vector<Interval> pieces);

// Intersects two sets of the same kind.
UncertaintySet intersect_sets(const UncertaintySet& a, const UncertaintySet& b);

// True when every point of `inner` lies in `outer`. Exact on the stored
// representation: interval unions are compared piece by piece (so width-0
// pieces count), label subsets by index inclusion. Kinds must match.
bool set_subset(const UncertaintySet& inner, const UncertaintySet& outer);

// Lebesgue measure for interval unions, cardinality for label subsets.
double set_measure(const UncertaintySet& s);

}  // namespace evk
