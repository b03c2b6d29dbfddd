#pragma once

#include <vector>

#include "evalkit/core.hpp"

namespace evk {

// Shape families of null e-value distributions. The name says what is
// constrained: D / D_gt1 / U constrain the density of E itself (decreasing;
// decreasing with support in [1,inf); unimodal), the L-prefixed classes
// constrain the density of log E (S symmetric about 0, U unimodal, D
// decreasing with LD_gt0 restricted to [0,inf), US unimodal and symmetric),
// LN is lognormal with mean at most one, and E0 is no constraint at all.
enum class ShapeClass { E0, D, D_gt1, U, LS, LU, LD_gt0, LD, LUS, LN };

// Worst case of P(E >= 1/gamma) over a shape class. Exact for every class
// except LD and LUS, where only a bracket is known: `value` is then the
// safe upper end, `lower_bound` the other end, and `exact` is false.
struct WorstCaseCrossing {
    double value = 1.0;
    double lower_bound = 1.0;
    bool exact = true;
};

WorstCaseCrossing r_gamma(ShapeClass cls, double gamma);

// Smallest threshold t >= 1 whose worst-case crossing probability over the
// class is at most alpha; rejecting when E >= t is a level-alpha test for
// any null distribution in the class, improving on 1/alpha whenever the
// class has real structure.
double t_alpha(ShapeClass cls, double alpha);

// Smallest p-value that is valid conditionally on E for every member of
// the class: the crossing curve gamma -> r_gamma evaluated at 1/e, capped
// at one. `exact` is false for LD and LUS, where the safe upper end of the
// bracket is used.
struct ConditionalPValue {
    PValue p{1.0};
    bool exact = true;
};

ConditionalPValue conditional_e_to_p(ShapeClass cls, EValue e);

// Level-alpha test for the pointwise maximum of e-values that are all
// increasing functions of one underlying statistic. The maximum is usually
// not an e-value itself, yet comparing it against the class threshold
// keeps level alpha. Rejects iff max(es) >= t_alpha(cls, alpha).
bool comonotone_sup_test(const std::vector<double>& es, double alpha,
                         ShapeClass cls = ShapeClass::E0);

}  // namespace evk
