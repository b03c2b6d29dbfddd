#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "evalkit/core.hpp"

namespace evk {

class Rng;

// Output of every multiple-testing procedure here. `rejected` holds sorted
// 0-based indices; `threshold_used` is the per-index cutoff the procedure's
// working values meet (>= for e-value procedures, <= for p-value ones).
struct DiscoverySet {
    std::vector<std::size_t> rejected;
    std::size_t k_star = 0;
    double threshold_used = kInf;
    std::string procedure_tag;
};

// E-values indexed by subsets of {0..K-1}, with E_empty = 1. The mean
// collection averages base e-values over the subset; explicit collections
// evaluate a caller-supplied function.
struct ECollection {
    enum class Kind { mean_from_base, explicit_table, loss_implied };
    Kind kind = Kind::mean_from_base;
    std::vector<double> base;
    std::function<double(const std::vector<std::size_t>&)> evaluator;

    std::size_t size() const;
    double at(const std::vector<std::size_t>& subset) const;
};

ECollection mean_collection(const std::vector<EValue>& es);
ECollection explicit_collection(
    std::size_t K, std::function<double(const std::vector<std::size_t>&)> eval);

// Rejects the k* largest e-values, k* = max{k : k e_[k] / K >= 1/alpha}.
// Ties are broken by original index, so results are deterministic.
DiscoverySet ebh(const std::vector<EValue>& es, double alpha);

// Rounds x down to the grid {K/k} for x >= 1, else 0. Callers certify
// boost factors via E[T(alpha b E)] <= alpha, premultiplying by the level.
double boost_truncation(double x, std::size_t K);

// e-BH on (b_k e_k); the b_k >= 1 must be certified by the caller.
DiscoverySet boosted_ebh(const std::vector<EValue>& es,
                         const std::vector<double>& boost_factors, double alpha);

// Largest factor with mean of T(alpha b E) over the draws equal to alpha
// within 1e-4, minus a 1e-3 safety margin (never below 1).
double boost_factor_monte_carlo(const std::function<double(Rng&)>& null_e_sampler,
                                std::size_t K, double alpha, std::size_t draws,
                                std::uint64_t seed);

// Closed form of the same bound for E = exp(lambda Z - lambda^2/2), Z
// standard normal under the null.
double boost_factor_gaussian_lr(std::size_t K, double alpha, double lambda);

// Benjamini-Hochberg on p-values, and the BHY variant for arbitrary
// dependence (BH applied to ell_K * p).
DiscoverySet bh(const std::vector<PValue>& ps, double alpha);
DiscoverySet bhy(const std::vector<PValue>& ps, double alpha);

// E_k = (K/alpha) V_k / (R v 1) from any FDR-controlling rejection vector.
std::vector<EValue> compound_from_fdr(const std::vector<int>& rejections,
                                      std::size_t R, std::size_t K, double alpha);

// Gate on the grand mean, then e-BH at level K alpha/(K-1).
DiscoverySet ebh_minimally_adaptive(const std::vector<EValue>& es, double alpha);

// Mean-preserving randomized rounding onto a sorted grid (entries may
// include +infinity). Values on the grid or outside its range pass through.
double stochastic_round(double x, const std::vector<double>& grid, double u);

// Randomized e-BH family. Ge rounds each e-value onto the e-BH rejection
// grid {K/(k alpha)} u {0, inf} with its own uniform; De adds a second
// rounding against {0, 1/alpha_hat, inf} with one shared uniform, where
// alpha_hat = alpha (k*+1)/K from the Ge pass; Ue divides all e-values by a
// single uniform. Each rejects a superset of plain e-BH draw by draw.
DiscoverySet ge_bh(const std::vector<EValue>& es, double alpha,
                   const std::vector<double>& uniforms);
DiscoverySet de_bh(const std::vector<EValue>& es, double alpha,
                   const std::vector<double>& uniforms, double final_uniform);
DiscoverySet ue_bh(const std::vector<EValue>& es, double alpha, double uniform);

// Largest R with E_A >= FDP_A(R)/alpha for every subset A. Mean collections
// scan prefixes of the descending e-order with an O(K^3) verification; other
// collections fall back to exhaustive subset search, refused above K = 20.
DiscoverySet closed_ebh(const ECollection& collection, double alpha);

// Loss evaluators take (|A n R|, |R|); all shipped losses depend on the
// overlap count only, which is what makes the prefix reduction sound.
using LossFn = std::function<double(std::size_t, std::size_t)>;
LossFn fdp_loss();
LossFn kfwer_loss(std::size_t k);
LossFn pfer_loss(std::size_t K);
LossFn fdx_loss(double gamma);

// Largest R with E_A >= L(|A n R|, |R|)/alpha for every A; brute force for
// explicit collections (K <= 20), prefix scan for mean collections.
DiscoverySet closed_loss(const ECollection& collection, const LossFn& loss,
                         double alpha);

// Ascending-order prefix averaging; rejecting E* >= 1/alpha controls FWER.
std::vector<EValue> fwer_adjust(const std::vector<EValue>& es);

// BH on p* = min(p/e, 1); e = 0 sets p* = 1. Valid when p and e are
// independent and the p-values are PRDS.
DiscoverySet ep_bh(const std::vector<PValue>& ps, const std::vector<EValue>& es,
                   double alpha);

struct FdpReport {
    double fdp = 0.0;
    std::size_t false_discoveries = 0;
    std::size_t discoveries = 0;
};

FdpReport fdr_fdp_report(const std::vector<std::size_t>& discoveries,
                         const std::vector<std::size_t>& null_indices);

}  // namespace evk
