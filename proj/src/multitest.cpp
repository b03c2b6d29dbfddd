#include "evalkit/multitest.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "evalkit/rng.hpp"

namespace evk {

namespace {

double loss_checked(const LossFn& loss, std::size_t overlap, std::size_t r) {
    const double v = loss(overlap, r);
    require(v >= 0.0 && v <= 1.0, "loss values must lie in [0,1]");
    return v;
}

// indices sorted by value descending, original index ascending on ties
std::vector<std::size_t> descending_order(const std::vector<double>& vals) {
    std::vector<std::size_t> idx(vals.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return vals[a] > vals[b] || (vals[a] == vals[b] && a < b);
    });
    return idx;
}

std::vector<std::size_t> ascending_order(const std::vector<double>& vals) {
    std::vector<std::size_t> idx(vals.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return vals[a] < vals[b] || (vals[a] == vals[b] && a < b);
    });
    return idx;
}

std::vector<double> values_of(const std::vector<EValue>& es) {
    std::vector<double> v(es.size());
    for (std::size_t i = 0; i < es.size(); ++i) v[i] = es[i].value;
    return v;
}

// e-BH core without the public level-range check, so adaptive variants can
// call it at effective levels >= 1.
DiscoverySet ebh_at(const std::vector<double>& vals, double level,
                    std::string tag) {
    const std::size_t K = vals.size();
    const auto order = descending_order(vals);
    std::size_t k_star = 0;
    for (std::size_t k = K; k >= 1; --k) {
        // e_[k] >= K/(k level), written to stay finite for infinite e-values
        if (vals[order[k - 1]] >=
            static_cast<double>(K) / (static_cast<double>(k) * level)) {
            k_star = k;
            break;
        }
    }
    DiscoverySet out;
    out.k_star = k_star;
    out.procedure_tag = std::move(tag);
    out.threshold_used = static_cast<double>(K) /
                         (static_cast<double>(std::max<std::size_t>(k_star, 1)) *
                          level);
    out.rejected.assign(order.begin(), order.begin() + k_star);
    std::sort(out.rejected.begin(), out.rejected.end());
    return out;
}

void check_level(double alpha) {
    require(alpha > 0.0 && alpha < 1.0, "level must be in (0,1)");
}

// 2^K - 1 nonempty subsets as bitmasks; only usable for small K
std::vector<std::size_t> subset_of_mask(std::uint32_t mask) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; mask; ++i, mask >>= 1)
        if (mask & 1u) out.push_back(i);
    return out;
}

}  // namespace

std::size_t ECollection::size() const {
    // explicit_collection resizes `base` to K, so this covers both kinds
    return base.size();
}

double ECollection::at(const std::vector<std::size_t>& subset) const {
    if (subset.empty()) return 1.0;
    if (kind == Kind::mean_from_base) {
        double s = 0.0;
        for (std::size_t k : subset) {
            require(k < base.size(), "subset index out of range");
            s += base[k];
        }
        return s / static_cast<double>(subset.size());
    }
    const double v = evaluator(subset);
    require(v >= 0.0 && !std::isnan(v), "collection returned a negative value");
    return v;
}

ECollection mean_collection(const std::vector<EValue>& es) {
    ECollection c;
    c.kind = ECollection::Kind::mean_from_base;
    c.base = values_of(es);
    return c;
}

ECollection explicit_collection(
    std::size_t K, std::function<double(const std::vector<std::size_t>&)> eval) {
    require(K >= 1, "need at least one hypothesis");
    ECollection c;
    c.kind = ECollection::Kind::explicit_table;
    c.base.resize(K);  // size carrier only
    c.evaluator = std::move(eval);
    return c;
}

DiscoverySet ebh(const std::vector<EValue>& es, double alpha) {
    require(!es.empty(), "need at least one e-value");
    check_level(alpha);
    return ebh_at(values_of(es), alpha, "ebh");
}

double boost_truncation(double x, std::size_t K) {
    require(K >= 1, "need at least one hypothesis");
    require(!(x < 0.0) && !std::isnan(x), "argument must be nonnegative");
    if (x < 1.0) return 0.0;
    if (std::isinf(x)) return static_cast<double>(K);
    return static_cast<double>(K) /
           std::ceil(static_cast<double>(K) / x);
}

DiscoverySet boosted_ebh(const std::vector<EValue>& es,
                         const std::vector<double>& boost_factors, double alpha) {
    require(!es.empty(), "need at least one e-value");
    require(boost_factors.size() == es.size(),
            "one boost factor per e-value required");
    check_level(alpha);
    std::vector<double> boosted(es.size());
    for (std::size_t i = 0; i < es.size(); ++i) {
        require(boost_factors[i] >= 1.0, "boost factors must be at least 1");
        boosted[i] = boost_factors[i] * es[i].value;
    }
    return ebh_at(boosted, alpha, "boosted-ebh");
}

double boost_factor_monte_carlo(const std::function<double(Rng&)>& null_e_sampler,
                                std::size_t K, double alpha, std::size_t draws,
                                std::uint64_t seed) {
    require(K >= 1, "need at least one hypothesis");
    check_level(alpha);
    require(draws >= 1000, "too few draws to certify a boost factor");
    Rng rng(seed, "boost-certify");
    std::vector<double> es(draws);
    for (auto& e : es) {
        e = null_e_sampler(rng);
        require(e >= 0.0 && !std::isnan(e), "sampler produced a bad e-value");
    }
    const auto mean_trunc = [&](double b) {
        double s = 0.0;
        for (double e : es) s += boost_truncation(alpha * b * e, K);
        return s / static_cast<double>(draws);
    };
    if (mean_trunc(1.0) >= alpha) return 1.0;
    double lo = 1.0, hi = 2.0;
    while (mean_trunc(hi) < alpha) {
        hi *= 2.0;
        if (hi > 1e12) return std::max(1.0, hi - 1e-3);  // unboundedly safe
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double m = mean_trunc(mid);
        if (std::abs(m - alpha) <= 1e-4) {
            lo = hi = mid;
            break;
        }
        (m < alpha ? lo : hi) = mid;
        if (hi - lo < 1e-12) break;
    }
    return std::max(1.0, 0.5 * (lo + hi) - 1e-3);  // safety margin
}

double boost_factor_gaussian_lr(std::size_t K, double alpha, double lambda) {
    require(K >= 1, "need at least one hypothesis");
    check_level(alpha);
    require(lambda > 0.0, "bet size must be positive");
    // P(exp(lambda Z - lambda^2/2) >= c) for standard normal Z
    const auto upper_tail = [lambda](double c) {
        const double z = (std::log(c) + 0.5 * lambda * lambda) / lambda;
        return 0.5 * std::erfc(z / std::sqrt(2.0));
    };
    const auto mean_trunc = [&](double b) {
        // E[T(alpha b E)] = sum over grid levels K/m of (K/m) * P(landing)
        double total = 0.0, prev_tail = 0.0;  // P(alpha b E >= K/0) = 0
        for (std::size_t m = 1; m <= K; ++m) {
            const double tail =
                upper_tail(static_cast<double>(K) / static_cast<double>(m) /
                           (alpha * b));
            total += static_cast<double>(K) / static_cast<double>(m) *
                     (tail - prev_tail);
            prev_tail = tail;
        }
        return total;
    };
    double lo = 1.0, hi = 2.0;
    if (mean_trunc(1.0) >= alpha) return 1.0;
    while (mean_trunc(hi) < alpha) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        (mean_trunc(mid) < alpha ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

DiscoverySet bh(const std::vector<PValue>& ps, double alpha) {
    require(!ps.empty(), "need at least one p-value");
    check_level(alpha);
    const std::size_t K = ps.size();
    std::vector<double> vals(K);
    for (std::size_t i = 0; i < K; ++i) vals[i] = ps[i].value;
    const auto order = ascending_order(vals);
    std::size_t k_star = 0;
    for (std::size_t k = K; k >= 1; --k) {
        if (static_cast<double>(K) * vals[order[k - 1]] <=
            static_cast<double>(k) * alpha) {
            k_star = k;
            break;
        }
    }
    DiscoverySet out;
    out.k_star = k_star;
    out.procedure_tag = "bh";
    out.threshold_used =
        static_cast<double>(std::max<std::size_t>(k_star, 1)) * alpha /
        static_cast<double>(K);
    out.rejected.assign(order.begin(), order.begin() + k_star);
    std::sort(out.rejected.begin(), out.rejected.end());
    return out;
}

DiscoverySet bhy(const std::vector<PValue>& ps, double alpha) {
    require(!ps.empty(), "need at least one p-value");
    check_level(alpha);
    const double ell = harmonic_number(static_cast<int>(ps.size()));
    std::vector<PValue> scaled;
    scaled.reserve(ps.size());
    for (const auto& p : ps) scaled.emplace_back(p.value * ell);
    DiscoverySet out = bh(scaled, alpha);
    out.procedure_tag = "bhy";
    out.threshold_used /= ell;  // back on the raw p scale
    return out;
}

std::vector<EValue> compound_from_fdr(const std::vector<int>& rejections,
                                      std::size_t R, std::size_t K,
                                      double alpha) {
    require(rejections.size() == K, "rejection vector must have length K");
    check_level(alpha);
    std::size_t total = 0;
    for (int v : rejections) {
        require(v == 0 || v == 1, "rejection entries must be 0 or 1");
        total += static_cast<std::size_t>(v);
    }
    require(total == R, "R does not match the rejection count");
    const double denom = static_cast<double>(std::max<std::size_t>(R, 1));
    std::vector<EValue> out;
    out.reserve(K);
    // same expression shape as the e-BH threshold K/(k alpha), so feeding
    // these back into ebh at the same level recovers the rejections exactly
    for (int v : rejections)
        out.emplace_back(v ? static_cast<double>(K) / (denom * alpha) : 0.0);
    return out;
}

DiscoverySet ebh_minimally_adaptive(const std::vector<EValue>& es, double alpha) {
    require(es.size() >= 2, "needs at least two hypotheses");
    check_level(alpha);
    const std::size_t K = es.size();
    double mean = 0.0;
    for (const auto& e : es) mean += e.value;
    mean /= static_cast<double>(K);
    if (mean < 1.0 / alpha) {
        DiscoverySet out;
        out.procedure_tag = "minadapt-ebh";
        out.threshold_used = static_cast<double>(K - 1) / alpha;
        return out;
    }
    const double level =
        static_cast<double>(K) * alpha / static_cast<double>(K - 1);
    DiscoverySet out = ebh_at(values_of(es), level, "minadapt-ebh");
    return out;
}

double stochastic_round(double x, const std::vector<double>& grid, double u) {
    require(!grid.empty(), "empty rounding grid");
    require(u >= 0.0 && u <= 1.0, "uniform draw must be in [0,1]");
    require(!(x < 0.0) && !std::isnan(x), "argument must be nonnegative");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        require(!std::isnan(grid[i]), "malformed grid");
        require(i == 0 || grid[i] > grid[i - 1], "grid must be strictly sorted");
    }
    if (x < grid.front() || x > grid.back()) return x;
    const auto up = std::lower_bound(grid.begin(), grid.end(), x);
    if (*up == x) return x;
    const double hi = *up;
    const double lo = *(up - 1);
    if (std::isinf(hi)) return x;
    // round up with probability (x - lo)/(hi - lo), preserving the mean
    return u < (x - lo) / (hi - lo) ? hi : lo;
}

DiscoverySet ge_bh(const std::vector<EValue>& es, double alpha,
                   const std::vector<double>& uniforms) {
    require(!es.empty(), "need at least one e-value");
    check_level(alpha);
    require(uniforms.size() == es.size(), "one uniform per e-value required");
    const std::size_t K = es.size();
    std::vector<double> grid{0.0};
    for (std::size_t k = K; k >= 1; --k)
        grid.push_back(static_cast<double>(K) / (static_cast<double>(k) * alpha));
    grid.push_back(kInf);
    std::vector<double> rounded(K);
    for (std::size_t i = 0; i < K; ++i)
        rounded[i] = stochastic_round(es[i].value, grid, uniforms[i]);
    return ebh_at(rounded, alpha, "ge-bh");
}

DiscoverySet de_bh(const std::vector<EValue>& es, double alpha,
                   const std::vector<double>& uniforms, double final_uniform) {
    require(final_uniform >= 0.0 && final_uniform <= 1.0,
            "uniform draw must be in [0,1]");
    const std::size_t K = es.size();
    DiscoverySet first = ge_bh(es, alpha, uniforms);

    // Recover the grid-rounded values the Ge pass used.
    std::vector<double> grid{0.0};
    for (std::size_t k = K; k >= 1; --k)
        grid.push_back(static_cast<double>(K) / (static_cast<double>(k) * alpha));
    grid.push_back(kInf);
    const double alpha_hat =
        alpha * static_cast<double>(first.k_star + 1) / static_cast<double>(K);
    const double cut = 1.0 / alpha_hat;

    DiscoverySet out;
    out.procedure_tag = "de-bh";
    out.threshold_used = cut;
    for (std::size_t i = 0; i < K; ++i) {
        const double x = stochastic_round(es[i].value, grid, uniforms[i]);
        // shared-uniform rounding against {0, 1/alpha_hat, inf}: values
        // already at or above the cut stay; smaller ones jump up with
        // probability x * alpha_hat
        const bool reject =
            x >= cut || (x > 0.0 && final_uniform < x * alpha_hat);
        if (reject) out.rejected.push_back(i);
    }
    out.k_star = out.rejected.size();
    return out;
}

DiscoverySet ue_bh(const std::vector<EValue>& es, double alpha, double uniform) {
    require(!es.empty(), "need at least one e-value");
    check_level(alpha);
    require(uniform > 0.0 && uniform <= 1.0, "uniform draw must be in (0,1]");
    std::vector<double> scaled = values_of(es);
    for (auto& v : scaled) v /= uniform;
    DiscoverySet out = ebh_at(scaled, alpha, "ue-bh");
    out.threshold_used *= uniform;  // back on the raw e scale
    return out;
}

namespace {

// Verifies that rejecting the top r values of `sorted_desc` keeps every
// subset constraint E_A >= overlap_loss(|A n R|, r)/alpha. The minimizing A
// with a inside and j outside picks the a smallest rejected and j smallest
// non-rejected values, so prefix sums of the two tails suffice.
bool prefix_candidate_ok(const std::vector<double>& sorted_desc, std::size_t r,
                         const LossFn& loss, double alpha) {
    const std::size_t K = sorted_desc.size();
    // suffix sums: tail_in[a] = sum of the a smallest among the first r,
    // tail_out[j] = sum of the j smallest among the rest
    std::vector<double> tail_in(r + 1, 0.0), tail_out(K - r + 1, 0.0);
    for (std::size_t a = 1; a <= r; ++a)
        tail_in[a] = tail_in[a - 1] + sorted_desc[r - a];
    for (std::size_t j = 1; j <= K - r; ++j)
        tail_out[j] = tail_out[j - 1] + sorted_desc[K - j];
    for (std::size_t a = 0; a <= r; ++a) {
        const double need = loss_checked(loss, a, r) / alpha;
        for (std::size_t j = 0; j <= K - r; ++j) {
            if (a + j == 0) {
                if (1.0 < need) return false;  // E_empty = 1
                continue;
            }
            const double mean =
                (tail_in[a] + tail_out[j]) / static_cast<double>(a + j);
            if (mean < need) return false;
        }
    }
    return true;
}

}  // namespace

DiscoverySet closed_ebh(const ECollection& collection, double alpha) {
    return closed_loss(collection, fdp_loss(), alpha);
}

LossFn fdp_loss() {
    return [](std::size_t overlap, std::size_t r) {
        return static_cast<double>(overlap) /
               static_cast<double>(std::max<std::size_t>(r, 1));
    };
}

LossFn kfwer_loss(std::size_t k) {
    require(k >= 1, "k-FWER needs k >= 1");
    return [k](std::size_t overlap, std::size_t) {
        return overlap >= k ? 1.0 : 0.0;
    };
}

LossFn pfer_loss(std::size_t K) {
    require(K >= 1, "need at least one hypothesis");
    return [K](std::size_t overlap, std::size_t) {
        return static_cast<double>(overlap) / static_cast<double>(K);
    };
}

LossFn fdx_loss(double gamma) {
    require(gamma >= 0.0 && gamma < 1.0, "FDX exceedance must be in [0,1)");
    return [gamma](std::size_t overlap, std::size_t r) {
        const double fdp = static_cast<double>(overlap) /
                           static_cast<double>(std::max<std::size_t>(r, 1));
        return fdp > gamma ? 1.0 : 0.0;
    };
}

DiscoverySet closed_loss(const ECollection& collection, const LossFn& loss,
                         double alpha) {
    check_level(alpha);
    const std::size_t K = collection.size();
    require(K >= 1, "need at least one hypothesis");

    if (collection.kind == ECollection::Kind::mean_from_base) {
        const auto order = descending_order(collection.base);
        std::vector<double> sorted(K);
        for (std::size_t i = 0; i < K; ++i) sorted[i] = collection.base[order[i]];
        for (std::size_t r = K; r >= 1; --r) {
            if (!prefix_candidate_ok(sorted, r, loss, alpha)) continue;
            DiscoverySet out;
            out.k_star = r;
            out.procedure_tag = "closed";
            out.threshold_used = sorted[r - 1];
            out.rejected.assign(order.begin(), order.begin() + r);
            std::sort(out.rejected.begin(), out.rejected.end());
            return out;
        }
        DiscoverySet out;
        out.procedure_tag = "closed";
        return out;
    }

    require(K <= 20, "exhaustive closed testing is limited to 20 hypotheses");
    const std::uint32_t top = 1u << K;
    std::vector<std::vector<std::size_t>> subsets(top);
    std::vector<double> evals(top);
    for (std::uint32_t m = 0; m < top; ++m) {
        subsets[m] = subset_of_mask(m);
        evals[m] = collection.at(subsets[m]);
    }
    // candidates in decreasing size, then increasing bitmask for determinism
    std::vector<std::uint32_t> masks(top);
    std::iota(masks.begin(), masks.end(), 0);
    std::sort(masks.begin(), masks.end(), [](std::uint32_t a, std::uint32_t b) {
        const int ca = std::popcount(a), cb = std::popcount(b);
        return ca > cb || (ca == cb && a < b);
    });
    for (std::uint32_t rmask : masks) {
        const std::size_t r = subsets[rmask].size();
        bool ok = true;
        for (std::uint32_t amask = 0; amask < top && ok; ++amask) {
            const std::size_t overlap = std::popcount(amask & rmask);
            ok = evals[amask] >= loss_checked(loss, overlap, r) / alpha;
        }
        if (!ok) continue;
        DiscoverySet out;
        out.k_star = r;
        out.procedure_tag = "closed";
        out.rejected = subsets[rmask];
        return out;
    }
    DiscoverySet out;  // empty set always qualifies, so unreachable
    out.procedure_tag = "closed";
    return out;
}

std::vector<EValue> fwer_adjust(const std::vector<EValue>& es) {
    require(!es.empty(), "need at least one e-value");
    const std::size_t K = es.size();
    const auto vals = values_of(es);
    const auto order = ascending_order(vals);
    std::vector<double> prefix(K, 0.0);
    double acc = 0.0;
    for (std::size_t i = 0; i < K; ++i) {
        acc += vals[order[i]];
        prefix[i] = acc;
    }
    std::vector<EValue> out(es);
    for (std::size_t k = 0; k < K; ++k) {
        double best = vals[order[k]];
        for (std::size_t i = 0; i + 1 <= k; ++i)
            best = std::min(best, (vals[order[k]] + prefix[i]) /
                                      static_cast<double>(i + 2));
        out[order[k]] = EValue(best);
    }
    return out;
}

DiscoverySet ep_bh(const std::vector<PValue>& ps, const std::vector<EValue>& es,
                   double alpha) {
    require(ps.size() == es.size(), "need one e-value per p-value");
    require(!ps.empty(), "need at least one pair");
    check_level(alpha);
    std::vector<PValue> weighted;
    weighted.reserve(ps.size());
    for (std::size_t i = 0; i < ps.size(); ++i) {
        const double e = es[i].value;
        weighted.emplace_back(e == 0.0 ? 1.0 : std::min(ps[i].value / e, 1.0));
    }
    DiscoverySet out = bh(weighted, alpha);
    out.procedure_tag = "ep-bh";
    return out;
}

FdpReport fdr_fdp_report(const std::vector<std::size_t>& discoveries,
                         const std::vector<std::size_t>& null_indices) {
    FdpReport rep;
    rep.discoveries = discoveries.size();
    for (std::size_t d : discoveries)
        rep.false_discoveries += static_cast<std::size_t>(
            std::find(null_indices.begin(), null_indices.end(), d) !=
            null_indices.end());
    rep.fdp = static_cast<double>(rep.false_discoveries) /
              static_cast<double>(std::max<std::size_t>(rep.discoveries, 1));
    return rep;
}

}  // namespace evk
