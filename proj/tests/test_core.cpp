#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>

#include "evalkit/core.hpp"
#include "evalkit/rng.hpp"

using namespace evk;

namespace {

CalibratorSpec spec_of(CalKind k, double param = 0.0, int K = 1) {
    CalibratorSpec s;
    s.kind = k;
    if (k == CalKind::power) s.kappa = param;
    if (k == CalKind::all_or_nothing || k == CalKind::bhy_truncation) s.alpha = param;
    s.K = K;
    return s;
}

double f_of(const CalibratorSpec& s, double p) {
    return calibrate_p_to_e(PValue(p), s);
}

// independent integration oracle: tanh-sinh on each continuity piece
double quadrature_integral(const CalibratorSpec& s) {
    boost::math::quadrature::tanh_sinh<double> integ;
    if (s.kind == CalKind::mixture) {
        // The mass near p = 0 decays like 1/|log p|, far too slow for any
        // quadrature in p. Substitute u = -log p: the integrand becomes
        // smooth on [0, 700] and for u >= 700 (p < 1e-304) it equals u^-2
        // to ~300 digits, so the tail integrates to exactly 1/700.
        double head = integ.integrate(
            [&](double u) { return f_of(s, std::exp(-u)) * std::exp(-u); },
            0.0, 700.0);
        return head + 1.0 / 700.0;
    }
    std::vector<double> cuts{0.0, 1.0};
    if (s.kind == CalKind::all_or_nothing) cuts.insert(cuts.begin() + 1, s.alpha);
    if (s.kind == CalKind::bhy_truncation) {
        double ell = harmonic_number(s.K);
        for (int i = 1; i <= s.K; i++) cuts.insert(cuts.end() - 1, i * s.alpha / (s.K * ell));
        std::sort(cuts.begin(), cuts.end());
    }
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); i++)
        total += integ.integrate([&](double p) { return f_of(s, p); }, cuts[i], cuts[i + 1]);
    return total;
}

}  // namespace

TEST_CASE("p-to-e calibrator fixtures") {
    CHECK(f_of(spec_of(CalKind::sqrtinv), 0.01) == doctest::Approx(9.0));
    CHECK(f_of(spec_of(CalKind::neglog), 1.5) == 0.0);
    CHECK(f_of(spec_of(CalKind::all_or_nothing, 0.05), 0.04) == doctest::Approx(20.0));
    CHECK(f_of(spec_of(CalKind::all_or_nothing, 0.05), 0.06) == 0.0);
    CHECK(f_of(spec_of(CalKind::power, 0.5), 0.04) == doctest::Approx(2.5));
    CHECK(f_of(spec_of(CalKind::linear2), 0.25) == doctest::Approx(1.5));

    // unbounded-at-zero kinds
    CHECK(std::isinf(f_of(spec_of(CalKind::sqrtinv), 0.0)));
    CHECK(std::isinf(f_of(spec_of(CalKind::power, 0.3), 0.0)));
    CHECK(std::isinf(f_of(spec_of(CalKind::neglog), 0.0)));
    CHECK(std::isinf(f_of(spec_of(CalKind::mixture), 0.0)));
    // bounded-at-zero kinds
    CHECK(f_of(spec_of(CalKind::all_or_nothing, 0.1), 0.0) == doctest::Approx(10.0));
    CHECK(f_of(spec_of(CalKind::bhy_truncation, 0.1, 5), 0.0) == doctest::Approx(50.0));
    CHECK(f_of(spec_of(CalKind::linear2), 0.0) == doctest::Approx(2.0));

    CHECK_THROWS_AS(PValue(-0.1), domain_error);
    CHECK_THROWS_AS(f_of(spec_of(CalKind::power, 1.2), 0.1), domain_error);
    CHECK_THROWS_AS(f_of(spec_of(CalKind::all_or_nothing, 0.0), 0.1), domain_error);
}

TEST_CASE("e-to-p and the 0.01 round trip") {
    CHECK(calibrate_e_to_p(EValue(9.0)).value == doctest::Approx(1.0 / 9.0));
    CHECK(calibrate_e_to_p(EValue(0.5)).value == 1.0);
    CHECK(calibrate_e_to_p(EValue(kInf)).value == 0.0);

    EValue e = calibrate_p_to_e(PValue(0.01), spec_of(CalKind::sqrtinv));
    CHECK(e.value == doctest::Approx(9.0));
    CHECK(calibrate_e_to_p(e).value == doctest::Approx(1.0 / 9.0));
}

TEST_CASE("markov tests") {
    CHECK(markov_test(EValue(25), 0.05));
    CHECK_FALSE(markov_test(EValue(19), 0.05));
    CHECK(markov_test(EValue(20), 0.05));  // boundary uses >=
    CHECK_THROWS_AS(markov_test(EValue(1), 1.5), domain_error);

    CHECK(randomized_markov_test(EValue(15), 0.05, 0.7));
    CHECK_FALSE(randomized_markov_test(EValue(15), 0.05, 0.8));
    CHECK_THROWS_AS(randomized_markov_test(EValue(1), 0.05, 1.2), domain_error);
}

TEST_CASE("markov monte-carlo level and randomized identity") {
    const int n = 1'000'000;
    const double alpha = 0.05;
    Rng rng(42, "core/markov-level");
    int rej = 0;
    for (int i = 0; i < n; i++)
        rej += markov_test(EValue(rng.exponential()), alpha);  // mean-1 e-values
    double freq = double(rej) / n;
    double se = std::sqrt(freq * (1 - freq) / n);
    CHECK(freq <= alpha + 3 * se);

    // e uniform on {0, 20} with mass 1/20 at 20: rejection probability of the
    // u-randomized test equals E[min(alpha E, 1)] = 0.05
    Rng rng2(42, "core/randomized-markov");
    int rej2 = 0;
    for (int i = 0; i < n; i++) {
        double e = rng2.uniform() < 1.0 / 20.0 ? 20.0 : 0.0;
        rej2 += randomized_markov_test(EValue(e), alpha, rng2.uniform());
    }
    double freq2 = double(rej2) / n;
    double target = (1.0 / 20.0) * 1.0;  // min(0.05*20, 1) = 1 w.p. 1/20
    double se2 = std::sqrt(target * (1 - target) / n);
    CHECK(std::abs(freq2 - target) <= 3 * se2);
}

TEST_CASE("prefix-mean and first-value randomized tests") {
    CHECK(*exchangeable_markov_test({25, 1, 1}, 0.05) == 1);
    CHECK_FALSE(exchangeable_markov_test({1, 1, 1, 1}, 0.04).has_value());
    CHECK(*exchangeable_markov_test({10, 40, 5}, 0.05) == 2);
    CHECK_THROWS_AS(exchangeable_markov_test({}, 0.05), domain_error);

    CHECK(eumi_test(EValue(19), {}, 0.05, 0.9));
    CHECK_FALSE(eumi_test(EValue(1), {1, 1}, 0.05, 0.5));
    CHECK(eumi_test(EValue(5), {30, 30}, 0.05, 1.0));
}

TEST_CASE("evidence grid labels") {
    CHECK(jeffreys_label(EValue(5)) == "substantial");
    CHECK(jeffreys_label(EValue(0.5)) == "null hypothesis is supported");
    CHECK(jeffreys_label(EValue(200)) == "decisive");
    CHECK(jeffreys_label(EValue(kInf)) == "decisive");
    // boundary ties go to the lower category
    CHECK(jeffreys_label(EValue(1.0)) == "null hypothesis is supported");
    CHECK(jeffreys_label(EValue(10.0)) == "substantial");
    CHECK(jeffreys_label(EValue(100.0)) == "very strong");
}

TEST_CASE("posthoc decision rule") {
    LossTable lt{{0.0, 20.0, 100.0}, 1.0};
    CHECK(posthoc_decision(EValue(120), lt) == 2);
    CHECK(posthoc_decision(EValue(0.5), lt) == 0);
    CHECK(posthoc_decision(EValue(30), lt) == 1);

    LossTable pricey{{5.0, 20.0}, 1.0};
    CHECK_THROWS_AS(posthoc_decision(EValue(2), pricey), infeasible_error);

    // monotone in e
    std::size_t prev = 0;
    for (double e = 0.0; e <= 200.0; e += 0.5) {
        std::size_t d = posthoc_decision(EValue(e), lt);
        CHECK(d >= prev);
        prev = d;
    }
}

TEST_CASE("calibrators integrate to one") {
    std::vector<CalibratorSpec> all{
        spec_of(CalKind::power, 0.5),  spec_of(CalKind::power, 0.1),
        spec_of(CalKind::power, 0.9),  spec_of(CalKind::mixture),
        spec_of(CalKind::linear2),     spec_of(CalKind::sqrtinv),
        spec_of(CalKind::neglog),      spec_of(CalKind::all_or_nothing, 0.05),
        spec_of(CalKind::bhy_truncation, 0.1, 10),
    };
    for (const auto& s : all) {
        double exact = calibrator_integral(s);
        CHECK(exact <= 1.0 + 1e-9);
        CHECK(exact == doctest::Approx(1.0).epsilon(1e-9));
        double quad = quadrature_integral(s);
        CHECK(std::abs(quad - 1.0) < 1e-6);
    }
}

TEST_CASE("calibrators decrease on [0,1] and vanish above 1") {
    for (auto s : {spec_of(CalKind::power, 0.3), spec_of(CalKind::mixture),
                   spec_of(CalKind::linear2), spec_of(CalKind::sqrtinv),
                   spec_of(CalKind::neglog), spec_of(CalKind::all_or_nothing, 0.2),
                   spec_of(CalKind::bhy_truncation, 0.2, 4)}) {
        double prev = kInf;
        for (int i = 1; i <= 400; i++) {
            double p = i / 400.0;
            double v = f_of(s, p);
            CHECK(v <= prev + 1e-12);
            prev = v;
        }
        CHECK(f_of(s, 1.000001) == 0.0);
    }
}

TEST_CASE("calibrator inversion") {
    CHECK(calibrator_inverse(spec_of(CalKind::sqrtinv), 20.0) ==
          doctest::Approx(1.0 / 441.0).epsilon(1e-12));
    CHECK(calibrator_inverse(spec_of(CalKind::all_or_nothing, 0.05), 20.0) ==
          doctest::Approx(0.05));
    CHECK(calibrator_inverse(spec_of(CalKind::all_or_nothing, 0.05), 20.01) == 0.0);
    CHECK(calibrator_inverse(spec_of(CalKind::neglog), 3.0) == doctest::Approx(std::exp(-3.0)));

    // sup{p : f(p) >= x} round trip on the strictly decreasing kinds
    for (auto s : {spec_of(CalKind::power, 0.4), spec_of(CalKind::mixture),
                   spec_of(CalKind::sqrtinv), spec_of(CalKind::neglog),
                   spec_of(CalKind::linear2)}) {
        for (double x : {0.9, 2.0, 20.0, 500.0}) {
            double p = calibrator_inverse(s, x);
            if (p == 0.0 || p == 1.0) continue;
            CHECK(f_of(s, p) == doctest::Approx(x).epsilon(1e-6));
        }
    }

    // all-or-nothing round trip: e_to_p(p_to_e(p)) <= alpha exactly when p <= alpha
    auto aon = spec_of(CalKind::all_or_nothing, 0.05);
    for (double p : {0.01, 0.05, 0.050001, 0.3}) {
        double back = calibrate_e_to_p(calibrate_p_to_e(PValue(p), aon));
        if (p <= 0.05)
            CHECK(back == doctest::Approx(0.05));
        else
            CHECK(back == 1.0);
    }
}
