#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "evalkit/eprocess.hpp"
#include "evalkit/evariables.hpp"
#include "evalkit/rng.hpp"

using namespace evk;

TEST_CASE("product steps and the zero latch") {
    EProcessState s;
    s = step_product(s, EValue(1.0));
    CHECK(s.wealth() == doctest::Approx(1.0));
    s = step_product(s, EValue(2.0));
    s = step_product(s, EValue(0.5));
    CHECK(s.wealth() == doctest::Approx(1.0));
    CHECK(s.t == 3);

    EProcessState z;
    z = step_product(z, EValue(4.0));
    z = step_product(z, EValue(4.0));
    z = step_product(z, EValue(0.0));
    CHECK(z.wealth() == 0.0);
    CHECK(z.history_max() == doctest::Approx(16.0));
    // Latched: even an infinite later factor cannot revive the wealth.
    z = step_product(z, EValue(kInf));
    CHECK(z.wealth() == 0.0);
    CHECK(z.latched_zero);
}

TEST_CASE("betting steps") {
    EProcessState s;
    s = step_bet(s, EValue(7.0), 0.0);
    CHECK(s.wealth() == doctest::Approx(1.0));
    s = step_bet(s, EValue(4.0), 1.0 / 3.0);
    CHECK(s.wealth() == doctest::Approx(2.0));
    s = step_bet(s, EValue(0.5), 1.0);
    CHECK(s.wealth() == doctest::Approx(1.0));
    CHECK_THROWS_AS(step_bet(s, EValue(1.0), 1.2), domain_error);
    CHECK_THROWS_AS(step_bet(s, EValue(1.0), -0.1), domain_error);
}

TEST_CASE("adaptive bet fitting") {
    EProcessState flat;
    for (int i = 0; i < 3; ++i) flat = step_bet(flat, EValue(1.0), 0.0);
    CHECK(adaptive_lambda(flat, 1.0) == 0.0);

    EProcessState fresh;
    CHECK(adaptive_lambda(fresh, 0.5) == 0.0);

    EProcessState wins;
    wins = step_bet(wins, EValue(2.0), 0.0);
    wins = step_bet(wins, EValue(2.0), 0.0);
    CHECK(adaptive_lambda(wins, 1.0) == doctest::Approx(1.0));

    // Balanced {0,4} history fits the log-optimal 1/3.
    EProcessState twopoint;
    for (int i = 0; i < 200; ++i) {
        twopoint = step_bet(twopoint, EValue(0.0), 0.0);
        twopoint = step_bet(twopoint, EValue(4.0), 0.0);
    }
    CHECK(adaptive_lambda(twopoint, 1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
    CHECK(adaptive_lambda(twopoint, 0.25) == doctest::Approx(0.25));

    // Histogram-backed and explicit-prefix fits agree.
    Rng rng(20260814, "fit-agreement");
    EProcessState st;
    std::vector<double> prefix;
    for (int i = 0; i < 60; ++i) {
        const double e = rng.exponential() * 1.4;
        st = step_bet(st, EValue(e), 0.0);
        prefix.push_back(e);
    }
    CHECK(adaptive_lambda(st, 1.0) == doctest::Approx(adaptive_lambda(prefix, 1.0)).epsilon(1e-6));

    // A bet fitted before an intervening step is stale and rejected.
    EProcessState guard;
    guard = step_bet(guard, EValue(2.0), 0.0);
    const double lam = adaptive_lambda(guard, 1.0);
    guard = step_product(guard, EValue(1.5));
    CHECK_THROWS_AS(step_bet(guard, EValue(1.0), lam), domain_error);
}

TEST_CASE("ever-crossing test") {
    EProcessState s;
    s = step_product(s, EValue(20.0));
    s = step_product(s, EValue(0.01));
    CHECK(ville_test(s, 0.05));   // the maximum, not the current value
    EProcessState fresh;
    CHECK_FALSE(ville_test(fresh, 0.5));
    CHECK(ville_test(fresh, 1.0));
    CHECK_THROWS_AS(ville_test(fresh, 1.5), domain_error);
    CHECK_THROWS_AS(ville_test(fresh, 0.0), domain_error);

    // Gaussian likelihood-ratio process under its null.
    Rng rng(20260814, "ville-null");
    const double alpha = 0.05, mu = 0.3;
    const std::size_t paths = 10000, horizon = 200;
    std::size_t crossings = 0;
    double wealth_sum = 0.0;
    for (std::size_t p = 0; p < paths; ++p) {
        EProcessState st;
        for (std::size_t t = 0; t < horizon; ++t)
            st = step_product(st, gaussian_lr_e({rng.normal()}, mu));
        if (ville_test(st, alpha)) ++crossings;
        wealth_sum += st.wealth();
    }
    const double freq = static_cast<double>(crossings) / static_cast<double>(paths);
    const double se = std::sqrt(alpha * (1 - alpha) / static_cast<double>(paths));
    CHECK(freq <= alpha + 3.0 * se);

    // Fixed-horizon mean stays at 1. Needs a small drift: the terminal
    // wealth is lognormal with variance e^(t mu^2) - 1, so mu = 0.3 would
    // leave the sample mean useless at any reasonable path count.
    wealth_sum = 0.0;
    const double mu_small = 0.05;
    for (std::size_t p = 0; p < paths; ++p) {
        EProcessState st;
        for (std::size_t t = 0; t < horizon; ++t)
            st = step_product(st, gaussian_lr_e({rng.normal()}, mu_small));
        wealth_sum += st.wealth();
    }
    CHECK(wealth_sum / static_cast<double>(paths) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("sequential probability ratio test") {
    SprtConfig conservative{0.05, 0.05, SprtMode::conservative};
    CHECK(conservative.log_gamma0() == doctest::Approx(std::log(0.05)));
    CHECK(conservative.log_gamma1() == doctest::Approx(std::log(20.0)));
    SprtConfig classical{0.05, 0.05, SprtMode::classical};
    CHECK(classical.log_gamma0() == doctest::Approx(std::log(0.05 / 0.95)));
    CHECK(classical.log_gamma1() == doctest::Approx(std::log(0.95 / 0.05)));
    CHECK_THROWS_AS(SprtConfig({0.6, 0.5, SprtMode::classical}).validate(), domain_error);

    const auto stuck = sprt(std::vector<double>(50, 0.0), conservative);
    CHECK(stuck.decision == SprtDecision::inconclusive);
    CHECK(stuck.stopping_time == 50);

    const auto up = sprt(std::vector<double>(10, 0.5), conservative);
    CHECK(up.decision == SprtDecision::reject);
    CHECK(up.stopping_time == 6);  // first time 0.5 t >= log 20

    const auto down = sprt(std::vector<double>(10, -0.5), conservative);
    CHECK(down.decision == SprtDecision::accept);
    CHECK(down.stopping_time == 6);

    // Bernoulli(0.6) alternative: the test should reject quickly and often.
    Rng rng(20260814, "sprt-alt");
    const double l1 = std::log(0.6 / 0.5), l0 = std::log(0.4 / 0.5);
    std::size_t rejects = 0;
    double tau_sum = 0.0;
    const std::size_t paths = 400;
    for (std::size_t p = 0; p < paths; ++p) {
        std::vector<double> lrs(2000);
        for (double& lr : lrs) lr = rng.bernoulli(0.6) ? l1 : l0;
        const auto res = sprt(lrs, conservative);
        if (res.decision == SprtDecision::reject) ++rejects;
        tau_sum += static_cast<double>(res.stopping_time);
    }
    CHECK(static_cast<double>(rejects) / static_cast<double>(paths) > 0.85);
    CHECK(tau_sum / static_cast<double>(paths) > 100.0);
    CHECK(tau_sum / static_cast<double>(paths) < 180.0);
}

TEST_CASE("plug-in against refitted null") {
    // One point, fixed alternative, singleton null: plain likelihood ratio.
    const auto q = gaussian_density(1.0, 1.0);
    const auto p0 = gaussian_density(0.0, 1.0);
    UiEProcess one;
    one = ui_eprocess_step(
        one, 0.8, [&](const auto&, double x) { return std::log(q(x)); },
        [&](const std::vector<double>& all) {
            double ll = 0.0;
            for (double x : all) ll += std::log(p0(x));
            return ll;
        });
    CHECK(one.state.wealth() == doctest::Approx(q(0.8) / p0(0.8)));

    // Running-mean predictor against the refitted Gaussian location null:
    // the prequential fit can never beat the in-sample maximum.
    const AltPredictor running_mean = [](const std::vector<double>& past, double x) {
        double m = 0.0;
        for (double v : past) m += v;
        if (!past.empty()) m /= static_cast<double>(past.size());
        const double d = x - m;
        return -0.5 * d * d - 0.5 * std::log(2.0 * 3.14159265358979323846);
    };
    const NullRefitter gauss_mle = [](const std::vector<double>& all) {
        double m = 0.0;
        for (double v : all) m += v;
        m /= static_cast<double>(all.size());
        double ll = 0.0;
        for (double v : all) {
            const double d = v - m;
            ll += -0.5 * d * d - 0.5 * std::log(2.0 * 3.14159265358979323846);
        }
        return ll;
    };

    Rng rng(20260814, "ui-null");
    for (int rep = 0; rep < 50; ++rep) {
        UiEProcess s;
        for (int t = 0; t < 30; ++t)
            s = ui_eprocess_step(s, rng.normal() + 0.3, running_mean, gauss_mle);
        CHECK(s.state.wealth() <= 1.0 + 1e-9);
    }

    // Null simulation: crossing 20 is rare even with the refitted maximum.
    std::size_t crossings = 0;
    const std::size_t paths = 1000;
    for (std::size_t p = 0; p < paths; ++p) {
        UiEProcess s;
        for (int t = 0; t < 100; ++t)
            s = ui_eprocess_step(s, rng.normal(), running_mean, gauss_mle);
        if (s.state.history_max() >= 20.0) ++crossings;
    }
    const double freq = static_cast<double>(crossings) / static_cast<double>(paths);
    CHECK(freq <= 0.05 + 3.0 * std::sqrt(0.05 * 0.95 / static_cast<double>(paths)));
}

TEST_CASE("time mixture") {
    TimeMixture unit([](std::size_t) { return 0.2; });
    double prev = 0.0;
    for (int n = 1; n <= 5; ++n) {
        const auto st = unit.step(EValue(1.0));
        CHECK(st.wealth() == doctest::Approx(0.2 * n));
        CHECK(st.wealth() >= prev);
        prev = st.wealth();
    }
    CHECK_THROWS_AS(unit.step(EValue(1.0)), domain_error);  // mass would pass 1

    TimeMixture point([](std::size_t n) { return n == 1 ? 1.0 : 0.0; });
    point.step(EValue(7.0));
    CHECK(point.step(EValue(123.0)).wealth() == doctest::Approx(7.0));

    TimeMixture dyadic([](std::size_t n) { return std::pow(2.0, -static_cast<double>(n)); });
    dyadic.step(EValue(1.0));
    dyadic.step(EValue(2.0));
    CHECK(dyadic.step(EValue(3.0)).wealth() == doctest::Approx(11.0 / 8.0));

    TimeMixture bad([](std::size_t) { return -0.1; });
    CHECK_THROWS_AS(bad.step(EValue(1.0)), domain_error);

    auto standard = TimeMixture::standard();
    double mass = 0.0;
    for (std::size_t n = 1; n <= 20000; ++n) {
        const auto st = standard.step(EValue(1.0));
        mass = st.wealth();
    }
    CHECK(mass < 1.0);
    CHECK(mass > 0.8);  // most of the mass sits on small n
}

TEST_CASE("optional continuation") {
    EProcessState first;
    first = step_product(first, EValue(8.0));
    first = step_product(first, EValue(0.625));  // wealth 5, max 8

    EProcessState idle;
    const auto same = optional_continuation(first, idle);
    CHECK(same.wealth() == doctest::Approx(5.0));
    CHECK(same.history_max() == doctest::Approx(8.0));

    EProcessState second;
    second = step_product(second, EValue(6.0));
    second = step_product(second, EValue(2.0 / 3.0));  // wealth 4, max 6
    const auto joint = optional_continuation(first, second);
    CHECK(joint.wealth() == doctest::Approx(20.0));
    CHECK(joint.history_max() == doctest::Approx(30.0));
    CHECK(joint.t == 4);

    // Two-stage null simulation keeps the Ville level.
    Rng rng(20260814, "continuation-null");
    const double alpha = 0.05;
    std::size_t crossings = 0;
    const std::size_t paths = 5000;
    for (std::size_t p = 0; p < paths; ++p) {
        EProcessState a;
        for (int t = 0; t < 50; ++t) a = step_product(a, gaussian_lr_e({rng.normal()}, 0.25));
        EProcessState b;
        for (int t = 0; t < 50; ++t) b = step_product(b, gaussian_lr_e({rng.normal()}, 0.4));
        if (ville_test(optional_continuation(a, b), alpha)) ++crossings;
    }
    const double freq = static_cast<double>(crossings) / static_cast<double>(paths);
    CHECK(freq <= alpha + 3.0 * std::sqrt(alpha * (1 - alpha) / static_cast<double>(paths)));
}

TEST_CASE("adaptive betting tracks the oracle growth rate") {
    // Law on {1/2, 2}: optimal bet 1/2, growth (log 1.5 + log 0.75)/2.
    const double oracle = 0.5 * (std::log(1.5) + std::log(0.75));
    Rng rng(20260814, "adaptive-growth");
    const std::size_t horizon = 10000;
    double acc = 0.0;
    const int paths = 20;
    for (int p = 0; p < paths; ++p) {
        EProcessState st;
        for (std::size_t t = 0; t < horizon; ++t) {
            const double lam = adaptive_lambda(st, 1.0);
            st = step_bet(st, EValue(rng.bernoulli(0.5) ? 2.0 : 0.5), lam);
        }
        acc += st.log_wealth / static_cast<double>(horizon);
    }
    CHECK(std::abs(acc / paths - oracle) < 0.02);
}
