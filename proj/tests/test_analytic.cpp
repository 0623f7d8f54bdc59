#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "lps/analytic.hpp"
#include "lps/special.hpp"
#include "oracle.hpp"

using namespace lps;
using namespace lps::analytic;

namespace {

void check_distribution(const StateDistribution& d) {
    double sum = 0.0;
    for (double p : d.p) {
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
        sum += p;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-10);
}

double as_double(const oracle::Real& r) {
    return static_cast<double>(r);
}

} // namespace

TEST_CASE("poisson tail helpers agree with the direct complement") {
    for (std::size_t n : {1u, 2u, 5u, 20u, 60u}) {
        for (double x : {1e-6, 0.01, 0.3, 1.0, 4.0, 19.5, 21.0, 55.0, 200.0}) {
            CAPTURE(n);
            CAPTURE(x);
            const double exact = as_double(oracle::poisson_tail(n, x));
            CHECK(special::poisson_tail(n, x) == doctest::Approx(exact).epsilon(1e-12));
        }
    }
    CHECK(special::log_tail_ratio(3, 0.0) == 0.0);
    CHECK(special::poisson_tail(0, 2.0) == 1.0);
    CHECK(special::poisson_tail(3, 0.0) == 0.0);
    // Large arguments stay finite in log space.
    CHECK(std::isfinite(special::log_tail_ratio(5, 5000.0)));
}

TEST_CASE("srl_nserver_probs") {
    CHECK(srl_nserver_probs(1, 0.5, 1.0).loss() == doctest::Approx(0.39346934028736658).epsilon(1e-14));
    CHECK(srl_nserver_probs(2, 1.0, 1.0).loss() == doctest::Approx(0.26424111765711536).epsilon(1e-14));
    const auto empty = srl_nserver_probs(3, 0.0, 1.0);
    CHECK(empty.p == std::vector<double>{1.0, 0.0, 0.0, 0.0});
    CHECK_THROWS_AS(srl_nserver_probs(2, 1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(srl_nserver_probs(0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("truncate_unlimited") {
    const std::vector<double> head{0.5, 0.3};
    const auto d = truncate_unlimited(head);
    CHECK(d.p.size() == 3);
    CHECK(d.loss() == doctest::Approx(0.2));

    const auto srl = srl_nserver_probs(2, 1.0, 1.0);
    const std::vector<double> srl_head{srl.p[0], srl.p[1]};
    CHECK(truncate_unlimited(srl_head).loss() == doctest::Approx(1.0 - 2.0 * std::exp(-1.0)).epsilon(1e-14));

    CHECK_THROWS_AS(truncate_unlimited(std::vector<double>{}), std::invalid_argument);
    CHECK_THROWS_AS(truncate_unlimited(std::vector<double>{0.7, 0.4}), std::invalid_argument);
}

TEST_CASE("unlimited_ps_probs") {
    const auto rates = ArrivalRates::constant(2, 1.0);
    const auto prof = ServiceRateProfile::egalitarian(2);
    // p-hat_0 of the unlimited system equals p_0 of the limited one.
    CHECK(unlimited_ps_probs(rates, 1.0, prof, 0) ==
          doctest::Approx(theorem2_probs(2, rates, 1.0, prof).p[0]).epsilon(1e-13));
    // Egalitarian, constant lambda: head ratios are (lambda b)^i.
    const auto r3 = ArrivalRates::constant(4, 0.7);
    const auto p4 = ServiceRateProfile::egalitarian(4);
    const double p0 = unlimited_ps_probs(r3, 1.0, p4, 0);
    for (std::size_t i = 1; i < 4; ++i) {
        CHECK(unlimited_ps_probs(r3, 1.0, p4, i) / p0 == doctest::Approx(std::pow(0.7, i)).epsilon(1e-12));
    }
    CHECK(unlimited_ps_probs(ArrivalRates::constant(3, 0.0), 1.0, ServiceRateProfile::egalitarian(3), 0) == 1.0);

    // The whole unlimited distribution sums to one.
    double total = 0.0;
    for (std::size_t i = 0; i < 200; ++i) total += unlimited_ps_probs(rates, 1.0, prof, i);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

    // Tail mass equals the limited top state.
    const auto lim = theorem2_probs(2, rates, 1.0, prof);
    double tail = 0.0;
    for (std::size_t i = 2; i < 200; ++i) tail += unlimited_ps_probs(rates, 1.0, prof, i);
    CHECK(tail == doctest::Approx(lim.loss()).epsilon(1e-12));
}

TEST_CASE("theorem2_probs against reference values and the high-precision oracle") {
    const auto eg2 = ServiceRateProfile::egalitarian(2);
    CHECK(theorem2_probs(2, ArrivalRates::constant(2, 1.0), 1.0, eg2).loss() == doctest::Approx(0.523).epsilon(0.001));
    const auto eg5 = ServiceRateProfile::egalitarian(5);
    CHECK(theorem2_probs(5, ArrivalRates::constant(5, 2.0), 1.0, eg5).loss() == doctest::Approx(0.964).epsilon(0.001));
    const auto zero = theorem2_probs(3, ArrivalRates::constant(3, 0.0), 1.0, ServiceRateProfile::egalitarian(3));
    CHECK(zero.p == std::vector<double>{1.0, 0.0, 0.0, 0.0});

    // State-dependent rates and an arbitrary profile.
    const std::vector<double> lam{1.3, 0.9, 2.0, 0.4};
    const std::vector<double> c{1.0, 0.7, 0.45};
    const auto d = theorem2_probs(3, ArrivalRates(lam), 1.7, ServiceRateProfile(c));
    const auto o = oracle::truncated_unlimited(3, lam, 1.7, c);
    check_distribution(d);
    for (std::size_t i = 0; i <= 3; ++i) CHECK(d.p[i] == doctest::Approx(as_double(o[i])).epsilon(1e-12));

    // lambda_{n-1} = 0 makes the top state unreachable.
    const auto top_dead = theorem2_probs(2, ArrivalRates({1.0, 0.0, 3.0}), 1.0, eg2);
    CHECK(top_dead.loss() == 0.0);
    check_distribution(top_dead);
    // lambda_n = 0: the top state is reached but no arrival is ever lost.
    const ArrivalRates quiet_top({1.0, 1.0, 0.0});
    const auto no_loss = theorem2_probs(2, quiet_top, 1.0, eg2);
    CHECK(no_loss.loss() > 0.0);
    CHECK(arrival_loss(no_loss, quiet_top) == 0.0);
    check_distribution(no_loss);

    // Large loads stay finite.
    const auto heavy = theorem2_probs(3, ArrivalRates::constant(3, 400.0), 1.0, ServiceRateProfile::egalitarian(3));
    check_distribution(heavy);
    CHECK(heavy.loss() > 0.99);
}

TEST_CASE("state-dependent rates follow detailed balance") {
    // Exponential lengths make the unlimited system a birth-death chain:
    // p_i / p_{i-1} = lambda_{i-1} b / (i c_i).
    const ArrivalRates r({1.5, 1.2, 0.8, 0.6});
    const ServiceRateProfile c({1.0, 0.6, 0.4});
    const auto d = theorem2_probs(3, r, 1.0, c);
    CHECK(d.p[1] / d.p[0] == doctest::Approx(1.5).epsilon(1e-13));
    CHECK(d.p[2] / d.p[1] == doctest::Approx(1.2 / 1.2).epsilon(1e-13));
    const auto t = traffic_profile(r, 1.0, c);
    CHECK(t.rho_top() == doctest::Approx(0.8 / 1.2).epsilon(1e-15));
    CHECK(t.tail == doctest::Approx(0.6 / 1.2).epsilon(1e-15));
    // Tail above n: ratio lambda_n b / (i c_n).
    CHECK(unlimited_ps_probs(r, 1.0, c, 5) / unlimited_ps_probs(r, 1.0, c, 4) ==
          doctest::Approx(0.6 / (5 * 0.4)).epsilon(1e-12));
    // Lost fraction of arrivals weights p_n by lambda_n.
    double offered = 0.0;
    for (std::size_t i = 0; i <= 3; ++i) offered += r.at(i) * d.p[i];
    CHECK(arrival_loss(d, r) == doctest::Approx(0.6 * d.p[3] / offered).epsilon(1e-14));
    const auto flat = theorem2_probs(3, ArrivalRates::constant(3, 0.9), 1.0, c);
    CHECK(arrival_loss(flat, ArrivalRates::constant(3, 0.9)) == doctest::Approx(flat.loss()).epsilon(1e-14));
}

TEST_CASE("corollary2_loss") {
    CHECK(corollary2_loss(1, 0.5, 1.0) == doctest::Approx(0.393).epsilon(0.002));
    CHECK(corollary2_loss(5, 1.5, 1.0) == doctest::Approx(0.820).epsilon(0.001));
    CHECK(corollary2_loss(2, 0.0, 1.0) == 0.0);
    CHECK(corollary2_loss(2, 1.0, 1.0) == doctest::Approx(0.52318831191152978).epsilon(1e-13));
}

TEST_CASE("formula cross identities on the n <= 20, lambda b <= 10 grid") {
    for (std::size_t n = 1; n <= 20; ++n) {
        const auto eg = ServiceRateProfile::egalitarian(n);
        const auto unit = ServiceRateProfile::uniform(n, 1.0);
        for (double load : {0.01, 0.1, 0.5, 1.0, 1.7, 3.0, 6.5, 10.0}) {
            CAPTURE(n);
            CAPTURE(load);
            const auto rates = ArrivalRates::constant(n, load);
            const auto t2 = theorem2_probs(n, rates, 1.0, eg);
            check_distribution(t2);
            CHECK(std::abs(corollary2_loss(n, load, 1.0) - t2.loss()) <= 1e-12);
            CHECK(std::abs(t2.loss() - as_double(oracle::constant_rate_loss(n, load, 1.0))) <= 1e-12);

            const auto flat = theorem2_probs(n, rates, 1.0, unit);
            const auto srl = srl_nserver_probs(n, load, 1.0);
            for (std::size_t i = 0; i <= n; ++i) CHECK(std::abs(flat.p[i] - srl.p[i]) <= 1e-12);

            CHECK(fcfd_constant_loss(n, load, 1.0) == srl.loss());

            // lambda and b enter only through their product.
            CHECK(std::abs(corollary2_loss(n, load / 2.5, 2.5) - corollary2_loss(n, load, 1.0)) <= 1e-12);

            // alpha = 1: truncated geometric with ratio lambda b.
            const auto geo = theorem5_probs(n, rates, 1.0, 1.0, eg);
            double z = 0.0;
            for (std::size_t i = 0; i <= n; ++i) z += std::pow(load, static_cast<double>(i));
            for (std::size_t i = 0; i <= n; ++i) {
                CHECK(std::abs(geo.p[i] - std::pow(load, static_cast<double>(i)) / z) <= 1e-12);
            }
        }
    }
}

TEST_CASE("fcfd_constant_loss") {
    CHECK(fcfd_constant_loss(1, 1.0, 1.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
    CHECK(fcfd_constant_loss(2, 1.0, 1.0) == doctest::Approx(0.26424111765711536).epsilon(1e-14));
    CHECK(fcfd_constant_loss(2, 0.0, 1.0) == 0.0);
    CHECK(fcfd_constant_loss(3, 1.5, 1.0) == doctest::Approx(0.19115316946194187).epsilon(1e-13));
}

TEST_CASE("theorem5_probs") {
    const auto eg2 = ServiceRateProfile::egalitarian(2);
    const auto a = theorem5_probs(2, ArrivalRates::constant(2, 1.0), 0.5, 0.5, eg2);
    CHECK(a.p[0] == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(a.p[1] == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(a.p[2] == doctest::Approx(0.2).epsilon(1e-14));
    const auto b = theorem5_probs(2, ArrivalRates::constant(2, 1.0), 1.0, 1.0, eg2);
    for (double p : b.p) CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    const auto c = theorem5_probs(1, ArrivalRates::constant(1, 0.1), 0.5, 0.5, ServiceRateProfile::egalitarian(1));
    CHECK(c.loss() == doctest::Approx((0.05 / 0.55) / (1.0 + 0.05 / 0.55)).epsilon(1e-14));
    CHECK(c.loss() == doctest::Approx(0.083).epsilon(0.01));

    const std::vector<double> lam{0.8, 1.1, 0.6, 1.9};
    const std::vector<double> cs{1.0, 0.8, 0.3};
    const auto d = theorem5_probs(3, ArrivalRates(lam), 0.3, 0.2, ServiceRateProfile(cs));
    const auto o = oracle::fcfd_zero_inflated(3, lam, 0.3, 0.2, cs);
    for (std::size_t i = 0; i <= 3; ++i) CHECK(d.p[i] == doctest::Approx(as_double(o[i])).epsilon(1e-13));

    CHECK_THROWS_AS(theorem5_probs(2, ArrivalRates::constant(2, 1.0), 0.0, 1.0, eg2), std::invalid_argument);
    CHECK_THROWS_AS(theorem5_probs(2, ArrivalRates::constant(2, 1.0), 1.2, 1.0, eg2), std::invalid_argument);
}

TEST_CASE("rho_n_from_lst") {
    const auto z = LengthDistribution::zero_inflated_exponential(0.5, 0.5);
    CHECK(rho_n_from_lst(z, 1.0, 2, 0.5) == doctest::Approx(0.5).epsilon(1e-14));
    const auto det = LengthDistribution::deterministic(1.0);
    const double rho1 = rho_n_from_lst(det, 1.0, 1, 1.0);
    CHECK(rho1 == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-14));
    CHECK(rho1 / (1.0 + rho1) == doctest::Approx(fcfd_constant_loss(1, 1.0, 1.0)).epsilon(1e-14));
    CHECK(rho_n_from_lst(LengthDistribution::exponential(3.0), 0.0, 4, 0.25) == 0.0);

    // Transform route equals the direct expression across a grid.
    for (std::size_t n = 1; n <= 20; ++n) {
        for (double alpha : {0.1, 0.5, 0.9, 1.0}) {
            for (double mu : {0.1, 0.5, 1.0, 4.0}) {
                for (double lam : {0.05, 0.5, 2.0, 10.0}) {
                    if (lam * alpha / mu > 10.0) continue;
                    const auto profile = ServiceRateProfile::egalitarian(n);
                    const double direct =
                        theorem5_traffic(n, ArrivalRates::constant(n, lam), alpha, mu, profile).rho_top();
                    const double via_lst = rho_n_from_lst(LengthDistribution::zero_inflated_exponential(alpha, mu),
                                                          lam, n, profile.rate_at(n));
                    CHECK(std::abs(via_lst - direct) <= 1e-12 * std::max(1.0, direct));
                }
            }
        }
    }
}

TEST_CASE("erlang_b") {
    CHECK(erlang_b(1, 0.5) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(erlang_b(2, 1.0) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(erlang_b(4, 0.0) == 0.0);
    CHECK(erlang_b(0, 2.0) == 1.0);
    for (double rho : {0.3, 1.0, 7.5}) {
        double prev = 1.0;
        for (std::size_t n = 1; n <= 30; ++n) {
            const double b = erlang_b(n, rho);
            CHECK(b < prev);
            CHECK(b == doctest::Approx(as_double(oracle::erlang_b(n, rho))).epsilon(1e-13));
            prev = b;
        }
    }
}

TEST_CASE("little_sojourn") {
    const auto s = little_sojourn(StateDistribution{{0.4, 0.4, 0.2}}, 1.0);
    CHECK(s.mean_jobs == doctest::Approx(0.8));
    CHECK(s.mean_time == doctest::Approx(0.8));
    const auto e = little_sojourn(StateDistribution{{1.0, 0.0, 0.0}}, 1.0);
    CHECK(e.mean_jobs == 0.0);
    CHECK(e.mean_time == 0.0);
    const auto two = little_sojourn(theorem2_probs(1, ArrivalRates::constant(1, 0.5), 1.0,
                                                   ServiceRateProfile::egalitarian(1)),
                                    0.5);
    CHECK(two.mean_jobs == doctest::Approx(0.39346934028736658).epsilon(1e-13));
    CHECK(two.mean_time == doctest::Approx(0.78693868057473315).epsilon(1e-13));
    CHECK_THROWS_AS(little_sojourn(StateDistribution{{1.0, 0.0}}, 0.0), std::invalid_argument);
}

TEST_CASE("remark3_limit") {
    const auto eg3 = ServiceRateProfile::egalitarian(3);
    const auto r = ArrivalRates::constant(3, 1.0);
    CHECK(remark3_limit(3, r, 0.5, eg3) == 0.5);
    CHECK(remark3_limit(3, r, 1.0, eg3) == 1.0);
    CHECK(std::abs(theorem5_probs(3, r, 0.5, 1e-6, eg3).loss() - 0.5) <= 1e-4);
    // Convergence towards alpha as mu shrinks.
    double prev_gap = 1.0;
    for (double mu : {1.0, 0.1, 0.01, 0.001}) {
        const double gap = std::abs(theorem5_probs(3, r, 0.3, mu, eg3).loss() - 0.3);
        CHECK(gap < prev_gap);
        prev_gap = gap;
    }
}

TEST_CASE("non-monotone loss in capacity") {
    const double a1 = corollary2_loss(1, 2.0, 1.0);
    const double a2 = corollary2_loss(2, 2.0, 1.0);
    const double a5 = corollary2_loss(5, 2.0, 1.0);
    CHECK(a1 < a2);
    CHECK(a2 < a5);
    const double b1 = corollary2_loss(1, 1.0, 1.0);
    const double b2 = corollary2_loss(2, 1.0, 1.0);
    const double b5 = corollary2_loss(5, 1.0, 1.0);
    CHECK(b1 > b2);
    CHECK(b2 > b5);
}

TEST_CASE("service rate profiles") {
    const auto eg = ServiceRateProfile::egalitarian(4);
    CHECK(eg.rate_at(3) == 1.0 / 3.0);
    CHECK(eg.rate_at(9) == 0.25);
    CHECK(eg.is_egalitarian());
    CHECK_FALSE(eg.is_unit());
    CHECK(ServiceRateProfile::uniform(3).is_unit());
    CHECK_THROWS_AS(ServiceRateProfile(std::vector<double>{1.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(eg.rate_at(0), std::out_of_range);
}
