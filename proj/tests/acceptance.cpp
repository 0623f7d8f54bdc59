// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Tolerances are fixed here and not tunable from outside.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "lps/analytic.hpp"
#include "lps/harness.hpp"
#include "lps/simulator.hpp"
#include "oracle.hpp"

using namespace lps;
using analytic::ServiceRateProfile;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

sim::SystemSpec spec_of(std::size_t n, double lambda, LengthDistribution law, ServiceRateProfile profile,
                        sim::Discipline d) {
    return sim::SystemSpec{n, ArrivalRates::constant(n, lambda), std::move(profile), std::move(law), d,
                           sim::Variant::Limited};
}

constexpr std::uint64_t kSeed = harness::kDefaultSeed;

// 1. All 78 cells computed; >= 70 within 0.0015 of the reference values;
// every flagged cell agrees with the extended-precision oracle to 1e-9.
Outcome table1_reproduction() {
    const auto t0 = Clock::now();
    const auto rows = harness::table1();
    const double elapsed = seconds_since(t0);

    int cells = 0, matched = 0, flagged_ok = 0, flagged = 0;
    double worst_oracle = 0.0;
    for (const auto& r : rows) {
        std::vector<double> c(r.n);
        for (std::size_t i = 0; i < r.n; ++i) c[i] = 1.0 / static_cast<double>(i + 1);
        const std::vector<double> lam(r.n + 1, r.lambda);
        const double exact[3] = {
            static_cast<double>(oracle::constant_rate_loss(r.n, r.lambda, 1.0)),
            static_cast<double>(oracle::fcfd_zero_inflated(r.n, lam, 1.0, 1.0, c).back()),
            static_cast<double>(oracle::fcfd_zero_inflated(r.n, lam, 0.5, 0.5, c).back()),
        };
        for (std::size_t col = 0; col < 3; ++col) {
            ++cells;
            const double dev_oracle = std::abs(r.computed[col] - exact[col]);
            worst_oracle = std::max(worst_oracle, dev_oracle);
            if (!r.flagged(col)) {
                ++matched;
            } else {
                ++flagged;
                flagged_ok += dev_oracle <= 1e-9;
            }
        }
    }
    const bool pass = cells == 78 && matched >= 70 && flagged_ok == flagged && elapsed < 1.0;
    return {pass, std::to_string(cells) + " cells, " + std::to_string(matched) + " match, " + std::to_string(flagged) +
                      " flagged (" + std::to_string(flagged_ok) + " oracle-confirmed), max |computed-oracle| " +
                      fmt("%.2e", worst_oracle) + ", " + fmt("%.3f", elapsed) + " s"};
}

// 2. Cross identities on n <= 20, lambda b <= 10, absolute 1e-12.
Outcome cross_identities() {
    const auto t0 = Clock::now();
    const std::vector<double> loads{0.01, 0.1, 0.5, 1.0, 1.5, 2.0, 3.0, 5.0, 7.5, 10.0};
    double worst[4] = {0, 0, 0, 0};
    std::size_t checks = 0;
    for (std::size_t n = 1; n <= 20; ++n) {
        const auto eg = ServiceRateProfile::egalitarian(n);
        for (double load : loads) {
            for (double b : {0.5, 1.0, 2.0}) {
                const double lam = load / b;
                const auto rates = ArrivalRates::constant(n, lam);

                // Closed-form loss vs general product form with c_i = 1/i.
                const double a = analytic::corollary2_loss(n, lam, b);
                const double g = analytic::theorem2_probs(n, rates, b, eg).loss();
                worst[0] = std::max(worst[0], std::abs(a - g));

                // Deterministic-length FCFD loss vs n-server Poisson tail.
                const double e4 = analytic::fcfd_constant_loss(n, lam, b);
                const auto srl = analytic::srl_nserver_probs(n, lam, b);
                const double tail = static_cast<double>(oracle::poisson_tail(n, load));
                worst[1] = std::max({worst[1], std::abs(e4 - srl.loss()), std::abs(e4 - tail)});
                ++checks;
            }

            // alpha = 1 gives the truncated geometric law with ratio lambda/mu.
            const auto rates = ArrivalRates::constant(n, load);
            const auto t5 = analytic::theorem5_probs(n, rates, 1.0, 1.0, eg);
            double z = 0.0;
            for (std::size_t i = 0; i <= n; ++i) z += std::pow(load, static_cast<double>(i));
            for (std::size_t i = 0; i <= n; ++i) {
                worst[2] = std::max(worst[2], std::abs(t5.p[i] - std::pow(load, static_cast<double>(i)) / z));
            }

            // Transform route for rho_n vs the direct expression; compared on
            // the resulting distributions.
            for (double alpha : {0.1, 0.5, 0.9}) {
                for (double mu : {0.25, 1.0, 4.0}) {
                    const double lam = load * mu / alpha;
                    if (lam * alpha / mu > 10.0) continue;
                    const auto r = ArrivalRates::constant(n, lam);
                    const auto traffic = analytic::theorem5_traffic(n, r, alpha, mu, eg);
                    auto rho = traffic.rho;
                    rho.back() = analytic::rho_n_from_lst(LengthDistribution::zero_inflated_exponential(alpha, mu),
                                                          lam, n, eg.rate_at(n));
                    const auto via_lst = analytic::product_form(rho);
                    const auto direct = analytic::theorem5_probs(n, r, alpha, mu, eg);
                    for (std::size_t i = 0; i <= n; ++i) {
                        worst[3] = std::max(worst[3], std::abs(via_lst.p[i] - direct.p[i]));
                    }
                }
            }
        }
    }
    const double elapsed = seconds_since(t0);
    const bool pass = std::all_of(std::begin(worst), std::end(worst), [](double w) { return w <= 1e-12; }) &&
                      elapsed < 1.0;
    return {pass, "max dev: closed-form " + fmt("%.1e", worst[0]) + ", n-server tail " + fmt("%.1e", worst[1]) +
                      ", geometric " + fmt("%.1e", worst[2]) + ", transform " + fmt("%.1e", worst[3]) + "; " +
                      std::to_string(checks) + " loss pairs, " + fmt("%.3f", elapsed) + " s"};
}

// 3. Loss is increasing in n at lambda b = 2 and decreasing at lambda b = 1.
Outcome non_monotonicity() {
    const double hi[3] = {analytic::corollary2_loss(1, 2.0, 1.0), analytic::corollary2_loss(2, 2.0, 1.0),
                          analytic::corollary2_loss(5, 2.0, 1.0)};
    const double lo[3] = {analytic::corollary2_loss(1, 1.0, 1.0), analytic::corollary2_loss(2, 1.0, 1.0),
                          analytic::corollary2_loss(5, 1.0, 1.0)};
    const double want_hi[3] = {0.865, 0.892, 0.964};
    const double want_lo[3] = {0.632, 0.523, 0.390};
    bool pass = hi[0] < hi[1] && hi[1] < hi[2] && lo[0] > lo[1] && lo[1] > lo[2];
    for (int i = 0; i < 3; ++i) {
        pass = pass && std::abs(hi[i] - want_hi[i]) <= 0.001 && std::abs(lo[i] - want_lo[i]) <= 0.001;
    }
    return {pass, "lambda b=2: " + fmt("%.4f", hi[0]) + " < " + fmt("%.4f", hi[1]) + " < " + fmt("%.4f", hi[2]) +
                      "; lambda b=1: " + fmt("%.4f", lo[0]) + " > " + fmt("%.4f", lo[1]) + " > " +
                      fmt("%.4f", lo[2])};
}

// 4. Limited/unlimited coupling: no violations over 18 configurations.
Outcome coupling() {
    const auto t0 = Clock::now();
    std::uint64_t violations = 0, checks = 0, min_events = UINT64_MAX;
    int runs = 0;
    std::string first_failure;
    for (std::size_t n : {1u, 2u, 5u}) {
        for (double lam : {0.5, 1.0, 2.0}) {
            for (const auto& law : {LengthDistribution::exponential(1.0), LengthDistribution::deterministic(1.0)}) {
                const auto spec = spec_of(n, lam, law, ServiceRateProfile::egalitarian(n), sim::Discipline::SrlLoss);
                const auto r = sim::run_coupled(spec, 100'000, kSeed + runs);
                violations += r.level_violations + r.multiset_violations;
                checks += r.multiset_checks;
                min_events = std::min(min_events, r.events);
                if (!r.ok() && first_failure.empty()) first_failure = r.failure;
                ++runs;
            }
        }
    }
    const double elapsed = seconds_since(t0);
    const bool pass = violations == 0 && min_events >= 100'000 && elapsed < 30.0;
    if (!first_failure.empty()) std::fputs(first_failure.c_str(), stderr);
    return {pass, std::to_string(runs) + " runs, " + std::to_string(violations) + " violations, " +
                      std::to_string(checks) + " multiset checks, min events " + std::to_string(min_events) + ", " +
                      fmt("%.2f", elapsed) + " s"};
}

// 5. Loss insensitive to the length law beyond its mean. "Within each
// other's CIs" is read as pairwise-overlapping 95% intervals.
Outcome insensitivity() {
    const auto t0 = Clock::now();
    const std::vector<LengthDistribution> laws{LengthDistribution::deterministic(1.0),
                                               LengthDistribution::exponential(1.0),
                                               LengthDistribution::hyperexponential_balanced(1.0, 4.0)};
    const double target = analytic::corollary2_loss(2, 1.0, 1.0);
    std::vector<sim::SimEstimates> est;
    for (const auto& law : laws) {
        const auto spec = spec_of(2, 1.0, law, ServiceRateProfile::egalitarian(2), sim::Discipline::SrlLoss);
        est.push_back(sim::run(spec, sim::RunOptions{.horizon = 1'000'000, .seed = kSeed}));
    }
    const double elapsed = seconds_since(t0);
    bool pass = elapsed < 60.0;
    std::string detail;
    for (std::size_t i = 0; i < est.size(); ++i) {
        pass = pass && std::abs(est[i].loss_prob - 0.523) <= 0.01;
        for (std::size_t j = i + 1; j < est.size(); ++j) {
            pass = pass && std::abs(est[i].loss_prob - est[j].loss_prob) <= est[i].loss_ci_half + est[j].loss_ci_half;
        }
        detail += (i ? ", " : "") + laws[i].describe() + " " + fmt("%.4f", est[i].loss_prob) + "+/-" +
                  fmt("%.4f", est[i].loss_ci_half);
    }
    return {pass, detail + " (exact " + fmt("%.4f", target) + "), " + fmt("%.2f", elapsed) + " s"};
}

// 6. FCFD with zero-inflated exponential lengths.
Outcome zero_inflated_fcfd() {
    const auto spec = spec_of(2, 1.0, LengthDistribution::zero_inflated_exponential(0.5, 0.5),
                              ServiceRateProfile::egalitarian(2), sim::Discipline::FcfdDisplace);
    const auto e = sim::run(spec, sim::RunOptions{.horizon = 1'000'000, .seed = kSeed});
    const double want[3] = {0.4, 0.4, 0.2};
    bool pass = std::abs(e.loss_prob - 0.200) <= 0.01;
    for (int i = 0; i < 3; ++i) pass = pass && std::abs(e.occupancy[i] - want[i]) <= 0.01;
    return {pass, "loss " + fmt("%.4f", e.loss_prob) + ", occupancy (" + fmt("%.4f", e.occupancy[0]) + ", " +
                      fmt("%.4f", e.occupancy[1]) + ", " + fmt("%.4f", e.occupancy[2]) + ")"};
}

// 7. Vanishing mu: loss tends to alpha.
Outcome vanishing_mu_limit() {
    const double loss = analytic::theorem5_probs(3, ArrivalRates::constant(3, 1.0), 0.5, 1e-6,
                                                 ServiceRateProfile::egalitarian(3))
                            .loss();
    return {std::abs(loss - 0.5) <= 1e-4, "loss " + fmt("%.8f", loss) + ", |loss - 0.5| " +
                                              fmt("%.2e", std::abs(loss - 0.5))};
}

// 8. Idle periods of the limited and unlimited systems, from independent runs.
Outcome idle_periods() {
    const auto lim = spec_of(2, 1.0, LengthDistribution::exponential(1.0), ServiceRateProfile::egalitarian(2),
                             sim::Discipline::SrlLoss);
    const auto a = sim::run(lim, sim::RunOptions{.horizon = 100'000, .seed = kSeed, .replication = 0});
    const auto b = sim::run(lim.unlimited_twin(), sim::RunOptions{.horizon = 100'000, .seed = kSeed, .replication = 1});
    const auto c = sim::compare_idle_periods(a.idle_periods, b.idle_periods, 1.0, 0.01, 1000);
    const bool pass = c.two_sample.pass && c.first_vs_reference && c.first_vs_reference->pass;
    return {pass, std::to_string(a.idle_periods.size()) + " vs " + std::to_string(b.idle_periods.size()) +
                      " samples; two-sample D=" + fmt("%.4f", c.two_sample.statistic) + " p=" +
                      fmt("%.3f", c.two_sample.p_value) + "; limited vs Exp(1) D=" +
                      fmt("%.4f", c.first_vs_reference->statistic) + " p=" +
                      fmt("%.3f", c.first_vs_reference->p_value)};
}

// 9. With equal lengths SRL and FCFD lose the same number of jobs.
Outcome srl_fcfd_equivalence() {
    const auto law = LengthDistribution::deterministic(1.0);
    const auto unit = ServiceRateProfile::uniform(3, 1.0);
    const auto srl = sim::run(spec_of(3, 1.5, law, unit, sim::Discipline::SrlLoss),
                              sim::RunOptions{.horizon = 100'000, .seed = kSeed});
    const auto fcfd = sim::run(spec_of(3, 1.5, law, unit, sim::Discipline::FcfdDisplace),
                               sim::RunOptions{.horizon = 100'000, .seed = kSeed});
    const auto lost = [](const sim::SimCounts& c) { return c.displaced + c.blocked; };
    const double exact = 1.0 - std::exp(-1.5) * (1.0 + 1.5 + 1.125);
    const bool pass = lost(srl.totals) == lost(fcfd.totals) && lost(srl.window) == lost(fcfd.window) &&
                      std::abs(srl.loss_prob - exact) <= 0.01 && std::abs(fcfd.loss_prob - exact) <= 0.01;
    return {pass, "lost " + std::to_string(lost(srl.totals)) + " vs " + std::to_string(lost(fcfd.totals)) +
                      ", loss " + fmt("%.4f", srl.loss_prob) + " (exact " + fmt("%.4f", exact) + ")"};
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"table1 reproduction", table1_reproduction},
        {"formula cross identities", cross_identities},
        {"non-monotone loss in n", non_monotonicity},
        {"limited/unlimited coupling", coupling},
        {"insensitivity to length law", insensitivity},
        {"fcfd zero-inflated simulation", zero_inflated_fcfd},
        {"vanishing-mu limit", vanishing_mu_limit},
        {"idle periods", idle_periods},
        {"srl/fcfd equivalence", srl_fcfd_equivalence},
    };
    int failed = 0;
    int k = 0;
    for (const auto& [name, fn] : criteria) {
        ++k;
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("[%s] %d. %s: %s\n", o.pass ? "PASS" : "FAIL", k, name, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
