#include "lps/analytic.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "lps/special.hpp"

namespace lps::analytic {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_log(double v) {
    return v > 0.0 ? std::log(v) : kNegInf;
}

void check_capacity(std::size_t n) {
    if (n < 1) throw std::invalid_argument("capacity n must be at least 1");
}

void check_mean_length(double b) {
    if (!(b > 0.0) || !std::isfinite(b)) throw std::invalid_argument("mean length must be positive");
}

void check_rate(double lambda) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("arrival rate must be nonnegative");
}

void check_shapes(std::size_t n, const ArrivalRates& rates, const ServiceRateProfile& profile) {
    check_capacity(n);
    if (rates.capacity() != n) throw std::invalid_argument("arrival rates must cover levels 0..n");
    if (profile.capacity() != n) throw std::invalid_argument("service rate profile must cover levels 1..n");
}

// Unnormalised log weights of the unlimited system, head levels 0..n-1 plus
// the aggregated mass of all levels >= n.
struct UnlimitedWeights {
    std::vector<double> log_head;
    double log_prod_n; // log prod_{j<=n} rho_j
    double x;          // n times the tail ratio
    double log_tail;
    double log_norm;
};

UnlimitedWeights unlimited_weights(const ArrivalRates& rates, double b, const ServiceRateProfile& profile) {
    const std::size_t n = profile.capacity();
    check_shapes(n, rates, profile);
    check_mean_length(b);
    const RhoProfile rho = traffic_profile(rates, b, profile);

    UnlimitedWeights w;
    w.log_head.reserve(n + 1);
    double acc = 0.0;
    w.log_head.push_back(0.0);
    for (std::size_t j = 1; j < n; ++j) {
        acc += safe_log(rho.rho[j - 1]);
        w.log_head.push_back(acc);
    }
    w.log_prod_n = acc + safe_log(rho.rho_top());
    w.x = static_cast<double>(n) * rho.tail;
    if (!std::isfinite(w.x)) throw std::range_error("traffic intensity is not finite");
    w.log_tail = w.log_prod_n == kNegInf ? kNegInf : w.log_prod_n + special::log_tail_ratio(n, w.x);

    std::vector<double> all = w.log_head;
    all.push_back(w.log_tail);
    w.log_norm = special::log_sum_exp(all);
    if (!std::isfinite(w.log_norm)) throw std::range_error("unlimited system is not normalisable");
    return w;
}

} // namespace

ServiceRateProfile::ServiceRateProfile(std::vector<double> rates) : c_(std::move(rates)) {
    if (c_.empty()) throw std::invalid_argument("service rate profile needs n >= 1 entries");
    for (double c : c_) {
        if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("service rates must be positive");
    }
}

ServiceRateProfile ServiceRateProfile::egalitarian(std::size_t n) {
    check_capacity(n);
    std::vector<double> c(n);
    for (std::size_t i = 0; i < n; ++i) c[i] = 1.0 / static_cast<double>(i + 1);
    return ServiceRateProfile(std::move(c));
}

ServiceRateProfile ServiceRateProfile::uniform(std::size_t n, double rate) {
    check_capacity(n);
    return ServiceRateProfile(std::vector<double>(n, rate));
}

double ServiceRateProfile::rate_at(std::size_t level) const {
    if (level == 0) throw std::out_of_range("service rate is defined for levels >= 1");
    return c_[std::min(level, c_.size()) - 1];
}

bool ServiceRateProfile::is_egalitarian() const {
    for (std::size_t i = 0; i < c_.size(); ++i) {
        if (c_[i] != 1.0 / static_cast<double>(i + 1)) return false;
    }
    return true;
}

bool ServiceRateProfile::is_unit() const {
    for (double c : c_) {
        if (c != 1.0) return false;
    }
    return true;
}

double StateDistribution::mean_jobs() const {
    double l = 0.0;
    for (std::size_t i = 1; i < p.size(); ++i) l += static_cast<double>(i) * p[i];
    return l;
}

StateDistribution srl_nserver_probs(std::size_t n, double lambda, double mean_length) {
    check_capacity(n);
    check_rate(lambda);
    check_mean_length(mean_length);
    const double x = lambda * mean_length;
    StateDistribution d;
    d.p.reserve(n + 1);
    for (std::size_t i = 0; i < n; ++i) d.p.push_back(std::exp(special::log_poisson_pmf(i, x)));
    d.p.push_back(special::poisson_tail(n, x));
    return d;
}

RhoProfile traffic_profile(const ArrivalRates& rates, double mean_length, const ServiceRateProfile& profile) {
    const std::size_t n = profile.capacity();
    check_shapes(n, rates, profile);
    check_mean_length(mean_length);
    RhoProfile r;
    r.rho.reserve(n);
    for (std::size_t i = 1; i <= n; ++i) {
        r.rho.push_back(rates.at(i - 1) * mean_length / (static_cast<double>(i) * profile.rate_at(i)));
    }
    r.tail = rates.at(n) * mean_length / (static_cast<double>(n) * profile.rate_at(n));
    return r;
}

double unlimited_ps_probs(const ArrivalRates& rates, double mean_length, const ServiceRateProfile& profile,
                          std::size_t i) {
    const UnlimitedWeights w = unlimited_weights(rates, mean_length, profile);
    const std::size_t n = profile.capacity();
    if (i < n) return std::exp(w.log_head[i] - w.log_norm);
    if (w.log_prod_n == kNegInf) return 0.0;
    // (n tail)^{i-n} n!/i! times prod_{j<=n} rho_j.
    const double k = static_cast<double>(i - n);
    const double log_w = w.log_prod_n + (w.x > 0.0 ? k * std::log(w.x) : (i == n ? 0.0 : kNegInf)) +
                         std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(i) + 1.0);
    return std::exp(log_w - w.log_norm);
}

std::vector<double> unlimited_ps_head(const ArrivalRates& rates, double mean_length,
                                      const ServiceRateProfile& profile) {
    const UnlimitedWeights w = unlimited_weights(rates, mean_length, profile);
    std::vector<double> head;
    head.reserve(w.log_head.size());
    for (double lw : w.log_head) head.push_back(std::exp(lw - w.log_norm));
    return head;
}

StateDistribution truncate_unlimited(std::span<const double> unlimited_head) {
    if (unlimited_head.empty()) throw std::invalid_argument("unlimited head must hold p-hat_0..p-hat_{n-1}, n >= 1");
    double sum = 0.0;
    for (double v : unlimited_head) {
        if (!(v >= 0.0)) throw std::invalid_argument("unlimited head probabilities must be nonnegative");
        sum += v;
    }
    if (sum > 1.0 + 1e-12) throw std::invalid_argument("unlimited head sums to more than 1");
    StateDistribution d;
    d.p.assign(unlimited_head.begin(), unlimited_head.end());
    d.p.push_back(std::max(0.0, 1.0 - sum));
    return d;
}

StateDistribution theorem2_probs(std::size_t n, const ArrivalRates& rates, double mean_length,
                                 const ServiceRateProfile& profile) {
    check_shapes(n, rates, profile);
    const UnlimitedWeights w = unlimited_weights(rates, mean_length, profile);
    StateDistribution d;
    d.p.reserve(n + 1);
    for (double lw : w.log_head) d.p.push_back(std::exp(lw - w.log_norm));
    d.p.push_back(std::exp(w.log_tail - w.log_norm));
    return d;
}

double corollary2_loss(std::size_t n, double lambda, double mean_length) {
    check_capacity(n);
    check_rate(lambda);
    check_mean_length(mean_length);
    const double load = lambda * mean_length;
    if (load == 0.0) return 0.0;
    const double nd = static_cast<double>(n);
    const double x = nd * load;
    if (!std::isfinite(x)) throw std::range_error("offered load is not finite");

    // Numerator: e^x - sum_{i<n} x^i/i!.
    const double log_num = nd * std::log(x) - std::lgamma(nd + 1.0) + special::log_tail_ratio(n, x);
    // Extra denominator term: n^n/n! * sum_{i<n} load^i.
    std::vector<double> powers(n);
    for (std::size_t i = 0; i < n; ++i) powers[i] = static_cast<double>(i) * std::log(load);
    const double log_head = nd * std::log(nd) - std::lgamma(nd + 1.0) + special::log_sum_exp(powers);
    return 1.0 / (1.0 + std::exp(log_head - log_num));
}

double fcfd_constant_loss(std::size_t n, double lambda, double length) {
    check_capacity(n);
    check_rate(lambda);
    check_mean_length(length);
    return special::poisson_tail(n, lambda * length);
}

RhoProfile theorem5_traffic(std::size_t n, const ArrivalRates& rates, double alpha, double mu,
                            const ServiceRateProfile& profile) {
    check_shapes(n, rates, profile);
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0, 1]");
    if (!(mu > 0.0) || !std::isfinite(mu)) throw std::invalid_argument("mu must be positive");
    RhoProfile r;
    r.rho.reserve(n);
    for (std::size_t i = 1; i < n; ++i) {
        r.rho.push_back(alpha * rates.at(i - 1) / (static_cast<double>(i) * profile.rate_at(i) * mu));
    }
    // Into n: nonzero-length arrivals at n-1. Out of n: completions, plus
    // zero-length arrivals that displace a job and leave at once.
    const double lambda_n = rates.at(n);
    const double out_rate = (1.0 - alpha) * lambda_n + static_cast<double>(n) * profile.rate_at(n) * mu;
    r.rho.push_back(alpha * rates.at(n - 1) / out_rate);
    r.tail = r.rho.back();
    return r;
}

StateDistribution theorem5_probs(std::size_t n, const ArrivalRates& rates, double alpha, double mu,
                                 const ServiceRateProfile& profile) {
    return product_form(theorem5_traffic(n, rates, alpha, mu, profile).rho);
}

double rho_n_from_lst(const LengthDistribution& dist, double lambda_n, std::size_t n, double c_n) {
    check_capacity(n);
    check_rate(lambda_n);
    if (!(c_n > 0.0)) throw std::invalid_argument("service rate must be positive");
    const double beta = dist.lst(lambda_n / (static_cast<double>(n) * c_n));
    if (!(beta > 0.0)) throw std::domain_error("transform vanishes at lambda_n; rho_n is singular");
    return (1.0 - beta) / beta;
}

double erlang_b(std::size_t n, double offered_load) {
    if (!(offered_load >= 0.0) || !std::isfinite(offered_load)) {
        throw std::invalid_argument("offered load must be nonnegative");
    }
    double b = 1.0;
    for (std::size_t k = 1; k <= n; ++k) {
        b = offered_load * b / (static_cast<double>(k) + offered_load * b);
    }
    return b;
}

double arrival_loss(const StateDistribution& dist, const ArrivalRates& rates) {
    if (rates.capacity() != dist.capacity()) throw std::invalid_argument("rates and distribution disagree on n");
    double offered = 0.0;
    for (std::size_t i = 0; i < dist.p.size(); ++i) offered += rates.at(i) * dist.p[i];
    if (!(offered > 0.0)) return 0.0;
    return rates.at(dist.capacity()) * dist.loss() / offered;
}

Sojourn little_sojourn(const StateDistribution& dist, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("Little's law needs a positive arrival rate");
    const double l = dist.mean_jobs();
    return {l, l / lambda};
}

double remark3_limit(std::size_t n, const ArrivalRates& rates, double alpha, const ServiceRateProfile& profile) {
    check_shapes(n, rates, profile);
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0, 1]");
    return alpha;
}

StateDistribution product_form(std::span<const double> rho) {
    std::vector<double> logw;
    logw.reserve(rho.size() + 1);
    double acc = 0.0;
    logw.push_back(0.0);
    for (double r : rho) {
        if (!(r >= 0.0)) throw std::invalid_argument("traffic intensities must be nonnegative");
        acc += safe_log(r);
        logw.push_back(acc);
    }
    const double norm = special::log_sum_exp(logw);
    if (!std::isfinite(norm)) throw std::range_error("product-form weights overflow");
    StateDistribution d;
    d.p.reserve(logw.size());
    for (double lw : logw) d.p.push_back(std::exp(lw - norm));
    return d;
}

} // namespace lps::analytic
