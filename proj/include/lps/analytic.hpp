#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lps/stochastic.hpp"

// Closed-form stationary probabilities for limited processor-sharing loss
// systems. Every function here is pure.
namespace lps::analytic {

// Per-job service rates c_1..c_n. Above level n the unlimited system keeps
// serving each job at c_n.
class ServiceRateProfile {
public:
    explicit ServiceRateProfile(std::vector<double> rates);
    // c_i = 1/i: total service rate 1 regardless of occupancy.
    static ServiceRateProfile egalitarian(std::size_t n);
    static ServiceRateProfile uniform(std::size_t n, double rate = 1.0);

    // 1-based level; levels above n return c_n.
    double rate_at(std::size_t level) const;
    std::size_t capacity() const { return c_.size(); }
    const std::vector<double>& values() const { return c_; }

    bool is_egalitarian() const;
    bool is_unit() const;

private:
    std::vector<double> c_;
};

struct RhoProfile {
    std::vector<double> rho; // rho_1..rho_n
    // Ratio governing the unlimited system above level n, lambda_n b/(n c_n).
    // Equals rho_n when lambda_{n-1} = lambda_n.
    double tail = 0.0;

    double rho_top() const { return rho.back(); }
};

struct StateDistribution {
    std::vector<double> p; // p_0..p_n

    double loss() const { return p.back(); }
    std::size_t capacity() const { return p.size() - 1; }
    double mean_jobs() const;
};

// Fraction of arrivals that are lost: lambda_n p_n / sum_i lambda_i p_i.
// Equals p_n for a constant arrival rate; 0 without arrivals.
double arrival_loss(const StateDistribution& dist, const ArrivalRates& rates);

struct Sojourn {
    double mean_jobs;
    double mean_time;
};

// M/G/infinity tail form: Poisson(lambda b) masses below n, the upper tail at n.
StateDistribution srl_nserver_probs(std::size_t n, double lambda, double mean_length);

// rho_i = lambda_{i-1} b / (i c_i): the arrival rate that moves the system
// from i-1 to i jobs, over the total service rate at i jobs.
RhoProfile traffic_profile(const ArrivalRates& rates, double mean_length, const ServiceRateProfile& profile);

// Stationary probability of i jobs in the unlimited system (rate c_n per job
// above level n, arrivals at lambda_n above level n). Any i >= 0.
double unlimited_ps_probs(const ArrivalRates& rates, double mean_length, const ServiceRateProfile& profile,
                          std::size_t i);
// p-hat_0..p-hat_{n-1}.
std::vector<double> unlimited_ps_head(const ArrivalRates& rates, double mean_length,
                                      const ServiceRateProfile& profile);

// Limited-system distribution from the unlimited head: the top state absorbs
// the unlimited tail mass.
StateDistribution truncate_unlimited(std::span<const double> unlimited_head);

// Shortest-remaining-length loss, state-dependent Poisson arrivals.
StateDistribution theorem2_probs(std::size_t n, const ArrivalRates& rates, double mean_length,
                                 const ServiceRateProfile& profile);

// Loss probability for constant lambda and egalitarian rates, written in the
// Poisson-partial-sum form.
double corollary2_loss(std::size_t n, double lambda, double mean_length);

// Constant length b, unit rates: P(at least n arrivals during one service).
double fcfd_constant_loss(std::size_t n, double lambda, double length);

RhoProfile theorem5_traffic(std::size_t n, const ArrivalRates& rates, double alpha, double mu,
                            const ServiceRateProfile& profile);
// First-come-first-displaced with the zero-inflated exponential length law.
StateDistribution theorem5_probs(std::size_t n, const ArrivalRates& rates, double alpha, double mu,
                                 const ServiceRateProfile& profile);

// rho_n = (1 - beta(lambda_n)) / beta(lambda_n), beta being the LST of the
// time a job needs at level n, i.e. the length scaled by 1/(n c_n).
double rho_n_from_lst(const LengthDistribution& dist, double lambda_n, std::size_t n, double c_n);

// Erlang B via B_k = rho B_{k-1} / (k + rho B_{k-1}).
double erlang_b(std::size_t n, double offered_load);

Sojourn little_sojourn(const StateDistribution& dist, double lambda);

// Limit of the loss probability of theorem5_probs as mu -> 0.
double remark3_limit(std::size_t n, const ArrivalRates& rates, double alpha, const ServiceRateProfile& profile);

// p_0..p_n proportional to the cumulative products of rho, normalised in log
// space.
StateDistribution product_form(std::span<const double> rho);

} // namespace lps::analytic
