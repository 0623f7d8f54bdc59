#pragma once

#include <cstddef>
#include <span>

namespace lps::stats {

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
    bool pass = true;
};

// Two-sided 97.5% Student t quantile for the given degrees of freedom.
double t_quantile_975(std::size_t dof);

// Mean and 95% confidence half-width of independent (or batch) estimates.
struct MeanCi {
    double mean = 0.0;
    double half_width = 0.0;
};
MeanCi mean_ci(std::span<const double> values);

// Asymptotic Kolmogorov survival function Q(t) = 2 sum (-1)^{k-1} exp(-2 k^2 t^2).
double kolmogorov_survival(double t);

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b, double level);
KsResult ks_exponential(std::span<const double> sample, double rate, double level);

} // namespace lps::stats
