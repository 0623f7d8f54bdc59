#include "lps/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

namespace lps::stats {

namespace {

// Stephens' small-sample correction to the asymptotic distribution.
KsResult finish(double d, double effective_n, double level) {
    const double root = std::sqrt(effective_n);
    KsResult r;
    r.statistic = d;
    r.p_value = kolmogorov_survival((root + 0.12 + 0.11 / root) * d);
    r.pass = r.p_value >= level;
    return r;
}

} // namespace

double t_quantile_975(std::size_t dof) {
    if (dof == 0) throw std::invalid_argument("t quantile needs at least one degree of freedom");
    boost::math::students_t dist(static_cast<double>(dof));
    return boost::math::quantile(dist, 0.975);
}

MeanCi mean_ci(std::span<const double> values) {
    MeanCi r;
    if (values.empty()) return r;
    double sum = 0.0;
    for (double v : values) sum += v;
    r.mean = sum / static_cast<double>(values.size());
    if (values.size() < 2) return r;
    double ss = 0.0;
    for (double v : values) ss += (v - r.mean) * (v - r.mean);
    const double k = static_cast<double>(values.size());
    r.half_width = t_quantile_975(values.size() - 1) * std::sqrt(ss / (k - 1.0) / k);
    return r;
}

double kolmogorov_survival(double t) {
    if (t < 0.2) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = sign * std::exp(-2.0 * k * k * t * t);
        sum += term;
        if (std::abs(term) < 1e-16) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b, double level) {
    if (a.empty() || b.empty()) throw std::invalid_argument("two-sample KS needs nonempty samples");
    std::vector<double> x(a.begin(), a.end());
    std::vector<double> y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double nx = static_cast<double>(x.size());
    const double ny = static_cast<double>(y.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] == v) ++i;
        while (j < y.size() && y[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
    }
    return finish(d, nx * ny / (nx + ny), level);
}

KsResult ks_exponential(std::span<const double> sample, double rate, double level) {
    if (sample.empty()) throw std::invalid_argument("KS test needs a nonempty sample");
    if (!(rate > 0.0)) throw std::invalid_argument("reference rate must be positive");
    std::vector<double> x(sample.begin(), sample.end());
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = 1.0 - std::exp(-rate * x[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return finish(d, n, level);
}

} // namespace lps::stats
