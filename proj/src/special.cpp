#include "lps/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

namespace lps::special {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// sum_{k>=0} prod_{j=1..k} x/(n+j); converges geometrically once n+j > x.
double tail_series(std::size_t n, double x) {
    double term = 1.0;
    double sum = 1.0;
    const double nd = static_cast<double>(n);
    for (std::size_t k = 1; k < 1'000'000; ++k) {
        term *= x / (nd + static_cast<double>(k));
        sum += term;
        if (term <= sum * 1e-17) return sum;
    }
    throw std::runtime_error("log_tail_ratio: series failed to converge");
}

} // namespace

double log_poisson_pmf(std::size_t i, double x) {
    if (x == 0.0) return i == 0 ? 0.0 : kNegInf;
    const double id = static_cast<double>(i);
    return id * std::log(x) - x - std::lgamma(id + 1.0);
}

double log_tail_ratio(std::size_t n, double x) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw std::domain_error("log_tail_ratio: x must be finite and nonnegative");
    if (x == 0.0) return 0.0;
    const double nd = static_cast<double>(n);
    if (x <= nd + 1.0) return std::log(tail_series(n, x));

    // x > n + 1: the Poisson head P(N < n) is below one half, so the
    // complement is well conditioned.
    std::vector<double> head;
    head.reserve(n);
    for (std::size_t i = 0; i < n; ++i) head.push_back(log_poisson_pmf(i, x));
    const double log_head = n == 0 ? kNegInf : log_sum_exp(head);
    const double log_tail = std::log1p(-std::exp(log_head));
    return x + log_tail + std::lgamma(nd + 1.0) - nd * std::log(x);
}

double log_poisson_tail(std::size_t n, double x) {
    if (n == 0) return 0.0;
    if (x == 0.0) return kNegInf;
    const double nd = static_cast<double>(n);
    return nd * std::log(x) - x - std::lgamma(nd + 1.0) + log_tail_ratio(n, x);
}

double poisson_tail(std::size_t n, double x) {
    if (n == 0) return 1.0;
    if (x == 0.0) return 0.0;
    return boost::math::gamma_p(static_cast<double>(n), x);
}

double log_sum_exp(std::span<const double> values) {
    if (values.empty()) return kNegInf;
    const double top = *std::max_element(values.begin(), values.end());
    if (top == kNegInf) return kNegInf;
    double acc = 0.0;
    for (double v : values) acc += std::exp(v - top);
    return top + std::log(acc);
}

} // namespace lps::special
