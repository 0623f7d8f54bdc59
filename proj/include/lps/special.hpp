#pragma once

#include <cstddef>
#include <span>

namespace lps::special {

// log( n!/x^n * sum_{i>=n} x^i/i! ) = log( sum_{k>=0} x^k n!/(n+k)! ).
// Equals log(e^x - sum_{i<n} x^i/i!) - n log x + log n!, evaluated without
// cancellation for small x and without overflow for large x. Zero at x = 0.
double log_tail_ratio(std::size_t n, double x);

// log P(N >= n) for N ~ Poisson(x).
double log_poisson_tail(std::size_t n, double x);
double poisson_tail(std::size_t n, double x);

// log P(N = i) for N ~ Poisson(x); -inf when x == 0 and i > 0.
double log_poisson_pmf(std::size_t i, double x);

// Numerically safe log(sum(exp(v))). Entries may be -inf.
double log_sum_exp(std::span<const double> values);

} // namespace lps::special
