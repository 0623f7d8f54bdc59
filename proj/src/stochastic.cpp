#include "lps/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace lps {

namespace {

std::mt19937_64 make_engine(std::uint64_t root, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(root), static_cast<std::uint32_t>(root >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

} // namespace

RandomStream::RandomStream(std::uint64_t root_seed, std::uint64_t stream_index)
    : root_(root_seed), index_(stream_index), engine_(make_engine(root_seed, stream_index)) {}

double RandomStream::uniform() {
    // 53 random bits, centred in their cell so 0 and 1 are never returned.
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::exponential(double rate) {
    return -std::log(uniform()) / rate;
}

LengthDistribution LengthDistribution::deterministic(double length) {
    require(std::isfinite(length) && length > 0.0, "deterministic length must be positive");
    return LengthDistribution(Deterministic{length});
}

LengthDistribution LengthDistribution::exponential(double rate) {
    require(std::isfinite(rate) && rate > 0.0, "exponential rate must be positive");
    return LengthDistribution(Exponential{rate});
}

LengthDistribution LengthDistribution::exponential_with_mean(double mean) {
    require(std::isfinite(mean) && mean > 0.0, "exponential mean must be positive");
    return LengthDistribution(Exponential{1.0 / mean});
}

double LengthDistribution::zero_mass() const {
    if (const auto* z = std::get_if<ZeroInflatedExponential>(&law_)) return 1.0 - z->alpha;
    return 0.0;
}

LengthDistribution LengthDistribution::zero_inflated_exponential(double alpha, double rate) {
    require(alpha > 0.0 && alpha <= 1.0, "zero-inflated exponential needs 0 < alpha <= 1");
    require(std::isfinite(rate) && rate > 0.0, "zero-inflated exponential rate must be positive");
    return LengthDistribution(ZeroInflatedExponential{alpha, rate});
}

LengthDistribution LengthDistribution::hyperexponential(std::vector<HyperBranch> branches) {
    require(!branches.empty(), "hyperexponential needs at least one branch");
    double total = 0.0;
    for (const auto& b : branches) {
        require(b.weight >= 0.0 && b.weight <= 1.0, "hyperexponential weight outside [0, 1]");
        require(std::isfinite(b.rate) && b.rate > 0.0, "hyperexponential rate must be positive");
        total += b.weight;
    }
    require(std::abs(total - 1.0) <= 1e-12, "hyperexponential weights must sum to 1");
    return LengthDistribution(Hyperexponential{std::move(branches)});
}

LengthDistribution LengthDistribution::hyperexponential_balanced(double mean, double scv) {
    require(std::isfinite(mean) && mean > 0.0, "hyperexponential mean must be positive");
    require(scv >= 1.0, "hyperexponential scv must be at least 1");
    const double p = 0.5 * (1.0 + std::sqrt((scv - 1.0) / (scv + 1.0)));
    const double q = 1.0 - p;
    // Balanced means: p / rate1 == q / rate2 == mean / 2.
    return hyperexponential({{p, 2.0 * p / mean}, {q, 2.0 * q / mean}});
}

double LengthDistribution::mean() const {
    return std::visit(overloaded{
                          [](const Deterministic& d) { return d.length; },
                          [](const Exponential& e) { return 1.0 / e.rate; },
                          [](const ZeroInflatedExponential& z) { return z.alpha / z.rate; },
                          [](const Hyperexponential& h) {
                              double m = 0.0;
                              for (const auto& b : h.branches) m += b.weight / b.rate;
                              return m;
                          },
                      },
                      law_);
}

double LengthDistribution::second_moment() const {
    return std::visit(overloaded{
                          [](const Deterministic& d) { return d.length * d.length; },
                          [](const Exponential& e) { return 2.0 / (e.rate * e.rate); },
                          [](const ZeroInflatedExponential& z) { return 2.0 * z.alpha / (z.rate * z.rate); },
                          [](const Hyperexponential& h) {
                              double m = 0.0;
                              for (const auto& b : h.branches) m += 2.0 * b.weight / (b.rate * b.rate);
                              return m;
                          },
                      },
                      law_);
}

double LengthDistribution::scv() const {
    const double m = mean();
    return second_moment() / (m * m) - 1.0;
}

double LengthDistribution::lst(double s) const {
    if (!(s >= 0.0)) throw std::invalid_argument("lst argument must be nonnegative");
    return std::visit(overloaded{
                          [s](const Deterministic& d) { return std::exp(-s * d.length); },
                          [s](const Exponential& e) { return e.rate / (e.rate + s); },
                          [s](const ZeroInflatedExponential& z) { return 1.0 - z.alpha * s / (s + z.rate); },
                          [s](const Hyperexponential& h) {
                              double v = 0.0;
                              for (const auto& b : h.branches) v += b.weight * b.rate / (b.rate + s);
                              return v;
                          },
                      },
                      law_);
}

double LengthDistribution::sample(RandomStream& stream) const {
    return std::visit(overloaded{
                          [](const Deterministic& d) { return d.length; },
                          [&stream](const Exponential& e) { return stream.exponential(e.rate); },
                          [&stream](const ZeroInflatedExponential& z) {
                              // One uniform decides the atom; the exponential part reuses its
                              // conditional position so each draw costs one variate.
                              const double u = stream.uniform();
                              if (u > z.alpha) return 0.0;
                              return -std::log(u / z.alpha) / z.rate;
                          },
                          [&stream](const Hyperexponential& h) {
                              double u = stream.uniform();
                              for (const auto& b : h.branches) {
                                  if (u < b.weight) return stream.exponential(b.rate);
                                  u -= b.weight;
                              }
                              return stream.exponential(h.branches.back().rate);
                          },
                      },
                      law_);
}

std::string LengthDistribution::describe() const {
    std::ostringstream os;
    std::visit(overloaded{
                   [&os](const Deterministic& d) { os << "deterministic(" << d.length << ")"; },
                   [&os](const Exponential& e) { os << "exponential(rate=" << e.rate << ")"; },
                   [&os](const ZeroInflatedExponential& z) {
                       os << "zero_inflated_exponential(alpha=" << z.alpha << ", rate=" << z.rate << ")";
                   },
                   [&os](const Hyperexponential& h) {
                       os << "hyperexponential(";
                       for (std::size_t i = 0; i < h.branches.size(); ++i) {
                           if (i) os << ", ";
                           os << h.branches[i].weight << "@" << h.branches[i].rate;
                       }
                       os << ")";
                   },
               },
               law_);
    return os.str();
}

ArrivalRates::ArrivalRates(std::vector<double> lambda_by_state) : lambda_(std::move(lambda_by_state)) {
    require(lambda_.size() >= 2, "arrival rates need entries for levels 0..n with n >= 1");
    for (double l : lambda_) require(std::isfinite(l) && l >= 0.0, "arrival rates must be finite and nonnegative");
}

ArrivalRates ArrivalRates::constant(std::size_t n, double lambda) {
    return ArrivalRates(std::vector<double>(n + 1, lambda));
}

double ArrivalRates::at(std::size_t level) const {
    return lambda_[std::min(level, lambda_.size() - 1)];
}

double ArrivalRates::max() const {
    return *std::max_element(lambda_.begin(), lambda_.end());
}

bool ArrivalRates::is_constant() const {
    return std::all_of(lambda_.begin(), lambda_.end(), [&](double l) { return l == lambda_.front(); });
}

ArrivalSource::ArrivalSource(ArrivalRates rates, RandomStream times, RandomStream thinning)
    : rates_(std::move(rates)), dominating_(rates_.max()), times_(std::move(times)), thinning_(std::move(thinning)) {}

bool ArrivalSource::silent() const {
    return dominating_ <= 0.0 || rates_.at(0) <= 0.0;
}

double ArrivalSource::next_candidate(double now) {
    return now + times_.exponential(dominating_);
}

bool ArrivalSource::accept(std::size_t level) {
    const double rate = rates_.at(level);
    if (rate >= dominating_) return true;
    return thinning_.uniform() * dominating_ < rate;
}

} // namespace lps
