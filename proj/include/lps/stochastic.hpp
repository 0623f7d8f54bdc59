#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace lps {

// Reproducible random stream. A (root seed, stream index) pair always yields
// the same sequence, and distinct indices give statistically independent
// substreams.
class RandomStream {
public:
    RandomStream(std::uint64_t root_seed, std::uint64_t stream_index);

    // Uniform on the open interval (0, 1).
    double uniform();
    double exponential(double rate);

    std::uint64_t root_seed() const { return root_; }
    std::uint64_t stream_index() const { return index_; }

private:
    std::uint64_t root_;
    std::uint64_t index_;
    std::mt19937_64 engine_;
};

struct Deterministic {
    double length;
};

struct Exponential {
    double rate;
};

// Zero with probability 1 - alpha, otherwise exponential with the given rate.
struct ZeroInflatedExponential {
    double alpha;
    double rate;
};

struct HyperBranch {
    double weight;
    double rate;
};

struct Hyperexponential {
    std::vector<HyperBranch> branches;
};

// Job-length law. Immutable once constructed; construction validates the
// parameters so every instance is admissible (positive mean).
class LengthDistribution {
public:
    using Law = std::variant<Deterministic, Exponential, ZeroInflatedExponential, Hyperexponential>;

    static LengthDistribution deterministic(double length);
    static LengthDistribution exponential(double rate);
    static LengthDistribution exponential_with_mean(double mean);
    static LengthDistribution zero_inflated_exponential(double alpha, double rate);
    static LengthDistribution hyperexponential(std::vector<HyperBranch> branches);
    // Two-branch law with balanced means matching the given mean and squared
    // coefficient of variation (scv >= 1).
    static LengthDistribution hyperexponential_balanced(double mean, double scv);

    double mean() const;
    double second_moment() const;
    double scv() const;

    // E[exp(-s L)], s >= 0.
    double lst(double s) const;

    double sample(RandomStream& stream) const;

    const Law& law() const { return law_; }
    std::string describe() const;

    bool is_deterministic() const { return std::holds_alternative<Deterministic>(law_); }
    bool is_zero_inflated() const { return std::holds_alternative<ZeroInflatedExponential>(law_); }
    // P(L = 0).
    double zero_mass() const;
    bool is_exponential() const { return std::holds_alternative<Exponential>(law_); }

private:
    explicit LengthDistribution(Law law) : law_(std::move(law)) {}
    Law law_;
};

// Poisson arrival intensities lambda_0..lambda_n indexed by the number of
// jobs present. Levels above n use lambda_n.
class ArrivalRates {
public:
    explicit ArrivalRates(std::vector<double> lambda_by_state);
    static ArrivalRates constant(std::size_t n, double lambda);

    double at(std::size_t level) const;
    std::size_t capacity() const { return lambda_.size() - 1; }
    double max() const;
    bool is_constant() const;
    const std::vector<double>& values() const { return lambda_; }

private:
    std::vector<double> lambda_;
};

// State-dependent Poisson arrivals generated by thinning a dominating process
// of rate max(lambda). Candidate times and acceptance draws come from two
// separate streams, so two systems that see the same level accept the same
// candidates.
class ArrivalSource {
public:
    ArrivalSource(ArrivalRates rates, RandomStream times, RandomStream thinning);

    // True when no arrival can ever occur from an empty system.
    bool silent() const;

    // Time of the next candidate (absolute).
    double next_candidate(double now);
    bool accept(std::size_t level);

    const ArrivalRates& rates() const { return rates_; }

private:
    ArrivalRates rates_;
    double dominating_;
    RandomStream times_;
    RandomStream thinning_;
};

} // namespace lps
