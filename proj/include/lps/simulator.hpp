#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "lps/analytic.hpp"
#include "lps/statistics.hpp"
#include "lps/stochastic.hpp"

namespace lps::sim {

enum class Discipline {
    SrlLoss,      // shortest remaining length is lost (arriving job included)
    FcfdDisplace, // earliest-arrived job in service is displaced
    BlockArriving // arriving job is lost
};

enum class Variant {
    Limited,        // at most n jobs
    UnlimitedCapped // no bound; each job served at c_n above level n
};

std::string to_string(Discipline d);
std::string to_string(Variant v);

struct SystemSpec {
    std::size_t n;
    ArrivalRates rates;
    analytic::ServiceRateProfile profile;
    LengthDistribution length_law;
    Discipline discipline = Discipline::SrlLoss;
    Variant variant = Variant::Limited;

    void validate() const;
    // Same input and rates, no capacity limit.
    SystemSpec unlimited_twin() const;
};

struct Job {
    std::uint64_t id = 0;
    double arrival_time = 0.0;
    double total_length = 0.0;
    double attained = 0.0;

    double remaining() const { return total_length - attained; }
};

enum class EventKind { Arrival, Completion };

struct Event {
    EventKind kind;
    double time;
    std::optional<Job> job; // completed job for Completion events
};

enum class ArrivalKind { Admitted, ArrivingLost, DisplacedLost };

struct ArrivalOutcome {
    ArrivalKind kind;
    Job arriving;
    std::optional<Job> victim;
};

// One processor-sharing station. All resident jobs are served at the common
// per-job rate c_{min(level, n)}, so remaining lengths shrink in lockstep and
// a job's remaining length is its virtual finish time minus the station's
// virtual (cumulative per-job service) clock. Ordering by virtual finish is
// therefore ordering by remaining length and never needs updating.
class PsSystem {
public:
    explicit PsSystem(const SystemSpec& spec);

    double time() const { return time_; }
    std::size_t level() const { return by_id_.size(); }
    std::size_t capacity() const { return n_; }
    bool limited() const { return variant_ == Variant::Limited; }
    // Per-job service rate at the current level, 0 when empty.
    double service_rate() const;
    std::optional<double> next_completion_time() const;

    // Moves the clock to the next completion or to next_arrival_time,
    // whichever comes first (completions win ties). A completion removes the
    // minimum-remaining job and returns it.
    Event advance_to_next_event(double next_arrival_time);

    // Moves the clock to t without completing anything. Throws
    // std::logic_error if some job would be driven below -slack.
    void advance_to(double t, double slack = 1e-12);

    // Applies an arrival of the given length at the current time.
    ArrivalOutcome apply_arrival(double length, Discipline discipline);

    // Removes jobs whose remaining length is <= slack (zero-length arrivals,
    // or completions coinciding within rounding in coupled runs).
    std::vector<Job> complete_finished(double slack = 0.0);

    // Remaining lengths in ascending order.
    std::vector<double> remaining_lengths() const;
    // The k largest remaining lengths, ascending.
    std::vector<double> largest_remaining(std::size_t k) const;
    std::vector<Job> jobs() const;

private:
    using VTime = long double;

    struct Resident {
        double arrival_time;
        double total_length;
        VTime vstart;
        VTime vfinish;
    };
    struct Key {
        VTime vfinish;
        double arrival_time;
        std::uint64_t id;
        bool operator<(const Key& o) const {
            if (vfinish != o.vfinish) return vfinish < o.vfinish;
            if (arrival_time != o.arrival_time) return arrival_time < o.arrival_time;
            return id < o.id;
        }
    };

    Job materialize(std::uint64_t id, const Resident& r) const;
    Job remove(std::uint64_t id);
    void admit(const Job& job);

    std::size_t n_;
    analytic::ServiceRateProfile profile_;
    Variant variant_;
    double time_ = 0.0;
    VTime vtime_ = 0.0L;
    std::uint64_t next_id_ = 0;
    std::map<std::uint64_t, Resident> by_id_;
    std::set<Key> by_remaining_;
};

struct SimCounts {
    std::uint64_t arrivals = 0;
    std::uint64_t served = 0;
    std::uint64_t displaced = 0;
    std::uint64_t blocked = 0;
    std::uint64_t in_system = 0;
};

struct SimEstimates {
    // Time-weighted fraction of the measurement window spent at each level.
    std::vector<double> occupancy;
    std::vector<double> occupancy_ci_half;
    // Fraction of arrivals that found each level on arrival.
    std::vector<double> arrival_seen;
    std::vector<double> arrival_seen_ci_half;
    double loss_prob = 0.0;
    double loss_ci_half = 0.0;
    double mean_jobs = 0.0;
    double sojourn_served = 0.0;
    double sojourn_displaced = 0.0;
    // Mean time in system over all departing jobs; lost arrivals count as 0.
    double sojourn_all = 0.0;
    std::vector<double> idle_periods;
    SimCounts window; // measurement window
    SimCounts totals; // whole run, starting empty
    std::uint64_t events = 0;
    double window_time = 0.0;
    double max_work_error = 0.0; // max relative |attained - length| of completed jobs
    std::size_t batches = 0;
};

struct RunOptions {
    std::uint64_t horizon = 100'000;     // arrivals
    std::optional<std::uint64_t> warmup; // arrivals; default horizon / 10
    std::uint64_t seed = 0;
    std::uint64_t replication = 0; // selects independent substreams
    std::size_t batches = 30;
    std::ostream* trace = nullptr;
};

SimEstimates run(const SystemSpec& spec, const RunOptions& options);

// Point estimates averaged over replications; half-widths combine the
// per-replication batch-means intervals.
SimEstimates merge_replications(std::span<const SimEstimates> reps);
SimEstimates run_replications(const SystemSpec& spec, const RunOptions& options, std::size_t replications);

struct CouplingReport {
    std::uint64_t arrivals = 0;
    std::uint64_t events = 0;
    std::uint64_t level_violations = 0;
    std::uint64_t multiset_violations = 0;
    std::uint64_t multiset_checks = 0;
    std::vector<double> occupancy_limited;   // levels 0..n
    std::vector<double> occupancy_unlimited; // levels 0..max seen
    std::vector<double> idle_limited;
    std::vector<double> idle_unlimited;
    std::string failure; // event window around the first violation

    bool ok() const { return level_violations == 0 && multiset_violations == 0; }
    // Unlimited occupancy with all levels >= n folded into level n.
    std::vector<double> unlimited_folded(std::size_t n) const;
};

// Drives a limited SrlLoss system and its unlimited twin with the identical
// arrival and length sequence and checks, after every event, that the
// limited level equals min(unlimited level, n) and that the limited
// remaining lengths are the n largest unlimited ones.
CouplingReport run_coupled(const SystemSpec& limited, std::uint64_t horizon, std::uint64_t seed,
                           std::ostream* trace = nullptr);

struct IdleComparison {
    stats::KsResult two_sample;
    std::optional<stats::KsResult> first_vs_reference;
    std::optional<stats::KsResult> second_vs_reference;
    bool pass() const;
};

// Two-sample KS between idle-period samples, plus each sample against an
// exponential(reference_rate) law when given.
IdleComparison compare_idle_periods(std::span<const double> first, std::span<const double> second,
                                    std::optional<double> reference_rate, double level = 0.01,
                                    std::size_t min_samples = 500);

} // namespace lps::sim
