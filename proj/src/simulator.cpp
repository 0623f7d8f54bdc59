#include "lps/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <future>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace lps::sim {

std::string to_string(Discipline d) {
    switch (d) {
    case Discipline::SrlLoss: return "srl";
    case Discipline::FcfdDisplace: return "fcfd";
    case Discipline::BlockArriving: return "block";
    }
    return "?";
}

std::string to_string(Variant v) {
    return v == Variant::Limited ? "limited" : "unlimited";
}

void SystemSpec::validate() const {
    if (n < 1) throw std::invalid_argument("capacity n must be at least 1");
    if (rates.capacity() != n) throw std::invalid_argument("arrival rates must cover levels 0..n");
    if (profile.capacity() != n) throw std::invalid_argument("service rate profile must cover levels 1..n");
}

SystemSpec SystemSpec::unlimited_twin() const {
    SystemSpec twin = *this;
    twin.variant = Variant::UnlimitedCapped;
    return twin;
}

// ---------------------------------------------------------------------------
// PsSystem

PsSystem::PsSystem(const SystemSpec& spec) : n_(spec.n), profile_(spec.profile), variant_(spec.variant) {
    spec.validate();
}

double PsSystem::service_rate() const {
    return by_id_.empty() ? 0.0 : profile_.rate_at(by_id_.size());
}

std::optional<double> PsSystem::next_completion_time() const {
    if (by_remaining_.empty()) return std::nullopt;
    const VTime remaining = by_remaining_.begin()->vfinish - vtime_;
    return time_ + static_cast<double>(std::max(remaining, VTime{0}) / service_rate());
}

Event PsSystem::advance_to_next_event(double next_arrival_time) {
    const auto completion = next_completion_time();
    if (!completion || *completion > next_arrival_time) {
        advance_to(next_arrival_time);
        return {EventKind::Arrival, time_, std::nullopt};
    }
    const Key first = *by_remaining_.begin();
    time_ = std::max(time_, *completion);
    // Snap the virtual clock onto the finishing job instead of integrating,
    // so rounding never leaves a sliver of work behind.
    vtime_ = std::max(vtime_, first.vfinish);
    Job done = remove(first.id);
    if (by_id_.empty()) vtime_ = 0.0L;
    return {EventKind::Completion, time_, done};
}

void PsSystem::advance_to(double t, double slack) {
    if (t < time_) throw std::logic_error("simulation clock cannot move backwards");
    if (!by_id_.empty()) {
        vtime_ += static_cast<VTime>(service_rate()) * static_cast<VTime>(t - time_);
        const VTime remaining = by_remaining_.begin()->vfinish - vtime_;
        const VTime scale = std::max(VTime{1}, std::abs(vtime_));
        if (remaining < -static_cast<VTime>(slack) * scale) {
            std::ostringstream os;
            os << "negative remaining length " << static_cast<double>(remaining) << " at t=" << t;
            throw std::logic_error(os.str());
        }
    }
    time_ = t;
}

ArrivalOutcome PsSystem::apply_arrival(double length, Discipline discipline) {
    if (!(length >= 0.0) || !std::isfinite(length)) throw std::invalid_argument("job length must be finite and >= 0");
    Job job{next_id_++, time_, length, 0.0};
    if (!limited() || by_id_.size() < n_) {
        admit(job);
        return {ArrivalKind::Admitted, job, std::nullopt};
    }
    switch (discipline) {
    case Discipline::BlockArriving:
        return {ArrivalKind::ArrivingLost, job, std::nullopt};
    case Discipline::SrlLoss: {
        const Key shortest = *by_remaining_.begin();
        // Ties go to displacement: the arrival survives if it is not shorter.
        if (static_cast<VTime>(length) < shortest.vfinish - vtime_) {
            return {ArrivalKind::ArrivingLost, job, std::nullopt};
        }
        Job victim = remove(shortest.id);
        admit(job);
        return {ArrivalKind::DisplacedLost, job, victim};
    }
    case Discipline::FcfdDisplace: {
        Job victim = remove(by_id_.begin()->first);
        admit(job);
        return {ArrivalKind::DisplacedLost, job, victim};
    }
    }
    throw std::logic_error("unknown discipline");
}

std::vector<Job> PsSystem::complete_finished(double slack) {
    std::vector<Job> done;
    while (!by_remaining_.empty() && by_remaining_.begin()->vfinish - vtime_ <= static_cast<VTime>(slack)) {
        done.push_back(remove(by_remaining_.begin()->id));
    }
    if (!done.empty() && by_id_.empty()) vtime_ = 0.0L;
    return done;
}

std::vector<double> PsSystem::remaining_lengths() const {
    std::vector<double> out;
    out.reserve(by_remaining_.size());
    for (const Key& k : by_remaining_) out.push_back(static_cast<double>(k.vfinish - vtime_));
    return out;
}

std::vector<double> PsSystem::largest_remaining(std::size_t k) const {
    std::vector<double> out;
    out.reserve(k);
    for (auto it = by_remaining_.rbegin(); it != by_remaining_.rend() && out.size() < k; ++it) {
        out.push_back(static_cast<double>(it->vfinish - vtime_));
    }
    std::reverse(out.begin(), out.end());
    return out;
}

std::vector<Job> PsSystem::jobs() const {
    std::vector<Job> out;
    out.reserve(by_id_.size());
    for (const auto& [id, r] : by_id_) out.push_back(materialize(id, r));
    return out;
}

Job PsSystem::materialize(std::uint64_t id, const Resident& r) const {
    return {id, r.arrival_time, r.total_length, static_cast<double>(vtime_ - r.vstart)};
}

Job PsSystem::remove(std::uint64_t id) {
    const auto it = by_id_.find(id);
    if (it == by_id_.end()) throw std::logic_error("removing unknown job");
    Job job = materialize(id, it->second);
    by_remaining_.erase(Key{it->second.vfinish, it->second.arrival_time, id});
    by_id_.erase(it);
    return job;
}

void PsSystem::admit(const Job& job) {
    const VTime vfinish = vtime_ + static_cast<VTime>(job.total_length);
    by_id_.emplace(job.id, Resident{job.arrival_time, job.total_length, vtime_, vfinish});
    by_remaining_.insert(Key{vfinish, job.arrival_time, job.id});
}

// ---------------------------------------------------------------------------
// Single-system run

namespace {

constexpr std::uint64_t kStreamsPerReplication = 8;

std::uint64_t stream_base(std::uint64_t replication) {
    return replication * kStreamsPerReplication;
}

void write_trace(std::ostream* os, double t, const char* kind, std::size_t before, std::size_t after,
                 std::uint64_t id) {
    if (!os) return;
    *os << std::setprecision(17) << t << '\t' << kind << '\t' << before << '\t' << after << '\t' << id << '\n';
}

template <class T>
void grow(std::vector<T>& v, std::size_t size) {
    if (v.size() < size) v.resize(size, T{});
}

struct Batch {
    double start = 0.0;
    double duration = 0.0;
    std::vector<double> level_time;
    std::vector<std::uint64_t> seen;
    std::uint64_t arrivals = 0;
    std::uint64_t losses = 0;
};

class Collector {
public:
    Collector(std::uint64_t window_arrivals, std::size_t batches)
        : window_arrivals_(window_arrivals), batch_count_(std::min<std::uint64_t>(batches, window_arrivals)) {}

    bool open() const { return open_; }

    void elapse(double now, std::size_t level) {
        if (open_) {
            const double dt = now - last_;
            grow(level_time_, level + 1);
            level_time_[level] += dt;
            Batch& b = batches_.back();
            grow(b.level_time, level + 1);
            b.level_time[level] += dt;
        }
        last_ = now;
    }

    void start(double now) {
        open_ = true;
        start_ = now;
        last_ = now;
    }

    // Called for each window arrival before its outcome is known.
    void arrival(double now, std::size_t level_seen) {
        const std::uint64_t k = est_.window.arrivals;
        const std::size_t b = static_cast<std::size_t>(k * batch_count_ / window_arrivals_);
        if (batches_.size() <= b) {
            if (!batches_.empty()) batches_.back().duration = now - batches_.back().start;
            batches_.push_back(Batch{now, 0.0, {}, {}, 0, 0});
        }
        ++est_.window.arrivals;
        grow(seen_, level_seen + 1);
        ++seen_[level_seen];
        Batch& cur = batches_.back();
        ++cur.arrivals;
        grow(cur.seen, level_seen + 1);
        ++cur.seen[level_seen];
    }

    void blocked() {
        ++est_.window.blocked;
        ++batches_.back().losses;
    }

    void displaced(double now, const Job& victim) {
        ++est_.window.displaced;
        ++batches_.back().losses;
        displaced_time_ += now - victim.arrival_time;
    }

    void served(double now, const Job& job) {
        ++est_.window.served;
        served_time_ += now - job.arrival_time;
    }

    void idle(double length) { est_.idle_periods.push_back(length); }

    double window_start() const { return start_; }

    SimEstimates finish(double now, std::size_t min_levels, std::size_t in_system) {
        SimEstimates& e = est_;
        e.window.in_system = in_system;
        e.batches = batches_.size();
        if (!batches_.empty()) batches_.back().duration = now - batches_.back().start;
        e.window_time = now - start_;
        const std::size_t levels = std::max({min_levels, level_time_.size(), seen_.size()});
        grow(level_time_, levels);
        grow(seen_, levels);
        e.occupancy.assign(levels, 0.0);
        e.occupancy_ci_half.assign(levels, 0.0);
        e.arrival_seen.assign(levels, 0.0);
        e.arrival_seen_ci_half.assign(levels, 0.0);

        const double arrivals = static_cast<double>(e.window.arrivals);
        std::vector<double> per_batch(batches_.size());
        for (std::size_t i = 0; i < levels; ++i) {
            e.occupancy[i] = e.window_time > 0.0 ? level_time_[i] / e.window_time : 0.0;
            e.arrival_seen[i] = arrivals > 0.0 ? static_cast<double>(seen_[i]) / arrivals : 0.0;
            for (std::size_t b = 0; b < batches_.size(); ++b) {
                const Batch& bt = batches_[b];
                per_batch[b] = (i < bt.level_time.size() && bt.duration > 0.0) ? bt.level_time[i] / bt.duration : 0.0;
            }
            e.occupancy_ci_half[i] = stats::mean_ci(per_batch).half_width;
            for (std::size_t b = 0; b < batches_.size(); ++b) {
                const Batch& bt = batches_[b];
                per_batch[b] = i < bt.seen.size() ? static_cast<double>(bt.seen[i]) / static_cast<double>(bt.arrivals)
                                                  : 0.0;
            }
            e.arrival_seen_ci_half[i] = stats::mean_ci(per_batch).half_width;
        }
        e.loss_prob = arrivals > 0.0 ? static_cast<double>(e.window.displaced + e.window.blocked) / arrivals : 0.0;
        for (std::size_t b = 0; b < batches_.size(); ++b) {
            per_batch[b] = static_cast<double>(batches_[b].losses) / static_cast<double>(batches_[b].arrivals);
        }
        e.loss_ci_half = stats::mean_ci(per_batch).half_width;

        double l = 0.0;
        for (std::size_t i = 1; i < levels; ++i) l += static_cast<double>(i) * e.occupancy[i];
        e.mean_jobs = l;
        e.sojourn_served = e.window.served ? served_time_ / static_cast<double>(e.window.served) : 0.0;
        e.sojourn_displaced = e.window.displaced ? displaced_time_ / static_cast<double>(e.window.displaced) : 0.0;
        const std::uint64_t departures = e.window.served + e.window.displaced + e.window.blocked;
        e.sojourn_all = departures ? (served_time_ + displaced_time_) / static_cast<double>(departures) : 0.0;
        return e;
    }

private:
    std::uint64_t window_arrivals_;
    std::uint64_t batch_count_;
    bool open_ = false;
    double start_ = 0.0;
    double last_ = 0.0;
    std::vector<double> level_time_;
    std::vector<std::uint64_t> seen_;
    std::vector<Batch> batches_;
    double served_time_ = 0.0;
    double displaced_time_ = 0.0;
    SimEstimates est_;
};

SimEstimates empty_system_estimates(std::size_t levels) {
    SimEstimates e;
    e.occupancy.assign(levels, 0.0);
    e.occupancy[0] = 1.0;
    e.occupancy_ci_half.assign(levels, 0.0);
    e.arrival_seen.assign(levels, 0.0);
    e.arrival_seen_ci_half.assign(levels, 0.0);
    return e;
}

} // namespace

SimEstimates run(const SystemSpec& spec, const RunOptions& options) {
    spec.validate();
    const std::uint64_t warmup = options.warmup.value_or(options.horizon / 10);
    if (options.horizon <= warmup) throw std::invalid_argument("horizon must exceed warmup");
    if (options.batches == 0) throw std::invalid_argument("at least one batch is required");

    const std::uint64_t base = stream_base(options.replication);
    ArrivalSource source(spec.rates, RandomStream(options.seed, base), RandomStream(options.seed, base + 1));
    RandomStream lengths(options.seed, base + 2);
    PsSystem system(spec);
    const bool limited = spec.variant == Variant::Limited;
    const std::size_t min_levels = limited ? spec.n + 1 : 1;

    if (source.silent()) return empty_system_estimates(limited ? spec.n + 1 : 1);

    Collector col(options.horizon - warmup, options.batches);
    SimCounts totals;
    std::uint64_t events = 0;
    double max_work_error = 0.0;
    // Start of the current idle period; NaN while busy.
    double idle_since = 0.0;
    std::ostream* trace = options.trace;

    auto on_served = [&](const Job& job, std::size_t before) {
        ++totals.served;
        if (job.total_length > 0.0) {
            max_work_error = std::max(max_work_error, std::abs(job.attained - job.total_length) / job.total_length);
        }
        if (col.open()) col.served(system.time(), job);
        write_trace(trace, system.time(), "complete", before, system.level(), job.id);
    };

    double next_candidate = source.next_candidate(0.0);
    for (;;) {
        const std::size_t before = system.level();
        const Event ev = system.advance_to_next_event(next_candidate);
        col.elapse(ev.time, before);
        const double now = ev.time;

        if (ev.kind == EventKind::Completion) {
            ++events;
            on_served(*ev.job, before);
            if (system.level() == 0) idle_since = now;
            continue;
        }

        if (!source.accept(before)) {
            next_candidate = source.next_candidate(now);
            continue;
        }
        if (totals.arrivals == options.horizon) break;
        ++totals.arrivals;
        ++events;
        if (totals.arrivals == warmup + 1) col.start(now);
        if (col.open()) col.arrival(now, before);

        const ArrivalOutcome out = system.apply_arrival(spec.length_law.sample(lengths), spec.discipline);
        switch (out.kind) {
        case ArrivalKind::Admitted:
            write_trace(trace, now, "arrive", before, system.level(), out.arriving.id);
            break;
        case ArrivalKind::ArrivingLost:
            ++totals.blocked;
            if (col.open()) col.blocked();
            write_trace(trace, now, "lost", before, system.level(), out.arriving.id);
            break;
        case ArrivalKind::DisplacedLost:
            ++totals.displaced;
            if (col.open()) col.displaced(now, *out.victim);
            write_trace(trace, now, "displace", before, system.level(), out.victim->id);
            write_trace(trace, now, "arrive", before, system.level(), out.arriving.id);
            break;
        }
        // Zero-length jobs leave at their admission instant.
        for (const Job& job : system.complete_finished(0.0)) on_served(job, system.level() + 1);

        if (system.level() > 0 && !std::isnan(idle_since)) {
            if (col.open() && idle_since >= col.window_start()) col.idle(now - idle_since);
            idle_since = std::numeric_limits<double>::quiet_NaN();
        } else if (system.level() == 0 && std::isnan(idle_since)) {
            idle_since = now;
        }
        next_candidate = source.next_candidate(now);
    }

    totals.in_system = system.level();
    SimEstimates e = col.finish(system.time(), min_levels, system.level());
    e.totals = totals;
    e.events = events;
    e.max_work_error = max_work_error;
    return e;
}

SimEstimates merge_replications(std::span<const SimEstimates> reps) {
    if (reps.empty()) throw std::invalid_argument("no replications to merge");
    if (reps.size() == 1) return reps.front();
    std::size_t levels = 0;
    for (const auto& r : reps) levels = std::max(levels, r.occupancy.size());

    auto level_value = [](const std::vector<double>& v, std::size_t i) { return i < v.size() ? v[i] : 0.0; };
    const double k = static_cast<double>(reps.size());
    SimEstimates m;
    // Replications are independent, so the merged half-width combines the
    // per-replication batch-means half-widths: sqrt(sum h_r^2) / k.
    auto summarize = [&](auto&& pick_mean, auto&& pick_half, double& mean, double& half) {
        double sq = 0.0;
        mean = 0.0;
        for (const auto& r : reps) {
            mean += pick_mean(r) / k;
            sq += pick_half(r) * pick_half(r);
        }
        half = std::sqrt(sq) / k;
    };
    m.occupancy.assign(levels, 0.0);
    m.occupancy_ci_half.assign(levels, 0.0);
    m.arrival_seen.assign(levels, 0.0);
    m.arrival_seen_ci_half.assign(levels, 0.0);
    for (std::size_t i = 0; i < levels; ++i) {
        summarize([&](const SimEstimates& r) { return level_value(r.occupancy, i); },
                  [&](const SimEstimates& r) { return level_value(r.occupancy_ci_half, i); }, m.occupancy[i],
                  m.occupancy_ci_half[i]);
        summarize([&](const SimEstimates& r) { return level_value(r.arrival_seen, i); },
                  [&](const SimEstimates& r) { return level_value(r.arrival_seen_ci_half, i); }, m.arrival_seen[i],
                  m.arrival_seen_ci_half[i]);
    }
    summarize([](const SimEstimates& r) { return r.loss_prob; }, [](const SimEstimates& r) { return r.loss_ci_half; },
              m.loss_prob, m.loss_ci_half);
    for (const auto& r : reps) {
        m.mean_jobs += r.mean_jobs / k;
        m.sojourn_served += r.sojourn_served / k;
        m.sojourn_displaced += r.sojourn_displaced / k;
        m.sojourn_all += r.sojourn_all / k;
        m.idle_periods.insert(m.idle_periods.end(), r.idle_periods.begin(), r.idle_periods.end());
        for (SimCounts* dst : {&m.window, &m.totals}) {
            const SimCounts& src = dst == &m.window ? r.window : r.totals;
            dst->arrivals += src.arrivals;
            dst->served += src.served;
            dst->displaced += src.displaced;
            dst->blocked += src.blocked;
            dst->in_system += src.in_system;
        }
        m.events += r.events;
        m.window_time += r.window_time;
        m.max_work_error = std::max(m.max_work_error, r.max_work_error);
        m.batches += r.batches;
    }
    return m;
}

SimEstimates run_replications(const SystemSpec& spec, const RunOptions& options, std::size_t replications) {
    if (replications == 0) throw std::invalid_argument("at least one replication is required");
    if (replications == 1) return run(spec, options);
    std::vector<std::future<SimEstimates>> jobs;
    jobs.reserve(replications);
    for (std::size_t r = 0; r < replications; ++r) {
        RunOptions opt = options;
        opt.replication = options.replication + r;
        opt.trace = nullptr;
        jobs.push_back(std::async(std::launch::async, [spec, opt] { return run(spec, opt); }));
    }
    std::vector<SimEstimates> reps;
    reps.reserve(replications);
    for (auto& f : jobs) reps.push_back(f.get());
    return merge_replications(reps);
}

// ---------------------------------------------------------------------------
// Coupled limited / unlimited run

std::vector<double> CouplingReport::unlimited_folded(std::size_t n) const {
    std::vector<double> out(n + 1, 0.0);
    for (std::size_t i = 0; i < occupancy_unlimited.size(); ++i) out[std::min(i, n)] += occupancy_unlimited[i];
    return out;
}

namespace {

struct CoupledRecord {
    double time;
    const char* kind;
    std::size_t x1_before, x1_after, x2_before, x2_after;
    std::uint64_t id;
};

std::string format_window(const std::deque<CoupledRecord>& window, const std::string& reason) {
    std::ostringstream os;
    os << reason << "\n";
    os << "time\tkind\tX1_before\tX1_after\tX2_before\tX2_after\tjob\n";
    for (const auto& r : window) {
        os << std::setprecision(17) << r.time << '\t' << r.kind << '\t' << r.x1_before << '\t' << r.x1_after << '\t'
           << r.x2_before << '\t' << r.x2_after << '\t' << r.id << '\n';
    }
    return os.str();
}

} // namespace

CouplingReport run_coupled(const SystemSpec& limited, std::uint64_t horizon, std::uint64_t seed, std::ostream* trace) {
    limited.validate();
    if (limited.variant != Variant::Limited || limited.discipline != Discipline::SrlLoss) {
        throw std::invalid_argument("coupled run needs a limited system with shortest-remaining-length loss");
    }
    const std::size_t n = limited.n;
    const SystemSpec twin = limited.unlimited_twin();

    CouplingReport rep;
    ArrivalSource source(limited.rates, RandomStream(seed, 0), RandomStream(seed, 1));
    RandomStream lengths(seed, 2);
    if (horizon == 0 || source.silent()) {
        rep.occupancy_limited.assign(n + 1, 0.0);
        rep.occupancy_limited[0] = 1.0;
        rep.occupancy_unlimited = {1.0};
        return rep;
    }

    PsSystem s1(limited);
    PsSystem s2(twin);
    // Coinciding completions in the two systems may differ by rounding.
    constexpr double kSlack = 1e-9;
    constexpr std::size_t kWindow = 64;
    std::deque<CoupledRecord> window;
    std::vector<double> time1(n + 1, 0.0);
    std::vector<double> time2(1, 0.0);
    double last = 0.0;
    double idle1_since = 0.0;
    double idle2_since = 0.0;

    auto elapse = [&](double now, std::size_t x1, std::size_t x2) {
        time1[x1] += now - last;
        grow(time2, x2 + 1);
        time2[x2] += now - last;
        last = now;
    };
    auto record = [&](const CoupledRecord& r) {
        if (window.size() == kWindow) window.pop_front();
        window.push_back(r);
        if (trace) {
            *trace << std::setprecision(17) << r.time << '\t' << r.kind << '\t' << r.x1_before << '\t' << r.x1_after
                   << '\t' << r.x2_before << '\t' << r.x2_after << '\t' << r.id << '\n';
        }
    };
    auto check = [&]() -> bool {
        const std::size_t x1 = s1.level();
        const std::size_t x2 = s2.level();
        if (x1 != std::min(x2, n)) {
            ++rep.level_violations;
            rep.failure = format_window(window, "level mismatch: X1=" + std::to_string(x1) +
                                                    " X2=" + std::to_string(x2));
            return false;
        }
        if (x2 >= n) {
            ++rep.multiset_checks;
            const std::vector<double> a = s1.remaining_lengths();
            const std::vector<double> b = s2.largest_remaining(n);
            for (std::size_t i = 0; i < n; ++i) {
                if (std::abs(a[i] - b[i]) > 1e-8 * std::max(1.0, std::abs(b[i]))) {
                    ++rep.multiset_violations;
                    std::ostringstream os;
                    os << "remaining-length mismatch at rank " << i << ": " << a[i] << " vs " << b[i];
                    rep.failure = format_window(window, os.str());
                    return false;
                }
            }
        }
        return true;
    };
    auto note_idle = [](double now, std::size_t before, std::size_t after, double& since, std::vector<double>& out) {
        if (before == 0 && after > 0) out.push_back(now - since);
        if (before > 0 && after == 0) since = now;
    };

    double next_candidate = source.next_candidate(0.0);
    for (;;) {
        const std::size_t x1 = s1.level();
        const std::size_t x2 = s2.level();
        const auto t1 = s1.next_completion_time();
        const auto t2 = s2.next_completion_time();
        std::optional<double> tc;
        if (t1) tc = *t1;
        if (t2) tc = tc ? std::min(*tc, *t2) : *t2;

        if (tc && *tc <= next_candidate) {
            s1.advance_to(*tc, kSlack);
            s2.advance_to(*tc, kSlack);
            elapse(*tc, x1, x2);
            const auto d1 = s1.complete_finished(kSlack);
            const auto d2 = s2.complete_finished(kSlack);
            if (d1.empty() && d2.empty()) throw std::logic_error("completion epoch without a completing job");
            ++rep.events;
            note_idle(*tc, x1, s1.level(), idle1_since, rep.idle_limited);
            note_idle(*tc, x2, s2.level(), idle2_since, rep.idle_unlimited);
            record({*tc, "complete", x1, s1.level(), x2, s2.level(), d2.empty() ? d1.front().id : d2.front().id});
            if (!check()) break;
            continue;
        }

        const double now = next_candidate;
        s1.advance_to(now, kSlack);
        s2.advance_to(now, kSlack);
        elapse(now, x1, x2);
        if (!source.accept(x1)) {
            next_candidate = source.next_candidate(now);
            continue;
        }
        if (rep.arrivals == horizon) break;
        ++rep.arrivals;
        ++rep.events;
        const double length = limited.length_law.sample(lengths);
        const ArrivalOutcome o1 = s1.apply_arrival(length, Discipline::SrlLoss);
        s2.apply_arrival(length, Discipline::SrlLoss);
        s1.complete_finished(0.0);
        s2.complete_finished(0.0);
        note_idle(now, x1, s1.level(), idle1_since, rep.idle_limited);
        note_idle(now, x2, s2.level(), idle2_since, rep.idle_unlimited);
        record({now, o1.kind == ArrivalKind::Admitted       ? "arrive"
                     : o1.kind == ArrivalKind::ArrivingLost ? "arrive_lost"
                                                            : "arrive_displace",
                x1, s1.level(), x2, s2.level(), o1.arriving.id});
        if (!check()) break;
        next_candidate = source.next_candidate(now);
    }

    const double total = last > 0.0 ? last : 1.0;
    rep.occupancy_limited.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) rep.occupancy_limited[i] = time1[i] / total;
    rep.occupancy_unlimited.resize(time2.size());
    for (std::size_t i = 0; i < time2.size(); ++i) rep.occupancy_unlimited[i] = time2[i] / total;
    return rep;
}

bool IdleComparison::pass() const {
    return two_sample.pass && (!first_vs_reference || first_vs_reference->pass) &&
           (!second_vs_reference || second_vs_reference->pass);
}

IdleComparison compare_idle_periods(std::span<const double> first, std::span<const double> second,
                                    std::optional<double> reference_rate, double level, std::size_t min_samples) {
    if (first.size() < min_samples || second.size() < min_samples) {
        throw std::invalid_argument("insufficient idle-period samples: need at least " + std::to_string(min_samples) +
                                    " in each run, got " + std::to_string(first.size()) + " and " +
                                    std::to_string(second.size()));
    }
    IdleComparison c;
    c.two_sample = stats::ks_two_sample(first, second, level);
    if (reference_rate) {
        c.first_vs_reference = stats::ks_exponential(first, *reference_rate, level);
        c.second_vs_reference = stats::ks_exponential(second, *reference_rate, level);
    }
    return c;
}

} // namespace lps::sim
