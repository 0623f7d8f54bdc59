// lpsim: analytic and simulated loss probabilities of limited processor-sharing
// systems.
//
//   lpsim analytic --config scenario.json
//   lpsim simulate --config scenario.json --horizon 1000000
//   lpsim compare  --config scenario.json --out results/
//   lpsim couple   --config scenario.json
//   lpsim table1   --out results/

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lps/harness.hpp"

namespace fs = std::filesystem;
using namespace lps;

namespace {

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> horizon;
    std::optional<std::uint64_t> warmup;
    std::optional<std::size_t> replications;
    std::string out;
    bool trace = false;
};

harness::Scenario load(const Options& o) {
    harness::Scenario s = harness::load_scenario(o.config);
    if (o.seed) s.run.seed = *o.seed;
    if (o.horizon) s.run.horizon = *o.horizon;
    if (o.warmup) s.run.warmup = *o.warmup;
    if (o.replications) s.run.replications = *o.replications;
    return s;
}

void write_file(const Options& o, const std::string& name, const std::string& content) {
    if (o.out.empty()) return;
    fs::create_directories(o.out);
    std::ofstream(fs::path(o.out) / name) << content;
}

// Trace sink: <out>/trace.tsv when an output directory is given, else stderr.
class TraceSink {
public:
    explicit TraceSink(const Options& o) {
        if (!o.trace) return;
        if (o.out.empty()) {
            stream_ = &std::cerr;
            return;
        }
        fs::create_directories(o.out);
        file_ = std::make_unique<std::ofstream>(fs::path(o.out) / "trace.tsv");
        stream_ = file_.get();
    }
    std::ostream* get() const { return stream_; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* stream_ = nullptr;
};

int cmd_analytic(const Options& o) {
    const auto s = load(o);
    if (s.formulas.empty()) throw harness::ConfigError("config field 'formulas': no formula selected");
    std::vector<harness::FormulaResult> results;
    for (auto f : s.formulas) results.push_back(harness::evaluate(f, s));
    harness::render_analytic(s, results, std::cout);
    write_file(o, "analytic.json", harness::analytic_json(s, results).dump(2) + "\n");
    return 0;
}

int cmd_simulate(const Options& o) {
    const auto s = load(o);
    TraceSink trace(o);
    const auto e = harness::simulate(s, trace.get());
    harness::render_estimates(s, e, std::cout);
    write_file(o, "simulate.json", harness::estimates_json(e).dump(2) + "\n");
    return 0;
}

int cmd_compare(const Options& o) {
    const auto s = load(o);
    const auto r = harness::compare(s);
    harness::render_comparison(r, std::cout);
    write_file(o, "compare.csv", harness::comparison_csv(r));
    return r.pass ? 0 : 1;
}

int cmd_couple(const Options& o) {
    const auto s = load(o);
    TraceSink trace(o);
    const auto r = harness::couple(s, trace.get());
    harness::render_coupling(s, r, std::cout);
    write_file(o, "couple.csv", harness::coupling_csv(s.spec.n, r));
    return r.ok() ? 0 : 1;
}

int cmd_table1(const Options& o) {
    const auto rows = harness::table1();
    harness::render_table1(rows, std::cout);
    write_file(o, "table1.csv", harness::table1_csv(harness::table1_records(rows)));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Limited processor-sharing loss systems: closed forms, simulation, coupling checks"};
    app.require_subcommand(1);
    Options opt;

    auto add_common = [&opt](CLI::App* sub, bool needs_config) {
        auto* c = sub->add_option("--config", opt.config, "Scenario JSON file");
        if (needs_config) c->required();
        sub->add_option("--out", opt.out, "Directory for CSV/JSON output");
    };
    auto add_run = [&opt](CLI::App* sub) {
        sub->add_option("--seed", opt.seed, "Root random seed");
        sub->add_option("--horizon", opt.horizon, "Arrivals to simulate");
        sub->add_option("--warmup", opt.warmup, "Arrivals discarded before measuring");
        sub->add_option("--replications", opt.replications, "Independent replications");
        sub->add_flag("--trace", opt.trace, "Emit one line per event");
    };

    std::function<int(const Options&)> handler;
    auto* analytic = app.add_subcommand("analytic", "Evaluate the scenario's closed-form formulas");
    add_common(analytic, true);
    analytic->callback([&] { handler = cmd_analytic; });

    auto* simulate = app.add_subcommand("simulate", "Simulate the scenario");
    add_common(simulate, true);
    add_run(simulate);
    simulate->callback([&] { handler = cmd_simulate; });

    auto* compare = app.add_subcommand("compare", "Compare formulas against simulation");
    add_common(compare, true);
    add_run(compare);
    compare->callback([&] { handler = cmd_compare; });

    auto* couple = app.add_subcommand("couple", "Coupled limited/unlimited run");
    add_common(couple, true);
    add_run(couple);
    couple->callback([&] { handler = cmd_couple; });

    auto* table = app.add_subcommand("table1", "Reproduce the loss-probability table");
    table->add_option("--out", opt.out, "Directory for CSV output");
    table->callback([&] { handler = cmd_table1; });

    CLI11_PARSE(app, argc, argv);

    try {
        return handler(opt);
    } catch (const harness::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const harness::AdmissibilityError& e) {
        std::cerr << "inadmissible: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << "\n";
        return 3;
    }
}
