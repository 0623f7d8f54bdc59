#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lps/analytic.hpp"
#include "lps/simulator.hpp"

namespace lps::harness {

inline constexpr std::uint64_t kDefaultSeed = 20240607;
inline constexpr double kTable1Threshold = 0.0015;

enum class Formula { Theorem2, Corollary2, Eq4, Theorem5, ErlangB, SrlTail };

std::string to_string(Formula f);
std::optional<Formula> formula_from_string(std::string_view name);

// Configuration problems: bad JSON, missing or ill-typed fields, invalid
// parameter values. what() names the line/column or the JSON field.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class AdmissibilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunParams {
    std::uint64_t horizon = 100'000;
    std::optional<std::uint64_t> warmup;
    std::size_t replications = 1;
    std::uint64_t seed = kDefaultSeed;
    std::size_t batches = 30;
};

struct Scenario {
    std::string name;
    sim::SystemSpec spec;
    std::vector<Formula> formulas;
    RunParams run;
};

Scenario parse_scenario(const nlohmann::json& doc);
Scenario parse_scenario_text(std::string_view text);
Scenario load_scenario(const std::filesystem::path& path);

// Why the formula does not describe the scenario, if it does not.
std::optional<std::string> admissibility_error(Formula f, const Scenario& s);

struct FormulaResult {
    Formula formula;
    analytic::StateDistribution dist;
    double loss; // p_n
    double mean_jobs;
    double sojourn; // Little's law with the mean arrival rate; 0 without arrivals
    // Fraction of arrivals lost; differs from p_n only for state-dependent rates.
    double arrival_loss = 0.0;
};

// Throws AdmissibilityError for a formula that does not apply.
FormulaResult evaluate(Formula f, const Scenario& s);

// ---------------------------------------------------------------------------
// Loss-probability table

struct Table1Row {
    int row;
    std::size_t n;
    double lambda;
    // Columns: truncated-unlimited loss (c_i = 1/i), FCFD with exponential
    // lengths, FCFD with zero-inflated exponential lengths (alpha = 0.5).
    std::array<double, 3> computed;
    std::array<double, 3> reference;

    double abs_dev(std::size_t col) const;
    bool flagged(std::size_t col) const { return abs_dev(col) > kTable1Threshold; }
};

// All 26 rows, mean length 1, egalitarian rates.
std::vector<Table1Row> table1();

struct Table1Record {
    int row;
    std::size_t n;
    double lambda;
    int col; // 1..3
    double computed;
    double paper;
    double abs_dev;
    bool flag;

    bool operator==(const Table1Record&) const = default;
};

std::vector<Table1Record> table1_records(const std::vector<Table1Row>& rows);
// Header `row,n,lambda,col,computed,paper,abs_dev,flag`; doubles in
// shortest round-trip form.
std::string table1_csv(const std::vector<Table1Record>& records);
std::vector<Table1Record> parse_table1_csv(std::string_view csv);
void render_table1(const std::vector<Table1Row>& rows, std::ostream& os);

// ---------------------------------------------------------------------------
// Reports

void render_analytic(const Scenario& s, const std::vector<FormulaResult>& results, std::ostream& os);
nlohmann::json analytic_json(const Scenario& s, const std::vector<FormulaResult>& results);

sim::SimEstimates simulate(const Scenario& s, std::ostream* trace = nullptr);
void render_estimates(const Scenario& s, const sim::SimEstimates& e, std::ostream& os);
nlohmann::json estimates_json(const sim::SimEstimates& e);

struct LevelCheck {
    std::string label;
    double analytic;
    double simulated;
    double half_width;
    bool pass;
};

struct FormulaComparison {
    Formula formula;
    std::vector<LevelCheck> levels;
    LevelCheck loss;
    double analytic_sojourn;
    double simulated_sojourn;
    bool pass;
};

struct ComparisonReport {
    std::string scenario;
    sim::SimEstimates estimates;
    std::vector<FormulaComparison> formulas;
    // Idle periods against exponential(lambda_0 P(L > 0)); absent with < 500
    // idle samples.
    std::optional<stats::KsResult> idle_vs_exponential;
    double idle_reference_rate = 0.0;
    bool pass;
};

ComparisonReport compare(const Scenario& s);
void render_comparison(const ComparisonReport& r, std::ostream& os);
std::string comparison_csv(const ComparisonReport& r);

sim::CouplingReport couple(const Scenario& s, std::ostream* trace = nullptr);
void render_coupling(const Scenario& s, const sim::CouplingReport& r, std::ostream& os);
std::string coupling_csv(std::size_t n, const sim::CouplingReport& r);

} // namespace lps::harness
