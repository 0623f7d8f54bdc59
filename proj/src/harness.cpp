#include "lps/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace lps::harness {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<Formula, std::string_view>, 6> kFormulaNames{{
    {Formula::Theorem2, "theorem2"},
    {Formula::Corollary2, "corollary2"},
    {Formula::Eq4, "eq4"},
    {Formula::Theorem5, "theorem5"},
    {Formula::ErlangB, "erlang_b"},
    {Formula::SrlTail, "srl_tail"},
}};

std::string display_name(const std::string& name) {
    return name.empty() ? "(unnamed)" : name;
}

[[noreturn]] void fail(const std::string& field, const std::string& message) {
    throw ConfigError("config field '" + field + "': " + message);
}

const json& required(const json& obj, const char* key, const std::string& path) {
    const auto it = obj.find(key);
    if (it == obj.end()) fail(path + key, "missing");
    return *it;
}

double number(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
}

std::uint64_t count(const json& v, const std::string& path) {
    if (!v.is_number_integer() && !v.is_number_unsigned()) fail(path, "expected a nonnegative integer");
    if (v.is_number_integer() && v.get<std::int64_t>() < 0) fail(path, "expected a nonnegative integer");
    return v.get<std::uint64_t>();
}

double number_field(const json& obj, const char* key, const std::string& path) {
    return number(required(obj, key, path), path + key);
}

LengthDistribution parse_length(const json& j) {
    const std::string path = "length.";
    if (!j.is_object()) fail("length", "expected an object with a 'kind'");
    const json& kind_v = required(j, "kind", path);
    if (!kind_v.is_string()) fail("length.kind", "expected a string");
    const std::string kind = kind_v.get<std::string>();
    try {
        if (kind == "deterministic") {
            return LengthDistribution::deterministic(
                number_field(j, j.contains("length") ? "length" : "mean", path));
        }
        if (kind == "exponential") {
            if (j.contains("rate")) return LengthDistribution::exponential(number_field(j, "rate", path));
            return LengthDistribution::exponential_with_mean(number_field(j, "mean", path));
        }
        if (kind == "zero_inflated_exponential") {
            return LengthDistribution::zero_inflated_exponential(number_field(j, "alpha", path),
                                                                 number_field(j, "mu", path));
        }
        if (kind == "hyperexponential") {
            if (j.contains("branches")) {
                const json& br = j["branches"];
                if (!br.is_array()) fail("length.branches", "expected an array");
                std::vector<HyperBranch> branches;
                for (std::size_t i = 0; i < br.size(); ++i) {
                    const std::string bp = "length.branches[" + std::to_string(i) + "].";
                    branches.push_back({number_field(br[i], "weight", bp), number_field(br[i], "rate", bp)});
                }
                return LengthDistribution::hyperexponential(std::move(branches));
            }
            return LengthDistribution::hyperexponential_balanced(number_field(j, "mean", path),
                                                                 number_field(j, "scv", path));
        }
    } catch (const std::invalid_argument& e) {
        fail("length", e.what());
    }
    fail("length.kind", "unknown distribution '" + kind + "'");
}

std::vector<double> number_list(const json& v, const std::string& path) {
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

bool is_constant(const ArrivalRates& r) {
    return r.is_constant();
}

double offered_rate(const Scenario& s, const analytic::StateDistribution& d) {
    double rate = 0.0;
    for (std::size_t i = 0; i < d.p.size(); ++i) rate += s.spec.rates.at(i) * d.p[i];
    return rate;
}

std::string fmt(double v, int precision = 6) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(precision) << v;
    return os.str();
}

std::string shortest(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

} // namespace

std::string to_string(Formula f) {
    for (const auto& [k, name] : kFormulaNames) {
        if (k == f) return std::string(name);
    }
    return "?";
}

std::optional<Formula> formula_from_string(std::string_view name) {
    for (const auto& [k, n] : kFormulaNames) {
        if (n == name) return k;
    }
    return std::nullopt;
}

Scenario parse_scenario(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config: top level must be a JSON object");

    const std::string name = doc.contains("name") && doc["name"].is_string() ? doc["name"].get<std::string>() : "";
    const std::uint64_t n64 = count(required(doc, "n", ""), "n");
    if (n64 < 1) fail("n", "capacity must be at least 1");
    const std::size_t n = static_cast<std::size_t>(n64);

    const json& lam = required(doc, "lambda", "");
    std::optional<ArrivalRates> rates;
    try {
        if (lam.is_array()) {
            if (lam.size() != n + 1) fail("lambda", "state-dependent rates need n+1 entries");
            rates.emplace(number_list(lam, "lambda"));
        } else {
            rates.emplace(ArrivalRates::constant(n, number(lam, "lambda")));
        }
    } catch (const std::invalid_argument& e) {
        fail("lambda", e.what());
    }

    std::optional<analytic::ServiceRateProfile> profile;
    const json prof = doc.value("profile", json("egalitarian"));
    try {
        if (prof.is_string()) {
            const std::string p = prof.get<std::string>();
            if (p == "egalitarian") profile.emplace(analytic::ServiceRateProfile::egalitarian(n));
            else if (p == "unit") profile.emplace(analytic::ServiceRateProfile::uniform(n, 1.0));
            else fail("profile", "expected 'egalitarian', 'unit' or a list of n rates");
        } else if (prof.is_array()) {
            if (prof.size() != n) fail("profile", "rate list needs n entries");
            profile.emplace(number_list(prof, "profile"));
        } else {
            fail("profile", "expected 'egalitarian', 'unit' or a list of n rates");
        }
    } catch (const std::invalid_argument& e) {
        fail("profile", e.what());
    }

    const LengthDistribution law = parse_length(required(doc, "length", ""));

    sim::Discipline discipline = sim::Discipline::SrlLoss;
    if (doc.contains("discipline")) {
        const json& d = doc["discipline"];
        const std::string v = d.is_string() ? d.get<std::string>() : "";
        if (v == "srl") discipline = sim::Discipline::SrlLoss;
        else if (v == "fcfd") discipline = sim::Discipline::FcfdDisplace;
        else if (v == "block") discipline = sim::Discipline::BlockArriving;
        else fail("discipline", "expected 'srl', 'fcfd' or 'block'");
    }
    sim::Variant variant = sim::Variant::Limited;
    if (doc.contains("variant")) {
        const json& v = doc["variant"];
        const std::string s = v.is_string() ? v.get<std::string>() : "";
        if (s == "limited") variant = sim::Variant::Limited;
        else if (s == "unlimited") variant = sim::Variant::UnlimitedCapped;
        else fail("variant", "expected 'limited' or 'unlimited'");
    }

    Scenario sc{name, sim::SystemSpec{n, *rates, *profile, law, discipline, variant}, {}, {}};

    if (doc.contains("formulas")) {
        const json& f = doc["formulas"];
        if (!f.is_array()) fail("formulas", "expected an array of formula names");
        for (std::size_t i = 0; i < f.size(); ++i) {
            const std::string path = "formulas[" + std::to_string(i) + "]";
            if (!f[i].is_string()) fail(path, "expected a string");
            const auto sel = formula_from_string(f[i].get<std::string>());
            if (!sel) fail(path, "unknown formula '" + f[i].get<std::string>() + "'");
            sc.formulas.push_back(*sel);
        }
    }

    if (doc.contains("run")) {
        const json& r = doc["run"];
        if (!r.is_object()) fail("run", "expected an object");
        if (r.contains("horizon")) sc.run.horizon = count(r["horizon"], "run.horizon");
        if (r.contains("warmup")) sc.run.warmup = count(r["warmup"], "run.warmup");
        if (r.contains("replications")) sc.run.replications = count(r["replications"], "run.replications");
        if (r.contains("seed")) sc.run.seed = count(r["seed"], "run.seed");
        if (r.contains("batches")) sc.run.batches = count(r["batches"], "run.batches");
        if (sc.run.replications < 1) fail("run.replications", "must be at least 1");
        if (sc.run.batches < 2) fail("run.batches", "must be at least 2");
    }
    return sc;
}

Scenario parse_scenario_text(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        // Translate the byte offset into line/column.
        std::size_t line = 1;
        std::size_t col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError("config parse error at line " + std::to_string(line) + ", column " + std::to_string(col) +
                          ": " + e.what());
    }
    return parse_scenario(doc);
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    Scenario s = parse_scenario_text(ss.str());
    if (s.name.empty()) s.name = path.stem().string();
    return s;
}

std::optional<std::string> admissibility_error(Formula f, const Scenario& s) {
    const auto& spec = s.spec;
    const std::string name = to_string(f);
    if (spec.variant != sim::Variant::Limited) return name + " describes the limited system, scenario is unlimited";

    const bool srl_like = spec.discipline == sim::Discipline::SrlLoss ||
                          (spec.discipline == sim::Discipline::FcfdDisplace && spec.length_law.is_deterministic());
    switch (f) {
    case Formula::Theorem2:
        if (!srl_like) return name + " needs srl discipline (or fcfd with deterministic lengths)";
        return std::nullopt;
    case Formula::Corollary2:
        if (!srl_like) return name + " needs srl discipline (or fcfd with deterministic lengths)";
        if (!is_constant(spec.rates)) return name + " needs a constant arrival rate";
        if (!spec.profile.is_egalitarian()) return name + " needs egalitarian rates c_i = 1/i";
        return std::nullopt;
    case Formula::SrlTail:
        if (!srl_like) return name + " needs srl discipline (or fcfd with deterministic lengths)";
        if (!is_constant(spec.rates)) return name + " needs a constant arrival rate";
        if (!spec.profile.is_unit()) return name + " needs unit rates c_i = 1";
        return std::nullopt;
    case Formula::Eq4:
        if (spec.discipline == sim::Discipline::BlockArriving) return name + " needs srl or fcfd discipline";
        if (!spec.length_law.is_deterministic()) return name + " needs deterministic lengths";
        if (!is_constant(spec.rates)) return name + " needs a constant arrival rate";
        if (!spec.profile.is_unit()) return name + " needs unit rates c_i = 1";
        return std::nullopt;
    case Formula::Theorem5:
        if (spec.discipline != sim::Discipline::FcfdDisplace) return name + " needs fcfd discipline";
        if (!spec.length_law.is_zero_inflated() && !spec.length_law.is_exponential()) {
            return name + " needs zero_inflated_exponential (or exponential) lengths";
        }
        return std::nullopt;
    case Formula::ErlangB:
        if (spec.discipline != sim::Discipline::BlockArriving) return name + " needs block discipline";
        if (!is_constant(spec.rates)) return name + " needs a constant arrival rate";
        if (!spec.profile.is_unit()) return name + " needs unit rates c_i = 1";
        return std::nullopt;
    }
    return name + " is unknown";
}

FormulaResult evaluate(Formula f, const Scenario& s) {
    if (auto err = admissibility_error(f, s)) throw AdmissibilityError(*err);
    const auto& spec = s.spec;
    const std::size_t n = spec.n;
    const double b = spec.length_law.mean();
    const double lambda = spec.rates.at(0);

    FormulaResult r{f, {}, 0.0, 0.0, 0.0};
    switch (f) {
    case Formula::Theorem2:
        r.dist = analytic::theorem2_probs(n, spec.rates, b, spec.profile);
        r.loss = r.dist.loss();
        break;
    case Formula::Corollary2:
        r.dist = analytic::theorem2_probs(n, spec.rates, b, spec.profile);
        r.loss = analytic::corollary2_loss(n, lambda, b);
        break;
    case Formula::SrlTail:
        r.dist = analytic::srl_nserver_probs(n, lambda, b);
        r.loss = r.dist.loss();
        break;
    case Formula::Eq4:
        r.dist = analytic::srl_nserver_probs(n, lambda, b);
        r.loss = analytic::fcfd_constant_loss(n, lambda, b);
        break;
    case Formula::Theorem5: {
        double alpha = 1.0;
        double mu = 0.0;
        if (const auto* z = std::get_if<ZeroInflatedExponential>(&spec.length_law.law())) {
            alpha = z->alpha;
            mu = z->rate;
        } else {
            mu = std::get<Exponential>(spec.length_law.law()).rate;
        }
        r.dist = analytic::theorem5_probs(n, spec.rates, alpha, mu, spec.profile);
        r.loss = r.dist.loss();
        break;
    }
    case Formula::ErlangB: {
        std::vector<double> rho(n);
        for (std::size_t i = 0; i < n; ++i) rho[i] = lambda * b / static_cast<double>(i + 1);
        r.dist = analytic::product_form(rho);
        r.loss = analytic::erlang_b(n, lambda * b);
        break;
    }
    }
    r.arrival_loss = spec.rates.is_constant() ? r.loss : analytic::arrival_loss(r.dist, spec.rates);
    r.mean_jobs = r.dist.mean_jobs();
    const double rate = offered_rate(s, r.dist);
    r.sojourn = rate > 0.0 ? analytic::little_sojourn(r.dist, rate).mean_time : 0.0;
    return r;
}

// ---------------------------------------------------------------------------
// Loss-probability table

namespace {

struct ReferenceRow {
    int row;
    std::size_t n;
    double lambda;
    std::array<double, 3> values;
};

// Reference 3-decimal values.
constexpr std::array<ReferenceRow, 26> kReference{{
    {1, 1, 0.1, {0.095, 0.091, 0.083}},  {2, 1, 0.2, {0.181, 0.167, 0.143}},
    {3, 1, 0.3, {0.259, 0.231, 0.188}},  {4, 1, 0.4, {0.330, 0.286, 0.222}},
    {5, 1, 0.5, {0.393, 0.333, 0.250}},  {6, 1, 0.6, {0.451, 0.375, 0.272}},
    {7, 1, 0.7, {0.503, 0.412, 0.292}},  {8, 1, 0.8, {0.551, 0.444, 0.292}},
    {9, 1, 0.9, {0.593, 0.474, 0.321}},  {10, 1, 1.0, {0.632, 0.500, 0.333}},
    {11, 1, 1.5, {0.777, 0.600, 0.375}}, {12, 1, 2.0, {0.865, 0.667, 0.400}},
    {13, 2, 0.2, {0.037, 0.032, 0.024}}, {14, 2, 0.4, {0.132, 0.103, 0.068}},
    {15, 2, 0.6, {0.259, 0.184, 0.123}}, {16, 2, 0.8, {0.395, 0.262, 0.165}},
    {17, 2, 1.0, {0.523, 0.333, 0.200}}, {18, 2, 1.2, {0.634, 0.396, 0.229}},
    {19, 2, 1.4, {0.725, 0.427, 0.251}}, {20, 2, 1.6, {0.797, 0.496, 0.275}},
    {21, 2, 1.8, {0.851, 0.536, 0.292}}, {22, 2, 2.0, {0.892, 0.571, 0.308}},
    {23, 5, 0.5, {0.026, 0.016, 0.011}}, {24, 5, 1.0, {0.390, 0.167, 0.091}},
    {25, 5, 1.5, {0.820, 0.371, 0.128}}, {26, 5, 2.0, {0.964, 0.508, 0.262}},
}};

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) return out;
        start = pos + 1;
    }
}

template <class T>
T parse_field(std::string_view text, const char* what, std::size_t line) {
    T value{};
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw std::invalid_argument("table1 csv line " + std::to_string(line) + ": bad " + what + " '" +
                                    std::string(text) + "'");
    }
    return value;
}

} // namespace

double Table1Row::abs_dev(std::size_t col) const {
    return std::abs(computed[col] - reference[col]);
}

std::vector<Table1Row> table1() {
    std::vector<Table1Row> rows;
    rows.reserve(kReference.size());
    for (const auto& ref : kReference) {
        const auto rates = ArrivalRates::constant(ref.n, ref.lambda);
        const auto profile = analytic::ServiceRateProfile::egalitarian(ref.n);
        Table1Row row{ref.row, ref.n, ref.lambda, {}, ref.values};
        row.computed[0] = analytic::corollary2_loss(ref.n, ref.lambda, 1.0);
        row.computed[1] = analytic::theorem5_probs(ref.n, rates, 1.0, 1.0, profile).loss();
        row.computed[2] = analytic::theorem5_probs(ref.n, rates, 0.5, 0.5, profile).loss();
        rows.push_back(row);
    }
    return rows;
}

std::vector<Table1Record> table1_records(const std::vector<Table1Row>& rows) {
    std::vector<Table1Record> out;
    out.reserve(rows.size() * 3);
    for (const auto& r : rows) {
        for (std::size_t c = 0; c < 3; ++c) {
            out.push_back({r.row, r.n, r.lambda, static_cast<int>(c + 1), r.computed[c], r.reference[c], r.abs_dev(c),
                           r.flagged(c)});
        }
    }
    return out;
}

std::string table1_csv(const std::vector<Table1Record>& records) {
    std::string out = "row,n,lambda,col,computed,paper,abs_dev,flag\n";
    for (const auto& r : records) {
        out += std::to_string(r.row) + ',' + std::to_string(r.n) + ',' + shortest(r.lambda) + ',' +
               std::to_string(r.col) + ',' + shortest(r.computed) + ',' + shortest(r.paper) + ',' +
               shortest(r.abs_dev) + ',' + (r.flag ? "1" : "0") + '\n';
    }
    return out;
}

std::vector<Table1Record> parse_table1_csv(std::string_view csv) {
    std::vector<Table1Record> out;
    std::size_t line_no = 0;
    for (std::string_view line : split(csv, '\n')) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        if (line_no == 1) {
            if (line != "row,n,lambda,col,computed,paper,abs_dev,flag") {
                throw std::invalid_argument("table1 csv: unexpected header");
            }
            continue;
        }
        const auto f = split(line, ',');
        if (f.size() != 8) throw std::invalid_argument("table1 csv line " + std::to_string(line_no) + ": need 8 fields");
        Table1Record r{};
        r.row = parse_field<int>(f[0], "row", line_no);
        r.n = parse_field<std::size_t>(f[1], "n", line_no);
        r.lambda = parse_field<double>(f[2], "lambda", line_no);
        r.col = parse_field<int>(f[3], "col", line_no);
        r.computed = parse_field<double>(f[4], "computed", line_no);
        r.paper = parse_field<double>(f[5], "paper", line_no);
        r.abs_dev = parse_field<double>(f[6], "abs_dev", line_no);
        r.flag = parse_field<int>(f[7], "flag", line_no) != 0;
        out.push_back(r);
    }
    return out;
}

void render_table1(const std::vector<Table1Row>& rows, std::ostream& os) {
    os << "Loss probabilities, mean length b = 1, egalitarian rates c_i = 1/i\n"
       << "  col1: limited PS, shortest-remaining-length loss (truncated unlimited system)\n"
       << "  col2: FCFD, exponential lengths (alpha = 1, mu = 1)\n"
       << "  col3: FCFD, zero-inflated exponential lengths (alpha = 0.5, mu = 0.5)\n"
       << "  Reference values are 3-decimal entries. They are reproduced with\n"
       << "  c_i = 1/i; with unit rates c_i = 1 they are not.\n"
       << "  '*' marks |computed - reference| > " << kTable1Threshold << ".\n\n";
    os << " No.  n  lambda |   col1    ref  |   col2    ref  |   col3    ref\n";
    os << "----------------+----------------+----------------+----------------\n";
    std::size_t flagged = 0;
    for (const auto& r : rows) {
        os << std::setw(4) << r.row << std::setw(3) << r.n << std::setw(8) << fmt(r.lambda, 1) << " |";
        for (std::size_t c = 0; c < 3; ++c) {
            os << std::setw(7) << fmt(r.computed[c], 3) << (r.flagged(c) ? '*' : ' ') << std::setw(7)
               << fmt(r.reference[c], 3) << " " << (c < 2 ? "|" : "");
            flagged += r.flagged(c);
        }
        os << '\n';
    }
    os << "\n" << rows.size() * 3 - flagged << " of " << rows.size() * 3 << " cells within " << kTable1Threshold
       << ", " << flagged << " flagged\n";

    os << "\nSupplementary: col1 loss against capacity n for fixed lambda (b = 1)\n";
    os << "lambda |";
    const std::array<std::size_t, 5> ns{1, 2, 5, 10, 20};
    for (std::size_t n : ns) os << std::setw(8) << ("n=" + std::to_string(n));
    os << '\n';
    for (double lam : {1.0, 1.2, 1.4, 1.6, 2.0}) {
        os << std::setw(6) << fmt(lam, 1) << " |";
        for (std::size_t n : ns) os << std::setw(8) << fmt(analytic::corollary2_loss(n, lam, 1.0), 4);
        os << '\n';
    }
}

// ---------------------------------------------------------------------------
// Reports

void render_analytic(const Scenario& s, const std::vector<FormulaResult>& results, std::ostream& os) {
    os << "scenario " << display_name(s.name) << ": n=" << s.spec.n << " discipline=" << sim::to_string(s.spec.discipline)
       << " length=" << s.spec.length_law.describe() << " mean=" << s.spec.length_law.mean() << "\n";
    for (const auto& r : results) {
        os << "\n[" << to_string(r.formula) << "]\n";
        for (std::size_t i = 0; i < r.dist.p.size(); ++i) os << "  p_" << i << " = " << fmt(r.dist.p[i], 10) << "\n";
        os << "  loss = " << fmt(r.loss, 10) << "\n";
        if (!s.spec.rates.is_constant()) os << "  lost fraction of arrivals = " << fmt(r.arrival_loss, 10) << "\n";
        os << "  L    = " << fmt(r.mean_jobs, 10) << "\n";
        os << "  V    = " << fmt(r.sojourn, 10) << "\n";
    }
}

json analytic_json(const Scenario& s, const std::vector<FormulaResult>& results) {
    json out;
    out["scenario"] = s.name;
    out["n"] = s.spec.n;
    json list = json::array();
    for (const auto& r : results) {
        list.push_back({{"formula", to_string(r.formula)},
                        {"p", r.dist.p},
                        {"loss", r.loss},
                        {"arrival_loss", r.arrival_loss},
                        {"mean_jobs", r.mean_jobs},
                        {"sojourn", r.sojourn}});
    }
    out["results"] = list;
    return out;
}

sim::SimEstimates simulate(const Scenario& s, std::ostream* trace) {
    sim::RunOptions opt;
    opt.horizon = s.run.horizon;
    opt.warmup = s.run.warmup;
    opt.seed = s.run.seed;
    opt.batches = s.run.batches;
    opt.trace = trace;
    return sim::run_replications(s.spec, opt, s.run.replications);
}

void render_estimates(const Scenario& s, const sim::SimEstimates& e, std::ostream& os) {
    os << "scenario " << display_name(s.name) << ": n=" << s.spec.n << " discipline=" << sim::to_string(s.spec.discipline)
       << " variant=" << sim::to_string(s.spec.variant) << " length=" << s.spec.length_law.describe() << "\n";
    os << "window: " << e.window.arrivals << " arrivals, " << fmt(e.window_time, 3) << " time units, " << e.events
       << " events\n";
    os << " level  occupancy     +/-   seen_by_arrival     +/-\n";
    for (std::size_t i = 0; i < e.occupancy.size(); ++i) {
        os << std::setw(6) << i << std::setw(11) << fmt(e.occupancy[i]) << std::setw(9) << fmt(e.occupancy_ci_half[i])
           << std::setw(18) << fmt(e.arrival_seen[i]) << std::setw(9) << fmt(e.arrival_seen_ci_half[i]) << "\n";
    }
    os << "loss probability   " << fmt(e.loss_prob) << " +/- " << fmt(e.loss_ci_half) << "\n";
    os << "mean jobs L        " << fmt(e.mean_jobs) << "\n";
    os << "sojourn (all)      " << fmt(e.sojourn_all) << "\n";
    os << "sojourn served     " << fmt(e.sojourn_served) << "\n";
    os << "sojourn displaced  " << fmt(e.sojourn_displaced) << "\n";
    os << "counts: arrivals=" << e.window.arrivals << " served=" << e.window.served
       << " displaced=" << e.window.displaced << " blocked=" << e.window.blocked << "\n";
    os << "idle periods       " << e.idle_periods.size() << "\n";
}

json estimates_json(const sim::SimEstimates& e) {
    auto counts = [](const sim::SimCounts& c) {
        return json{{"arrivals", c.arrivals},
                    {"served", c.served},
                    {"displaced", c.displaced},
                    {"blocked", c.blocked},
                    {"in_system", c.in_system}};
    };
    return json{{"occupancy", e.occupancy},
                {"occupancy_ci_half", e.occupancy_ci_half},
                {"arrival_seen", e.arrival_seen},
                {"arrival_seen_ci_half", e.arrival_seen_ci_half},
                {"loss_prob", e.loss_prob},
                {"loss_ci_half", e.loss_ci_half},
                {"mean_jobs", e.mean_jobs},
                {"sojourn_all", e.sojourn_all},
                {"sojourn_served", e.sojourn_served},
                {"sojourn_displaced", e.sojourn_displaced},
                {"idle_periods", e.idle_periods.size()},
                {"window", counts(e.window)},
                {"totals", counts(e.totals)},
                {"events", e.events}};
}

ComparisonReport compare(const Scenario& s) {
    if (s.formulas.empty()) throw ConfigError("config field 'formulas': compare needs at least one formula");
    std::vector<FormulaResult> analytic;
    for (Formula f : s.formulas) analytic.push_back(evaluate(f, s));

    ComparisonReport rep;
    rep.scenario = s.name;
    rep.estimates = simulate(s);
    const auto& e = rep.estimates;
    rep.pass = true;

    auto check = [](std::string label, double a, double sim, double half) {
        // Deterministic estimates (no arrivals) have zero width.
        const bool ok = std::abs(a - sim) <= std::max(half, 1e-12);
        return LevelCheck{std::move(label), a, sim, half, ok};
    };
    for (const auto& r : analytic) {
        FormulaComparison fc{r.formula, {}, {}, r.sojourn, e.sojourn_all, true};
        for (std::size_t i = 0; i < r.dist.p.size(); ++i) {
            const double sim = i < e.occupancy.size() ? e.occupancy[i] : 0.0;
            const double half = i < e.occupancy_ci_half.size() ? e.occupancy_ci_half[i] : 0.0;
            fc.levels.push_back(check("p_" + std::to_string(i), r.dist.p[i], sim, half));
            fc.pass = fc.pass && fc.levels.back().pass;
        }
        fc.loss = check("loss", r.arrival_loss, e.loss_prob, e.loss_ci_half);
        fc.pass = fc.pass && fc.loss.pass;
        rep.pass = rep.pass && fc.pass;
        rep.formulas.push_back(std::move(fc));
    }
    // Zero-length arrivals to an empty system leave at once and do not end
    // the idle period, so idle periods are exponential with the thinned rate.
    rep.idle_reference_rate = s.spec.rates.at(0) * (1.0 - s.spec.length_law.zero_mass());
    if (e.idle_periods.size() >= 500 && rep.idle_reference_rate > 0.0) {
        rep.idle_vs_exponential = stats::ks_exponential(e.idle_periods, rep.idle_reference_rate, 0.01);
        rep.pass = rep.pass && rep.idle_vs_exponential->pass;
    }
    return rep;
}

void render_comparison(const ComparisonReport& r, std::ostream& os) {
    os << "scenario " << display_name(r.scenario) << ": " << r.estimates.window.arrivals << " measured arrivals\n";
    for (const auto& f : r.formulas) {
        os << "\n[" << to_string(f.formula) << "]\n";
        os << "  quantity    analytic   simulated       +/-  verdict\n";
        auto line = [&os](const LevelCheck& c) {
            os << "  " << std::left << std::setw(8) << c.label << std::right << std::setw(12) << fmt(c.analytic)
               << std::setw(12) << fmt(c.simulated) << std::setw(10) << fmt(c.half_width) << "  "
               << (c.pass ? "PASS" : "FAIL") << "\n";
        };
        for (const auto& c : f.levels) line(c);
        line(f.loss);
        os << "  V (Little) analytic " << fmt(f.analytic_sojourn) << "  simulated " << fmt(f.simulated_sojourn)
           << "\n";
    }
    if (r.idle_vs_exponential) {
        os << "\nidle periods vs exponential(" << fmt(r.idle_reference_rate) << "): KS D=" << fmt(r.idle_vs_exponential->statistic)
           << " p=" << fmt(r.idle_vs_exponential->p_value, 4) << " "
           << (r.idle_vs_exponential->pass ? "PASS" : "FAIL") << "\n";
    } else {
        os << "\nidle periods: fewer than 500 samples, test skipped\n";
    }
    os << "\noverall: " << (r.pass ? "PASS" : "FAIL") << "\n";
}

std::string comparison_csv(const ComparisonReport& r) {
    std::string out = "formula,quantity,analytic,simulated,half_width,pass\n";
    for (const auto& f : r.formulas) {
        auto row = [&](const LevelCheck& c) {
            out += to_string(f.formula) + ',' + c.label + ',' + shortest(c.analytic) + ',' + shortest(c.simulated) +
                   ',' + shortest(c.half_width) + ',' + (c.pass ? "1" : "0") + '\n';
        };
        for (const auto& c : f.levels) row(c);
        row(f.loss);
    }
    return out;
}

sim::CouplingReport couple(const Scenario& s, std::ostream* trace) {
    if (s.spec.discipline != sim::Discipline::SrlLoss || s.spec.variant != sim::Variant::Limited) {
        throw AdmissibilityError("couple needs a limited system with srl discipline");
    }
    return sim::run_coupled(s.spec, s.run.horizon, s.run.seed, trace);
}

void render_coupling(const Scenario& s, const sim::CouplingReport& r, std::ostream& os) {
    const std::size_t n = s.spec.n;
    os << "scenario " << display_name(s.name) << ": coupled limited/unlimited run, n=" << n << ", " << r.arrivals << " arrivals, "
       << r.events << " events\n";
    os << "level violations    " << r.level_violations << "\n";
    os << "multiset violations " << r.multiset_violations << " (" << r.multiset_checks << " checks)\n";
    const auto folded = r.unlimited_folded(n);
    os << " level   limited  unlimited(folded)\n";
    for (std::size_t i = 0; i <= n; ++i) {
        os << std::setw(6) << (i < n ? std::to_string(i) : ">=" + std::to_string(n)) << std::setw(10)
           << fmt(r.occupancy_limited[i]) << std::setw(19) << fmt(folded[i]) << "\n";
    }
    os << "verdict: " << (r.ok() ? "OK" : "VIOLATION") << "\n";
    if (!r.ok()) os << r.failure;
}

std::string coupling_csv(std::size_t n, const sim::CouplingReport& r) {
    std::string out = "level,limited,unlimited_folded\n";
    const auto folded = r.unlimited_folded(n);
    for (std::size_t i = 0; i <= n; ++i) {
        out += std::to_string(i) + ',' + shortest(r.occupancy_limited[i]) + ',' + shortest(folded[i]) + '\n';
    }
    return out;
}

} // namespace lps::harness
