#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <variant>

#include "lps/analytic.hpp"
#include "lps/harness.hpp"
#include "lps/simulator.hpp"

namespace py = pybind11;
using namespace lps;

namespace {

using RateArg = std::variant<double, std::vector<double>>;
using ProfileArg = std::variant<std::string, std::vector<double>>;

ArrivalRates make_rates(std::size_t n, const RateArg& arg) {
    if (const auto* v = std::get_if<double>(&arg)) return ArrivalRates::constant(n, *v);
    return ArrivalRates(std::get<std::vector<double>>(arg));
}

analytic::ServiceRateProfile make_profile(std::size_t n, const ProfileArg& arg) {
    if (const auto* name = std::get_if<std::string>(&arg)) {
        if (*name == "egalitarian") return analytic::ServiceRateProfile::egalitarian(n);
        if (*name == "unit") return analytic::ServiceRateProfile::uniform(n, 1.0);
        throw std::invalid_argument("profile must be 'egalitarian', 'unit' or a list of rates");
    }
    return analytic::ServiceRateProfile(std::get<std::vector<double>>(arg));
}

py::dict estimates_dict(const sim::SimEstimates& e) {
    py::dict d;
    d["occupancy"] = e.occupancy;
    d["occupancy_ci_half"] = e.occupancy_ci_half;
    d["arrival_seen"] = e.arrival_seen;
    d["loss_prob"] = e.loss_prob;
    d["loss_ci_half"] = e.loss_ci_half;
    d["mean_jobs"] = e.mean_jobs;
    d["sojourn_all"] = e.sojourn_all;
    d["sojourn_served"] = e.sojourn_served;
    d["sojourn_displaced"] = e.sojourn_displaced;
    d["idle_periods"] = e.idle_periods;
    d["arrivals"] = e.window.arrivals;
    d["served"] = e.window.served;
    d["displaced"] = e.window.displaced;
    d["blocked"] = e.window.blocked;
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Limited processor-sharing loss systems: closed forms and simulation";

    py::register_exception<harness::ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<harness::AdmissibilityError>(m, "AdmissibilityError", PyExc_ValueError);

    py::class_<LengthDistribution>(m, "LengthDistribution")
        .def_static("deterministic", &LengthDistribution::deterministic, py::arg("length"))
        .def_static("exponential", &LengthDistribution::exponential, py::arg("rate"))
        .def_static("zero_inflated_exponential", &LengthDistribution::zero_inflated_exponential, py::arg("alpha"),
                    py::arg("rate"))
        .def_static("hyperexponential_balanced", &LengthDistribution::hyperexponential_balanced, py::arg("mean"),
                    py::arg("scv"))
        .def("mean", &LengthDistribution::mean)
        .def("scv", &LengthDistribution::scv)
        .def("lst", &LengthDistribution::lst, py::arg("s"))
        .def("__repr__", &LengthDistribution::describe);

    m.def("srl_nserver_probs",
          [](std::size_t n, double lam, double b) { return analytic::srl_nserver_probs(n, lam, b).p; },
          py::arg("n"), py::arg("lam"), py::arg("b"));
    m.def(
        "theorem2_probs",
        [](std::size_t n, const RateArg& lam, double b, const ProfileArg& profile) {
            return analytic::theorem2_probs(n, make_rates(n, lam), b, make_profile(n, profile)).p;
        },
        py::arg("n"), py::arg("lam"), py::arg("b"), py::arg("profile") = std::string("egalitarian"));
    m.def(
        "unlimited_ps_probs",
        [](std::size_t n, const RateArg& lam, double b, const ProfileArg& profile, std::size_t i) {
            return analytic::unlimited_ps_probs(make_rates(n, lam), b, make_profile(n, profile), i);
        },
        py::arg("n"), py::arg("lam"), py::arg("b"), py::arg("profile"), py::arg("i"));
    m.def("corollary2_loss", &analytic::corollary2_loss, py::arg("n"), py::arg("lam"), py::arg("b"));
    m.def("fcfd_constant_loss", &analytic::fcfd_constant_loss, py::arg("n"), py::arg("lam"), py::arg("b"));
    m.def(
        "theorem5_probs",
        [](std::size_t n, const RateArg& lam, double alpha, double mu, const ProfileArg& profile) {
            return analytic::theorem5_probs(n, make_rates(n, lam), alpha, mu, make_profile(n, profile)).p;
        },
        py::arg("n"), py::arg("lam"), py::arg("alpha"), py::arg("mu"), py::arg("profile") = std::string("egalitarian"));
    m.def("rho_n_from_lst", &analytic::rho_n_from_lst, py::arg("dist"), py::arg("lam_n"), py::arg("n"),
          py::arg("c_n"));
    m.def("erlang_b", &analytic::erlang_b, py::arg("n"), py::arg("rho"));
    m.def(
        "little_sojourn",
        [](std::vector<double> p, double lam) {
            const auto s = analytic::little_sojourn(analytic::StateDistribution{std::move(p)}, lam);
            return py::make_tuple(s.mean_jobs, s.mean_time);
        },
        py::arg("p"), py::arg("lam"));

    m.def(
        "evaluate",
        [](const std::string& config_json) {
            const auto s = harness::parse_scenario_text(config_json);
            py::list out;
            for (auto f : s.formulas) {
                const auto r = harness::evaluate(f, s);
                py::dict d;
                d["formula"] = harness::to_string(f);
                d["p"] = r.dist.p;
                d["loss"] = r.loss;
                d["arrival_loss"] = r.arrival_loss;
                d["mean_jobs"] = r.mean_jobs;
                d["sojourn"] = r.sojourn;
                out.append(d);
            }
            return out;
        },
        py::arg("config_json"));
    m.def(
        "simulate",
        [](const std::string& config_json) {
            const auto s = harness::parse_scenario_text(config_json);
            sim::SimEstimates e;
            {
                py::gil_scoped_release release;
                e = harness::simulate(s);
            }
            return estimates_dict(e);
        },
        py::arg("config_json"));
    m.def(
        "couple",
        [](const std::string& config_json) {
            const auto s = harness::parse_scenario_text(config_json);
            sim::CouplingReport r;
            {
                py::gil_scoped_release release;
                r = harness::couple(s);
            }
            py::dict d;
            d["ok"] = r.ok();
            d["arrivals"] = r.arrivals;
            d["events"] = r.events;
            d["level_violations"] = r.level_violations;
            d["multiset_violations"] = r.multiset_violations;
            d["occupancy_limited"] = r.occupancy_limited;
            d["occupancy_unlimited_folded"] = r.unlimited_folded(s.spec.n);
            return d;
        },
        py::arg("config_json"));
    m.def("table1", [] {
        py::list out;
        for (const auto& rec : harness::table1_records(harness::table1())) {
            py::dict d;
            d["row"] = rec.row;
            d["n"] = rec.n;
            d["lambda"] = rec.lambda;
            d["col"] = rec.col;
            d["computed"] = rec.computed;
            d["paper"] = rec.paper;
            d["abs_dev"] = rec.abs_dev;
            d["flag"] = rec.flag;
            out.append(d);
        }
        return out;
    });
}
