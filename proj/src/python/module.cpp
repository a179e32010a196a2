#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>

#include "resopt/errors.hpp"
#include "resopt/mechanism_sim.hpp"
#include "resopt/multiperiod.hpp"
#include "resopt/pricing.hpp"
#include "resopt/seller_opt.hpp"

namespace py = pybind11;
using namespace pybind11::literals;

namespace {

resopt::sim::Strategy make_strategy(const std::string& name, std::optional<double> fixed_report,
                                     double grid_step) {
    if (name == "truthful") {
        return resopt::sim::Truthful{};
    }
    if (name == "fixed_report") {
        if (!fixed_report) {
            throw resopt::ValidationError("fixed_report strategy needs the fixed_report= value");
        }
        return resopt::sim::FixedReport{*fixed_report};
    }
    if (name == "grid_optimizer") {
        return resopt::sim::GridOptimizer{grid_step};
    }
    throw resopt::ValidationError("strategy must be truthful, fixed_report or grid_optimizer");
}

resopt::sim::CostModel make_cost_model(const std::string& name) {
    if (name == "forfeit") {
        return resopt::sim::CostModel::forfeit;
    }
    if (name == "resale") {
        return resopt::sim::CostModel::resale;
    }
    throw resopt::ValidationError("cost_model must be forfeit or resale");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Truth-telling reservation options: pricing, contracts, simulation, revenue";
    m.attr("__version__") = "0.1.0";

    py::register_exception<resopt::ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<resopt::DomainError>(m, "DomainError", PyExc_ValueError);

    // ---- pricing ----
    py::class_<resopt::pricing::PricingParams>(m, "PricingParams")
        .def(py::init(&resopt::pricing::validate_params), "C"_a, "k"_a)
        .def_readonly("C", &resopt::pricing::PricingParams::spot_ratio)
        .def_readonly("k", &resopt::pricing::PricingParams::curvature)
        .def("__repr__", [](const resopt::pricing::PricingParams& p) {
            return "PricingParams(C=" + std::to_string(p.spot_ratio) +
                   ", k=" + std::to_string(p.curvature) + ")";
        });

    py::class_<resopt::pricing::Quote>(m, "Quote")
        .def_readonly("p", &resopt::pricing::Quote::submitted_probability)
        .def_readonly("pay_if_use", &resopt::pricing::Quote::pay_if_use)
        .def_readonly("pay_if_not", &resopt::pricing::Quote::pay_if_not)
        .def_readonly("premium", &resopt::pricing::Quote::premium)
        .def_readonly("strike", &resopt::pricing::Quote::strike);

    m.def("validate_params", &resopt::pricing::validate_params, "C"_a, "k"_a,
          "Check a (C, k) pair against the validity window.");
    m.def("pay_if_use", &resopt::pricing::pay_if_use, "params"_a, "p"_a,
          "Payment when the unit is used: 1 + (k/2)(1-p)^2.");
    m.def("pay_if_not", &resopt::pricing::pay_if_not, "params"_a, "p"_a,
          "Payment when the unit is not used: (k/2) p^2.");
    m.def("expected_payment", &resopt::pricing::expected_payment, "params"_a, "p"_a,
          "Expected payment of a truthful user.");
    m.def("baseline_cost", &resopt::pricing::baseline_cost, "C"_a, "p"_a,
          "Best expected cost without the coordinator: min(1, C p).");
    m.def("quote", &resopt::pricing::quote, "params"_a, "p"_a);
    m.def("infer_probability", &resopt::pricing::infer_probability, "params"_a, "premium"_a);
    m.def("price_premium_curve", &resopt::pricing::price_premium_curve, "params"_a, "n_points"_a);
    m.def("optimal_submission", &resopt::pricing::optimal_submission, "params"_a, "p"_a,
          "grid_step"_a = 1e-3);
    m.def("decompose_units", &resopt::pricing::decompose_units, "distribution"_a,
          "Tail probabilities P(demand >= j) for a unit-count distribution.");
    m.def(
        "uniform_time_bundle",
        [](const resopt::pricing::PricingParams& params, std::size_t m_days) {
            const auto bundle = resopt::pricing::uniform_time_bundle(params, m_days);
            return py::make_tuple(bundle.per_day_probability, bundle.total_expected_cost);
        },
        "params"_a, "m_days"_a, "Returns (per_day_probability, total_expected_cost).");

    // ---- multi-period contracts ----
    py::class_<resopt::multiperiod::ThreePeriodParams>(m, "ThreePeriodParams")
        .def(py::init(&resopt::multiperiod::validate_three_period_params), "C"_a, "k"_a,
             "alpha"_a)
        .def_readonly("C", &resopt::multiperiod::ThreePeriodParams::spot_ratio)
        .def_readonly("k", &resopt::multiperiod::ThreePeriodParams::curvature)
        .def_readonly("alpha", &resopt::multiperiod::ThreePeriodParams::friction)
        .def_property_readonly("delta", &resopt::multiperiod::ThreePeriodParams::delta);

    py::class_<resopt::multiperiod::InfoStructure>(m, "InfoStructure")
        .def(py::init(&resopt::multiperiod::validate_info), "p1"_a, "p21"_a, "p22"_a)
        .def_readonly("p1", &resopt::multiperiod::InfoStructure::p1)
        .def_readonly("p21", &resopt::multiperiod::InfoStructure::p21)
        .def_readonly("p22", &resopt::multiperiod::InfoStructure::p22)
        .def_property_readonly("prior", &resopt::multiperiod::InfoStructure::prior);

    m.def(
        "payment_first_only",
        [](const resopt::multiperiod::ThreePeriodParams& params, double q1, bool uses) {
            return resopt::multiperiod::payment(params, resopt::multiperiod::FirstOnly{q1}, uses);
        },
        "params"_a, "q1"_a, "uses"_a);
    m.def(
        "payment_second_only",
        [](const resopt::multiperiod::ThreePeriodParams& params, double q2, bool uses) {
            return resopt::multiperiod::payment(params, resopt::multiperiod::SecondOnly{q2}, uses);
        },
        "params"_a, "q2"_a, "uses"_a);
    m.def(
        "payment_both",
        [](const resopt::multiperiod::ThreePeriodParams& params, double q1, double q2, bool uses) {
            return resopt::multiperiod::payment(params, resopt::multiperiod::Both{q1, q2}, uses);
        },
        "params"_a, "q1"_a, "q2"_a, "uses"_a);
    m.def("adjustment_fee", &resopt::multiperiod::adjustment_fee, "params"_a, "q1"_a, "q2"_a,
          "p2"_a);
    m.def("expected_cost_both", &resopt::multiperiod::expected_cost_both, "params"_a, "info"_a,
          "q1"_a);
    m.def("expected_cost_second_only", &resopt::multiperiod::expected_cost_second_only,
          "params"_a, "info"_a);
    m.def("option_form_payment", &resopt::multiperiod::option_form_payment, "params"_a, "q1"_a,
          "q2"_a, "uses"_a);
    m.def("mperiod_weights", &resopt::multiperiod::mperiod_weights, "beta"_a, "m"_a);
    m.def(
        "mperiod_execute",
        [](const resopt::pricing::PricingParams& params, double beta, std::size_t periods,
           std::vector<double> submissions, bool uses) {
            const auto contract = resopt::multiperiod::validate_mperiod_contract(
                beta, periods, std::move(submissions));
            return resopt::multiperiod::mperiod_execute(params, contract, uses);
        },
        "params"_a, "beta"_a, "m"_a, "submissions"_a, "uses"_a);

    // ---- simulation ----
    py::class_<resopt::sim::ReplicationRecord>(m, "ReplicationRecord")
        .def_readonly("replication", &resopt::sim::ReplicationRecord::replication)
        .def_readonly("usage", &resopt::sim::ReplicationRecord::usage)
        .def_readonly("payments", &resopt::sim::ReplicationRecord::payments)
        .def_readonly("reservation_cost", &resopt::sim::ReplicationRecord::reservation_cost)
        .def_readonly("shortfall_cost", &resopt::sim::ReplicationRecord::shortfall_cost)
        .def_readonly("profit", &resopt::sim::ReplicationRecord::profit);

    py::class_<resopt::sim::SimResult>(m, "SimResult")
        .def_readonly("n_users", &resopt::sim::SimResult::n_users)
        .def_readonly("records", &resopt::sim::SimResult::records)
        .def_readonly("mean_profit_per_user", &resopt::sim::SimResult::mean_profit_per_user)
        .def_readonly("std_profit_per_user", &resopt::sim::SimResult::std_profit_per_user)
        .def_readonly("ci95_half_width", &resopt::sim::SimResult::ci95_half_width)
        .def_readonly("mean_payment_margin_per_user",
                      &resopt::sim::SimResult::mean_payment_margin_per_user);

    m.def(
        "simulate_two_period",
        [](const resopt::pricing::PricingParams& params, std::size_t n_users,
           std::size_t replications, std::uint64_t seed, double p_lo, double p_hi,
           const std::string& strategy, std::optional<double> fixed_report, double grid_step) {
            resopt::sim::SimConfig config;
            config.mechanism = params;
            config.population = resopt::sim::UniformP{p_lo, p_hi};
            config.n_users = n_users;
            config.replications = replications;
            config.seed = seed;
            config.strategy = make_strategy(strategy, fixed_report, grid_step);
            return resopt::sim::run_two_period(config);
        },
        "params"_a, "n_users"_a, "replications"_a = 1, "seed"_a = 0, "p_lo"_a = 0.0,
        "p_hi"_a = 1.0, "strategy"_a = "truthful", "fixed_report"_a = py::none(),
        "grid_step"_a = 1e-3,
        "Two-period coordinator game over a uniform(p_lo, p_hi) population.");

    m.def(
        "simulate_two_period_users",
        [](const resopt::pricing::PricingParams& params,
           const std::vector<std::pair<double, std::optional<double>>>& users,
           std::size_t n_users, std::size_t replications, std::uint64_t seed,
           const std::string& strategy, std::optional<double> fixed_report, double grid_step) {
            resopt::sim::SimConfig config;
            config.mechanism = params;
            std::vector<resopt::sim::TwoPeriodUser> list;
            list.reserve(users.size());
            for (const auto& [p, v] : users) {
                list.push_back(resopt::sim::TwoPeriodUser{p, v});
            }
            config.population = std::move(list);
            config.n_users = n_users;
            config.replications = replications;
            config.seed = seed;
            config.strategy = make_strategy(strategy, fixed_report, grid_step);
            return resopt::sim::run_two_period(config);
        },
        "params"_a, "users"_a, "n_users"_a, "replications"_a = 1, "seed"_a = 0,
        "strategy"_a = "truthful", "fixed_report"_a = py::none(), "grid_step"_a = 1e-3,
        "Two-period game over an explicit (p, value) list, cycled to n_users.");

    m.def(
        "simulate_three_period",
        [](const resopt::multiperiod::ThreePeriodParams& params,
           const std::vector<resopt::multiperiod::InfoStructure>& infos, std::size_t n_users,
           std::size_t replications, std::uint64_t seed, const std::string& cost_model,
           const std::string& strategy, std::optional<double> fixed_report, double grid_step) {
            resopt::sim::SimConfig config;
            config.mechanism = params;
            std::vector<resopt::sim::ThreePeriodUser> list;
            list.reserve(infos.size());
            for (const auto& info : infos) {
                list.push_back(resopt::sim::ThreePeriodUser{info, std::nullopt});
            }
            config.population = std::move(list);
            config.n_users = n_users;
            config.replications = replications;
            config.seed = seed;
            config.cost_model = make_cost_model(cost_model);
            config.strategy = make_strategy(strategy, fixed_report, grid_step);
            return resopt::sim::run_three_period(config);
        },
        "params"_a, "infos"_a, "n_users"_a, "replications"_a = 1, "seed"_a = 0,
        "cost_model"_a = "forfeit", "strategy"_a = "truthful", "fixed_report"_a = py::none(),
        "grid_step"_a = 1e-3,
        "Three-period game over a list of belief trees, cycled to n_users.");

    py::class_<resopt::sim::TruthAuditRow>(m, "TruthAuditRow")
        .def_readonly("true_probability", &resopt::sim::TruthAuditRow::true_probability)
        .def_readonly("best_report", &resopt::sim::TruthAuditRow::best_report)
        .def_readonly("misreport_gain", &resopt::sim::TruthAuditRow::misreport_gain)
        .def_readonly("passed", &resopt::sim::TruthAuditRow::pass);

    py::class_<resopt::sim::TruthAuditResult>(m, "TruthAuditResult")
        .def_readonly("rows", &resopt::sim::TruthAuditResult::rows)
        .def_readonly("passed", &resopt::sim::TruthAuditResult::pass);

    m.def(
        "truth_audit",
        [](const resopt::pricing::PricingParams& params, const std::vector<double>& p_grid,
           double q_grid_step) { return resopt::sim::truth_audit(params, p_grid, q_grid_step); },
        "params"_a, "p_grid"_a, "q_grid_step"_a = 1e-3);

    py::class_<resopt::sim::LemmaAuditRow>(m, "LemmaAuditRow")
        .def_readonly("property", &resopt::sim::LemmaAuditRow::property)
        .def_readonly("samples", &resopt::sim::LemmaAuditRow::samples)
        .def_readonly("violations", &resopt::sim::LemmaAuditRow::violations)
        .def_readonly("worst_margin", &resopt::sim::LemmaAuditRow::worst_margin)
        .def_readonly("passed", &resopt::sim::LemmaAuditRow::pass);

    py::class_<resopt::sim::LemmaAuditResult>(m, "LemmaAuditResult")
        .def_readonly("rows", &resopt::sim::LemmaAuditResult::rows)
        .def_readonly("passed", &resopt::sim::LemmaAuditResult::pass);

    m.def("lemma_audit", &resopt::sim::lemma_audit, "C"_a, "k"_a, "alpha"_a = py::none(),
          "samples"_a = 2000, "grid_step"_a = 1e-3, "seed"_a = 0);

    py::class_<resopt::sim::ConvergenceRow>(m, "ConvergenceRow")
        .def_readonly("n_users", &resopt::sim::ConvergenceRow::n_users)
        .def_readonly("mean_profit", &resopt::sim::ConvergenceRow::mean_profit)
        .def_readonly("mean_payment_margin_per_user",
                      &resopt::sim::ConvergenceRow::mean_payment_margin_per_user)
        .def_readonly("fraction_profitable", &resopt::sim::ConvergenceRow::fraction_profitable);

    m.def(
        "profit_convergence",
        [](const resopt::pricing::PricingParams& params, const std::vector<std::size_t>& n_list,
           std::size_t replications, std::uint64_t seed) {
            return resopt::sim::profit_convergence(params, n_list, replications, seed);
        },
        "params"_a, "n_list"_a, "replications"_a = 100, "seed"_a = 0);

    // ---- seller revenue ----
    py::class_<resopt::seller::UniformRect>(m, "UniformRect")
        .def(py::init<double, double>(), "lo"_a, "hi"_a)
        .def_readonly("lo", &resopt::seller::UniformRect::lo)
        .def_readonly("hi", &resopt::seller::UniformRect::hi);

    py::class_<resopt::seller::TabulatedP>(m, "TabulatedP")
        .def(py::init<std::vector<double>, std::vector<double>>(), "probability"_a, "weight"_a)
        .def_readonly("probability", &resopt::seller::TabulatedP::probability)
        .def_readonly("weight", &resopt::seller::TabulatedP::weight);

    m.def(
        "revenue_direct",
        [](double c1, double c2, const resopt::seller::PopulationDensity& density) {
            return resopt::seller::revenue_direct(resopt::seller::DirectPricing{c1, c2}, density);
        },
        "C1"_a, "C2"_a, "density"_a);
    m.def(
        "revenue_options",
        [](double c1, double k, const resopt::seller::PopulationDensity& density) {
            return resopt::seller::revenue_options(resopt::seller::OptionPricing{c1, k}, density);
        },
        "C1"_a, "k"_a, "density"_a);
    m.def(
        "optimize_direct",
        [](const resopt::seller::PopulationDensity& density) {
            const auto best = resopt::seller::optimize_direct(density);
            return py::make_tuple(best.pricing.reservation_price, best.pricing.spot_price,
                                  best.revenue);
        },
        "density"_a, "Returns (C1, C2, R).");
    m.def(
        "optimize_options",
        [](const resopt::seller::PopulationDensity& density) {
            const auto best = resopt::seller::optimize_options(density);
            return py::make_tuple(best.pricing.price_scale, best.pricing.curvature, best.revenue);
        },
        "density"_a, "Returns (C1, k, R).");
    m.def(
        "compare_table",
        [](const std::vector<std::pair<double, double>>& intervals) {
            py::list out;
            for (const auto& row : resopt::seller::compare_table(intervals)) {
                if (row.error) {
                    throw resopt::ValidationError(*row.error);
                }
                out.append(py::make_tuple(row.lo, row.hi, row.direct_revenue, row.option_revenue,
                                          row.winner));
            }
            return out;
        },
        "intervals"_a, "Rows of (a, b, direct_revenue, option_revenue, winner).");
}
