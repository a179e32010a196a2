// resopt: truth-telling reservation options -- quotes, curve export,
// Monte Carlo simulation, incentive audits, and seller revenue optimization.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "resopt/errors.hpp"
#include "resopt/mechanism_sim.hpp"
#include "resopt/multiperiod.hpp"
#include "resopt/pricing.hpp"
#include "resopt/rng.hpp"
#include "resopt/scenario.hpp"
#include "resopt/seller_opt.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitAuditFailure = 2;
constexpr int kExitIo = 3;

// Fixed-significant-digit formatting: 12 digits in CSV files, 4 in human
// summaries.  Negative zero is normalized so reruns are byte-identical.
std::string fmt(double x, int significant) {
    if (x == 0.0) {
        x = 0.0;
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", significant, x);
    return buf;
}

std::string fmt_csv(double x) { return fmt(x, 12); }
std::string fmt_human(double x) { return fmt(x, 4); }

// Exact round-trip formatting for user dumps, so re-ingesting a dumped
// population reproduces the same simulation bit for bit.
std::string fmt_exact(double x) {
    if (x == 0.0) {
        x = 0.0;
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw resopt::IoError("cannot open output file: " + path.string());
    }
    out << content;
    if (!out) {
        throw resopt::IoError("failed writing output file: " + path.string());
    }
}

int cmd_quote(double C, double k, std::optional<double> p, std::optional<double> premium) {
    const auto params = resopt::pricing::validate_params(C, k);
    if (p.has_value() == premium.has_value()) {
        throw resopt::ValidationError("quote needs exactly one of --p or --premium");
    }
    const double probability = p ? *p : resopt::pricing::infer_probability(params, *premium);
    const auto q = resopt::pricing::quote(params, probability);
    std::cout << "p           " << fmt_human(q.submitted_probability) << "\n"
              << "pay_if_use  " << fmt_human(q.pay_if_use) << "\n"
              << "pay_if_not  " << fmt_human(q.pay_if_not) << "\n"
              << "premium     " << fmt_human(q.premium) << "\n"
              << "strike      " << fmt_human(q.strike) << "\n";
    return kExitOk;
}

int cmd_curve(double C, double k, std::size_t points, const std::string& out_path) {
    const auto params = resopt::pricing::validate_params(C, k);
    if (points < 2) {
        throw resopt::ValidationError("curve needs --points >= 2");
    }
    std::string csv = "p,premium,strike,pay_if_use,pay_if_not\n";
    for (std::size_t i = 0; i < points; ++i) {
        const double p = static_cast<double>(i) / static_cast<double>(points - 1);
        const auto q = resopt::pricing::quote(params, p);
        csv += fmt_csv(p) + "," + fmt_csv(q.premium) + "," + fmt_csv(q.strike) + "," +
               fmt_csv(q.pay_if_use) + "," + fmt_csv(q.pay_if_not) + "\n";
    }
    write_file(out_path, csv);
    return kExitOk;
}

std::string describe_strategy(const resopt::sim::Strategy& strategy) {
    if (std::holds_alternative<resopt::sim::Truthful>(strategy)) {
        return "truthful";
    }
    if (const auto* fixed = std::get_if<resopt::sim::FixedReport>(&strategy)) {
        return "fixed_report " + fmt_human(fixed->report);
    }
    return "grid_optimizer " + fmt_human(std::get<resopt::sim::GridOptimizer>(strategy).step);
}

std::string dump_users_csv(const resopt::sim::SimConfig& config) {
    std::string csv;
    if (const auto* uniform = std::get_if<resopt::sim::UniformP>(&config.population)) {
        csv = "p\n";
        for (std::size_t i = 0; i < config.n_users; ++i) {
            const double u =
                resopt::rng::unit_uniform(config.seed, 0, i, resopt::rng::Channel::population);
            csv += fmt_exact(uniform->lo + (uniform->hi - uniform->lo) * u) + "\n";
        }
        return csv;
    }
    if (const auto* users =
            std::get_if<std::vector<resopt::sim::TwoPeriodUser>>(&config.population)) {
        bool any_value = false;
        for (const auto& u : *users) {
            any_value = any_value || u.value.has_value();
        }
        csv = any_value ? "p,v\n" : "p\n";
        for (std::size_t i = 0; i < config.n_users; ++i) {
            const auto& u = (*users)[i % users->size()];
            csv += fmt_exact(u.use_probability);
            if (any_value) {
                csv += "," + fmt_exact(u.value.value_or(1.0));
            }
            csv += "\n";
        }
        return csv;
    }
    const auto& users = std::get<std::vector<resopt::sim::ThreePeriodUser>>(config.population);
    bool any_value = false;
    for (const auto& u : users) {
        any_value = any_value || u.value.has_value();
    }
    csv = any_value ? "p1,p21,p22,v\n" : "p1,p21,p22\n";
    for (std::size_t i = 0; i < config.n_users; ++i) {
        const auto& u = users[i % users.size()];
        csv += fmt_exact(u.info.p1) + "," + fmt_exact(u.info.p21) + "," + fmt_exact(u.info.p22);
        if (any_value) {
            csv += "," + fmt_exact(u.value.value_or(1.0));
        }
        csv += "\n";
    }
    return csv;
}

int cmd_simulate(const std::string& scenario_path, const std::string& out_path,
                 std::optional<std::uint64_t> seed_override, const std::string& dump_users_path) {
    auto scenario = resopt::scenario::load_scenario(scenario_path);
    if (seed_override) {
        scenario.seed = *seed_override;
    }
    const auto config = scenario.to_sim_config();
    const bool three_period =
        std::holds_alternative<resopt::multiperiod::ThreePeriodParams>(config.mechanism);
    const auto result =
        three_period ? resopt::sim::run_three_period(config) : resopt::sim::run_two_period(config);

    if (!dump_users_path.empty()) {
        write_file(dump_users_path, dump_users_csv(config));
    }
    if (!out_path.empty()) {
        std::string csv = "replication,usage,payments,reservation_cost,shortfall_cost,profit\n";
        for (const auto& rec : result.records) {
            csv += std::to_string(rec.replication) + "," + fmt_csv(rec.usage) + "," +
                   fmt_csv(rec.payments) + "," + fmt_csv(rec.reservation_cost) + "," +
                   fmt_csv(rec.shortfall_cost) + "," + fmt_csv(rec.profit) + "\n";
        }
        write_file(out_path, csv);
    }

    std::size_t profitable = 0;
    for (const auto& rec : result.records) {
        if (rec.profit > 0.0) {
            ++profitable;
        }
    }
    if (three_period) {
        const auto& params = std::get<resopt::multiperiod::ThreePeriodParams>(config.mechanism);
        std::cout << "three-period simulation  C=" << fmt_human(params.spot_ratio)
                  << " k=" << fmt_human(params.curvature)
                  << " alpha=" << fmt_human(params.friction) << "\n";
    } else {
        const auto& params = std::get<resopt::pricing::PricingParams>(config.mechanism);
        std::cout << "two-period simulation  C=" << fmt_human(params.spot_ratio)
                  << " k=" << fmt_human(params.curvature) << "\n";
    }
    std::cout << "users " << config.n_users << ", replications " << config.replications
              << ", seed " << config.seed << ", cost model "
              << (config.cost_model == resopt::sim::CostModel::forfeit ? "forfeit" : "resale")
              << ", strategy " << describe_strategy(config.strategy) << "\n"
              << "mean profit per user          " << fmt_human(result.mean_profit_per_user) << "\n"
              << "std of profit per user        " << fmt_human(result.std_profit_per_user) << "\n"
              << "95% CI half-width             " << fmt_human(result.ci95_half_width) << "\n"
              << "mean payment margin per user  " << fmt_human(result.mean_payment_margin_per_user)
              << "\n"
              << "profitable replications       " << profitable << "/" << result.records.size()
              << "\n";
    return kExitOk;
}

int cmd_audit(double C, double k, std::optional<double> alpha, std::size_t samples,
              double p_step, double q_step, std::uint64_t seed) {
    const auto params = resopt::pricing::validate_params(C, k);
    if (alpha) {
        resopt::multiperiod::validate_three_period_params(C, k, *alpha);
    }

    std::vector<double> p_grid;
    for (double p = p_step; p < 1.0 - 1e-12; p += p_step) {
        p_grid.push_back(p);
    }
    const auto truth = resopt::sim::truth_audit(params, p_grid, q_step);
    std::cout << "truth-telling audit  C=" << fmt_human(C) << " k=" << fmt_human(k)
              << " report grid step " << fmt_human(q_step) << "\n";
    for (const auto& row : truth.rows) {
        std::cout << "  " << (row.pass ? "PASS" : "FAIL") << "  p=" << fmt_human(row.true_probability)
                  << "  best report=" << fmt_human(row.best_report)
                  << "  misreport gain=" << fmt_human(row.misreport_gain) << "\n";
    }

    const auto lemmas = resopt::sim::lemma_audit(C, k, alpha, samples, q_step, seed);
    if (alpha) {
        std::cout << "adjustable-contract audit  alpha=" << fmt_human(*alpha) << ", " << samples
                  << " sampled belief trees\n";
    } else {
        std::cout << "adjustable-contract audit  alpha sampled in (0, " << fmt_human(1.0 / C)
                  << "), " << samples << " sampled belief trees\n";
    }
    for (const auto& row : lemmas.rows) {
        std::cout << "  " << (row.pass ? "PASS" : "FAIL") << "  " << row.property
                  << "  (violations " << row.violations << "/" << row.samples
                  << ", worst margin " << fmt_human(row.worst_margin) << ")\n";
    }

    const bool pass = truth.pass && lemmas.pass;
    std::cout << (pass ? "AUDIT PASS" : "AUDIT FAIL") << "\n";
    return pass ? kExitOk : kExitAuditFailure;
}

resopt::seller::PopulationDensity parse_density(const std::vector<double>& uniform_p,
                                                const std::string& tabulated_path) {
    if (!uniform_p.empty() && !tabulated_path.empty()) {
        throw resopt::ValidationError("give either --uniform-p or --tabulated, not both");
    }
    if (!uniform_p.empty()) {
        const resopt::seller::PopulationDensity density =
            resopt::seller::UniformRect{uniform_p[0], uniform_p[1]};
        resopt::seller::validate_density(density);
        return density;
    }
    if (tabulated_path.empty()) {
        throw resopt::ValidationError("a density is required: --uniform-p a b or --tabulated file");
    }
    std::ifstream in(tabulated_path);
    if (!in) {
        throw resopt::IoError("cannot open density file: " + tabulated_path);
    }
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw resopt::ValidationError("density file is not valid JSON: " + std::string(e.what()));
    }
    if (!doc.is_object() || !doc.contains("p") || !doc.contains("w") || doc.size() != 2 ||
        !doc["p"].is_array() || !doc["w"].is_array()) {
        throw resopt::ValidationError("density file must be {\"p\": [...], \"w\": [...]}");
    }
    resopt::seller::TabulatedP tab;
    tab.probability = doc["p"].get<std::vector<double>>();
    tab.weight = doc["w"].get<std::vector<double>>();
    const resopt::seller::PopulationDensity density = tab;
    resopt::seller::validate_density(density);
    return density;
}

int cmd_optimize(const std::string& scheme, const std::vector<double>& uniform_p,
                 const std::string& tabulated_path, const std::string& grid_out) {
    const auto density = parse_density(uniform_p, tabulated_path);
    std::vector<resopt::seller::GridPoint> grid;
    std::vector<resopt::seller::GridPoint>* grid_ptr = grid_out.empty() ? nullptr : &grid;

    std::string csv_header;
    if (scheme == "direct") {
        const auto best = resopt::seller::optimize_direct(density, grid_ptr);
        std::cout << "scheme  direct\n"
                  << "C1      " << fmt_human(best.pricing.reservation_price) << "\n"
                  << "C2      " << fmt_human(best.pricing.spot_price) << "\n"
                  << "R       " << fmt_human(best.revenue) << "\n";
        csv_header = "C1,C2,revenue\n";
    } else if (scheme == "options") {
        const auto best = resopt::seller::optimize_options(density, grid_ptr);
        std::cout << "scheme  options\n"
                  << "C1      " << fmt_human(best.pricing.price_scale) << "\n"
                  << "k       " << fmt_human(best.pricing.curvature) << "\n"
                  << "R       " << fmt_human(best.revenue) << "\n";
        csv_header = "C1,k,revenue\n";
    } else {
        throw resopt::ValidationError("--scheme must be direct or options");
    }

    if (!grid_out.empty()) {
        std::string csv = csv_header;
        for (const auto& point : grid) {
            csv += fmt_csv(point.x1) + "," + fmt_csv(point.x2) + "," + fmt_csv(point.revenue) +
                   "\n";
        }
        write_file(grid_out, csv);
    }
    return kExitOk;
}

std::vector<std::pair<double, double>> read_intervals(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw resopt::IoError("cannot open intervals file: " + path);
    }
    std::vector<std::pair<double, double>> intervals;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        std::stringstream ss(line);
        double a = 0.0;
        double b = 0.0;
        char comma = 0;
        if (!(ss >> a >> comma >> b) || comma != ',' || (ss >> std::ws, !ss.eof())) {
            throw resopt::ValidationError("intervals file row " + std::to_string(line_no) +
                                          ": expected 'a,b', got '" + line + "'");
        }
        if (!(a >= 0.0 && a <= b && b <= 1.0)) {
            throw resopt::ValidationError("intervals file row " + std::to_string(line_no) +
                                          ": need 0 <= a <= b <= 1, got a=" + fmt_human(a) +
                                          " b=" + fmt_human(b));
        }
        intervals.emplace_back(a, b);
    }
    return intervals;
}

int cmd_compare(const std::string& intervals_path, const std::string& out_path) {
    const auto intervals = read_intervals(intervals_path);
    const auto rows = resopt::seller::compare_table(intervals);
    std::string csv = "a,b,direct_revenue,option_revenue,winner\n";
    for (const auto& row : rows) {
        csv += fmt_csv(row.lo) + "," + fmt_csv(row.hi) + "," + fmt_csv(row.direct_revenue) + "," +
               fmt_csv(row.option_revenue) + "," + row.winner + "\n";
    }
    if (out_path.empty()) {
        std::cout << csv;
    } else {
        write_file(out_path, csv);
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"truth-telling reservation options: pricing, simulation, audits, optimization"};
    app.require_subcommand(1);

    // quote
    auto* quote = app.add_subcommand("quote", "price a single contract");
    double quote_c = 0.0;
    double quote_k = 0.0;
    std::optional<double> quote_p;
    std::optional<double> quote_premium;
    quote->add_option("--C", quote_c, "spot-to-discount price ratio")->required();
    quote->add_option("--k", quote_k, "curvature of the payment schedule")->required();
    quote->add_option("--p", quote_p, "submitted use probability");
    quote->add_option("--premium", quote_premium, "premium to invert into a probability");

    // curve
    auto* curve = app.add_subcommand("curve", "export the price-premium curve as CSV");
    double curve_c = 0.0;
    double curve_k = 0.0;
    std::size_t curve_points = 0;
    std::string curve_out;
    curve->add_option("--C", curve_c, "spot-to-discount price ratio")->required();
    curve->add_option("--k", curve_k, "curvature of the payment schedule")->required();
    curve->add_option("--points", curve_points, "number of samples (>= 2)")->required();
    curve->add_option("--out", curve_out, "output CSV path")->required();

    // simulate
    auto* simulate = app.add_subcommand("simulate", "run a coordinator-game scenario");
    std::string sim_scenario;
    std::string sim_out;
    std::string sim_dump_users;
    std::optional<std::uint64_t> sim_seed;
    simulate->add_option("--scenario", sim_scenario, "scenario JSON document")->required();
    simulate->add_option("--out", sim_out, "per-replication CSV path");
    simulate->add_option("--seed", sim_seed, "override the scenario seed");
    simulate->add_option("--dump-users", sim_dump_users,
                         "write the replication-0 population as a user-list CSV");

    // audit
    auto* audit = app.add_subcommand("audit", "truth-telling and contract-property audit");
    double audit_c = 0.0;
    double audit_k = 0.0;
    std::optional<double> audit_alpha;
    std::size_t audit_samples = 2000;
    double audit_p_step = 0.05;
    double audit_q_step = 1e-3;
    std::uint64_t audit_seed = 0;
    audit->add_option("--C", audit_c, "spot-to-discount price ratio")->required();
    audit->add_option("--k", audit_k, "curvature of the payment schedule")->required();
    audit->add_option("--alpha", audit_alpha, "period-2 swap friction (pins the audited value)");
    audit->add_option("--samples", audit_samples, "number of sampled belief trees");
    audit->add_option("--p-step", audit_p_step, "true-probability grid step");
    audit->add_option("--q-step", audit_q_step, "report grid step");
    audit->add_option("--seed", audit_seed, "sampling seed");

    // optimize
    auto* optimize = app.add_subcommand("optimize", "maximize seller revenue");
    std::string opt_scheme;
    std::vector<double> opt_uniform_p;
    std::string opt_tabulated;
    std::string opt_grid_out;
    optimize->add_option("--scheme", opt_scheme, "direct or options")->required();
    optimize->add_option("--uniform-p", opt_uniform_p, "probability interval a b")
        ->expected(2);
    optimize->add_option("--tabulated", opt_tabulated, "tabulated density JSON file");
    optimize->add_option("--grid-out", opt_grid_out, "write the evaluation grid as CSV");

    // compare
    auto* compare = app.add_subcommand("compare", "direct vs option revenue per interval");
    std::string cmp_intervals;
    std::string cmp_out;
    compare->add_option("--intervals", cmp_intervals, "CSV of a,b rows")->required();
    compare->add_option("--out", cmp_out, "output CSV path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (quote->parsed()) {
            return cmd_quote(quote_c, quote_k, quote_p, quote_premium);
        }
        if (curve->parsed()) {
            return cmd_curve(curve_c, curve_k, curve_points, curve_out);
        }
        if (simulate->parsed()) {
            return cmd_simulate(sim_scenario, sim_out, sim_seed, sim_dump_users);
        }
        if (audit->parsed()) {
            return cmd_audit(audit_c, audit_k, audit_alpha, audit_samples, audit_p_step,
                             audit_q_step, audit_seed);
        }
        if (optimize->parsed()) {
            return cmd_optimize(opt_scheme, opt_uniform_p, opt_tabulated, opt_grid_out);
        }
        if (compare->parsed()) {
            return cmd_compare(cmp_intervals, cmp_out);
        }
    } catch (const resopt::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const resopt::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitValidation;
}
