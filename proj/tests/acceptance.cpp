// Acceptance suite: runs every release criterion at its stated tolerance and
// prints one PASS/FAIL line per criterion.  Exits non-zero if any fail.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "resopt/mechanism_sim.hpp"
#include "resopt/multiperiod.hpp"
#include "resopt/pricing.hpp"
#include "resopt/rng.hpp"
#include "resopt/seller_opt.hpp"

using namespace resopt;

namespace {

int g_criterion = 0;
int g_failures = 0;

void report(const std::string& name, bool pass, double seconds, const std::string& detail) {
    ++g_criterion;
    if (!pass) {
        ++g_failures;
    }
    std::printf("[%2d] %s  %s (%s; %.2fs)\n", g_criterion, pass ? "PASS" : "FAIL", name.c_str(),
                detail.c_str(), seconds);
}

void run(const std::string& name, double time_budget_s,
         const std::function<bool(std::string&)>& body) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool pass = false;
    try {
        pass = body(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    const double seconds = std::chrono::duration<double>(
        std::chrono::steady_clock::now() - start).count();
    if (time_budget_s > 0.0 && seconds >= time_budget_s) {
        pass = false;
        detail += "; exceeded " + std::to_string(time_budget_s) + "s budget";
    }
    report(name, pass, seconds, detail);
}

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", x);
    return buf;
}

double uniform_draw(std::uint64_t seed, std::uint64_t i, std::uint64_t slot) {
    return rng::unit_uniform(seed, i, slot, rng::Channel::population);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_command(const std::string& cmd) {
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

int main(int argc, char** argv) {
    const std::string cli_path = argc > 1 ? argv[1] : "";
    constexpr double kFiveTwentyFourths = 5.0 / 24.0;

    run("direct-selling optimum on uniform(0,1)", 5.0, [&](std::string& detail) {
        const auto best = seller::optimize_direct(seller::UniformRect{0.0, 1.0});
        detail = "C1=" + fmt(best.pricing.reservation_price) +
                 " C2=" + fmt(best.pricing.spot_price) + " R=" + fmt(best.revenue);
        return std::abs(best.revenue - kFiveTwentyFourths) <= 1e-4 &&
               std::abs(best.pricing.reservation_price - 0.5) <= 0.01 &&
               std::abs(best.pricing.spot_price - 1.0) <= 0.01;
    });

    run("option-selling optimum on uniform(0,1)", 5.0, [&](std::string& detail) {
        const auto best = seller::optimize_options(seller::UniformRect{0.0, 1.0});
        detail = "C1=" + fmt(best.pricing.price_scale) + " k=" + fmt(best.pricing.curvature) +
                 " R=" + fmt(best.revenue);
        return std::abs(best.revenue - kFiveTwentyFourths) <= 1e-4 &&
               std::abs(best.pricing.price_scale - 0.625) <= 0.01 &&
               std::abs(best.pricing.curvature - 2.0) <= 0.01;
    });

    run("nine-interval revenue table within 0.002", 60.0, [&](std::string& detail) {
        const double third = 1.0 / 3.0;
        const std::vector<std::pair<double, double>> intervals{
            {0.0, 1.0},  {0.0, 0.5},       {0.5, 1.0},
            {0.0, third}, {third, 2 * third}, {2 * third, 1.0},
            {0.0, 0.2},  {0.4, 0.6},       {0.8, 1.0}};
        const double printed[9][2] = {{0.208, 0.208}, {0.167, 0.197}, {0.250, 0.248},
                                      {0.130, 0.183}, {0.245, 0.246}, {0.250, 0.250},
                                      {0.087, 0.141}, {0.248, 0.249}, {0.250, 0.250}};
        const auto rows = seller::compare_table(intervals);
        double worst = 0.0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].error) {
                detail = "row " + std::to_string(i) + " errored";
                return false;
            }
            worst = std::max(worst, std::abs(rows[i].direct_revenue - printed[i][0]));
            worst = std::max(worst, std::abs(rows[i].option_revenue - printed[i][1]));
        }
        detail = "worst deviation " + fmt(worst);
        return worst <= 0.002;
    });

    run("two-period truth-telling with quadratic misreport penalty", 0.0,
        [&](std::string& detail) {
            const std::vector<pricing::PricingParams> param_sets{
                pricing::validate_params(2.0, 1.5), pricing::validate_params(2.0, 1.0),
                pricing::validate_params(5.0, 2.0)};
            double worst_report = 0.0;
            double worst_penalty = 0.0;
            for (const auto& params : param_sets) {
                for (int i = 1; i <= 19; ++i) {
                    const double p = i * 0.05;
                    const double report = pricing::optimal_submission(params, p, 1e-3);
                    worst_report = std::max(worst_report, std::abs(report - p));
                    const double truthful = p * pricing::pay_if_use(params, p) +
                                            (1.0 - p) * pricing::pay_if_not(params, p);
                    for (int j = 0; j <= 1000; ++j) {
                        const double q = j / 1000.0;
                        const double cost = p * pricing::pay_if_use(params, q) +
                                            (1.0 - p) * pricing::pay_if_not(params, q);
                        const double predicted =
                            0.5 * params.curvature * (q - p) * (q - p);
                        worst_penalty =
                            std::max(worst_penalty, std::abs(cost - truthful - predicted));
                    }
                }
            }
            detail = "worst |report-p| " + fmt(worst_report) + ", worst penalty error " +
                     fmt(worst_penalty);
            return worst_report <= 1e-3 && worst_penalty <= 1e-9;
        });

    run("payment-schedule bounds for 100 random parameter pairs", 0.0,
        [&](std::string& detail) {
            std::size_t violations = 0;
            for (int trial = 0; trial < 100; ++trial) {
                const double c = 1.5 + 3.5 * uniform_draw(42, trial, 0);
                const double k_max = std::min(2.0 * (c - 1.0), 2.0);
                const double k = 1.0 + (k_max - 1.0) * uniform_draw(42, trial, 1);
                const auto params = pricing::validate_params(c, k);
                if (pricing::pay_if_use(params, 1.0) != 1.0 ||
                    pricing::pay_if_not(params, 0.0) != 0.0) {
                    ++violations;
                }
                const double h = 1e-6;
                double prev_f = pricing::pay_if_use(params, 0.0);
                for (int i = 1; i <= 1000; ++i) {
                    const double p = i / 1000.0;
                    const double f = pricing::pay_if_use(params, p);
                    const double g = pricing::pay_if_not(params, p);
                    const double w = pricing::expected_payment(params, p);
                    if (!(f < prev_f) || !(f >= g) || !(w >= p) ||
                        !(w <= std::min(1.0, c * p))) {
                        ++violations;
                    }
                    if (i < 1000) {  // first-order condition at interior points
                        const double df = (pricing::pay_if_use(params, p + h) -
                                           pricing::pay_if_use(params, p - h)) / (2.0 * h);
                        const double dg = (pricing::pay_if_not(params, p + h) -
                                           pricing::pay_if_not(params, p - h)) / (2.0 * h);
                        if (std::abs(p * df + (1.0 - p) * dg) > 1e-6) {
                            ++violations;
                        }
                    }
                    prev_f = f;
                }
            }
            detail = std::to_string(violations) + " violations";
            return violations == 0;
        });

    run("30-day bundle costs 2 - 1/30 exactly", 0.0, [&](std::string& detail) {
        const auto params = pricing::validate_params(3.0, 2.0);
        const auto bundle = pricing::uniform_time_bundle(params, 30);
        const double err = std::abs(bundle.total_expected_cost - (2.0 - 1.0 / 30.0));
        detail = "error " + fmt(err);
        return err <= 1e-12;
    });

    run("three-period incentive sweep, 10^4 sampled belief trees", 120.0,
        [&](std::string& detail) {
            std::size_t violations = 0;
            std::size_t rows = 0;
            for (const double c : {2.0, 3.0}) {
                const auto audit = sim::lemma_audit(c, 1.0, std::nullopt, 10000, 1e-3, 2026);
                for (const auto& row : audit.rows) {
                    violations += row.violations;
                    ++rows;
                }
            }
            detail = std::to_string(violations) + " violations across " + std::to_string(rows) +
                     " properties";
            return violations == 0;
        });

    run("contract form, option form, and m=3 execution agree to 1e-12", 0.0,
        [&](std::string& detail) {
            double worst = 0.0;
            for (int i = 0; i < 100000; ++i) {
                const double c = 1.5 + 1.5 * uniform_draw(7, i, 0);
                const double k_max = std::min(2.0 * (c - 1.0), 2.0);
                const double k = 1.0 + (k_max - 1.0) * uniform_draw(7, i, 1);
                double alpha_u = uniform_draw(7, i, 2);
                if (alpha_u <= 0.0) {
                    alpha_u = 0.5;
                }
                const multiperiod::ThreePeriodParams params{c, k, alpha_u / c};
                const double q1 = uniform_draw(7, i, 3);
                const double q2 = uniform_draw(7, i, 4);
                const bool uses = uniform_draw(7, i, 5) < 0.5;
                const double contract =
                    multiperiod::payment(params, multiperiod::Both{q1, q2}, uses);
                const double option = multiperiod::option_form_payment(params, q1, q2, uses);
                const multiperiod::MPeriodContract m3{params.swap_share(), 3, {q1, q2}};
                const double executed = multiperiod::mperiod_execute(
                    pricing::PricingParams{c, k}, m3, uses);
                worst = std::max(worst, std::abs(contract - option));
                worst = std::max(worst, std::abs(executed - contract));
            }
            detail = "worst gap " + fmt(worst);
            return worst <= 1e-12;
        });

    run("Monte Carlo margin matches k/12 and profit is always positive", 60.0,
        [&](std::string& detail) {
            sim::SimConfig config;
            config.mechanism = pricing::validate_params(2.0, 1.5);
            config.population = sim::UniformP{0.0, 1.0};
            config.n_users = 10000;
            config.replications = 100;
            config.seed = 20260808;
            const auto result = sim::run_two_period(config);

            double mean_margin = 0.0;
            std::size_t profitable = 0;
            for (const auto& rec : result.records) {
                mean_margin += (rec.payments - rec.reservation_cost) / 10000.0;
                if (rec.profit > 0.0) {
                    ++profitable;
                }
            }
            mean_margin /= 100.0;
            double var = 0.0;
            for (const auto& rec : result.records) {
                const double m = (rec.payments - rec.reservation_cost) / 10000.0;
                var += (m - mean_margin) * (m - mean_margin);
            }
            const double se = std::sqrt(var / 99.0) / 10.0;
            detail = "margin " + fmt(mean_margin) + " (k/12 = 0.125, 3se = " + fmt(3.0 * se) +
                     "), profitable " + std::to_string(profitable) + "/100";
            return std::abs(mean_margin - 0.125) <= 3.0 * se && profitable == 100;
        });

    run("simulate and optimize reruns are byte-identical", 0.0, [&](std::string& detail) {
        if (cli_path.empty()) {
            detail = "CLI path not supplied";
            return false;
        }
        const auto dir = std::filesystem::temp_directory_path() /
                         ("resopt_acceptance_" + std::to_string(::getpid()));
        std::filesystem::create_directories(dir);
        std::ofstream(dir / "scenario.json") << R"({
          "mechanism": {"type": "two_period", "C": 2.0, "k": 1.5},
          "population": {"type": "uniform_p", "a": 0.0, "b": 1.0},
          "run": {"n_users": 2000, "replications": 20, "seed": 7}
        })";
        const std::string quiet = " > /dev/null 2>&1";
        bool ok = true;
        for (const char* name : {"sim_a.csv", "sim_b.csv"}) {
            ok = ok && run_command("'" + cli_path + "' simulate --scenario '" +
                                   (dir / "scenario.json").string() + "' --out '" +
                                   (dir / name).string() + "'" + quiet) == 0;
        }
        for (const char* name : {"grid_a.csv", "grid_b.csv"}) {
            ok = ok && run_command("'" + cli_path + "' optimize --scheme options --uniform-p 0 1"
                                   " --grid-out '" + (dir / name).string() + "'" + quiet) == 0;
        }
        const bool sim_equal = read_file(dir / "sim_a.csv") == read_file(dir / "sim_b.csv");
        const bool grid_equal = read_file(dir / "grid_a.csv") == read_file(dir / "grid_b.csv");
        const bool nonempty = !read_file(dir / "sim_a.csv").empty() &&
                              !read_file(dir / "grid_a.csv").empty();
        std::filesystem::remove_all(dir);
        detail = std::string("simulate ") + (sim_equal ? "identical" : "diverged") +
                 ", optimize grid " + (grid_equal ? "identical" : "diverged");
        return ok && sim_equal && grid_equal && nonempty;
    });

    std::printf("acceptance: %d/%d criteria passed\n", g_criterion - g_failures, g_criterion);
    return g_failures == 0 ? 0 : 1;
}
