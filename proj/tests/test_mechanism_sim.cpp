#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "resopt/errors.hpp"
#include "resopt/mechanism_sim.hpp"

using namespace resopt;
using sim::SimConfig;

namespace {

const pricing::PricingParams kTwo = pricing::validate_params(2.0, 1.5);
const multiperiod::ThreePeriodParams kThree =
    multiperiod::validate_three_period_params(2.0, 1.0, 0.25);

SimConfig uniform_config(std::size_t n_users, std::size_t replications, std::uint64_t seed) {
    SimConfig config;
    config.mechanism = kTwo;
    config.population = sim::UniformP{0.0, 1.0};
    config.n_users = n_users;
    config.replications = replications;
    config.seed = seed;
    return config;
}

}  // namespace

TEST_CASE("configuration validation happens before any sampling") {
    SimConfig config = uniform_config(100, 10, 1);

    config.n_users = 0;
    CHECK_THROWS_AS(sim::run_two_period(config), ValidationError);
    config.n_users = 100;

    config.replications = 0;
    CHECK_THROWS_AS(sim::run_two_period(config), ValidationError);
    config.replications = 10;

    config.population = sim::UniformP{0.5, 0.2};
    CHECK_THROWS_AS(sim::run_two_period(config), ValidationError);
    config.population = sim::UniformP{0.0, 1.2};
    CHECK_THROWS_AS(sim::run_two_period(config), ValidationError);

    config.population = std::vector<sim::TwoPeriodUser>{};
    CHECK_THROWS_AS(sim::run_two_period(config), ValidationError);
    config.population = std::vector<sim::TwoPeriodUser>{{1.4, std::nullopt}};
    CHECK_THROWS_AS(sim::run_two_period(config), ValidationError);
    config.population = std::vector<sim::TwoPeriodUser>{{0.5, 1.4}};
    CHECK_THROWS_AS(sim::run_two_period(config), ValidationError);

    config.population = sim::UniformP{0.0, 1.0};
    config.strategy = sim::GridOptimizer{0.05};
    CHECK_THROWS_AS(sim::run_two_period(config), ValidationError);
    config.strategy = sim::FixedReport{1.5};
    CHECK_THROWS_AS(sim::run_two_period(config), ValidationError);
    config.strategy = sim::Truthful{};

    // mechanism/population/runner mismatches
    CHECK_THROWS_AS(sim::run_three_period(config), ValidationError);
    config.mechanism = kThree;
    CHECK_THROWS_AS(sim::run_two_period(config), ValidationError);
    CHECK_THROWS_AS(sim::run_three_period(config), ValidationError);  // population not infos
}

TEST_CASE("degenerate populations settle exactly") {
    SimConfig config;
    config.mechanism = kTwo;
    config.n_users = 500;
    config.replications = 4;
    config.seed = 9;

    config.population = std::vector<sim::TwoPeriodUser>{{0.0, std::nullopt}};
    for (const auto& rec : sim::run_two_period(config).records) {
        CHECK(rec.usage == 0.0);
        CHECK(rec.payments == 0.0);
        CHECK(rec.reservation_cost == 0.0);
        CHECK(rec.shortfall_cost == 0.0);
        CHECK(rec.profit == 0.0);
    }

    config.population = std::vector<sim::TwoPeriodUser>{{1.0, std::nullopt}};
    for (const auto& rec : sim::run_two_period(config).records) {
        CHECK(rec.usage == 500.0);
        CHECK(rec.payments == 500.0);  // every user pays f(1) = 1
        CHECK(rec.reservation_cost == 500.0);
        CHECK(rec.shortfall_cost == 0.0);
        CHECK(rec.profit == 0.0);
    }
}

TEST_CASE("accounting identity and determinism") {
    const auto config = uniform_config(300, 20, 12345);
    const auto first = sim::run_two_period(config);
    const auto second = sim::run_two_period(config);
    REQUIRE(first.records.size() == 20);
    for (std::size_t r = 0; r < first.records.size(); ++r) {
        const auto& a = first.records[r];
        const auto& b = second.records[r];
        CHECK(a.profit == a.payments - a.reservation_cost - a.shortfall_cost);
        CHECK(a.usage == b.usage);
        CHECK(a.payments == b.payments);
        CHECK(a.reservation_cost == b.reservation_cost);
        CHECK(a.shortfall_cost == b.shortfall_cost);
        CHECK(a.profit == b.profit);
    }
    CHECK(first.mean_profit_per_user == second.mean_profit_per_user);

    // a different seed gives different draws
    auto other = config;
    other.seed = 54321;
    CHECK(sim::run_two_period(other).records[0].payments != first.records[0].payments);
}

TEST_CASE("empirical moments match the population at n = 10^4") {
    const auto result = sim::run_two_period(uniform_config(10000, 50, 2024));
    const double n = 10000.0;
    double mean_u = 0.0;
    double mean_w = 0.0;
    for (const auto& rec : result.records) {
        mean_u += rec.usage / n;
        mean_w += rec.payments / n;
    }
    mean_u /= 50.0;
    mean_w /= 50.0;
    double var_u = 0.0;
    double var_w = 0.0;
    for (const auto& rec : result.records) {
        var_u += (rec.usage / n - mean_u) * (rec.usage / n - mean_u);
        var_w += (rec.payments / n - mean_w) * (rec.payments / n - mean_w);
    }
    const double se_u = std::sqrt(var_u / 49.0) / std::sqrt(50.0);
    const double se_w = std::sqrt(var_w / 49.0) / std::sqrt(50.0);

    // E[p] = 1/2 and E[w(p)] = 1/2 + k/12 for p ~ uniform(0,1)
    CHECK(std::abs(mean_u - 0.5) <= 4.0 * se_u);
    CHECK(std::abs(mean_w - (0.5 + 1.5 / 12.0)) <= 4.0 * se_w);
}

TEST_CASE("grid-optimizing users behave like truthful ones") {
    auto config = uniform_config(200, 3, 77);
    const auto truthful = sim::run_two_period(config);
    config.strategy = sim::GridOptimizer{1e-3};
    const auto optimized = sim::run_two_period(config);
    for (std::size_t r = 0; r < truthful.records.size(); ++r) {
        const auto& t = truthful.records[r];
        const auto& o = optimized.records[r];
        CHECK(o.usage == t.usage);  // identical use draws by construction
        // reports differ by at most the grid step, payments by the Lipschitz bound
        CHECK(std::abs(o.reservation_cost - t.reservation_cost) <= 200 * 1e-3);
        CHECK(std::abs(o.payments - t.payments) <= 200 * kTwo.curvature * 1e-3);
    }
}

TEST_CASE("users priced out of the mechanism opt out") {
    SimConfig config;
    config.mechanism = kTwo;
    config.n_users = 2;
    config.replications = 1;
    config.seed = 3;
    // w(0.5) = 0.6875: the first user cannot afford it, the second can
    config.population =
        std::vector<sim::TwoPeriodUser>{{0.5, 0.5}, {0.5, 0.7}};
    const auto rec = sim::run_two_period(config).records[0];
    CHECK(rec.reservation_cost == 0.5);

    config.population = std::vector<sim::TwoPeriodUser>{{0.5, 0.5}};
    config.n_users = 10;
    const auto all_out = sim::run_two_period(config).records[0];
    CHECK(all_out.payments == 0.0);
    CHECK(all_out.reservation_cost == 0.0);
    CHECK(all_out.profit == 0.0);

    // three-period users compare their value against c12 = 0.5964
    SimConfig three;
    three.mechanism = kThree;
    three.n_users = 20;
    three.replications = 1;
    const auto info = multiperiod::validate_info(0.7, 0.6, 0.2);
    three.population = std::vector<sim::ThreePeriodUser>{{info, 0.5}};
    CHECK(sim::run_three_period(three).records[0].payments == 0.0);
    three.population = std::vector<sim::ThreePeriodUser>{{info, 0.7}};
    CHECK(sim::run_three_period(three).records[0].payments > 0.0);
}

TEST_CASE("three-period game converges to the analytic cost") {
    SimConfig config;
    config.mechanism = kThree;
    config.population =
        std::vector<sim::ThreePeriodUser>{{multiperiod::validate_info(0.7, 0.6, 0.2), std::nullopt}};
    config.n_users = 10000;
    config.replications = 30;
    config.seed = 99;
    const auto result = sim::run_three_period(config);

    double mean_w = 0.0;
    for (const auto& rec : result.records) {
        CHECK(rec.profit == rec.payments - rec.reservation_cost - rec.shortfall_cost);
        CHECK(rec.profit > 0.0);  // margin c12 - p = 0.1164 per user dwarfs the noise
        mean_w += rec.payments / 10000.0;
    }
    mean_w /= 30.0;
    double var_w = 0.0;
    for (const auto& rec : result.records) {
        var_w += (rec.payments / 10000.0 - mean_w) * (rec.payments / 10000.0 - mean_w);
    }
    const double se_w = std::sqrt(var_w / 29.0) / std::sqrt(30.0);
    CHECK(std::abs(mean_w - 0.5964) <= 3.0 * se_w);

    // resale refunds net decreases, so it can only raise profit
    auto resale_config = config;
    resale_config.cost_model = sim::CostModel::resale;
    const auto resale = sim::run_three_period(resale_config);
    for (std::size_t r = 0; r < result.records.size(); ++r) {
        CHECK(resale.records[r].profit >= result.records[r].profit);
        CHECK(resale.records[r].payments == result.records[r].payments);
    }
}

TEST_CASE("no information gain collapses to the two-period schedule") {
    // p1 = p21 = p22 = 1/2 keeps the prior exactly representable
    SimConfig three;
    three.mechanism = multiperiod::validate_three_period_params(2.0, 1.5, 0.25);
    three.population =
        std::vector<sim::ThreePeriodUser>{{multiperiod::validate_info(0.5, 0.5, 0.5), std::nullopt}};
    three.n_users = 400;
    three.replications = 5;
    three.seed = 31;
    const auto adjusted = sim::run_three_period(three);

    SimConfig two;
    two.mechanism = kTwo;
    two.population = std::vector<sim::TwoPeriodUser>{{0.5, std::nullopt}};
    two.n_users = 400;
    two.replications = 5;
    two.seed = 31;
    const auto flat = sim::run_two_period(two);

    for (std::size_t r = 0; r < flat.records.size(); ++r) {
        CHECK(adjusted.records[r].usage == flat.records[r].usage);
        CHECK(adjusted.records[r].payments == flat.records[r].payments);
        CHECK(adjusted.records[r].reservation_cost == flat.records[r].reservation_cost);
    }
}

TEST_CASE("truth audit passes and prices misreports quadratically") {
    std::vector<double> p_grid;
    for (int i = 1; i <= 19; ++i) {
        p_grid.push_back(i * 0.05);
    }
    const auto audit = sim::truth_audit(kTwo, p_grid, 1e-3);
    CHECK(audit.pass);
    REQUIRE(audit.rows.size() == 19);
    for (const auto& row : audit.rows) {
        CHECK(row.pass);
        // the truth itself is not a grid point, so the gain can be a hair negative
        CHECK(row.misreport_gain >= -1e-12);
        CHECK(row.misreport_gain <= 0.5 * kTwo.curvature * 1e-3 * 1e-3 + 1e-15);
    }

    // w(q; p) - w(p; p) = (k/2)(q - p)^2
    const auto cost = [&](double q, double p) {
        return p * pricing::pay_if_use(kTwo, q) + (1.0 - p) * pricing::pay_if_not(kTwo, q);
    };
    CHECK(std::abs(cost(0.6, 0.5) - cost(0.5, 0.5) - 0.0075) <= 1e-12);
    CHECK(std::abs(cost(0.4, 0.5) - cost(0.5, 0.5) - 0.0075) <= 1e-12);

    CHECK(sim::truth_audit(kTwo, std::vector<double>{0.0}, 1e-3).rows[0].best_report == 0.0);
}

TEST_CASE("lemma audit passes for pinned and sampled friction") {
    const auto pinned = sim::lemma_audit(2.0, 1.0, 0.25, 2000, 1e-3, 5);
    CHECK(pinned.pass);
    REQUIRE(pinned.rows.size() == 5);
    for (const auto& row : pinned.rows) {
        CHECK(row.pass);
        CHECK(row.violations == 0);
    }

    const auto sampled = sim::lemma_audit(2.0, 1.0, std::nullopt, 2000, 1e-3, 6);
    CHECK(sampled.pass);

    CHECK_THROWS_AS(sim::lemma_audit(2.0, 1.0, 0.6, 100, 1e-3, 0), ValidationError);
    CHECK_THROWS_AS(sim::lemma_audit(2.0, 1.0, 0.25, 0, 1e-3, 0), ValidationError);
    CHECK_THROWS_AS(sim::lemma_audit(2.0, 1.0, 0.25, 100, 0.5, 0), ValidationError);
}

TEST_CASE("profit grows with the population") {
    const std::vector<std::size_t> n_list{10, 100, 1000};
    const auto rows = sim::profit_convergence(kTwo, n_list, 400, 123);
    REQUIRE(rows.size() == 3);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i].fraction_profitable >= rows[i - 1].fraction_profitable);
        CHECK(rows[i].mean_profit > rows[i - 1].mean_profit);
    }
    CHECK(rows.back().fraction_profitable == 1.0);
    // payment-side margin approaches k/12 = 0.125 per user
    CHECK(std::abs(rows.back().mean_payment_margin_per_user - 0.125) <= 0.01);

    // a single certain user yields exactly zero profit
    SimConfig config;
    config.mechanism = kTwo;
    config.population = std::vector<sim::TwoPeriodUser>{{0.0, std::nullopt}};
    config.n_users = 1;
    config.replications = 3;
    const auto degenerate = sim::run_two_period(config);
    for (const auto& rec : degenerate.records) {
        CHECK(rec.profit == 0.0);
    }
}
