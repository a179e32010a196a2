#include "resopt/mechanism_sim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "resopt/errors.hpp"
#include "resopt/rng.hpp"

namespace resopt::sim {

namespace {

void check_probability(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw ValidationError(std::string(what) + " must lie in [0,1], got " + std::to_string(p));
    }
}

void check_value(const std::optional<double>& v) {
    if (v && !(*v >= 0.0 && *v <= 1.0)) {
        throw ValidationError("user value must lie in [0,1], got " + std::to_string(*v));
    }
}

void check_common(const SimConfig& config) {
    if (config.n_users < 1) {
        throw ValidationError("n_users must be >= 1");
    }
    if (config.replications < 1) {
        throw ValidationError("replications must be >= 1");
    }
    if (const auto* fixed = std::get_if<FixedReport>(&config.strategy)) {
        check_probability(fixed->report, "fixed report");
    } else if (const auto* grid = std::get_if<GridOptimizer>(&config.strategy)) {
        if (!(grid->step > 0.0 && grid->step <= 0.01)) {
            throw ValidationError("grid optimizer step must lie in (0, 0.01], got " +
                                  std::to_string(grid->step));
        }
    }
}

// Argmin of `cost` over the report grid {0, step, ..., 1}; ties keep the
// smaller report.
template <typename Cost>
double grid_argmin(double step, Cost&& cost) {
    const auto steps = static_cast<std::size_t>(std::floor(1.0 / step + 1e-9));
    double best_q = 0.0;
    double best = cost(0.0);
    for (std::size_t i = 1; i <= steps; ++i) {
        const double q = std::min(1.0, static_cast<double>(i) * step);
        const double c = cost(q);
        if (c < best) {
            best = c;
            best_q = q;
        }
    }
    if (static_cast<double>(steps) * step < 1.0 && cost(1.0) < best) {
        best_q = 1.0;
    }
    return best_q;
}

void finalize(SimResult& result) {
    const auto reps = static_cast<double>(result.records.size());
    const auto n = static_cast<double>(result.n_users);
    double profit_sum = 0.0;
    double margin_sum = 0.0;
    for (const auto& rec : result.records) {
        profit_sum += rec.profit / n;
        margin_sum += (rec.payments - rec.reservation_cost) / n;
    }
    result.mean_profit_per_user = profit_sum / reps;
    result.mean_payment_margin_per_user = margin_sum / reps;
    double ss = 0.0;
    for (const auto& rec : result.records) {
        const double d = rec.profit / n - result.mean_profit_per_user;
        ss += d * d;
    }
    result.std_profit_per_user = result.records.size() > 1 ? std::sqrt(ss / (reps - 1.0)) : 0.0;
    result.ci95_half_width = 1.96 * result.std_profit_per_user / std::sqrt(reps);
}

}  // namespace

SimResult run_two_period(const SimConfig& config) {
    check_common(config);
    const auto* params = std::get_if<pricing::PricingParams>(&config.mechanism);
    if (!params) {
        throw ValidationError("run_two_period requires a two-period mechanism");
    }
    pricing::validate_params(params->spot_ratio, params->curvature);

    const auto* uniform = std::get_if<UniformP>(&config.population);
    const auto* users = std::get_if<std::vector<TwoPeriodUser>>(&config.population);
    if (uniform) {
        check_probability(uniform->lo, "population lower bound");
        check_probability(uniform->hi, "population upper bound");
        if (uniform->lo > uniform->hi) {
            throw ValidationError("population bounds must satisfy lo <= hi");
        }
    } else if (users) {
        if (users->empty()) {
            throw ValidationError("population user list must not be empty");
        }
        for (const auto& u : *users) {
            check_probability(u.use_probability, "user probability");
            check_value(u.value);
        }
    } else {
        throw ValidationError("two-period simulation needs a uniform_p or user-list population");
    }

    SimResult result;
    result.n_users = config.n_users;
    result.records.reserve(config.replications);

    for (std::size_t rep = 0; rep < config.replications; ++rep) {
        ReplicationRecord rec;
        rec.replication = rep;
        double reserved = 0.0;
        for (std::size_t i = 0; i < config.n_users; ++i) {
            double p;
            std::optional<double> value;
            if (uniform) {
                const double u = rng::unit_uniform(config.seed, rep, i, rng::Channel::population);
                p = uniform->lo + (uniform->hi - uniform->lo) * u;
            } else {
                const auto& spec = (*users)[i % users->size()];
                p = spec.use_probability;
                value = spec.value;
            }

            double q = p;
            if (const auto* fixed = std::get_if<FixedReport>(&config.strategy)) {
                q = fixed->report;
            } else if (const auto* grid = std::get_if<GridOptimizer>(&config.strategy)) {
                q = pricing::optimal_submission(*params, p, grid->step);
            }

            if (value) {
                const double expected_cost = p * pricing::pay_if_use(*params, q) +
                                             (1.0 - p) * pricing::pay_if_not(*params, q);
                if (*value < expected_cost) {
                    continue;  // opts out: no reservation, no payment
                }
            }

            reserved += q;
            const bool uses = rng::unit_uniform(config.seed, rep, i, rng::Channel::use) < p;
            if (uses) {
                rec.usage += 1.0;
                rec.payments += pricing::pay_if_use(*params, q);
            } else {
                rec.payments += pricing::pay_if_not(*params, q);
            }
        }
        rec.reservation_cost = reserved;
        rec.shortfall_cost = params->spot_ratio * std::max(0.0, rec.usage - reserved);
        rec.profit = rec.payments - rec.reservation_cost - rec.shortfall_cost;
        result.records.push_back(rec);
    }
    finalize(result);
    return result;
}

SimResult run_three_period(const SimConfig& config) {
    check_common(config);
    const auto* params = std::get_if<multiperiod::ThreePeriodParams>(&config.mechanism);
    if (!params) {
        throw ValidationError("run_three_period requires a three-period mechanism");
    }
    multiperiod::validate_three_period_params(params->spot_ratio, params->curvature,
                                              params->friction);
    const auto* users = std::get_if<std::vector<ThreePeriodUser>>(&config.population);
    if (!users || users->empty()) {
        throw ValidationError("three-period simulation needs a non-empty info-structure population");
    }
    for (const auto& u : *users) {
        multiperiod::validate_info(u.info.p1, u.info.p21, u.info.p22);
        check_value(u.value);
    }

    const double C = params->spot_ratio;
    SimResult result;
    result.n_users = config.n_users;
    result.records.reserve(config.replications);

    for (std::size_t rep = 0; rep < config.replications; ++rep) {
        ReplicationRecord rec;
        rec.replication = rep;
        double reserved1 = 0.0;
        double reserved2 = 0.0;
        for (std::size_t i = 0; i < config.n_users; ++i) {
            const auto& spec = (*users)[i % users->size()];
            const auto& info = spec.info;

            double q1 = info.prior();
            if (const auto* fixed = std::get_if<FixedReport>(&config.strategy)) {
                q1 = fixed->report;
            } else if (const auto* grid = std::get_if<GridOptimizer>(&config.strategy)) {
                q1 = grid_argmin(grid->step, [&](double q) {
                    return multiperiod::expected_cost_both(*params, info, q);
                });
            }

            if (spec.value &&
                *spec.value < multiperiod::expected_cost_both(*params, info, q1)) {
                continue;
            }

            const bool state_a =
                rng::unit_uniform(config.seed, rep, i, rng::Channel::state) < info.p1;
            const double p2 = state_a ? info.p21 : info.p22;

            double q2 = p2;
            if (const auto* fixed = std::get_if<FixedReport>(&config.strategy)) {
                q2 = fixed->report;
            } else if (const auto* grid = std::get_if<GridOptimizer>(&config.strategy)) {
                q2 = grid_argmin(grid->step, [&](double q) {
                    return multiperiod::adjustment_fee(*params, q1, q, p2);
                });
            }

            reserved1 += q1;
            reserved2 += q2;
            const bool uses = rng::unit_uniform(config.seed, rep, i, rng::Channel::use) < p2;
            rec.payments += multiperiod::payment(*params, multiperiod::Both{q1, q2}, uses);
            if (uses) {
                rec.usage += 1.0;
            }
        }
        // Holdings are pooled: the coordinator trades only the net aggregate
        // change in period 2.
        const double increase = std::max(0.0, reserved2 - reserved1);
        const double decrease = std::max(0.0, reserved1 - reserved2);
        rec.reservation_cost = reserved1 + C * increase -
                               (config.cost_model == CostModel::resale ? decrease : 0.0);
        rec.shortfall_cost = C * C * std::max(0.0, rec.usage - reserved2);
        rec.profit = rec.payments - rec.reservation_cost - rec.shortfall_cost;
        result.records.push_back(rec);
    }
    finalize(result);
    return result;
}

TruthAuditResult truth_audit(const pricing::PricingParams& params, std::span<const double> p_grid,
                             double q_grid_step) {
    pricing::validate_params(params.spot_ratio, params.curvature);
    TruthAuditResult audit;
    audit.pass = true;
    audit.rows.reserve(p_grid.size());
    for (const double p : p_grid) {
        check_probability(p, "audited probability");
        TruthAuditRow row;
        row.true_probability = p;
        row.best_report = pricing::optimal_submission(params, p, q_grid_step);
        const auto expected_cost = [&](double q) {
            return p * pricing::pay_if_use(params, q) + (1.0 - p) * pricing::pay_if_not(params, q);
        };
        row.misreport_gain = expected_cost(p) - expected_cost(row.best_report);
        row.pass = std::abs(row.best_report - p) <= q_grid_step;
        audit.pass = audit.pass && row.pass;
        audit.rows.push_back(row);
    }
    return audit;
}

LemmaAuditResult lemma_audit(double spot_ratio, double curvature, std::optional<double> friction,
                             std::size_t samples, double grid_step, std::uint64_t seed) {
    pricing::validate_params(spot_ratio, curvature);
    if (friction) {
        multiperiod::validate_three_period_params(spot_ratio, curvature, *friction);
    }
    if (!(grid_step > 0.0 && grid_step <= 0.01)) {
        throw ValidationError("grid step must lie in (0, 0.01], got " + std::to_string(grid_step));
    }
    if (samples < 1) {
        throw ValidationError("samples must be >= 1");
    }

    LemmaAuditRow adjust_opt{"adjustment optimum sits at the true period-2 probability", samples,
                             0, 1e300, true};
    LemmaAuditRow adjust_fee{"truthful adjustment never costs extra", samples, 0, 1e300, true};
    LemmaAuditRow period1_opt{"period-1 optimum sits at the prior", samples, 0, 1e300, true};
    LemmaAuditRow submit_twice{"submitting twice beats waiting for period 2", samples, 0, 1e300,
                               true};
    LemmaAuditRow margin{"expected collection covers expected usage", samples, 0, 1e300, true};

    auto draw = [&](std::uint64_t i, std::uint64_t slot) {
        return rng::unit_uniform(seed, i, slot, rng::Channel::population);
    };
    auto record = [](LemmaAuditRow& row, double slack) {
        row.worst_margin = std::min(row.worst_margin, slack);
        if (slack < 0.0) {
            ++row.violations;
        }
    };

    for (std::size_t i = 0; i < samples; ++i) {
        const auto info = multiperiod::validate_info(draw(i, 0), draw(i, 1), draw(i, 2));
        double alpha_u = draw(i, 3);
        if (alpha_u <= 0.0) {
            alpha_u = 0.5;  // keep the sampled alpha strictly inside (0, 1/C)
        }
        const double alpha = friction ? *friction : alpha_u / spot_ratio;
        const multiperiod::ThreePeriodParams params{spot_ratio, curvature, alpha};

        // A period-1 report to adjust away from; spread across the grid.
        const double q1 = draw(i, 4);
        const double p2 = draw(i, 5);
        const double best_q2 = grid_argmin(
            grid_step, [&](double q) { return multiperiod::adjustment_fee(params, q1, q, p2); });
        record(adjust_opt, grid_step - std::abs(best_q2 - p2));
        record(adjust_fee, -multiperiod::adjustment_fee(params, q1, p2, p2));

        const double prior = info.prior();
        const double best_q1 = grid_argmin(grid_step, [&](double q) {
            return multiperiod::expected_cost_both(params, info, q);
        });
        record(period1_opt, grid_step - std::abs(best_q1 - prior));

        const double c12 = multiperiod::expected_cost_both(params, info, prior);
        const double c2 = multiperiod::expected_cost_second_only(params, info);
        record(submit_twice, c2 - c12);
        record(margin, c12 - prior);
    }

    LemmaAuditResult audit;
    audit.pass = true;
    for (auto* row : {&adjust_opt, &adjust_fee, &period1_opt, &submit_twice, &margin}) {
        row->pass = row->violations == 0;
        audit.pass = audit.pass && row->pass;
        audit.rows.push_back(*row);
    }
    return audit;
}

std::vector<ConvergenceRow> profit_convergence(const pricing::PricingParams& params,
                                               std::span<const std::size_t> n_list,
                                               std::size_t replications, std::uint64_t seed) {
    std::vector<ConvergenceRow> rows;
    rows.reserve(n_list.size());
    for (const std::size_t n : n_list) {
        SimConfig config;
        config.mechanism = params;
        config.population = UniformP{0.0, 1.0};
        config.n_users = n;
        config.replications = replications;
        config.seed = seed;
        const SimResult result = run_two_period(config);
        ConvergenceRow row;
        row.n_users = n;
        std::size_t profitable = 0;
        double profit_sum = 0.0;
        for (const auto& rec : result.records) {
            profit_sum += rec.profit;
            if (rec.profit > 0.0) {
                ++profitable;
            }
        }
        row.mean_profit = profit_sum / static_cast<double>(result.records.size());
        row.mean_payment_margin_per_user = result.mean_payment_margin_per_user;
        row.fraction_profitable =
            static_cast<double>(profitable) / static_cast<double>(result.records.size());
        rows.push_back(row);
    }
    return rows;
}

}  // namespace resopt::sim
