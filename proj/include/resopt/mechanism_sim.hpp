#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "resopt/multiperiod.hpp"
#include "resopt/pricing.hpp"

namespace resopt::sim {

/// A two-period participant: true use probability and, optionally, the value
/// the unit has for them.  Users without a value are committed buyers; users
/// with one opt out when their expected cost exceeds it.
struct TwoPeriodUser {
    double use_probability = 0.0;
    std::optional<double> value;
};

/// A three-period participant described by their belief tree.
struct ThreePeriodUser {
    multiperiod::InfoStructure info;
    std::optional<double> value;
};

/// Reporting strategies.  Truthful submits the true probability in every
/// period; FixedReport always submits the same number; GridOptimizer searches
/// the report grid for the cheapest submission (and should coincide with
/// Truthful — that is the mechanism's core claim).
struct Truthful {};
struct FixedReport {
    double report = 0.0;
};
struct GridOptimizer {
    double step = 1e-3;
};
using Strategy = std::variant<Truthful, FixedReport, GridOptimizer>;

/// p drawn uniformly from [lo, hi] per user per replication (committed
/// two-period users, no values).
struct UniformP {
    double lo = 0.0;
    double hi = 1.0;
};

/// Population specs.  Explicit lists are cycled: user i takes entry
/// i mod size, so a single entry describes a homogeneous population.
using Population =
    std::variant<UniformP, std::vector<TwoPeriodUser>, std::vector<ThreePeriodUser>>;

/// How the coordinator accounts for period-2 holding adjustments (the
/// three-period game only).  Holdings are pooled, so per-user changes net
/// against each other; only the aggregate move is traded.
enum class CostModel {
    forfeit,  // net decreases are discarded with no refund
    resale,   // net decreases are refunded at the period-1 price
};

struct SimConfig {
    std::variant<pricing::PricingParams, multiperiod::ThreePeriodParams> mechanism;
    Population population;
    std::size_t n_users = 0;
    std::size_t replications = 1;
    std::uint64_t seed = 0;
    CostModel cost_model = CostModel::forfeit;
    Strategy strategy = Truthful{};
};

struct ReplicationRecord {
    std::size_t replication = 0;
    double usage = 0.0;             // units claimed
    double payments = 0.0;          // W
    double reservation_cost = 0.0;  // period-1 reservations plus any adjustment
    double shortfall_cost = 0.0;    // last-period spot purchases
    double profit = 0.0;            // payments - reservation_cost - shortfall_cost
};

struct SimResult {
    std::size_t n_users = 0;
    std::vector<ReplicationRecord> records;
    double mean_profit_per_user = 0.0;
    double std_profit_per_user = 0.0;   // sample std across replications
    double ci95_half_width = 0.0;       // normal approximation
    double mean_payment_margin_per_user = 0.0;  // mean of (W - reservation cost)/n
};

/// Runs the two-period coordinator game.  Deterministic for a fixed config:
/// every random draw is keyed by (seed, replication, user, purpose).
SimResult run_two_period(const SimConfig& config);

/// Runs the three-period game: period-1 reports, state draws, period-2
/// adjustments, period-3 delivery with spot top-ups at C^2.
SimResult run_three_period(const SimConfig& config);

struct TruthAuditRow {
    double true_probability = 0.0;
    double best_report = 0.0;
    double misreport_gain = 0.0;  // expected cost saved by the best deviation
    bool pass = false;
};

struct TruthAuditResult {
    std::vector<TruthAuditRow> rows;
    bool pass = false;
};

/// For each true p, brute-forces the report grid and checks that no report
/// beats the truth by more than the grid can resolve.
TruthAuditResult truth_audit(const pricing::PricingParams& params, std::span<const double> p_grid,
                             double q_grid_step);

struct LemmaAuditRow {
    const char* property = "";
    std::size_t samples = 0;
    std::size_t violations = 0;
    double worst_margin = 0.0;  // most adverse slack observed
    bool pass = false;
};

struct LemmaAuditResult {
    std::vector<LemmaAuditRow> rows;
    bool pass = false;
};

/// Randomized sweep of the three-period incentive properties: truthful
/// adjustment is optimal and free (or better), period-1 truth-telling,
/// submitting twice beats waiting, and the coordinator margin is
/// non-negative.  Belief trees are sampled uniformly; `friction` pins the
/// audited alpha, or, when absent, alpha is sampled per draw from its
/// admissible interval (0, 1/C).
LemmaAuditResult lemma_audit(double spot_ratio, double curvature, std::optional<double> friction,
                             std::size_t samples, double grid_step, std::uint64_t seed);

struct ConvergenceRow {
    std::size_t n_users = 0;
    double mean_profit = 0.0;
    double mean_payment_margin_per_user = 0.0;
    double fraction_profitable = 0.0;
};

/// Profit trend over population sizes for a uniform(0,1) truthful
/// population: mean profit grows linearly in n and the fraction of
/// profitable replications approaches 1.
std::vector<ConvergenceRow> profit_convergence(const pricing::PricingParams& params,
                                               std::span<const std::size_t> n_list,
                                               std::size_t replications, std::uint64_t seed);

}  // namespace resopt::sim
