#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "resopt/pricing.hpp"

namespace resopt::multiperiod {

/// Parameters of the three-period adjustable contract.
///
/// Unit prices across the three periods form the ladder (1, C, C^2) where
/// C = spot_ratio.  The period-1 schedule reuses the two-period curves with
/// curvature k; the period-2 schedule is the same curves scaled by C.
/// `friction` (the paper-facing knob often written alpha) is the fraction of
/// a period-1 contract that can be re-priced in period 2 and must lie in
/// (0, 1/C) for the mechanism to stay truthful.
struct ThreePeriodParams {
    double spot_ratio = 2.0;  // C
    double curvature = 1.0;   // k
    double friction = 0.25;   // alpha

    double delta() const { return 1.0 / spot_ratio; }
    double swap_share() const { return friction * spot_ratio; }  // alpha * C

    /// The (C, k) pair driving the period-1 payment curves.
    pricing::PricingParams first_period_params() const {
        return pricing::PricingParams{spot_ratio, curvature};
    }
};

ThreePeriodParams validate_three_period_params(double spot_ratio, double curvature,
                                               double friction);

/// A user's belief tree: probability p1 of reaching state A in period 2,
/// and use probabilities p21 (in A) / p22 (in B) for period 3.
struct InfoStructure {
    double p1 = 0.0;
    double p21 = 0.0;
    double p22 = 0.0;

    /// Period-1 use probability before the state is known.
    double prior() const { return p1 * p21 + (1.0 - p1) * p22; }
};

InfoStructure validate_info(double p1, double p21, double p22);

/// The three submission patterns a user can follow.
struct FirstOnly {
    double q1 = 0.0;
};
struct SecondOnly {
    double q2 = 0.0;
};
struct Both {
    double q1 = 0.0;
    double q2 = 0.0;
};
using SubmissionPattern = std::variant<FirstOnly, SecondOnly, Both>;

/// An m-period contract: one share bought up front, then a geometric
/// schedule of swappable fractions beta, beta^2, ..., beta^(m-2).
struct MPeriodContract {
    double beta = 0.5;
    std::size_t periods = 3;          // m
    std::vector<double> submissions;  // q1 .. q_{m-1}
};

MPeriodContract validate_mperiod_contract(double beta, std::size_t periods,
                                          std::vector<double> submissions);

/// Final payment owed in period 3 for a submission pattern, depending on
/// whether the unit was used.
double payment(const ThreePeriodParams& params, const SubmissionPattern& pattern, bool uses);

/// Expected extra payment from adjusting a period-1 report q1 to q2 when the
/// true period-2 probability is p2.  Minimized (and <= 0) at q2 = p2.
double adjustment_fee(const ThreePeriodParams& params, double q1, double q2, double p2);

/// Expected total cost of submitting q1 in period 1 and adjusting truthfully
/// in period 2.  Minimized at q1 = info.prior().
double expected_cost_both(const ThreePeriodParams& params, const InfoStructure& info, double q1);

/// Expected total cost of skipping period 1 and submitting truthfully in
/// period 2 only.
double expected_cost_second_only(const ThreePeriodParams& params, const InfoStructure& info);

/// Payment under the option formulation: premium in period 1, a swap of an
/// alpha*C share in period 2, and a split exercise in period 3.  Equal to
/// payment(params, Both{q1, q2}, uses).
double option_form_payment(const ThreePeriodParams& params, double q1, double q2, bool uses);

/// Option shares held at exercise time of an m-period contract:
/// [1 - sum_i beta^i, beta, beta^2, ..., beta^(m-2)].  All positive, sum 1.
std::vector<double> mperiod_weights(double beta, std::size_t periods);

/// Total paid over the life of an m-period contract: initial premium, the
/// per-period swap fees, and (if the unit is used) the share-weighted
/// exercise.  For m = 3 and beta = alpha*C this reproduces
/// option_form_payment.
double mperiod_execute(const pricing::PricingParams& params, const MPeriodContract& contract,
                       bool uses);

}  // namespace resopt::multiperiod
