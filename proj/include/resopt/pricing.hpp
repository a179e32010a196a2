#pragma once

#include <cstddef>
#include <map>
#include <utility>
#include <vector>

namespace resopt::pricing {

/// Parameters of the two-period payment schedule.
///
/// `spot_ratio` is the ratio between the late (spot) price and the early
/// (discount) price; `curvature` controls how steeply the pay-if-use and
/// pay-if-not curves bend.  Valid combinations satisfy spot_ratio > 1 and
/// curvature in [1, min(2*(spot_ratio-1), 2)]; use validate_params() to
/// construct a checked instance.
struct PricingParams {
    double spot_ratio = 2.0;  // C
    double curvature = 1.0;   // k
};

/// A user-facing contract at submitted probability q.
///
/// The option reading: `premium` is paid unconditionally, `strike` is paid
/// only when the unit is actually claimed.  premium + strike == pay_if_use
/// and premium == pay_if_not by construction.
struct Quote {
    double submitted_probability = 0.0;
    double pay_if_use = 0.0;
    double pay_if_not = 0.0;
    double premium = 0.0;
    double strike = 0.0;
};

/// Distribution of how many units a single buyer will need, as
/// unit-count -> probability.  Probabilities must sum to 1.
using UnitDemandDistribution = std::map<unsigned, double>;

/// Result of bundling one option per day over a horizon of equally likely
/// days (exactly one of which will be exercised).
struct TimeBundle {
    double per_day_probability = 0.0;
    double total_expected_cost = 0.0;
};

/// Checks (spot_ratio, curvature) against the validity window and returns
/// the parameter pair.  Throws ValidationError otherwise.
PricingParams validate_params(double spot_ratio, double curvature);

/// Amount due when the unit is used: f(p) = 1 + (k/2)(1-p)^2.
/// Strictly decreasing in p with f(1) = 1.
double pay_if_use(const PricingParams& params, double p);

/// Amount due when the unit is not used: g(p) = (k/2) p^2.
/// Non-decreasing in p with g(0) = 0.
double pay_if_not(const PricingParams& params, double p);

/// Expected payment of a truthful user: w(p) = p f(p) + (1-p) g(p)
///                                           = p + (k/2) p (1-p).
double expected_payment(const PricingParams& params, double p);

/// Cheapest expected cost of dealing with the provider directly:
/// min(1, spot_ratio * p).
double baseline_cost(double spot_ratio, double p);

/// Builds the full contract record for a submitted probability q.
Quote quote(const PricingParams& params, double q);

/// Recovers the submitted probability from a premium payment, inverting
/// pay_if_not.  The premium must lie on the curve, i.e. in [0, k/2].
double infer_probability(const PricingParams& params, double premium);

/// Samples (premium, strike) at n_points probabilities evenly spaced on
/// [0,1].  Strike is strictly decreasing along the curve.
std::vector<std::pair<double, double>> price_premium_curve(const PricingParams& params,
                                                           std::size_t n_points);

/// Brute-force argmin over the report grid {0, step, ..., 1} of the expected
/// payment p*f(q) + (1-p)*g(q) of a user with true probability p.  Ties break
/// toward the smaller report.  Serves as the truth-telling oracle: the result
/// is always within one grid step of p.
double optimal_submission(const PricingParams& params, double p, double grid_step);

/// Converts a multi-unit demand distribution into per-unit probabilities:
/// entry j (1-based) is P(demand >= j).  One option per entry reproduces the
/// multi-unit demand in expectation.
std::vector<double> decompose_units(const UnitDemandDistribution& dist);

/// One option per day for m equally likely days: per-day probability 1/m,
/// total expected cost m*g(1/m) + f(1/m) - g(1/m) (all premiums plus one
/// exercise).
TimeBundle uniform_time_bundle(const PricingParams& params, std::size_t m_days);

}  // namespace resopt::pricing
