#include "resopt/multiperiod.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "resopt/errors.hpp"

namespace resopt::multiperiod {

namespace {

void check_probability(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw DomainError(std::string(what) + " must lie in [0,1], got " + std::to_string(p));
    }
}

// Period-1 curves; the period-2 curves are these scaled by C.
double f1(const ThreePeriodParams& params, double q) {
    return pricing::pay_if_use(params.first_period_params(), q);
}

double g1(const ThreePeriodParams& params, double q) {
    return pricing::pay_if_not(params.first_period_params(), q);
}

double w1(const ThreePeriodParams& params, double p) {
    return pricing::expected_payment(params.first_period_params(), p);
}

}  // namespace

ThreePeriodParams validate_three_period_params(double spot_ratio, double curvature,
                                               double friction) {
    pricing::validate_params(spot_ratio, curvature);
    if (!(friction > 0.0 && friction < 1.0 / spot_ratio)) {
        throw ValidationError("friction out of range: alpha must lie in (0, " +
                              std::to_string(1.0 / spot_ratio) + ") for C=" +
                              std::to_string(spot_ratio) + ", got " + std::to_string(friction));
    }
    return ThreePeriodParams{spot_ratio, curvature, friction};
}

InfoStructure validate_info(double p1, double p21, double p22) {
    check_probability(p1, "p1");
    check_probability(p21, "p21");
    check_probability(p22, "p22");
    return InfoStructure{p1, p21, p22};
}

MPeriodContract validate_mperiod_contract(double beta, std::size_t periods,
                                          std::vector<double> submissions) {
    mperiod_weights(beta, periods);  // validates beta and periods
    if (submissions.size() != periods - 1) {
        throw ValidationError("m-period contract needs " + std::to_string(periods - 1) +
                              " submissions, got " + std::to_string(submissions.size()));
    }
    for (double q : submissions) {
        check_probability(q, "submitted probability");
    }
    return MPeriodContract{beta, periods, std::move(submissions)};
}

double payment(const ThreePeriodParams& params, const SubmissionPattern& pattern, bool uses) {
    const double C = params.spot_ratio;
    const double alpha = params.friction;
    return std::visit(
        [&](const auto& pat) -> double {
            using P = std::decay_t<decltype(pat)>;
            if constexpr (std::is_same_v<P, FirstOnly>) {
                check_probability(pat.q1, "q1");
                return uses ? f1(params, pat.q1) : g1(params, pat.q1);
            } else if constexpr (std::is_same_v<P, SecondOnly>) {
                check_probability(pat.q2, "q2");
                // f2 = C f1, g2 = C g1
                return C * (uses ? f1(params, pat.q2) : g1(params, pat.q2));
            } else {
                check_probability(pat.q1, "q1");
                check_probability(pat.q2, "q2");
                // f1(q1) - alpha f2(q1) + alpha f2(q2), and the g analogue
                if (uses) {
                    return f1(params, pat.q1) +
                           alpha * C * (f1(params, pat.q2) - f1(params, pat.q1));
                }
                return g1(params, pat.q1) + alpha * C * (g1(params, pat.q2) - g1(params, pat.q1));
            }
        },
        pattern);
}

double adjustment_fee(const ThreePeriodParams& params, double q1, double q2, double p2) {
    check_probability(q1, "q1");
    check_probability(q2, "q2");
    check_probability(p2, "p2");
    const double alpha = params.friction;
    const double C = params.spot_ratio;
    return p2 * alpha * C * (f1(params, q2) - f1(params, q1)) +
           (1.0 - p2) * alpha * C * (g1(params, q2) - g1(params, q1));
}

double expected_cost_both(const ThreePeriodParams& params, const InfoStructure& info, double q1) {
    check_probability(q1, "q1");
    const double p = info.prior();
    const double swap = params.swap_share();  // alpha * C
    const double stay = 1.0 - swap;
    const double period1_leg = p * f1(params, q1) + (1.0 - p) * g1(params, q1);
    const double period2_leg = info.p1 * w1(params, info.p21) + (1.0 - info.p1) * w1(params, info.p22);
    return stay * period1_leg + swap * period2_leg;
}

double expected_cost_second_only(const ThreePeriodParams& params, const InfoStructure& info) {
    return params.spot_ratio *
           (info.p1 * w1(params, info.p21) + (1.0 - info.p1) * w1(params, info.p22));
}

double option_form_payment(const ThreePeriodParams& params, double q1, double q2, bool uses) {
    check_probability(q1, "q1");
    check_probability(q2, "q2");
    const double swap = params.swap_share();
    const double premium = g1(params, q1);
    const double swap_fee = swap * (g1(params, q2) - g1(params, q1));
    double total = premium + swap_fee;
    if (uses) {
        total += (1.0 - swap) * (f1(params, q1) - g1(params, q1)) +
                 swap * (f1(params, q2) - g1(params, q2));
    }
    return total;
}

std::vector<double> mperiod_weights(double beta, std::size_t periods) {
    if (periods < 3) {
        throw ValidationError("m-period contract needs at least 3 periods, got " +
                              std::to_string(periods));
    }
    if (!(beta > 0.0)) {
        throw ValidationError("swap base beta must be positive, got " + std::to_string(beta));
    }
    // swapped = beta + beta^2 + ... + beta^(m-2); must stay below 1 so the
    // retained first-period share is positive.
    std::vector<double> shares(periods - 1, 0.0);
    double swapped = 0.0;
    double power = 1.0;
    for (std::size_t i = 1; i + 1 < periods; ++i) {
        power *= beta;
        shares[i] = power;
        swapped += power;
    }
    if (!(swapped < 1.0)) {
        throw ValidationError("infeasible swap schedule: beta + ... + beta^(m-2) = " +
                              std::to_string(swapped) + " must stay below 1");
    }
    shares[0] = 1.0 - swapped;
    return shares;
}

double mperiod_execute(const pricing::PricingParams& params, const MPeriodContract& contract,
                       bool uses) {
    const std::vector<double> shares = mperiod_weights(contract.beta, contract.periods);
    if (contract.submissions.size() != contract.periods - 1) {
        throw ValidationError("m-period contract needs " + std::to_string(contract.periods - 1) +
                              " submissions, got " + std::to_string(contract.submissions.size()));
    }
    for (double q : contract.submissions) {
        check_probability(q, "submitted probability");
    }

    const double q1 = contract.submissions[0];
    double total = pricing::pay_if_not(params, q1);  // period-1 premium
    for (std::size_t i = 1; i < shares.size(); ++i) {
        const double qi = contract.submissions[i];
        total += shares[i] * (pricing::pay_if_not(params, qi) - pricing::pay_if_not(params, q1));
    }
    if (uses) {
        for (std::size_t i = 0; i < shares.size(); ++i) {
            const double qi = contract.submissions[i];
            total += shares[i] * (pricing::pay_if_use(params, qi) - pricing::pay_if_not(params, qi));
        }
    }
    return total;
}

}  // namespace resopt::multiperiod
