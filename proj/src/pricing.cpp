#include "resopt/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "resopt/errors.hpp"

namespace resopt::pricing {

namespace {

void check_probability(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw DomainError(std::string(what) + " must lie in [0,1], got " + std::to_string(p));
    }
}

}  // namespace

PricingParams validate_params(double spot_ratio, double curvature) {
    if (!(spot_ratio > 1.0)) {
        throw ValidationError("invalid spot ratio: C must exceed 1, got " +
                              std::to_string(spot_ratio));
    }
    const double k_max = std::min(2.0 * (spot_ratio - 1.0), 2.0);
    if (!(curvature >= 1.0 && curvature <= k_max)) {
        throw ValidationError("curvature out of range: k must lie in [1, " +
                              std::to_string(k_max) + "] for C=" + std::to_string(spot_ratio) +
                              ", got " + std::to_string(curvature));
    }
    return PricingParams{spot_ratio, curvature};
}

double pay_if_use(const PricingParams& params, double p) {
    check_probability(p, "probability");
    // 1 + k/2 - k p + k p^2/2 rearranged so that f(1) == 1 exactly.
    const double d = 1.0 - p;
    return 1.0 + 0.5 * params.curvature * d * d;
}

double pay_if_not(const PricingParams& params, double p) {
    check_probability(p, "probability");
    return 0.5 * params.curvature * p * p;
}

double expected_payment(const PricingParams& params, double p) {
    check_probability(p, "probability");
    // (1 + k/2) p - (k/2) p^2, written as p plus the coordinator margin.
    return p + 0.5 * params.curvature * p * (1.0 - p);
}

double baseline_cost(double spot_ratio, double p) {
    if (!(spot_ratio > 1.0)) {
        throw DomainError("spot ratio must exceed 1, got " + std::to_string(spot_ratio));
    }
    check_probability(p, "probability");
    return std::min(1.0, spot_ratio * p);
}

Quote quote(const PricingParams& params, double q) {
    check_probability(q, "submitted probability");
    Quote out;
    out.submitted_probability = q;
    out.pay_if_use = pay_if_use(params, q);
    out.pay_if_not = pay_if_not(params, q);
    out.premium = out.pay_if_not;
    out.strike = out.pay_if_use - out.pay_if_not;
    return out;
}

double infer_probability(const PricingParams& params, double premium) {
    const double max_premium = 0.5 * params.curvature;
    if (!(premium >= 0.0 && premium <= max_premium)) {
        throw DomainError("premium not on the curve: must lie in [0, " +
                          std::to_string(max_premium) + "], got " + std::to_string(premium));
    }
    return std::sqrt(2.0 * premium / params.curvature);
}

std::vector<std::pair<double, double>> price_premium_curve(const PricingParams& params,
                                                           std::size_t n_points) {
    if (n_points < 2) {
        throw ValidationError("price-premium curve needs at least 2 points");
    }
    std::vector<std::pair<double, double>> curve;
    curve.reserve(n_points);
    for (std::size_t i = 0; i < n_points; ++i) {
        const double p = static_cast<double>(i) / static_cast<double>(n_points - 1);
        const Quote c = quote(params, p);
        curve.emplace_back(c.premium, c.strike);
    }
    return curve;
}

double optimal_submission(const PricingParams& params, double p, double grid_step) {
    check_probability(p, "probability");
    if (!(grid_step > 0.0 && grid_step <= 0.01)) {
        throw DomainError("grid step must lie in (0, 0.01], got " + std::to_string(grid_step));
    }
    const auto steps = static_cast<std::size_t>(std::floor(1.0 / grid_step + 1e-9));
    double best_q = 0.0;
    double best_cost = p * pay_if_use(params, 0.0) + (1.0 - p) * pay_if_not(params, 0.0);
    auto consider = [&](double q) {
        const double cost = p * pay_if_use(params, q) + (1.0 - p) * pay_if_not(params, q);
        if (cost < best_cost) {
            best_cost = cost;
            best_q = q;
        }
    };
    for (std::size_t i = 1; i <= steps; ++i) {
        consider(std::min(1.0, static_cast<double>(i) * grid_step));
    }
    if (static_cast<double>(steps) * grid_step < 1.0) {
        consider(1.0);
    }
    return best_q;
}

std::vector<double> decompose_units(const UnitDemandDistribution& dist) {
    double total = 0.0;
    unsigned max_units = 0;
    for (const auto& [units, prob] : dist) {
        if (!(prob >= 0.0 && prob <= 1.0)) {
            throw ValidationError("demand probability for " + std::to_string(units) +
                                  " units must lie in [0,1], got " + std::to_string(prob));
        }
        total += prob;
        max_units = std::max(max_units, units);
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw ValidationError("demand probabilities must sum to 1, got " + std::to_string(total));
    }
    // Tail sums: entry j is P(demand >= j), accumulated from the top so each
    // entry is a plain sum of input probabilities.
    std::vector<double> tails(max_units, 0.0);
    double tail = 0.0;
    for (unsigned j = max_units; j >= 1; --j) {
        const auto it = dist.find(j);
        if (it != dist.end()) {
            tail += it->second;
        }
        tails[j - 1] = tail;
    }
    return tails;
}

TimeBundle uniform_time_bundle(const PricingParams& params, std::size_t m_days) {
    if (m_days == 0) {
        throw ValidationError("time bundle needs at least one day");
    }
    const double p = 1.0 / static_cast<double>(m_days);
    const double premium = pay_if_not(params, p);
    const double total = static_cast<double>(m_days) * premium + pay_if_use(params, p) - premium;
    return TimeBundle{p, total};
}

}  // namespace resopt::pricing
