#include "resopt/seller_opt.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "resopt/errors.hpp"

namespace resopt::seller {

namespace {

constexpr double kGridStep = 0.01;
constexpr double kRefineTol = 1e-5;
// Revenue gaps below this are reported as a tie: far above optimizer noise,
// well below the differences the comparison is meant to surface.
constexpr double kTieTolerance = 5e-5;

void check_unit(double x, const char* what) {
    if (!(x >= 0.0 && x <= 1.0)) {
        throw ValidationError(std::string(what) + " must lie in [0,1], got " + std::to_string(x));
    }
}

// Revenue collected from buyers at a given payment threshold when values are
// uniform on [0,1]: the mass with v >= t buys and pays t.
double uniform_value_revenue(double threshold) { return (1.0 - threshold) * threshold; }

// Exact integral of (1 - min(C1, C2 p)) min(C1, C2 p) over p in [lo, hi].
double direct_revenue_integral(double c1, double c2, double lo, double hi) {
    if (c2 <= 0.0 || c1 <= 0.0) {
        return 0.0;
    }
    const double knee = c1 / c2;  // below: spot branch, above: reservation branch
    const double spot_hi = std::clamp(knee, lo, hi);
    auto spot_antiderivative = [&](double p) {
        return 0.5 * c2 * p * p - c2 * c2 * p * p * p / 3.0;
    };
    double total = spot_antiderivative(spot_hi) - spot_antiderivative(lo);
    total += uniform_value_revenue(c1) * (hi - spot_hi);
    return total;
}

double option_threshold(const OptionPricing& pricing, double p) {
    return pricing.price_scale * (p + 0.5 * pricing.curvature * p * (1.0 - p));
}

// 5-node Gauss-Legendre: exact for the quartic option integrand.
constexpr double kGlNode[5] = {-0.906179845938664, -0.5384693101056831, 0.0,
                               0.5384693101056831, 0.906179845938664};
constexpr double kGlWeight[5] = {0.23692688505618908, 0.47862867049936647, 0.5688888888888889,
                                 0.47862867049936647, 0.23692688505618908};

double option_revenue_integral(const OptionPricing& pricing, double lo, double hi) {
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    double total = 0.0;
    for (int i = 0; i < 5; ++i) {
        total += kGlWeight[i] * uniform_value_revenue(option_threshold(pricing, mid + half * kGlNode[i]));
    }
    return total * half;
}

void check_direct(const DirectPricing& pricing) {
    check_unit(pricing.reservation_price, "reservation price");
    check_unit(pricing.spot_price, "spot price");
    if (pricing.reservation_price > pricing.spot_price) {
        throw ValidationError("reservation price must not exceed the spot price");
    }
}

void check_options(const OptionPricing& pricing) {
    check_unit(pricing.price_scale, "price scale");
    if (!(pricing.curvature >= 1.0 && pricing.curvature <= 2.0)) {
        throw ValidationError("option curvature must lie in [1,2], got " +
                              std::to_string(pricing.curvature));
    }
}

template <typename Threshold>
double tabulated_revenue(const TabulatedP& tab, Threshold&& threshold) {
    double total = 0.0;
    for (std::size_t i = 0; i < tab.probability.size(); ++i) {
        total += tab.weight[i] * uniform_value_revenue(threshold(tab.probability[i]));
    }
    return total;
}

// Maximum of f on [lo, hi] by golden-section search, probing the interval
// endpoints as well so boundary optima come out exact.  Plateaus resolve
// toward the left end.
double golden_max(const std::function<double(double)>& f, double lo, double hi) {
    constexpr double inv_phi = 0.6180339887498949;
    double a = lo;
    double b = hi;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1);
    double f2 = f(x2);
    while (b - a > kRefineTol) {
        if (f1 >= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    double best_x = lo;
    double best_f = f(lo);
    for (const double x : {0.5 * (a + b), hi}) {
        const double fx = f(x);
        if (fx > best_f) {
            best_f = fx;
            best_x = x;
        }
    }
    return best_x;
}

// Shared 2-D optimizer: coarse scan of the feasible box then alternating
// per-coordinate golden refinement.  `lo2` gives the second coordinate's
// lower bound as a function of the first (C2 >= C1 for direct selling).
struct SearchResult {
    double x1 = 0.0;
    double x2 = 0.0;
    double revenue = 0.0;
};

SearchResult maximize_2d(const std::function<double(double, double)>& revenue, double x1_lo,
                         double x1_hi, const std::function<double(double)>& lo2,
                         const std::function<double(double)>& hi1, double x2_hi,
                         std::vector<GridPoint>* grid_out) {
    SearchResult best{x1_lo, lo2(x1_lo), revenue(x1_lo, lo2(x1_lo))};
    const auto n1 = static_cast<std::size_t>(std::round((x1_hi - x1_lo) / kGridStep));
    for (std::size_t i = 0; i <= n1; ++i) {
        const double x1 = std::min(x1_hi, x1_lo + static_cast<double>(i) * kGridStep);
        const double x2_lo = lo2(x1);
        const auto n2 = static_cast<std::size_t>(std::round((x2_hi - x2_lo) / kGridStep));
        for (std::size_t j = 0; j <= n2; ++j) {
            const double x2 = std::min(x2_hi, x2_lo + static_cast<double>(j) * kGridStep);
            const double r = revenue(x1, x2);
            if (grid_out) {
                grid_out->push_back(GridPoint{x1, x2, r});
            }
            if (r > best.revenue) {
                best = SearchResult{x1, x2, r};
            }
        }
    }

    // Alternate coordinate refinements; accept strict improvements, or equal
    // revenue at a smaller coordinate (canonical representative).
    for (int round = 0; round < 3; ++round) {
        {
            const double lo = std::max(x1_lo, best.x1 - kGridStep);
            const double hi = std::min(std::min(x1_hi, hi1(best.x2)), best.x1 + kGridStep);
            const double x = golden_max([&](double v) { return revenue(v, best.x2); }, lo, hi);
            const double r = revenue(x, best.x2);
            if (r > best.revenue || (r == best.revenue && x < best.x1)) {
                best.x1 = x;
                best.revenue = r;
            }
        }
        {
            const double lo = std::max(lo2(best.x1), best.x2 - kGridStep);
            const double hi = std::min(x2_hi, best.x2 + kGridStep);
            const double x = golden_max([&](double v) { return revenue(best.x1, v); }, lo, hi);
            const double r = revenue(best.x1, x);
            if (r > best.revenue || (r == best.revenue && x < best.x2)) {
                best.x2 = x;
                best.revenue = r;
            }
        }
    }
    return best;
}

}  // namespace

void validate_density(const PopulationDensity& density) {
    if (const auto* rect = std::get_if<UniformRect>(&density)) {
        check_unit(rect->lo, "probability lower bound");
        check_unit(rect->hi, "probability upper bound");
        if (rect->lo > rect->hi) {
            throw ValidationError("probability interval must satisfy lo <= hi");
        }
        return;
    }
    const auto& tab = std::get<TabulatedP>(density);
    if (tab.probability.empty() || tab.probability.size() != tab.weight.size()) {
        throw ValidationError("tabulated density needs matching, non-empty nodes and weights");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < tab.probability.size(); ++i) {
        check_unit(tab.probability[i], "tabulated probability");
        if (!(tab.weight[i] >= 0.0)) {
            throw ValidationError("tabulated weight must be non-negative");
        }
        total += tab.weight[i];
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw ValidationError("tabulated density must integrate to 1, got " +
                              std::to_string(total));
    }
}

double revenue_direct(const DirectPricing& pricing, const PopulationDensity& density) {
    check_direct(pricing);
    validate_density(density);
    if (const auto* rect = std::get_if<UniformRect>(&density)) {
        if (rect->hi == rect->lo) {  // point mass
            return uniform_value_revenue(
                std::min(pricing.reservation_price, pricing.spot_price * rect->lo));
        }
        return direct_revenue_integral(pricing.reservation_price, pricing.spot_price, rect->lo,
                                       rect->hi) /
               (rect->hi - rect->lo);
    }
    return tabulated_revenue(std::get<TabulatedP>(density), [&](double p) {
        return std::min(pricing.reservation_price, pricing.spot_price * p);
    });
}

double revenue_options(const OptionPricing& pricing, const PopulationDensity& density) {
    check_options(pricing);
    validate_density(density);
    if (const auto* rect = std::get_if<UniformRect>(&density)) {
        if (rect->hi == rect->lo) {
            return uniform_value_revenue(option_threshold(pricing, rect->lo));
        }
        return option_revenue_integral(pricing, rect->lo, rect->hi) / (rect->hi - rect->lo);
    }
    return tabulated_revenue(std::get<TabulatedP>(density),
                             [&](double p) { return option_threshold(pricing, p); });
}

DirectOptimum optimize_direct(const PopulationDensity& density, std::vector<GridPoint>* grid_out) {
    validate_density(density);
    const auto result = maximize_2d(
        [&](double c1, double c2) { return revenue_direct(DirectPricing{c1, c2}, density); }, 0.0,
        1.0, [](double c1) { return c1; }, [](double c2) { return c2; }, 1.0, grid_out);
    return DirectOptimum{DirectPricing{result.x1, result.x2}, result.revenue};
}

OptionOptimum optimize_options(const PopulationDensity& density, std::vector<GridPoint>* grid_out) {
    validate_density(density);
    const auto result = maximize_2d(
        [&](double c1, double k) { return revenue_options(OptionPricing{c1, k}, density); }, 0.0,
        1.0, [](double) { return 1.0; }, [](double) { return 1.0; }, 2.0, grid_out);
    return OptionOptimum{OptionPricing{result.x1, result.x2}, result.revenue};
}

std::vector<ComparisonRow> compare_table(std::span<const std::pair<double, double>> intervals) {
    std::vector<ComparisonRow> rows;
    rows.reserve(intervals.size());
    for (const auto& [lo, hi] : intervals) {
        ComparisonRow row;
        row.lo = lo;
        row.hi = hi;
        try {
            const PopulationDensity density = UniformRect{lo, hi};
            validate_density(density);
            row.direct_revenue = optimize_direct(density).revenue;
            row.option_revenue = optimize_options(density).revenue;
            if (row.option_revenue > row.direct_revenue + kTieTolerance) {
                row.winner = "options";
            } else if (row.direct_revenue > row.option_revenue + kTieTolerance) {
                row.winner = "direct";
            } else {
                row.winner = "tie";
            }
        } catch (const Error& e) {
            row.error = e.what();
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace resopt::seller
