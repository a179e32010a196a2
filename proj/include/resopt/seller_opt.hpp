#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace resopt::seller {

/// Buyer population with value v uniform on [0,1], independent of the use
/// probability p which is uniform on [lo, hi].  lo == hi degenerates to a
/// point mass at that probability.
struct UniformRect {
    double lo = 0.0;  // a
    double hi = 1.0;  // b
};

/// Tabulated marginal over p (v stays uniform on [0,1]): weight[i] is the
/// population mass at probability[i].  Weights must sum to 1.
struct TabulatedP {
    std::vector<double> probability;
    std::vector<double> weight;
};

using PopulationDensity = std::variant<UniformRect, TabulatedP>;

void validate_density(const PopulationDensity& density);

/// Benchmark scheme: a reservation price paid in period 1 or a spot price
/// per unit of probability, whichever is cheaper for the buyer.
struct DirectPricing {
    double reservation_price = 0.0;  // C1
    double spot_price = 0.0;         // C2, with C1 <= C2 <= 1
};

/// Option scheme: the two-period payment schedule scaled by price_scale,
/// with curvature restricted to the feasible box [1, 2].
struct OptionPricing {
    double price_scale = 0.0;  // C1
    double curvature = 1.0;    // k
};

/// Expected revenue per user under direct selling: buyers purchase when
/// their value covers min(C1, C2*p) and pay exactly that threshold.
double revenue_direct(const DirectPricing& pricing, const PopulationDensity& density);

/// Expected revenue per user under option selling: buyers purchase when
/// their value covers the scaled expected payment w(C1, k, p).
double revenue_options(const OptionPricing& pricing, const PopulationDensity& density);

struct GridPoint {
    double x1 = 0.0;
    double x2 = 0.0;
    double revenue = 0.0;
};

struct DirectOptimum {
    DirectPricing pricing;
    double revenue = 0.0;
};

struct OptionOptimum {
    OptionPricing pricing;
    double revenue = 0.0;
};

/// Deterministic grid search (step 0.01) followed by per-coordinate
/// golden-section refinement to 1e-5.  Ties resolve to the smallest C1,
/// then the smallest second coordinate.
DirectOptimum optimize_direct(const PopulationDensity& density,
                              std::vector<GridPoint>* grid_out = nullptr);
OptionOptimum optimize_options(const PopulationDensity& density,
                               std::vector<GridPoint>* grid_out = nullptr);

struct ComparisonRow {
    double lo = 0.0;
    double hi = 0.0;
    double direct_revenue = 0.0;
    double option_revenue = 0.0;
    std::string winner;
    std::optional<std::string> error;  // set when the interval is invalid
};

/// Optimizes both schemes over each p-interval (v uniform).  Invalid
/// intervals are reported in their row; the remaining rows still compute.
std::vector<ComparisonRow> compare_table(std::span<const std::pair<double, double>> intervals);

}  // namespace resopt::seller
