#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>

#include "resopt/mechanism_sim.hpp"
#include "resopt/multiperiod.hpp"
#include "resopt/pricing.hpp"

namespace resopt::scenario {

/// m-period mechanism section.  Validated on load; the simulator itself only
/// runs the two- and three-period games, so simulate rejects this variant.
struct MPeriodMechanism {
    double spot_ratio = 2.0;
    double curvature = 1.0;
    double beta = 0.5;
    std::size_t periods = 3;
};

using Mechanism =
    std::variant<pricing::PricingParams, multiperiod::ThreePeriodParams, MPeriodMechanism>;

/// A fully validated scenario document: mechanism, population, and run
/// sections.  Unknown keys and out-of-range values are rejected on load.
struct Scenario {
    Mechanism mechanism;
    sim::Population population;
    std::size_t n_users = 0;
    std::size_t replications = 1;
    std::uint64_t seed = 0;
    sim::CostModel cost_model = sim::CostModel::forfeit;
    sim::Strategy strategy = sim::Truthful{};

    /// Assembles the simulator configuration.  Throws ValidationError for
    /// m-period mechanisms or mechanism/population mismatches.
    sim::SimConfig to_sim_config() const;
};

/// Parses and validates a scenario JSON document from disk.  Relative
/// users_csv paths resolve against the scenario file's directory.
Scenario load_scenario(const std::filesystem::path& path);

/// Same, from an in-memory JSON string (used by tests).
Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir = ".");

/// Reads a user-list CSV produced by `simulate --dump-users`: header
/// `p[,v]` for two-period users or `p1,p21,p22[,v]` for three-period ones.
sim::Population load_users_csv(const std::filesystem::path& path);

}  // namespace resopt::scenario
