#pragma once

#include <nlohmann/json.hpp>

#include "zkg/report.hpp"

namespace zkg {

struct ScenarioAction {
    std::size_t line = 0;
    nlohmann::json body;
};

/// A JSON scenario file: optional seed and mode, then an ordered action list.
struct Scenario {
    std::optional<std::uint64_t> seed;
    ContractMode mode = ContractMode::Modified;
    std::size_t prover_workers = 0;
    std::vector<ScenarioAction> actions;

    /// Throws Parse errors that carry the line number.
    static Scenario parse(std::string_view text);
    static Scenario load(const std::filesystem::path& path);
};

struct ScenarioResult {
    CostReport report;
    Hash digest;
    std::vector<std::string> log;
};

/// `seed` overrides the file's seed. Runtime errors name the failing action.
ScenarioResult run_scenario(const Scenario& scenario, std::optional<std::uint64_t> seed = std::nullopt,
                            const GasConfig& config = GasConfig::defaults());

/// Same, keeping the world for inspection.
ScenarioResult run_scenario(World& world, const Scenario& scenario);

/// A seeded random action sequence over a few groups and users.
Scenario random_scenario(std::uint64_t seed);

}  // namespace zkg
