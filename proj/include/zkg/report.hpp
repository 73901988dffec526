#pragma once

#include "zkg/world.hpp"

namespace zkg {

/// Per-op-type gas across the six categories. Totals are sums over `count`
/// packed ops, except `external`, which sums over `external_calls` L1 requests.
struct CostRow {
    std::string mode;
    OpType type = OpType::Noop;
    /// "eth" or "erc20" for ops whose gas depends on the token, "-" otherwise.
    std::string token = "-";
    std::uint64_t count = 0;
    std::uint64_t external_calls = 0;
    std::array<std::uint64_t, 6> gas{};

    [[nodiscard]] double average(GasCategory c) const;
    [[nodiscard]] double average_total() const;
    [[nodiscard]] bool empty() const;
    friend bool operator==(const CostRow&, const CostRow&) = default;
};

struct CostReport {
    std::vector<CostRow> rows;
    std::map<std::string, double> metrics;

    [[nodiscard]] const CostRow* find(std::string_view mode, OpType type, std::string_view token = "-") const;
    /// Drops rows without any activity.
    void prune();
    friend bool operator==(const CostReport&, const CostReport&) = default;
};

bool token_profiled(OpType t);
std::string token_label(std::optional<TokenId> token, OpType t);

/// Rows for every op type (split by token profile where it matters) from
/// cycle attributions and the external charges in `ledger`.
CostReport build_cost_report(ContractMode mode, const std::vector<CycleReport>& cycles,
                             std::span<const GasCharge> ledger);

/// Op weights, e.g. "transfer", "all", "transfer:3,deposit:1".
struct TxMix {
    std::vector<std::pair<OpType, unsigned>> weights;
    static TxMix parse(std::string_view spec, ContractMode mode);
};

struct BenchOptions {
    std::size_t chunks = 390;
    std::size_t aggregate = 8;
    std::string mix = "transfer";
    ContractMode mode = ContractMode::Modified;
    std::uint64_t seed = 1;
    GasConfig config = GasConfig::defaults();
    std::size_t prover_workers = 0;
};

struct BenchResult {
    BenchOptions options;
    CostReport report;
    /// The measured cycle (setup cycles excluded).
    CycleReport cycle;
};

/// Sets up funded users, then runs one measured cycle of `aggregate` blocks
/// filled from the mix.
BenchResult bench(const BenchOptions& options);

struct ChangeGroupComparison {
    TokenProfile token = TokenProfile::Eth;
    /// ChangeGroup op in the source group plus the deposit's inclusion in the destination.
    std::uint64_t direct_gas = 0;
    /// Withdraw op, withdraw_pending, deposit call and the deposit's inclusion, across two rollups.
    std::uint64_t indirect_gas = 0;
    std::map<std::string, std::uint64_t> breakdown;
    [[nodiscard]] double savings() const;
};

ChangeGroupComparison compare_changegroup(TokenProfile token, const GasConfig& config = GasConfig::defaults(),
                                          std::size_t chunks = 390, std::size_t aggregate = 8);

/// Both contract modes benched on the full mix, plus the headline ratios.
CostReport headline_report(const GasConfig& config = GasConfig::defaults(), std::size_t chunks = 390,
                           std::size_t aggregate = 8, std::uint64_t seed = 1);

enum class ReportFormat { Csv, Text };
std::string render_report(const CostReport& report, ReportFormat format);
CostReport parse_report_csv(std::string_view csv);
/// Writes the rendered report; throws Config when the path is not writable.
void emit_report(const CostReport& report, ReportFormat format, const std::filesystem::path& path);

}  // namespace zkg
