#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "zkg/transaction.hpp"

namespace zkg {

enum class GasCategory { CommitBase, ProveBase, ExecuteBase, CommitExtra, ExecuteExtra, External };
inline constexpr std::array<GasCategory, 6> kAllCategories = {
    GasCategory::CommitBase,  GasCategory::ProveBase,    GasCategory::ExecuteBase,
    GasCategory::CommitExtra, GasCategory::ExecuteExtra, GasCategory::External,
};
std::string_view category_name(GasCategory c);

/// Baseline is the single-rollup contract; Modified adds groups, whitelists
/// and the cross-group ops.
enum class ContractMode { Baseline, Modified };
std::string_view mode_name(ContractMode m);

/// Token 0 is charged with the ETH profile, every other fungible token with
/// the ERC20 profile.
enum class TokenProfile { Eth, Erc20 };
inline TokenProfile profile_of(TokenId t) { return t.value == 0 ? TokenProfile::Eth : TokenProfile::Erc20; }

/// Affine gas model of one contract build. Block-level phases cost
/// call + per_block (+ per_byte * pubdata) and are split evenly over the
/// blocks of the call.
struct GasConstants {
    std::uint64_t deploy = 0;
    std::uint64_t create_group = 0;
    std::uint64_t set_whitelist = 0;

    std::uint64_t commit_call = 0;
    std::uint64_t commit_per_block = 0;
    std::uint64_t commit_per_byte = 0;
    std::uint64_t commit_onchain_op = 0;
    std::uint64_t commit_priority_op = 0;

    std::uint64_t prove_call = 0;
    std::uint64_t prove_per_block = 0;

    std::uint64_t execute_call = 0;
    std::uint64_t execute_per_block = 0;
    std::uint64_t execute_withdraw_eth = 0;
    std::uint64_t execute_withdraw_erc20 = 0;
    std::uint64_t execute_withdraw_nft = 0;
    std::uint64_t execute_change_group = 0;

    std::uint64_t deposit_eth = 0;
    std::uint64_t deposit_erc20 = 0;
    std::uint64_t full_exit_request = 0;
    std::uint64_t withdraw_pending_eth = 0;
    std::uint64_t withdraw_pending_erc20 = 0;
    std::uint64_t exodus_withdraw = 0;

    friend bool operator==(const GasConstants&, const GasConstants&) = default;
};

struct GasConfig {
    GasConstants baseline;
    GasConstants modified;

    [[nodiscard]] const GasConstants& profile(ContractMode m) const {
        return m == ContractMode::Baseline ? baseline : modified;
    }

    static GasConfig defaults();
    /// Flat `mode.key = integer` lines; `#` starts a comment. Keys not present
    /// keep their default value.
    static GasConfig parse(std::string_view text);
    static GasConfig load(const std::filesystem::path& path);
    [[nodiscard]] std::string to_text() const;

    friend bool operator==(const GasConfig&, const GasConfig&) = default;
};

struct GasCharge {
    std::optional<GroupId> group;
    std::string function;
    GasCategory category;
    std::uint64_t gas = 0;
    std::optional<std::uint64_t> block;
    /// Position of the op in its block, for per-op extras.
    std::optional<std::uint32_t> op_index;
    /// For external calls: the op the call requests.
    std::optional<OpType> op_type;
    std::optional<TokenId> token;
};

struct GasReportRow {
    std::optional<GroupId> group;
    std::string function;
    GasCategory category;
    std::uint64_t gas = 0;
    friend bool operator==(const GasReportRow&, const GasReportRow&) = default;
};

class GasMeter {
public:
    explicit GasMeter(GasConstants constants) : constants_(constants) {}

    [[nodiscard]] const GasConstants& constants() const { return constants_; }
    void charge(GasCharge c) { ledger_.push_back(std::move(c)); }
    [[nodiscard]] const std::vector<GasCharge>& ledger() const { return ledger_; }
    [[nodiscard]] std::uint64_t total() const;

    /// Ledger summed by (group, function, category), in first-seen order.
    [[nodiscard]] std::vector<GasReportRow> report() const;

private:
    GasConstants constants_;
    std::vector<GasCharge> ledger_;
};

/// CSV with header `group,function,category,gas`.
std::string gas_report_csv(const std::vector<GasReportRow>& rows);

}  // namespace zkg
