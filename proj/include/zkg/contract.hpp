#pragma once

#include <deque>
#include <map>
#include <mutex>
#include <set>
#include <span>

#include "zkg/gas.hpp"
#include "zkg/proof.hpp"
#include "zkg/state_tree.hpp"

namespace zkg {

enum class DataMode { ZkRollup, Validium };

struct GroupConfig {
    GroupId id;
    bool permissioned = false;
    DataMode data_mode = DataMode::ZkRollup;
    L1Address validator;
    L1Address governor;
};

struct PriorityRequest {
    std::uint64_t serial = 0;
    /// Deposit, FullExit, ForcedExit or FullChangeGroup, tagged with the group.
    Transaction op;
    /// Group's committed block count when the request was queued.
    std::uint64_t enqueued_at = 0;
    /// Value the request holds on the contract (deposits only).
    Amount locked = 0;
};

/// What a validator submits per block at commit time.
struct CommitInfo {
    GroupId group;
    std::uint64_t number = 0;
    std::size_t capacity_chunks = 0;
    Hash old_root;
    Hash new_root;
    Bytes pubdata;
};

struct CommittedBlock {
    CommitInfo info;
    Hash commitment;
    std::vector<OpType> op_types;
    /// Position in the block of each on-chain op.
    std::vector<std::pair<std::uint32_t, OnchainOp>> onchain_ops;
};

enum class FullExitKind { FullExit, ForcedExit, FullChangeGroup };

struct ContractOptions {
    /// Committed blocks a priority request may wait before the group freezes.
    std::uint64_t priority_expiry_blocks = 100;
    std::uint64_t setup_seed = 0;
};

struct GroupRecord {
    GroupConfig config;
    Hash stored_root = empty_root();
    Hash committed_root = empty_root();
    std::uint64_t committed = 0;
    std::uint64_t proven = 0;
    std::uint64_t executed = 0;
    std::vector<CommittedBlock> blocks;
    std::deque<PriorityRequest> queue;
    AccessPolicy policy;
    bool frozen = false;
    /// Account ownership learned from committed pubdata.
    std::map<AccountId, L1Address> known_accounts;
    std::set<AccountId> keyed_accounts;
    std::set<std::pair<AccountId, TokenId>> exodus_claimed;
};

/// Simulated L1 contract. Every entry point runs under one lock, so calls are
/// applied in a single total order and never observe a partial call.
class L1Contract {
public:
    L1Contract(ContractMode mode, GasConfig config = GasConfig::defaults(), ContractOptions options = {});

    L1Contract(const L1Contract&) = delete;
    L1Contract& operator=(const L1Contract&) = delete;

    GroupId create_group(const L1Address& caller, bool permissioned, DataMode data_mode,
                         const L1Address& validator);
    void set_whitelist(const L1Address& caller, GroupId group, const L1Address& address, bool allowed);
    std::uint64_t deposit(const L1Address& caller, GroupId group, TokenId token, Amount amount);
    /// `account` is the caller's account (FullExit/FullChangeGroup) or the
    /// locked target account (ForcedExit).
    std::uint64_t request_full_exit(const L1Address& caller, GroupId group, AccountId account, TokenId token,
                                    FullExitKind kind, std::optional<GroupId> destination = std::nullopt);
    void commit_blocks(const L1Address& caller, std::span<const CommitInfo> blocks);
    void prove_blocks(const L1Address& caller, const AggregatedProof& proof, std::uint64_t first,
                      std::uint64_t last);
    void execute_blocks(const L1Address& caller, std::uint64_t first, std::uint64_t last);
    Amount withdraw_pending(const L1Address& caller, TokenId token);

    /// Frozen groups only: claims a balance proven against the last executed root.
    Amount exodus_withdraw(const L1Address& caller, GroupId group, const InclusionProof& proof);
    /// Frozen groups only: returns queued deposits to their owners' pending balance.
    void cancel_outstanding_deposits(GroupId group);

    // Views. Each takes the lock and returns a copy.
    [[nodiscard]] ContractMode mode() const { return mode_; }
    [[nodiscard]] const ProvingSystem& proving_system() const { return proving_; }
    [[nodiscard]] std::size_t group_count() const;
    [[nodiscard]] GroupConfig group_config(GroupId g) const;
    [[nodiscard]] std::optional<GroupId> group_of_validator(const L1Address& v) const;
    [[nodiscard]] Hash stored_root(GroupId g) const;
    [[nodiscard]] Hash committed_root(GroupId g) const;
    [[nodiscard]] std::uint64_t committed_count(GroupId g) const;
    [[nodiscard]] std::uint64_t proven_count(GroupId g) const;
    [[nodiscard]] std::uint64_t executed_count(GroupId g) const;
    [[nodiscard]] bool frozen(GroupId g) const;
    [[nodiscard]] AccessPolicy policy(GroupId g) const;
    [[nodiscard]] bool whitelisted(GroupId g, const L1Address& a) const;
    [[nodiscard]] std::vector<PriorityRequest> priority_queue(GroupId g) const;
    [[nodiscard]] std::vector<CommittedBlock> committed_blocks(GroupId g) const;
    [[nodiscard]] Amount pending_balance(const L1Address& owner, TokenId token) const;
    [[nodiscard]] std::map<std::pair<L1Address, TokenId>, Amount> pending_balances() const;

    /// Value accounting over fungible tokens.
    [[nodiscard]] Amount total_deposited() const;
    [[nodiscard]] Amount total_withdrawn() const;
    [[nodiscard]] Amount total_pending() const;
    [[nodiscard]] Amount total_queued() const;
    /// On-chain op amounts committed but not yet executed.
    [[nodiscard]] Amount total_in_flight() const;
    [[nodiscard]] Amount total_exodus_claimed() const;

    [[nodiscard]] std::vector<GasCharge> gas_ledger() const;
    [[nodiscard]] std::vector<GasReportRow> gas_report() const;
    [[nodiscard]] std::uint64_t gas_total() const;

private:
    GroupRecord& record(GroupId g);
    const GroupRecord& record(GroupId g) const;
    GroupId bound_group(const L1Address& caller) const;
    std::uint64_t enqueue(GroupRecord& rec, Transaction op, Amount locked);
    void credit_pending(const L1Address& owner, TokenId token, Amount amount);
    void route_cross_group(const OnchainOp& op);

    mutable std::mutex mu_;
    ContractMode mode_;
    ContractOptions options_;
    ProvingSystem proving_;
    GasMeter meter_;
    std::vector<GroupRecord> groups_;
    std::map<L1Address, GroupId> validator_of_;
    std::map<std::pair<L1Address, TokenId>, Amount> pending_;
    std::uint64_t next_serial_ = 0;
    Amount deposited_ = 0;
    Amount withdrawn_ = 0;
    Amount exodus_claimed_ = 0;
};

}  // namespace zkg
