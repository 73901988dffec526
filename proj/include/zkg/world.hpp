#pragma once

#include <memory>
#include <random>

#include "zkg/pipeline.hpp"

namespace zkg {

/// A named participant. Keys are derived from the world seed and the name.
struct User {
    std::string name;
    SecretKey key;
    L1Address address;
};

struct ConservationCheck {
    Amount group_balances = 0;
    Amount pending = 0;
    Amount queued = 0;
    Amount in_flight = 0;
    Amount deposited = 0;
    Amount withdrawn = 0;
    Amount exodus_claimed = 0;

    [[nodiscard]] bool holds() const {
        return group_balances + pending + queued + in_flight == deposited - withdrawn + exodus_claimed;
    }
};

/// User transaction parameters. Unused fields are ignored per op type.
struct TxRequest {
    OpType type = OpType::Transfer;
    std::string to;  // recipient user name
    TokenId token;
    TokenId token_b;
    Amount amount = 0;
    Amount amount_b = 0;
    Fee fee = 0;
    Fee fee_b = 0;
    TokenId fee_token;
    GroupId destination;
    std::string content;
    std::optional<Nonce> nonce;
    /// Group the tx is signed for, when it should differ from the target group.
    std::optional<GroupId> sign_group;
};

/// A contract, one validator node per group and a deterministic user set.
class World {
public:
    explicit World(std::uint64_t seed, ContractMode mode = ContractMode::Modified,
                   GasConfig config = GasConfig::defaults(), ContractOptions options = {},
                   std::size_t prover_workers = 0);

    [[nodiscard]] std::uint64_t seed() const { return seed_; }
    [[nodiscard]] L1Contract& contract() { return *contract_; }
    [[nodiscard]] const L1Contract& contract() const { return *contract_; }
    [[nodiscard]] ValidatorNode& node(GroupId g);
    [[nodiscard]] const ValidatorNode& node(GroupId g) const;
    [[nodiscard]] std::size_t group_count() const { return nodes_.size(); }

    const User& user(const std::string& name);
    [[nodiscard]] std::optional<AccountId> account_of(GroupId g, const std::string& name);

    GroupId create_group(const std::string& governor, const std::string& validator, bool permissioned = false,
                         DataMode data_mode = DataMode::ZkRollup);
    void set_whitelist(const std::string& governor, GroupId g, const std::string& name, bool allowed);
    std::uint64_t deposit(const std::string& name, GroupId g, TokenId token, Amount amount);
    std::uint64_t request_exit(const std::string& name, GroupId g, TokenId token, FullExitKind kind,
                               const std::string& target = {}, std::optional<GroupId> destination = std::nullopt);
    Amount withdraw_pending(const std::string& name, TokenId token);

    /// Signs a user transaction against the validator's current view.
    SignedTransaction make_tx(GroupId g, const std::string& name, const TxRequest& req);
    Admission submit(GroupId g, const SignedTransaction& stx);
    Admission submit(GroupId g, const std::string& name, const TxRequest& req);

    CycleReport run_cycle(GroupId g, std::size_t n_blocks, std::size_t capacity, std::size_t aggregate_n);
    [[nodiscard]] const std::vector<CycleReport>& cycles() const { return cycles_; }

    /// Submits up to `count` generated transactions; returns how many were admitted.
    std::size_t random_txs(GroupId g, std::size_t count);

    /// Replays every group's committed pubdata and compares the root at each
    /// block boundary with the validator's and the contract's. Empty on success.
    [[nodiscard]] std::string replay_mismatch() const;
    [[nodiscard]] ConservationCheck conservation() const;
    /// Hash over every group's roots and counters, pending balances and the gas ledger.
    [[nodiscard]] Hash digest() const;

    [[nodiscard]] std::mt19937_64& rng() { return rng_; }

private:
    std::uint64_t seed_;
    std::unique_ptr<L1Contract> contract_;
    std::unique_ptr<ProverPool> pool_;
    std::vector<std::unique_ptr<ValidatorNode>> nodes_;
    std::map<std::string, User> users_;
    std::vector<std::string> user_order_;
    std::vector<CycleReport> cycles_;
    std::mt19937_64 rng_;
    std::uint64_t fresh_users_ = 0;
};

}  // namespace zkg
