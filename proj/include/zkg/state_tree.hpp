#pragma once

#include <map>
#include <set>
#include <unordered_map>

#include "zkg/pubdata.hpp"
#include "zkg/transaction.hpp"

namespace zkg {

inline constexpr std::size_t kTreeDepth = 32;

/// Default node hashes per level for the two tree kinds. Index 0 is the empty
/// leaf, index 32 the empty subtree root.
const std::array<Hash, kTreeDepth + 1>& balance_defaults();
const std::array<Hash, kTreeDepth + 1>& account_defaults();

Hash balance_leaf_hash(Amount amount);
Hash account_leaf_hash(Nonce nonce, const L1Address& address, const PubKey& pubkey,
                       const Hash& balance_root);

/// Root of a group state with no accounts.
Hash empty_root();

/// Depth-32 sparse Merkle tree. Only nodes that differ from the level default
/// are stored, so the node set is a pure function of the leaf values.
class SparseMerkleTree {
public:
    explicit SparseMerkleTree(const std::array<Hash, kTreeDepth + 1>& defaults)
        : defaults_(&defaults) {}

    [[nodiscard]] Hash root() const { return node(kTreeDepth, 0); }
    [[nodiscard]] Hash leaf(std::uint32_t index) const { return node(0, index); }
    void set_leaf(std::uint32_t index, const Hash& value);
    /// Sibling hashes from the leaf level upward.
    [[nodiscard]] std::vector<Hash> path(std::uint32_t index) const;

    [[nodiscard]] std::size_t stored_nodes() const;

private:
    [[nodiscard]] Hash node(std::size_t level, std::uint64_t index) const;

    const std::array<Hash, kTreeDepth + 1>* defaults_;
    std::array<std::unordered_map<std::uint64_t, Hash>, kTreeDepth + 1> levels_;
};

Hash root_from_path(const Hash& leaf, std::uint32_t index, const std::vector<Hash>& siblings);

struct Account {
    Nonce nonce = 0;
    L1Address address;
    PubKey pubkey;  // all-zero when unset
    std::map<TokenId, Amount> balances;
    SparseMerkleTree balance_tree{balance_defaults()};

    [[nodiscard]] Amount balance(TokenId t) const;
    [[nodiscard]] Hash leaf_hash() const;
};

struct NftInfo {
    AccountId creator_account;
    L1Address creator_address;
    std::uint32_t serial_id = 0;
    Hash content_hash;
    friend bool operator==(const NftInfo&, const NftInfo&) = default;
};

/// One tenant rollup's account state. Account 0 collects fees.
class GroupState {
public:
    static constexpr AccountId kFeeAccount{0};

    explicit GroupState(GroupId group) : group_(group) {}

    [[nodiscard]] GroupId group() const { return group_; }
    [[nodiscard]] Hash root() const { return tree_.root(); }
    [[nodiscard]] const Account* account(AccountId id) const;
    [[nodiscard]] std::optional<AccountId> find(const L1Address& address) const;
    [[nodiscard]] Amount balance(AccountId id, TokenId token) const;
    [[nodiscard]] AccountId next_account_index() const { return next_account_; }
    [[nodiscard]] TokenId next_nft_id() const { return next_nft_; }
    [[nodiscard]] const NftInfo* nft(TokenId id) const;
    [[nodiscard]] const std::map<AccountId, Account>& accounts() const { return accounts_; }
    [[nodiscard]] std::vector<Hash> account_path(AccountId id) const { return tree_.path(id.value); }

    /// Sum of fungible balances over every account, per token.
    [[nodiscard]] std::map<TokenId, Amount> fungible_totals() const;

    AccountId create_account(const L1Address& address);
    void set_balance(AccountId id, TokenId token, Amount amount);
    void set_nonce(AccountId id, Nonce nonce);
    void set_pubkey(AccountId id, const PubKey& key);
    TokenId mint_nft(const NftInfo& info);

private:
    Account& ensure(AccountId id);
    void refresh_leaf(AccountId id);

    GroupId group_;
    SparseMerkleTree tree_{account_defaults()};
    std::map<AccountId, Account> accounts_;
    std::unordered_map<L1Address, AccountId> by_address_;
    AccountId next_account_{1};
    TokenId next_nft_{kNftTokenStart};
    std::map<TokenId, NftInfo> nfts_;
};

inline Hash state_root(const GroupState& s) { return s.root(); }

struct InclusionProof {
    AccountId account;
    Nonce nonce = 0;
    L1Address address;
    PubKey pubkey;
    Hash balance_root;
    std::vector<Hash> account_path;
    struct BalancePart {
        TokenId token;
        Amount amount = 0;
        std::vector<Hash> path;
    };
    std::optional<BalancePart> balance;
};

InclusionProof prove_inclusion(const GroupState& state, AccountId account,
                               std::optional<TokenId> token = std::nullopt);
bool verify_inclusion(const Hash& root, const InclusionProof& proof);

/// On-chain effect of an op, executed by the contract after proof.
struct OnchainOp {
    enum class Kind { WithdrawTo, WithdrawNftTo, FullExitTo, ForcedExitTo, ChangeGroupTo, FullChangeGroupTo };
    Kind kind;
    L1Address owner;
    TokenId token;
    Amount amount = 0;
    GroupId destination_group;
    friend bool operator==(const OnchainOp&, const OnchainOp&) = default;
};

std::string_view onchain_kind_name(OnchainOp::Kind k);
/// Derives the on-chain effect from a published op, if it has one.
std::optional<OnchainOp> onchain_effect(const Transaction& tx);

/// Permissioned-group access rule: whitelisted addresses have full rights,
/// everyone else keeps withdrawal-type rights only.
struct AccessPolicy {
    bool permissioned = false;
    std::set<L1Address> whitelist;

    [[nodiscard]] bool full_rights(const L1Address& a) const {
        return !permissioned || whitelist.contains(a);
    }
};

bool is_withdrawal_type(OpType t);

struct ApplyContext {
    /// Set when the op comes from the contract's priority queue.
    bool l1_authorized = false;
    /// Pubdata replay: no signatures, nonces are derived, policy is not consulted.
    bool replay = false;
    const AccessPolicy* policy = nullptr;
};

struct ApplyResult {
    /// The op with validator-assigned fields resolved (new account ids, exit amounts).
    Transaction applied;
    Bytes pubdata;
    std::optional<OnchainOp> onchain;
};

/// Applies one op. On error the state is left untouched.
ApplyResult apply_transaction(GroupState& state, const SignedTransaction& stx,
                              const ApplyContext& ctx = {});

/// Re-executes a pubdata stream (concatenated block pubdata) from `initial`.
GroupState replay_pubdata(const GroupState& initial, ByteView stream);
/// Same, from an empty group; returns the final root.
Hash replay_pubdata(const Hash& initial_root, ByteView stream, GroupId group);

}  // namespace zkg
