#include "zkg/state_tree.hpp"

namespace zkg {

namespace {

std::array<Hash, kTreeDepth + 1> build_defaults(const Hash& leaf) {
    std::array<Hash, kTreeDepth + 1> d;
    d[0] = leaf;
    for (std::size_t i = 1; i <= kTreeDepth; ++i) d[i] = hash_pair(d[i - 1], d[i - 1]);
    return d;
}

}  // namespace

Hash balance_leaf_hash(Amount amount) {
    Bytes b;
    put_amount(b, amount);
    return hash_bytes(b);
}

Hash account_leaf_hash(Nonce nonce, const L1Address& address, const PubKey& pubkey,
                       const Hash& balance_root) {
    Bytes n;
    put_be(n, nonce, 4);
    return hash_concat({n, address.view(), pubkey.view(), balance_root.view()});
}

const std::array<Hash, kTreeDepth + 1>& balance_defaults() {
    static const auto d = build_defaults(balance_leaf_hash(0));
    return d;
}

const std::array<Hash, kTreeDepth + 1>& account_defaults() {
    static const auto d = build_defaults(
        account_leaf_hash(0, L1Address{}, PubKey{}, balance_defaults()[kTreeDepth]));
    return d;
}

Hash empty_root() { return account_defaults()[kTreeDepth]; }

Hash SparseMerkleTree::node(std::size_t level, std::uint64_t index) const {
    const auto& m = levels_[level];
    auto it = m.find(index);
    return it == m.end() ? (*defaults_)[level] : it->second;
}

void SparseMerkleTree::set_leaf(std::uint32_t index, const Hash& value) {
    std::uint64_t idx = index;
    Hash cur = value;
    for (std::size_t level = 0;; ++level) {
        if (cur == (*defaults_)[level])
            levels_[level].erase(idx);
        else
            levels_[level][idx] = cur;
        if (level == kTreeDepth) break;
        Hash sibling = node(level, idx ^ 1);
        cur = (idx & 1) ? hash_pair(sibling, cur) : hash_pair(cur, sibling);
        idx >>= 1;
    }
}

std::vector<Hash> SparseMerkleTree::path(std::uint32_t index) const {
    std::vector<Hash> out;
    out.reserve(kTreeDepth);
    std::uint64_t idx = index;
    for (std::size_t level = 0; level < kTreeDepth; ++level) {
        out.push_back(node(level, idx ^ 1));
        idx >>= 1;
    }
    return out;
}

std::size_t SparseMerkleTree::stored_nodes() const {
    std::size_t n = 0;
    for (const auto& l : levels_) n += l.size();
    return n;
}

Hash root_from_path(const Hash& leaf, std::uint32_t index, const std::vector<Hash>& siblings) {
    Hash cur = leaf;
    std::uint64_t idx = index;
    for (const auto& s : siblings) {
        cur = (idx & 1) ? hash_pair(s, cur) : hash_pair(cur, s);
        idx >>= 1;
    }
    return cur;
}

Amount Account::balance(TokenId t) const {
    auto it = balances.find(t);
    return it == balances.end() ? 0 : it->second;
}

Hash Account::leaf_hash() const {
    return account_leaf_hash(nonce, address, pubkey, balance_tree.root());
}

const Account* GroupState::account(AccountId id) const {
    auto it = accounts_.find(id);
    return it == accounts_.end() ? nullptr : &it->second;
}

std::optional<AccountId> GroupState::find(const L1Address& address) const {
    auto it = by_address_.find(address);
    if (it == by_address_.end()) return std::nullopt;
    return it->second;
}

Amount GroupState::balance(AccountId id, TokenId token) const {
    const auto* a = account(id);
    return a ? a->balance(token) : 0;
}

const NftInfo* GroupState::nft(TokenId id) const {
    auto it = nfts_.find(id);
    return it == nfts_.end() ? nullptr : &it->second;
}

std::map<TokenId, Amount> GroupState::fungible_totals() const {
    std::map<TokenId, Amount> out;
    for (const auto& [id, acc] : accounts_)
        for (const auto& [tok, amt] : acc.balances)
            if (tok.fungible() && amt != 0) out[tok] += amt;
    return out;
}

Account& GroupState::ensure(AccountId id) { return accounts_[id]; }

void GroupState::refresh_leaf(AccountId id) { tree_.set_leaf(id.value, accounts_.at(id).leaf_hash()); }

AccountId GroupState::create_account(const L1Address& address) {
    if (next_account_.value == 0xffffffffu)
        throw RollupError(ErrorCode::CapacityExhausted, "account tree is full");
    if (by_address_.contains(address)) throw RollupError(ErrorCode::RecipientExists, "address already has an account");
    AccountId id = next_account_;
    next_account_ = AccountId{id.value + 1};
    auto& acc = ensure(id);
    acc.address = address;
    by_address_[address] = id;
    refresh_leaf(id);
    return id;
}

void GroupState::set_balance(AccountId id, TokenId token, Amount amount) {
    auto& acc = ensure(id);
    if (amount == 0)
        acc.balances.erase(token);
    else
        acc.balances[token] = amount;
    acc.balance_tree.set_leaf(token.value, balance_leaf_hash(amount));
    refresh_leaf(id);
}

void GroupState::set_nonce(AccountId id, Nonce nonce) {
    ensure(id).nonce = nonce;
    refresh_leaf(id);
}

void GroupState::set_pubkey(AccountId id, const PubKey& key) {
    ensure(id).pubkey = key;
    refresh_leaf(id);
}

TokenId GroupState::mint_nft(const NftInfo& info) {
    if (next_nft_.value == 0xffffffffu) throw RollupError(ErrorCode::CapacityExhausted, "NFT ids exhausted");
    TokenId id = next_nft_;
    next_nft_ = TokenId{id.value + 1};
    nfts_[id] = info;
    return id;
}

InclusionProof prove_inclusion(const GroupState& state, AccountId account,
                               std::optional<TokenId> token) {
    InclusionProof p;
    p.account = account;
    const Account* acc = state.account(account);
    static const Account kEmpty;
    const Account& a = acc ? *acc : kEmpty;
    p.nonce = a.nonce;
    p.address = a.address;
    p.pubkey = a.pubkey;
    p.balance_root = a.balance_tree.root();
    if (token)
        p.balance = InclusionProof::BalancePart{*token, a.balance(*token),
                                                a.balance_tree.path(token->value)};
    p.account_path = state.account_path(account);
    return p;
}

bool verify_inclusion(const Hash& root, const InclusionProof& proof) {
    if (proof.account_path.size() != kTreeDepth) return false;
    if (proof.balance) {
        if (proof.balance->path.size() != kTreeDepth) return false;
        auto br = root_from_path(balance_leaf_hash(proof.balance->amount), proof.balance->token.value,
                                 proof.balance->path);
        if (br != proof.balance_root) return false;
    }
    auto leaf = account_leaf_hash(proof.nonce, proof.address, proof.pubkey, proof.balance_root);
    return root_from_path(leaf, proof.account.value, proof.account_path) == root;
}

}  // namespace zkg
