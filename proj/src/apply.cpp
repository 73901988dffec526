#include <map>

#include "zkg/state_tree.hpp"

namespace zkg {

namespace {

[[noreturn]] void fail(ErrorCode code, const std::string& msg) { throw RollupError(code, msg); }

/// Buffered writes against a GroupState. Every check runs against the buffer,
/// and nothing touches the state until commit().
class Changeset {
public:
    explicit Changeset(const GroupState& s) : state_(s) {}

    Amount balance(AccountId a, TokenId t) const {
        auto it = balances_.find({a.value, t.value});
        return it != balances_.end() ? it->second : state_.balance(a, t);
    }

    void credit(AccountId a, TokenId t, Amount amt) {
        if (amt == 0) return;
        Amount cur = balance(a, t);
        if (cur > ~Amount{0} - amt) fail(ErrorCode::InvalidArgument, "balance overflow");
        balances_[{a.value, t.value}] = cur + amt;
    }

    void debit(AccountId a, TokenId t, Amount amt) {
        if (amt == 0) return;
        Amount cur = balance(a, t);
        if (cur < amt) fail(ErrorCode::InsufficientBalance, "insufficient balance");
        balances_[{a.value, t.value}] = cur - amt;
    }

    void bump_nonce(AccountId a) {
        const auto* acc = state_.account(a);
        nonces_[a.value] = (acc ? acc->nonce : 0) + 1;
    }

    void set_pubkey(AccountId a, const PubKey& k) { pubkey_ = std::pair{a, k}; }
    void create(AccountId expected, const L1Address& addr) { created_ = std::pair{expected, addr}; }
    void mint(const NftInfo& info) { nft_ = info; }

    void commit(GroupState& s) const {
        if (created_) {
            auto id = s.create_account(created_->second);
            if (id != created_->first) fail(ErrorCode::InvalidArgument, "account allocation mismatch");
        }
        if (nft_) s.mint_nft(*nft_);
        for (const auto& [key, amt] : balances_)
            s.set_balance(AccountId{key.first}, TokenId{key.second}, amt);
        for (const auto& [acc, n] : nonces_) s.set_nonce(AccountId{acc}, n);
        if (pubkey_) s.set_pubkey(pubkey_->first, pubkey_->second);
    }

private:
    const GroupState& state_;
    std::map<std::pair<std::uint32_t, std::uint32_t>, Amount> balances_;
    std::map<std::uint32_t, Nonce> nonces_;
    std::optional<std::pair<AccountId, PubKey>> pubkey_;
    std::optional<std::pair<AccountId, L1Address>> created_;
    std::optional<NftInfo> nft_;
};

const Account& require_account(const GroupState& s, AccountId id) {
    const auto* a = s.account(id);
    if (!a || (id != GroupState::kFeeAccount && a->address.is_zero()))
        fail(ErrorCode::UnknownAccount, "unknown account " + std::to_string(id.value));
    return *a;
}

void require_fungible(TokenId t) {
    if (!t.fungible()) fail(ErrorCode::InvalidArgument, "token must be fungible");
}

void require_packable(Amount amount, Fee fee) {
    if (!amount_packable(amount)) fail(ErrorCode::Encoding, "amount not packable");
    if (!fee_packable(fee)) fail(ErrorCode::Encoding, "fee not packable");
}

class Applier {
public:
    Applier(GroupState& s, const SignedTransaction& stx, const ApplyContext& ctx)
        : state_(s), stx_(stx), ctx_(ctx), tx_(stx.tx), cs_(s) {}

    ApplyResult run() {
        if (tx_.group != state_.group()) fail(ErrorCode::WrongGroup, "transaction signed for another group");
        if (tx_.is_priority() && !ctx_.l1_authorized && !ctx_.replay)
            fail(ErrorCode::NotPermitted, "priority operations must come from the L1 queue");
        std::visit([this](auto& o) { handle(o); }, tx_.op);
        ApplyResult r{tx_, encode_pubdata(tx_), onchain_effect(tx_)};
        cs_.commit(state_);
        return r;
    }

private:
    // Signature, key binding, nonce and access policy for the account that
    // authorizes a user op. `key` is the key that must have signed.
    void authorize(AccountId id, Nonce nonce, const PubKey& signer, bool check_key = true) {
        const auto& acc = require_account(state_, id);
        if (!ctx_.replay) {
            if (!signatures_checked_) {
                if (!verify_signature(stx_)) fail(ErrorCode::BadSignature, "signature does not verify");
                signatures_checked_ = true;
            }
            if (check_key && (acc.pubkey.is_zero() || acc.pubkey != signer))
                fail(ErrorCode::BadSignature, "signer is not the account key");
            if (nonce != acc.nonce) fail(ErrorCode::BadNonce, "nonce mismatch");
            if (ctx_.policy && !is_withdrawal_type(tx_.type()) && !ctx_.policy->full_rights(acc.address))
                fail(ErrorCode::NotWhitelisted, "account lacks rights in permissioned group");
        }
        cs_.bump_nonce(id);
    }

    void pay_fee(AccountId from, TokenId token, Fee fee) {
        if (fee == 0) return;
        require_fungible(token);
        cs_.debit(from, token, fee);
        cs_.credit(GroupState::kFeeAccount, token, fee);
    }

    template <typename T>
    void check_assigned(const T& published, const T& resolved) {
        if (ctx_.replay && published != resolved)
            fail(ErrorCode::Decoding, "published field disagrees with state");
    }

    void handle(op::Noop&) {}

    void handle(op::Deposit& o) {
        require_fungible(o.token);
        if (o.amount == 0) fail(ErrorCode::InvalidArgument, "zero deposit");
        if (o.owner.is_zero()) fail(ErrorCode::InvalidArgument, "zero owner address");
        AccountId id;
        if (auto existing = state_.find(o.owner)) {
            id = *existing;
        } else {
            id = state_.next_account_index();
            cs_.create(id, o.owner);
        }
        check_assigned(o.account, id);
        o.account = id;
        cs_.credit(id, o.token, o.amount);
    }

    void handle(op::TransferToNew& o) {
        require_fungible(o.token);
        require_packable(o.amount, o.fee);
        authorize(o.from, o.nonce, stx_.signer_pubkey);
        if (o.to_address.is_zero()) fail(ErrorCode::InvalidArgument, "zero recipient address");
        if (state_.find(o.to_address)) fail(ErrorCode::RecipientExists, "recipient already has an account");
        AccountId to = state_.next_account_index();
        check_assigned(o.to, to);
        o.to = to;
        cs_.debit(o.from, o.token, o.amount);
        pay_fee(o.from, o.token, o.fee);
        cs_.create(to, o.to_address);
        cs_.credit(to, o.token, o.amount);
    }

    void handle(op::Withdraw& o) {
        require_fungible(o.token);
        if (!fee_packable(o.fee)) fail(ErrorCode::Encoding, "fee not packable");
        if (o.amount == 0) fail(ErrorCode::InvalidArgument, "zero withdrawal");
        if (o.to_address.is_zero()) fail(ErrorCode::InvalidArgument, "zero destination address");
        authorize(o.account, o.nonce, stx_.signer_pubkey);
        cs_.debit(o.account, o.token, o.amount);
        pay_fee(o.account, o.token, o.fee);
    }

    void handle(op::Transfer& o) {
        require_fungible(o.token);
        require_packable(o.amount, o.fee);
        authorize(o.from, o.nonce, stx_.signer_pubkey);
        require_account(state_, o.to);
        cs_.debit(o.from, o.token, o.amount);
        pay_fee(o.from, o.token, o.fee);
        cs_.credit(o.to, o.token, o.amount);
    }

    // Whole-balance exit; a request that does not match the account exits zero.
    Amount exit_amount(AccountId id, const L1Address& owner, TokenId token, bool require_locked) const {
        const auto* acc = state_.account(id);
        if (!acc || acc->address.is_zero() || acc->address != owner || !token.fungible()) return 0;
        if (require_locked && !acc->pubkey.is_zero()) return 0;
        return acc->balance(token);
    }

    void handle(op::FullExit& o) {
        Amount amt = exit_amount(o.account, o.owner, o.token, false);
        check_assigned(o.amount, amt);
        o.amount = amt;
        cs_.debit(o.account, o.token, amt);
    }

    void handle(op::ChangePubKey& o) {
        const auto& acc = require_account(state_, o.account);
        if (o.new_pubkey.is_zero()) fail(ErrorCode::InvalidArgument, "zero public key");
        if (!fee_packable(o.fee)) fail(ErrorCode::Encoding, "fee not packable");
        // First key: authorized by the key behind the L1 address. Rotation: by the current key.
        bool first = acc.pubkey.is_zero();
        if (!ctx_.replay) {
            bool ok = first ? address_of(stx_.signer_pubkey) == acc.address : stx_.signer_pubkey == acc.pubkey;
            if (!ok) fail(ErrorCode::BadSignature, "signer may not change this key");
        }
        if (ctx_.replay && o.nonce != acc.nonce) fail(ErrorCode::Decoding, "published nonce disagrees");
        authorize(o.account, o.nonce, stx_.signer_pubkey, false);
        pay_fee(o.account, o.fee_token, o.fee);
        cs_.set_pubkey(o.account, o.new_pubkey);
    }

    void handle(op::ForcedExit& o) {
        Amount amt = exit_amount(o.target, o.target_address, o.token, true);
        check_assigned(o.amount, amt);
        o.amount = amt;
        cs_.debit(o.target, o.token, amt);
    }

    void handle(op::MintNFT& o) {
        if (!fee_packable(o.fee)) fail(ErrorCode::Encoding, "fee not packable");
        authorize(o.creator, o.nonce, stx_.signer_pubkey);
        require_account(state_, o.recipient);
        TokenId id = state_.next_nft_id();
        const auto& creator = require_account(state_, o.creator);
        cs_.mint(NftInfo{o.creator, creator.address, id.value - kNftTokenStart, o.content_hash});
        pay_fee(o.creator, o.fee_token, o.fee);
        cs_.credit(o.recipient, id, 1);
    }

    void handle(op::WithdrawNFT& o) {
        if (!o.token.nft()) fail(ErrorCode::InvalidArgument, "token is not an NFT");
        if (!fee_packable(o.fee)) fail(ErrorCode::Encoding, "fee not packable");
        if (o.to_address.is_zero()) fail(ErrorCode::InvalidArgument, "zero destination address");
        authorize(o.account, o.nonce, stx_.signer_pubkey);
        const auto* info = state_.nft(o.token);
        if (!info || info->creator_account != o.creator_account ||
            info->creator_address != o.creator_address || info->serial_id != o.serial_id ||
            info->content_hash != o.content_hash)
            fail(ErrorCode::InvalidArgument, "NFT metadata does not match");
        cs_.debit(o.account, o.token, 1);
        pay_fee(o.account, o.fee_token, o.fee);
    }

    void handle(op::Swap& o) {
        require_fungible(o.token_a);
        require_fungible(o.token_b);
        require_packable(o.amount_a, o.fee_a);
        require_packable(o.amount_b, o.fee_b);
        if (o.account_a == o.account_b) fail(ErrorCode::InvalidArgument, "swap needs two accounts");
        if (o.token_a == o.token_b) fail(ErrorCode::InvalidArgument, "swap needs two tokens");
        if (!ctx_.replay && !stx_.cosignature) fail(ErrorCode::BadSignature, "swap lacks counterparty signature");
        authorize(o.account_a, o.nonce_a, stx_.signer_pubkey);
        authorize(o.account_b, o.nonce_b, ctx_.replay ? PubKey{} : stx_.cosignature->signer_pubkey);
        cs_.debit(o.account_a, o.token_a, o.amount_a);
        pay_fee(o.account_a, o.token_a, o.fee_a);
        cs_.debit(o.account_b, o.token_b, o.amount_b);
        pay_fee(o.account_b, o.token_b, o.fee_b);
        cs_.credit(o.account_b, o.token_a, o.amount_a);
        cs_.credit(o.account_a, o.token_b, o.amount_b);
    }

    void check_groups(GroupId src, GroupId dst) {
        if (src != state_.group()) fail(ErrorCode::WrongGroup, "source group is not this group");
        if (src == dst) fail(ErrorCode::SameGroup, "source and destination group are equal");
    }

    void handle(op::ChangeGroup& o) {
        check_groups(o.source_group, o.destination_group);
        require_fungible(o.token);
        if (!fee_packable(o.fee)) fail(ErrorCode::Encoding, "fee not packable");
        if (o.amount == 0) fail(ErrorCode::InvalidArgument, "zero amount");
        if (o.to_address.is_zero()) fail(ErrorCode::InvalidArgument, "zero destination address");
        authorize(o.account, o.nonce, stx_.signer_pubkey);
        cs_.debit(o.account, o.token, o.amount);
        pay_fee(o.account, o.token, o.fee);
    }

    void handle(op::FullChangeGroup& o) {
        check_groups(o.source_group, o.destination_group);
        Amount amt = exit_amount(o.account, o.owner, o.token, false);
        check_assigned(o.amount, amt);
        o.amount = amt;
        cs_.debit(o.account, o.token, amt);
    }

    GroupState& state_;
    const SignedTransaction& stx_;
    const ApplyContext& ctx_;
    Transaction tx_;
    Changeset cs_;
    bool signatures_checked_ = false;
};

}  // namespace

bool is_withdrawal_type(OpType t) {
    switch (t) {
        case OpType::Withdraw:
        case OpType::WithdrawNFT:
        case OpType::FullExit:
        case OpType::ForcedExit:
        case OpType::ChangeGroup:
        case OpType::FullChangeGroup:
            return true;
        default:
            return false;
    }
}

std::string_view onchain_kind_name(OnchainOp::Kind k) {
    switch (k) {
        case OnchainOp::Kind::WithdrawTo: return "WithdrawTo";
        case OnchainOp::Kind::WithdrawNftTo: return "WithdrawNftTo";
        case OnchainOp::Kind::FullExitTo: return "FullExitTo";
        case OnchainOp::Kind::ForcedExitTo: return "ForcedExitTo";
        case OnchainOp::Kind::ChangeGroupTo: return "ChangeGroupTo";
        case OnchainOp::Kind::FullChangeGroupTo: return "FullChangeGroupTo";
    }
    return "Unknown";
}

std::optional<OnchainOp> onchain_effect(const Transaction& tx) {
    using K = OnchainOp::Kind;
    switch (tx.type()) {
        case OpType::Withdraw: {
            const auto& o = tx.as<op::Withdraw>();
            return OnchainOp{K::WithdrawTo, o.to_address, o.token, o.amount, {}};
        }
        case OpType::WithdrawNFT: {
            const auto& o = tx.as<op::WithdrawNFT>();
            return OnchainOp{K::WithdrawNftTo, o.to_address, o.token, 1, {}};
        }
        case OpType::FullExit: {
            const auto& o = tx.as<op::FullExit>();
            return OnchainOp{K::FullExitTo, o.owner, o.token, o.amount, {}};
        }
        case OpType::ForcedExit: {
            const auto& o = tx.as<op::ForcedExit>();
            return OnchainOp{K::ForcedExitTo, o.target_address, o.token, o.amount, {}};
        }
        case OpType::ChangeGroup: {
            const auto& o = tx.as<op::ChangeGroup>();
            return OnchainOp{K::ChangeGroupTo, o.to_address, o.token, o.amount, o.destination_group};
        }
        case OpType::FullChangeGroup: {
            const auto& o = tx.as<op::FullChangeGroup>();
            return OnchainOp{K::FullChangeGroupTo, o.owner, o.token, o.amount, o.destination_group};
        }
        default:
            return std::nullopt;
    }
}

ApplyResult apply_transaction(GroupState& state, const SignedTransaction& stx, const ApplyContext& ctx) {
    return Applier(state, stx, ctx).run();
}

GroupState replay_pubdata(const GroupState& initial, ByteView stream) {
    GroupState s = initial;
    const ApplyContext ctx{.l1_authorized = true, .replay = true, .policy = nullptr};
    for (const auto& tx : decode_block_pubdata(stream, s.group())) {
        auto res = apply_transaction(s, unsigned_transaction(tx), ctx);
        if (encode_pubdata(res.applied) != encode_pubdata(tx))
            throw RollupError(ErrorCode::Decoding, "replayed op does not reproduce its pubdata");
    }
    return s;
}

Hash replay_pubdata(const Hash& initial_root, ByteView stream, GroupId group) {
    GroupState s(group);
    if (initial_root != s.root())
        throw RollupError(ErrorCode::InvalidArgument, "replay from a non-empty root needs the full state");
    return replay_pubdata(s, stream).root();
}

}  // namespace zkg
