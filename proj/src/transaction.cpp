#include "zkg/transaction.hpp"

#include <algorithm>
#include <cctype>

namespace zkg {

namespace {

constexpr std::string_view kSigningDomain = "zkg.tx.v1";

struct OpInfo {
    OpType type;
    std::string_view name;
};

constexpr std::array<OpInfo, 13> kOpInfo = {{
    {OpType::Noop, "Noop"},
    {OpType::Deposit, "Deposit"},
    {OpType::TransferToNew, "TransferToNew"},
    {OpType::Withdraw, "Withdraw"},
    {OpType::Transfer, "Transfer"},
    {OpType::FullExit, "FullExit"},
    {OpType::ChangePubKey, "ChangePubKey"},
    {OpType::ForcedExit, "ForcedExit"},
    {OpType::MintNFT, "MintNFT"},
    {OpType::WithdrawNFT, "WithdrawNFT"},
    {OpType::Swap, "Swap"},
    {OpType::ChangeGroup, "ChangeGroup"},
    {OpType::FullChangeGroup, "FullChangeGroup"},
}};

template <typename... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <typename... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Amount pow10(unsigned e) {
    Amount r = 1;
    while (e-- > 0) r *= 10;
    return r;
}

// Smallest exponent that fits the mantissa, or nullopt.
std::optional<std::pair<std::uint64_t, unsigned>> pack_parts(Amount v, unsigned mantissa_bits) {
    const Amount max_mantissa = (Amount{1} << mantissa_bits) - 1;
    for (unsigned e = 0; e < 32; ++e) {
        Amount p = pow10(e);
        if (v % p != 0) break;
        Amount m = v / p;
        if (m <= max_mantissa) return std::pair{static_cast<std::uint64_t>(m), e};
    }
    return std::nullopt;
}

}  // namespace

std::string_view op_name(OpType t) {
    for (const auto& i : kOpInfo)
        if (i.type == t) return i.name;
    return "Unknown";
}

std::optional<OpType> op_from_name(std::string_view name) {
    for (const auto& i : kOpInfo) {
        if (std::equal(i.name.begin(), i.name.end(), name.begin(), name.end(),
                       [](char a, char b) { return std::tolower(a) == std::tolower(b); }))
            return i.type;
    }
    return std::nullopt;
}

std::optional<OpType> op_from_code(std::uint8_t code) {
    for (const auto& i : kOpInfo)
        if (static_cast<std::uint8_t>(i.type) == code) return i.type;
    return std::nullopt;
}

bool is_priority_type(OpType t) {
    return t == OpType::Deposit || t == OpType::FullExit || t == OpType::ForcedExit ||
           t == OpType::FullChangeGroup;
}

OpType Transaction::type() const { return kAllOpTypes[op.index()]; }

bool Transaction::is_priority() const { return is_priority_type(type()); }

Transaction Transaction::published() const {
    Transaction t = *this;
    std::visit(overloaded{
                   [](op::TransferToNew& o) { o.nonce = 0; },
                   [](op::Withdraw& o) { o.nonce = 0; },
                   [](op::Transfer& o) { o.nonce = 0; },
                   [](op::MintNFT& o) { o.nonce = 0; },
                   [](op::WithdrawNFT& o) { o.nonce = 0; },
                   [](op::Swap& o) { o.nonce_a = o.nonce_b = 0; },
                   [](op::ChangeGroup& o) { o.nonce = 0; },
                   [](auto&) {},
               },
               t.op);
    return t;
}

Bytes signing_message(const Transaction& tx) {
    Bytes m(kSigningDomain.begin(), kSigningDomain.end());
    put_be(m, tx.group.value, 2);
    m.push_back(static_cast<std::uint8_t>(tx.type()));
    auto acc = [&m](AccountId a) { put_be(m, a.value, 4); };
    auto tok = [&m](TokenId t) { put_be(m, t.value, 4); };
    auto grp = [&m](GroupId g) { put_be(m, g.value, 2); };
    std::visit(overloaded{
                   [](const op::Noop&) {},
                   [&](const op::Deposit& o) {
                       acc(o.account); tok(o.token); put_amount(m, o.amount); put_bytes(m, o.owner.view());
                   },
                   [&](const op::TransferToNew& o) {
                       // `to` is assigned by the validator and not signed.
                       acc(o.from); tok(o.token); put_amount(m, o.amount);
                       put_be(m, o.fee, 8); put_bytes(m, o.to_address.view()); put_be(m, o.nonce, 4);
                   },
                   [&](const op::Withdraw& o) {
                       acc(o.account); tok(o.token); put_amount(m, o.amount); put_be(m, o.fee, 8);
                       put_bytes(m, o.to_address.view()); put_be(m, o.nonce, 4);
                   },
                   [&](const op::Transfer& o) {
                       acc(o.from); acc(o.to); tok(o.token); put_amount(m, o.amount);
                       put_be(m, o.fee, 8); put_be(m, o.nonce, 4);
                   },
                   [&](const op::FullExit& o) {
                       acc(o.account); put_bytes(m, o.owner.view()); tok(o.token); put_amount(m, o.amount);
                   },
                   [&](const op::ChangePubKey& o) {
                       acc(o.account); put_bytes(m, o.new_pubkey.view()); put_be(m, o.nonce, 4);
                       tok(o.fee_token); put_be(m, o.fee, 8);
                   },
                   [&](const op::ForcedExit& o) {
                       acc(o.target); tok(o.token); put_amount(m, o.amount); put_bytes(m, o.target_address.view());
                   },
                   [&](const op::MintNFT& o) {
                       acc(o.creator); acc(o.recipient); put_bytes(m, o.content_hash.view());
                       tok(o.fee_token); put_be(m, o.fee, 8); put_be(m, o.nonce, 4);
                   },
                   [&](const op::WithdrawNFT& o) {
                       acc(o.account); acc(o.creator_account); put_bytes(m, o.creator_address.view());
                       put_be(m, o.serial_id, 4); put_bytes(m, o.content_hash.view());
                       put_bytes(m, o.to_address.view()); tok(o.token); tok(o.fee_token);
                       put_be(m, o.fee, 8); put_be(m, o.nonce, 4);
                   },
                   [&](const op::Swap& o) {
                       acc(o.account_a); acc(o.account_b); tok(o.token_a); tok(o.token_b);
                       put_amount(m, o.amount_a); put_amount(m, o.amount_b);
                       put_be(m, o.fee_a, 8); put_be(m, o.fee_b, 8);
                       put_be(m, o.nonce_a, 4); put_be(m, o.nonce_b, 4);
                   },
                   [&](const op::ChangeGroup& o) {
                       acc(o.account); tok(o.token); put_amount(m, o.amount); put_be(m, o.fee, 8);
                       put_bytes(m, o.to_address.view()); put_be(m, o.nonce, 4);
                       grp(o.source_group); grp(o.destination_group);
                   },
                   [&](const op::FullChangeGroup& o) {
                       acc(o.account); put_bytes(m, o.owner.view()); tok(o.token); put_amount(m, o.amount);
                       grp(o.source_group); grp(o.destination_group);
                   },
               },
               tx.op);
    return m;
}

SignedTransaction sign_transaction(const SecretKey& key, const Transaction& tx) {
    SignedTransaction stx{tx, key.public_key(), {}, std::nullopt};
    stx.signature = key.sign(signing_message(tx));
    return stx;
}

void cosign_transaction(const SecretKey& key, SignedTransaction& stx) {
    stx.cosignature = Cosignature{key.public_key(), key.sign(signing_message(stx.tx))};
}

SignedTransaction unsigned_transaction(const Transaction& tx) {
    return SignedTransaction{tx, {}, {}, std::nullopt};
}

bool verify_signature(const SignedTransaction& stx) {
    auto msg = signing_message(stx.tx);
    if (!verify(stx.signer_pubkey, msg, stx.signature)) return false;
    if (stx.tx.type() == OpType::Swap) {
        if (!stx.cosignature) return false;
        return verify(stx.cosignature->signer_pubkey, msg, stx.cosignature->signature);
    }
    return !stx.cosignature.has_value();
}

bool amount_packable(Amount a) { return pack_parts(a, 35).has_value(); }
bool fee_packable(Fee f) { return pack_parts(f, 11).has_value(); }

std::uint64_t pack_amount(Amount a) {
    auto p = pack_parts(a, 35);
    if (!p) throw RollupError(ErrorCode::Encoding, "amount not representable in packed form");
    return p->first << 5 | p->second;
}

Amount unpack_amount(std::uint64_t packed) {
    return Amount{packed >> 5} * pow10(static_cast<unsigned>(packed & 0x1f));
}

std::uint16_t pack_fee(Fee f) {
    auto p = pack_parts(f, 11);
    if (!p) throw RollupError(ErrorCode::Encoding, "fee not representable in packed form");
    return static_cast<std::uint16_t>(p->first << 5 | p->second);
}

Fee unpack_fee(std::uint16_t packed) {
    Amount v = Amount{static_cast<std::uint64_t>(packed >> 5)} * pow10(packed & 0x1f);
    if (v > Amount{~Fee{0}}) throw RollupError(ErrorCode::Decoding, "packed fee overflows");
    return static_cast<Fee>(v);
}

}  // namespace zkg
