#pragma once

#include <optional>
#include <string_view>
#include <variant>

#include "zkg/crypto.hpp"
#include "zkg/types.hpp"

namespace zkg {

enum class OpType : std::uint8_t {
    Noop = 0x00,
    Deposit = 0x01,
    TransferToNew = 0x02,
    Withdraw = 0x03,
    Transfer = 0x05,
    FullExit = 0x06,
    ChangePubKey = 0x07,
    ForcedExit = 0x08,
    MintNFT = 0x09,
    WithdrawNFT = 0x0A,
    Swap = 0x0B,
    ChangeGroup = 0x0C,
    FullChangeGroup = 0x0D,
};

inline constexpr std::array<OpType, 13> kAllOpTypes = {
    OpType::Noop,       OpType::Deposit,     OpType::TransferToNew, OpType::Withdraw,
    OpType::Transfer,   OpType::FullExit,    OpType::ChangePubKey,  OpType::ForcedExit,
    OpType::MintNFT,    OpType::WithdrawNFT, OpType::Swap,          OpType::ChangeGroup,
    OpType::FullChangeGroup,
};

std::string_view op_name(OpType t);
std::optional<OpType> op_from_name(std::string_view name);
std::optional<OpType> op_from_code(std::uint8_t code);

namespace op {

struct Noop {
    friend bool operator==(const Noop&, const Noop&) = default;
};

/// `account` is assigned by the validator when the deposit is included.
struct Deposit {
    AccountId account;
    TokenId token;
    Amount amount = 0;
    L1Address owner;
    friend bool operator==(const Deposit&, const Deposit&) = default;
};

struct TransferToNew {
    AccountId from;
    AccountId to;  // assigned on inclusion
    TokenId token;
    Amount amount = 0;
    Fee fee = 0;
    L1Address to_address;
    Nonce nonce = 0;
    friend bool operator==(const TransferToNew&, const TransferToNew&) = default;
};

struct Withdraw {
    AccountId account;
    TokenId token;
    Amount amount = 0;
    Fee fee = 0;
    L1Address to_address;
    Nonce nonce = 0;
    friend bool operator==(const Withdraw&, const Withdraw&) = default;
};

struct Transfer {
    AccountId from;
    AccountId to;
    TokenId token;
    Amount amount = 0;
    Fee fee = 0;
    Nonce nonce = 0;
    friend bool operator==(const Transfer&, const Transfer&) = default;
};

/// `amount` is the whole balance, filled in by the validator on inclusion.
struct FullExit {
    AccountId account;
    L1Address owner;
    TokenId token;
    Amount amount = 0;
    friend bool operator==(const FullExit&, const FullExit&) = default;
};

struct ChangePubKey {
    AccountId account;
    PubKey new_pubkey;
    Nonce nonce = 0;
    TokenId fee_token;
    Fee fee = 0;
    friend bool operator==(const ChangePubKey&, const ChangePubKey&) = default;
};

struct ForcedExit {
    AccountId target;
    TokenId token;
    Amount amount = 0;
    L1Address target_address;
    friend bool operator==(const ForcedExit&, const ForcedExit&) = default;
};

struct MintNFT {
    AccountId creator;
    AccountId recipient;
    Hash content_hash;
    TokenId fee_token;
    Fee fee = 0;
    Nonce nonce = 0;
    friend bool operator==(const MintNFT&, const MintNFT&) = default;
};

struct WithdrawNFT {
    AccountId account;
    AccountId creator_account;
    L1Address creator_address;
    std::uint32_t serial_id = 0;
    Hash content_hash;
    L1Address to_address;
    TokenId token;
    TokenId fee_token;
    Fee fee = 0;
    Nonce nonce = 0;
    friend bool operator==(const WithdrawNFT&, const WithdrawNFT&) = default;
};

/// Atomic two-party exchange; each side pays its fee in the token it sells.
struct Swap {
    AccountId account_a;
    AccountId account_b;
    TokenId token_a;
    TokenId token_b;
    Amount amount_a = 0;
    Amount amount_b = 0;
    Fee fee_a = 0;
    Fee fee_b = 0;
    Nonce nonce_a = 0;
    Nonce nonce_b = 0;
    friend bool operator==(const Swap&, const Swap&) = default;
};

struct ChangeGroup {
    AccountId account;
    TokenId token;
    Amount amount = 0;
    Fee fee = 0;
    L1Address to_address;
    Nonce nonce = 0;
    GroupId source_group;
    GroupId destination_group;
    friend bool operator==(const ChangeGroup&, const ChangeGroup&) = default;
};

struct FullChangeGroup {
    AccountId account;
    L1Address owner;
    TokenId token;
    Amount amount = 0;
    GroupId source_group;
    GroupId destination_group;
    friend bool operator==(const FullChangeGroup&, const FullChangeGroup&) = default;
};

}  // namespace op

using Operation = std::variant<op::Noop, op::Deposit, op::TransferToNew, op::Withdraw, op::Transfer,
                               op::FullExit, op::ChangePubKey, op::ForcedExit, op::MintNFT,
                               op::WithdrawNFT, op::Swap, op::ChangeGroup, op::FullChangeGroup>;

struct Transaction {
    GroupId group;
    Operation op;

    [[nodiscard]] OpType type() const;
    /// Ops that originate on L1 and are authorized by the contract caller.
    [[nodiscard]] bool is_priority() const;
    /// Copy with fields that are never published on-chain cleared.
    [[nodiscard]] Transaction published() const;

    template <typename T>
    [[nodiscard]] const T& as() const {
        return std::get<T>(op);
    }
    template <typename T>
    [[nodiscard]] T& as() {
        return std::get<T>(op);
    }

    friend bool operator==(const Transaction&, const Transaction&) = default;
};

bool is_priority_type(OpType t);

struct Cosignature {
    PubKey signer_pubkey;
    Signature signature;
    friend bool operator==(const Cosignature&, const Cosignature&) = default;
};

struct SignedTransaction {
    Transaction tx;
    PubKey signer_pubkey;
    Signature signature;
    /// Second party of a Swap.
    std::optional<Cosignature> cosignature;

    friend bool operator==(const SignedTransaction&, const SignedTransaction&) = default;
};

/// Canonical signing message: domain tag, group, opcode, then every field of
/// the operation at fixed width.
Bytes signing_message(const Transaction& tx);

SignedTransaction sign_transaction(const SecretKey& key, const Transaction& tx);
/// Adds the counterparty signature to a Swap.
void cosign_transaction(const SecretKey& key, SignedTransaction& stx);
/// Priority ops carry no signature; they wrap unsigned.
SignedTransaction unsigned_transaction(const Transaction& tx);

bool verify_signature(const SignedTransaction& stx);

// Amount packing: value = mantissa * 10^exponent.
// Amounts: 35-bit mantissa, 5-bit exponent (5 bytes). Fees: 11-bit mantissa,
// 5-bit exponent (2 bytes).
bool amount_packable(Amount a);
bool fee_packable(Fee f);
std::uint64_t pack_amount(Amount a);
Amount unpack_amount(std::uint64_t packed);
std::uint16_t pack_fee(Fee f);
Fee unpack_fee(std::uint16_t packed);

}  // namespace zkg
