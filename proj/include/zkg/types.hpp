#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace zkg {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

/// Token amounts and balances. Full amounts travel as 16 big-endian bytes.
using Amount = unsigned __int128;
using Fee = std::uint64_t;
using Nonce = std::uint32_t;

inline constexpr std::size_t kChunkBytes = 10;
inline constexpr std::uint32_t kNftTokenStart = 1u << 31;
inline constexpr std::uint32_t kMaxGroups = 1u << 16;

template <typename Tag, typename Rep>
struct StrongId {
    Rep value{};

    constexpr StrongId() = default;
    constexpr explicit StrongId(Rep v) : value(v) {}

    friend constexpr auto operator<=>(const StrongId&, const StrongId&) = default;
};

struct GroupTag {};
struct AccountTag {};
struct TokenTag {};

using GroupId = StrongId<GroupTag, std::uint16_t>;
using AccountId = StrongId<AccountTag, std::uint32_t>;

struct TokenId : StrongId<TokenTag, std::uint32_t> {
    using StrongId::StrongId;
    [[nodiscard]] constexpr bool fungible() const { return value < kNftTokenStart; }
    [[nodiscard]] constexpr bool nft() const { return value >= kNftTokenStart; }
};

template <std::size_t N>
struct FixedBytes {
    std::array<std::uint8_t, N> bytes{};

    static constexpr std::size_t size() { return N; }
    [[nodiscard]] bool is_zero() const {
        for (auto b : bytes)
            if (b != 0) return false;
        return true;
    }
    [[nodiscard]] ByteView view() const { return {bytes.data(), N}; }

    friend constexpr auto operator<=>(const FixedBytes&, const FixedBytes&) = default;
};

using Hash = FixedBytes<32>;
using L1Address = FixedBytes<20>;
using PubKey = FixedBytes<32>;

/// 256-bit unsigned integer stored big-endian; only the arithmetic the
/// public-input binding needs.
struct U256 : FixedBytes<32> {
    static U256 from_hash(const Hash& h) {
        U256 r;
        r.bytes = h.bytes;
        return r;
    }
    [[nodiscard]] U256 add_small(std::uint64_t v) const;
    [[nodiscard]] U256 sub_small(std::uint64_t v) const;
    [[nodiscard]] Hash as_hash() const {
        Hash h;
        h.bytes = bytes;
        return h;
    }
};

std::string to_hex(ByteView bytes);
template <std::size_t N>
std::string to_hex(const FixedBytes<N>& b) {
    return to_hex(b.view());
}
Bytes from_hex(std::string_view hex);

template <typename T>
T fixed_from_hex(std::string_view hex) {
    auto raw = from_hex(hex);
    if (raw.size() != T::size()) throw std::invalid_argument("hex length mismatch");
    T out;
    std::copy(raw.begin(), raw.end(), out.bytes.begin());
    return out;
}

std::string amount_to_string(Amount a);
Amount amount_from_string(std::string_view s);

/// Error taxonomy shared by every module. The CLI maps these to exit codes.
enum class ErrorCode {
    Encoding,
    Decoding,
    InsufficientBalance,
    BadNonce,
    BadSignature,
    UnknownAccount,
    RecipientExists,
    SameGroup,
    WrongGroup,
    NotPermitted,
    InvalidArgument,
    CapacityExhausted,
    ValidatorBound,
    Unauthorized,
    NotWhitelisted,
    Discontinuity,
    StaleRoot,
    FifoViolation,
    ProofRejected,
    OutOfOrder,
    Frozen,
    NothingToWithdraw,
    Config,
    Parse,
};

std::string_view error_code_name(ErrorCode code);

class RollupError : public std::runtime_error {
public:
    RollupError(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// Big-endian fixed-width writers/readers used by every byte format here.
void put_be(Bytes& out, std::uint64_t v, std::size_t width);
void put_amount(Bytes& out, Amount v);
void put_bytes(Bytes& out, ByteView v);
std::uint64_t get_be(ByteView in, std::size_t offset, std::size_t width);
Amount get_amount(ByteView in, std::size_t offset);

}  // namespace zkg

template <typename Tag, typename Rep>
struct std::hash<zkg::StrongId<Tag, Rep>> {
    std::size_t operator()(const zkg::StrongId<Tag, Rep>& id) const noexcept {
        return std::hash<Rep>{}(id.value);
    }
};

template <>
struct std::hash<zkg::TokenId> {
    std::size_t operator()(const zkg::TokenId& id) const noexcept {
        return std::hash<std::uint32_t>{}(id.value);
    }
};

template <std::size_t N>
struct std::hash<zkg::FixedBytes<N>> {
    std::size_t operator()(const zkg::FixedBytes<N>& b) const noexcept {
        std::size_t h = 1469598103934665603ull;
        for (auto x : b.bytes) h = (h ^ x) * 1099511628211ull;
        return h;
    }
};
