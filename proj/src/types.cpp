#include "zkg/types.hpp"

#include <algorithm>

namespace zkg {

U256 U256::add_small(std::uint64_t v) const {
    U256 r = *this;
    unsigned carry = 0;
    for (int i = 31; i >= 0; --i) {
        unsigned add = static_cast<unsigned>(v & 0xff) + carry;
        v >>= 8;
        unsigned sum = r.bytes[i] + add;
        r.bytes[i] = static_cast<std::uint8_t>(sum & 0xff);
        carry = sum >> 8;
    }
    return r;
}

U256 U256::sub_small(std::uint64_t v) const {
    U256 r = *this;
    int borrow = 0;
    for (int i = 31; i >= 0; --i) {
        int sub = static_cast<int>(v & 0xff) + borrow;
        v >>= 8;
        int diff = static_cast<int>(r.bytes[i]) - sub;
        borrow = diff < 0 ? 1 : 0;
        r.bytes[i] = static_cast<std::uint8_t>((diff + 256) & 0xff);
    }
    return r;
}

std::string to_hex(ByteView bytes) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s;
    s.reserve(bytes.size() * 2);
    for (auto b : bytes) {
        s.push_back(digits[b >> 4]);
        s.push_back(digits[b & 0xf]);
    }
    return s;
}

Bytes from_hex(std::string_view hex) {
    if (hex.starts_with("0x")) hex.remove_prefix(2);
    if (hex.size() % 2 != 0) throw std::invalid_argument("odd-length hex string");
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw std::invalid_argument("invalid hex digit");
    };
    Bytes out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
    return out;
}

std::string amount_to_string(Amount a) {
    if (a == 0) return "0";
    std::string s;
    while (a > 0) {
        s.push_back(static_cast<char>('0' + static_cast<int>(a % 10)));
        a /= 10;
    }
    std::reverse(s.begin(), s.end());
    return s;
}

Amount amount_from_string(std::string_view s) {
    if (s.empty()) throw std::invalid_argument("empty amount");
    Amount a = 0;
    const Amount limit = ~Amount{0};
    for (char c : s) {
        if (c < '0' || c > '9') throw std::invalid_argument("invalid amount digit");
        auto d = static_cast<unsigned>(c - '0');
        if (a > (limit - d) / 10) throw std::invalid_argument("amount overflows 128 bits");
        a = a * 10 + d;
    }
    return a;
}

std::string_view error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::Encoding: return "encoding";
        case ErrorCode::Decoding: return "decoding";
        case ErrorCode::InsufficientBalance: return "insufficient_balance";
        case ErrorCode::BadNonce: return "bad_nonce";
        case ErrorCode::BadSignature: return "bad_signature";
        case ErrorCode::UnknownAccount: return "unknown_account";
        case ErrorCode::RecipientExists: return "recipient_exists";
        case ErrorCode::SameGroup: return "same_group";
        case ErrorCode::WrongGroup: return "wrong_group";
        case ErrorCode::NotPermitted: return "not_permitted";
        case ErrorCode::InvalidArgument: return "invalid_argument";
        case ErrorCode::CapacityExhausted: return "capacity_exhausted";
        case ErrorCode::ValidatorBound: return "validator_bound";
        case ErrorCode::Unauthorized: return "unauthorized";
        case ErrorCode::NotWhitelisted: return "not_whitelisted";
        case ErrorCode::Discontinuity: return "discontinuity";
        case ErrorCode::StaleRoot: return "stale_root";
        case ErrorCode::FifoViolation: return "fifo_violation";
        case ErrorCode::ProofRejected: return "proof_rejected";
        case ErrorCode::OutOfOrder: return "out_of_order";
        case ErrorCode::Frozen: return "frozen";
        case ErrorCode::NothingToWithdraw: return "nothing_to_withdraw";
        case ErrorCode::Config: return "config";
        case ErrorCode::Parse: return "parse";
    }
    return "unknown";
}

void put_be(Bytes& out, std::uint64_t v, std::size_t width) {
    for (std::size_t i = width; i-- > 0;) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_amount(Bytes& out, Amount v) {
    for (int i = 15; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_bytes(Bytes& out, ByteView v) { out.insert(out.end(), v.begin(), v.end()); }

std::uint64_t get_be(ByteView in, std::size_t offset, std::size_t width) {
    if (offset + width > in.size()) throw RollupError(ErrorCode::Decoding, "truncated buffer");
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < width; ++i) v = v << 8 | in[offset + i];
    return v;
}

Amount get_amount(ByteView in, std::size_t offset) {
    if (offset + 16 > in.size()) throw RollupError(ErrorCode::Decoding, "truncated buffer");
    Amount v = 0;
    for (std::size_t i = 0; i < 16; ++i) v = v << 8 | in[offset + i];
    return v;
}

}  // namespace zkg
