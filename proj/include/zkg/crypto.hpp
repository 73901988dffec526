#pragma once

#include <array>
#include <initializer_list>

#include "zkg/types.hpp"

namespace zkg {

/// The single hash used for trees, block commitments and proof bindings.
Hash hash_bytes(ByteView data);
Hash hash_concat(std::initializer_list<ByteView> parts);
inline Hash hash_pair(const Hash& left, const Hash& right) {
    return hash_concat({left.view(), right.view()});
}

using Signature = FixedBytes<64>;

/// Deterministic Ed25519 signing key derived from a 32-byte seed.
class SecretKey {
public:
    static SecretKey from_seed(const Hash& seed);
    /// Derives a key from a label, e.g. a scenario user name plus a seed.
    static SecretKey derive(std::string_view label, std::uint64_t seed);

    [[nodiscard]] const PubKey& public_key() const { return public_; }
    [[nodiscard]] Signature sign(ByteView message) const;

private:
    std::array<std::uint8_t, 64> secret_{};
    PubKey public_;
};

bool verify(const PubKey& key, ByteView message, const Signature& sig);

/// L1 identity model: an address is the low 20 bytes of the key hash, so the
/// same key that controls an L1 address can authorize its first L2 key.
L1Address address_of(const PubKey& key);

}  // namespace zkg
