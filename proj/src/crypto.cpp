#include "zkg/crypto.hpp"

#include <sodium.h>

#include <cstring>
#include <mutex>

namespace zkg {
namespace {

void ensure_sodium() {
    static std::once_flag once;
    std::call_once(once, [] {
        if (sodium_init() < 0) throw std::runtime_error("libsodium initialization failed");
    });
}

}  // namespace

Hash hash_bytes(ByteView data) {
    Hash out;
    crypto_hash_sha256(out.bytes.data(), data.data(), data.size());
    return out;
}

Hash hash_concat(std::initializer_list<ByteView> parts) {
    crypto_hash_sha256_state st;
    crypto_hash_sha256_init(&st);
    for (auto p : parts) crypto_hash_sha256_update(&st, p.data(), p.size());
    Hash out;
    crypto_hash_sha256_final(&st, out.bytes.data());
    return out;
}

SecretKey SecretKey::from_seed(const Hash& seed) {
    ensure_sodium();
    SecretKey k;
    crypto_sign_ed25519_seed_keypair(k.public_.bytes.data(), k.secret_.data(), seed.bytes.data());
    return k;
}

SecretKey SecretKey::derive(std::string_view label, std::uint64_t seed) {
    Bytes pre;
    put_be(pre, seed, 8);
    pre.insert(pre.end(), label.begin(), label.end());
    return from_seed(hash_bytes(pre));
}

Signature SecretKey::sign(ByteView message) const {
    Signature sig;
    crypto_sign_ed25519_detached(sig.bytes.data(), nullptr, message.data(), message.size(),
                                 secret_.data());
    return sig;
}

bool verify(const PubKey& key, ByteView message, const Signature& sig) {
    ensure_sodium();
    return crypto_sign_ed25519_verify_detached(sig.bytes.data(), message.data(), message.size(),
                                               key.bytes.data()) == 0;
}

L1Address address_of(const PubKey& key) {
    auto h = hash_bytes(key.view());
    L1Address a;
    std::memcpy(a.bytes.data(), h.bytes.data() + 12, 20);
    return a;
}

}  // namespace zkg
