#pragma once

#include <doctest.h>

#include <filesystem>

#include "zkg/scenario.hpp"

namespace zkg::test {

inline L1Address addr(std::uint8_t b) {
    L1Address a;
    a.bytes.fill(b);
    return a;
}

inline PubKey key_bytes(std::uint8_t b) {
    PubKey k;
    k.bytes.fill(b);
    return k;
}

template <typename F>
ErrorCode error_of(F&& f) {
    try {
        f();
    } catch (const RollupError& e) {
        return e.code();
    }
    FAIL("expected a RollupError");
    return ErrorCode::Config;
}

inline std::filesystem::path source_dir() { return ZKG_SOURCE_DIR; }

/// Deposit and a key for each user, then one cycle so accounts exist.
inline void onboard(World& w, GroupId g, std::initializer_list<std::string> names, Amount amount = 10'000,
                    TokenId token = TokenId{0}) {
    for (const auto& n : names) w.deposit(n, g, token, amount);
    w.run_cycle(g, 1, 78, 1);
    for (const auto& n : names) {
        TxRequest req;
        req.type = OpType::ChangePubKey;
        REQUIRE(w.submit(g, n, req).accepted());
    }
    w.run_cycle(g, 1, 78, 1);
}

}  // namespace zkg::test
