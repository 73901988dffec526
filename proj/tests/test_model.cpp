#include <random>

#include "helpers.hpp"

using namespace zkg;
using zkg::test::addr;

namespace {

Transaction sample(OpType t, GroupId g = GroupId{3}) {
    const auto a = addr(0x11);
    const auto h = hash_bytes(a.view());
    switch (t) {
        case OpType::Noop: return {g, op::Noop{}};
        case OpType::Deposit: return {g, op::Deposit{AccountId{7}, TokenId{1}, 123'456'789, a}};
        case OpType::TransferToNew:
            return {g, op::TransferToNew{AccountId{1}, AccountId{9}, TokenId{0}, 5'000, 12, a, 3}};
        case OpType::Withdraw: return {g, op::Withdraw{AccountId{2}, TokenId{1}, 700, 1, a, 4}};
        case OpType::Transfer: return {g, op::Transfer{AccountId{1}, AccountId{2}, TokenId{0}, 100, 2, 5}};
        case OpType::FullExit: return {g, op::FullExit{AccountId{4}, a, TokenId{0}, 999}};
        case OpType::ChangePubKey:
            return {g, op::ChangePubKey{AccountId{4}, zkg::test::key_bytes(0x42), 0, TokenId{0}, 3}};
        case OpType::ForcedExit: return {g, op::ForcedExit{AccountId{5}, TokenId{1}, 77, a}};
        case OpType::MintNFT: return {g, op::MintNFT{AccountId{1}, AccountId{2}, h, TokenId{0}, 1, 6}};
        case OpType::WithdrawNFT:
            return {g, op::WithdrawNFT{AccountId{2}, AccountId{1}, a, 0, h, a, TokenId{kNftTokenStart}, TokenId{0}, 1, 2}};
        case OpType::Swap:
            return {g, op::Swap{AccountId{1}, AccountId{2}, TokenId{0}, TokenId{1}, 10, 20, 1, 2, 3, 4}};
        case OpType::ChangeGroup:
            return {g, op::ChangeGroup{AccountId{2}, TokenId{0}, 50, 1, a, 1, g, GroupId{5}}};
        case OpType::FullChangeGroup:
            return {g, op::FullChangeGroup{AccountId{2}, a, TokenId{1}, 60, g, GroupId{5}}};
    }
    return {g, op::Noop{}};
}

}  // namespace

TEST_CASE("op sizes follow the operation table") {
    struct Row {
        OpType t;
        std::size_t chunks, bytes;
    };
    const Row rows[] = {
        {OpType::Deposit, 6, 45},      {OpType::TransferToNew, 6, 40}, {OpType::Withdraw, 6, 47},
        {OpType::Transfer, 2, 20},     {OpType::FullExit, 11, 85},     {OpType::ChangePubKey, 6, 49},
        {OpType::ForcedExit, 6, 51},   {OpType::MintNFT, 5, 47},       {OpType::WithdrawNFT, 10, 95},
        {OpType::Swap, 5, 46},         {OpType::Noop, 1, 10},          {OpType::ChangeGroup, 6, 51},
        {OpType::FullChangeGroup, 11, 89},
    };
    for (const auto& r : rows) {
        CAPTURE(op_name(r.t));
        CHECK(chunk_count(r.t) == r.chunks);
        CHECK(layout_of(r.t).pubdata_bytes == r.bytes);
        CHECK(encode_pubdata(sample(r.t)).size() == r.bytes);
        CHECK(encode_chunked(sample(r.t)).size() == r.chunks * kChunkBytes);
    }
    CHECK(chunk_count(OpType::TransferToNew) != (40 + kChunkBytes - 1) / kChunkBytes);
}

TEST_CASE("opcodes and names") {
    CHECK(static_cast<int>(OpType::ChangeGroup) == 0x0C);
    CHECK(static_cast<int>(OpType::FullChangeGroup) == 0x0D);
    for (auto t : kAllOpTypes) {
        CHECK(op_from_name(op_name(t)) == t);
        CHECK(op_from_code(static_cast<std::uint8_t>(t)) == t);
    }
    CHECK_FALSE(op_from_code(0x04));
    CHECK_FALSE(op_from_name("Bogus"));
}

TEST_CASE("pubdata round trip over published fields") {
    for (auto t : kAllOpTypes) {
        CAPTURE(op_name(t));
        auto tx = sample(t);
        auto back = decode_pubdata(encode_pubdata(tx), tx.group);
        CHECK(back == tx.published());
    }
}

TEST_CASE("noop pubdata is ten zero bytes") {
    auto b = encode_pubdata(sample(OpType::Noop));
    CHECK(b == Bytes(10, 0));
    CHECK(decode_pubdata(Bytes(10, 0)).type() == OpType::Noop);
}

TEST_CASE("decoding rejects unknown opcodes and truncation") {
    Bytes bad(10, 0);
    bad[0] = 0xFF;
    CHECK(zkg::test::error_of([&] { (void)decode_pubdata(bad); }) == ErrorCode::Decoding);
    auto t = encode_pubdata(sample(OpType::Transfer));
    t.pop_back();
    CHECK(zkg::test::error_of([&] { (void)decode_pubdata(t); }) == ErrorCode::Decoding);
}

TEST_CASE("cross-group ops publish both groups") {
    auto tx = sample(OpType::ChangeGroup, GroupId{0x0102});
    auto b = encode_pubdata(tx);
    auto w = encode_pubdata(Transaction{tx.group, op::Withdraw{AccountId{2}, TokenId{0}, 50, 1, addr(0x11), 1}});
    CHECK(std::equal(w.begin() + 1, w.end(), b.begin() + 1));
    CHECK(b[47] == 0x01);
    CHECK(b[48] == 0x02);
    CHECK(b[49] == 0x00);
    CHECK(b[50] == 0x05);
}

TEST_CASE("block pubdata splits by opcode") {
    GroupId g{2};
    Bytes stream;
    std::vector<Transaction> txs = {sample(OpType::Transfer, g), sample(OpType::FullExit, g), sample(OpType::Noop, g)};
    for (const auto& tx : txs) {
        auto c = encode_chunked(tx);
        stream.insert(stream.end(), c.begin(), c.end());
    }
    auto back = decode_block_pubdata(stream, g);
    REQUIRE(back.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(back[i] == txs[i].published());
}

TEST_CASE("amount and fee packing") {
    CHECK(amount_packable(0));
    CHECK(amount_packable(34'359'738'367));
    CHECK(amount_packable(Amount{1'000'000'000'000'000'000ull}));
    CHECK_FALSE(amount_packable(34'359'738'369));
    CHECK(unpack_amount(pack_amount(123'000)) == 123'000);
    CHECK(fee_packable(2047));
    CHECK_FALSE(fee_packable(2049));
    CHECK_FALSE(fee_packable(20'481));
    CHECK(fee_packable(20'470));
    CHECK(unpack_fee(pack_fee(20'470)) == 20'470);
    std::mt19937_64 rng(7);
    for (int i = 0; i < 500; ++i) {
        Amount m = rng() % (1ull << 35);
        Amount v = m;
        for (auto e = rng() % 12; e > 0; --e) v *= 10;
        CHECK(unpack_amount(pack_amount(v)) == v);
    }
    CHECK(zkg::test::error_of([] { (void)encode_pubdata({GroupId{0}, op::Transfer{AccountId{1}, AccountId{2}, TokenId{0}, 34'359'738'369, 0, 0}}); }) ==
          ErrorCode::Encoding);
}

TEST_CASE("amount strings") {
    const Amount max = ~Amount{0};
    CHECK(amount_to_string(max) == "340282366920938463463374607431768211455");
    CHECK(amount_from_string("340282366920938463463374607431768211455") == max);
    CHECK(amount_to_string(0) == "0");
    CHECK_THROWS(amount_from_string("340282366920938463463374607431768211456"));
    CHECK_THROWS(amount_from_string("12a"));
}

TEST_CASE("signatures bind the group and every field") {
    auto key = SecretKey::derive("alice", 1);
    auto tx = sample(OpType::Transfer, GroupId{3});
    auto stx = sign_transaction(key, tx);
    CHECK(verify_signature(stx));

    auto moved = stx;
    moved.tx.group = GroupId{4};
    CHECK_FALSE(verify_signature(moved));

    auto flipped = stx;
    flipped.tx.as<op::Transfer>().amount ^= 1;
    CHECK_FALSE(verify_signature(flipped));

    auto other = sample(OpType::Transfer, GroupId{4});
    CHECK(signing_message(tx) != signing_message(other));
}

TEST_CASE("random single-field mutations break signatures") {
    auto key = SecretKey::derive("bob", 2);
    std::mt19937_64 rng(11);
    for (auto t : kAllOpTypes) {
        if (t == OpType::Noop || t == OpType::Swap || is_priority_type(t)) continue;
        auto stx = sign_transaction(key, sample(t));
        REQUIRE(verify_signature(stx));
        auto msg = signing_message(stx.tx);
        for (int i = 0; i < 20; ++i) {
            auto m = msg;
            m[rng() % m.size()] ^= static_cast<std::uint8_t>(1u << (rng() % 8));
            CHECK_FALSE(verify(stx.signer_pubkey, m, stx.signature));
        }
    }
}

TEST_CASE("swap needs the counterparty signature") {
    auto a = SecretKey::derive("a", 1);
    auto b = SecretKey::derive("b", 1);
    auto stx = sign_transaction(a, sample(OpType::Swap));
    cosign_transaction(b, stx);
    CHECK(verify_signature(stx));
    stx.cosignature->signature.bytes[0] ^= 1;
    CHECK_FALSE(verify_signature(stx));
}

TEST_CASE("keys and addresses are deterministic") {
    auto k1 = SecretKey::derive("carol", 5);
    auto k2 = SecretKey::derive("carol", 5);
    auto k3 = SecretKey::derive("carol", 6);
    CHECK(k1.public_key() == k2.public_key());
    CHECK(k1.public_key() != k3.public_key());
    CHECK(address_of(k1.public_key()) == address_of(k2.public_key()));
}

TEST_CASE("priority classification") {
    CHECK(is_priority_type(OpType::Deposit));
    CHECK(is_priority_type(OpType::FullExit));
    CHECK(is_priority_type(OpType::ForcedExit));
    CHECK(is_priority_type(OpType::FullChangeGroup));
    CHECK_FALSE(is_priority_type(OpType::ChangeGroup));
    CHECK_FALSE(is_priority_type(OpType::Transfer));
}
