#include "zkg/pubdata.hpp"

#include <cstring>

namespace zkg {

namespace {

template <typename... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <typename... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

class Writer {
public:
    explicit Writer(OpType t) { put_be(out_, static_cast<std::uint8_t>(t), 1); }

    Writer& account(AccountId a) { return be(a.value, 4); }
    Writer& token(TokenId t) { return be(t.value, 4); }
    Writer& group(GroupId g) { return be(g.value, 2); }
    Writer& be(std::uint64_t v, std::size_t w) {
        put_be(out_, v, w);
        return *this;
    }
    Writer& full_amount(Amount a) {
        put_amount(out_, a);
        return *this;
    }
    Writer& packed_amount(Amount a) { return be(pack_amount(a), 5); }
    Writer& packed_fee(Fee f) { return be(pack_fee(f), 2); }
    template <std::size_t N>
    Writer& raw(const FixedBytes<N>& b) {
        put_bytes(out_, b.view());
        return *this;
    }
    Writer& reserved_until(std::size_t total) {
        if (out_.size() > total) throw RollupError(ErrorCode::Encoding, "layout exceeds table size");
        out_.resize(total, 0);
        return *this;
    }
    Bytes take() { return std::move(out_); }

private:
    Bytes out_;
};

class Reader {
public:
    explicit Reader(ByteView in) : in_(in), pos_(1) {}

    AccountId account() { return AccountId{static_cast<std::uint32_t>(be(4))}; }
    TokenId token() { return TokenId{static_cast<std::uint32_t>(be(4))}; }
    GroupId group() { return GroupId{static_cast<std::uint16_t>(be(2))}; }
    std::uint64_t be(std::size_t w) {
        auto v = get_be(in_, pos_, w);
        pos_ += w;
        return v;
    }
    Amount full_amount() {
        auto v = get_amount(in_, pos_);
        pos_ += 16;
        return v;
    }
    Amount packed_amount() { return unpack_amount(be(5)); }
    Fee packed_fee() { return unpack_fee(static_cast<std::uint16_t>(be(2))); }
    template <typename T>
    T raw() {
        if (pos_ + T::size() > in_.size()) throw RollupError(ErrorCode::Decoding, "truncated buffer");
        T out;
        std::memcpy(out.bytes.data(), in_.data() + pos_, T::size());
        pos_ += T::size();
        return out;
    }
    void reserved_until(std::size_t total) {
        for (; pos_ < total; ++pos_)
            if (in_[pos_] != 0) throw RollupError(ErrorCode::Decoding, "nonzero reserved byte");
    }

private:
    ByteView in_;
    std::size_t pos_;
};

}  // namespace

ChunkLayout layout_of(OpType t) {
    switch (t) {
        case OpType::Noop: return {1, 10};
        case OpType::Deposit: return {6, 45};
        case OpType::TransferToNew: return {6, 40};
        case OpType::Withdraw: return {6, 47};
        case OpType::Transfer: return {2, 20};
        case OpType::FullExit: return {11, 85};
        case OpType::ChangePubKey: return {6, 49};
        case OpType::ForcedExit: return {6, 51};
        case OpType::MintNFT: return {5, 47};
        case OpType::WithdrawNFT: return {10, 95};
        case OpType::Swap: return {5, 46};
        case OpType::ChangeGroup: return {6, 51};
        case OpType::FullChangeGroup: return {11, 89};
    }
    throw RollupError(ErrorCode::InvalidArgument, "unknown op type");
}

Bytes encode_pubdata(const Transaction& tx) {
    const auto type = tx.type();
    const auto size = layout_of(type).pubdata_bytes;
    Writer w(type);
    std::visit(overloaded{
                   [&](const op::Noop&) {},
                   [&](const op::Deposit& o) {
                       w.account(o.account).token(o.token).full_amount(o.amount).raw(o.owner);
                   },
                   [&](const op::TransferToNew& o) {
                       w.account(o.from).token(o.token).packed_amount(o.amount).raw(o.to_address);
                       w.account(o.to).packed_fee(o.fee);
                   },
                   [&](const op::Withdraw& o) {
                       w.account(o.account).token(o.token).full_amount(o.amount).packed_fee(o.fee);
                       w.raw(o.to_address);
                   },
                   [&](const op::Transfer& o) {
                       w.account(o.from).token(o.token).account(o.to).packed_amount(o.amount);
                       w.packed_fee(o.fee);
                   },
                   [&](const op::FullExit& o) {
                       w.account(o.account).raw(o.owner).token(o.token).full_amount(o.amount);
                   },
                   [&](const op::ChangePubKey& o) {
                       w.account(o.account).raw(o.new_pubkey).be(o.nonce, 4).token(o.fee_token);
                       w.packed_fee(o.fee);
                   },
                   [&](const op::ForcedExit& o) {
                       w.account(o.target).token(o.token).full_amount(o.amount).raw(o.target_address);
                   },
                   [&](const op::MintNFT& o) {
                       w.account(o.creator).account(o.recipient).raw(o.content_hash);
                       w.token(o.fee_token).packed_fee(o.fee);
                   },
                   [&](const op::WithdrawNFT& o) {
                       w.account(o.account).account(o.creator_account).raw(o.creator_address);
                       w.be(o.serial_id, 4).raw(o.content_hash).raw(o.to_address).token(o.token);
                       w.token(o.fee_token).packed_fee(o.fee);
                   },
                   [&](const op::Swap& o) {
                       w.account(o.account_a).account(o.account_b).token(o.token_a).token(o.token_b);
                       w.packed_amount(o.amount_a).packed_amount(o.amount_b);
                       w.packed_fee(o.fee_a).packed_fee(o.fee_b);
                   },
                   [&](const op::ChangeGroup& o) {
                       w.account(o.account).token(o.token).full_amount(o.amount).packed_fee(o.fee);
                       w.raw(o.to_address).group(o.source_group).group(o.destination_group);
                   },
                   [&](const op::FullChangeGroup& o) {
                       w.account(o.account).raw(o.owner).token(o.token).full_amount(o.amount);
                       w.reserved_until(layout_of(OpType::FullExit).pubdata_bytes);
                       w.group(o.source_group).group(o.destination_group);
                   },
               },
               tx.op);
    w.reserved_until(size);
    return w.take();
}

Transaction decode_pubdata(ByteView bytes, GroupId group) {
    if (bytes.empty()) throw RollupError(ErrorCode::Decoding, "truncated buffer");
    auto type = op_from_code(bytes[0]);
    if (!type) throw RollupError(ErrorCode::Decoding, "unknown opcode " + std::to_string(bytes[0]));
    const auto layout = layout_of(*type);
    if (bytes.size() < layout.pubdata_bytes)
        throw RollupError(ErrorCode::Decoding, "truncated buffer");
    if (bytes.size() > layout.chunks * kChunkBytes)
        throw RollupError(ErrorCode::Decoding, "trailing bytes beyond op span");

    Reader r(bytes);
    Transaction tx{group, op::Noop{}};
    switch (*type) {
        case OpType::Noop: break;
        case OpType::Deposit: {
            op::Deposit o;
            o.account = r.account(), o.token = r.token(), o.amount = r.full_amount();
            o.owner = r.raw<L1Address>();
            tx.op = o;
            break;
        }
        case OpType::TransferToNew: {
            op::TransferToNew o;
            o.from = r.account(), o.token = r.token(), o.amount = r.packed_amount();
            o.to_address = r.raw<L1Address>(), o.to = r.account(), o.fee = r.packed_fee();
            tx.op = o;
            break;
        }
        case OpType::Withdraw: {
            op::Withdraw o;
            o.account = r.account(), o.token = r.token(), o.amount = r.full_amount();
            o.fee = r.packed_fee(), o.to_address = r.raw<L1Address>();
            tx.op = o;
            break;
        }
        case OpType::Transfer: {
            op::Transfer o;
            o.from = r.account(), o.token = r.token(), o.to = r.account();
            o.amount = r.packed_amount(), o.fee = r.packed_fee();
            tx.op = o;
            break;
        }
        case OpType::FullExit: {
            op::FullExit o;
            o.account = r.account(), o.owner = r.raw<L1Address>(), o.token = r.token();
            o.amount = r.full_amount();
            tx.op = o;
            break;
        }
        case OpType::ChangePubKey: {
            op::ChangePubKey o;
            o.account = r.account(), o.new_pubkey = r.raw<PubKey>();
            o.nonce = static_cast<Nonce>(r.be(4)), o.fee_token = r.token(), o.fee = r.packed_fee();
            tx.op = o;
            break;
        }
        case OpType::ForcedExit: {
            op::ForcedExit o;
            o.target = r.account(), o.token = r.token(), o.amount = r.full_amount();
            o.target_address = r.raw<L1Address>();
            tx.op = o;
            break;
        }
        case OpType::MintNFT: {
            op::MintNFT o;
            o.creator = r.account(), o.recipient = r.account(), o.content_hash = r.raw<Hash>();
            o.fee_token = r.token(), o.fee = r.packed_fee();
            tx.op = o;
            break;
        }
        case OpType::WithdrawNFT: {
            op::WithdrawNFT o;
            o.account = r.account(), o.creator_account = r.account();
            o.creator_address = r.raw<L1Address>(), o.serial_id = static_cast<std::uint32_t>(r.be(4));
            o.content_hash = r.raw<Hash>(), o.to_address = r.raw<L1Address>(), o.token = r.token();
            o.fee_token = r.token(), o.fee = r.packed_fee();
            tx.op = o;
            break;
        }
        case OpType::Swap: {
            op::Swap o;
            o.account_a = r.account(), o.account_b = r.account();
            o.token_a = r.token(), o.token_b = r.token();
            o.amount_a = r.packed_amount(), o.amount_b = r.packed_amount();
            o.fee_a = r.packed_fee(), o.fee_b = r.packed_fee();
            tx.op = o;
            break;
        }
        case OpType::ChangeGroup: {
            op::ChangeGroup o;
            o.account = r.account(), o.token = r.token(), o.amount = r.full_amount();
            o.fee = r.packed_fee(), o.to_address = r.raw<L1Address>();
            o.source_group = r.group(), o.destination_group = r.group();
            tx.op = o;
            break;
        }
        case OpType::FullChangeGroup: {
            op::FullChangeGroup o;
            o.account = r.account(), o.owner = r.raw<L1Address>(), o.token = r.token();
            o.amount = r.full_amount();
            r.reserved_until(layout_of(OpType::FullExit).pubdata_bytes);
            o.source_group = r.group(), o.destination_group = r.group();
            tx.op = o;
            break;
        }
    }
    r.reserved_until(bytes.size());
    return tx;
}

Bytes encode_chunked(const Transaction& tx) {
    auto out = encode_pubdata(tx);
    out.resize(chunk_count(tx.type()) * kChunkBytes, 0);
    return out;
}

std::vector<Transaction> decode_block_pubdata(ByteView pubdata, GroupId group) {
    if (pubdata.size() % kChunkBytes != 0)
        throw RollupError(ErrorCode::Decoding, "pubdata is not a whole number of chunks");
    std::vector<Transaction> out;
    std::size_t pos = 0;
    while (pos < pubdata.size()) {
        auto type = op_from_code(pubdata[pos]);
        if (!type)
            throw RollupError(ErrorCode::Decoding, "unknown opcode " + std::to_string(pubdata[pos]));
        auto span = chunk_count(*type) * kChunkBytes;
        if (pos + span > pubdata.size()) throw RollupError(ErrorCode::Decoding, "truncated buffer");
        out.push_back(decode_pubdata(pubdata.subspan(pos, span), group));
        pos += span;
    }
    return out;
}

}  // namespace zkg
