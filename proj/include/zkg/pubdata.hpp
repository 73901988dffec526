#pragma once

#include "zkg/transaction.hpp"

namespace zkg {

struct ChunkLayout {
    std::size_t chunks;
    std::size_t pubdata_bytes;
};

/// Table lookup; chunk counts are not derivable from the byte sizes.
ChunkLayout layout_of(OpType t);
inline std::size_t chunk_count(OpType t) { return layout_of(t).chunks; }

/// Exactly `layout_of(tx.type()).pubdata_bytes` bytes. The group id is not
/// published except as the source/destination fields of the cross-group ops.
Bytes encode_pubdata(const Transaction& tx);

/// Inverse of encode_pubdata over the published fields. `group` supplies the
/// unpublished group tag (taken from the block being decoded).
Transaction decode_pubdata(ByteView bytes, GroupId group = GroupId{0});

/// `encode_pubdata` zero-padded to the op's full chunk span.
Bytes encode_chunked(const Transaction& tx);

/// Splits a block's pubdata into ops by opcode and chunk span.
std::vector<Transaction> decode_block_pubdata(ByteView pubdata, GroupId group);

}  // namespace zkg
