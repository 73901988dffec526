#include "zkg/proof.hpp"

#include <cmath>

namespace zkg {

namespace {

struct CircuitRow {
    std::size_t chunks;
    std::uint64_t baseline;
    std::uint64_t modified;
    double baseline_seconds;
    double modified_seconds;
};

constexpr std::array<CircuitRow, 4> kCircuitTable = {{
    {26, 8'526'701, 8'542'124, 71, 71},
    {78, 16'908'690, 16'952'713, 142, 144},
    {182, 33'672'019, 33'773'242, 289, 289},
    {390, 67'185'536, 67'401'159, 588, 588},
}};

template <typename Value>
double interpolate(std::size_t chunks, Value value) {
    const auto& t = kCircuitTable;
    std::size_t hi = 1;
    while (hi + 1 < t.size() && chunks > t[hi].chunks) ++hi;
    const auto& a = t[hi - 1];
    const auto& b = t[hi];
    double frac = (static_cast<double>(chunks) - a.chunks) / (static_cast<double>(b.chunks) - a.chunks);
    return value(a) + frac * (value(b) - value(a));
}

}  // namespace

Hash block_hash(const Hash& old_root, const Hash& new_root, std::uint64_t block_number, ByteView pubdata) {
    Bytes n;
    put_be(n, block_number, 8);
    return hash_concat({old_root.view(), new_root.view(), n, pubdata});
}

U256 public_input_for(const Hash& h, GroupId group) { return U256::from_hash(h).add_small(group.value); }

std::string_view violation_name(Violation v) {
    switch (v) {
        case Violation::Signature: return "signature";
        case Violation::GroupMismatch: return "group_mismatch";
        case Violation::StateTransition: return "state_transition";
        case Violation::PublicInput: return "public_input";
        case Violation::Policy: return "policy";
    }
    return "unknown";
}

ProvingSystem::ProvingSystem(std::uint64_t setup_seed) {
    Bytes pre{'z', 'k', 'g', '.', 's', 'e', 't', 'u', 'p'};
    put_be(pre, setup_seed, 8);
    domain_tag_ = hash_bytes(pre);
}

Hash ProvingSystem::bind(const U256& pi, const Hash& old_root, const Hash& new_root) const {
    return hash_concat({domain_tag_.view(), pi.view(), old_root.view(), new_root.view()});
}

std::optional<Violation> ProvingSystem::check_block(const BlockWitness& w) const {
    // Signatures are checked over the tx rebuilt with the validator's group.
    for (const auto& stx : w.transactions) {
        if (stx.tx.is_priority() || stx.tx.type() == OpType::Noop) continue;
        SignedTransaction rebuilt = stx;
        rebuilt.tx.group = w.group;
        if (!verify_signature(rebuilt)) return Violation::Signature;
    }
    for (const auto& stx : w.transactions)
        if (stx.tx.group != w.group) return Violation::GroupMismatch;

    if (w.pre_state.root() != w.old_root || w.pre_state.group() != w.group) return Violation::StateTransition;
    GroupState state = w.pre_state;
    Bytes pubdata;
    for (const auto& stx : w.transactions) {
        ApplyContext ctx{.l1_authorized = stx.tx.is_priority(), .replay = false, .policy = &w.policy};
        try {
            auto res = apply_transaction(state, stx, ctx);
            auto chunked = res.pubdata;
            chunked.resize(chunk_count(res.applied.type()) * kChunkBytes, 0);
            put_bytes(pubdata, chunked);
        } catch (const RollupError& e) {
            return e.code() == ErrorCode::NotWhitelisted ? Violation::Policy : Violation::StateTransition;
        }
    }
    if (state.root() != w.new_root || pubdata != w.pubdata) return Violation::StateTransition;

    auto h = block_hash(w.old_root, w.new_root, w.block_number, w.pubdata);
    if (w.public_input.sub_small(w.group.value).as_hash() != h) return Violation::PublicInput;
    return std::nullopt;
}

BlockProof ProvingSystem::make_block_proof(const BlockWitness& w) const {
    if (auto v = check_block(w)) throw ProofError(*v);
    return BlockProof(w.public_input, bind(w.public_input, w.old_root, w.new_root));
}

AggregatedProof ProvingSystem::aggregate_proofs(std::vector<BlockProof> proofs) const {
    if (proofs.empty()) throw RollupError(ErrorCode::InvalidArgument, "cannot aggregate zero proofs");
    Bytes cat;
    for (const auto& p : proofs) put_bytes(cat, p.binding().view());
    auto agg = hash_concat({domain_tag_.view(), cat});
    return AggregatedProof(std::move(proofs), agg);
}

bool ProvingSystem::verify_aggregate(const AggregatedProof& agg, std::span<const ProofStatement> expected) const {
    if (agg.size() == 0 || agg.size() != expected.size()) return false;
    Bytes cat;
    for (std::size_t i = 0; i < expected.size(); ++i) {
        const auto& p = agg.proofs()[i];
        const auto& s = expected[i];
        if (p.public_input() != s.public_input) return false;
        if (p.binding() != bind(s.public_input, s.old_root, s.new_root)) return false;
        put_bytes(cat, p.binding().view());
    }
    return hash_concat({domain_tag_.view(), cat}) == agg.binding();
}

std::uint64_t estimate_constraints(std::size_t block_chunks, CircuitVariant variant) {
    if (block_chunks == 0) throw RollupError(ErrorCode::InvalidArgument, "block must have at least one chunk");
    for (const auto& row : kCircuitTable)
        if (row.chunks == block_chunks) return variant == CircuitVariant::Baseline ? row.baseline : row.modified;
    double v = interpolate(block_chunks, [variant](const CircuitRow& r) {
        return static_cast<double>(variant == CircuitVariant::Baseline ? r.baseline : r.modified);
    });
    return v < 1.0 ? 1 : static_cast<std::uint64_t>(std::llround(v));
}

double simulated_prove_seconds(std::size_t block_chunks, CircuitVariant variant, double scale) {
    double s = interpolate(block_chunks, [variant](const CircuitRow& r) {
        return variant == CircuitVariant::Baseline ? r.baseline_seconds : r.modified_seconds;
    });
    return std::max(0.0, s) * scale;
}

}  // namespace zkg
