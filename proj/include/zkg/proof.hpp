#pragma once

#include <optional>
#include <span>

#include "zkg/state_tree.hpp"

namespace zkg {

/// H(old_root ‖ new_root ‖ block_number ‖ pubdata): the block commitment.
Hash block_hash(const Hash& old_root, const Hash& new_root, std::uint64_t block_number, ByteView pubdata);

/// Public input of the block circuit: (block hash + group id) mod 2^256.
U256 public_input_for(const Hash& block_hash, GroupId group);

/// Everything the block circuit sees. `pre_state` stands in for the Merkle
/// witnesses and must hash to `old_root`.
struct BlockWitness {
    GroupId group;
    Hash old_root;
    Hash new_root;
    std::uint64_t block_number = 0;
    std::vector<SignedTransaction> transactions;
    Bytes pubdata;
    U256 public_input;
    GroupState pre_state{GroupId{0}};
    AccessPolicy policy;
};

/// In-circuit conditions, in check order.
enum class Violation {
    Signature,        // a signature fails over the tx rebuilt with the witness group
    GroupMismatch,    // a tx carries a different group tag
    StateTransition,  // re-execution does not reproduce new_root or pubdata
    PublicInput,      // PI - group is not the block hash
    Policy,           // permissioned-group access rule broken
};

std::string_view violation_name(Violation v);

class ProvingSystem;

class BlockProof {
public:
    [[nodiscard]] const U256& public_input() const { return public_input_; }
    [[nodiscard]] const Hash& binding() const { return binding_; }
    friend bool operator==(const BlockProof&, const BlockProof&) = default;

private:
    friend class ProvingSystem;
    BlockProof(const U256& pi, const Hash& binding) : public_input_(pi), binding_(binding) {}

    U256 public_input_;
    Hash binding_;
};

class AggregatedProof {
public:
    [[nodiscard]] const std::vector<BlockProof>& proofs() const { return proofs_; }
    [[nodiscard]] const Hash& binding() const { return binding_; }
    [[nodiscard]] std::size_t size() const { return proofs_.size(); }

private:
    friend class ProvingSystem;
    AggregatedProof(std::vector<BlockProof> proofs, const Hash& binding)
        : proofs_(std::move(proofs)), binding_(binding) {}

    std::vector<BlockProof> proofs_;
    Hash binding_;
};

/// What the verifier checks one inner proof against: the PI it rebuilt plus
/// the committed roots.
struct ProofStatement {
    U256 public_input;
    Hash old_root;
    Hash new_root;
};

class ProofError : public RollupError {
public:
    explicit ProofError(Violation v)
        : RollupError(ErrorCode::ProofRejected, "block check failed: " + std::string(violation_name(v))),
          violation_(v) {}
    [[nodiscard]] Violation violation() const { return violation_; }

private:
    Violation violation_;
};

/// Honest-prover stand-in for the block and aggregation circuits. The setup
/// tag plays the role of the shared proving/verifying key.
class ProvingSystem {
public:
    explicit ProvingSystem(std::uint64_t setup_seed = 0);

    [[nodiscard]] std::optional<Violation> check_block(const BlockWitness& w) const;
    /// Throws ProofError when the witness fails check_block.
    [[nodiscard]] BlockProof make_block_proof(const BlockWitness& w) const;
    /// Throws on an empty list.
    [[nodiscard]] AggregatedProof aggregate_proofs(std::vector<BlockProof> proofs) const;
    [[nodiscard]] bool verify_aggregate(const AggregatedProof& agg,
                                        std::span<const ProofStatement> expected) const;

private:
    [[nodiscard]] Hash bind(const U256& pi, const Hash& old_root, const Hash& new_root) const;

    Hash domain_tag_;
};

enum class CircuitVariant { Baseline, Modified };

/// Block-circuit size, calibrated to measured counts at 26/78/182/390 chunks and
/// linear between (and beyond) those points.
std::uint64_t estimate_constraints(std::size_t block_chunks, CircuitVariant variant);

/// Simulated proving time in seconds, from the measured per-size timings,
/// multiplied by `scale`.
double simulated_prove_seconds(std::size_t block_chunks, CircuitVariant variant, double scale = 1.0);

}  // namespace zkg
