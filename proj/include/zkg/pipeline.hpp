#pragma once

#include <atomic>
#include <condition_variable>
#include <deque>
#include <thread>

#include "zkg/contract.hpp"

namespace zkg {

inline constexpr std::array<std::size_t, 4> kBlockCapacities = {26, 78, 182, 390};

struct Block {
    GroupId group;
    std::uint64_t number = 0;
    std::size_t capacity_chunks = 0;
    /// Packed ops in order, noop padding included.
    std::vector<SignedTransaction> transactions;
    /// The same ops with validator-assigned fields resolved.
    std::vector<Transaction> applied;
    Hash old_root;
    Hash new_root;
    Bytes pubdata;
    GroupState pre_state{GroupId{0}};

    [[nodiscard]] CommitInfo commit_info() const;
    [[nodiscard]] std::size_t used_chunks() const;
    [[nodiscard]] std::size_t noop_chunks() const { return capacity_chunks - used_chunks(); }
};

enum class RejectReason {
    BadSignature,
    WrongGroup,
    PriorityOnly,
    Unsupported,
    UnknownAccount,
    StaleNonce,
    NonceGap,
    NotWhitelisted,
    Malformed,
};
std::string_view reject_reason_name(RejectReason r);

struct Admission {
    std::optional<RejectReason> reason;
    std::string detail;

    [[nodiscard]] bool accepted() const { return !reason; }
    explicit operator bool() const { return accepted(); }
};

/// An admitted tx that failed when applied at packing time.
struct DroppedTx {
    SignedTransaction stx;
    ErrorCode code;
    std::string detail;
};

/// FIFO of admitted user transactions for one group.
class Mempool {
public:
    explicit Mempool(GroupId group) : group_(group) {}

    /// Static admission checks against the validator's current view.
    [[nodiscard]] Admission check(const GroupState& state, const AccessPolicy& policy, ContractMode mode,
                                  const SignedTransaction& stx) const;
    Admission submit(const GroupState& state, const AccessPolicy& policy, ContractMode mode,
                     const SignedTransaction& stx);

    [[nodiscard]] bool empty() const { return queue_.empty(); }
    [[nodiscard]] std::size_t size() const { return queue_.size(); }
    [[nodiscard]] const SignedTransaction& front() const { return queue_.front(); }
    /// Admitted txs still queued for the account.
    [[nodiscard]] std::uint32_t pending_for(AccountId account) const;
    void pop_front();

private:
    GroupId group_;
    std::deque<SignedTransaction> queue_;
    std::map<AccountId, std::uint32_t> in_flight_;
};

// Exactly-once proof job delivery.

struct ProofJob {
    std::uint64_t id = 0;
    BlockWitness witness;
};

struct JobResult {
    std::uint64_t id = 0;
    std::optional<BlockProof> proof;
    std::optional<Violation> violation;
    std::string error;
    [[nodiscard]] bool ok() const { return proof.has_value(); }
};

class JobQueue {
public:
    /// Returns the job id.
    std::uint64_t push(BlockWitness witness);
    /// Non-blocking; nullopt when empty.
    std::optional<ProofJob> try_pop();
    /// Blocks until a job is available or the queue is closed.
    std::optional<ProofJob> pop();
    void close();

    void post(JobResult result);
    /// Blocks until every listed job has a result; removes and returns them in order.
    std::vector<JobResult> collect(const std::vector<std::uint64_t>& ids);

    [[nodiscard]] std::size_t pending() const;
    /// Number of times any job has been handed to a worker.
    [[nodiscard]] std::uint64_t deliveries() const { return deliveries_.load(); }

private:
    mutable std::mutex mu_;
    std::condition_variable jobs_cv_;
    std::condition_variable results_cv_;
    std::deque<ProofJob> jobs_;
    std::map<std::uint64_t, JobResult> results_;
    std::uint64_t next_id_ = 1;
    bool closed_ = false;
    std::atomic<std::uint64_t> deliveries_{0};
};

/// One prover iteration: pops a job if any, checks and proves it, posts the result.
/// Returns false when the queue was idle.
bool prover_worker_step(const ProvingSystem& proving, JobQueue& queue);

class ProverPool {
public:
    ProverPool(const ProvingSystem& proving, std::size_t workers);
    ~ProverPool();
    ProverPool(const ProverPool&) = delete;
    ProverPool& operator=(const ProverPool&) = delete;

    /// Results in witness order. Safe to call from several threads.
    std::vector<JobResult> prove_all(std::vector<BlockWitness> witnesses);
    [[nodiscard]] JobQueue& queue() { return queue_; }
    [[nodiscard]] std::size_t workers() const { return threads_.size(); }

private:
    const ProvingSystem& proving_;
    JobQueue queue_;
    std::vector<std::thread> threads_;
};

struct CycleRow {
    std::string phase;  // commit, prove, execute
    GroupId group;
    std::uint64_t block = 0;
    std::uint64_t gas = 0;
    double simulated_prove_seconds = 0;
};

/// Gas attributed to one packed op, by category.
struct TxCost {
    GroupId group;
    std::uint64_t block = 0;
    std::uint32_t index = 0;
    OpType type = OpType::Noop;
    /// Token whose profile drives the op's gas, where it matters.
    std::optional<TokenId> token;
    std::array<std::uint64_t, 6> gas{};
    [[nodiscard]] std::uint64_t total() const;
};

struct CycleReport {
    GroupId group;
    std::uint64_t first_block = 0;
    std::uint64_t last_block = 0;
    std::vector<CycleRow> rows;
    std::vector<TxCost> tx_costs;
    /// Block gas not attributed to any op: noop padding and rounding.
    std::array<std::uint64_t, 6> validator_gas{};
    std::uint64_t noop_ops = 0;
    std::vector<DroppedTx> dropped;
    std::vector<Block> blocks;

    [[nodiscard]] std::uint64_t phase_gas(std::string_view phase) const;
    [[nodiscard]] std::string to_csv() const;
};

std::size_t category_index(GasCategory c);

/// Token of a Deposit, Withdraw, exit or ChangeGroup op; nullopt otherwise.
std::optional<TokenId> profiled_token(const Transaction& tx);

/// Validator node of one group: live state, mempool and the block pipeline.
class ValidatorNode {
public:
    ValidatorNode(L1Contract& contract, GroupId group, const L1Address& address);

    [[nodiscard]] GroupId group() const { return group_; }
    [[nodiscard]] const L1Address& address() const { return address_; }
    [[nodiscard]] const GroupState& state() const { return state_; }
    [[nodiscard]] const Mempool& mempool() const { return mempool_; }

    Admission submit_tx(const SignedTransaction& stx);

    /// Packs priority ops first, then the mempool, strictly in order; the first
    /// op that does not fit ends the block. Advances the live state.
    Block build_block(std::size_t capacity_chunks);
    [[nodiscard]] BlockWitness witness_for(const Block& b) const;

    /// Builds n_blocks, commits them in one call, proves in groups of
    /// aggregate_n, executes in one call. A failure before the commit lands
    /// restores the node to its state before the cycle.
    CycleReport run_cycle(std::size_t n_blocks, std::size_t capacity_chunks, std::size_t aggregate_n,
                          ProverPool* pool = nullptr, double prove_time_scale = 1.0);

    /// Every block this node has committed, in order.
    [[nodiscard]] const std::vector<Block>& history() const { return history_; }
    /// Live root after each committed block, in order.
    [[nodiscard]] const std::vector<Hash>& roots() const { return roots_; }

private:
    L1Contract& contract_;
    GroupId group_;
    L1Address address_;
    GroupState state_;
    Mempool mempool_;
    /// Contract queue entries already packed into uncommitted blocks.
    std::size_t packed_priority_ = 0;
    std::uint64_t next_number_ = 1;
    std::vector<DroppedTx> dropped_;
    std::vector<Block> history_;
    std::vector<Hash> roots_;
};

}  // namespace zkg
