#include "zkg/pipeline.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

namespace zkg {

namespace {

struct SignerSlot {
    AccountId account;
    Nonce nonce;
};

std::vector<SignerSlot> signer_slots(const Transaction& tx) {
    switch (tx.type()) {
        case OpType::TransferToNew: {
            const auto& o = tx.as<op::TransferToNew>();
            return {{o.from, o.nonce}};
        }
        case OpType::Withdraw: {
            const auto& o = tx.as<op::Withdraw>();
            return {{o.account, o.nonce}};
        }
        case OpType::Transfer: {
            const auto& o = tx.as<op::Transfer>();
            return {{o.from, o.nonce}};
        }
        case OpType::ChangePubKey: {
            const auto& o = tx.as<op::ChangePubKey>();
            return {{o.account, o.nonce}};
        }
        case OpType::MintNFT: {
            const auto& o = tx.as<op::MintNFT>();
            return {{o.creator, o.nonce}};
        }
        case OpType::WithdrawNFT: {
            const auto& o = tx.as<op::WithdrawNFT>();
            return {{o.account, o.nonce}};
        }
        case OpType::Swap: {
            const auto& o = tx.as<op::Swap>();
            return {{o.account_a, o.nonce_a}, {o.account_b, o.nonce_b}};
        }
        case OpType::ChangeGroup: {
            const auto& o = tx.as<op::ChangeGroup>();
            return {{o.account, o.nonce}};
        }
        default:
            return {};
    }
}

Admission reject(RejectReason r, std::string detail) { return Admission{r, std::move(detail)}; }

std::string_view phase_of(std::string_view function) {
    if (function == "commitBlocks") return "commit";
    if (function == "proveBlocks") return "prove";
    if (function == "executeBlocks") return "execute";
    return {};
}

JobResult process_job(const ProvingSystem& proving, ProofJob job) {
    JobResult r;
    r.id = job.id;
    try {
        r.proof = proving.make_block_proof(job.witness);
    } catch (const ProofError& e) {
        r.violation = e.violation();
        r.error = e.what();
    } catch (const std::exception& e) {
        r.error = e.what();
    }
    return r;
}

}  // namespace

std::string_view reject_reason_name(RejectReason r) {
    switch (r) {
        case RejectReason::BadSignature: return "bad_signature";
        case RejectReason::WrongGroup: return "wrong_group";
        case RejectReason::PriorityOnly: return "priority_only";
        case RejectReason::Unsupported: return "unsupported";
        case RejectReason::UnknownAccount: return "unknown_account";
        case RejectReason::StaleNonce: return "stale_nonce";
        case RejectReason::NonceGap: return "nonce_gap";
        case RejectReason::NotWhitelisted: return "not_whitelisted";
        case RejectReason::Malformed: return "malformed";
    }
    return "unknown";
}

CommitInfo Block::commit_info() const { return CommitInfo{group, number, capacity_chunks, old_root, new_root, pubdata}; }

std::size_t Block::used_chunks() const {
    std::size_t n = 0;
    for (const auto& stx : transactions)
        if (stx.tx.type() != OpType::Noop) n += chunk_count(stx.tx.type());
    return n;
}

Admission Mempool::check(const GroupState& state, const AccessPolicy& policy, ContractMode mode,
                         const SignedTransaction& stx) const {
    const auto type = stx.tx.type();
    if (type == OpType::Noop) return reject(RejectReason::Malformed, "noop is not a user transaction");
    if (stx.tx.is_priority()) return reject(RejectReason::PriorityOnly, "priority operations are requested on L1");
    if (mode == ContractMode::Baseline && type == OpType::ChangeGroup)
        return reject(RejectReason::Unsupported, "baseline contract has no groups to move between");
    if (stx.tx.group != group_) return reject(RejectReason::WrongGroup, "transaction tagged for another group");
    if (!verify_signature(stx)) return reject(RejectReason::BadSignature, "signature does not verify");
    try {
        (void)encode_pubdata(stx.tx);
    } catch (const RollupError& e) {
        return reject(RejectReason::Malformed, e.what());
    }
    if (type == OpType::ChangeGroup) {
        const auto& o = stx.tx.as<op::ChangeGroup>();
        if (o.source_group != group_) return reject(RejectReason::WrongGroup, "source group is not this group");
        if (o.destination_group == o.source_group)
            return reject(RejectReason::Malformed, "source and destination group are equal");
    }

    auto slots = signer_slots(stx.tx);
    for (std::size_t i = 0; i < slots.size(); ++i) {
        const auto& slot = slots[i];
        const Account* acc = state.account(slot.account);
        if (!acc) return reject(RejectReason::UnknownAccount, "unknown account " + std::to_string(slot.account.value));
        const PubKey& signer = i == 0 ? stx.signer_pubkey : stx.cosignature->signer_pubkey;
        if (acc->pubkey.is_zero()) {
            if (type != OpType::ChangePubKey || address_of(signer) != acc->address)
                return reject(RejectReason::BadSignature, "account has no signing key");
        } else if (acc->pubkey != signer) {
            return reject(RejectReason::BadSignature, "signer is not the account key");
        }
        auto it = in_flight_.find(slot.account);
        Nonce expected = acc->nonce + (it == in_flight_.end() ? 0 : it->second);
        if (slot.nonce < expected) return reject(RejectReason::StaleNonce, "nonce already used");
        if (slot.nonce > expected) return reject(RejectReason::NonceGap, "nonce skips ahead");
        if (!is_withdrawal_type(type) && !policy.full_rights(acc->address))
            return reject(RejectReason::NotWhitelisted, "account may only withdraw from this group");
    }
    return {};
}

Admission Mempool::submit(const GroupState& state, const AccessPolicy& policy, ContractMode mode,
                          const SignedTransaction& stx) {
    auto a = check(state, policy, mode, stx);
    if (!a) return a;
    for (const auto& slot : signer_slots(stx.tx)) ++in_flight_[slot.account];
    queue_.push_back(stx);
    return a;
}

std::uint32_t Mempool::pending_for(AccountId account) const {
    auto it = in_flight_.find(account);
    return it == in_flight_.end() ? 0 : it->second;
}

void Mempool::pop_front() {
    for (const auto& slot : signer_slots(queue_.front().tx)) {
        auto it = in_flight_.find(slot.account);
        if (it != in_flight_.end() && --it->second == 0) in_flight_.erase(it);
    }
    queue_.pop_front();
}

std::uint64_t JobQueue::push(BlockWitness witness) {
    std::lock_guard lk(mu_);
    if (closed_) throw RollupError(ErrorCode::InvalidArgument, "job queue is closed");
    auto id = next_id_++;
    jobs_.push_back(ProofJob{id, std::move(witness)});
    jobs_cv_.notify_one();
    return id;
}

std::optional<ProofJob> JobQueue::try_pop() {
    std::lock_guard lk(mu_);
    if (jobs_.empty()) return std::nullopt;
    auto job = std::move(jobs_.front());
    jobs_.pop_front();
    ++deliveries_;
    return job;
}

std::optional<ProofJob> JobQueue::pop() {
    std::unique_lock lk(mu_);
    jobs_cv_.wait(lk, [this] { return closed_ || !jobs_.empty(); });
    if (jobs_.empty()) return std::nullopt;
    auto job = std::move(jobs_.front());
    jobs_.pop_front();
    ++deliveries_;
    return job;
}

void JobQueue::close() {
    std::lock_guard lk(mu_);
    closed_ = true;
    jobs_cv_.notify_all();
}

void JobQueue::post(JobResult result) {
    std::lock_guard lk(mu_);
    auto id = result.id;
    results_.insert_or_assign(id, std::move(result));
    results_cv_.notify_all();
}

std::vector<JobResult> JobQueue::collect(const std::vector<std::uint64_t>& ids) {
    std::unique_lock lk(mu_);
    results_cv_.wait(lk, [&] {
        return std::all_of(ids.begin(), ids.end(), [&](auto id) { return results_.contains(id); });
    });
    std::vector<JobResult> out;
    out.reserve(ids.size());
    for (auto id : ids) {
        auto node = results_.extract(id);
        out.push_back(std::move(node.mapped()));
    }
    return out;
}

std::size_t JobQueue::pending() const {
    std::lock_guard lk(mu_);
    return jobs_.size();
}

bool prover_worker_step(const ProvingSystem& proving, JobQueue& queue) {
    auto job = queue.try_pop();
    if (!job) return false;
    queue.post(process_job(proving, std::move(*job)));
    return true;
}

ProverPool::ProverPool(const ProvingSystem& proving, std::size_t workers) : proving_(proving) {
    if (workers == 0) throw RollupError(ErrorCode::Config, "prover pool needs at least one worker");
    for (std::size_t i = 0; i < workers; ++i)
        threads_.emplace_back([this] {
            while (auto job = queue_.pop()) queue_.post(process_job(proving_, std::move(*job)));
        });
}

ProverPool::~ProverPool() {
    queue_.close();
    for (auto& t : threads_) t.join();
}

std::vector<JobResult> ProverPool::prove_all(std::vector<BlockWitness> witnesses) {
    std::vector<std::uint64_t> ids;
    ids.reserve(witnesses.size());
    for (auto& w : witnesses) ids.push_back(queue_.push(std::move(w)));
    return queue_.collect(ids);
}

std::uint64_t TxCost::total() const {
    std::uint64_t t = 0;
    for (auto g : gas) t += g;
    return t;
}

std::size_t category_index(GasCategory c) { return static_cast<std::size_t>(c); }

std::optional<TokenId> profiled_token(const Transaction& tx) {
    switch (tx.type()) {
        case OpType::Deposit: return tx.as<op::Deposit>().token;
        case OpType::Withdraw: return tx.as<op::Withdraw>().token;
        case OpType::FullExit: return tx.as<op::FullExit>().token;
        case OpType::ForcedExit: return tx.as<op::ForcedExit>().token;
        case OpType::ChangeGroup: return tx.as<op::ChangeGroup>().token;
        case OpType::FullChangeGroup: return tx.as<op::FullChangeGroup>().token;
        default: return std::nullopt;
    }
}

std::uint64_t CycleReport::phase_gas(std::string_view phase) const {
    std::uint64_t t = 0;
    for (const auto& r : rows)
        if (r.phase == phase) t += r.gas;
    return t;
}

std::string CycleReport::to_csv() const {
    std::ostringstream out;
    out << "phase,group,block,gas,simulated_prove_seconds\n";
    for (const auto& r : rows)
        out << r.phase << ',' << r.group.value << ',' << r.block << ',' << r.gas << ',' << std::fixed
            << std::setprecision(3) << r.simulated_prove_seconds << '\n';
    return out.str();
}

ValidatorNode::ValidatorNode(L1Contract& contract, GroupId group, const L1Address& address)
    : contract_(contract), group_(group), address_(address), state_(group), mempool_(group) {
    auto bound = contract.group_of_validator(address);
    if (!bound || *bound != group) throw RollupError(ErrorCode::Unauthorized, "address is not this group's validator");
    if (contract.committed_count(group) != 0)
        throw RollupError(ErrorCode::InvalidArgument, "validator must start from an empty group");
}

Admission ValidatorNode::submit_tx(const SignedTransaction& stx) {
    return mempool_.submit(state_, contract_.policy(group_), contract_.mode(), stx);
}

Block ValidatorNode::build_block(std::size_t capacity) {
    if (capacity == 0) throw RollupError(ErrorCode::Config, "block capacity must be positive");
    const auto queue = contract_.priority_queue(group_);
    const auto policy = contract_.policy(group_);

    Block b;
    b.group = group_;
    b.number = next_number_;
    b.capacity_chunks = capacity;
    b.pre_state = state_;
    b.old_root = state_.root();

    std::size_t used = 0;
    auto pack = [&](const SignedTransaction& stx, const ApplyResult& res) {
        Bytes chunked = res.pubdata;
        chunked.resize(chunk_count(res.applied.type()) * kChunkBytes, 0);
        put_bytes(b.pubdata, chunked);
        b.transactions.push_back(stx);
        b.applied.push_back(res.applied);
        used += chunk_count(res.applied.type());
    };
    auto fits = [&](OpType t) {
        auto k = chunk_count(t);
        if (k > capacity)
            throw RollupError(ErrorCode::Config, std::string(op_name(t)) + " does not fit in a block of " +
                                                     std::to_string(capacity) + " chunks");
        return used + k <= capacity;
    };

    for (;;) {
        if (packed_priority_ < queue.size()) {
            const auto& req = queue[packed_priority_];
            if (!fits(req.op.type())) break;
            auto stx = unsigned_transaction(req.op);
            auto res = apply_transaction(state_, stx, ApplyContext{.l1_authorized = true, .policy = &policy});
            pack(stx, res);
            ++packed_priority_;
            continue;
        }
        if (mempool_.empty()) break;
        const auto& stx = mempool_.front();
        if (!fits(stx.tx.type())) break;
        try {
            auto res = apply_transaction(state_, stx, ApplyContext{.policy = &policy});
            pack(stx, res);
        } catch (const RollupError& e) {
            dropped_.push_back(DroppedTx{stx, e.code(), e.what()});
        }
        mempool_.pop_front();
    }
    while (used < capacity) {
        auto stx = unsigned_transaction(Transaction{group_, op::Noop{}});
        auto res = apply_transaction(state_, stx);
        pack(stx, res);
    }
    b.new_root = state_.root();
    ++next_number_;
    return b;
}

BlockWitness ValidatorNode::witness_for(const Block& b) const {
    BlockWitness w;
    w.group = b.group;
    w.old_root = b.old_root;
    w.new_root = b.new_root;
    w.block_number = b.number;
    w.transactions = b.transactions;
    w.pubdata = b.pubdata;
    w.public_input = public_input_for(block_hash(b.old_root, b.new_root, b.number, b.pubdata), b.group);
    w.pre_state = b.pre_state;
    w.policy = contract_.policy(b.group);
    return w;
}

CycleReport ValidatorNode::run_cycle(std::size_t n_blocks, std::size_t capacity, std::size_t aggregate_n,
                                     ProverPool* pool, double prove_time_scale) {
    if (n_blocks == 0 || aggregate_n == 0 || n_blocks % aggregate_n != 0)
        throw RollupError(ErrorCode::InvalidArgument, "block count must be a positive multiple of the aggregation");

    auto saved_state = state_;
    auto saved_mempool = mempool_;
    auto saved_number = next_number_;
    auto saved_dropped = dropped_.size();

    CycleReport report;
    report.group = group_;
    std::vector<CommitInfo> infos;
    try {
        for (std::size_t i = 0; i < n_blocks; ++i) {
            report.blocks.push_back(build_block(capacity));
            infos.push_back(report.blocks.back().commit_info());
        }
        contract_.commit_blocks(address_, infos);
    } catch (...) {
        state_ = std::move(saved_state);
        mempool_ = std::move(saved_mempool);
        next_number_ = saved_number;
        dropped_.resize(saved_dropped);
        packed_priority_ = 0;
        throw;
    }
    packed_priority_ = 0;
    report.dropped.assign(dropped_.begin() + static_cast<std::ptrdiff_t>(saved_dropped), dropped_.end());
    for (const auto& b : report.blocks) {
        history_.push_back(b);
        history_.back().pre_state = GroupState(group_);
        roots_.push_back(b.new_root);
    }
    report.first_block = report.blocks.front().number;
    report.last_block = report.blocks.back().number;

    std::vector<BlockWitness> witnesses;
    for (const auto& b : report.blocks) witnesses.push_back(witness_for(b));
    std::vector<JobResult> results;
    if (pool) {
        results = pool->prove_all(std::move(witnesses));
    } else {
        const auto& proving = contract_.proving_system();
        for (std::size_t i = 0; i < witnesses.size(); ++i)
            results.push_back(process_job(proving, ProofJob{i + 1, std::move(witnesses[i])}));
    }
    for (const auto& r : results) {
        if (r.violation) throw ProofError(*r.violation);
        if (!r.ok()) throw RollupError(ErrorCode::ProofRejected, r.error);
    }

    for (std::size_t start = 0; start < n_blocks; start += aggregate_n) {
        std::vector<BlockProof> group_proofs;
        for (std::size_t i = start; i < start + aggregate_n; ++i) group_proofs.push_back(*results[i].proof);
        auto agg = contract_.proving_system().aggregate_proofs(std::move(group_proofs));
        contract_.prove_blocks(address_, agg, report.first_block + start, report.first_block + start + aggregate_n - 1);
    }
    contract_.execute_blocks(address_, report.first_block, report.last_block);

    // Attribution from the contract's gas ledger.
    const auto variant =
        contract_.mode() == ContractMode::Baseline ? CircuitVariant::Baseline : CircuitVariant::Modified;
    const auto ledger = contract_.gas_ledger();
    for (const auto& b : report.blocks) {
        std::array<std::uint64_t, 6> base{};
        std::map<std::string_view, std::uint64_t> per_phase;
        std::vector<TxCost> costs;
        std::vector<std::size_t> cost_of(b.transactions.size(), SIZE_MAX);
        for (std::uint32_t i = 0; i < b.applied.size(); ++i) {
            if (b.applied[i].type() == OpType::Noop) {
                ++report.noop_ops;
                continue;
            }
            cost_of[i] = costs.size();
            costs.push_back(TxCost{group_, b.number, i, b.applied[i].type(), profiled_token(b.applied[i]), {}});
        }
        std::array<std::uint64_t, 6> extras_unowned{};
        for (const auto& c : ledger) {
            if (c.group != group_ || c.block != b.number) continue;
            auto phase = phase_of(c.function);
            if (phase.empty()) continue;
            per_phase[phase] += c.gas;
            auto cat = category_index(c.category);
            if (c.op_index) {
                auto idx = *c.op_index < cost_of.size() ? cost_of[*c.op_index] : SIZE_MAX;
                if (idx == SIZE_MAX)
                    extras_unowned[cat] += c.gas;
                else
                    costs[idx].gas[cat] += c.gas;
            } else {
                base[cat] += c.gas;
            }
        }
        for (auto cat : {GasCategory::CommitBase, GasCategory::ProveBase, GasCategory::ExecuteBase}) {
            auto ci = category_index(cat);
            std::uint64_t attributed = 0;
            for (auto& tc : costs) {
                tc.gas[ci] = base[ci] * chunk_count(tc.type) / b.capacity_chunks;
                attributed += tc.gas[ci];
            }
            report.validator_gas[ci] += base[ci] - attributed;
        }
        for (std::size_t ci = 0; ci < 6; ++ci) report.validator_gas[ci] += extras_unowned[ci];
        for (auto& tc : costs) report.tx_costs.push_back(tc);
        for (std::string_view phase : {"commit", "prove", "execute"}) {
            double secs = phase == "prove" ? simulated_prove_seconds(b.capacity_chunks, variant, prove_time_scale) : 0;
            report.rows.push_back(CycleRow{std::string(phase), group_, b.number, per_phase[phase], secs});
        }
    }
    return report;
}

}  // namespace zkg
