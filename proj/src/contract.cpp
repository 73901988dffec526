#include "zkg/contract.hpp"

namespace zkg {

namespace {

[[noreturn]] void fail(ErrorCode code, const std::string& msg) { throw RollupError(code, msg); }

bool request_matches(const Transaction& queued, const Transaction& published) {
    if (queued.type() != published.type()) return false;
    switch (queued.type()) {
        case OpType::Deposit: {
            const auto& q = queued.as<op::Deposit>();
            const auto& p = published.as<op::Deposit>();
            return q.owner == p.owner && q.token == p.token && q.amount == p.amount;
        }
        case OpType::FullExit: {
            const auto& q = queued.as<op::FullExit>();
            const auto& p = published.as<op::FullExit>();
            return q.account == p.account && q.owner == p.owner && q.token == p.token;
        }
        case OpType::ForcedExit: {
            const auto& q = queued.as<op::ForcedExit>();
            const auto& p = published.as<op::ForcedExit>();
            return q.target == p.target && q.token == p.token && q.target_address == p.target_address;
        }
        case OpType::FullChangeGroup: {
            const auto& q = queued.as<op::FullChangeGroup>();
            const auto& p = published.as<op::FullChangeGroup>();
            return q.account == p.account && q.owner == p.owner && q.token == p.token &&
                   q.source_group == p.source_group && q.destination_group == p.destination_group;
        }
        default:
            return false;
    }
}

// Splits a per-call constant evenly over n blocks; the remainder goes to the last.
std::uint64_t share(std::uint64_t call, std::size_t n, std::size_t i) {
    return call / n + (i + 1 == n ? call % n : 0);
}

}  // namespace

L1Contract::L1Contract(ContractMode mode, GasConfig config, ContractOptions options)
    : mode_(mode), options_(options), proving_(options.setup_seed), meter_(config.profile(mode)) {
    meter_.charge({std::nullopt, "deploy", GasCategory::External, meter_.constants().deploy, {}, {}, {}});
}

GroupRecord& L1Contract::record(GroupId g) {
    if (g.value >= groups_.size()) fail(ErrorCode::InvalidArgument, "unknown group " + std::to_string(g.value));
    return groups_[g.value];
}

const GroupRecord& L1Contract::record(GroupId g) const {
    if (g.value >= groups_.size()) fail(ErrorCode::InvalidArgument, "unknown group " + std::to_string(g.value));
    return groups_[g.value];
}

GroupId L1Contract::bound_group(const L1Address& caller) const {
    auto it = validator_of_.find(caller);
    if (it == validator_of_.end()) fail(ErrorCode::Unauthorized, "caller is not a bound validator");
    return it->second;
}

std::uint64_t L1Contract::enqueue(GroupRecord& rec, Transaction op, Amount locked) {
    op.group = rec.config.id;
    auto serial = next_serial_++;
    rec.queue.push_back(PriorityRequest{serial, std::move(op), rec.committed, locked});
    return serial;
}

void L1Contract::credit_pending(const L1Address& owner, TokenId token, Amount amount) {
    if (amount == 0) return;
    pending_[{owner, token}] += amount;
}

GroupId L1Contract::create_group(const L1Address& caller, bool permissioned, DataMode data_mode,
                                 const L1Address& validator) {
    std::lock_guard lk(mu_);
    if (mode_ == ContractMode::Baseline && !groups_.empty())
        fail(ErrorCode::NotPermitted, "baseline contract hosts a single rollup");
    if (groups_.size() >= kMaxGroups) fail(ErrorCode::CapacityExhausted, "group capacity exhausted");
    if (validator.is_zero()) fail(ErrorCode::InvalidArgument, "zero validator address");
    if (validator_of_.contains(validator)) fail(ErrorCode::ValidatorBound, "validator already bound to a group");
    GroupId id{static_cast<std::uint16_t>(groups_.size())};
    GroupRecord rec;
    rec.config = GroupConfig{id, permissioned, data_mode, validator, caller};
    rec.policy.permissioned = permissioned;
    groups_.push_back(std::move(rec));
    validator_of_[validator] = id;
    meter_.charge({id, "createGroup", GasCategory::External, meter_.constants().create_group, {}, {}, {}});
    return id;
}

void L1Contract::set_whitelist(const L1Address& caller, GroupId group, const L1Address& address, bool allowed) {
    std::lock_guard lk(mu_);
    auto& rec = record(group);
    if (caller != rec.config.governor) fail(ErrorCode::Unauthorized, "only the governor manages the whitelist");
    if (!rec.config.permissioned) fail(ErrorCode::NotPermitted, "group is permissionless");
    if (allowed)
        rec.policy.whitelist.insert(address);
    else
        rec.policy.whitelist.erase(address);
    meter_.charge({group, "setWhitelist", GasCategory::External, meter_.constants().set_whitelist, {}, {}, {}});
}

std::uint64_t L1Contract::deposit(const L1Address& caller, GroupId group, TokenId token, Amount amount) {
    std::lock_guard lk(mu_);
    auto& rec = record(group);
    if (rec.frozen) fail(ErrorCode::Frozen, "group is frozen");
    if (amount == 0) fail(ErrorCode::InvalidArgument, "zero deposit");
    if (!token.fungible()) fail(ErrorCode::InvalidArgument, "only fungible tokens can be deposited");
    if (!rec.policy.full_rights(caller)) fail(ErrorCode::NotWhitelisted, "caller is not whitelisted");
    auto serial = enqueue(rec, Transaction{group, op::Deposit{{}, token, amount, caller}}, amount);
    deposited_ += amount;
    const auto& k = meter_.constants();
    bool eth = profile_of(token) == TokenProfile::Eth;
    meter_.charge({group, eth ? "depositETH" : "depositERC20", GasCategory::External,
                   eth ? k.deposit_eth : k.deposit_erc20, {}, {}, OpType::Deposit, token});
    return serial;
}

std::uint64_t L1Contract::request_full_exit(const L1Address& caller, GroupId group, AccountId account,
                                            TokenId token, FullExitKind kind, std::optional<GroupId> destination) {
    std::lock_guard lk(mu_);
    auto& rec = record(group);
    if (rec.frozen) fail(ErrorCode::Frozen, "group is frozen");
    auto known = rec.known_accounts.find(account);
    if (known == rec.known_accounts.end()) fail(ErrorCode::UnknownAccount, "account unknown to the contract");
    const L1Address& owner = known->second;
    Transaction op{group, op::Noop{}};
    switch (kind) {
        case FullExitKind::FullExit:
            if (owner != caller) fail(ErrorCode::Unauthorized, "caller does not own the account");
            op.op = op::FullExit{account, owner, token, 0};
            break;
        case FullExitKind::ForcedExit:
            if (rec.keyed_accounts.contains(account)) fail(ErrorCode::NotPermitted, "target account is not locked");
            op.op = op::ForcedExit{account, token, 0, owner};
            break;
        case FullExitKind::FullChangeGroup: {
            if (mode_ == ContractMode::Baseline) fail(ErrorCode::NotPermitted, "no cross-group ops in baseline mode");
            if (owner != caller) fail(ErrorCode::Unauthorized, "caller does not own the account");
            if (!destination) fail(ErrorCode::InvalidArgument, "destination group required");
            if (*destination == group) fail(ErrorCode::SameGroup, "source and destination group are equal");
            record(*destination);
            op.op = op::FullChangeGroup{account, owner, token, 0, group, *destination};
            break;
        }
    }
    auto serial = enqueue(rec, std::move(op), 0);
    meter_.charge({group, "requestFullExit", GasCategory::External, meter_.constants().full_exit_request, {}, {},
                   kind == FullExitKind::FullExit     ? OpType::FullExit
                   : kind == FullExitKind::ForcedExit ? OpType::ForcedExit
                                                      : OpType::FullChangeGroup,
                   token});
    return serial;
}

void L1Contract::commit_blocks(const L1Address& caller, std::span<const CommitInfo> blocks) {
    std::lock_guard lk(mu_);
    if (blocks.empty()) fail(ErrorCode::InvalidArgument, "no blocks to commit");
    GroupId g = bound_group(caller);
    auto& rec = record(g);
    if (rec.frozen) fail(ErrorCode::Frozen, "group is frozen");

    std::vector<CommittedBlock> staged;
    std::map<AccountId, L1Address> learned;
    std::set<AccountId> keyed;
    std::size_t cursor = 0;
    Hash prev = rec.committed_root;
    std::uint64_t number = rec.committed;
    for (const auto& b : blocks) {
        if (b.group != g) fail(ErrorCode::WrongGroup, "block belongs to another group");
        if (b.number != number + 1) fail(ErrorCode::Discontinuity, "block number is not the next one");
        if (b.old_root != prev) fail(ErrorCode::StaleRoot, "old root does not match the last committed root");
        if (b.capacity_chunks == 0 || b.pubdata.size() != b.capacity_chunks * kChunkBytes)
            fail(ErrorCode::InvalidArgument, "pubdata does not fill the block capacity");
        CommittedBlock cb{b, block_hash(b.old_root, b.new_root, b.number, b.pubdata), {}, {}};
        auto ops = decode_block_pubdata(b.pubdata, g);
        for (std::uint32_t i = 0; i < ops.size(); ++i) {
            const auto& op = ops[i];
            cb.op_types.push_back(op.type());
            if (op.is_priority()) {
                if (cursor >= rec.queue.size() || !request_matches(rec.queue[cursor].op, op))
                    fail(ErrorCode::FifoViolation, "priority operations not included in queue order");
                ++cursor;
            }
            if (auto eff = onchain_effect(op)) cb.onchain_ops.emplace_back(i, *eff);
            if (op.type() == OpType::Deposit) learned[op.as<op::Deposit>().account] = op.as<op::Deposit>().owner;
            if (op.type() == OpType::TransferToNew)
                learned[op.as<op::TransferToNew>().to] = op.as<op::TransferToNew>().to_address;
            if (op.type() == OpType::ChangePubKey) keyed.insert(op.as<op::ChangePubKey>().account);
        }
        staged.push_back(std::move(cb));
        prev = b.new_root;
        ++number;
    }
    if (cursor < rec.queue.size() && number - rec.queue[cursor].enqueued_at > options_.priority_expiry_blocks) {
        // The freeze stands even though the commit is refused.
        rec.frozen = true;
        fail(ErrorCode::Frozen, "priority request expired; group frozen");
    }

    const auto& k = meter_.constants();
    for (std::size_t i = 0; i < staged.size(); ++i) {
        const auto& cb = staged[i];
        std::uint64_t base = share(k.commit_call, staged.size(), i) + k.commit_per_block +
                             k.commit_per_byte * cb.info.pubdata.size();
        meter_.charge({g, "commitBlocks", GasCategory::CommitBase, base, cb.info.number, {}, {}});
        for (std::uint32_t j = 0; j < cb.op_types.size(); ++j) {
            auto t = cb.op_types[j];
            std::uint64_t extra = 0;
            if (is_priority_type(t)) extra += k.commit_priority_op;
            bool has_effect = std::any_of(cb.onchain_ops.begin(), cb.onchain_ops.end(),
                                          [j](const auto& p) { return p.first == j; });
            if (has_effect) extra += k.commit_onchain_op;
            if (extra > 0) meter_.charge({g, "commitBlocks", GasCategory::CommitExtra, extra, cb.info.number, j, t});
        }
    }
    rec.queue.erase(rec.queue.begin(), rec.queue.begin() + static_cast<std::ptrdiff_t>(cursor));
    for (auto& cb : staged) rec.blocks.push_back(std::move(cb));
    rec.committed = number;
    rec.committed_root = prev;
    for (const auto& [acc, addr] : learned) rec.known_accounts[acc] = addr;
    rec.keyed_accounts.insert(keyed.begin(), keyed.end());
}

void L1Contract::prove_blocks(const L1Address& caller, const AggregatedProof& proof, std::uint64_t first,
                              std::uint64_t last) {
    std::lock_guard lk(mu_);
    GroupId g = bound_group(caller);
    auto& rec = record(g);
    if (first != rec.proven + 1 || last < first || last > rec.committed)
        fail(ErrorCode::OutOfOrder, "blocks must be proven in order after commit");
    std::vector<ProofStatement> expected;
    for (auto n = first; n <= last; ++n) {
        const auto& cb = rec.blocks[n - 1];
        // Public input rebuilt from the commitment and the caller's group.
        expected.push_back({public_input_for(cb.commitment, g), cb.info.old_root, cb.info.new_root});
    }
    if (!proving_.verify_aggregate(proof, expected)) fail(ErrorCode::ProofRejected, "aggregated proof rejected");
    rec.proven = last;
    const auto& k = meter_.constants();
    const std::size_t n = expected.size();
    for (std::size_t i = 0; i < n; ++i)
        meter_.charge({g, "proveBlocks", GasCategory::ProveBase, share(k.prove_call, n, i) + k.prove_per_block,
                       first + i, {}, {}});
}

void L1Contract::route_cross_group(const OnchainOp& op) {
    if (op.amount == 0) return;
    bool routed = false;
    if (op.destination_group.value < groups_.size()) {
        auto& dst = groups_[op.destination_group.value];
        if (!dst.frozen && dst.policy.full_rights(op.owner)) {
            enqueue(dst, Transaction{dst.config.id, op::Deposit{{}, op.token, op.amount, op.owner}}, op.amount);
            routed = true;
        }
    }
    if (!routed) credit_pending(op.owner, op.token, op.amount);
}

void L1Contract::execute_blocks(const L1Address& caller, std::uint64_t first, std::uint64_t last) {
    std::lock_guard lk(mu_);
    GroupId g = bound_group(caller);
    auto& rec = record(g);
    if (first != rec.executed + 1 || last < first || last > rec.proven)
        fail(ErrorCode::OutOfOrder, "blocks must be executed in order after proof");
    const auto& k = meter_.constants();
    const std::size_t n = last - first + 1;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& cb = rec.blocks[first + i - 1];
        meter_.charge({g, "executeBlocks", GasCategory::ExecuteBase,
                       share(k.execute_call, n, i) + k.execute_per_block, cb.info.number, {}, {}});
        for (const auto& [index, op] : cb.onchain_ops) {
            std::uint64_t extra = 0;
            using Kd = OnchainOp::Kind;
            switch (op.kind) {
                case Kd::WithdrawTo:
                case Kd::FullExitTo:
                case Kd::ForcedExitTo:
                    credit_pending(op.owner, op.token, op.amount);
                    extra = profile_of(op.token) == TokenProfile::Eth ? k.execute_withdraw_eth
                                                                      : k.execute_withdraw_erc20;
                    break;
                case Kd::WithdrawNftTo:
                    credit_pending(op.owner, op.token, op.amount);
                    extra = k.execute_withdraw_nft;
                    break;
                case Kd::ChangeGroupTo:
                case Kd::FullChangeGroupTo:
                    route_cross_group(op);
                    extra = k.execute_change_group;
                    break;
            }
            meter_.charge({g, "executeBlocks", GasCategory::ExecuteExtra, extra, cb.info.number, index,
                           cb.op_types[index]});
        }
    }
    rec.executed = last;
    rec.stored_root = rec.blocks[last - 1].info.new_root;
}

Amount L1Contract::withdraw_pending(const L1Address& caller, TokenId token) {
    std::lock_guard lk(mu_);
    auto it = pending_.find({caller, token});
    if (it == pending_.end() || it->second == 0) fail(ErrorCode::NothingToWithdraw, "no pending balance");
    Amount amount = it->second;
    pending_.erase(it);
    if (token.fungible()) withdrawn_ += amount;
    const auto& k = meter_.constants();
    bool eth = profile_of(token) == TokenProfile::Eth;
    meter_.charge({std::nullopt, "withdrawPendingBalance", GasCategory::External,
                   eth ? k.withdraw_pending_eth : k.withdraw_pending_erc20, {}, {}, {}, token});
    return amount;
}

Amount L1Contract::exodus_withdraw(const L1Address& caller, GroupId group, const InclusionProof& proof) {
    std::lock_guard lk(mu_);
    auto& rec = record(group);
    if (!rec.frozen) fail(ErrorCode::NotPermitted, "group is not frozen");
    if (!proof.balance) fail(ErrorCode::InvalidArgument, "proof must cover a balance");
    if (proof.address != caller) fail(ErrorCode::Unauthorized, "caller does not own the account");
    if (!proof.balance->token.fungible()) fail(ErrorCode::InvalidArgument, "only fungible balances");
    if (!verify_inclusion(rec.stored_root, proof)) fail(ErrorCode::ProofRejected, "inclusion proof rejected");
    auto key = std::pair{proof.account, proof.balance->token};
    if (rec.exodus_claimed.contains(key) || proof.balance->amount == 0)
        fail(ErrorCode::NothingToWithdraw, "nothing left to claim");
    rec.exodus_claimed.insert(key);
    credit_pending(caller, proof.balance->token, proof.balance->amount);
    exodus_claimed_ += proof.balance->amount;
    meter_.charge({group, "exodusWithdraw", GasCategory::External, meter_.constants().exodus_withdraw, {}, {}, {}});
    return proof.balance->amount;
}

void L1Contract::cancel_outstanding_deposits(GroupId group) {
    std::lock_guard lk(mu_);
    auto& rec = record(group);
    if (!rec.frozen) fail(ErrorCode::NotPermitted, "group is not frozen");
    for (const auto& req : rec.queue) {
        if (req.op.type() != OpType::Deposit) continue;
        const auto& d = req.op.as<op::Deposit>();
        credit_pending(d.owner, d.token, req.locked);
    }
    rec.queue.clear();
}

std::size_t L1Contract::group_count() const {
    std::lock_guard lk(mu_);
    return groups_.size();
}

GroupConfig L1Contract::group_config(GroupId g) const {
    std::lock_guard lk(mu_);
    return record(g).config;
}

std::optional<GroupId> L1Contract::group_of_validator(const L1Address& v) const {
    std::lock_guard lk(mu_);
    auto it = validator_of_.find(v);
    if (it == validator_of_.end()) return std::nullopt;
    return it->second;
}

Hash L1Contract::stored_root(GroupId g) const {
    std::lock_guard lk(mu_);
    return record(g).stored_root;
}

Hash L1Contract::committed_root(GroupId g) const {
    std::lock_guard lk(mu_);
    return record(g).committed_root;
}

std::uint64_t L1Contract::committed_count(GroupId g) const {
    std::lock_guard lk(mu_);
    return record(g).committed;
}

std::uint64_t L1Contract::proven_count(GroupId g) const {
    std::lock_guard lk(mu_);
    return record(g).proven;
}

std::uint64_t L1Contract::executed_count(GroupId g) const {
    std::lock_guard lk(mu_);
    return record(g).executed;
}

bool L1Contract::frozen(GroupId g) const {
    std::lock_guard lk(mu_);
    return record(g).frozen;
}

AccessPolicy L1Contract::policy(GroupId g) const {
    std::lock_guard lk(mu_);
    return record(g).policy;
}

bool L1Contract::whitelisted(GroupId g, const L1Address& a) const {
    std::lock_guard lk(mu_);
    return record(g).policy.whitelist.contains(a);
}

std::vector<PriorityRequest> L1Contract::priority_queue(GroupId g) const {
    std::lock_guard lk(mu_);
    const auto& q = record(g).queue;
    return {q.begin(), q.end()};
}

std::vector<CommittedBlock> L1Contract::committed_blocks(GroupId g) const {
    std::lock_guard lk(mu_);
    return record(g).blocks;
}

Amount L1Contract::pending_balance(const L1Address& owner, TokenId token) const {
    std::lock_guard lk(mu_);
    auto it = pending_.find({owner, token});
    return it == pending_.end() ? 0 : it->second;
}

std::map<std::pair<L1Address, TokenId>, Amount> L1Contract::pending_balances() const {
    std::lock_guard lk(mu_);
    return pending_;
}

Amount L1Contract::total_deposited() const {
    std::lock_guard lk(mu_);
    return deposited_;
}

Amount L1Contract::total_withdrawn() const {
    std::lock_guard lk(mu_);
    return withdrawn_;
}

Amount L1Contract::total_pending() const {
    std::lock_guard lk(mu_);
    Amount t = 0;
    for (const auto& [key, amt] : pending_)
        if (key.second.fungible()) t += amt;
    return t;
}

Amount L1Contract::total_queued() const {
    std::lock_guard lk(mu_);
    Amount t = 0;
    for (const auto& rec : groups_)
        for (const auto& req : rec.queue) t += req.locked;
    return t;
}

Amount L1Contract::total_in_flight() const {
    std::lock_guard lk(mu_);
    Amount t = 0;
    for (const auto& rec : groups_)
        for (std::uint64_t n = rec.executed; n < rec.committed; ++n)
            for (const auto& [i, op] : rec.blocks[n].onchain_ops)
                if (op.token.fungible()) t += op.amount;
    return t;
}

Amount L1Contract::total_exodus_claimed() const {
    std::lock_guard lk(mu_);
    return exodus_claimed_;
}

std::vector<GasCharge> L1Contract::gas_ledger() const {
    std::lock_guard lk(mu_);
    return meter_.ledger();
}

std::vector<GasReportRow> L1Contract::gas_report() const {
    std::lock_guard lk(mu_);
    return meter_.report();
}

std::uint64_t L1Contract::gas_total() const {
    std::lock_guard lk(mu_);
    return meter_.total();
}

}  // namespace zkg
