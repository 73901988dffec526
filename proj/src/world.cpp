#include "zkg/world.hpp"

namespace zkg {

namespace {

[[noreturn]] void fail(ErrorCode code, const std::string& msg) { throw RollupError(code, msg); }

template <typename T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& v) {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

Amount draw_amount(std::mt19937_64& rng, Amount balance) {
    Amount cap = std::min<Amount>(balance / 4, 1000);
    if (cap == 0) return 0;
    return std::uniform_int_distribution<std::uint64_t>(1, static_cast<std::uint64_t>(cap))(rng);
}

}  // namespace

World::World(std::uint64_t seed, ContractMode mode, GasConfig config, ContractOptions options,
             std::size_t prover_workers)
    : seed_(seed), contract_(std::make_unique<L1Contract>(mode, config, options)), rng_(seed) {
    if (prover_workers > 0) pool_ = std::make_unique<ProverPool>(contract_->proving_system(), prover_workers);
}

ValidatorNode& World::node(GroupId g) {
    if (g.value >= nodes_.size()) fail(ErrorCode::InvalidArgument, "unknown group " + std::to_string(g.value));
    return *nodes_[g.value];
}

const ValidatorNode& World::node(GroupId g) const {
    if (g.value >= nodes_.size()) fail(ErrorCode::InvalidArgument, "unknown group " + std::to_string(g.value));
    return *nodes_[g.value];
}

const User& World::user(const std::string& name) {
    auto it = users_.find(name);
    if (it != users_.end()) return it->second;
    if (name.empty()) fail(ErrorCode::InvalidArgument, "empty user name");
    auto key = SecretKey::derive(name, seed_);
    auto address = address_of(key.public_key());
    user_order_.push_back(name);
    return users_.emplace(name, User{name, key, address}).first->second;
}

std::optional<AccountId> World::account_of(GroupId g, const std::string& name) {
    return node(g).state().find(user(name).address);
}

GroupId World::create_group(const std::string& governor, const std::string& validator, bool permissioned,
                            DataMode data_mode) {
    const auto gov = user(governor).address;
    const auto val = user(validator).address;
    auto id = contract_->create_group(gov, permissioned, data_mode, val);
    nodes_.push_back(std::make_unique<ValidatorNode>(*contract_, id, val));
    return id;
}

void World::set_whitelist(const std::string& governor, GroupId g, const std::string& name, bool allowed) {
    const auto gov = user(governor).address;
    contract_->set_whitelist(gov, g, user(name).address, allowed);
}

std::uint64_t World::deposit(const std::string& name, GroupId g, TokenId token, Amount amount) {
    return contract_->deposit(user(name).address, g, token, amount);
}

std::uint64_t World::request_exit(const std::string& name, GroupId g, TokenId token, FullExitKind kind,
                                  const std::string& target, std::optional<GroupId> destination) {
    const auto& owner = kind == FullExitKind::ForcedExit ? target : name;
    auto acc = account_of(g, owner);
    if (!acc) fail(ErrorCode::UnknownAccount, owner + " has no account in group " + std::to_string(g.value));
    return contract_->request_full_exit(user(name).address, g, *acc, token, kind, destination);
}

Amount World::withdraw_pending(const std::string& name, TokenId token) {
    return contract_->withdraw_pending(user(name).address, token);
}

SignedTransaction World::make_tx(GroupId g, const std::string& name, const TxRequest& req) {
    const User u = user(name);
    auto& n = node(g);
    const auto& state = n.state();
    auto acc = state.find(u.address);
    if (!acc) fail(ErrorCode::UnknownAccount, name + " has no account in group " + std::to_string(g.value));
    auto next_nonce = [&](AccountId id) -> Nonce {
        const Account* a = state.account(id);
        return a->nonce + n.mempool().pending_for(id);
    };
    auto account_for = [&](const std::string& other) {
        auto id = account_of(g, other);
        if (!id) fail(ErrorCode::UnknownAccount, other + " has no account in group " + std::to_string(g.value));
        return *id;
    };
    const Nonce nonce = req.nonce.value_or(next_nonce(*acc));
    Transaction tx{req.sign_group.value_or(g), op::Noop{}};
    std::optional<std::pair<SecretKey, Nonce>> cosigner;

    switch (req.type) {
        case OpType::Transfer:
            tx.op = op::Transfer{*acc, account_for(req.to), req.token, req.amount, req.fee, nonce};
            break;
        case OpType::TransferToNew:
            tx.op = op::TransferToNew{*acc, {}, req.token, req.amount, req.fee, user(req.to).address, nonce};
            break;
        case OpType::Withdraw:
            tx.op = op::Withdraw{*acc, req.token, req.amount, req.fee,
                                 req.to.empty() ? u.address : user(req.to).address, nonce};
            break;
        case OpType::ChangePubKey:
            tx.op = op::ChangePubKey{*acc, u.key.public_key(), nonce, req.fee_token, req.fee};
            break;
        case OpType::MintNFT:
            tx.op = op::MintNFT{*acc, req.to.empty() ? *acc : account_for(req.to),
                                hash_bytes(ByteView(reinterpret_cast<const std::uint8_t*>(req.content.data()),
                                                    req.content.size())),
                                req.fee_token, req.fee, nonce};
            break;
        case OpType::WithdrawNFT: {
            const NftInfo* info = state.nft(req.token);
            if (!info) fail(ErrorCode::InvalidArgument, "unknown NFT " + std::to_string(req.token.value));
            tx.op = op::WithdrawNFT{*acc,
                                    info->creator_account,
                                    info->creator_address,
                                    info->serial_id,
                                    info->content_hash,
                                    req.to.empty() ? u.address : user(req.to).address,
                                    req.token,
                                    req.fee_token,
                                    req.fee,
                                    nonce};
            break;
        }
        case OpType::Swap: {
            auto other = account_for(req.to);
            auto other_nonce = next_nonce(other);
            tx.op = op::Swap{*acc,       other,       req.token, req.token_b, req.amount,
                             req.amount_b, req.fee,    req.fee_b, nonce,     other_nonce};
            cosigner.emplace(user(req.to).key, other_nonce);
            break;
        }
        case OpType::ChangeGroup:
            tx.op = op::ChangeGroup{*acc, req.token, req.amount, req.fee, u.address, nonce, g, req.destination};
            break;
        default:
            fail(ErrorCode::InvalidArgument, std::string(op_name(req.type)) + " is not a user transaction");
    }
    auto stx = sign_transaction(u.key, tx);
    if (cosigner) cosign_transaction(cosigner->first, stx);
    return stx;
}

Admission World::submit(GroupId g, const SignedTransaction& stx) { return node(g).submit_tx(stx); }

Admission World::submit(GroupId g, const std::string& name, const TxRequest& req) {
    return submit(g, make_tx(g, name, req));
}

CycleReport World::run_cycle(GroupId g, std::size_t n_blocks, std::size_t capacity, std::size_t aggregate_n) {
    auto report = node(g).run_cycle(n_blocks, capacity, aggregate_n, pool_.get());
    cycles_.push_back(report);
    cycles_.back().blocks.clear();
    return report;
}

std::size_t World::random_txs(GroupId g, std::size_t count) {
    auto& n = node(g);
    const auto policy = contract_->policy(g);
    const bool cross_group = contract_->mode() == ContractMode::Modified && nodes_.size() > 1;

    std::vector<std::string> members;
    for (const auto& name : user_order_)
        if (n.state().find(users_.at(name).address)) members.push_back(name);
    if (members.empty()) return 0;

    std::size_t admitted = 0;
    for (std::size_t i = 0; i < count; ++i) {
        const std::string name = pick(rng_, members);
        const User& u = users_.at(name);
        const auto id = *n.state().find(u.address);
        const Account* acc = n.state().account(id);
        TxRequest req;
        req.fee = std::uniform_int_distribution<Fee>(0, 3)(rng_);

        if (acc->pubkey.is_zero()) {
            if (n.mempool().pending_for(id) > 0) continue;
            req.type = OpType::ChangePubKey;
            req.fee = 0;
            admitted += submit(g, name, req).accepted() ? 1 : 0;
            continue;
        }

        std::vector<TokenId> held;
        std::vector<TokenId> nfts;
        for (const auto& [token, amount] : acc->balances) {
            if (token.fungible() && amount > 8) held.push_back(token);
            if (token.nft() && amount > 0) nfts.push_back(token);
        }

        std::vector<OpType> choices;
        if (policy.full_rights(u.address)) {
            choices = {OpType::Transfer, OpType::Transfer, OpType::Transfer, OpType::TransferToNew,
                       OpType::Withdraw, OpType::MintNFT, OpType::Swap};
            if (!nfts.empty()) choices.push_back(OpType::WithdrawNFT);
        } else {
            choices = {OpType::Withdraw};
        }
        if (cross_group) choices.push_back(OpType::ChangeGroup);
        req.type = pick(rng_, choices);

        if (req.type == OpType::MintNFT) {
            req.content = name + "/" + std::to_string(rng_());
            req.fee = 0;
        } else if (req.type == OpType::WithdrawNFT) {
            req.token = pick(rng_, nfts);
            req.fee = 0;
        } else {
            if (held.empty()) continue;
            req.token = pick(rng_, held);
            req.amount = draw_amount(rng_, acc->balance(req.token));
            if (req.amount == 0) continue;
        }

        if (req.type == OpType::Transfer || req.type == OpType::Swap) {
            std::vector<std::string> others;
            for (const auto& m : members) {
                if (m == name) continue;
                if (req.type == OpType::Swap) {
                    const Account* b = n.state().account(*n.state().find(users_.at(m).address));
                    if (b->pubkey.is_zero() || !policy.full_rights(b->address)) continue;
                }
                others.push_back(m);
            }
            if (others.empty()) continue;
            req.to = pick(rng_, others);
            if (req.type == OpType::Swap) {
                const Account* b = n.state().account(*n.state().find(users_.at(req.to).address));
                std::vector<TokenId> b_held;
                for (const auto& [token, amount] : b->balances)
                    if (token.fungible() && token != req.token && amount > 8) b_held.push_back(token);
                if (b_held.empty()) continue;
                req.token_b = pick(rng_, b_held);
                req.amount_b = draw_amount(rng_, b->balance(req.token_b));
                req.fee_b = std::uniform_int_distribution<Fee>(0, 3)(rng_);
                if (req.amount_b == 0) continue;
            }
        } else if (req.type == OpType::TransferToNew) {
            req.to = "fresh-" + std::to_string(fresh_users_++);
        } else if (req.type == OpType::ChangeGroup) {
            std::vector<GroupId> dests;
            for (const auto& other : nodes_)
                if (other->group() != g && !contract_->frozen(other->group())) dests.push_back(other->group());
            if (dests.empty()) continue;
            req.destination = pick(rng_, dests);
        }
        admitted += submit(g, name, req).accepted() ? 1 : 0;
    }
    return admitted;
}

std::string World::replay_mismatch() const {
    for (const auto& n : nodes_) {
        const auto g = n->group();
        const auto blocks = contract_->committed_blocks(g);
        const auto& live = n->roots();
        if (blocks.size() != live.size())
            return "group " + std::to_string(g.value) + ": committed " + std::to_string(blocks.size()) +
                   " blocks but validator has " + std::to_string(live.size());
        GroupState s(g);
        for (std::size_t i = 0; i < blocks.size(); ++i) {
            try {
                s = replay_pubdata(s, blocks[i].info.pubdata);
            } catch (const RollupError& e) {
                return "group " + std::to_string(g.value) + " block " + std::to_string(i + 1) + ": " + e.what();
            }
            if (s.root() != blocks[i].info.new_root || s.root() != live[i])
                return "group " + std::to_string(g.value) + " block " + std::to_string(i + 1) + ": root differs";
        }
    }
    return {};
}

ConservationCheck World::conservation() const {
    ConservationCheck c;
    for (const auto& n : nodes_)
        for (const auto& [token, amount] : n->state().fungible_totals()) c.group_balances += amount;
    c.pending = contract_->total_pending();
    c.queued = contract_->total_queued();
    c.in_flight = contract_->total_in_flight();
    c.deposited = contract_->total_deposited();
    c.withdrawn = contract_->total_withdrawn();
    c.exodus_claimed = contract_->total_exodus_claimed();
    return c;
}

Hash World::digest() const {
    Bytes d;
    for (std::size_t i = 0; i < contract_->group_count(); ++i) {
        GroupId g{static_cast<std::uint16_t>(i)};
        put_be(d, g.value, 2);
        put_bytes(d, contract_->stored_root(g).view());
        put_bytes(d, contract_->committed_root(g).view());
        put_be(d, contract_->committed_count(g), 8);
        put_be(d, contract_->executed_count(g), 8);
        if (i < nodes_.size()) put_bytes(d, nodes_[i]->state().root().view());
    }
    for (const auto& [key, amount] : contract_->pending_balances()) {
        put_bytes(d, key.first.view());
        put_be(d, key.second.value, 4);
        put_amount(d, amount);
    }
    auto csv = gas_report_csv(contract_->gas_report());
    put_bytes(d, ByteView(reinterpret_cast<const std::uint8_t*>(csv.data()), csv.size()));
    return hash_bytes(d);
}

}  // namespace zkg
