#include "helpers.hpp"

using namespace zkg;
using zkg::test::addr;
using zkg::test::error_of;
using zkg::test::onboard;

namespace {

std::uint64_t sum_function(const L1Contract& c, std::string_view fn) {
    std::uint64_t s = 0;
    for (const auto& g : c.gas_ledger())
        if (g.function == fn) s += g.gas;
    return s;
}

}  // namespace

TEST_CASE("deploy and group creation gas") {
    L1Contract base(ContractMode::Baseline);
    L1Contract mod(ContractMode::Modified);
    CHECK(base.gas_total() == 22'106'772);
    CHECK(mod.gas_total() == 22'904'219);
    mod.create_group(addr(1), false, DataMode::ZkRollup, addr(2));
    CHECK(sum_function(mod, "createGroup") == 184'258);
}

TEST_CASE("group ids are sequential and validators bind once") {
    L1Contract c(ContractMode::Modified);
    CHECK(c.create_group(addr(1), false, DataMode::ZkRollup, addr(10)) == GroupId{0});
    CHECK(c.create_group(addr(1), true, DataMode::Validium, addr(11)) == GroupId{1});
    CHECK(c.group_config(GroupId{1}).data_mode == DataMode::Validium);
    CHECK(c.group_of_validator(addr(11)) == GroupId{1});
    CHECK(error_of([&] { c.create_group(addr(1), false, DataMode::ZkRollup, addr(10)); }) == ErrorCode::ValidatorBound);
    CHECK(error_of([&] { c.create_group(addr(1), false, DataMode::ZkRollup, L1Address{}); }) ==
          ErrorCode::InvalidArgument);
}

TEST_CASE("baseline allows a single rollup") {
    L1Contract c(ContractMode::Baseline);
    c.create_group(addr(1), false, DataMode::ZkRollup, addr(10));
    CHECK(error_of([&] { c.create_group(addr(1), false, DataMode::ZkRollup, addr(11)); }) == ErrorCode::NotPermitted);
}

TEST_CASE("whitelist is governor-only on permissioned groups") {
    L1Contract c(ContractMode::Modified);
    auto open = c.create_group(addr(1), false, DataMode::ZkRollup, addr(10));
    auto closed = c.create_group(addr(1), true, DataMode::ZkRollup, addr(11));
    CHECK(error_of([&] { c.set_whitelist(addr(1), open, addr(5), true); }) == ErrorCode::NotPermitted);
    CHECK(error_of([&] { c.set_whitelist(addr(2), closed, addr(5), true); }) == ErrorCode::Unauthorized);
    CHECK(error_of([&] { c.deposit(addr(5), closed, TokenId{0}, 10); }) == ErrorCode::NotWhitelisted);
    c.set_whitelist(addr(1), closed, addr(5), true);
    CHECK(c.whitelisted(closed, addr(5)));
    CHECK_NOTHROW(c.deposit(addr(5), closed, TokenId{0}, 10));
}

TEST_CASE("deposits are queued and charged as external") {
    L1Contract c(ContractMode::Modified);
    auto g = c.create_group(addr(1), false, DataMode::ZkRollup, addr(10));
    c.deposit(addr(5), g, TokenId{0}, 10);
    c.deposit(addr(5), g, TokenId{3}, 20);
    CHECK(error_of([&] { c.deposit(addr(5), g, TokenId{0}, 0); }) == ErrorCode::InvalidArgument);
    CHECK(error_of([&] { c.deposit(addr(5), g, TokenId{kNftTokenStart}, 1); }) == ErrorCode::InvalidArgument);
    CHECK(c.priority_queue(g).size() == 2);
    CHECK(c.total_queued() == 30);
    CHECK(c.total_deposited() == 30);
    CHECK(sum_function(c, "depositETH") == 63'300);
    CHECK(sum_function(c, "depositERC20") == 100'900);
    for (const auto& ch : c.gas_ledger())
        if (ch.function.starts_with("deposit")) CHECK(ch.category == GasCategory::External);
}

TEST_CASE("only the bound validator commits") {
    World w(1);
    auto g = w.create_group("gov", "val");
    w.deposit("alice", g, TokenId{0}, 100);
    auto& n = w.node(g);
    auto b = n.build_block(26);
    auto info = b.commit_info();
    CHECK(error_of([&] { w.contract().commit_blocks(addr(9), std::span(&info, 1)); }) == ErrorCode::Unauthorized);
}

TEST_CASE("commit checks ordering, roots, group and size") {
    World w(1);
    auto g0 = w.create_group("gov", "val0");
    auto g1 = w.create_group("gov", "val1");
    w.deposit("alice", g0, TokenId{0}, 100);
    auto& c = w.contract();
    const auto v0 = w.user("val0").address;
    auto b = w.node(g0).build_block(26);
    auto ok = b.commit_info();

    auto wrong_group = ok;
    wrong_group.group = g1;
    CHECK(error_of([&] { c.commit_blocks(v0, std::span(&wrong_group, 1)); }) == ErrorCode::WrongGroup);
    auto gap = ok;
    gap.number = 2;
    CHECK(error_of([&] { c.commit_blocks(v0, std::span(&gap, 1)); }) == ErrorCode::Discontinuity);
    auto stale = ok;
    stale.old_root = hash_bytes(Bytes{1});
    CHECK(error_of([&] { c.commit_blocks(v0, std::span(&stale, 1)); }) == ErrorCode::StaleRoot);
    auto short_data = ok;
    short_data.pubdata.resize(250);
    CHECK(error_of([&] { c.commit_blocks(v0, std::span(&short_data, 1)); }) != ErrorCode::Config);
    CHECK(c.committed_count(g0) == 0);
    c.commit_blocks(v0, std::span(&ok, 1));
    CHECK(c.committed_count(g0) == 1);
    CHECK(c.committed_root(g0) == ok.new_root);
    CHECK(c.stored_root(g0) == empty_root());
}

TEST_CASE("priority ops must be consumed in order") {
    World w(1);
    auto g = w.create_group("gov", "val");
    w.deposit("alice", g, TokenId{0}, 100);
    w.deposit("bob", g, TokenId{0}, 200);
    auto b = w.node(g).build_block(26);
    auto info = b.commit_info();
    // Swap the two deposits in the pubdata.
    std::swap_ranges(info.pubdata.begin(), info.pubdata.begin() + 60, info.pubdata.begin() + 60);
    CHECK(error_of([&] { w.contract().commit_blocks(w.user("val").address, std::span(&info, 1)); }) ==
          ErrorCode::FifoViolation);
}

TEST_CASE("prove and execute follow commit order") {
    World w(1);
    auto g = w.create_group("gov", "val");
    auto& c = w.contract();
    const auto v = w.user("val").address;
    CHECK(error_of([&] { c.execute_blocks(v, 1, 1); }) == ErrorCode::OutOfOrder);
    w.deposit("alice", g, TokenId{0}, 100);
    w.run_cycle(g, 2, 26, 1);
    CHECK(c.committed_count(g) == 2);
    CHECK(c.proven_count(g) == 2);
    CHECK(c.executed_count(g) == 2);
    CHECK(c.stored_root(g) == w.node(g).state().root());
}

TEST_CASE("withdrawal credits pending balance once") {
    World w(1);
    auto g = w.create_group("gov", "val");
    onboard(w, g, {"alice"});
    w.submit(g, "alice", {.type = OpType::Withdraw, .amount = 400});
    w.run_cycle(g, 1, 26, 1);
    auto& c = w.contract();
    const auto a = w.user("alice").address;
    CHECK(c.pending_balance(a, TokenId{0}) == 400);
    CHECK(w.conservation().holds());
    CHECK(w.withdraw_pending("alice", TokenId{0}) == 400);
    CHECK(c.total_withdrawn() == 400);
    CHECK(error_of([&] { w.withdraw_pending("alice", TokenId{0}); }) == ErrorCode::NothingToWithdraw);
    CHECK(w.conservation().holds());
}

TEST_CASE("full exit request checks ownership") {
    World w(1);
    auto g = w.create_group("gov", "val");
    onboard(w, g, {"alice", "bob"});
    auto alice = *w.account_of(g, "alice");
    auto& c = w.contract();
    CHECK(error_of([&] {
              c.request_full_exit(w.user("bob").address, g, alice, TokenId{0}, FullExitKind::FullExit);
          }) == ErrorCode::Unauthorized);
    CHECK(error_of([&] {
              c.request_full_exit(w.user("bob").address, g, alice, TokenId{0}, FullExitKind::ForcedExit);
          }) != ErrorCode::Config);
    CHECK(error_of([&] {
              c.request_full_exit(w.user("bob").address, g, AccountId{99}, TokenId{0}, FullExitKind::FullExit);
          }) == ErrorCode::UnknownAccount);
    w.request_exit("alice", g, TokenId{0}, FullExitKind::FullExit);
    w.run_cycle(g, 1, 26, 1);
    CHECK(c.pending_balance(w.user("alice").address, TokenId{0}) == 10'000);
    CHECK(w.node(g).state().balance(alice, TokenId{0}) == 0);
}

TEST_CASE("change group routes funds into the destination queue") {
    World w(1);
    auto src = w.create_group("gov", "val0");
    auto dst = w.create_group("gov", "val1");
    onboard(w, src, {"alice"});
    CHECK(w.submit(src, "alice", {.type = OpType::ChangeGroup, .amount = 700, .destination = dst}).accepted());
    w.run_cycle(src, 1, 26, 1);
    auto& c = w.contract();
    auto q = c.priority_queue(dst);
    REQUIRE(q.size() == 1);
    CHECK(q[0].op.as<op::Deposit>().amount == 700);
    CHECK(q[0].op.as<op::Deposit>().owner == w.user("alice").address);
    CHECK(c.pending_balance(w.user("alice").address, TokenId{0}) == 0);
    CHECK(w.conservation().holds());
    w.run_cycle(dst, 1, 26, 1);
    CHECK(w.node(dst).state().balance(*w.account_of(dst, "alice"), TokenId{0}) == 700);
    CHECK(w.conservation().holds());
}

TEST_CASE("change group into a closed group falls back to pending") {
    World w(1);
    auto src = w.create_group("gov", "val0");
    auto dst = w.create_group("gov", "val1", true);
    onboard(w, src, {"alice"});
    w.submit(src, "alice", {.type = OpType::ChangeGroup, .amount = 700, .destination = dst});
    w.run_cycle(src, 1, 26, 1);
    CHECK(w.contract().priority_queue(dst).empty());
    CHECK(w.contract().pending_balance(w.user("alice").address, TokenId{0}) == 700);
    CHECK(w.conservation().holds());
}

TEST_CASE("full change group moves the whole balance") {
    World w(1);
    auto src = w.create_group("gov", "val0");
    auto dst = w.create_group("gov", "val1");
    onboard(w, src, {"alice"});
    CHECK(error_of([&] { w.request_exit("alice", src, TokenId{0}, FullExitKind::FullChangeGroup, {}, src); }) ==
          ErrorCode::SameGroup);
    w.request_exit("alice", src, TokenId{0}, FullExitKind::FullChangeGroup, {}, dst);
    w.run_cycle(src, 1, 26, 1);
    w.run_cycle(dst, 1, 26, 1);
    CHECK(w.node(dst).state().balance(*w.account_of(dst, "alice"), TokenId{0}) == 10'000);
    CHECK(w.node(src).state().balance(*w.account_of(src, "alice"), TokenId{0}) == 0);
    CHECK(w.conservation().holds());
}

TEST_CASE("cross-group ops are modified-mode only") {
    World w(1, ContractMode::Baseline);
    auto g = w.create_group("gov", "val");
    onboard(w, g, {"alice"});
    CHECK(error_of([&] { w.request_exit("alice", g, TokenId{0}, FullExitKind::FullChangeGroup, {}, GroupId{1}); }) ==
          ErrorCode::NotPermitted);
    auto adm = w.submit(g, "alice", {.type = OpType::ChangeGroup, .amount = 1, .destination = GroupId{1}});
    CHECK(adm.reason == RejectReason::Unsupported);
}

TEST_CASE("expired priority requests freeze the group") {
    ContractOptions opt;
    opt.priority_expiry_blocks = 2;
    World w(1, ContractMode::Modified, GasConfig::defaults(), opt);
    auto g = w.create_group("gov", "val");
    onboard(w, g, {"alice"});
    auto& c = w.contract();
    const auto v = w.user("val").address;
    w.deposit("bob", g, TokenId{0}, 55);

    // The validator keeps committing empty blocks that skip the deposit.
    auto& n = w.node(g);
    auto number = c.committed_count(g);
    auto root = c.committed_root(g);
    auto empty_block = [&](std::uint64_t k) {
        CommitInfo info{g, k, 26, root, root, Bytes(260, 0)};
        return info;
    };
    (void)n;
    auto b1 = empty_block(number + 1);
    auto b2 = empty_block(number + 2);
    auto b3 = empty_block(number + 3);
    CHECK_NOTHROW(c.commit_blocks(v, std::span(&b1, 1)));
    CHECK_NOTHROW(c.commit_blocks(v, std::span(&b2, 1)));
    CHECK(error_of([&] { c.commit_blocks(v, std::span(&b3, 1)); }) == ErrorCode::Frozen);
    CHECK(c.frozen(g));
    CHECK(error_of([&] { c.commit_blocks(v, std::span(&b3, 1)); }) == ErrorCode::Frozen);
    CHECK(error_of([&] { w.deposit("bob", g, TokenId{0}, 1); }) == ErrorCode::Frozen);

    // Exits are honoured from the last executed root.
    const auto& state = w.node(g).state();
    auto alice = *w.account_of(g, "alice");
    auto proof = prove_inclusion(state, alice, TokenId{0});
    CHECK(error_of([&] { c.exodus_withdraw(w.user("bob").address, g, proof); }) != ErrorCode::Config);
    CHECK(c.exodus_withdraw(w.user("alice").address, g, proof) == 10'000);
    CHECK(error_of([&] { c.exodus_withdraw(w.user("alice").address, g, proof); }) != ErrorCode::Config);
    CHECK(c.pending_balance(w.user("alice").address, TokenId{0}) == 10'000);

    c.cancel_outstanding_deposits(g);
    CHECK(c.priority_queue(g).empty());
    CHECK(c.pending_balance(w.user("bob").address, TokenId{0}) == 55);
}

TEST_CASE("exodus needs a frozen group and a valid proof") {
    World w(1);
    auto g = w.create_group("gov", "val");
    onboard(w, g, {"alice"});
    auto proof = prove_inclusion(w.node(g).state(), *w.account_of(g, "alice"), TokenId{0});
    CHECK(error_of([&] { w.contract().exodus_withdraw(w.user("alice").address, g, proof); }) != ErrorCode::Config);
    CHECK(w.contract().pending_balance(w.user("alice").address, TokenId{0}) == 0);
}

TEST_CASE("validators of other groups cannot touch a group") {
    World w(1);
    auto g0 = w.create_group("gov", "val0");
    auto g1 = w.create_group("gov", "val1");
    w.deposit("alice", g0, TokenId{0}, 100);
    auto b = w.node(g0).build_block(26);
    auto info = b.commit_info();
    CHECK(error_of([&] { w.contract().commit_blocks(w.user("val1").address, std::span(&info, 1)); }) ==
          ErrorCode::WrongGroup);
    CHECK(w.contract().committed_count(g0) == 0);
    CHECK(w.contract().committed_count(g1) == 0);
}

TEST_CASE("gas config round trips through text") {
    auto c = GasConfig::defaults();
    CHECK(GasConfig::parse(c.to_text()) == c);
    auto tweaked = GasConfig::parse("# comment\nmodified.deploy = 5\n");
    CHECK(tweaked.modified.deploy == 5);
    CHECK(tweaked.baseline == c.baseline);
    CHECK(error_of([] { GasConfig::parse("modified.nope = 1"); }) == ErrorCode::Config);
    CHECK(error_of([] { GasConfig::parse("modified.deploy = x"); }) == ErrorCode::Config);
    CHECK(GasConfig::load(zkg::test::source_dir() / "config/gas.conf") == c);
}

TEST_CASE("gas report groups by function and category") {
    World w(1);
    auto g = w.create_group("gov", "val");
    w.deposit("alice", g, TokenId{0}, 100);
    w.run_cycle(g, 1, 26, 1);
    auto rows = w.contract().gas_report();
    std::uint64_t total = 0;
    for (const auto& r : rows) total += r.gas;
    CHECK(total == w.contract().gas_total());
    CHECK(rows.front().function == "deploy");
    auto csv = gas_report_csv(rows);
    CHECK(csv.starts_with("group,function,category,gas\n"));
    CHECK(GasMeter(GasConstants{}).report().empty());
}
