#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fogrec/fognet.hpp"
#include "two_fog_example.hpp"

using namespace fogrec;

namespace {

Network example_network() {
    auto s = example::two_fog_scenario();
    return Network::from_scenario(s, build_logs(s));
}

}  // namespace

TEST_CASE("the two-fog cascade runs to the oracle state") {
    auto net = example_network();
    net.inject_alert(FogId{"1"}, example::fog1_alert());
    auto trace = net.run_to_quiescence();

    CHECK(net.quiescent());
    CHECK(net.blocked_items(FogId{"1"}).empty());
    CHECK(net.blocked_items(FogId{"x"}).empty());
    CHECK(net.state_snapshot() == example::expected_clean_state());
    CHECK(net.final_state(FogId{"1"}) == example::expected_clean_state().at("fog1"));

    // Alert at fog1, its damage table at fogx, then its corrected values.
    REQUIRE(trace.events.size() == 3);

    const auto& e0 = trace.events[0];
    CHECK(e0.node == "fog1");
    CHECK(e0.kind == "alert");
    CHECK(e0.newly_blocked == std::set<std::string>{"A", "D", "E"});
    CHECK(e0.damage_sent.at("fogx") == 3);
    CHECK(e0.valid_sent.at("fogx") == 3);
    CHECK(e0.patches == example::fog1_patches());
    CHECK(e0.blocked_after.empty());

    const auto& e1 = trace.events[1];
    CHECK(e1.node == "fogx");
    CHECK(e1.kind == "damage");
    CHECK(e1.newly_blocked == std::set<std::string>{"K", "M", "N", "P"});
    // Corrections have not arrived yet; everything stays blocked.
    CHECK(e1.blocked_after == std::set<std::string>{"K", "M", "N", "P"});
    CHECK(e1.patches.empty());

    const auto& e2 = trace.events[2];
    CHECK(e2.node == "fogx");
    CHECK(e2.kind == "valid");
    CHECK(e2.patches == example::fogx_patches());
    CHECK(e2.unblocked == std::set<std::string>{"K", "M", "N", "P"});
    CHECK(e2.blocked_after.empty());

    CHECK_FALSE(trace.to_text().empty());
}

TEST_CASE("blocked items track the damage set mid-cascade") {
    auto net = example_network();
    CHECK(net.blocked_items(FogId{"1"}).empty());  // before any alert
    net.inject_alert(FogId{"1"}, example::fog1_alert());
    CHECK(net.blocked_items(FogId{"1"}).empty());  // queued, not processed
    auto trace = net.run_to_quiescence();
    // fog1's own incident resolves within its pass: the damage set peaked at
    // {A, D, E} and drained once the patches applied.
    CHECK(trace.events[0].newly_blocked == std::set<std::string>{"A", "D", "E"});
}

TEST_CASE("alert injection preconditions") {
    auto net = example_network();
    CHECK_THROWS_AS(net.inject_alert(FogId{"9"}, example::fog1_alert()), PreconditionError);
    CHECK_THROWS_AS(net.inject_alert(FogId{"1"}, MaliciousList{FogId{"1"}, {}}),
                    PreconditionError);
    MaliciousList unknown{FogId{"1"}, {TxnId{FogId{"1"}, 99}}};
    CHECK_THROWS_AS(net.inject_alert(FogId{"1"}, unknown), PreconditionError);
}

TEST_CASE("running with nothing queued is an error") {
    auto net = example_network();
    CHECK_THROWS_AS(net.run_to_quiescence(), PreconditionError);
}

TEST_CASE("final state is unavailable mid-cascade") {
    auto net = example_network();
    net.inject_alert(FogId{"1"}, example::fog1_alert());
    CHECK_THROWS_AS(net.final_state(FogId{"1"}), PreconditionError);
}

TEST_CASE("corrected values without the matching damage table violate the protocol") {
    auto net = example_network();
    Message msg;
    msg.kind = Message::Kind::valid;
    msg.sender = FogId{"1"};
    msg.receiver = FogId{"x"};
    msg.valid = example::vit_to_fogx();
    net.post(std::move(msg));
    CHECK_THROWS_AS(net.run_to_quiescence(), ProtocolError);
}

TEST_CASE("a misrouted damage table violates the protocol") {
    auto net = example_network();
    Message msg;
    msg.kind = Message::Kind::damage;
    msg.sender = FogId{"x"};
    msg.receiver = FogId{"1"};
    msg.damage = example::dit_to_fogx();  // targeted at fogx
    net.post(std::move(msg));
    CHECK_THROWS_AS(net.run_to_quiescence(), ProtocolError);
}

TEST_CASE("an untouched node keeps its database") {
    auto s = example::two_fog_scenario();
    // Add a third node nobody talks to.
    s.topology.nodes.push_back({FogId{"2"}, FogKind::utility_fog});
    s.initial["fog2"] = {{"Q", 77}};
    auto net = Network::from_scenario(s, build_logs(s));
    net.inject_alert(FogId{"1"}, example::fog1_alert());
    net.run_to_quiescence();
    CHECK(net.final_state(FogId{"2"}) == std::map<std::string, Value>{{"Q", 77}});
}

TEST_CASE("three-node chain with two separate alerts matches the oracle under every policy") {
    // fog1 -> fog2 -> fog3: damage crosses two hops; fog3 also has its own
    // local incident.
    Scenario s;
    FogId f1{"1"}, f2{"2"}, f3{"3"};
    s.topology.nodes = {{f1, FogKind::public_fog},
                        {f2, FogKind::utility_fog},
                        {f3, FogKind::public_fog}};
    s.topology.edges = {{f1, f2}, {f2, f3}};
    s.initial = {{"fog1", {{"A", 2}, {"B", 3}}},
                 {"fog2", {{"C", 4}, {"D", 5}}},
                 {"fog3", {{"E", 6}, {"F", 7}}}};

    using K = ProgramStep::Kind;
    auto prog = [&](FogId fog, int n, std::vector<ProgramStep> steps,
                    std::map<std::string, Value> forged = {}) {
        TransactionProgram p;
        p.txn = {fog, n};
        p.steps = std::move(steps);
        p.forged = std::move(forged);
        s.programs.push_back(std::move(p));
    };
    auto r = [](std::string i) { return ProgramStep{K::read_local, std::move(i), {}, {}}; };
    auto rr = [](FogId src, std::string i) {
        return ProgramStep{K::read_remote, std::move(i), src, {}};
    };
    auto w = [](std::string i) { return ProgramStep{K::write, std::move(i), {}, {}}; };

    prog(f1, 1, {r("A"), w("A")}, {{"A", 100}});        // malicious at fog1
    prog(f2, 1, {rr(f1, "A"), r("C"), w("C")});         // imports the damage
    prog(f3, 1, {rr(f2, "C"), w("E")});                 // second hop
    prog(f3, 5, {r("F"), w("F")}, {{"F", 200}});        // malicious at fog3
    prog(f3, 6, {r("F"), r("E"), w("E")});              // mixes both incidents
    prog(f2, 7, {rr(f3, "E"), r("D"), w("D")});         // damage flows back up
    s.malicious = {{f1, 1}, {f3, 5}};

    auto exec = build_logs(s);
    auto truth = oracle_replay(s);

    for (auto policy : {DeliveryPolicy::fifo, DeliveryPolicy::round_robin,
                        DeliveryPolicy::seeded_random}) {
        s.policy = policy;
        s.seed = 11;
        auto net = Network::from_scenario(s, exec);
        net.inject_alert(f1, {f1, {{f1, 1}}});
        net.inject_alert(f3, {f3, {{f3, 5}}});
        auto trace = net.run_to_quiescence();
        CHECK(net.quiescent());
        CHECK(net.state_snapshot() == truth);
        for (const auto& id : {f1, f2, f3}) CHECK(net.blocked_items(id).empty());
    }
}
