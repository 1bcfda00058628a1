// Shared fixture: the two-fog worked example used across the test suites.
// fog1 is the attacked (primary) node, fogx a downstream node that read
// three of its items through access transactions T3, T7, T11.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "fogrec/fognet.hpp"
#include "fogrec/scenario.hpp"

namespace example {

using namespace fogrec;

inline const char* fog1_schedule() {
    return "r1(A, 5) r1(B, 4) w1(C, 11, 9) w1(G, 3, 9) r2(B, 4) c1 "
           "r2(G, 9) w2(A, 5, 13) w2(D, 0, 13) c2 "
           "fogx.r3(G, 9) c3 "
           "w4(A, 13, 5) w4(G, 9, 3) c4 "
           "r5(D, 13) r5(A, 5) r5(C, 9) w5(D, 2, 27) c5 "
           "r6(B, 4) w6(B, 4, 4) r6(D, 16) w6(D, 16, 20) r6(A, 5) w6(A, 5, 25) c6 "
           "fogx.r7(D, 20) c7 "
           "r8(C, 9) c8 "
           "w9(C, 9, 11) c9 "
           "r10(A, 25) r10(C, 11) w10(E, 10, 36) c10 "
           "fogx.r11(E, 36) c11";
}

inline const char* fogx_schedule() {
    return "r9(K, 3) r9(fog1.T3.G, 9) w9(K, 3, 12) c9 "
           "r10(M, 10) r10(K, 12) w10(M, 10, 22) c10 "
           "r14(fog1.T7.D, 20) r14(L, 4) w14(N, 17, 24) c14 "
           "r16(fog1.T11.E, 36) w16(P, 4, 36) c16";
}

inline TransactionLog fog1_log() { return parse_schedule(fog1_schedule(), FogId{"1"}); }
inline TransactionLog fogx_log() { return parse_schedule(fogx_schedule(), FogId{"x"}); }

inline MaliciousList fog1_alert() { return {FogId{"1"}, {TxnId{FogId{"1"}, 1}}}; }

// Damage item table fog1 sends to fogx: the three exported damaged items.
inline DamageItemTable dit_to_fogx() {
    FogId f1{"1"};
    DamageItemTable t;
    t.target = FogId{"x"};
    t.rows = {{{f1, 3}, "G", true}, {{f1, 7}, "D", true}, {{f1, 11}, "E", true}};
    return t;
}

// Corrected values fog1 sends to fogx after its own recovery.
inline ValidItemsTable vit_to_fogx() {
    FogId f1{"1"};
    ValidItemsTable t;
    t.target = FogId{"x"};
    t.rows = {{{f1, 3}, "G", 3}, {{f1, 7}, "D", 27}, {{f1, 11}, "E", 43}};
    return t;
}

// Expected fog1 audit table straight after assessment (pre-recovery).
inline std::string fog1_audit_text() {
    return "T Id\tData written\tValid read\tInvalid\tFog ID\n"
           "T1\t(C, 11), (G, 3)\t\t\t\n"
           "T2\t(A, 13), (D, 13)\t(B, 4)\tG\t\n"
           "T3\t\t\tG\tfogx\n"
           "T4\t(A, 5), (G, 3)\t\t\t\n"
           "T5\t(D, 27)\t(A, 5)\tC, D\t\n"
           "T6\t(D, 20), (A, 25)\t(B, 4), (A, 5)\tD\t\n"
           "T7\t\t\tD\tfogx\n"
           "T9\t(C, 11)\t\t\t\n"
           "T10\t(E, 36)\t(C, 11)\tA\t\n"
           "T11\t\t\tE\tfogx\n";
}

// Expected fogx audit table after assessment with the incoming damage rows.
inline std::string fogx_audit_text() {
    return "T Id\tData written\tValid read\tInvalid\tFog ID\n"
           "T9\t(K, 12)\t(K, 3)\tfog1.T3.G\t\n"
           "T10\t(M, 22)\t(M, 10)\tK\t\n"
           "T14\t(N, 24)\t(L, 4)\tfog1.T7.D\t\n"
           "T16\t(P, 36)\t\tfog1.T11.E\t\n";
}

// Expected fog1 audit table after recovery.
inline std::string fog1_recovered_text() {
    return "T Id\tData written\tValid read\tInvalid\tFog ID\n"
           "T1\t(C, 11), (G, 3)\t\t\t\n"
           "T2\t(A, 7), (D, 7)\t(B, 4), (G, 3)\t\t\n"
           "T3\t\t(G, 3)\t\tfogx\n"
           "T4\t(A, 5), (G, 3)\t\t\t\n"
           "T5\t(D, 23)\t(A, 5), (C, 11), (D, 7)\t\t\n"
           "T6\t(D, 27), (A, 32)\t(B, 4), (A, 5), (D, 23)\t\t\n"
           "T7\t\t(D, 27)\t\tfogx\n"
           "T9\t(C, 11)\t\t\t\n"
           "T10\t(E, 43)\t(C, 11), (A, 32)\t\t\n"
           "T11\t\t(E, 43)\t\tfogx\n";
}

// Expected fogx audit table after recovery with the incoming corrections.
inline std::string fogx_recovered_text() {
    return "T Id\tData written\tValid read\tInvalid\tFog ID\n"
           "T9\t(K, 6)\t(K, 3), (fog1.T3.G, 3)\t\t\n"
           "T10\t(M, 16)\t(M, 10), (K, 6)\t\t\n"
           "T14\t(N, 31)\t(L, 4), (fog1.T7.D, 27)\t\t\n"
           "T16\t(P, 43)\t(fog1.T11.E, 43)\t\t\n";
}

inline std::map<std::string, Value> fog1_patches() {
    return {{"A", 32}, {"D", 27}, {"E", 43}};
}
inline std::map<std::string, Value> fogx_patches() {
    return {{"K", 6}, {"M", 16}, {"N", 31}, {"P", 43}};
}

inline GroundTruth expected_clean_state() {
    return {{"fog1", {{"A", 32}, {"B", 4}, {"C", 11}, {"D", 27}, {"E", 43}, {"G", 3}}},
            {"fogx", {{"K", 6}, {"L", 4}, {"M", 16}, {"N", 31}, {"P", 43}}}};
}

// The same incident as a declarative scenario: two nodes, one forged
// transaction (fog1.T1 writing C=9 and G=9), three cross-fog reads.
inline Scenario two_fog_scenario() {
    Scenario s;
    FogId f1{"1"}, fx{"x"};
    s.topology.nodes = {{f1, FogKind::public_fog}, {fx, FogKind::utility_fog}};
    s.topology.edges = {{f1, fx}};
    s.initial = {{"fog1", {{"A", 5}, {"B", 4}, {"C", 11}, {"D", 0}, {"E", 10}, {"G", 3}}},
                 {"fogx", {{"K", 3}, {"L", 4}, {"M", 10}, {"N", 17}, {"P", 4}}}};

    using K = ProgramStep::Kind;
    auto r = [](std::string item) { return ProgramStep{K::read_local, std::move(item), {}, {}}; };
    auto rr = [&](FogId src, std::string item) {
        return ProgramStep{K::read_remote, std::move(item), src, {}};
    };
    auto w = [](std::string item, RecomputeRule rule = RecomputeRule::sum()) {
        return ProgramStep{K::write, std::move(item), {}, std::move(rule)};
    };

    auto prog = [&](FogId fog, int n, std::vector<ProgramStep> steps) {
        TransactionProgram p;
        p.txn = {fog, n};
        p.steps = std::move(steps);
        s.programs.push_back(std::move(p));
    };

    prog(f1, 1, {r("A"), r("B"), w("C"), w("G")});
    s.programs.back().forged = {{"C", 9}, {"G", 9}};
    prog(f1, 2, {r("B"), r("G"), w("A"), w("D")});
    prog(fx, 9, {r("K"), rr(f1, "G"), w("K")});
    prog(f1, 4, {w("A", RecomputeRule::const_value(5)), w("G", RecomputeRule::const_value(3))});
    prog(f1, 5, {r("D"), r("A"), r("C"), w("D")});
    prog(f1, 6, {r("B"), w("B"), r("D"), w("D"), r("A"), w("A")});
    prog(fx, 10, {r("M"), r("K"), w("M")});
    prog(fx, 14, {rr(f1, "D"), r("L"), w("N")});
    prog(f1, 8, {r("C")});
    prog(f1, 9, {w("C", RecomputeRule::const_value(11))});
    prog(f1, 10, {r("A"), r("C"), w("E")});
    prog(fx, 16, {rr(f1, "E"), w("P")});

    s.malicious = {{f1, 1}};
    return s;
}

// What the executor produces for the scenario above. It differs from the
// verbatim schedules only where those carry internally inconsistent values
// (T5's before-image of D onward) plus one interleave (r2(B) before c1).
inline const char* generated_fog1_schedule() {
    return "r1(A, 5) r1(B, 4) w1(C, 11, 9) w1(G, 3, 9) c1 "
           "r2(B, 4) r2(G, 9) w2(A, 5, 13) w2(D, 0, 13) c2 "
           "fogx.r3(G, 9) c3 "
           "w4(A, 13, 5) w4(G, 9, 3) c4 "
           "r5(D, 13) r5(A, 5) r5(C, 9) w5(D, 13, 27) c5 "
           "r6(B, 4) w6(B, 4, 4) r6(D, 27) w6(D, 27, 31) r6(A, 5) w6(A, 5, 36) c6 "
           "fogx.r7(D, 31) c7 "
           "r8(C, 9) c8 "
           "w9(C, 9, 11) c9 "
           "r10(A, 36) r10(C, 11) w10(E, 10, 47) c10 "
           "fogx.r11(E, 47) c11";
}

inline const char* generated_fogx_schedule() {
    return "r9(K, 3) r9(fog1.T3.G, 9) w9(K, 3, 12) c9 "
           "r10(M, 10) r10(K, 12) w10(M, 10, 22) c10 "
           "r14(fog1.T7.D, 31) r14(L, 4) w14(N, 17, 35) c14 "
           "r16(fog1.T11.E, 47) w16(P, 4, 47) c16";
}

// Executes a scenario's full incident: one alert per node hosting malicious
// transactions, then the cascade to quiescence.
inline std::pair<GroundTruth, CascadeTrace> run_cascade(const Scenario& s,
                                                        const ExecutionResult& exec) {
    Network net = Network::from_scenario(s, exec);
    std::map<std::string, MaliciousList> alerts;
    for (const auto& t : s.malicious) {
        auto& m = alerts[t.fog.name()];
        m.target = t.fog;
        m.txns.push_back(t);
    }
    for (auto& [name, m] : alerts) {
        (void)name;
        net.inject_alert(m.target, m);
    }
    CascadeTrace trace;
    if (!alerts.empty()) trace = net.run_to_quiescence();
    return {net.state_snapshot(), trace};
}

}  // namespace example
