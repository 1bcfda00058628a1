#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fogrec/assessment.hpp"
#include "two_fog_example.hpp"

using namespace fogrec;

TEST_CASE("primary assessment reproduces the fog1 audit table") {
    auto a = assess_primary(example::fog1_log(), example::fog1_alert());

    CHECK(to_table_text(a.da_table) == example::fog1_audit_text());
    CHECK(a.damaged == std::set<std::string>{"A", "D", "E"});
    CHECK(a.first_trigger_seq == 0);

    REQUIRE(a.da_table.size() == 10);
    // T1's row stores before-images: the values to restore.
    CHECK(a.da_table[0].kind == DamageAuditRow::Kind::malicious);
    CHECK(a.da_table[0].data_written[0].second == 11);
    CHECK(a.da_table[0].data_written[1].second == 3);
    // T8 only read a clean item; it must not appear at all.
    for (const auto& row : a.da_table) CHECK(row.txn.number != 8);
    // T6's clean B write stays out of the data-written column.
    const auto& t6 = a.da_table[5];
    REQUIRE(t6.txn.number == 6);
    for (const auto& [item, v] : t6.data_written) CHECK(item.item != "B");
}

TEST_CASE("damage set evolves per committed row") {
    auto a = assess_primary(example::fog1_log(), example::fog1_alert());
    using S = std::set<std::string>;
    REQUIRE(a.damaged_timeline.size() == 10);
    CHECK(a.damaged_timeline[0] == S{"C", "G"});            // T1
    CHECK(a.damaged_timeline[1] == S{"A", "C", "D", "G"});  // T2
    CHECK(a.damaged_timeline[3] == S{"C", "D"});            // T4 refreshes A, G
    CHECK(a.damaged_timeline[7] == S{"A", "D"});            // T9 refreshes C
    CHECK(a.damaged_timeline[9] == S{"A", "D", "E"});       // final
}

TEST_CASE("outgoing damage table lists the exported items") {
    auto a = assess_primary(example::fog1_log(), example::fog1_alert());
    REQUIRE(a.outgoing.count("fogx") == 1);
    const auto& dit = a.outgoing.at("fogx");
    CHECK(dit.target.name() == "fogx");
    REQUIRE(dit.rows.size() == 3);
    CHECK(dit.rows[0].txn.qualified() == "fog1.T3");
    CHECK(dit.rows[0].item == "G");
    CHECK(dit.rows[1].txn.qualified() == "fog1.T7");
    CHECK(dit.rows[1].item == "D");
    CHECK(dit.rows[2].txn.qualified() == "fog1.T11");
    CHECK(dit.rows[2].item == "E");
    for (const auto& r : dit.rows) CHECK(r.marked_affected);
}

TEST_CASE("secondary assessment reproduces the fogx audit table") {
    auto a = assess_secondary(example::fogx_log(), example::dit_to_fogx());

    CHECK(to_table_text(a.da_table) == example::fogx_audit_text());
    CHECK(a.damaged == std::set<std::string>{"K", "M", "N", "P"});

    // Extended damage table: the three imported rows first, then the local
    // spread, printed relative to fogx.
    CHECK(to_table_text(a.damage_table) ==
          "Transaction Id\tDamaged Data Items\n"
          "fog1.T3\tG\n"
          "fog1.T7\tD\n"
          "fog1.T11\tE\n"
          "T9\tK\n"
          "T10\tM\n"
          "T14\tN\n"
          "T16\tP\n");

    // Qualified invalid refs survive into the rows.
    REQUIRE(a.da_table[0].invalid_read.size() == 1);
    CHECK(a.da_table[0].invalid_read[0].display() == "fog1.T3.G");
    CHECK(a.da_table[0].kind == DamageAuditRow::Kind::affected);
    CHECK(a.da_table[1].kind == DamageAuditRow::Kind::updating);
}

TEST_CASE("assessment preconditions") {
    SUBCASE("malicious transaction absent") {
        auto log = parse_schedule("r2(A, 5) c2", FogId{"1"});
        CHECK_THROWS_AS(assess_primary(log, example::fog1_alert()), PreconditionError);
    }
    SUBCASE("malicious transaction never committed") {
        auto log = parse_schedule("r1(A, 5) w1(A, 5, 9)", FogId{"1"});
        CHECK_THROWS_AS(assess_primary(log, example::fog1_alert()), PreconditionError);
    }
    SUBCASE("damage row nothing ever read") {
        DamageItemTable dit;
        dit.target = FogId{"x"};
        dit.rows = {{TxnId{FogId{"1"}, 99}, "Z", true}};
        CHECK_THROWS_AS(assess_secondary(example::fogx_log(), dit), PreconditionError);
    }
    SUBCASE("list targeted at the wrong node") {
        MaliciousList mt_l{FogId{"2"}, {TxnId{FogId{"2"}, 1}}};
        CHECK_THROWS_AS(assess_primary(example::fog1_log(), mt_l), PreconditionError);
    }
}

TEST_CASE("aborted transactions leave no trace") {
    // T2 reads damaged C but aborts: no row, no spread to X.
    auto log = parse_schedule("w1(C, 11, 9) c1 r2(C, 9) w2(X, 1, 10) a2 r3(X, 1) w3(Y, 0, 1) c3",
                              FogId{"1"});
    auto a = assess_primary(log, example::fog1_alert());
    REQUIRE(a.da_table.size() == 1);  // only T1
    CHECK(a.damaged == std::set<std::string>{"C"});
}

TEST_CASE("blind write refreshes a damaged item") {
    auto log = parse_schedule("w1(C, 11, 9) c1 w2(C, 9, 4) c2 r3(C, 4) w3(X, 0, 4) c3",
                              FogId{"1"});
    auto a = assess_primary(log, example::fog1_alert());
    CHECK(a.damaged.empty());
    // T2's refresh is recorded; T3 read a clean value and is dropped.
    REQUIRE(a.da_table.size() == 2);
    CHECK(a.da_table[1].txn.number == 2);
    CHECK(a.da_table[1].invalid_read.empty());
}

TEST_CASE("a malicious commit with no operations still gets a row") {
    auto log = parse_schedule("c1", FogId{"1"});
    auto a = assess_primary(log, example::fog1_alert());
    REQUIRE(a.da_table.size() == 1);
    CHECK(a.da_table[0].kind == DamageAuditRow::Kind::malicious);
    CHECK(a.da_table[0].data_written.empty());
    CHECK(a.damaged.empty());
}

TEST_CASE("a second malicious write of an already damaged item records nothing") {
    // T2's before-image of C (9) is itself forged; restoring it would be wrong.
    auto log = parse_schedule("w1(C, 11, 9) c1 w2(C, 9, 7) c2", FogId{"1"});
    MaliciousList mt_l{FogId{"1"}, {TxnId{FogId{"1"}, 1}, TxnId{FogId{"1"}, 2}}};
    auto a = assess_primary(log, mt_l);
    REQUIRE(a.da_table.size() == 2);
    CHECK(a.da_table[0].data_written.size() == 1);
    CHECK(a.da_table[1].data_written.empty());
}

TEST_CASE("no seeds means no incident") {
    AssessmentSeeds none;
    auto a = assess(example::fog1_log(), none);
    CHECK(a.first_trigger_seq == -1);
    CHECK(a.da_table.empty());
    CHECK(a.damaged.empty());
}

TEST_CASE("records before the first trigger are ignored") {
    auto log = parse_schedule("r5(C, 11) w5(X, 1, 12) c5 w1(C, 11, 9) c1 r6(C, 9) w6(Y, 0, 9) c6",
                              FogId{"1"});
    auto a = assess_primary(log, example::fog1_alert());
    REQUIRE(a.da_table.size() == 2);
    CHECK(a.da_table[0].txn.number == 1);
    CHECK(a.da_table[1].txn.number == 6);
    CHECK(a.damaged == std::set<std::string>{"C", "Y"});
}
