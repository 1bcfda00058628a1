#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fogrec/ids.hpp"

namespace fogrec {

struct Operation {
    enum class Kind { read, write, commit, abort };

    Kind kind = Kind::commit;
    ItemRef item;       // read/write
    Value value = 0;    // read: observed value
    Value before = 0;   // write: old value of the item
    Value after = 0;    // write: new value of the item

    static Operation read(ItemRef i, Value v) { return {Kind::read, std::move(i), v, 0, 0}; }
    static Operation write(ItemRef i, Value v1, Value v2) {
        return {Kind::write, std::move(i), 0, v1, v2};
    }
    static Operation commit() { return {Kind::commit, {}, 0, 0, 0}; }
    static Operation abort() { return {Kind::abort, {}, 0, 0, 0}; }

    friend bool operator==(const Operation& a, const Operation& b) {
        return a.kind == b.kind && a.item == b.item && a.value == b.value &&
               a.before == b.before && a.after == b.after;
    }
};

struct LogRecord {
    int seq = 0;
    TxnId txn;
    // Set when the record is a read issued by another fog's transaction
    // against this node's data ("fogx.r3(G, 9)" entries).
    std::optional<FogId> origin;
    Operation op;

    friend bool operator==(const LogRecord& a, const LogRecord& b) {
        return a.seq == b.seq && a.txn == b.txn && a.origin == b.origin && a.op == b.op;
    }
};

/// One fog node's log: an append-only, seq-ordered record sequence.
struct TransactionLog {
    FogId node;
    std::vector<LogRecord> records;
};

struct ValidationIssue {
    int seq = -1;
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> errors;    // structural violations
    std::vector<ValidationIssue> warnings;  // value-chain inconsistencies
    bool ok() const { return errors.empty(); }
};

/// Parses the schedule notation into a log for `node`. Seq numbers are
/// assigned by token order. Throws ParseError with the offending offset.
TransactionLog parse_schedule(const std::string& text, const FogId& node);

/// Prints a log in normalized schedule notation; parse(format(L)) == L.
std::string format_schedule(const TransactionLog& log);

std::string format_record(const LogRecord& rec);

/// Structural checks (errors) plus value-chain consistency checks (warnings).
/// Warnings never block assessment.
ValidationReport validate_schedule(const TransactionLog& log);

/// Value of a local item as of position `seq`: the after-image of the last
/// write by a transaction committed before seq, else the earliest logged
/// read of the item, else the initial-state entry. Throws PreconditionError
/// when no source exists.
Value committed_value_before(const TransactionLog& log, const ItemRef& item, int seq,
                             const std::map<std::string, Value>& initial = {});

}  // namespace fogrec
