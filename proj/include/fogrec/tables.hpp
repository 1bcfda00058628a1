#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "fogrec/ids.hpp"

namespace fogrec {

/// How a transaction derives the value it writes, as a pure function of the
/// ordered reads that precede the write within the transaction.
struct RecomputeRule {
    enum class Kind { sum_of_reads, constant, last_read, identity_of };

    Kind kind = Kind::sum_of_reads;
    Value constant = 0;
    std::string ref_item;  // identity_of

    static RecomputeRule sum() { return {}; }
    static RecomputeRule const_value(Value v) { return {Kind::constant, v, {}}; }
    static RecomputeRule last_read() { return {Kind::last_read, 0, {}}; }
    static RecomputeRule identity_of(std::string item) {
        return {Kind::identity_of, 0, std::move(item)};
    }

    friend bool operator==(const RecomputeRule& a, const RecomputeRule& b) {
        return a.kind == b.kind && a.constant == b.constant && a.ref_item == b.ref_item;
    }
};

/// One operation of the audited transaction, in original log order. Carried
/// on the audit row so recovery can recompute written values position by
/// position.
struct RowOp {
    enum class Kind { read, write };

    Kind kind = Kind::read;
    ItemRef item;
    Value value = 0;       // read: observed value; write: recorded value
    bool invalid = false;  // read classified against the damaged set
    bool recorded = false; // write present in data_written
    RecomputeRule rule;    // write only

    static RowOp read(ItemRef i, Value v, bool inval) {
        return {Kind::read, std::move(i), v, inval, false, {}};
    }
    static RowOp write(ItemRef i, Value v, bool rec, RecomputeRule r) {
        return {Kind::write, std::move(i), v, false, rec, std::move(r)};
    }
};

struct DamageAuditRow {
    enum class Kind { malicious, remote_read, updating, affected };

    TxnId txn;
    Kind kind = Kind::updating;
    // Malicious rows hold before-images (the pre-attack values); all other
    // rows hold after-images.
    std::vector<std::pair<ItemRef, Value>> data_written;
    std::vector<std::pair<ItemRef, Value>> valid_read;
    std::vector<ItemRef> invalid_read;  // kept sorted by display name
    std::vector<FogId> fog_ids;
    std::vector<RowOp> ops;
};

using DamageAuditTable = std::vector<DamageAuditRow>;

/// The primary victim's damaged-item list; doubles as the blocked-item set.
struct DamagedItemSet {
    std::set<std::string> items;
};

struct DamageItemRow {
    TxnId txn;  // exporting transaction, fog-qualified
    std::string item;
    bool marked_affected = false;  // true for rows received from upstream
};

/// Damage keyed by the transaction that exported or produced it. Sent to a
/// downstream fog, and used by secondary assessment as its damaged set.
struct DamageItemTable {
    FogId target;
    std::vector<DamageItemRow> rows;

    bool contains(const TxnId& txn, const std::string& item) const;
    /// Local (unqualified relative to `node`) item names present in the table.
    std::set<std::string> local_items(const FogId& node) const;
};

struct MaliciousList {
    FogId target;
    std::vector<TxnId> txns;
};

struct ValidItemRow {
    TxnId txn;
    std::string item;
    Value value;
};

/// Corrected (transaction, item, value) triples sent downstream after recovery.
struct ValidItemsTable {
    FogId target;
    std::vector<ValidItemRow> rows;

    const ValidItemRow* find(const TxnId& txn, const std::string& item) const;
};

// --- tabular text (five columns, tab separated) ---

std::string to_table_text(const DamageAuditTable& table);
std::string to_table_text(const DamageItemTable& table);
std::string to_table_text(const ValidItemsTable& table);
std::string to_patch_text(const std::map<std::string, Value>& patches);

// --- JSON ---

nlohmann::json to_json(const DamageAuditRow& row);
nlohmann::json to_json(const DamageAuditTable& table);
nlohmann::json to_json(const DamageItemTable& table);
nlohmann::json to_json(const ValidItemsTable& table);
nlohmann::json to_json(const DamagedItemSet& set);

DamageAuditRow audit_row_from_json(const nlohmann::json& j, const FogId& node);
DamageAuditTable audit_table_from_json(const nlohmann::json& j, const FogId& node);
DamageItemTable dit_from_json(const nlohmann::json& j);
ValidItemsTable vit_from_json(const nlohmann::json& j);
DamagedItemSet dil_from_json(const nlohmann::json& j);

// "fog1.T3" or (relative to node) "T9"
TxnId txn_from_string(const std::string& text, const FogId& default_fog);
std::string txn_to_string(const TxnId& txn, const FogId& relative_to);

// "G" or "fog1.T3.G"
ItemRef item_from_string(const std::string& text);

}  // namespace fogrec
