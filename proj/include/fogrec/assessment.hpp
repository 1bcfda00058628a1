#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "fogrec/log_model.hpp"
#include "fogrec/tables.hpp"

namespace fogrec {

struct AssessmentOutput {
    DamageAuditTable da_table;
    /// Final damaged local items (the DI_L / blocked set).
    std::set<std::string> damaged;
    /// Damaged items keyed by exporting transaction: incoming upstream rows
    /// first, then local additions in detection order (the extended DIT).
    DamageItemTable damage_table;
    /// Per-downstream-fog damage item tables to send on.
    std::map<std::string, DamageItemTable> outgoing;
    /// Damaged local-item set snapshot after each emitted row.
    std::vector<std::set<std::string>> damaged_timeline;
    /// Seq of the first record involved in the incident, -1 when none.
    int first_trigger_seq = -1;
};

/// Seeds for one assessment pass: locally malicious transactions plus damage
/// imported through upstream damage-item tables. Either side may be empty.
struct AssessmentSeeds {
    std::vector<TxnId> malicious;       // must commit in the log
    std::vector<DamageItemRow> incoming;  // fog-qualified upstream entries
};

/// One log scan that classifies reads against the evolving damaged set,
/// taints writes that follow an invalid read, applies the blind-write
/// refresh rule, and exports damage read by foreign fogs. Damage-set changes
/// take effect at the transaction's commit; aborted and unterminated
/// transactions leave no trace.
AssessmentOutput assess(const TransactionLog& log, const AssessmentSeeds& seeds);

/// Algorithm entry point for the primary victim node (IDS alert input).
AssessmentOutput assess_primary(const TransactionLog& log, const MaliciousList& mt_l);

/// Algorithm entry point for a secondary affected node (upstream DIT input).
AssessmentOutput assess_secondary(const TransactionLog& log, const DamageItemTable& incoming);

}  // namespace fogrec
