#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fogrec/log_model.hpp"
#include "fogrec/tables.hpp"

namespace fogrec {

struct RecoveryOutput {
    /// Input table with invalid reads corrected, valid reads augmented and
    /// written values recomputed.
    DamageAuditTable recovered;
    /// Corrected values for each downstream fog that read damaged data.
    std::map<std::string, ValidItemsTable> outgoing;
    /// Database substitutions for damaged items not touched by the post-
    /// recovery log.
    std::map<std::string, Value> patches;
    /// Damaged items left unpatched because the post-recovery log already
    /// rewrote them.
    std::set<std::string> still_blocked;
    /// Rows fully processed; < recovered.size() only in partial mode.
    std::size_t rows_recovered = 0;
};

struct RecoveryInput {
    /// Damaged local items to patch (DI_L, or the damage table's local side).
    std::set<std::string> damaged;
    /// Log of transactions committed while recovery ran; a committed write
    /// there supersedes the patch.
    const TransactionLog* post_log = nullptr;
    /// Pre-attack values used when the upward scan finds nothing.
    std::map<std::string, Value> fallback;
    /// Corrected values received from upstream, for invalid remote refs.
    std::vector<ValidItemRow> vit_in;
    /// When true, stop at the first row whose remote corrections have not
    /// arrived instead of throwing; patches are withheld until complete.
    bool allow_partial = false;
};

/// Recovers rows strictly in table order so upward scans see already-
/// corrected values. Remote refs are corrected from vit_in, local items by
/// scanning former rows' data written (malicious rows contribute their
/// before-images), falling back to the pre-attack value map.
RecoveryOutput recover(DamageAuditTable table, const RecoveryInput& input);

RecoveryOutput recover_primary(const DamageAuditTable& table, const DamagedItemSet& di_l,
                               const TransactionLog* post_log,
                               const std::map<std::string, Value>& fallback);

RecoveryOutput recover_secondary(const DamageAuditTable& table, const DamageItemTable& dit,
                                 const ValidItemsTable& incoming,
                                 const TransactionLog* post_log,
                                 const std::map<std::string, Value>& fallback);

/// Nearest former row whose data written holds the item; fallback map when
/// absent everywhere. Throws PreconditionError when neither source exists.
Value last_valid_before(const DamageAuditTable& table, std::size_t row_index,
                        const std::string& item, const std::map<std::string, Value>& fallback);

/// Evaluates a recompute rule against the reads seen so far within a
/// transaction. Throws PreconditionError when the rule needs a read that
/// never happened.
Value apply_recompute(const RecomputeRule& rule, const std::vector<Value>& reads_so_far,
                      const std::optional<Value>& last_read,
                      const std::map<std::string, Value>& read_by_item);

/// A write's recomputed value under `rule`, given the corrected reads that
/// precede it. Each write carries the count of reads before its position.
std::vector<std::pair<ItemRef, Value>> recompute_row(
    const std::vector<std::pair<ItemRef, Value>>& reads_in_order,
    const std::vector<std::pair<ItemRef, std::size_t>>& writes_with_reads_before,
    const RecomputeRule& rule);

}  // namespace fogrec
