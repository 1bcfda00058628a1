#include "fogrec/tables.hpp"

#include <algorithm>
#include <sstream>

#include <nlohmann/json.hpp>

namespace fogrec {

using nlohmann::json;

bool DamageItemTable::contains(const TxnId& txn, const std::string& item) const {
    return std::any_of(rows.begin(), rows.end(), [&](const DamageItemRow& r) {
        return r.txn == txn && r.item == item;
    });
}

std::set<std::string> DamageItemTable::local_items(const FogId& node) const {
    std::set<std::string> items;
    for (const auto& r : rows)
        if (r.txn.fog == node) items.insert(r.item);
    return items;
}

const ValidItemRow* ValidItemsTable::find(const TxnId& txn, const std::string& item) const {
    for (const auto& r : rows)
        if (r.txn == txn && r.item == item) return &r;
    return nullptr;
}

TxnId txn_from_string(const std::string& text, const FogId& default_fog) {
    std::string rest = text;
    FogId fog = default_fog;
    auto dot = text.find('.');
    if (dot != std::string::npos) {
        fog = FogId::parse(text.substr(0, dot));
        rest = text.substr(dot + 1);
    }
    if (rest.size() < 2 || rest[0] != 'T')
        throw ParseError("bad transaction id '" + text + "'");
    return TxnId{fog, std::stoi(rest.substr(1))};
}

std::string txn_to_string(const TxnId& txn, const FogId& relative_to) {
    return txn.fog == relative_to ? txn.local_name() : txn.qualified();
}

ItemRef item_from_string(const std::string& text) {
    auto first = text.find('.');
    if (first == std::string::npos) {
        if (!valid_item_name(text)) throw ParseError("bad item name '" + text + "'");
        return ItemRef::local(text);
    }
    auto second = text.find('.', first + 1);
    if (second == std::string::npos) throw ParseError("bad item reference '" + text + "'");
    FogId fog = FogId::parse(text.substr(0, first));
    std::string t = text.substr(first + 1, second - first - 1);
    if (t.size() < 2 || t[0] != 'T') throw ParseError("bad item reference '" + text + "'");
    std::string name = text.substr(second + 1);
    if (!valid_item_name(name)) throw ParseError("bad item name '" + name + "'");
    return ItemRef::remote_ref(fog, std::stoi(t.substr(1)), name);
}

// --- tabular text ---

namespace {

std::string pairs_cell(const std::vector<std::pair<ItemRef, Value>>& pairs) {
    std::string out;
    for (const auto& [item, value] : pairs) {
        if (!out.empty()) out += ", ";
        out += "(" + item.display() + ", " + std::to_string(value) + ")";
    }
    return out;
}

std::string items_cell(const std::vector<ItemRef>& items) {
    std::string out;
    for (const auto& item : items) {
        if (!out.empty()) out += ", ";
        out += item.display();
    }
    return out;
}

}  // namespace

std::string to_table_text(const DamageAuditTable& table) {
    std::ostringstream out;
    out << "T Id\tData written\tValid read\tInvalid\tFog ID\n";
    for (const auto& row : table) {
        std::string fogs;
        for (const auto& f : row.fog_ids) {
            if (!fogs.empty()) fogs += ", ";
            fogs += f.name();
        }
        out << row.txn.local_name() << '\t' << pairs_cell(row.data_written) << '\t'
            << pairs_cell(row.valid_read) << '\t' << items_cell(row.invalid_read) << '\t' << fogs
            << '\n';
    }
    return out.str();
}

std::string to_table_text(const DamageItemTable& table) {
    std::ostringstream out;
    out << "Transaction Id\tDamaged Data Items\n";
    for (const auto& row : table.rows)
        out << txn_to_string(row.txn, table.target) << '\t' << row.item << '\n';
    return out.str();
}

std::string to_table_text(const ValidItemsTable& table) {
    std::ostringstream out;
    out << "Transaction Id\tValid Data Items\n";
    for (const auto& row : table.rows)
        out << txn_to_string(row.txn, table.target) << "\t(" << row.item << ", " << row.value
            << ")\n";
    return out.str();
}

std::string to_patch_text(const std::map<std::string, Value>& patches) {
    std::ostringstream out;
    for (const auto& [item, value] : patches) out << item << " = " << value << '\n';
    return out.str();
}

// --- JSON ---

namespace {

json rule_to_json(const RecomputeRule& rule) {
    switch (rule.kind) {
        case RecomputeRule::Kind::sum_of_reads: return "sum";
        case RecomputeRule::Kind::constant: return json{{"const", rule.constant}};
        case RecomputeRule::Kind::last_read: return "last_read";
        case RecomputeRule::Kind::identity_of: return json{{"identity_of", rule.ref_item}};
    }
    return "sum";
}

RecomputeRule rule_from_json(const json& j) {
    if (j.is_string()) {
        std::string s = j.get<std::string>();
        if (s == "sum") return RecomputeRule::sum();
        if (s == "last_read") return RecomputeRule::last_read();
        throw ParseError("unknown recompute rule '" + s + "'");
    }
    if (j.is_object()) {
        if (j.contains("const")) return RecomputeRule::const_value(j.at("const").get<Value>());
        if (j.contains("identity_of"))
            return RecomputeRule::identity_of(j.at("identity_of").get<std::string>());
    }
    throw ParseError("unknown recompute rule: " + j.dump());
}

json pairs_to_json(const std::vector<std::pair<ItemRef, Value>>& pairs) {
    json arr = json::array();
    for (const auto& [item, value] : pairs)
        arr.push_back({{"item", item.display()}, {"value", value}});
    return arr;
}

std::vector<std::pair<ItemRef, Value>> pairs_from_json(const json& arr) {
    std::vector<std::pair<ItemRef, Value>> out;
    for (const auto& e : arr)
        out.emplace_back(item_from_string(e.at("item").get<std::string>()),
                         e.at("value").get<Value>());
    return out;
}

const char* kind_name(DamageAuditRow::Kind k) {
    switch (k) {
        case DamageAuditRow::Kind::malicious: return "malicious";
        case DamageAuditRow::Kind::remote_read: return "remote_read";
        case DamageAuditRow::Kind::updating: return "updating";
        case DamageAuditRow::Kind::affected: return "affected";
    }
    return "updating";
}

DamageAuditRow::Kind kind_from_name(const std::string& s) {
    if (s == "malicious") return DamageAuditRow::Kind::malicious;
    if (s == "remote_read") return DamageAuditRow::Kind::remote_read;
    if (s == "updating") return DamageAuditRow::Kind::updating;
    if (s == "affected") return DamageAuditRow::Kind::affected;
    throw ParseError("unknown row kind '" + s + "'");
}

}  // namespace

json to_json(const DamageAuditRow& row) {
    json ops = json::array();
    for (const auto& op : row.ops) {
        if (op.kind == RowOp::Kind::read)
            ops.push_back({{"op", "read"},
                           {"item", op.item.display()},
                           {"value", op.value},
                           {"invalid", op.invalid}});
        else
            ops.push_back({{"op", "write"},
                           {"item", op.item.display()},
                           {"value", op.value},
                           {"recorded", op.recorded},
                           {"rule", rule_to_json(op.rule)}});
    }
    json fogs = json::array();
    for (const auto& f : row.fog_ids) fogs.push_back(f.name());
    json invalid = json::array();
    for (const auto& i : row.invalid_read) invalid.push_back(i.display());
    return {{"txn", row.txn.local_name()},
            {"kind", kind_name(row.kind)},
            {"data_written", pairs_to_json(row.data_written)},
            {"valid_read", pairs_to_json(row.valid_read)},
            {"invalid_read", invalid},
            {"fogs", fogs},
            {"ops", ops}};
}

json to_json(const DamageAuditTable& table) {
    json arr = json::array();
    for (const auto& row : table) arr.push_back(to_json(row));
    return arr;
}

DamageAuditRow audit_row_from_json(const json& j, const FogId& node) {
    DamageAuditRow row;
    row.txn = txn_from_string(j.at("txn").get<std::string>(), node);
    row.kind = kind_from_name(j.at("kind").get<std::string>());
    row.data_written = pairs_from_json(j.at("data_written"));
    row.valid_read = pairs_from_json(j.at("valid_read"));
    for (const auto& e : j.at("invalid_read"))
        row.invalid_read.push_back(item_from_string(e.get<std::string>()));
    for (const auto& e : j.at("fogs")) row.fog_ids.push_back(FogId::parse(e.get<std::string>()));
    for (const auto& e : j.at("ops")) {
        if (e.at("op") == "read")
            row.ops.push_back(RowOp::read(item_from_string(e.at("item").get<std::string>()),
                                          e.at("value").get<Value>(),
                                          e.at("invalid").get<bool>()));
        else
            row.ops.push_back(RowOp::write(item_from_string(e.at("item").get<std::string>()),
                                           e.at("value").get<Value>(),
                                           e.at("recorded").get<bool>(),
                                           rule_from_json(e.at("rule"))));
    }
    return row;
}

DamageAuditTable audit_table_from_json(const json& j, const FogId& node) {
    DamageAuditTable table;
    for (const auto& e : j) table.push_back(audit_row_from_json(e, node));
    return table;
}

json to_json(const DamageItemTable& table) {
    json rows = json::array();
    for (const auto& r : table.rows)
        rows.push_back({{"txn", r.txn.qualified()},
                        {"item", r.item},
                        {"affected", r.marked_affected}});
    return {{"target", table.target.name()}, {"rows", rows}};
}

DamageItemTable dit_from_json(const json& j) {
    DamageItemTable table;
    table.target = FogId::parse(j.at("target").get<std::string>());
    for (const auto& e : j.at("rows"))
        table.rows.push_back({txn_from_string(e.at("txn").get<std::string>(), table.target),
                              e.at("item").get<std::string>(),
                              e.value("affected", false)});
    return table;
}

json to_json(const ValidItemsTable& table) {
    json rows = json::array();
    for (const auto& r : table.rows)
        rows.push_back({{"txn", r.txn.qualified()}, {"item", r.item}, {"value", r.value}});
    return {{"target", table.target.name()}, {"rows", rows}};
}

ValidItemsTable vit_from_json(const json& j) {
    ValidItemsTable table;
    table.target = FogId::parse(j.at("target").get<std::string>());
    for (const auto& e : j.at("rows"))
        table.rows.push_back({txn_from_string(e.at("txn").get<std::string>(), table.target),
                              e.at("item").get<std::string>(), e.at("value").get<Value>()});
    return table;
}

json to_json(const DamagedItemSet& set) {
    json arr = json::array();
    for (const auto& i : set.items) arr.push_back(i);
    return {{"items", arr}};
}

DamagedItemSet dil_from_json(const json& j) {
    DamagedItemSet set;
    for (const auto& e : j.at("items")) set.items.insert(e.get<std::string>());
    return set;
}

}  // namespace fogrec
