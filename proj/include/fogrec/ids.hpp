#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>

namespace fogrec {

using Value = std::int64_t;

/// Thrown when input text does not match the schedule grammar or a JSON schema.
struct ParseError : std::runtime_error {
    std::size_t offset;
    ParseError(std::string msg, std::size_t off = 0)
        : std::runtime_error(std::move(msg)), offset(off) {}
};

/// Thrown when an operation's stated precondition does not hold
/// (e.g. a malicious transaction that is absent from the log).
struct PreconditionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown on cascade protocol violations (e.g. a valid-items table arriving
/// at a node that never received the matching damage table).
struct ProtocolError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class FogKind { public_fog, utility_fog };

/// Identity of a fog node. The label is the suffix after "fog" in the
/// schedule notation, so "fog1" -> "1" and "fogx" -> "x".
struct FogId {
    std::string label;

    std::string name() const { return "fog" + label; }

    // Parses "fog<suffix>"; returns nullopt when the text is not a fog id.
    static std::optional<FogId> try_parse(const std::string& text) {
        if (text.size() > 3 && text.rfind("fog", 0) == 0)
            return FogId{text.substr(3)};
        return std::nullopt;
    }
    static FogId parse(const std::string& text) {
        auto f = try_parse(text);
        if (!f) throw ParseError("not a fog id: '" + text + "'");
        return *f;
    }

    friend bool operator==(const FogId& a, const FogId& b) { return a.label == b.label; }
    friend bool operator!=(const FogId& a, const FogId& b) { return !(a == b); }
    friend bool operator<(const FogId& a, const FogId& b) { return a.label < b.label; }
};

/// Transaction identity, scoped to one fog node. The same number may recur
/// on different nodes, so cross-node references always carry the fog.
struct TxnId {
    FogId fog;
    int number = 0;

    std::string local_name() const { return "T" + std::to_string(number); }
    std::string qualified() const { return fog.name() + ".T" + std::to_string(number); }

    friend bool operator==(const TxnId& a, const TxnId& b) {
        return a.number == b.number && a.fog == b.fog;
    }
    friend bool operator!=(const TxnId& a, const TxnId& b) { return !(a == b); }
    friend bool operator<(const TxnId& a, const TxnId& b) {
        return std::tie(a.fog.label, a.number) < std::tie(b.fog.label, b.number);
    }
};

/// A data item reference: either a local item name, or a remote item
/// identified by the exporting node and the access transaction through
/// which it was read (printed "fog1.T3.G").
struct ItemRef {
    std::string item;
    std::optional<std::pair<FogId, int>> remote;  // (source fog, via txn number)

    bool is_remote() const { return remote.has_value(); }

    std::string display() const {
        if (!remote) return item;
        return remote->first.name() + ".T" + std::to_string(remote->second) + "." + item;
    }

    static ItemRef local(std::string name) { return ItemRef{std::move(name), std::nullopt}; }
    static ItemRef remote_ref(FogId source, int via_txn, std::string name) {
        return ItemRef{std::move(name), std::make_pair(std::move(source), via_txn)};
    }

    friend bool operator==(const ItemRef& a, const ItemRef& b) {
        return a.item == b.item && a.remote == b.remote;
    }
    friend bool operator!=(const ItemRef& a, const ItemRef& b) { return !(a == b); }
    friend bool operator<(const ItemRef& a, const ItemRef& b) {
        return a.display() < b.display();
    }
};

// Item names may not contain the schedule grammar's structural characters.
inline bool valid_item_name(const std::string& name) {
    if (name.empty()) return false;
    for (char c : name)
        if (c == '.' || c == ',' || c == '(' || c == ')' || c == ' ') return false;
    return true;
}

}  // namespace fogrec
