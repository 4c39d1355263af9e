#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "deriver/edit.hpp"
#include "deriver/report.hpp"
#include "deriver/syntax.hpp"

namespace deriver {

/// A request that cannot be served. `status` is the HTTP status to use.
class ServiceError : public std::runtime_error {
public:
    ServiceError(int status, std::string code, std::string msg, std::optional<SrcSpan> span = std::nullopt)
        : std::runtime_error(std::move(msg)), status(status), code(std::move(code)), span(span) {}
    int status;
    std::string code;
    std::optional<SrcSpan> span;
    Json body() const;
};

/// Session-oriented editing. Every method takes and returns JSON so the HTTP
/// layer stays a thin router; all of them throw ServiceError.
///
/// Each session has one writer at a time. Readers work on an immutable
/// snapshot and never wait for an edit to finish verifying.
class SessionManager {
public:
    struct Options {
        /// When set, every change writes `<dir>/<session>.deriv`.
        std::optional<std::filesystem::path> export_dir;
    };

    SessionManager() = default;
    explicit SessionManager(Options o) : opts_(std::move(o)) {}

    /// {"system": id} or {"document": text}. Returns the full state.
    Json create(const Json& body);
    void close(const std::string& id);

    /// Applies one edit; returns the delta for the affected nodes.
    Json post_edit(const std::string& id, const Json& command);
    Json undo(const std::string& id);
    Json redo(const std::string& id);

    Json state(const std::string& id) const;
    Json rules(const std::string& id, const std::string& query, const std::optional<std::string>& category) const;
    /// Documentation for a node's rule (bound to the node's terms, with error
    /// cross-links) or for a bare rule name. Selecting a node records it as
    /// the session's selection.
    Json doc_for(const std::string& id, const std::optional<std::string>& node, const std::optional<std::string>& rule);
    std::string export_text(const std::string& id) const;

    /// Stateless check of term or judgment text for the editor's input boxes:
    /// {"kind": "expr"|"type"|"prop"|"typectx"|"propctx"|"judgment", "text": ..., "system"?: id}.
    static Json parse_check(const Json& body);

    std::size_t session_count() const;

private:
    struct Snapshot {
        DerivationDoc doc;
        VerificationReport report;
    };
    using SnapPtr = std::shared_ptr<const Snapshot>;

    struct Session {
        std::string id;
        std::mutex write;  // one edit at a time
        mutable std::mutex read;
        SnapPtr current;
        std::vector<SnapPtr> undo;
        std::vector<SnapPtr> redo;
        std::optional<NodeId> selected;

        SnapPtr snapshot() const;
    };

    std::shared_ptr<Session> find(const std::string& id) const;
    std::string fresh_id();
    void write_through(const Session& s, const Snapshot& snap) const;

    Json full_state(const Session& s, const Snapshot& snap) const;
    Json delta(const Session& s, const Snapshot& before, const Snapshot& after, const std::set<NodeId>& changed,
               const std::vector<NodeId>& removed) const;

    Options opts_;
    mutable std::shared_mutex mu_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::uint64_t counter_ = 0;
};

/// Node entry used by the session protocol: the report fields plus child ids.
Json session_node_json(const DerivationDoc& doc, const DerivNode& n, const NodeStatus& st, bool silent);

Json rule_doc_json(const RuleDoc& d);

}  // namespace deriver
