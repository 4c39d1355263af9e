#pragma once

#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "deriver/docfile.hpp"
#include "deriver/verifier.hpp"

namespace deriver {

using Json = nlohmann::ordered_json;

/// Opaque protocol id of a node ("n12").
std::string wire_id(NodeId id);
std::optional<NodeId> parse_wire_id(const std::string& s);

/// "E-Plus", "?" or "use S1", as in the file format.
std::string rule_ref_text(const RuleRef& r);

Json locus_json(const Locus& l);
Json path_json(const Path& p);

struct JsonOptions {
    /// Withhold Incorrect details: such nodes read "unresolved" and carry no
    /// errors, expected/found payloads or bindings.
    bool silent = false;
    const std::map<NodeId, NodeSource>* sources = nullptr;
};

/// Status name as shown to clients, honoring silent mode.
std::string visible_status(const NodeStatus& st, bool silent);
std::string visible_tree_status(TreeStatus s, bool silent);

Json error_json(const VerifyError& e, const DerivationDoc& doc, const JsonOptions& opts = {});
Json node_json(const DerivationDoc& doc, const DerivNode& n, const NodeStatus& st, const JsonOptions& opts = {});

/// Whole-document report. `nodes` is keyed by node path in document order.
Json report_json(const DerivationDoc& doc, const VerificationReport& r, const JsonOptions& opts = {});

/// Source position of an error, when the node came from a parsed file.
std::optional<SrcPos> error_position(const DerivationDoc& doc, const std::map<NodeId, NodeSource>& sources,
                                     const VerifyError& e);

/// "CompleteCorrect (3 nodes)", "HasErrors (5 nodes, 2 errors)", ...
std::string summary_line(const DerivationDoc& doc, const VerificationReport& r);

/// One `file:line:col: [node] message` line per error in document order,
/// then the summary line prefixed by the file name.
std::string human_report(const std::string& file, const ParsedDocument& parsed, const VerificationReport& r,
                         bool color);

}  // namespace deriver
