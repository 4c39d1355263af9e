#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "deriver/document.hpp"
#include "deriver/rules.hpp"

namespace deriver {

enum class TreeStatus : std::uint8_t { CompleteCorrect, Incomplete, HasErrors };
const char* tree_status_name(TreeStatus s);

struct VerifyError {
    NodeId node = 0;
    Locus locus;
    Path path;  // within the displayed judgment of `locus`
    std::string expected;
    std::string found;
    std::string message;
    std::string code;  // Mismatch, Conflict, Arity, UnknownRule, SideCondition, ...
    // Cross-link into the rule schema, when the error concerns a schema position.
    std::optional<std::string> metavar;
    std::optional<Path> schema_path;

    friend bool operator==(const VerifyError&, const VerifyError&) = default;
};

struct Obligation {
    NodeId node = 0;
    Locus locus;
    std::vector<Path> holes;
    std::string statement;

    friend bool operator==(const Obligation&, const Obligation&) = default;
};

struct NodeStatus {
    enum class Kind : std::uint8_t { Correct, Incorrect, Indeterminate };
    Kind kind = Kind::Indeterminate;
    Bindings bindings;  // complete for Correct, partial otherwise
    std::vector<VerifyError> errors;
    std::vector<Obligation> obligations;

    bool correct() const { return kind == Kind::Correct; }
    bool incorrect() const { return kind == Kind::Incorrect; }
    bool indeterminate() const { return kind == Kind::Indeterminate; }

    friend bool operator==(const NodeStatus&, const NodeStatus&) = default;
};

const char* status_name(NodeStatus::Kind k);

struct SubtreeInfo {
    Judgment root;  // expanded
    TreeStatus status = TreeStatus::Incomplete;
};

/// Everything verify_node may consult besides the node itself.
struct VerifyEnv {
    const RuleSystem* system = nullptr;
    std::function<Judgment(const Judgment&)> expand;
    std::function<std::optional<SubtreeInfo>(const std::string&)> subtree;
    /// Maps a path in an expanded judgment to the displayed one. Optional.
    std::function<Path(const Judgment&, const Path&)> display;
};

NodeStatus verify_node(const DerivNode& node, const VerifyEnv& env);

struct VerificationReport {
    std::map<NodeId, NodeStatus> nodes;
    TreeStatus tree_status = TreeStatus::Incomplete;
    TreeStatus root_status = TreeStatus::Incomplete;
    std::map<std::string, TreeStatus> subtrees;

    friend bool operator==(const VerificationReport&, const VerificationReport&) = default;
};

/// Subtrees in definition order, then the root tree.
VerificationReport verify_document(const DerivationDoc& doc);

/// Re-verifies exactly `affected` and reuses `previous` for every other node
/// still present in `doc`.
VerificationReport reverify(const DerivationDoc& doc, const VerificationReport& previous,
                            const std::set<NodeId>& affected);

TreeStatus fold_tree_status(const NodePtr& tree, const std::map<NodeId, NodeStatus>& statuses);

/// Environment that resolves abbreviations and subtrees against `doc`, with
/// subtree health read from `subtrees`.
VerifyEnv document_env(const DerivationDoc& doc, const std::map<std::string, TreeStatus>& subtrees);

}  // namespace deriver
