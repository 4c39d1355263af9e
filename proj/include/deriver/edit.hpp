#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "deriver/document.hpp"
#include "deriver/verifier.hpp"

namespace deriver {

namespace cmd {

struct SetRule { NodeId node; std::string rule; };
struct ClearRule { NodeId node; };
/// Inserts a JHole premise at `position` (appends when absent).
struct AddPremise { NodeId node; std::optional<std::size_t> position; };
struct RemovePremise { NodeId node; std::size_t position; };
struct EditJudgment { NodeId node; Path path; Term term; };
struct SetJudgment { NodeId node; Judgment judgment; };
struct FillHole { NodeId node; Path path; Term term; };
/// An empty path turns the whole judgment into a hole.
struct MakeHole { NodeId node; Path path; };
struct DefineAbbrev { std::string name; Term term; };
/// New subtree whose tree is a JHole, or a copy of the tree under `from`.
struct DefineSubtree { std::string name; std::optional<NodeId> from; };
struct InsertSubtreeRef { NodeId node; std::string subtree; };
struct SetFeedback { Feedback feedback; };
/// Remove an unused definition. These exist so every edit has an inverse.
struct RemoveAbbrev { std::string name; };
struct RemoveSubtree { std::string name; };

}  // namespace cmd

using EditCommand = std::variant<cmd::SetRule, cmd::ClearRule, cmd::AddPremise, cmd::RemovePremise, cmd::EditJudgment,
                                 cmd::SetJudgment, cmd::FillHole, cmd::MakeHole, cmd::DefineAbbrev, cmd::DefineSubtree,
                                 cmd::InsertSubtreeRef, cmd::SetFeedback, cmd::RemoveAbbrev, cmd::RemoveSubtree>;

const char* command_name(const EditCommand& c);

struct EditResult {
    DerivationDoc doc;
    std::set<NodeId> affected;  // ids in `doc` whose status may have changed
};

/// Structural part of an edit. The result satisfies every document
/// invariant; otherwise DocError is thrown and nothing changes.
EditResult edit_document(const DerivationDoc& doc, const EditCommand& c);

/// Nodes that must be re-verified after `c` (ids in the edited document).
std::set<NodeId> affected_nodes(const DerivationDoc& doc, const EditCommand& c);

struct EditOutcome {
    DerivationDoc doc;
    VerificationReport report;
    std::map<NodeId, NodeStatus> delta;  // statuses of the affected nodes
    std::vector<NodeId> removed;         // ids that no longer exist
};

EditOutcome apply_edit(const DerivationDoc& doc, const EditCommand& c, const VerificationReport& current);
EditOutcome apply_edit(const DerivationDoc& doc, const EditCommand& c);

/// Commands that take the result of `c` on `doc` back to a document equal to
/// `doc` up to the ids of recreated nodes. Throws DocError when `doc`
/// contains a rule name that SetRule would reject.
std::vector<EditCommand> inverse_commands(const DerivationDoc& doc, const EditCommand& c);

}  // namespace deriver
