#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "deriver/rules.hpp"
#include "deriver/term.hpp"

namespace deriver {

using NodeId = std::uint64_t;

/// What justifies a node: a rule name, a reference to a named subtree, or
/// nothing yet.
struct RuleRef {
    enum class Kind : std::uint8_t { Hole, Rule, Subtree };
    Kind kind = Kind::Hole;
    std::string name;

    static RuleRef hole() { return {}; }
    static RuleRef rule(std::string n) { return {Kind::Rule, std::move(n)}; }
    static RuleRef subtree(std::string n) { return {Kind::Subtree, std::move(n)}; }
    bool is_hole() const { return kind == Kind::Hole; }

    friend bool operator==(const RuleRef&, const RuleRef&) = default;
};

struct DerivNode;
using NodePtr = std::shared_ptr<const DerivNode>;

struct DerivNode {
    NodeId id = 0;
    Judgment judgment;
    RuleRef applied;
    std::vector<NodePtr> children;
};

NodePtr make_node(NodeId id, Judgment j, RuleRef applied, std::vector<NodePtr> children = {});

struct AbbrevDef {
    std::string name;
    Term term;      // as written
    Term expanded;  // abbreviation-free
};

struct SubtreeDef {
    std::string name;
    NodePtr tree;
};

enum class Feedback : std::uint8_t { Full, Silent };

/// Prelude, named subtrees and the root derivation. Values are persistent:
/// edits build new documents that share unchanged nodes.
struct DerivationDoc {
    std::string system_id;
    Feedback feedback = Feedback::Full;
    std::vector<AbbrevDef> prelude;
    std::vector<SubtreeDef> subtrees;
    NodePtr root;
    NodeId next_id = 0;

    const RuleSystem& system() const;
};

class DocError : public std::runtime_error {
public:
    enum class Code {
        UnknownSystem, UnknownNode, BadPath, UnknownRule, UnknownSubtree, ForwardSubtreeRef, DuplicateName,
        SortMismatch, UnboundAbbrev, InvalidName, SubtreeRefHasChildren, DuplicateNodeId,
    };
    DocError(Code c, std::string msg) : std::runtime_error(std::move(msg)), code(c) {}
    Code code;
};

const char* error_code_name(DocError::Code c);

/// Fresh document: empty prelude and subtrees, root = `? by ?`.
DerivationDoc new_document(const std::string& system_id);

/// Replaces every Abbrev with its (pre-expanded) definition; an abbreviation
/// of a context inside `[...]` splices its entries.
Term expand_abbrevs(const DerivationDoc& doc, const Term& t);
Judgment expand_abbrevs(const DerivationDoc& doc, const Judgment& j);

/// Maps a path in the expanded judgment back to the displayed judgment,
/// stopping at the abbreviation the path enters.
Path display_path(const DerivationDoc& doc, const Judgment& shown, const Path& expanded_path);

const SubtreeDef& resolve_subtree(const DerivationDoc& doc, const std::string& name);
/// Index of a subtree definition, or nullopt.
std::optional<std::size_t> subtree_index(const DerivationDoc& doc, const std::string& name);

/// Which tree a node lives in and how to reach it.
struct NodeLocation {
    std::optional<std::size_t> subtree;  // nullopt = root tree
    std::vector<std::size_t> route;      // child indices from the tree root
    std::optional<NodeId> parent;
    const DerivNode* node = nullptr;
};

std::optional<NodeLocation> locate(const DerivationDoc& doc, NodeId id);
const DerivNode* find_node(const DerivationDoc& doc, NodeId id);

/// Human-facing node address: "root", "root.0.1", "S1.0".
std::string node_path(const DerivationDoc& doc, const NodeLocation& loc);
std::string node_path(const DerivationDoc& doc, NodeId id);
/// Inverse of node_path.
std::optional<NodeId> node_by_path(const DerivationDoc& doc, const std::string& path);

/// Preorder over every node: subtrees in definition order, then the root tree.
void for_each_node(const DerivationDoc& doc, const std::function<void(const DerivNode&)>& f);
void for_each_node(const NodePtr& tree, const std::function<void(const DerivNode&)>& f);
std::size_t node_count(const DerivationDoc& doc);

/// Sort-checks one judgment (before and after abbreviation expansion)
/// against the document's system. Throws DocError.
void check_judgment(const DerivationDoc& doc, const Judgment& j);

/// Checks every document invariant; throws DocError on the first violation.
void validate(const DerivationDoc& doc);

/// Structural equality ignoring node ids.
bool same_shape(const DerivationDoc& a, const DerivationDoc& b);
bool same_shape(const DerivNode& a, const DerivNode& b);

/// Deep copy with fresh ids drawn from `next_id`.
NodePtr clone_tree(const NodePtr& tree, NodeId& next_id);

}  // namespace deriver
