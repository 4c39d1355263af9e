#pragma once

#include <map>
#include <string>
#include <string_view>

#include "deriver/document.hpp"
#include "deriver/syntax.hpp"

namespace deriver {

/// Where a derivation line came from.
struct NodeSource {
    int line = 0;
    SrcSpan judgment;  // the judgment text
    SrcSpan rule;      // the text after `by`
    SpanTable spans;   // judgment-relative paths
};

struct ParsedDocument {
    DerivationDoc doc;
    std::map<NodeId, NodeSource> sources;
};

/// Parses the `.deriv` format. Throws ParseError (Syntax, Indent or
/// Invariant kind) with a span inside `text`.
ParsedDocument parse_document(std::string_view text);

/// Canonical text. Parsing it back yields an equal document up to node ids.
std::string print_document(const DerivationDoc& doc);

/// Parses the right-hand side of a `def`. The sort is inferred from the
/// text, trying the sorts that make sense for the system's judgment form.
Term parse_definition(JudgmentKind kind, std::string_view text, const ParseOptions& opts = {});

/// Parses `text` as the term expected at `path` of `j` (a hole judgment is
/// treated as one of kind `kind` with hole slots).
Term parse_at(const Judgment& j, JudgmentKind kind, const Path& path, std::string_view text);

}  // namespace deriver
