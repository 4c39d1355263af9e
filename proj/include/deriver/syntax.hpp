#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "deriver/term.hpp"

namespace deriver {

/// 1-based line/column.
struct SrcPos {
    int line = 1;
    int col = 1;
    friend bool operator==(const SrcPos&, const SrcPos&) = default;
    friend auto operator<=>(const SrcPos&, const SrcPos&) = default;
};

/// End-exclusive source range.
struct SrcSpan {
    SrcPos start;
    SrcPos end;
    friend bool operator==(const SrcSpan&, const SrcSpan&) = default;
};

class ParseError : public std::runtime_error {
public:
    enum class Kind { Syntax, Indent, Invariant };

    ParseError(SrcSpan span, std::vector<std::string> expected, std::string found, std::string message,
               Kind kind = Kind::Syntax, std::string invariant = {})
        : std::runtime_error(std::move(message)),
          span(span),
          expected(std::move(expected)),
          found(std::move(found)),
          kind(kind),
          invariant(std::move(invariant)) {}

    SrcSpan span;
    std::vector<std::string> expected;
    std::string found;
    Kind kind;
    std::string invariant;  // for Kind::Invariant, e.g. "ForwardSubtreeRef"
};

/// Source spans of the subterms of one parsed judgment, keyed by Path.
using SpanTable = std::map<Path, SrcSpan>;

struct ParseOptions {
    /// Identifiers in this set parse as MetaRef (rule schemas only). A
    /// metavariable standing alone as a context entry denotes a splice.
    const std::set<std::string>* metas = nullptr;
    /// Position of the first character of the text.
    SrcPos origin{};
    /// Filled with judgment-relative spans when non-null.
    SpanTable* spans = nullptr;
};

/// Parses `text` as a term of `sort`. Contexts must be asked for by flavor
/// (TypeCtx or PropCtx).
Term parse_term(Sort sort, std::string_view text, const ParseOptions& opts = {});

/// Parses a judgment. When `kind` is absent the form is inferred.
Judgment parse_judgment(std::string_view text, std::optional<JudgmentKind> kind = std::nullopt,
                        const ParseOptions& opts = {});

/// Parses a judgment that is followed by more text. Returns the judgment and
/// the byte offset at which parsing stopped (start of the first unconsumed
/// token, or text.size()).
std::pair<Judgment, std::size_t> parse_judgment_prefix(std::string_view text, std::optional<JudgmentKind> kind,
                                                       const ParseOptions& opts = {});

/// Receives printed output piecewise. `at` is the path of the innermost term
/// (relative to the printed root) that produced the piece.
class PrintSink {
public:
    virtual ~PrintSink() = default;
    virtual void text(std::string_view s, const Path& at) = 0;
    virtual void meta(const std::string& name, const Path& at) = 0;
};

std::string print_term(const Term& t);
std::string print_judgment(const Judgment& j);
void print_term(const Term& t, PrintSink& sink);
void print_judgment(const Judgment& j, PrintSink& sink);

bool is_identifier(std::string_view s);
bool is_keyword(std::string_view s);

}  // namespace deriver
