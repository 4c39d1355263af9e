#include "deriver/docfile.hpp"

#include <cctype>
#include <optional>
#include <sstream>

namespace deriver {

namespace {

int columns(std::string_view s) {
    int n = 0;
    for (unsigned char c : s)
        if ((c & 0xC0) != 0x80) ++n;
    return n;
}

struct Line {
    int number = 0;
    std::string text;  // comment and trailing space removed
    int indent = 0;
};

[[noreturn]] void fail_at(int line, int col, int end_col, std::vector<std::string> expected, std::string found,
                          std::string message, ParseError::Kind kind = ParseError::Kind::Syntax,
                          std::string invariant = {}) {
    throw ParseError({{line, col}, {line, std::max(end_col, col)}}, std::move(expected), std::move(found),
                     std::move(message), kind, std::move(invariant));
}

[[noreturn]] void invariant(const SrcSpan& span, const DocError& e) {
    throw ParseError(span, {"a well-formed document"}, "", e.what(), ParseError::Kind::Invariant,
                     error_code_name(e.code));
}

std::vector<Line> split_lines(std::string_view text) {
    std::vector<Line> out;
    int number = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        ++number;
        std::string raw(text.substr(start, end - start));
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        while (!raw.empty() && std::isspace(static_cast<unsigned char>(raw.back()))) raw.pop_back();
        if (!raw.empty()) {
            int indent = 0;
            while (indent < static_cast<int>(raw.size()) && (raw[indent] == ' ' || raw[indent] == '\t')) {
                if (raw[indent] == '\t')
                    fail_at(number, indent + 1, indent + 2, {"spaces"}, "a tab", "indent with spaces, not tabs",
                            ParseError::Kind::Indent);
                ++indent;
            }
            out.push_back({number, raw, indent});
        }
        if (end == text.size()) break;
        start = end + 1;
    }
    return out;
}

// A whitespace-delimited word starting at byte `i` of `s`.
std::string_view word_at(std::string_view s, std::size_t& i) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    std::string_view w = s.substr(i, j - i);
    i = j;
    return w;
}

struct Builder {
    NodeId id = 0;
    Judgment judgment;
    RuleRef applied;
    std::vector<Builder> kids;
};

NodePtr freeze(const Builder& b) {
    std::vector<NodePtr> kids;
    for (const auto& k : b.kids) kids.push_back(freeze(k));
    return make_node(b.id, b.judgment, b.applied, std::move(kids));
}

class DocParser {
public:
    explicit DocParser(std::string_view text) : lines_(split_lines(text)) {}

    ParsedDocument run() {
        header();
        bool derive_seen = false;
        while (i_ < lines_.size()) {
            const Line& l = lines_[i_];
            if (l.indent != 0)
                fail_at(l.number, 1, l.indent + 1, {"a top-level line"}, "indentation",
                        "this line is indented but belongs to no block", ParseError::Kind::Indent);
            std::size_t pos = 0;
            std::string_view head = word_at(l.text, pos);
            if (head == "def") {
                definition(l);
                ++i_;
            } else if (head == "subtree") {
                std::string_view rest = std::string_view(l.text).substr(pos);
                std::size_t k = 0;
                std::string name(word_at(rest, k));
                if (name.ends_with(':')) name.pop_back();
                int col = columns(std::string_view(l.text).substr(0, pos)) + 2;
                if (!is_identifier(name) || name == "root" || l.text.back() != ':')
                    fail_at(l.number, col, columns(l.text) + 1, {"'subtree <name>:'"}, std::string(rest),
                            "expected 'subtree <name>:'");
                if (subtree_index(out_.doc, name))
                    invariant({{l.number, col}, {l.number, col + columns(name)}},
                              DocError(DocError::Code::DuplicateName, "subtree " + name + " is defined twice"));
                ++i_;
                NodePtr tree = block(l);
                out_.doc.subtrees.push_back({name, tree});
            } else if (head == "derive:") {
                if (derive_seen) fail_at(l.number, 1, 8, {"a single 'derive:' block"}, "derive:", "duplicate 'derive:' block");
                derive_seen = true;
                ++i_;
                out_.doc.root = block(l);
            } else if (head == "system" || head == "feedback") {
                fail_at(l.number, 1, columns(head) + 1, {"'def'", "'subtree'", "'derive:'"}, std::string(head),
                        std::string(head) + " must come before definitions and derivations");
            } else {
                fail_at(l.number, 1, columns(head) + 1, {"'def'", "'subtree'", "'derive:'"}, std::string(head),
                        "unexpected '" + std::string(head) + "'");
            }
        }
        if (!derive_seen) {
            int line = lines_.empty() ? 1 : lines_.back().number;
            int col = lines_.empty() ? 1 : columns(lines_.back().text) + 1;
            fail_at(line, col, col, {"'derive:'"}, "end of input", "missing 'derive:' block");
        }
        out_.doc.next_id = next_id_;
        check();
        return std::move(out_);
    }

private:
    void header() {
        if (lines_.empty()) fail_at(1, 1, 1, {"'system <id>'"}, "end of input", "empty document");
        const Line& l = lines_[0];
        std::size_t pos = 0;
        std::string_view head = word_at(l.text, pos);
        if (head != "system" || l.indent != 0)
            fail_at(l.number, l.indent + 1, l.indent + 1 + columns(head), {"'system <id>'"}, std::string(head),
                    "a document starts with 'system <id>'");
        std::size_t id_start = pos;
        std::string_view id = word_at(l.text, pos);
        while (id_start < l.text.size() && l.text[id_start] == ' ') ++id_start;
        int col = columns(std::string_view(l.text).substr(0, id_start)) + 1;
        if (id.empty()) fail_at(l.number, col, col, {"a system name"}, "end of line", "missing system name");
        std::size_t after = pos;
        if (!word_at(l.text, after).empty())
            fail_at(l.number, col + columns(id), columns(l.text) + 1, {"end of line"}, std::string(l.text.substr(pos)),
                    "unexpected text after the system name");
        if (!find_system(std::string(id)))
            invariant({{l.number, col}, {l.number, col + columns(id)}},
                      DocError(DocError::Code::UnknownSystem, "unknown rule system '" + std::string(id) + "'"));
        out_.doc.system_id = std::string(id);
        kind_ = find_system(out_.doc.system_id)->judgment_kind();
        i_ = 1;
        if (i_ < lines_.size()) {
            const Line& f = lines_[i_];
            std::size_t p = 0;
            if (f.indent == 0 && word_at(f.text, p) == "feedback") {
                std::size_t vstart = p;
                std::string_view v = word_at(f.text, p);
                while (vstart < f.text.size() && f.text[vstart] == ' ') ++vstart;
                int vcol = columns(std::string_view(f.text).substr(0, vstart)) + 1;
                std::size_t after2 = p;
                if ((v != "silent" && v != "full") || !word_at(f.text, after2).empty())
                    fail_at(f.number, vcol, columns(f.text) + 1, {"'silent'", "'full'"}, std::string(v),
                            "feedback is 'silent' or 'full'");
                out_.doc.feedback = v == "silent" ? Feedback::Silent : Feedback::Full;
                ++i_;
            }
        }
    }

    void definition(const Line& l) {
        std::string_view s = l.text;
        std::size_t pos = 3;
        std::size_t name_start = pos;
        while (name_start < s.size() && s[name_start] == ' ') ++name_start;
        std::string_view name = word_at(s, pos);
        if (auto eq = name.find('='); eq != std::string_view::npos) {
            name = name.substr(0, eq);
            pos = name_start + eq;
        }
        int col = columns(s.substr(0, name_start)) + 1;
        if (!is_identifier(name))
            fail_at(l.number, col, col + std::max(1, columns(name)), {"an abbreviation name"}, std::string(name),
                    "expected an abbreviation name after 'def'");
        while (pos < s.size() && s[pos] == ' ') ++pos;
        if (pos >= s.size() || s[pos] != '=') {
            int c = columns(s.substr(0, pos)) + 1;
            fail_at(l.number, c, c + 1, {"'='"}, pos < s.size() ? std::string(1, s[pos]) : "end of line",
                    "expected '=' after the abbreviation name");
        }
        ++pos;
        ParseOptions opts;
        opts.origin = {l.number, columns(s.substr(0, pos)) + 1};
        Term t = parse_definition(kind_, s.substr(pos), opts);
        SrcSpan span{{l.number, col}, {l.number, col + columns(name)}};
        std::string n(name);
        for (const auto& d : out_.doc.prelude)
            if (d.name == n) invariant(span, DocError(DocError::Code::DuplicateName, "$" + n + " is defined twice"));
        try {
            Term e = expand_abbrevs(out_.doc, t);
            out_.doc.prelude.push_back({n, t, e});
        } catch (const DocError& e) {
            invariant({{l.number, opts.origin.col}, {l.number, columns(s) + 1}}, e);
        }
    }

    // Reads the indented lines under `head` into one tree.
    NodePtr block(const Line& head) {
        std::vector<std::pair<int, Builder*>> stack;
        std::optional<Builder> root;
        while (i_ < lines_.size() && lines_[i_].indent > 0) {
            const Line& l = lines_[i_];
            if (l.indent % 2 != 0)
                fail_at(l.number, 1, l.indent + 1, {"a multiple of 2 spaces"}, std::to_string(l.indent) + " spaces",
                        "indentation must be a multiple of 2 spaces", ParseError::Kind::Indent);
            int depth = l.indent / 2 - 1;
            if (!root) {
                if (depth != 0)
                    fail_at(l.number, 1, l.indent + 1, {"2 spaces"}, std::to_string(l.indent) + " spaces",
                            "the first line of a block is indented by 2 spaces", ParseError::Kind::Indent);
                root = line(l);
                stack = {{0, &*root}};
            } else {
                if (depth == 0)
                    fail_at(l.number, 1, l.indent + 1, {"deeper indentation"}, "2 spaces",
                            "a block holds a single derivation tree", ParseError::Kind::Indent);
                while (!stack.empty() && stack.back().first >= depth) stack.pop_back();
                if (stack.empty() || stack.back().first != depth - 1)
                    fail_at(l.number, 1, l.indent + 1, {std::to_string((stack.back().first + 2) * 2) + " spaces or less"},
                            std::to_string(l.indent) + " spaces", "indentation jumps more than one level",
                            ParseError::Kind::Indent);
                Builder* parent = stack.back().second;
                if (parent->applied.kind == RuleRef::Kind::Subtree)
                    invariant({{l.number, l.indent + 1}, {l.number, columns(l.text) + 1}},
                              DocError(DocError::Code::SubtreeRefHasChildren, "a subtree reference cannot have premises"));
                parent->kids.push_back(line(l));
                stack.emplace_back(depth, &parent->kids.back());
            }
            ++i_;
        }
        if (!root) {
            int col = columns(head.text) + 1;
            fail_at(head.number, col, col, {"an indented derivation line"}, "end of block", "empty derivation block");
        }
        return freeze(*root);
    }

    Builder line(const Line& l) {
        std::string_view s = std::string_view(l.text).substr(static_cast<std::size_t>(l.indent));
        NodeSource src;
        src.line = l.number;
        ParseOptions opts;
        opts.origin = {l.number, l.indent + 1};
        opts.spans = &src.spans;
        auto [j, stop] = parse_judgment_prefix(s, kind_, opts);
        int jcol_end = l.indent + 1 + columns(s.substr(0, stop));
        // trim trailing spaces from the judgment span
        std::string_view jtext = s.substr(0, stop);
        while (!jtext.empty() && jtext.back() == ' ') jtext.remove_suffix(1);
        src.judgment = {{l.number, l.indent + 1}, {l.number, l.indent + 1 + columns(jtext)}};
        std::size_t pos = stop;
        std::string_view by = word_at(s, pos);
        if (by != "by")
            fail_at(l.number, jcol_end, jcol_end, {"'by'"}, by.empty() ? "end of line" : std::string(by),
                    "expected 'by' and a rule");
        std::size_t rule_start = pos;
        while (rule_start < s.size() && s[rule_start] == ' ') ++rule_start;
        int rcol = l.indent + 1 + columns(s.substr(0, rule_start));
        std::string_view rule = word_at(s, pos);
        Builder b;
        b.id = next_id_++;
        b.judgment = j;
        if (rule.empty()) {
            fail_at(l.number, rcol, rcol, {"a rule name", "'?'", "'use'"}, "end of line", "expected a rule after 'by'");
        } else if (rule == "?") {
            b.applied = RuleRef::hole();
        } else if (rule == "use") {
            std::size_t name_start = pos;
            while (name_start < s.size() && s[name_start] == ' ') ++name_start;
            int ncol = l.indent + 1 + columns(s.substr(0, name_start));
            std::string_view name = word_at(s, pos);
            if (!is_identifier(name))
                fail_at(l.number, ncol, ncol + std::max(1, columns(name)), {"a subtree name"},
                        name.empty() ? "end of line" : std::string(name), "expected a subtree name after 'use'");
            std::string n(name);
            SrcSpan span{{l.number, ncol}, {l.number, ncol + columns(name)}};
            if (!subtree_index(out_.doc, n)) {
                if (defined_later(n))
                    invariant(span, DocError(DocError::Code::ForwardSubtreeRef,
                                             "subtree " + n + " is used before its definition"));
                invariant(span, DocError(DocError::Code::UnknownSubtree, "no subtree named " + n));
            }
            b.applied = RuleRef::subtree(n);
        } else {
            b.applied = RuleRef::rule(std::string(rule));
        }
        std::size_t after = pos;
        std::string_view extra = word_at(s, after);
        if (!extra.empty()) {
            int c = l.indent + 1 + columns(s.substr(0, after - extra.size()));
            fail_at(l.number, c, c + columns(extra), {"end of line"}, std::string(extra), "unexpected text after the rule");
        }
        src.rule = {{l.number, rcol}, {l.number, l.indent + 1 + columns(s.substr(0, pos))}};
        out_.sources[b.id] = std::move(src);
        return b;
    }

    bool defined_later(const std::string& name) const {
        for (std::size_t k = i_ + 1; k < lines_.size(); ++k) {
            const Line& l = lines_[k];
            if (l.indent != 0) continue;
            std::size_t p = 0;
            if (word_at(l.text, p) != "subtree") continue;
            std::string n(word_at(l.text, p));
            if (n.ends_with(':')) n.pop_back();
            if (n == name) return true;
        }
        return false;
    }

    void check() {
        for (const auto& [id, src] : out_.sources) {
            const DerivNode* n = find_node(out_.doc, id);
            try {
                check_judgment(out_.doc, n->judgment);
            } catch (const DocError& e) {
                invariant(src.judgment, e);
            }
        }
        try {
            validate(out_.doc);
        } catch (const DocError& e) {
            invariant({{1, 1}, {1, 1}}, e);
        }
    }

    std::vector<Line> lines_;
    std::size_t i_ = 0;
    JudgmentKind kind_ = JudgmentKind::Hole;
    NodeId next_id_ = 0;
    ParsedDocument out_;
};

void print_tree(std::ostringstream& os, const DerivNode& n, int depth) {
    os << std::string(static_cast<std::size_t>(depth) * 2 + 2, ' ');
    std::string j = print_judgment(n.judgment);
    os << j << (n.judgment.is_hole() ? " by " : "  by ");
    switch (n.applied.kind) {
    case RuleRef::Kind::Hole: os << "?"; break;
    case RuleRef::Kind::Rule: os << n.applied.name; break;
    case RuleRef::Kind::Subtree: os << "use " << n.applied.name; break;
    }
    os << "\n";
    for (const auto& c : n.children) print_tree(os, *c, depth + 1);
}

}  // namespace

ParsedDocument parse_document(std::string_view text) { return DocParser(text).run(); }

std::string print_document(const DerivationDoc& doc) {
    std::ostringstream os;
    os << "system " << doc.system_id << "\n";
    if (doc.feedback == Feedback::Silent) os << "feedback silent\n";
    for (const auto& d : doc.prelude) os << "def " << d.name << " = " << print_term(d.term) << "\n";
    for (const auto& s : doc.subtrees) {
        os << "subtree " << s.name << ":\n";
        print_tree(os, *s.tree, 0);
    }
    os << "derive:\n";
    print_tree(os, *doc.root, 0);
    return os.str();
}

Term parse_definition(JudgmentKind kind, std::string_view text, const ParseOptions& opts) {
    std::vector<Sort> order;
    switch (kind) {
    case JudgmentKind::Typing: order = {Sort::TypeCtx, Sort::Type, Sort::Expr, Sort::TypeEntry}; break;
    case JudgmentKind::Entail: order = {Sort::PropCtx, Sort::Prop}; break;
    default: order = {Sort::Expr}; break;
    }
    std::optional<ParseError> best;
    for (Sort s : order) {
        try {
            return parse_term(s, text, opts);
        } catch (const ParseError& e) {
            if (!best || best->span.start < e.span.start) best = e;
        }
    }
    throw *best;
}

Term parse_at(const Judgment& j, JudgmentKind kind, const Path& path, std::string_view text) {
    Judgment base = j.is_hole() ? Judgment::holes_of(kind) : j;
    Sort s = sort_at(base, path);
    return parse_term(s, text);
}

}  // namespace deriver
