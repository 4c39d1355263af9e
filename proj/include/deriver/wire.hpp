#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "deriver/edit.hpp"
#include "deriver/report.hpp"

namespace deriver {

/// A malformed request body. `code` is the protocol error code.
class WireError : public std::runtime_error {
public:
    WireError(std::string code, std::string msg) : std::runtime_error(std::move(msg)), code(std::move(code)) {}
    std::string code;
};

/// Accepts an opaque id ("n4") or a node path ("root.0", "S1").
NodeId resolve_node_ref(const DerivationDoc& doc, const std::string& ref);

/// Decodes {"op": "FillHole", "node": "n0", "path": [0], "term": "1 + 2"} and
/// friends. Term text is parsed at the sort the target position expects.
/// Throws WireError, ParseError or DocError.
EditCommand command_from_json(const Json& j, const DerivationDoc& doc);
Json command_to_json(const EditCommand& c);

Json span_json(const SrcSpan& s);
/// {error, message, span?} bodies.
Json error_body(const std::string& code, const std::string& message, const std::optional<SrcSpan>& span = std::nullopt);
Json parse_error_body(const ParseError& e);

}  // namespace deriver
