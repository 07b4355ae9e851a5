#pragma once

// Canonical JSON: sorted keys (code point order), no whitespace, minimal
// base-10 integers, no floats, minimal string escaping with \u00xx for
// control characters. The SHA-256 of these bytes is a document's identity.

#include <string>
#include <string_view>

#include <json.hpp>

namespace skillproof {

using Json = nlohmann::json;

/// Serializes `value` canonically. Throws Error(kNonCanonicalizable) on
/// floating-point numbers, discarded values, binary values or strings that
/// are not valid UTF-8.
std::string canonicalize(const Json& value);

/// Parses arbitrary JSON text. Throws Error(kNonCanonicalizable) on syntax
/// errors. Floats are preserved so canonicalize() can reject them.
Json parse_json(std::string_view text);

/// Lowercase hex SHA-256 of canonicalize(value).
std::string canonical_hash(const Json& value);

bool is_valid_utf8(std::string_view bytes);

}  // namespace skillproof
