#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bigmas/json.hpp"

namespace bigmas {

/// Text-extraction helpers shared by the instruction parser and the design
/// parser. Model output is free text; these pull structured documents out
/// of it without ever throwing.

std::string trim_copy(const std::string& s);
std::string to_lower_copy(const std::string& s);

/// Contents of all closed ``` fenced blocks, in order of appearance.
/// An optional language tag after the opening fence is skipped.
std::vector<std::string> fenced_blocks(const std::string& text);

/// Every balanced {...} span in the text, in order of opening brace.
/// Brace matching is string-literal aware so payload text containing
/// braces does not derail the scan. Nested objects are reported too.
std::vector<std::string> balanced_objects(const std::string& text);

/// Last balanced object that parses as JSON and contains `key`.
std::optional<Json> last_object_with_key(const std::string& text, const std::string& key);

/// Strict parse of the whole (trimmed) text as a JSON object.
std::optional<Json> parse_whole_object(const std::string& text);

/// True if `token` occurs in `text` delimited by non-identifier characters.
bool contains_whole_token(const std::string& text, const std::string& token);

/// Byte offset of the last such occurrence, or nullopt.
std::optional<std::size_t> last_whole_token_pos(const std::string& text,
                                                const std::string& token);

} // namespace bigmas
