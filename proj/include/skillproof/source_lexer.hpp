#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace skillproof {

enum class Language { kPython, kShell, kNode };

std::string_view to_string(Language lang);
std::optional<Language> parse_language(std::string_view name);
/// ".py" -> python, ".sh"/".bash" -> shell, ".js"/".mjs"/".cjs"/".ts" -> node.
std::optional<Language> language_for_extension(std::string_view ext);
/// Maps a "#!" line to a language, if it names a known interpreter.
std::optional<Language> language_for_shebang(std::string_view first_line);

// Two byte-aligned views of a source file. Blanked bytes become ' ' and
// newlines always survive, so offsets and line numbers agree with the input.
struct LexedSource {
  std::string stripped;  // comments blanked, string literals intact
  std::string masked;    // additionally, literal string text blanked; quote
                         // characters and interpolated code are kept
};

LexedSource lex_source(std::string_view source, Language lang);

}  // namespace skillproof
