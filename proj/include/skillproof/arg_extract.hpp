#pragma once

// Turns the text at a matched call site into argument summaries: call
// argument splitting, string-literal and template parsing, shell words.

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "skillproof/abstract_value.hpp"
#include "skillproof/source_lexer.hpp"

namespace skillproof {

/// A string whose value is known up to holes (interpolations, variables,
/// globs). A template without holes is a plain literal.
struct StrTemplate {
  struct Segment {
    bool hole = false;
    std::string text;
    bool operator==(const Segment&) const = default;
  };
  std::vector<Segment> segments;

  bool has_holes() const;
  /// Concatenated literal text; only meaningful when !has_holes().
  std::string literal() const;
  /// Literal text before the first hole.
  std::string literal_prefix() const;
  void append_literal(std::string_view s);
  void append_hole();
  bool operator==(const StrTemplate&) const = default;
};

struct CallArg {
  std::optional<std::string> keyword;  // Python keyword argument name
  std::string text;                    // argument expression (stripped view)
};

/// Splits the arguments of a call whose '(' ends just before `pos`. Structure
/// is read from `masked` and text from `stripped`.
std::vector<CallArg> split_call_args(const std::string& stripped, const std::string& masked,
                                     std::size_t pos, Language lang);

/// Picks the argument named `keyword`, else the `index`-th positional one.
std::optional<std::string> select_arg(const std::vector<CallArg>& args, int index,
                                      std::string_view keyword);

/// Summarizes a string-valued expression: literals, f-strings/templates,
/// '+' concatenation, .format() and %-formatting. Returns nullopt when the
/// expression has no string-literal part at all.
std::optional<StrTemplate> string_expression(std::string_view expr, Language lang);

/// Elements of a list/tuple literal ("[...]" or "(...)"), each summarized
/// by string_expression. nullopt when `expr` is not a list literal.
std::optional<std::vector<std::optional<StrTemplate>>> list_expression(std::string_view expr,
                                                                      Language lang);

/// Shell words from `pos` to the end of the simple command (newline, ';',
/// '&', '|', ')' or a redirection operator).
std::vector<StrTemplate> shell_words(std::string_view stripped, std::size_t pos);

/// Splits a command-line template on literal whitespace.
std::vector<StrTemplate> split_command_line(const StrTemplate& command);

AbstractValue template_to_path(const StrTemplate& t);
AbstractValue template_to_host(const StrTemplate& t);
AbstractValue template_to_opaque(const StrTemplate& t);

}  // namespace skillproof
