#pragma once

#include <compare>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "skillproof/abstract_value.hpp"

namespace skillproof {

/// Which abstract domain a kind's argument lives in.
enum class ArgDomain { kHost, kPath, kOpaque };

class Vocabulary;

/// One member of the capability vocabulary. Only a Vocabulary can mint one,
/// so holding a CapabilityKind proves the token was validated.
class CapabilityKind {
 public:
  const std::string& token() const { return token_; }
  auto operator<=>(const CapabilityKind&) const = default;
  bool operator==(const CapabilityKind&) const = default;

 private:
  friend class Vocabulary;
  explicit CapabilityKind(std::string token) : token_(std::move(token)) {}
  std::string token_;
};

// The capability table. The standard table is closed; deployments can build
// an extended one, but every extra kind also needs rule-pack coverage or the
// scanner treats it as unanalyzable.
class Vocabulary {
 public:
  struct Entry {
    std::string token;
    ArgDomain domain;
    std::string envelope_key;  // args key the dispatcher checks
  };

  explicit Vocabulary(std::vector<Entry> entries);

  static const Vocabulary& standard();

  /// Throws Error(kUnknownKind).
  CapabilityKind kind(std::string_view token) const;
  bool contains(std::string_view token) const;
  const Entry& entry(const CapabilityKind& kind) const;
  /// All kinds, sorted by token.
  std::vector<CapabilityKind> kinds() const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<Entry> entries_;  // sorted by token
};

/// A declared capability: a kind plus an optional argument pattern. A
/// missing pattern is Top for that kind.
struct CapabilityToken {
  CapabilityKind kind;
  AbstractValue arg;  // Top when the token is bare

  /// Canonical text: "kind" or "kind(pattern)".
  std::string to_string() const;
  auto operator<=>(const CapabilityToken&) const = default;
  bool operator==(const CapabilityToken&) const = default;
};

/// Grammar: kind | kind(arg). Exactly zero or one argument. Throws
/// Error(kUnknownKind) or Error(kMalformedPattern).
CapabilityToken parse_capability_token(std::string_view text,
                                       const Vocabulary& vocab = Vocabulary::standard());

/// Parses `text` into the abstract domain used for `kind`'s arguments.
AbstractValue parse_arg_value(const CapabilityKind& kind, std::string_view text,
                              const Vocabulary& vocab = Vocabulary::standard());

/// Distinct kinds appearing in `tokens`, sorted.
std::vector<CapabilityKind> kinds_of(std::span<const CapabilityToken> tokens);

}  // namespace skillproof
