#pragma once

// Abstract argument domain for capability effects. Every alternative is a
// summary of a set of concrete values; value_leq is set inclusion.

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace skillproof {

struct Bottom {
  auto operator<=>(const Bottom&) const = default;
};

struct Top {
  auto operator<=>(const Top&) const = default;
};

/// A literal host ("api.example.com") or a DNS-suffix wildcard
/// ("*.example.com", matching one or more leading labels).
struct HostGlob {
  std::string pattern;
  bool is_wildcard() const { return pattern.starts_with("*."); }
  auto operator<=>(const HostGlob&) const = default;
};

/// A normalized path. Ending in '/' means "everything beneath"; otherwise it
/// names a single file. Relative paths are rooted at "./".
struct PathPrefix {
  std::string prefix;
  bool is_directory() const { return prefix.ends_with('/'); }
  /// True when the normalized path climbs above its root ("./../x").
  bool escapes_root() const;
  auto operator<=>(const PathPrefix&) const = default;
};

struct IntInterval {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  auto operator<=>(const IntInterval&) const = default;
};

struct Opaque {
  std::string literal;
  auto operator<=>(const Opaque&) const = default;
};

class AbstractValue {
 public:
  using Variant = std::variant<Bottom, HostGlob, PathPrefix, IntInterval, Opaque, Top>;

  AbstractValue() : v_(Top{}) {}

  static AbstractValue bottom() { return AbstractValue(Bottom{}); }
  static AbstractValue top() { return AbstractValue(Top{}); }
  /// Throws Error(kMalformedPattern) unless `pattern` is a valid host or a
  /// single leading "*." wildcard over a valid host suffix.
  static AbstractValue host(std::string_view pattern);
  /// Normalizes `.` and `..` segments. Throws Error(kMalformedPattern) on an
  /// empty path.
  static AbstractValue path(std::string_view path);
  /// Throws Error(kMalformedPattern) when lo > hi.
  static AbstractValue interval(std::int64_t lo, std::int64_t hi);
  static AbstractValue opaque(std::string literal);

  const Variant& variant() const { return v_; }
  bool is_top() const { return std::holds_alternative<Top>(v_); }
  bool is_bottom() const { return std::holds_alternative<Bottom>(v_); }
  template <typename T>
  const T* get_if() const {
    return std::get_if<T>(&v_);
  }

  /// Short name of the variant: bottom, host, path, int, opaque, top.
  std::string_view type_name() const;
  /// Pattern text as it appears inside a capability token ("*" for top).
  std::string to_string() const;

  auto operator<=>(const AbstractValue&) const = default;
  bool operator==(const AbstractValue&) const = default;

 private:
  explicit AbstractValue(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

/// Partial order: true iff every concrete value described by `a` is described
/// by `b`. Cross-variant pairs are incomparable except against Top/Bottom.
bool value_leq(const AbstractValue& a, const AbstractValue& b);

/// Collapses `.`/`..` segments. Relative paths come back as "./..."; a
/// trailing '/' (or a trailing "." / ".." segment) marks a directory.
std::string normalize_path(std::string_view path);

/// Lowercases and validates a host name or "*." suffix glob.
std::optional<std::string> normalize_host(std::string_view host);

}  // namespace skillproof
