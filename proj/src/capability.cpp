#include "skillproof/capability.hpp"

#include <algorithm>
#include <charconv>

#include "skillproof/error.hpp"

namespace skillproof {

Vocabulary::Vocabulary(std::vector<Entry> entries) : entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(),
            [](const Entry& a, const Entry& b) { return a.token < b.token; });
  for (std::size_t i = 1; i < entries_.size(); ++i) {
    if (entries_[i].token == entries_[i - 1].token) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate vocabulary token " + entries_[i].token);
    }
  }
}

const Vocabulary& Vocabulary::standard() {
  static const Vocabulary vocab({
      {"net.egress", ArgDomain::kHost, "host"},
      {"fs.read", ArgDomain::kPath, "path"},
      {"fs.write.rev", ArgDomain::kPath, "path"},
      {"fs.write.irrev", ArgDomain::kPath, "path"},
      {"tool.invoke", ArgDomain::kOpaque, "tool"},
      {"spawn.proc", ArgDomain::kOpaque, "command"},
      {"pay", ArgDomain::kOpaque, "payee"},
      {"mutate.schema", ArgDomain::kOpaque, "schema"},
  });
  return vocab;
}

bool Vocabulary::contains(std::string_view token) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const Entry& e) { return e.token == token; });
}

CapabilityKind Vocabulary::kind(std::string_view token) const {
  if (!contains(token)) {
    throw Error(ErrorCode::kUnknownKind, "unknown capability kind '" + std::string(token) + "'");
  }
  return CapabilityKind(std::string(token));
}

const Vocabulary::Entry& Vocabulary::entry(const CapabilityKind& kind) const {
  for (const auto& e : entries_) {
    if (e.token == kind.token()) return e;
  }
  throw Error(ErrorCode::kUnknownKind, "kind '" + kind.token() + "' is not in this vocabulary");
}

std::vector<CapabilityKind> Vocabulary::kinds() const {
  std::vector<CapabilityKind> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(CapabilityKind(e.token));
  return out;
}

std::string CapabilityToken::to_string() const {
  if (arg.is_top()) return kind.token();
  return kind.token() + "(" + arg.to_string() + ")";
}

namespace {

std::optional<std::int64_t> parse_int(std::string_view s) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

AbstractValue parse_arg_value(const CapabilityKind& kind, std::string_view text,
                              const Vocabulary& vocab) {
  if (text.empty()) throw Error(ErrorCode::kMalformedPattern, "empty argument");
  if (text == "*") return AbstractValue::top();
  switch (vocab.entry(kind).domain) {
    case ArgDomain::kHost:
      return AbstractValue::host(text);
    case ArgDomain::kPath:
      return AbstractValue::path(text);
    case ArgDomain::kOpaque:
      if (text.front() == '[' && text.back() == ']') {
        auto body = text.substr(1, text.size() - 2);
        auto comma = body.find(',');
        if (comma != std::string_view::npos) {
          auto lo = parse_int(body.substr(0, comma));
          auto hi = parse_int(body.substr(comma + 1));
          if (lo && hi) return AbstractValue::interval(*lo, *hi);
        }
        throw Error(ErrorCode::kMalformedPattern, "bad interval '" + std::string(text) + "'");
      }
      return AbstractValue::opaque(std::string(text));
  }
  return AbstractValue::top();
}

CapabilityToken parse_capability_token(std::string_view text, const Vocabulary& vocab) {
  auto open = text.find('(');
  auto close = text.find(')');
  if (open == std::string_view::npos && close == std::string_view::npos) {
    return CapabilityToken{vocab.kind(text), AbstractValue::top()};
  }
  if (open == std::string_view::npos || close != text.size() - 1 || close < open ||
      text.find('(', open + 1) != std::string_view::npos) {
    throw Error(ErrorCode::kMalformedPattern, "unbalanced parentheses in '" + std::string(text) + "'");
  }
  auto kind = vocab.kind(text.substr(0, open));
  auto arg = text.substr(open + 1, close - open - 1);
  if (arg.empty()) throw Error(ErrorCode::kMalformedPattern, "empty argument in '" + std::string(text) + "'");
  bool interval = arg.front() == '[' && arg.back() == ']';
  if (!interval && arg.find(',') != std::string_view::npos) {
    throw Error(ErrorCode::kMalformedPattern,
                "capability tokens take at most one argument: '" + std::string(text) + "'");
  }
  return CapabilityToken{kind, parse_arg_value(kind, arg, vocab)};
}

std::vector<CapabilityKind> kinds_of(std::span<const CapabilityToken> tokens) {
  std::vector<CapabilityKind> out;
  for (const auto& t : tokens) out.push_back(t.kind);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace skillproof
