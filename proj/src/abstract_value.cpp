#include "skillproof/abstract_value.hpp"

#include <cctype>
#include <vector>

#include "skillproof/error.hpp"

namespace skillproof {

namespace {

bool valid_label(std::string_view label) {
  if (label.empty() || label.size() > 63) return false;
  if (label.front() == '-' || label.back() == '-') return false;
  for (char c : label) {
    if (!(std::islower(static_cast<unsigned char>(c)) ||
          std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '_')) {
      return false;
    }
  }
  return true;
}

bool valid_hostname(std::string_view host) {
  if (host.empty() || host.size() > 253) return false;
  std::size_t start = 0;
  while (true) {
    auto dot = host.find('.', start);
    auto label = host.substr(start, dot == std::string_view::npos ? std::string_view::npos
                                                                  : dot - start);
    if (!valid_label(label)) return false;
    if (dot == std::string_view::npos) return true;
    start = dot + 1;
  }
}

}  // namespace

bool PathPrefix::escapes_root() const {
  return prefix == "./.." || prefix.starts_with("./../") || prefix == "/.." ;
}

std::optional<std::string> normalize_host(std::string_view host) {
  std::string lower;
  lower.reserve(host.size());
  for (char c : host) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (lower.ends_with('.')) lower.pop_back();  // absolute FQDN form
  std::string_view body = lower;
  if (body.starts_with("*.")) body.remove_prefix(2);
  if (!valid_hostname(body)) return std::nullopt;
  return lower;
}

std::string normalize_path(std::string_view path) {
  std::string root;
  std::string_view rest = path;
  if (rest.starts_with('/')) {
    root = "/";
  } else if (rest == "~" || rest.starts_with("~/")) {
    root = "~/";
    rest.remove_prefix(1);
  } else {
    root = "./";
  }
  std::vector<std::string_view> segments;
  bool directory = rest.ends_with('/');
  std::size_t start = 0;
  while (start <= rest.size()) {
    auto slash = rest.find('/', start);
    auto seg = rest.substr(start, slash == std::string_view::npos ? std::string_view::npos
                                                                  : slash - start);
    if (seg.empty() || seg == ".") {
      if (slash == std::string_view::npos && seg == ".") directory = true;
    } else if (seg == "..") {
      if (!segments.empty() && segments.back() != "..") {
        segments.pop_back();
      } else if (root == "./") {
        segments.push_back(seg);  // climbs above the skill root
      }
      if (slash == std::string_view::npos) directory = true;
    } else {
      segments.push_back(seg);
    }
    if (slash == std::string_view::npos) break;
    start = slash + 1;
  }
  std::string out = root;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (i > 0) out.push_back('/');
    out.append(segments[i]);
  }
  if (directory && !segments.empty()) out.push_back('/');
  return out;
}

AbstractValue AbstractValue::host(std::string_view pattern) {
  auto normalized = normalize_host(pattern);
  if (!normalized) {
    throw Error(ErrorCode::kMalformedPattern, "invalid host pattern '" + std::string(pattern) + "'");
  }
  return AbstractValue(HostGlob{std::move(*normalized)});
}

AbstractValue AbstractValue::path(std::string_view path) {
  if (path.empty()) throw Error(ErrorCode::kMalformedPattern, "empty path");
  return AbstractValue(PathPrefix{normalize_path(path)});
}

AbstractValue AbstractValue::interval(std::int64_t lo, std::int64_t hi) {
  if (lo > hi) throw Error(ErrorCode::kMalformedPattern, "interval with lo > hi");
  return AbstractValue(IntInterval{lo, hi});
}

AbstractValue AbstractValue::opaque(std::string literal) {
  return AbstractValue(Opaque{std::move(literal)});
}

std::string_view AbstractValue::type_name() const {
  static constexpr std::string_view kNames[] = {"bottom", "host", "path", "int", "opaque", "top"};
  return kNames[v_.index()];
}

std::string AbstractValue::to_string() const {
  struct Printer {
    std::string operator()(const Bottom&) const { return "_|_"; }
    std::string operator()(const Top&) const { return "*"; }
    std::string operator()(const HostGlob& h) const { return h.pattern; }
    std::string operator()(const PathPrefix& p) const { return p.prefix; }
    std::string operator()(const IntInterval& i) const {
      return "[" + std::to_string(i.lo) + "," + std::to_string(i.hi) + "]";
    }
    std::string operator()(const Opaque& o) const { return o.literal; }
  };
  return std::visit(Printer{}, v_);
}

namespace {

bool host_leq(const HostGlob& a, const HostGlob& b) {
  if (a.pattern == b.pattern) return true;
  if (!b.is_wildcard()) return false;
  // "*.S" covers exactly the hosts ending in ".S". A literal host is covered
  // when it ends in ".S"; a glob "*.T" when ".T" ends in ".S".
  std::string_view suffix = std::string_view(b.pattern).substr(1);  // ".S"
  std::string_view lhs = a.pattern;
  if (a.is_wildcard()) lhs.remove_prefix(1);  // ".T"
  return lhs.ends_with(suffix);
}

bool path_leq(const PathPrefix& a, const PathPrefix& b) {
  if (a.prefix == b.prefix) return true;
  if (a.escapes_root() || b.escapes_root()) return false;
  return b.is_directory() && a.prefix.starts_with(b.prefix);
}

}  // namespace

bool value_leq(const AbstractValue& a, const AbstractValue& b) {
  if (a.is_bottom() || b.is_top()) return true;
  if (a.is_top() || b.is_bottom()) return false;
  if (auto ha = a.get_if<HostGlob>()) {
    auto hb = b.get_if<HostGlob>();
    return hb && host_leq(*ha, *hb);
  }
  if (auto pa = a.get_if<PathPrefix>()) {
    auto pb = b.get_if<PathPrefix>();
    return pb && path_leq(*pa, *pb);
  }
  if (auto ia = a.get_if<IntInterval>()) {
    auto ib = b.get_if<IntInterval>();
    return ib && ib->lo <= ia->lo && ia->hi <= ib->hi;
  }
  if (auto oa = a.get_if<Opaque>()) {
    auto ob = b.get_if<Opaque>();
    return ob && oa->literal == ob->literal;
  }
  return false;
}

}  // namespace skillproof
