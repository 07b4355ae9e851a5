#include "skillproof/arg_extract.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>

#include "skillproof/error.hpp"

namespace skillproof {

bool StrTemplate::has_holes() const {
  for (const auto& s : segments) {
    if (s.hole) return true;
  }
  return false;
}

std::string StrTemplate::literal() const {
  std::string out;
  for (const auto& s : segments) {
    if (!s.hole) out += s.text;
  }
  return out;
}

std::string StrTemplate::literal_prefix() const {
  std::string out;
  for (const auto& s : segments) {
    if (s.hole) break;
    out += s.text;
  }
  return out;
}

void StrTemplate::append_literal(std::string_view s) {
  if (s.empty()) return;
  if (!segments.empty() && !segments.back().hole) {
    segments.back().text += s;
  } else {
    segments.push_back({false, std::string(s)});
  }
}

void StrTemplate::append_hole() {
  if (!segments.empty() && segments.back().hole) return;
  segments.push_back({true, {}});
}

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool is_ident(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$' ||
         (static_cast<unsigned char>(c) & 0x80);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

// Length of the string-literal prefix ("rb", "f", ...) at `i`, or npos if no
// string literal starts there.
std::size_t string_start(std::string_view s, std::size_t i, Language lang) {
  if (i >= s.size()) return std::string_view::npos;
  char c = s[i];
  if (c == '"' || c == '\'') return 0;
  if (c == '`' && lang == Language::kNode) return 0;
  if (lang == Language::kPython) {
    std::size_t k = i;
    while (k < s.size() && k - i < 2 && std::strchr("rRbBuUfF", s[k]) && s[k] != '\0') ++k;
    if (k > i && k < s.size() && (s[k] == '"' || s[k] == '\'') &&
        (i == 0 || !is_ident(s[i - 1]))) {
      return k - i;
    }
  }
  return std::string_view::npos;
}

// Skips a string literal beginning at `i` (prefix included). Returns the index
// after it.
std::size_t skip_string(std::string_view s, std::size_t i, Language lang) {
  std::size_t plen = string_start(s, i, lang);
  std::size_t q = i + (plen == std::string_view::npos ? 0 : plen);
  char quote = s[q];
  bool triple = lang == Language::kPython && q + 2 < s.size() && s[q + 1] == quote &&
                s[q + 2] == quote;
  std::size_t k = q + (triple ? 3 : 1);
  while (k < s.size()) {
    if (s[k] == '\\') {
      k += 2;
      continue;
    }
    if (quote == '`' && s[k] == '$' && k + 1 < s.size() && s[k + 1] == '{') {
      int depth = 0;
      while (k < s.size()) {
        if (s[k] == '{') ++depth;
        if (s[k] == '}' && --depth == 0) break;
        ++k;
      }
      ++k;
      continue;
    }
    if (triple) {
      if (s.substr(k, 3) == std::string(3, quote)) return k + 3;
    } else if (s[k] == quote) {
      return k + 1;
    }
    ++k;
  }
  return s.size();
}

// Index of the bracket closing the one at `open`, string-aware; npos if
// unbalanced.
std::size_t match_bracket(std::string_view s, std::size_t open, Language lang) {
  int depth = 0;
  std::size_t i = open;
  while (i < s.size()) {
    if (string_start(s, i, lang) != std::string_view::npos) {
      i = skip_string(s, i, lang);
      continue;
    }
    char c = s[i];
    if (c == '(' || c == '[' || c == '{') ++depth;
    if (c == ')' || c == ']' || c == '}') {
      if (--depth == 0) return i;
    }
    ++i;
  }
  return std::string_view::npos;
}

std::vector<std::string_view> split_top_level(std::string_view s, Language lang) {
  std::vector<std::string_view> parts;
  int depth = 0;
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < s.size()) {
    if (string_start(s, i, lang) != std::string_view::npos) {
      i = skip_string(s, i, lang);
      continue;
    }
    char c = s[i];
    if (c == '(' || c == '[' || c == '{') ++depth;
    if (c == ')' || c == ']' || c == '}') --depth;
    if (c == ',' && depth == 0) {
      parts.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
    ++i;
  }
  auto last = trim(s.substr(start));
  if (!last.empty()) parts.push_back(last);
  return parts;
}

char decode_escape(char c) {
  switch (c) {
    case 'n': return '\n';
    case 't': return '\t';
    case 'r': return '\r';
    case '0': return '\0';
    default: return c;
  }
}

// Appends `{...}` placeholders as holes; "{{" and "}}" are literal braces.
void append_format_text(StrTemplate& out, std::string_view text) {
  std::string lit;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if ((c == '{' || c == '}') && i + 1 < text.size() && text[i + 1] == c) {
      lit.push_back(c);
      ++i;
    } else if (c == '{') {
      auto close = text.find('}', i);
      out.append_literal(lit);
      lit.clear();
      out.append_hole();
      if (close == std::string_view::npos) return;
      i = close;
    } else {
      lit.push_back(c);
    }
  }
  out.append_literal(lit);
}

// Python %-formatting: conversions become holes, "%%" is a literal '%'.
void append_percent_text(StrTemplate& out, std::string_view text) {
  std::string lit;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '%') {
      lit.push_back(text[i]);
      continue;
    }
    if (i + 1 < text.size() && text[i + 1] == '%') {
      lit.push_back('%');
      ++i;
      continue;
    }
    out.append_literal(lit);
    lit.clear();
    out.append_hole();
    ++i;
    if (i < text.size() && text[i] == '(') {
      auto close = text.find(')', i);
      i = close == std::string_view::npos ? text.size() : close + 1;
    }
    while (i < text.size() && std::strchr("#0- +*.0123456789hlL", text[i]) && text[i] != '\0') ++i;
    // text[i] is the conversion character
  }
  out.append_literal(lit);
}

struct ParsedString {
  StrTemplate tmpl;
  std::string raw_text;  // literal body with escapes decoded, placeholders kept
  bool interpolated = false;
  std::size_t end = 0;
};

ParsedString parse_string(std::string_view s, std::size_t i, Language lang) {
  ParsedString out;
  std::size_t plen = string_start(s, i, lang);
  std::string_view prefix = s.substr(i, plen);
  bool raw = prefix.find_first_of("rR") != std::string_view::npos;
  bool fstr = prefix.find_first_of("fF") != std::string_view::npos;
  std::size_t q = i + plen;
  char quote = s[q];
  bool tmpl_lit = quote == '`';
  bool triple = lang == Language::kPython && q + 2 < s.size() && s[q + 1] == quote &&
                s[q + 2] == quote;
  std::size_t k = q + (triple ? 3 : 1);
  std::string lit;
  auto flush = [&] {
    out.tmpl.append_literal(lit);
    out.raw_text += lit;
    lit.clear();
  };
  while (k < s.size()) {
    char c = s[k];
    if (c == '\\' && k + 1 < s.size()) {
      if (raw) {
        lit.push_back(c);
        lit.push_back(s[k + 1]);
      } else if (s[k + 1] != '\n') {
        lit.push_back(decode_escape(s[k + 1]));
      }
      k += 2;
      continue;
    }
    if (triple ? s.substr(k, 3) == std::string(3, quote) : c == quote) {
      k += triple ? 3 : 1;
      break;
    }
    if (fstr && (c == '{' || c == '}') && k + 1 < s.size() && s[k + 1] == c) {
      lit.push_back(c);
      k += 2;
      continue;
    }
    bool interp_open = (fstr && c == '{') ||
                       (tmpl_lit && c == '$' && k + 1 < s.size() && s[k + 1] == '{');
    if (interp_open) {
      flush();
      out.tmpl.append_hole();
      out.interpolated = true;
      std::size_t open = tmpl_lit ? k + 1 : k;
      std::size_t close = match_bracket(s, open, lang);
      k = close == std::string_view::npos ? s.size() : close + 1;
      continue;
    }
    lit.push_back(c);
    ++k;
  }
  flush();
  out.end = k;
  return out;
}

std::size_t skip_space(std::string_view s, std::size_t i) {
  while (i < s.size() && is_space(s[i])) ++i;
  return i;
}

// Consumes a primary expression: identifier chains, calls, subscripts,
// parenthesized groups and numbers. Returns `i` unchanged if none starts here.
std::size_t skip_primary(std::string_view s, std::size_t i, Language lang) {
  std::size_t start = i;
  if (i < s.size() && (s[i] == '(' || s[i] == '[')) {
    auto close = match_bracket(s, i, lang);
    if (close == std::string_view::npos) return start;
    i = close + 1;
  } else if (i < s.size() && is_ident(s[i])) {
    while (i < s.size() && is_ident(s[i])) ++i;
  } else {
    return start;
  }
  while (true) {
    std::size_t j = skip_space(s, i);
    if (j < s.size() && (s[j] == '(' || s[j] == '[')) {
      auto close = match_bracket(s, j, lang);
      if (close == std::string_view::npos) return s.size();
      i = close + 1;
    } else if (j < s.size() && s[j] == '.' && j + 1 < s.size() && !std::isdigit(static_cast<unsigned char>(s[j + 1]))) {
      j = skip_space(s, j + 1);
      if (j >= s.size() || !is_ident(s[j])) return j;
      while (j < s.size() && is_ident(s[j])) ++j;
      i = j;
    } else if (j < s.size() && s[j] == '.' ) {
      ++j;
      while (j < s.size() && is_ident(s[j])) ++j;
      i = j;
    } else {
      return i;
    }
  }
}

StrTemplate unknown() {
  StrTemplate t;
  t.append_hole();
  return t;
}

}  // namespace

std::vector<CallArg> split_call_args(const std::string& stripped, const std::string& masked,
                                     std::size_t pos, Language lang) {
  std::vector<CallArg> args;
  int depth = 0;
  std::size_t start = pos;
  std::size_t i = pos;
  auto push = [&](std::size_t end) {
    std::string_view text = trim(std::string_view(stripped).substr(start, end - start));
    std::string_view mask = trim(std::string_view(masked).substr(start, end - start));
    if (text.empty()) return;
    CallArg arg;
    if (lang == Language::kPython) {
      std::size_t k = 0;
      while (k < mask.size() && (std::isalnum(static_cast<unsigned char>(mask[k])) || mask[k] == '_')) ++k;
      std::size_t eq = skip_space(mask, k);
      if (k > 0 && !std::isdigit(static_cast<unsigned char>(mask[0])) && eq < mask.size() &&
          mask[eq] == '=' && (eq + 1 >= mask.size() || mask[eq + 1] != '=')) {
        arg.keyword = std::string(mask.substr(0, k));
        text = trim(text.substr(eq + 1));
      }
    }
    arg.text = std::string(text);
    args.push_back(std::move(arg));
  };
  while (i < masked.size()) {
    char c = masked[i];
    if (c == '(' || c == '[' || c == '{') ++depth;
    if (c == ')' || c == ']' || c == '}') {
      if (depth == 0) break;
      --depth;
    }
    if (c == ',' && depth == 0) {
      push(i);
      start = i + 1;
    }
    ++i;
  }
  push(i);
  return args;
}

std::optional<std::string> select_arg(const std::vector<CallArg>& args, int index,
                                      std::string_view keyword) {
  if (!keyword.empty()) {
    for (const auto& a : args) {
      if (a.keyword && *a.keyword == keyword) return a.text;
    }
  }
  const CallArg* star = nullptr;
  int positional = 0;
  for (const auto& a : args) {
    if (a.keyword) continue;
    if (a.text.starts_with('*') || a.text.starts_with("...")) {
      // Splatted arguments could fill any slot from here on.
      if (!star) star = &a;
      continue;
    }
    if (star == nullptr && positional == index) return a.text;
    ++positional;
  }
  if (star) return star->text;
  return std::nullopt;
}

std::optional<StrTemplate> string_expression(std::string_view expr, Language lang) {
  expr = trim(expr);
  StrTemplate out;
  bool saw_literal = false;
  std::size_t i = 0;
  bool expect_term = true;
  while (true) {
    i = skip_space(expr, i);
    if (i >= expr.size()) break;
    if (expect_term) {
      if (string_start(expr, i, lang) != std::string_view::npos) {
        ParsedString ps = parse_string(expr, i, lang);
        saw_literal = true;
        i = skip_space(expr, ps.end);
        // Python implicit concatenation and method suffixes
        if (!ps.interpolated && expr.substr(i).starts_with(".format")) {
          std::size_t j = skip_space(expr, i + 7);
          if (j < expr.size() && expr[j] == '(') {
            auto close = match_bracket(expr, j, lang);
            if (close == std::string_view::npos) return unknown();
            append_format_text(out, ps.raw_text);
            i = close + 1;
            expect_term = false;
            continue;
          }
        }
        if (lang == Language::kPython && !ps.interpolated && i < expr.size() && expr[i] == '%') {
          append_percent_text(out, ps.raw_text);
          std::size_t j = skip_space(expr, i + 1);
          std::size_t after = skip_primary(expr, j, lang);
          if (after == j) {
            if (string_start(expr, j, lang) == std::string_view::npos) return unknown();
            after = skip_string(expr, j, lang);
          }
          i = after;
          expect_term = false;
          continue;
        }
        if (i < expr.size() && expr[i] == '.') return unknown();
        for (const auto& seg : ps.tmpl.segments) {
          if (seg.hole) out.append_hole();
          else out.append_literal(seg.text);
        }
        if (lang == Language::kPython && string_start(expr, i, lang) != std::string_view::npos) {
          continue;  // adjacent literals concatenate
        }
        expect_term = false;
        continue;
      }
      std::size_t after = skip_primary(expr, i, lang);
      if (after == i) return unknown();
      out.append_hole();
      i = after;
      expect_term = false;
      continue;
    }
    if (expr[i] == '+' && (i + 1 >= expr.size() || (expr[i + 1] != '+' && expr[i + 1] != '='))) {
      ++i;
      expect_term = true;
      continue;
    }
    return unknown();
  }
  if (!saw_literal) return std::nullopt;
  if (expect_term) return unknown();  // dangling '+'
  return out;
}

std::optional<std::vector<std::optional<StrTemplate>>> list_expression(std::string_view expr,
                                                                      Language lang) {
  expr = trim(expr);
  if (expr.size() < 2) return std::nullopt;
  char open = expr.front();
  if (open != '[' && open != '(') return std::nullopt;
  if (match_bracket(expr, 0, lang) != expr.size() - 1) return std::nullopt;
  std::vector<std::optional<StrTemplate>> out;
  for (auto part : split_top_level(expr.substr(1, expr.size() - 2), lang)) {
    if (part.starts_with('*') || part.starts_with("...")) {
      out.push_back(unknown());
    } else {
      out.push_back(string_expression(part, lang));
    }
  }
  if (open == '(' && out.size() == 1) {
    // "(x)" is a parenthesized expression unless written "(x,)"
    auto inner = trim(expr.substr(1, expr.size() - 2));
    if (!inner.ends_with(',')) return std::nullopt;
  }
  return out;
}

std::vector<StrTemplate> shell_words(std::string_view s, std::size_t pos) {
  std::vector<StrTemplate> words;
  std::size_t i = pos;
  while (true) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' ||
                            (s[i] == '\\' && i + 1 < s.size() && s[i + 1] == '\n'))) {
      i += s[i] == '\\' ? 2 : 1;
    }
    if (i >= s.size() || std::strchr("\n;&|)<>", s[i]) != nullptr) break;
    StrTemplate word;
    std::string lit;
    auto flush = [&] {
      word.append_literal(lit);
      lit.clear();
    };
    auto hole = [&] {
      flush();
      word.append_hole();
    };
    bool stop = false;
    while (i < s.size()) {
      char c = s[i];
      if (c == ' ' || c == '\t' || std::strchr("\n;&|)", c) != nullptr) break;
      if (c == '<' || c == '>') {
        // a bare fd number before a redirection belongs to the operator
        bool all_digits = word.segments.empty() && !lit.empty() &&
                          lit.find_first_not_of("0123456789") == std::string::npos;
        if (all_digits) lit.clear();
        stop = true;
        break;
      }
      if (c == '\\' && i + 1 < s.size()) {
        if (s[i + 1] != '\n') lit.push_back(s[i + 1]);
        i += 2;
        continue;
      }
      if (c == '\'') {
        auto close = s.find('\'', i + 1);
        if (close == std::string_view::npos) close = s.size();
        lit += s.substr(i + 1, close - i - 1);
        i = close + 1;
        continue;
      }
      if (c == '"') {
        ++i;
        while (i < s.size() && s[i] != '"') {
          if (s[i] == '\\' && i + 1 < s.size() && std::strchr("$`\"\\\n", s[i + 1])) {
            if (s[i + 1] != '\n') lit.push_back(s[i + 1]);
            i += 2;
          } else if (s[i] == '$' && i + 1 < s.size() &&
                     (is_ident(s[i + 1]) || std::strchr("{(@*#?!-", s[i + 1]))) {
            hole();
            ++i;
            if (s[i] == '{' || s[i] == '(') {
              int depth = 0;
              char o = s[i], cl = o == '{' ? '}' : ')';
              while (i < s.size()) {
                if (s[i] == o) ++depth;
                if (s[i] == cl && --depth == 0) break;
                ++i;
              }
              ++i;
            } else if (is_ident(s[i])) {
              while (i < s.size() && is_ident(s[i]) && s[i] != '$') ++i;
            } else {
              ++i;
            }
          } else if (s[i] == '`') {
            hole();
            auto close = s.find('`', i + 1);
            i = close == std::string_view::npos ? s.size() : close + 1;
          } else {
            lit.push_back(s[i++]);
          }
        }
        ++i;
        continue;
      }
      if (c == '$' && i + 1 < s.size() && s[i + 1] == '\'') {
        auto close = s.find('\'', i + 2);
        if (close == std::string_view::npos) close = s.size();
        lit += s.substr(i + 2, close - i - 2);
        i = close + 1;
        continue;
      }
      if (c == '$' || c == '`') {
        hole();
        if (c == '`') {
          auto close = s.find('`', i + 1);
          i = close == std::string_view::npos ? s.size() : close + 1;
          continue;
        }
        ++i;
        if (i < s.size() && (s[i] == '{' || s[i] == '(')) {
          int depth = 0;
          char o = s[i], cl = o == '{' ? '}' : ')';
          while (i < s.size()) {
            if (s[i] == o) ++depth;
            if (s[i] == cl && --depth == 0) break;
            ++i;
          }
          ++i;
        } else if (i < s.size() && is_ident(s[i])) {
          while (i < s.size() && is_ident(s[i]) && s[i] != '$') ++i;
        } else if (i < s.size()) {
          ++i;
        }
        continue;
      }
      if (c == '*' || c == '?' || c == '[') {
        hole();  // glob
        ++i;
        continue;
      }
      if (c == '{' && s.substr(i).find('}') != std::string_view::npos &&
          s.substr(i, s.substr(i).find('}')).find(',') != std::string_view::npos) {
        hole();  // brace expansion
        i += s.substr(i).find('}') + 1;
        continue;
      }
      lit.push_back(c);
      ++i;
    }
    flush();
    if (!word.segments.empty()) words.push_back(std::move(word));
    if (stop) break;
  }
  return words;
}

std::vector<StrTemplate> split_command_line(const StrTemplate& command) {
  std::vector<StrTemplate> words;
  StrTemplate current;
  bool in_word = false;
  char quote = 0;
  for (const auto& seg : command.segments) {
    if (seg.hole) {
      current.append_hole();
      in_word = true;
      continue;
    }
    for (char c : seg.text) {
      if (quote != 0) {
        if (c == quote) {
          quote = 0;
        } else {
          current.append_literal(std::string_view(&c, 1));
        }
        continue;
      }
      if (c == '\'' || c == '"') {
        quote = c;
        in_word = true;
        continue;
      }
      if (is_space(c)) {
        if (in_word) words.push_back(std::move(current));
        current = {};
        in_word = false;
        continue;
      }
      current.append_literal(std::string_view(&c, 1));
      in_word = true;
    }
  }
  if (in_word) words.push_back(std::move(current));
  return words;
}

AbstractValue template_to_path(const StrTemplate& t) {
  try {
    if (!t.has_holes()) {
      std::string lit = t.literal();
      return lit.empty() ? AbstractValue::top() : AbstractValue::path(lit);
    }
    std::string prefix = t.literal_prefix();
    auto slash = prefix.rfind('/');
    if (slash == std::string::npos) return AbstractValue::top();
    return AbstractValue::path(prefix.substr(0, slash + 1));
  } catch (const Error&) {
    return AbstractValue::top();
  }
}

AbstractValue template_to_host(const StrTemplate& t) {
  // Holes are flattened to a marker byte so the URL can be cut as text.
  constexpr char kHole = '\x01';
  std::string all;
  for (const auto& seg : t.segments) all += seg.hole ? std::string(1, kHole) : seg.text;

  std::size_t start = 0;
  auto scheme = all.find("://");
  if (scheme != std::string::npos) {
    if (all.substr(0, scheme).find(kHole) != std::string::npos) return AbstractValue::top();
    start = scheme + 3;
  }
  auto stop = all.find_first_of("/?#", start);
  std::string h = all.substr(start, stop == std::string::npos ? std::string::npos : stop - start);
  auto at = h.rfind('@');
  if (at != std::string::npos) {
    if (h.substr(0, at).find(kHole) != std::string::npos) return AbstractValue::top();
    h = h.substr(at + 1);
  }
  auto colon = h.rfind(':');
  if (colon != std::string::npos &&
      h.find_first_not_of("0123456789", colon + 1) == std::string::npos) {
    h.resize(colon);
  }
  if (h.empty()) return AbstractValue::top();

  auto holes = std::count(h.begin(), h.end(), kHole);
  if (holes == 0) {
    auto norm = normalize_host(h);
    if (!norm || norm->starts_with("*.")) return AbstractValue::top();
    return AbstractValue::host(*norm);
  }
  // "{sub}.example.com": the interpolation is taken to fill leading labels.
  if (holes == 1 && h.size() > 1 && h[0] == kHole && h[1] == '.') {
    auto norm = normalize_host(h.substr(2));
    if (!norm || norm->find('.') == std::string::npos) return AbstractValue::top();
    return AbstractValue::host("*." + *norm);
  }
  return AbstractValue::top();
}

AbstractValue template_to_opaque(const StrTemplate& t) {
  if (t.has_holes()) return AbstractValue::top();
  return AbstractValue::opaque(t.literal());
}

}  // namespace skillproof
